//! Executes a suite through the gateway and judges every reply.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use motorscene_core::evaluation::{judge, Verdict};
use motorscene_core::scene::Scene;
use motorscene_core::templates::Route;
use motorscene_gateway::{complete_trial, scene_context_render, Provider};

use crate::aggregate::Endpoint;
use crate::record::{Latency, RunRecord, Tokens};
use crate::suite::{BenchmarkSuite, Job, ValidatorMode};
use crate::BenchError;

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Worker threads; rows are still emitted in job order.
    pub parallelism: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { parallelism: 1 }
    }
}

struct Prepared {
    scene: Scene,
    context: String,
}

fn transport_verdict(error: &str) -> Verdict {
    Verdict {
        parse_ok: false,
        semantic_ok: None,
        fidelity_ok: None,
        spatial_error: None,
        diagnostics: vec![format!("provider error: {error}")],
    }
}

fn run_job(suite: &BenchmarkSuite, job: &Job<'_>, prepared: &Prepared, provider: &dyn Provider) -> RunRecord {
    let task = job.task;
    let strategy = suite.strategy(job.block, job.method);
    let kind = strategy.output_kind;

    let mut judged: Vec<(Verdict, Option<Scene>)> = Vec::new();
    let mut parse_execute_s = 0.0;
    let completion = complete_trial(
        provider,
        &strategy,
        &prepared.context,
        &task.instruction,
        &job.policy,
        job.trial,
        |raw| {
            let started = Instant::now();
            let (verdict, after) = judge(task, &prepared.scene, raw, kind);
            parse_execute_s += started.elapsed().as_secs_f64();
            let ok = match suite.validator {
                ValidatorMode::Parse => verdict.parse_ok,
                ValidatorMode::Semantic => verdict.parse_ok && verdict.semantic_ok != Some(false),
            };
            judged.push((verdict, after));
            ok
        },
    );

    // Transport failures never reach the validator; give them a failed verdict.
    let mut replies = judged.into_iter();
    let mut attempt_verdicts = Vec::with_capacity(completion.records.len());
    let mut afters = Vec::with_capacity(completion.records.len());
    for rec in &completion.records {
        match &rec.error {
            Some(err) => {
                attempt_verdicts.push(transport_verdict(err));
                afters.push(None);
            }
            None => {
                let (v, s) = replies.next().expect("one judged reply per successful attempt");
                attempt_verdicts.push(v);
                afters.push(s);
            }
        }
    }

    let final_index = completion
        .success_index
        .map(|i| i as usize)
        .unwrap_or(completion.records.len().saturating_sub(1));
    let verdict = attempt_verdicts
        .get(final_index)
        .cloned()
        .unwrap_or_else(|| transport_verdict("no attempts"));

    let started = Instant::now();
    let render_scene = afters.get(final_index).cloned().flatten().unwrap_or_else(|| prepared.scene.clone());
    let rendered = render_scene.to_json();
    std::hint::black_box(&rendered);
    let render_ready_s = started.elapsed().as_secs_f64();

    let api_s = completion.api_latency_s();
    let mut endpoints = vec![Endpoint::Parse];
    if !task.semantic_rules.is_empty() {
        endpoints.push(Endpoint::Semantic);
    }
    if task.expected_chain.is_some() {
        endpoints.push(Endpoint::Fidelity);
    }
    if task.expected_positions.is_some() {
        endpoints.push(Endpoint::ExactPlacement);
    }

    RunRecord {
        suite: suite.name.clone(),
        block: job.block.name.clone(),
        task_id: task.id.clone(),
        trial: job.trial,
        method: job.method,
        policy_k: job.policy.max_attempts,
        route: Route::Llm,
        tokens: Tokens {
            completion_success_rows: completion.accepted().map(|r| r.completion_tokens),
            total_all_attempts: completion.total_tokens(),
        },
        latency: Latency {
            api_s,
            parse_execute_s,
            render_ready_s,
            total_s: api_s + parse_execute_s + render_ready_s,
        },
        attempts: completion.records,
        attempt_verdicts,
        verdict,
        endpoints,
    }
}

/// Runs every job of `suite`, handing rows to `sink` in job order, and returns them.
///
/// Benchmark mode never consults the keyword router: every row is LLM-routed.
/// Provider outages become rows with failed attempts, never missing rows.
pub fn run_suite<F>(
    suite: &BenchmarkSuite,
    base_dir: Option<&Path>,
    provider: &dyn Provider,
    options: &RunOptions,
    mut sink: F,
) -> Result<Vec<RunRecord>, BenchError>
where
    F: FnMut(&RunRecord) -> Result<(), BenchError>,
{
    suite.validate()?;
    let prepared: Vec<Prepared> = suite
        .blocks
        .iter()
        .map(|b| {
            let scene = b.scene.build(base_dir)?;
            let context = scene_context_render(&scene, b.context_limit);
            Ok(Prepared { scene, context })
        })
        .collect::<Result<_, BenchError>>()?;
    let block_index = |job: &Job<'_>| {
        suite
            .blocks
            .iter()
            .position(|b| std::ptr::eq(b, job.block))
            .expect("job block belongs to suite")
    };

    let jobs = suite.jobs();
    let workers = options.parallelism.clamp(1, jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, RunRecord)>();
    let mut out = Vec::with_capacity(jobs.len());
    let mut sink_error = None;

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (jobs, prepared, next, abort) = (&jobs, &prepared, &next, &abort);
            scope.spawn(move || loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let rec = run_job(suite, job, &prepared[block_index(job)], provider);
                if tx.send((i, rec)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        // single writer: re-sequence rows so output order is independent of scheduling
        let mut pending = BTreeMap::new();
        let mut want = 0usize;
        for (i, rec) in rx {
            pending.insert(i, rec);
            while let Some(rec) = pending.remove(&want) {
                if sink_error.is_none() {
                    if let Err(e) = sink(&rec) {
                        sink_error = Some(e);
                        abort.store(true, Ordering::Relaxed);
                    }
                }
                out.push(rec);
                want += 1;
            }
        }
    });

    match sink_error {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
