//! Per-method success rates with Wilson intervals, token and latency summaries.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use motorscene_core::evaluation::Verdict;
use motorscene_core::stats::{describe, wilson_ci, Describe, Interval};
use motorscene_core::templates::Route;
use motorscene_gateway::StrategyName;
use serde::{Deserialize, Serialize};

use crate::record::RunRecord;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Parse,
    Semantic,
    Fidelity,
    ExactPlacement,
}

impl Endpoint {
    pub const ALL: [Endpoint; 4] = [Endpoint::Parse, Endpoint::Semantic, Endpoint::Fidelity, Endpoint::ExactPlacement];

    pub fn met_by(self, v: &Verdict) -> bool {
        match self {
            Endpoint::Parse => v.parse_ok,
            Endpoint::Semantic => v.semantic_ok == Some(true),
            Endpoint::Fidelity => v.fidelity_ok == Some(true),
            Endpoint::ExactPlacement => v.exact_success(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Endpoint::Parse => "parse",
            Endpoint::Semantic => "semantic",
            Endpoint::Fidelity => "fidelity",
            Endpoint::ExactPlacement => "exact_placement",
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Endpoint {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "parse" => Ok(Endpoint::Parse),
            "semantic" => Ok(Endpoint::Semantic),
            "fidelity" | "sequence_fidelity" => Ok(Endpoint::Fidelity),
            "exact_placement" | "exact" => Ok(Endpoint::ExactPlacement),
            other => Err(BenchError::Config(format!("unknown endpoint '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub total: Describe,
    pub api: Describe,
    pub parse_execute: Describe,
    pub render_ready: Describe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub suite: String,
    pub method: StrategyName,
    pub endpoint: Endpoint,
    pub k: u32,
    pub successes: u64,
    pub n: u64,
    pub rate: f64,
    pub wilson: Interval,
    /// Mean completion tokens over rows whose reply parsed within k attempts.
    pub avg_completion_tokens_success_rows: Option<f64>,
    /// Mean prompt+completion tokens over the first k attempts of every row.
    pub avg_total_tokens_all_attempts: f64,
    pub latency: Option<LatencySummary>,
    pub template_routed: u64,
    pub llm_routed: u64,
    pub outages: u64,
}

/// Rows that answer pass@k: rows run under exactly budget `k` when present,
/// otherwise the first k attempts of rows run under a larger budget.
pub fn rows_for_k(records: &[RunRecord], k: u32) -> Vec<&RunRecord> {
    let exact: Vec<&RunRecord> = records.iter().filter(|r| r.policy_k == k).collect();
    if !exact.is_empty() {
        return exact;
    }
    records.iter().filter(|r| r.policy_k > k).collect()
}

fn row_latency(r: &RunRecord, k: u32) -> [f64; 4] {
    let api: f64 = r.attempts.iter().take(k as usize).map(|a| a.api_latency_s).sum();
    let total = api + r.latency.parse_execute_s + r.latency.render_ready_s;
    [total, api, r.latency.parse_execute_s, r.latency.render_ready_s]
}

pub fn aggregate(records: &[RunRecord], endpoint: Endpoint, k: u32) -> Result<Vec<MethodAggregate>, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyRecords);
    }
    if k == 0 {
        return Err(BenchError::Config("pass@k needs k >= 1".into()));
    }
    let suite = &records[0].suite;
    if let Some(other) = records.iter().find(|r| &r.suite != suite) {
        return Err(BenchError::MixedSuites(suite.clone(), other.suite.clone()));
    }
    let rows = rows_for_k(records, k);
    if rows.is_empty() {
        return Err(BenchError::Config(format!("no rows ran with an attempt budget of at least {k}")));
    }

    let mut by_method: IndexMap<StrategyName, Vec<&RunRecord>> = IndexMap::new();
    for r in rows {
        by_method.entry(r.method).or_default().push(r);
    }

    let mut out = Vec::new();
    for (method, rows) in by_method {
        let applicable: Vec<&RunRecord> = rows.iter().copied().filter(|r| r.applies(endpoint)).collect();
        if applicable.is_empty() {
            continue;
        }
        let n = applicable.len() as u64;
        let successes = applicable.iter().filter(|r| r.success_at(endpoint, k)).count() as u64;
        let wilson = wilson_ci(successes, n, 0.95).expect("n > 0");

        let parsed_tokens: Vec<f64> = applicable
            .iter()
            .filter_map(|r| {
                r.attempts
                    .iter()
                    .zip(&r.attempt_verdicts)
                    .take(k as usize)
                    .find(|(_, v)| v.parse_ok)
                    .map(|(a, _)| a.completion_tokens as f64)
            })
            .collect();
        let total_tokens: Vec<f64> = applicable
            .iter()
            .map(|r| r.attempts.iter().take(k as usize).map(|a| a.total_tokens()).sum::<u64>() as f64)
            .collect();

        let lat: Vec<[f64; 4]> = applicable.iter().map(|r| row_latency(r, k)).collect();
        let column = |i: usize| describe(&lat.iter().map(|l| l[i]).collect::<Vec<_>>());
        let latency = match (column(0), column(1), column(2), column(3)) {
            (Some(total), Some(api), Some(parse_execute), Some(render_ready)) => Some(LatencySummary {
                total,
                api,
                parse_execute,
                render_ready,
            }),
            _ => None,
        };

        out.push(MethodAggregate {
            suite: suite.clone(),
            method,
            endpoint,
            k,
            successes,
            n,
            rate: successes as f64 / n as f64,
            wilson,
            avg_completion_tokens_success_rows: mean(&parsed_tokens),
            avg_total_tokens_all_attempts: mean(&total_tokens).unwrap_or(0.0),
            latency,
            template_routed: applicable.iter().filter(|r| r.route != Route::Llm).count() as u64,
            llm_routed: applicable.iter().filter(|r| r.route == Route::Llm).count() as u64,
            outages: applicable.iter().filter(|r| r.outage()).count() as u64,
        });
    }
    Ok(out)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Flat CSV row for an aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub suite: String,
    pub method: StrategyName,
    pub endpoint: Endpoint,
    pub k: u32,
    pub successes: u64,
    pub n: u64,
    pub rate_pct: f64,
    pub ci_lo_pct: f64,
    pub ci_hi_pct: f64,
    pub avg_completion_tokens_success_rows: Option<f64>,
    pub avg_total_tokens_all_attempts: f64,
    pub latency_mean_s: Option<f64>,
    pub latency_sd_s: Option<f64>,
    pub latency_median_s: Option<f64>,
    pub latency_q1_s: Option<f64>,
    pub latency_q3_s: Option<f64>,
    pub template_routed: u64,
    pub llm_routed: u64,
}

impl From<&MethodAggregate> for AggregateRow {
    fn from(a: &MethodAggregate) -> Self {
        let t = a.latency.as_ref().map(|l| &l.total);
        AggregateRow {
            suite: a.suite.clone(),
            method: a.method,
            endpoint: a.endpoint,
            k: a.k,
            successes: a.successes,
            n: a.n,
            rate_pct: 100.0 * a.rate,
            ci_lo_pct: 100.0 * a.wilson.lo,
            ci_hi_pct: 100.0 * a.wilson.hi,
            avg_completion_tokens_success_rows: a.avg_completion_tokens_success_rows,
            avg_total_tokens_all_attempts: a.avg_total_tokens_all_attempts,
            latency_mean_s: t.map(|d| d.mean),
            latency_sd_s: t.map(|d| d.sd),
            latency_median_s: t.map(|d| d.median),
            latency_q1_s: t.map(|d| d.q1),
            latency_q3_s: t.map(|d| d.q3),
            template_routed: a.template_routed,
            llm_routed: a.llm_routed,
        }
    }
}

/// Every endpoint that applies to some row, at every k up to the largest budget run.
pub fn aggregate_all(records: &[RunRecord]) -> Result<Vec<MethodAggregate>, BenchError> {
    let max_k = records.iter().map(|r| r.policy_k).max().ok_or(BenchError::EmptyRecords)?;
    let mut out = Vec::new();
    for endpoint in Endpoint::ALL {
        if !records.iter().any(|r| r.applies(endpoint)) {
            continue;
        }
        for k in 1..=max_k {
            out.extend(aggregate(records, endpoint, k)?);
        }
    }
    Ok(out)
}
