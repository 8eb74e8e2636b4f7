//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test -p motorscene-bench --test acceptance`.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use motorscene_bench::aggregate::aggregate_all;
use motorscene_bench::record::write_csv;
use motorscene_bench::{
    aggregate, pairwise_report, read_jsonl, run_suite, BenchmarkSuite, Endpoint, JsonlWriter, RunOptions,
};
use motorscene_core::algebra::Multivector;
use motorscene_core::baseline::{apply_mat4, apply_se3, mat_mul, rotation_mat4, translation_mat4, Se3Op, Se3Request, IDENTITY4};
use motorscene_core::chain::{ChainOp, OperationChain};
use motorscene_core::conformal::{compose, dilator, ni, plane_axis, plane_rotor, rotor, translator};
use motorscene_core::evaluation::{check_sequence_fidelity, judge, OutputKind, Task};
use motorscene_core::expr::{execute_request, parse_cga, EditRequest, Factor};
use motorscene_core::scene::default_scene;
use motorscene_core::stats::{
    achieved_power, effect_sizes, fisher_exact_two_sided, two_prop_ztest, wilson_ci, ContingencySummary,
};
use motorscene_core::templates::{format_number, plan};
use motorscene_gateway::mock::MockEntry;
use motorscene_gateway::{MockFixture, MockProvider};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn near(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{what}: got {got}, want {want} ± {tol}"))
}

fn within(what: &str, elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

fn bench_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

// -- primitive verification suite -------------------------------------------

fn primitive_suite() -> Check {
    const TOL: f64 = 1e-9;
    let started = Instant::now();
    let m = compose(&[translator(2.0, 1.0, 0.0).unwrap(), translator(1.0, 0.0, 3.0).unwrap()]).unwrap();
    let p = m.apply_to([0.0; 3]).unwrap();
    ensure(dist(p, [3.0, 1.0, 3.0]) < TOL, || format!("T·T on origin gave {p:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let u = Multivector::euclidean_vector(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let v = Multivector::euclidean_vector(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let Ok(r) = rotor(rng.gen_range(-3.0..3.0), &u, &v) else { continue };
        let a: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
        let b: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
        let d = dist(r.apply_to(a).unwrap(), r.apply_to(b).unwrap());
        worst = worst.max((d - dist(a, b)).abs());
    }
    ensure(worst < TOL, || format!("rotation changed a distance by {worst:e}"))?;

    let m = compose(&[translator(5.0, 0.0, 0.0).unwrap(), plane_rotor(FRAC_PI_2, 1, 2).unwrap()]).unwrap();
    let p = m.apply_to([1.0, 0.0, 0.0]).unwrap();
    ensure(dist(p, [5.0, 1.0, 0.0]) < TOL, || format!("R then T gave {p:?}"))?;
    let p = dilator(3.0).unwrap().apply_to([2.0, 0.0, 0.0]).unwrap();
    ensure(dist(p, [6.0, 0.0, 0.0]) < TOL, || format!("D(3) gave {p:?}"))?;
    let elapsed = started.elapsed();
    within("primitive suite", elapsed, Duration::from_secs(1))?;
    Ok(format!("4 checks, isometry drift {worst:.1e}, {elapsed:.2?}"))
}

// -- worked derivations -----------------------------------------------------

fn translation_of(expr: &str) -> Result<[f64; 3], String> {
    let ast = parse_cga(expr).map_err(|e| e.to_string())?;
    match ast.factors.as_slice() {
        [Factor::T(v)] => Ok(v.eval()),
        other => Err(format!("expected one translator, got {other:?}")),
    }
}

fn derivations() -> Check {
    const TOL: f64 = 1e-9;
    let scene = default_scene();

    let (_, req) = plan("Move the red sphere next to the blue cube, to its left side.", &scene).map_err(|e| e.to_string())?;
    let d = translation_of(&req.assignments["RedSphere"])?;
    ensure(dist(d, [2.0, 0.0, 0.0]) < TOL, || format!("case 1 displacement {d:?}"))?;
    let motor = translator(d[0], d[1], d[2]).unwrap();
    let expected = Multivector::one() - Multivector::e1() * ni();
    ensure(motor.value.approx_eq(&expected, 1e-12), || format!("case 1 motor {:?}", motor.value))?;
    let after = execute_request(&scene, &req);
    ensure(after.all_ok(), || format!("case 1 failed: {:?}", after.errors()))?;
    let red = after.scene.get("RedSphere").unwrap();
    let blue = after.scene.get("BlueCube").unwrap();
    ensure(dist(red.center, [2.0, 0.0, 0.0]) < TOL, || format!("RedSphere at {:?}", red.center))?;
    let tangency = (red.aabb().max[0] - blue.aabb().min[0]).abs();
    ensure(tangency < TOL, || format!("tangency residual {tangency:e}"))?;

    let (_, req) = plan("Place the green sphere on top of the blue cube.", &scene).map_err(|e| e.to_string())?;
    let d = translation_of(&req.assignments["GreenSphere"])?;
    ensure(dist(d, [7.0, 1.7, -2.0]) < TOL, || format!("case 2 displacement {d:?}"))?;
    let after = execute_request(&scene, &req);
    let green = after.scene.get("GreenSphere").unwrap();
    let blue = after.scene.get("BlueCube").unwrap();
    ensure(dist(green.center, [4.0, 1.7, 0.0]) < TOL, || format!("GreenSphere at {:?}", green.center))?;
    let support = (green.aabb().min[1] - blue.aabb().max[1]).abs();
    ensure(support < TOL, || format!("support residual {support:e}"))?;
    Ok(format!("case 1 tangency {tangency:.1e}, case 2 support {support:.1e}"))
}

// -- differential oracle ----------------------------------------------------

#[derive(Clone, Copy)]
enum Step {
    T([f64; 3]),
    R(usize, usize, f64),
}

const PLANES: [(usize, usize); 6] = [(1, 2), (2, 1), (2, 3), (3, 2), (3, 1), (1, 3)];

fn differential() -> Check {
    let started = Instant::now();
    let scene = default_scene();
    let names: Vec<String> = scene.names().map(str::to_string).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let name = &names[rng.gen_range(0..names.len())];
        let len = rng.gen_range(1..=5);
        let steps: Vec<Step> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Step::T(std::array::from_fn(|_| rng.gen_range(-5.0..5.0)))
                } else {
                    let (i, j) = PLANES[rng.gen_range(0..PLANES.len())];
                    Step::R(i, j, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                }
            })
            .collect();

        // CGA: written right-to-left
        let expr: Vec<String> = steps
            .iter()
            .rev()
            .map(|s| match *s {
                Step::T(v) => format!("T({}*e1 + {}*e2 + {}*e3)", format_number(v[0]), format_number(v[1]), format_number(v[2])),
                Step::R(i, j, a) => format!("R({}, e{i}, e{j})", format_number(a)),
            })
            .collect();
        let cga = execute_request(&scene, &EditRequest::single(name.clone(), expr.join(" * ")));
        ensure(cga.all_ok(), || format!("cga failed: {:?}", cga.errors()))?;

        let ops: Vec<Se3Op> = steps
            .iter()
            .map(|s| match *s {
                Step::T(v) => Se3Op::T { v },
                Step::R(i, j, a) => Se3Op::R {
                    axis: plane_axis(i, j).unwrap(),
                    angle_rad: a,
                },
            })
            .collect();
        let se3 = apply_se3(&scene, &Se3Request {
            assignments: IndexMap::from([(name.clone(), ops)]),
        });

        let m = steps.iter().fold(IDENTITY4, |acc, s| {
            let step = match *s {
                Step::T(v) => translation_mat4(v),
                Step::R(i, j, a) => rotation_mat4(plane_axis(i, j).unwrap(), a),
            };
            mat_mul(&step, &acc)
        });
        let mat = apply_mat4(&scene, &IndexMap::from([(name.clone(), m)]));

        let c = cga.scene.get(name).unwrap().center;
        let s = se3.scene.get(name).unwrap().center;
        let x = mat.scene.get(name).unwrap().center;
        worst = worst.max(dist(c, s)).max(dist(c, x)).max(dist(s, x));
    }
    ensure(worst < 1e-9, || format!("executors disagree by {worst:e}"))?;
    let elapsed = started.elapsed();
    within("differential oracle", elapsed, Duration::from_secs(30))?;
    Ok(format!("10000 chains, max disagreement {worst:.1e}, {elapsed:.2?}"))
}

// -- statistics goldens -----------------------------------------------------

fn table(a: u64, na: u64, b: u64, nb: u64) -> ContingencySummary {
    ContingencySummary::new(a, na, b, nb).unwrap()
}

fn statistics() -> Check {
    let w = wilson_ci(108, 120, 0.95).unwrap();
    near("wilson 108/120 lo", 100.0 * w.lo, 83.3, 0.1)?;
    near("wilson 108/120 hi", 100.0 * w.hi, 94.2, 0.1)?;
    let w = wilson_ci(100, 100, 0.95).unwrap();
    near("wilson 100/100 lo", 100.0 * w.lo, 96.3, 0.1)?;
    near("wilson 100/100 hi", 100.0 * w.hi, 100.0, 0.1)?;
    for (a, b, p) in [(45, 24, 0.0028), (42, 24, 0.0103), (44, 24, 0.0044), (45, 42, 0.7755)] {
        near(&format!("fisher {a}/100 vs {b}/100"), fisher_exact_two_sided(&table(a, 100, b, 100)), p, 0.0005)?;
    }
    near("fisher 9/20 vs 5/20", fisher_exact_two_sided(&table(9, 20, 5, 20)), 0.3203, 0.0005)?;
    let z = two_prop_ztest(&table(117, 120, 108, 120)).map_err(|e| e.to_string())?;
    near("z-test p", z.p_two_sided, 0.016, 0.001)?;
    near("z-test ci lo", z.ci_pp.0, 1.4, 0.1)?;
    near("z-test ci hi", z.ci_pp.1, 13.6, 0.1)?;
    let fx = effect_sizes(&table(45, 100, 24, 100));
    near("RD", fx.risk_diff_pp.estimate, 21.0, 0.1)?;
    near("RD lo", fx.risk_diff_pp.lo, 8.1, 0.1)?;
    near("RD hi", fx.risk_diff_pp.hi, 33.9, 0.1)?;
    let rr = fx.relative_risk.ok_or("relative risk undefined")?;
    near("RR", rr.estimate, 1.88, 0.01)?;
    near("RR lo", rr.lo, 1.24, 0.01)?;
    near("RR hi", rr.hi, 2.83, 0.01)?;
    let power = achieved_power(0.24, 0.45, 0.05, 100).map_err(|e| e.to_string())?;
    near("achieved power", power, 0.88, 0.01)?;
    Ok(format!("wilson, 5 fisher, z-test, effect sizes, power {power:.3}"))
}

// -- parse/semantic separation ----------------------------------------------

#[derive(Deserialize)]
struct SeparationFixture {
    task: Task,
    outputs: Vec<LabelledOutput>,
}

#[derive(Deserialize)]
struct LabelledOutput {
    label: String,
    raw: String,
}

fn separation() -> Check {
    let path = bench_dir().join("tests/fixtures/separation.json");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let fx: SeparationFixture = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    ensure(fx.outputs.len() == 12, || format!("{} outputs", fx.outputs.len()))?;
    let scene = default_scene();
    let (mut parsed, mut semantic) = (0, 0);
    for out in &fx.outputs {
        let (v, _) = judge(&fx.task, &scene, &out.raw, OutputKind::CgaJson);
        ensure(v.is_layered(), || format!("verdict not layered for {:?}", out.raw))?;
        let sem = v.semantic_ok == Some(true);
        let label = match (v.parse_ok, sem) {
            (false, _) => "malformed",
            (true, false) => "wrong",
            (true, true) => "correct",
        };
        ensure(label == out.label, || format!("{:?} judged {label}, labelled {}", out.raw, out.label))?;
        parsed += v.parse_ok as u32;
        semantic += sem as u32;
    }
    ensure((parsed, semantic) == (8, 4), || format!("parse {parsed}/12, semantic {semantic}/12"))?;
    Ok(format!("parse {parsed}/12, semantic {semantic}/12"))
}

// -- sequence fidelity ------------------------------------------------------

fn symbol(k: u8) -> ChainOp {
    match k {
        0 => ChainOp::Translate { v: [1.0, 0.0, 0.0] },
        1 => ChainOp::Rotate {
            axis: [0.0, 1.0, 0.0],
            angle: FRAC_PI_2,
        },
        _ => ChainOp::Dilate { factor: 2.0 },
    }
}

fn all_words(max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|w: &Vec<u8>| {
                (0..3u8).map(move |k| {
                    let mut w = w.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Subsequence by enumerating every index subset of `actual`.
fn brute_subsequence(expected: &[u8], actual: &[u8]) -> bool {
    (0u32..1 << actual.len()).any(|mask| {
        let picked: Vec<u8> = (0..actual.len()).filter(|i| mask >> i & 1 == 1).map(|i| actual[i]).collect();
        picked == expected
    })
}

fn fidelity() -> Check {
    let words = all_words(4);
    let chains: Vec<OperationChain> = words.iter().map(|w| w.iter().map(|&k| symbol(k)).collect()).collect();
    let mut pairs = 0u64;
    for (we, ce) in words.iter().zip(&chains) {
        for (wa, ca) in words.iter().zip(&chains) {
            let fast = check_sequence_fidelity(ce, ca);
            let slow = brute_subsequence(we, wa);
            ensure(fast == slow, || format!("expected {we:?} actual {wa:?}: checker {fast}, oracle {slow}"))?;
            pairs += 1;
        }
    }
    // reordered chains: translate-then-rotate is not rotate-then-translate
    let tr: OperationChain = [symbol(0), symbol(1)].into_iter().collect();
    let rt: OperationChain = [symbol(1), symbol(0)].into_iter().collect();
    ensure(!check_sequence_fidelity(&tr, &rt), || "reordered T,R accepted".into())?;
    let trd: OperationChain = [symbol(0), symbol(1), symbol(2)].into_iter().collect();
    let tdr: OperationChain = [symbol(0), symbol(2), symbol(1)].into_iter().collect();
    ensure(!check_sequence_fidelity(&trd, &tdr), || "reordered T,R,D accepted".into())?;
    // the same through the judge, with a CGA reply written in the wrong order
    let mut task = Task {
        id: "reorder".into(),
        instruction: "Move the blue cube 1 unit right, then rotate it 90 degrees about the vertical axis.".into(),
        methods: None,
        expected_chain: Some(
            [
                ChainOp::Translate { v: [1.0, 0.0, 0.0] },
                ChainOp::Rotate {
                    axis: [0.0, 1.0, 0.0],
                    angle: FRAC_PI_2,
                },
            ]
            .into_iter()
            .collect(),
        ),
        semantic_rules: vec![],
        expected_positions: None,
    };
    let scene = default_scene();
    let right = r#"{"BlueCube": "R(pi/2, e3, e1) * T(1*e1)"}"#;
    let wrong = r#"{"BlueCube": "T(1*e1) * R(pi/2, e3, e1)"}"#;
    let ok = judge(&task, &scene, right, OutputKind::CgaJson).0.fidelity_ok;
    let bad = judge(&task, &scene, wrong, OutputKind::CgaJson).0.fidelity_ok;
    ensure(ok == Some(true) && bad == Some(false), || format!("judge fidelity right={ok:?} wrong={bad:?}"))?;
    task.expected_chain = None;
    ensure(judge(&task, &scene, wrong, OutputKind::CgaJson).0.fidelity_ok.is_none(), || "fidelity without chain".into())?;
    Ok(format!("{} chains, {pairs} pairs exhaustive; reorders rejected", words.len()))
}

// -- mock replay ------------------------------------------------------------

fn load_shipped(dir: &Path) -> Result<(BenchmarkSuite, MockFixture), String> {
    let suite = BenchmarkSuite::from_path(dir.join("suites/hardpack.json")).map_err(|e| e.to_string())?;
    let fixture = MockFixture::from_path(dir.join("fixtures/hardpack_mock.json")).map_err(|e| e.to_string())?;
    Ok((suite, fixture))
}

const A8_COLUMNS: [&str; 6] = ["rate_a", "rate_b", "risk_diff_pp", "rr_haldane", "or_haldane", "fisher_p"];

fn mock_replay() -> Check {
    let started = Instant::now();
    let dir = bench_dir();
    let (suite, fixture) = load_shipped(&dir)?;
    let provider = MockProvider::new(fixture).map_err(|e| e.to_string())?;
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let records_path = out.path().join("records.jsonl");
    let mut writer = JsonlWriter::create(&records_path).map_err(|e| e.to_string())?;
    let records = run_suite(&suite, Some(&dir), &provider, &RunOptions::default(), |r| writer.write(r))
        .map_err(|e| e.to_string())?;
    ensure(records.len() == 80, || format!("{} rows", records.len()))?;
    let reread = read_jsonl(&records_path).map_err(|e| e.to_string())?;
    ensure(reread.len() == 80, || format!("{} rows on disk", reread.len()))?;

    let aggregates = aggregate_all(&reread).map_err(|e| e.to_string())?;
    let pairs = pairwise_report(&aggregates, &[]).map_err(|e| e.to_string())?;
    let csv = out.path().join("pairwise.csv");
    write_csv(&csv, &pairs).map_err(|e| e.to_string())?;
    let header = std::fs::read_to_string(&csv).map_err(|e| e.to_string())?;
    let header = header.lines().next().unwrap_or_default().to_string();
    for col in A8_COLUMNS {
        ensure(header.split(',').any(|h| h == col), || format!("pairwise CSV lacks {col}"))?;
    }
    let semantic: Vec<_> = pairs.iter().filter(|p| p.endpoint == Endpoint::Semantic && p.k == 2).collect();
    ensure(semantic.len() == 6, || format!("{} semantic contrasts", semantic.len()))?;
    let elapsed = started.elapsed();
    within("mock replay", elapsed, Duration::from_secs(10))?;
    Ok(format!("80 rows, {} aggregates, {} pairwise rows, {elapsed:.2?}", aggregates.len(), pairs.len()))
}

// -- pass@k and temperatures ------------------------------------------------

fn pass_at_k() -> Check {
    let dir = bench_dir();
    let (suite, fixture) = load_shipped(&dir)?;
    let provider = MockProvider::new(fixture).map_err(|e| e.to_string())?;
    let records = run_suite(&suite, None, &provider, &RunOptions::default(), |_| Ok(())).map_err(|e| e.to_string())?;
    let mut rose = false;
    for endpoint in [Endpoint::Parse, Endpoint::Semantic] {
        let k1 = aggregate(&records, endpoint, 1).map_err(|e| e.to_string())?;
        let k2 = aggregate(&records, endpoint, 2).map_err(|e| e.to_string())?;
        for (a, b) in k1.iter().zip(&k2) {
            ensure(b.successes >= a.successes, || format!("{endpoint} {} fell from k=1 to k=2", a.method))?;
            rose |= b.successes > a.successes;
        }
    }
    ensure(rose, || "no second-attempt success in the replay".into())?;

    // every reply truncated: each row spends all three attempts
    let suite = suite.with_policies(vec![3]).map_err(|e| e.to_string())?;
    let entries = suite
        .tasks()
        .flat_map(|t| suite.methods.iter().map(move |&m| MockEntry::reply(m, t.instruction.clone(), "{\"RedSphere\": \"T(")))
        .collect();
    let provider = MockProvider::new(MockFixture::new(entries)).map_err(|e| e.to_string())?;
    let records = run_suite(&suite, None, &provider, &RunOptions::default(), |_| Ok(())).map_err(|e| e.to_string())?;
    for r in &records {
        let temps: Vec<f64> = r.attempts.iter().map(|a| a.temperature).collect();
        ensure(
            temps.len() == 3 && temps.iter().zip([0.10, 0.15, 0.20]).all(|(t, w)| (t - w).abs() < 1e-12),
            || format!("{} {}: temperatures {temps:?}", r.task_id, r.method),
        )?;
    }
    Ok(format!("monotone on hard-pack replay; temperatures 0.10/0.15/0.20 on {} rows", records.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("primitive verification suite", primitive_suite),
        ("worked derivation goldens", derivations),
        ("differential executor oracle", differential),
        ("statistics goldens", statistics),
        ("parse/semantic separation", separation),
        ("sequence-fidelity oracle", fidelity),
        ("mock hard-pack replay", mock_replay),
        ("pass@k monotonicity and temperatures", pass_at_k),
    ];
    let mut failed = 0;
    let mut stdout = std::io::stdout().lock();
    for (name, check) in criteria {
        let line = match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => format!("PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                format!("FAIL  {name}: {why}")
            }
            Err(_) => {
                failed += 1;
                format!("FAIL  {name}: panicked")
            }
        };
        writeln!(stdout, "{line}").unwrap();
    }
    writeln!(stdout, "acceptance: {} of {} criteria pass", 8 - failed, 8).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
