//! Built-in suites and their deterministic mock replies.
//!
//! Each suite is built in code from a small set of task templates so the ground
//! truth (expected positions, chains, rules) is derived from the scene instead of
//! typed by hand. The JSON files under `suites/` and `fixtures/` are exports of
//! this module; a test keeps them in sync.
//!
//! Mock replies are rendered per method from a task's reference solution. A plan
//! marks which (method, task, trial) cells answer wrongly or malformed so that a
//! mock replay has the same shape as the published runs.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use motorscene_core::baseline::{mat_mul, rodrigues, rotation_mat4, translation_mat4, Mat4, IDENTITY4};
use motorscene_core::chain::{ChainOp, OperationChain};
use motorscene_core::conformal::plane_axis;
use motorscene_core::evaluation::{judge, Axis, SemanticRule, Side, Task};
use motorscene_core::scene::{Scene, SceneObject};
use motorscene_core::templates::{format_angle, format_number, translation_expr};
use motorscene_gateway::mock::MockEntry;
use motorscene_gateway::{scene_context_render, user_message, MockFixture, PromptStrategy, StrategyName};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::aggregate::Endpoint;
use crate::suite::{BenchmarkSuite, Block, SceneSpec, ValidatorMode};
use crate::BenchError;

const RED: &str = "RedSphere";
const BLUE: &str = "BlueCube";
const GREEN: &str = "GreenSphere";
const YELLOW: &str = "YellowCube";
const PURPLE: &str = "PurpleSphere";
const FIVE: [&str; 5] = [RED, BLUE, GREEN, YELLOW, PURPLE];

const XY: (usize, usize) = (1, 2);
const YZ: (usize, usize) = (2, 3);
const ZX: (usize, usize) = (3, 1);

/// One step of a reference solution, in application order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    T([f64; 3]),
    R { plane: (usize, usize), angle: f64 },
    D(f64),
}

pub type Solution = IndexMap<String, Vec<Op>>;

/// How a mock attempt answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Correct,
    /// Parses and executes, but misses the geometric goal.
    Wrong,
    /// Cut off mid-output; does not parse.
    Malformed,
    /// First two operations swapped.
    Reorder,
    /// Last operation missing.
    DropOp,
}

pub struct CatalogSuite {
    pub suite: BenchmarkSuite,
    pub solutions: HashMap<String, Solution>,
    /// Attempt outcomes per (method, task id, trial); absent cells answer correctly.
    pub plan: HashMap<(StrategyName, String, u32), Vec<Outcome>>,
}

pub const BUILTIN: [&str; 6] = ["core33", "sequence_stress", "hardpack", "powered", "powered_latency", "ablation"];

pub fn builtin(name: &str) -> Option<CatalogSuite> {
    Some(match name {
        "core33" => core33(),
        "sequence_stress" => sequence_stress(),
        "hardpack" => hardpack(),
        "powered" => powered(),
        "powered_latency" => powered_latency(),
        "ablation" => ablation(),
        _ => return None,
    })
}

/// A suite named on the command line: a built-in name or a JSON file. File
/// suites resolve relative scene paths against the file's directory.
pub struct LoadedSuite {
    pub suite: BenchmarkSuite,
    pub catalog: Option<CatalogSuite>,
    pub base_dir: Option<PathBuf>,
}

pub fn load(spec: &str) -> Result<LoadedSuite, BenchError> {
    if let Some(cs) = builtin(spec) {
        return Ok(LoadedSuite {
            suite: cs.suite.clone(),
            catalog: Some(cs),
            base_dir: None,
        });
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(BenchError::Config(format!(
            "'{spec}' is neither a built-in suite ({}) nor a file",
            BUILTIN.join(", ")
        )));
    }
    Ok(LoadedSuite {
        suite: BenchmarkSuite::from_path(path)?,
        catalog: None,
        base_dir: path.parent().map(Path::to_path_buf),
    })
}

// ---------------------------------------------------------------------------
// geometry helpers

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| a[i] + b[i])
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| a[i] - b[i])
}

fn axis_of(plane: (usize, usize)) -> [f64; 3] {
    plane_axis(plane.0, plane.1).expect("valid plane")
}

/// Center after the solution, with the CGA executor's reading of D: a lone
/// dilation rescales the object, inside a product it scales about the origin.
fn apply_ops(center: [f64; 3], ops: &[Op]) -> [f64; 3] {
    if let [Op::D(_)] = ops {
        return center;
    }
    ops.iter().fold(center, |c, op| match *op {
        Op::T(v) => add(c, v),
        Op::R { plane, angle } => rodrigues(c, axis_of(plane), angle),
        Op::D(s) => c.map(|x| x * s),
    })
}

fn chain_of(ops: &[Op]) -> OperationChain {
    ops.iter()
        .map(|op| match *op {
            Op::T(v) => ChainOp::Translate { v },
            Op::R { plane, angle } => ChainOp::Rotate {
                axis: axis_of(plane),
                angle,
            },
            Op::D(s) => ChainOp::Dilate { factor: s },
        })
        .collect()
}

fn natural(name: &str) -> String {
    let mut out = String::new();
    for (i, ch) in name.char_indices() {
        if i > 0 && (ch.is_uppercase() || (ch.is_ascii_digit() && !name[..i].ends_with(|c: char| c.is_ascii_digit()))) {
            out.push(' ');
        }
        out.extend(ch.to_lowercase());
    }
    format!("the {out}")
}

fn num(x: f64) -> String {
    let s = format_number(x);
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

// ---------------------------------------------------------------------------
// task templates

struct Spec {
    task: Task,
    solution: Solution,
}

fn bare(id: impl Into<String>, instruction: impl Into<String>) -> Task {
    Task {
        id: id.into(),
        instruction: instruction.into(),
        methods: None,
        expected_chain: None,
        semantic_rules: Vec::new(),
        expected_positions: None,
    }
}

fn one(name: &str, ops: Vec<Op>) -> Solution {
    IndexMap::from([(name.to_string(), ops)])
}

fn obj<'a>(scene: &'a Scene, name: &str) -> &'a SceneObject {
    scene.object(name).expect("catalog names exist in their scenes")
}

fn displacement_rule(mover: &str, delta: [f64; 3]) -> SemanticRule {
    SemanticRule::TargetDisplacement {
        mover: mover.into(),
        delta,
        tolerance: None,
    }
}

fn placement_rule(mover: &str, position: [f64; 3]) -> SemanticRule {
    SemanticRule::AbsolutePlacement {
        mover: mover.into(),
        position,
        tolerance: None,
    }
}

fn scale_rule(mover: &str, s: f64) -> SemanticRule {
    SemanticRule::ScaleFactor {
        mover: mover.into(),
        s,
        tolerance: None,
    }
}

/// Fills in expected positions for every moved object (skipped for pure rescales).
fn with_positions(mut spec: Spec, scene: &Scene) -> Spec {
    let mut expected = IndexMap::new();
    for (name, ops) in &spec.solution {
        if matches!(ops.as_slice(), [Op::D(_)]) {
            continue;
        }
        expected.insert(name.clone(), apply_ops(obj(scene, name).center, ops));
    }
    if !expected.is_empty() {
        spec.task.expected_positions = Some(expected);
    }
    spec
}

fn next_to_left(id: &str, scene: &Scene, m: &str, t: &str, text: Option<&str>) -> Spec {
    let (mo, to) = (obj(scene, m), obj(scene, t));
    let dx = to.aabb().min[0] - mo.size - mo.center[0];
    let mut task = bare(
        id,
        text.map(str::to_string)
            .unwrap_or_else(|| format!("Move {} next to {}, to its left side.", natural(m), natural(t))),
    );
    task.semantic_rules = vec![SemanticRule::SurfaceContact {
        mover: m.into(),
        target: t.into(),
        axis: Axis::X,
        side: Side::Negative,
        tolerance: None,
    }, placement_rule(m, add(mo.center, [dx, 0.0, 0.0]))];
    Spec {
        task,
        solution: one(m, vec![Op::T([dx, 0.0, 0.0])]),
    }
}

fn on_top(id: &str, scene: &Scene, m: &str, t: &str, verb: &str) -> Spec {
    let (mo, to) = (obj(scene, m), obj(scene, t));
    let target = [to.center[0], to.aabb().max[1] + mo.size, to.center[2]];
    let mut task = bare(id, format!("{verb} {} on top of {}.", natural(m), natural(t)));
    task.semantic_rules = vec![
        SemanticRule::SurfaceContact {
            mover: m.into(),
            target: t.into(),
            axis: Axis::Y,
            side: Side::Positive,
            tolerance: None,
        },
        placement_rule(m, target),
    ];
    Spec {
        task,
        solution: one(m, vec![Op::T(sub(target, mo.center))]),
    }
}

fn between(id: &str, scene: &Scene, m: &str, a: &str, b: &str, phrase: &str) -> Spec {
    let (ac, bc) = (obj(scene, a).center, obj(scene, b).center);
    let mid = std::array::from_fn(|i| (ac[i] + bc[i]) / 2.0);
    let mut task = bare(id, format!("Place {} {phrase} {} and {}.", natural(m), natural(a), natural(b)));
    task.semantic_rules = vec![SemanticRule::Midpoint {
        mover: m.into(),
        a: a.into(),
        b: b.into(),
        tolerance: None,
    }];
    Spec {
        task,
        solution: one(m, vec![Op::T(sub(mid, obj(scene, m).center))]),
    }
}

fn shift(id: &str, m: &str, delta: [f64; 3], text: String) -> Spec {
    let mut task = bare(id, text);
    task.semantic_rules = vec![displacement_rule(m, delta)];
    Spec {
        task,
        solution: one(m, vec![Op::T(delta)]),
    }
}

fn rescale(id: &str, m: &str, s: f64, text: String) -> Spec {
    let mut task = bare(id, text);
    task.semantic_rules = vec![scale_rule(m, s)];
    Spec {
        task,
        solution: one(m, vec![Op::D(s)]),
    }
}

fn place_at(id: &str, scene: &Scene, m: &str, p: [f64; 3]) -> Spec {
    let mut task = bare(id, format!("Move {} to position ({}, {}, {}).", natural(m), num(p[0]), num(p[1]), num(p[2])));
    task.semantic_rules = vec![placement_rule(m, p)];
    Spec {
        task,
        solution: one(m, vec![Op::T(sub(p, obj(scene, m).center))]),
    }
}

fn spin(id: &str, scene: &Scene, m: &str, plane: (usize, usize), angle: f64, text: String) -> Spec {
    let target = rodrigues(obj(scene, m).center, axis_of(plane), angle);
    let mut task = bare(id, text);
    task.semantic_rules = vec![placement_rule(m, target)];
    Spec {
        task,
        solution: one(m, vec![Op::R { plane, angle }]),
    }
}

fn relative_text(m: &str, d: [f64; 3]) -> String {
    let mut parts = Vec::new();
    for (v, pos, neg) in [(d[0], "right", "left"), (d[1], "up", "down"), (d[2], "toward the viewer", "away from the viewer")] {
        if v != 0.0 {
            let unit = if v.abs() == 1.0 { "unit" } else { "units" };
            parts.push(format!("{} {unit} {}", num(v.abs()), if v > 0.0 { pos } else { neg }));
        }
    }
    format!("Move {} {}.", natural(m), parts.join(" and "))
}

fn scale_text(m: &str, s: f64) -> String {
    match s {
        2.0 => format!("Double the size of {}.", natural(m)),
        0.5 => format!("Shrink {} to half its size.", natural(m)),
        _ if s < 1.0 => format!("Scale {} down to {}% of its size.", natural(m), num(s * 100.0)),
        _ => format!("Scale {} up by a factor of {}.", natural(m), num(s)),
    }
}

/// The twenty hard-pack templates; `v` picks a variant (0 is the hard-pack itself).
fn hard_template(idx: usize, v: usize, scene: &Scene) -> Spec {
    let r = |k: usize| FIVE[(k + v) % 5];
    let vf = v as f64;
    let id = format!("hp{:02}", idx + 1);
    let id = id.as_str();
    match idx {
        0 => next_to_left(id, scene, r(0), r(1), None),
        1 => on_top(id, scene, r(2), r(1), "Place"),
        2 => between(id, scene, r(4), r(0), r(1), "exactly between"),
        3 => {
            let h = 2.0 + 0.5 * vf;
            shift(id, r(3), [0.0, h, 0.0], format!("Raise {} by {} units.", natural(r(3)), num(h)))
        }
        4 => {
            let s = [3.0, 2.5, 4.0, 1.5, 3.5][v];
            rescale(id, r(0), s, scale_text(r(0), s))
        }
        5 => rescale(id, r(1), 0.5, scale_text(r(1), 0.5)),
        6 => {
            let p = [1.0 + vf, 2.0, 3.0 - vf];
            place_at(id, scene, r(2), p)
        }
        7 => {
            let d = 3.0 - 0.5 * vf;
            shift(id, r(0), [0.0, 0.0, d], format!("Move {} {} units toward the viewer.", natural(r(0)), num(d)))
        }
        8 => on_top(id, scene, r(4), r(3), "Stack"),
        9 => between(id, scene, r(2), r(3), r(4), "halfway between"),
        10 => {
            let m = [BLUE, GREEN, YELLOW, PURPLE, BLUE][v];
            let (plane, axis_word, deg) = [(ZX, "vertical", 90.0), (ZX, "vertical", -90.0), (ZX, "vertical", 180.0), (YZ, "x", 90.0), (XY, "z", 90.0)][v];
            let text = format!(
                "Rotate {} {} degrees about the {axis_word} axis through the origin.",
                natural(m),
                num(deg)
            );
            spin(id, scene, m, plane, f64::to_radians(deg), text)
        }
        11 => {
            let d = [-2.5, 1.0 + 0.5 * vf, 0.0];
            shift(id, r(0), d, relative_text(r(0), d))
        }
        12 => on_top(id, scene, r(2), r(0), "Put"),
        13 => {
            let text = format!("Put {} directly to the left of {}, touching it.", natural(r(3)), natural(r(4)));
            next_to_left(id, scene, r(3), r(4), Some(&text))
        }
        14 => rescale(id, r(2), 2.0, scale_text(r(2), 2.0)),
        15 => place_at(id, scene, r(4), [0.0, 3.0 + vf, 0.0]),
        16 => {
            let d = 0.5 + vf;
            shift(id, r(1), [0.0, 0.0, -d], format!("Push {} {} units away from the viewer.", natural(r(1)), num(d)))
        }
        17 => between(id, scene, r(0), r(2), r(3), "at the midpoint of"),
        18 => {
            let s = [0.4, 0.6, 0.25, 0.75, 0.3][v];
            rescale(id, r(3), s, scale_text(r(3), s))
        }
        19 => {
            let d = [5.0 - vf, -1.0, 0.0];
            shift(id, r(2), d, relative_text(r(2), d))
        }
        _ => unreachable!("twenty templates"),
    }
}

const SCALE_TEMPLATES: [usize; 4] = [4, 5, 14, 18];

// ---------------------------------------------------------------------------
// suite assembly

fn block(name: &str, scene: SceneSpec, context_limit: Option<usize>, budgets: &[(StrategyName, u32)], specs: Vec<Spec>, solutions: &mut HashMap<String, Solution>) -> Block {
    let tasks = specs
        .into_iter()
        .map(|s| {
            solutions.insert(s.task.id.clone(), s.solution);
            s.task
        })
        .collect();
    Block {
        name: name.into(),
        scene,
        context_limit,
        max_tokens: budgets.iter().copied().collect(),
        tasks,
    }
}

fn cells(plan: &mut HashMap<(StrategyName, String, u32), Vec<Outcome>>, method: StrategyName, task: &str, trials: impl IntoIterator<Item = u32>, outcomes: &[Outcome]) {
    for t in trials {
        plan.insert((method, task.to_string(), t), outcomes.to_vec());
    }
}

use Outcome::*;
use StrategyName::{CompactSe3 as Se3, EuclideanMat4 as Euc, ShenlongCga as Shen, SimpleCga as Simple, SimpleCgaVerbose as Verbose};

/// Hard-pack: 20 tasks x 4 methods, one trial. Semantic successes replay as
/// Simple 9, Shenlong 9 (19 parse), Euclidean 5, Compact SE3 9 at pass@2.
pub fn hardpack() -> CatalogSuite {
    let scene = motorscene_core::scene::default_scene();
    let mut solutions = HashMap::new();
    let specs = (0..20).map(|i| hard_template(i, 0, &scene)).collect();
    let blk = block("hardpack", SceneSpec::Default, None, &[], specs, &mut solutions);

    let correct: [(StrategyName, &[usize]); 4] = [
        (Simple, &[1, 2, 4, 5, 8, 12, 15, 17, 20]),
        (Shen, &[1, 2, 3, 4, 5, 8, 12, 17, 20]),
        (Euc, &[1, 4, 8, 12, 20]),
        (Se3, &[1, 2, 4, 5, 6, 8, 12, 17, 20]),
    ];
    let mut plan = HashMap::new();
    for (method, ok) in correct {
        for i in 1..=20usize {
            let id = format!("hp{i:02}");
            let scale = SCALE_TEMPLATES.contains(&(i - 1));
            if ok.contains(&i) || (method == Euc && scale) {
                continue;
            }
            cells(&mut plan, method, &id, [0], &[Wrong]);
        }
    }
    // Shenlong: one reply cut off for good, one rescued by the second attempt.
    cells(&mut plan, Shen, "hp11", [0], &[Malformed]);
    cells(&mut plan, Shen, "hp02", [0], &[Malformed, Correct]);

    CatalogSuite {
        suite: BenchmarkSuite {
            name: "hardpack".into(),
            description: "Twenty harder grounding tasks on the five-object scene; semantic endpoint.".into(),
            methods: vec![Simple, Shen, Euc, Se3],
            policies: vec![2],
            trials_per_task: 1,
            validator: ValidatorMode::Parse,
            seed: 0,
            blocks: vec![blk],
        },
        solutions,
        plan,
    }
}

fn choose(rng: &mut ChaCha8Rng, pool: &[String], n: usize) -> Vec<String> {
    let mut pool = pool.to_vec();
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

/// Powered hard suite: the hard-pack templates x 5 variants = 100 tasks.
/// Replays semantic 45 / 44 / 42 / 24 (Simple / Shenlong / SE3 / Euclidean).
pub fn powered() -> CatalogSuite {
    powered_like("powered", 5, vec![Simple, Shen, Euc, Se3], &[(Simple, 45), (Shen, 44), (Se3, 42), (Euc, 24)], 5)
}

/// Latency protocol: 20 tasks x 2 runs for Simple, Euclidean and Compact SE3.
pub fn powered_latency() -> CatalogSuite {
    let mut cs = powered_like("powered_latency", 1, vec![Simple, Euc, Se3], &[(Simple, 9), (Se3, 9), (Euc, 5)], 0);
    cs.suite.trials_per_task = 2;
    cs.suite.description = "Twenty hard-pack tasks, two runs each, for end-to-end latency.".into();
    cs
}

fn powered_like(name: &str, variants: usize, methods: Vec<StrategyName>, semantic: &[(StrategyName, usize)], shenlong_malformed: usize) -> CatalogSuite {
    let scene = motorscene_core::scene::default_scene();
    let mut solutions = HashMap::new();
    let mut specs = Vec::new();
    for idx in 0..20 {
        for v in 0..variants {
            let mut s = hard_template(idx, v, &scene);
            s.task.id = match name {
                "powered_latency" => format!("lat{:02}", idx + 1),
                _ => format!("pw{:02}v{v}", idx + 1),
            };
            specs.push(s);
        }
    }
    let ids: Vec<String> = specs.iter().map(|s| s.task.id.clone()).collect();
    let scale_ids: Vec<String> = specs
        .iter()
        .filter(|s| s.solution.values().any(|ops| matches!(ops.as_slice(), [Op::D(_)])))
        .map(|s| s.task.id.clone())
        .collect();
    let blk = block(name, SceneSpec::Default, None, &[(Se3, 500)], specs, &mut solutions);

    let seed = 20_260_416;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plan = HashMap::new();
    for &(method, n_ok) in semantic {
        let pool: Vec<String> = if method == Euc {
            ids.iter().filter(|i| !scale_ids.contains(i)).cloned().collect()
        } else {
            ids.clone()
        };
        let ok = choose(&mut rng, &pool, n_ok);
        let failing: Vec<String> = ids.iter().filter(|i| !ok.contains(i)).cloned().collect();
        let malformed = if method == Shen { choose(&mut rng, &failing, shenlong_malformed) } else { Vec::new() };
        for id in &failing {
            if method == Euc && scale_ids.contains(id) {
                continue;
            }
            let outcome = if malformed.contains(id) { Malformed } else { Wrong };
            cells(&mut plan, method, id, 0..2, &[outcome]);
        }
    }
    if methods.contains(&Shen) && !semantic.iter().any(|(m, _)| *m == Shen) {
        unreachable!("every method needs a semantic target");
    }
    CatalogSuite {
        suite: BenchmarkSuite {
            name: name.into(),
            description: "Hard-pack templates in five variants each; semantic endpoint, one attempt.".into(),
            methods,
            policies: vec![1],
            trials_per_task: 1,
            validator: ValidatorMode::Parse,
            seed,
            blocks: vec![blk],
        },
        solutions,
        plan,
    }
}

/// Ablation grid: 10 tasks x {compact, verbose, Shenlong, Euclidean} x {pass@1, pass@2} x 5 repeats.
/// Shenlong replays 40/50 parse at pass@1 and 41/50 at pass@2; the rest saturate.
pub fn ablation() -> CatalogSuite {
    let scene = motorscene_core::scene::default_scene();
    let mut solutions = HashMap::new();
    let specs = (0..10)
        .map(|i| {
            let mut s = hard_template(i, 0, &scene);
            s.task.id = format!("ab{:02}", i + 1);
            s
        })
        .collect();
    let blk = block("ablation", SceneSpec::Default, None, &[], specs, &mut solutions);
    let mut plan = HashMap::new();
    cells(&mut plan, Shen, "ab02", 0..5, &[Malformed]);
    cells(&mut plan, Shen, "ab07", [0, 1, 2, 4], &[Malformed]);
    cells(&mut plan, Shen, "ab07", [3], &[Malformed, Correct]);
    CatalogSuite {
        suite: BenchmarkSuite {
            name: "ablation".into(),
            description: "Prompt-form ablation: compact vs verbose Simple prompt, Shenlong and Euclidean; parse endpoint.".into(),
            methods: vec![Simple, Verbose, Shen, Euc],
            policies: vec![1, 2],
            trials_per_task: 5,
            validator: ValidatorMode::Parse,
            seed: 0,
            blocks: vec![blk],
        },
        solutions,
        plan,
    }
}

/// Sequence-stress: 20 ordered chains of 3-5 operations, 6 trials, Simple vs Compact SE3.
/// Replays fidelity 117/120 vs 108/120 with 17 of 20 templates tied.
pub fn sequence_stress() -> CatalogSuite {
    let vocab: [(Op, &str); 9] = [
        (Op::T([1.0, 0.0, 0.0]), "move it 1 unit right"),
        (Op::T([0.0, 2.0, 0.0]), "raise it 2 units"),
        (Op::T([0.0, 0.0, -1.5]), "push it 1.5 units away from the viewer"),
        (Op::R { plane: ZX, angle: std::f64::consts::FRAC_PI_2 }, "rotate it 90 degrees about the vertical axis"),
        (Op::R { plane: XY, angle: std::f64::consts::FRAC_PI_4 }, "rotate it 45 degrees about the z axis"),
        (Op::R { plane: YZ, angle: std::f64::consts::FRAC_PI_6 }, "rotate it 30 degrees about the x axis"),
        (Op::D(2.0), "double its scale"),
        (Op::D(0.5), "halve its scale"),
        (Op::T([-2.0, 0.0, 1.0]), "shift it 2 units left and 1 unit toward the viewer"),
    ];
    let chains: [&[usize]; 20] = [
        &[3, 1, 6],
        &[0, 4, 7],
        &[5, 2, 1],
        &[6, 0, 3, 1],
        &[8, 3, 7],
        &[1, 5, 0, 6],
        &[4, 8, 2],
        &[7, 3, 0, 1, 5],
        &[2, 6, 4, 8],
        &[0, 1, 3],
        &[3, 4, 5],
        &[6, 8, 1, 4],
        &[5, 7, 2, 0, 3],
        &[1, 3, 8],
        &[4, 0, 6, 2],
        &[8, 5, 7],
        &[2, 3, 1, 0],
        &[7, 4, 8, 6, 3],
        &[0, 5, 1],
        &[6, 2, 3, 8, 4],
    ];
    let mut solutions = HashMap::new();
    let specs = chains
        .iter()
        .enumerate()
        .map(|(i, chain)| {
            let m = FIVE[i % 5];
            let steps: Vec<&str> = chain.iter().map(|&k| vocab[k].1).collect();
            let (last, init) = steps.split_last().expect("chains are nonempty");
            let text = format!("Take {}: first {}, then {}.", natural(m), init.join(", then "), last);
            let ops: Vec<Op> = chain.iter().map(|&k| vocab[k].0).collect();
            let mut task = bare(format!("seq{:02}", i + 1), text);
            task.expected_chain = Some(chain_of(&ops));
            Spec {
                task,
                solution: one(m, ops),
            }
        })
        .collect();
    let blk = block("sequence", SceneSpec::Default, None, &[], specs, &mut solutions);

    let mut plan = HashMap::new();
    cells(&mut plan, Se3, "seq04", 0..6, &[Reorder]);
    cells(&mut plan, Se3, "seq09", 0..4, &[DropOp]);
    cells(&mut plan, Simple, "seq14", [2], &[Reorder]);
    cells(&mut plan, Simple, "seq18", [1, 4], &[DropOp]);
    cells(&mut plan, Se3, "seq18", [0, 5], &[Reorder]);

    CatalogSuite {
        suite: BenchmarkSuite {
            name: "sequence_stress".into(),
            description: "Ordered chains of 3-5 operations; strict sequence-fidelity endpoint.".into(),
            methods: vec![Simple, Se3],
            policies: vec![2],
            trials_per_task: 6,
            validator: ValidatorMode::Parse,
            seed: 0,
            blocks: vec![blk],
        },
        solutions,
        plan,
    }
}

/// Core benchmark: 5-object (8), stress (6), 10-object (6), spatial accuracy (18)
/// and 100-object with a 30-object context (10), for Shenlong, Simple and Euclidean.
pub fn core33() -> CatalogSuite {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};
    let mut solutions = HashMap::new();
    let mut plan = HashMap::new();
    let budgets = |s: u32, p: u32, e: u32| vec![(Shen, s), (Simple, p), (Euc, e)];
    let five = motorscene_core::scene::default_scene();

    // 5-object
    let compose_ops = vec![Op::D(2.0), Op::R { plane: ZX, angle: FRAC_PI_4 }, Op::T([0.0, 3.0, 0.0])];
    let mut compose = bare(
        "c5-compose",
        "Scale the red sphere by 2, rotate it 45 degrees about the vertical axis, then move it 3 units up.",
    );
    compose.semantic_rules = vec![placement_rule(RED, [0.0, 3.0, 0.0])];
    compose.expected_chain = Some(chain_of(&compose_ops));
    let stack_scale_target = [8.0, 3.4, 0.0];
    let mut stack_scale = bare(
        "c5-stack-scale",
        "Place the green sphere on top of the blue cube, then scale its position by 2 about the origin.",
    );
    stack_scale.semantic_rules = vec![placement_rule(GREEN, stack_scale_target)];
    let mut multi = bare("c5-multi", "Move the red sphere 2 units up and the blue cube 2 units down.");
    multi.semantic_rules = vec![displacement_rule(RED, [0.0, 2.0, 0.0]), displacement_rule(BLUE, [0.0, -2.0, 0.0])];
    let five_specs = vec![
        shift("c5-translate", RED, [3.0, 0.0, 0.0], "Move the red sphere 3 units to the right.".into()),
        on_top("c5-stack", &five, GREEN, BLUE, "Place"),
        rescale("c5-scale", PURPLE, 2.0, "Make the purple sphere twice as large.".into()),
        spin(
            "c5-rotate",
            &five,
            YELLOW,
            ZX,
            FRAC_PI_2,
            "Rotate the yellow cube 90 degrees about the vertical axis through the origin.".into(),
        ),
        Spec {
            task: compose,
            solution: one(RED, compose_ops),
        },
        Spec {
            task: stack_scale,
            solution: one(GREEN, vec![Op::T([7.0, 1.7, -2.0]), Op::D(2.0)]),
        },
        Spec {
            task: multi,
            solution: IndexMap::from([
                (RED.to_string(), vec![Op::T([0.0, 2.0, 0.0])]),
                (BLUE.to_string(), vec![Op::T([0.0, -2.0, 0.0])]),
            ]),
        },
        between("c5-hard", &five, PURPLE, GREEN, YELLOW, "between"),
    ]
    .into_iter()
    .map(|s| with_positions(s, &five))
    .collect();
    let b5 = block("5-object", SceneSpec::Default, None, &budgets(500, 300, 400), five_specs, &mut solutions);
    cells(&mut plan, Shen, "c5-rotate", [0], &[Wrong]);
    cells(&mut plan, Shen, "c5-hard", [0], &[Wrong]);

    // stress
    let triple = vec![Op::T([1.0, 0.0, 0.0]), Op::R { plane: ZX, angle: FRAC_PI_2 }, Op::T([0.0, 2.0, 0.0])];
    let chained = vec![Op::R { plane: ZX, angle: FRAC_PI_2 }, Op::R { plane: YZ, angle: FRAC_PI_2 }];
    let sequenced = |id: &str, m: &str, ops: Vec<Op>, text: &str| {
        let mut task = bare(id, text);
        task.semantic_rules = vec![placement_rule(m, apply_ops(obj(&five, m).center, &ops))];
        task.expected_chain = Some(chain_of(&ops));
        Spec {
            task,
            solution: one(m, ops),
        }
    };
    let mut global = bare("st-global-scale", "Scale every object's size by 1.5.");
    global.semantic_rules = FIVE.iter().map(|m| scale_rule(m, 1.5)).collect();
    let stress_specs = vec![
        spin("st-irrational", &five, BLUE, ZX, 1.0, "Rotate the blue cube by 1 radian about the vertical axis through the origin.".into()),
        sequenced(
            "st-triple",
            GREEN,
            triple,
            "Move the green sphere 1 unit right, rotate it 90 degrees about the vertical axis, then move it 2 units up.",
        ),
        sequenced(
            "st-chained-rotation",
            YELLOW,
            chained,
            "Rotate the yellow cube 90 degrees about the vertical axis and then 90 degrees about the x axis.",
        ),
        Spec {
            task: global,
            solution: FIVE.iter().map(|m| (m.to_string(), vec![Op::D(1.5)])).collect(),
        },
        on_top("st-relative-stack", &five, RED, GREEN, "Stack"),
        spin("st-third-turn", &five, PURPLE, YZ, FRAC_PI_3, "Rotate the purple sphere 60 degrees about the x axis through the origin.".into()),
    ]
    .into_iter()
    .map(|s| with_positions(s, &five))
    .collect();
    let bs = block("stress", SceneSpec::Default, None, &budgets(500, 500, 500), stress_specs, &mut solutions);

    // 10-object
    let ten_spec = SceneSpec::Generated { count: 10, seed: 10 };
    let ten = ten_spec.build(None).expect("generated scene");
    let g: Vec<String> = ten.names().skip(5).map(str::to_string).collect();
    let mut multi10 = bare("c10-multi", format!("Raise {} by 1.5 units and lower the red sphere by 1 unit.", natural(&g[4])));
    multi10.semantic_rules = vec![displacement_rule(&g[4], [0.0, 1.5, 0.0]), displacement_rule(RED, [0.0, -1.0, 0.0])];
    let ten_specs = vec![
        next_to_left("c10-next-to", &ten, &g[0], BLUE, None),
        on_top("c10-on-top", &ten, &g[1], YELLOW, "Place"),
        between("c10-between", &ten, RED, &g[2], &g[3], "between"),
        Spec {
            task: multi10,
            solution: IndexMap::from([
                (g[4].clone(), vec![Op::T([0.0, 1.5, 0.0])]),
                (RED.to_string(), vec![Op::T([0.0, -1.0, 0.0])]),
            ]),
        },
        place_at("c10-place", &ten, GREEN, [0.0, 5.0, 0.0]),
        shift("c10-toward", PURPLE, [0.0, 0.0, 2.0], "Move the purple sphere 2 units toward the viewer.".into()),
    ]
    .into_iter()
    .map(|s| with_positions(s, &ten))
    .collect();
    let b10 = block("10-object", ten_spec, None, &budgets(500, 400, 500), ten_specs, &mut solutions);

    // spatial accuracy: absolute targets and displacement constraints
    let targets = [
        [1.0, 2.0, 3.0],
        [-4.0, 0.5, 1.0],
        [6.0, 1.0, -2.0],
        [0.0, 4.0, 0.0],
        [2.5, -1.0, 3.5],
        [-2.0, 3.0, -5.0],
        [7.0, 0.0, 2.0],
        [-6.5, 1.5, 0.0],
        [3.0, 3.0, 3.0],
    ];
    let deltas = [
        [2.0, 0.0, 0.0],
        [0.0, -1.5, 0.0],
        [0.0, 0.0, 4.0],
        [-3.0, 1.0, 0.0],
        [1.0, 1.0, -1.0],
        [0.0, 2.5, 2.5],
        [-1.5, 0.0, -2.0],
        [4.0, -2.0, 1.0],
        [0.5, 0.5, 0.0],
    ];
    let mut acc_specs = Vec::new();
    for i in 0..18 {
        let m = FIVE[i % 5];
        let id = format!("acc{:02}", i + 1);
        let spec = if i % 2 == 0 {
            place_at(&id, &five, m, targets[i / 2])
        } else {
            let d = deltas[i / 2];
            shift(&id, m, d, relative_text(m, d))
        };
        acc_specs.push(with_positions(spec, &five));
    }
    let bacc = block("accuracy", SceneSpec::Default, None, &budgets(300, 300, 300), acc_specs, &mut solutions);
    for i in 1..=18usize {
        if ![1, 4, 8, 12, 16].contains(&i) {
            cells(&mut plan, Euc, &format!("acc{i:02}"), [0], &[Wrong]);
        }
    }

    // 100-object, 30-object context
    let big_spec = SceneSpec::Generated { count: 100, seed: 100 };
    let big = big_spec.build(None).expect("generated scene");
    let gb: Vec<String> = big.names().skip(5).take(25).map(str::to_string).collect();
    let big_specs = vec![
        next_to_left("c100-01", &big, &gb[0], &gb[1], None),
        on_top("c100-02", &big, &gb[2], &gb[3], "Place"),
        between("c100-03", &big, &gb[4], &gb[5], &gb[6], "between"),
        shift("c100-04", &gb[7], [0.0, 3.0, 0.0], format!("Raise {} by 3 units.", natural(&gb[7]))),
        place_at("c100-05", &big, &gb[8], [0.0, 0.0, 0.0]),
        on_top("c100-06", &big, RED, &gb[9], "Stack"),
        shift("c100-07", &gb[10], [-2.0, 0.0, 1.0], relative_text(&gb[10], [-2.0, 0.0, 1.0])),
        next_to_left("c100-08", &big, BLUE, &gb[11], None),
        between("c100-09", &big, GREEN, &gb[12], &gb[13], "halfway between"),
        place_at("c100-10", &big, &gb[14], [5.0, 5.0, 5.0]),
    ]
    .into_iter()
    .map(|s| with_positions(s, &big))
    .collect();
    let b100 = block("100-object", big_spec, Some(30), &budgets(600, 600, 600), big_specs, &mut solutions);
    cells(&mut plan, Shen, "c100-03", [0], &[Wrong]);

    CatalogSuite {
        suite: BenchmarkSuite {
            name: "core33".into(),
            description: "Core benchmark blocks: 5-object, stress, 10-object, spatial accuracy, 100-object (30-object context).".into(),
            methods: vec![Shen, Simple, Euc],
            policies: vec![2],
            trials_per_task: 1,
            validator: ValidatorMode::Parse,
            seed: 100,
            blocks: vec![b5, bs, b10, bacc, b100],
        },
        solutions,
        plan,
    }
}

// ---------------------------------------------------------------------------
// rendering

fn factor(s: f64) -> String {
    if s.fract() == 0.0 {
        format!("{}", s as i64)
    } else {
        format_number(s)
    }
}

pub fn cga_expression(ops: &[Op]) -> String {
    ops.iter()
        .rev()
        .map(|op| match *op {
            Op::T(v) => translation_expr(v),
            Op::R { plane: (i, j), angle } => format!("R({}, e{i}, e{j})", format_angle(angle)),
            Op::D(s) => format!("D({})", factor(s)),
        })
        .collect::<Vec<_>>()
        .join(" * ")
}

fn se3_ops(ops: &[Op]) -> Value {
    Value::Array(
        ops.iter()
            .map(|op| match *op {
                Op::T(v) => json!({"type": "T", "v": v}),
                Op::R { plane, angle } => json!({"type": "R", "axis": axis_of(plane), "angle_rad": angle}),
                Op::D(s) => json!({"type": "D", "factor": s}),
            })
            .collect(),
    )
}

fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn matrix(ops: &[Op]) -> Mat4 {
    ops.iter().fold(IDENTITY4, |acc, op| {
        let m = match *op {
            Op::T(v) => translation_mat4(v),
            Op::R { plane, angle } => rotation_mat4(axis_of(plane), angle),
            Op::D(s) => {
                let mut m = IDENTITY4;
                for (i, row) in m.iter_mut().enumerate().take(3) {
                    row[i] = s;
                }
                m
            }
        };
        mat_mul(&m, &acc)
    })
}

fn payload(method: StrategyName, solution: &Solution) -> Value {
    let mut map = serde_json::Map::new();
    for (name, ops) in solution {
        let v = match method {
            Simple | Shen | Verbose => Value::String(cga_expression(ops)),
            Se3 => se3_ops(ops),
            Euc => json!(matrix(ops).map(|row| row.map(round6))),
        };
        map.insert(name.clone(), v);
    }
    Value::Object(map)
}

fn mutate(solution: &Solution, outcome: Outcome, scene: &Scene) -> Solution {
    let mut out = solution.clone();
    let (name, ops) = out.get_index_mut(0).map(|(k, v)| (k.clone(), v)).expect("solutions are nonempty");
    match outcome {
        Wrong => {
            let center = obj(scene, &name).center;
            if let Some(v) = ops.iter_mut().find_map(|op| if let Op::T(v) = op { Some(v) } else { None }) {
                let absolute = add(center, *v);
                // the classic slip: absolute target written as a displacement;
                // at the origin that is harmless, so flip the dominant component
                *v = if center.iter().map(|c| c.abs()).sum::<f64>() > 1.0 {
                    absolute
                } else {
                    let k = (0..3).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
                    let mut w = *v;
                    w[k] = if w[k] == 0.0 { 1.5 } else { -w[k] };
                    w
                };
            } else if let Some(k) = ops.iter().position(|op| matches!(op, Op::R { .. })) {
                // sign slip first; if the turn is symmetric, the wrong plane
                let Op::R { plane, angle } = ops[k] else { unreachable!() };
                let goal = apply_ops(center, ops);
                let candidates = [(plane, -angle), (XY, angle), (YZ, angle), (ZX, angle)];
                for (p, a) in candidates {
                    let mut trial = ops.clone();
                    trial[k] = Op::R { plane: p, angle: a };
                    let d = sub(apply_ops(center, &trial), goal);
                    if d.iter().map(|c| c * c).sum::<f64>().sqrt() > 1.0 {
                        *ops = trial;
                        break;
                    }
                }
            } else if let Some(s) = ops.iter_mut().find_map(|op| if let Op::D(s) = op { Some(s) } else { None }) {
                *s = 1.0 / *s;
            }
        }
        Reorder if ops.len() >= 2 => ops.swap(0, 1),
        DropOp if ops.len() >= 2 => {
            ops.pop();
        }
        _ => {}
    }
    out
}

fn truncate_chars(s: &str, frac: f64) -> String {
    let keep = ((s.chars().count() as f64) * frac) as usize;
    s.chars().take(keep).collect()
}

fn shenlong_text(task: &Task, solution: &Solution, scene: &Scene, body: Option<&Value>) -> String {
    let mut text = String::from("Step 1 - Current state:\n");
    for name in solution.keys() {
        if let Some(o) = scene.get(name) {
            text.push_str(&format!(
                "- {} at [{}, {}, {}], size {}\n",
                o.name,
                format_number(o.center[0]),
                format_number(o.center[1]),
                format_number(o.center[2]),
                format_number(o.size)
            ));
        }
    }
    text.push_str(&format!(
        "Step 2 - The instruction \"{}\" moves {}; I compute the displacement as target minus current center.\n",
        task.instruction,
        solution.keys().cloned().collect::<Vec<_>>().join(" and ")
    ));
    match body {
        Some(json) => {
            for (name, ops) in solution {
                text.push_str(&format!("Step 3 - {name}: {}\n", cga_expression(ops)));
            }
            text.push_str("Step 4 - Final JSON:\n```json\n");
            text.push_str(&serde_json::to_string_pretty(json).expect("json"));
            text.push_str("\n```");
        }
        None => text.push_str("Step 3 - Working through the exact expressions, the displacement along"),
    }
    text
}

/// The raw reply a method produces for `outcome`.
pub fn render_reply(method: StrategyName, task: &Task, solution: &Solution, scene: &Scene, outcome: Outcome) -> String {
    let effective = match outcome {
        Correct | Malformed => solution.clone(),
        other => mutate(solution, other, scene),
    };
    let body = payload(method, &effective);
    match (method, outcome) {
        (Shen, Malformed) => shenlong_text(task, &effective, scene, None),
        (Shen, _) => shenlong_text(task, &effective, scene, Some(&body)),
        (_, Malformed) => truncate_chars(&serde_json::to_string(&body).expect("json"), 0.6),
        _ => serde_json::to_string(&body).expect("json"),
    }
}

fn fnv(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.bytes().chain([0xff]) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn outcomes_for(cs: &CatalogSuite, method: StrategyName, task: &str, trial: u32) -> Vec<Outcome> {
    cs.plan
        .get(&(method, task.to_string(), trial))
        .cloned()
        .unwrap_or_else(|| vec![Correct])
}

/// Versioned mock fixture replaying the suite's plan.
pub fn mock_fixture(cs: &CatalogSuite) -> MockFixture {
    let suite = &cs.suite;
    let mut entries = Vec::new();
    for blk in &suite.blocks {
        let scene = blk.scene.build(None).expect("catalog scenes build");
        let context = scene_context_render(&scene, blk.context_limit);
        for task in &blk.tasks {
            let solution = &cs.solutions[&task.id];
            for &method in &suite.methods {
                let strategy: PromptStrategy = suite.strategy(blk, method);
                let prompt_chars = strategy.prompt_chars() + user_message(&context, &task.instruction).chars().count();
                let per_trial: Vec<Vec<Outcome>> =
                    (0..suite.trials_per_task).map(|t| outcomes_for(cs, method, &task.id, t)).collect();
                let uniform = per_trial.windows(2).all(|w| w[0] == w[1]);
                let trials: Vec<Option<u32>> = if uniform {
                    vec![None]
                } else {
                    (0..suite.trials_per_task).map(Some).collect()
                };
                for trial in trials {
                    let outcomes = &per_trial[trial.unwrap_or(0) as usize];
                    for (a, &outcome) in outcomes.iter().enumerate() {
                        let text = render_reply(method, task, solution, &scene, outcome);
                        let completion = if method == Shen && outcome == Malformed {
                            strategy.max_tokens as u64
                        } else {
                            (text.chars().count() as u64).div_ceil(3)
                        };
                        let tag = format!("{}/{a}", trial.unwrap_or(0));
                        let jitter = (fnv(&[&suite.name, &task.id, method.as_str(), &tag]) % 40) as f64 * 0.01;
                        let latency = 0.45 + 0.012 * completion as f64 + jitter;
                        let mut entry = MockEntry::reply(method, task.instruction.clone(), text).with_usage(
                            (prompt_chars as u64).div_ceil(4),
                            completion,
                            (latency * 1000.0).round() / 1000.0,
                        );
                        // the last listed outcome repeats for any later attempt
                        if a + 1 < outcomes.len() {
                            entry = entry.at_attempt(a as u32);
                        }
                        if let Some(t) = trial {
                            entry = entry.at_trial(t);
                        }
                        entries.push(entry);
                    }
                }
            }
        }
    }
    let mut fixture = MockFixture::new(entries);
    fixture.id = format!("mock-{}", suite.name);
    fixture
}

/// Checks every planned reply judges the way its outcome says it should.
pub fn verify_plan(cs: &CatalogSuite) -> Result<(), String> {
    let suite = &cs.suite;
    for blk in &suite.blocks {
        let scene = blk.scene.build(None).map_err(|e| e.to_string())?;
        for task in &blk.tasks {
            let solution = &cs.solutions[&task.id];
            for &method in &suite.methods {
                let kind = method.output_kind();
                let euclidean_scale =
                    method == Euc && solution.values().any(|ops| matches!(ops.as_slice(), [Op::D(_)]));
                let mut seen: Vec<Outcome> = vec![Correct];
                for t in 0..suite.trials_per_task {
                    seen.extend(outcomes_for(cs, method, &task.id, t));
                }
                seen.dedup();
                for outcome in seen {
                    let raw = render_reply(method, task, solution, &scene, outcome);
                    let (v, _) = judge(task, &scene, &raw, kind);
                    let goals: Vec<bool> = [Endpoint::Semantic, Endpoint::Fidelity, Endpoint::ExactPlacement]
                        .into_iter()
                        .filter(|e| match e {
                            Endpoint::Semantic => !task.semantic_rules.is_empty(),
                            Endpoint::Fidelity => task.expected_chain.is_some() && kind != motorscene_core::evaluation::OutputKind::Mat4Json,
                            Endpoint::ExactPlacement => task.expected_positions.is_some(),
                            Endpoint::Parse => false,
                        })
                        .map(|e| e.met_by(&v))
                        .collect();
                    let fail = |why: &str| Err(format!("{}/{}/{method}/{outcome:?}: {why}; verdict {v:?}", suite.name, task.id));
                    match outcome {
                        Malformed if v.parse_ok => return fail("malformed reply parsed"),
                        Malformed => {}
                        _ if !v.parse_ok => return fail("reply did not parse"),
                        Correct if euclidean_scale => {
                            if v.semantic_ok == Some(true) {
                                return fail("matrix rescale should not change size");
                            }
                        }
                        Correct if !goals.iter().all(|&g| g) => return fail("correct reply missed a goal"),
                        Wrong if goals.iter().all(|&g| g) => return fail("wrong reply met every goal"),
                        Reorder | DropOp if v.fidelity_ok != Some(false) => return fail("chain mutation kept fidelity"),
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(())
}

/// Published per-method counts each built-in replay should land on, as
/// (suite, endpoint, k, method, successes, n).
pub fn expected_counts() -> BTreeMap<(&'static str, &'static str, u32, &'static str), (u64, u64)> {
    let mut m = BTreeMap::new();
    let mut put = |suite, ep, k, method: StrategyName, s, n| {
        m.insert((suite, ep, k, method.as_str()), (s, n));
    };
    put("hardpack", "parse", 2, Simple, 20, 20);
    put("hardpack", "parse", 2, Shen, 19, 20);
    put("hardpack", "parse", 2, Euc, 20, 20);
    put("hardpack", "parse", 2, Se3, 20, 20);
    put("hardpack", "semantic", 2, Simple, 9, 20);
    put("hardpack", "semantic", 2, Shen, 9, 20);
    put("hardpack", "semantic", 2, Euc, 5, 20);
    put("hardpack", "semantic", 2, Se3, 9, 20);
    put("sequence_stress", "parse", 2, Simple, 120, 120);
    put("sequence_stress", "parse", 2, Se3, 120, 120);
    put("sequence_stress", "fidelity", 2, Simple, 117, 120);
    put("sequence_stress", "fidelity", 2, Se3, 108, 120);
    put("powered", "semantic", 1, Simple, 45, 100);
    put("powered", "semantic", 1, Shen, 44, 100);
    put("powered", "semantic", 1, Se3, 42, 100);
    put("powered", "semantic", 1, Euc, 24, 100);
    put("powered", "parse", 1, Shen, 95, 100);
    put("ablation", "parse", 1, Shen, 40, 50);
    put("ablation", "parse", 2, Shen, 41, 50);
    put("ablation", "parse", 1, Simple, 50, 50);
    put("ablation", "parse", 2, Verbose, 50, 50);
    put("ablation", "parse", 2, Euc, 50, 50);
    m
}

/// Per-block semantic successes for the core suite as (block, Shenlong, Simple, Euclidean).
pub const CORE_BLOCK_SEMANTIC: [(&str, u64, u64, u64, u64); 5] = [
    ("5-object", 6, 8, 7, 8),
    ("stress", 6, 6, 5, 6),
    ("10-object", 6, 6, 6, 6),
    ("accuracy", 18, 18, 5, 18),
    ("100-object", 9, 10, 10, 10),
];

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn every_planned_reply_judges_as_labelled() {
        for name in BUILTIN {
            let cs = builtin(name).unwrap();
            cs.suite.validate().unwrap();
            verify_plan(&cs).unwrap();
        }
    }

    #[test]
    fn instructions_are_unique_within_a_suite() {
        for name in BUILTIN {
            let cs = builtin(name).unwrap();
            let mut seen = HashSet::new();
            for t in cs.suite.tasks() {
                assert!(seen.insert(t.instruction.trim().to_string()), "{name}: duplicate '{}'", t.instruction);
            }
        }
    }

    #[test]
    fn cga_expressions_list_last_operation_first() {
        let ops = [Op::D(2.0), Op::R { plane: ZX, angle: std::f64::consts::FRAC_PI_4 }, Op::T([0.0, 3.0, 0.0])];
        assert_eq!(cga_expression(&ops), "T(0.0*e1 + 3.0*e2 + 0.0*e3) * R(pi/4, e3, e1) * D(2)");
    }

    #[test]
    fn fixtures_are_deterministic() {
        let a = mock_fixture(&hardpack()).to_json();
        let b = mock_fixture(&hardpack()).to_json();
        assert_eq!(a, b);
    }
}
