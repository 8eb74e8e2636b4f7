//! Verdict layers: parse validity, spatial accuracy, semantic geometry rules
//! and sequence fidelity.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{self, Mat4, Se3Request};
use crate::chain::{ChainOp, OperationChain};
use crate::expr::{self, EditRequest, Execution, MotorProgram};
use crate::scene::Scene;

/// Placement error below which a result counts as an exact success.
pub const EXACT_SUCCESS_THRESHOLD: f64 = 0.5;
pub const DEFAULT_PLACEMENT_TOL: f64 = 0.5;
pub const DEFAULT_SCALE_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown object '{0}'")]
    UnknownObject(String),
    #[error("rule tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    CgaJson,
    Se3Json,
    Mat4Json,
}

#[derive(Debug, Clone)]
pub enum ParsedOutput {
    Cga {
        request: EditRequest,
        programs: IndexMap<String, MotorProgram>,
    },
    Se3(Se3Request),
    Mat4(IndexMap<String, Mat4>),
}

#[derive(Debug, Clone)]
pub struct ParseCheck {
    pub parse_ok: bool,
    pub parsed: Option<ParsedOutput>,
    pub diagnostics: Vec<String>,
}

impl ParseCheck {
    fn failed(msg: String) -> Self {
        Self {
            parse_ok: false,
            parsed: None,
            diagnostics: vec![msg],
        }
    }
}

/// Spans of the top-level balanced `{...}` objects in `text`, string-aware.
fn balanced_objects(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let (mut depth, mut start) = (0usize, 0usize);
    let (mut in_string, mut escaped) = (false, false);
    for (i, c) in text.char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' if depth > 0 => in_string = true,
            '{' => {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            }
            '}' if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    spans.push((start, i + 1));
                }
            }
            _ => {}
        }
    }
    spans
}

/// The JSON payload of a model reply: the last fenced block if any, else the
/// last balanced object, else the trimmed text itself.
pub fn extract_json(raw: &str) -> &str {
    let mut fenced = None;
    let mut rest = raw;
    let mut offset = 0;
    while let Some(open) = rest.find("```") {
        let after_ticks = open + 3;
        let body_start = rest[after_ticks..].find('\n').map(|n| after_ticks + n + 1);
        let Some(body_start) = body_start else { break };
        let Some(close) = rest[body_start..].find("```") else { break };
        fenced = Some((offset + body_start, offset + body_start + close));
        let consumed = body_start + close + 3;
        offset += consumed;
        rest = &rest[consumed..];
    }
    let scope = match fenced {
        Some((a, b)) => &raw[a..b],
        None => raw,
    };
    match balanced_objects(scope).last() {
        Some(&(a, b)) => &scope[a..b],
        None => scope.trim(),
    }
}

fn check_cga(value: &serde_json::Value) -> ParseCheck {
    let request = match EditRequest::from_value(value) {
        Ok(r) => r,
        Err(e) => return ParseCheck::failed(e.to_string()),
    };
    let mut programs = IndexMap::new();
    let mut diagnostics = Vec::new();
    for (name, src) in &request.assignments {
        match expr::parse_cga(src).and_then(|ast| expr::evaluate_cga(&ast)) {
            Ok(p) => {
                programs.insert(name.clone(), p);
            }
            Err(e) => diagnostics.push(format!("{name}: {e}")),
        }
    }
    if !diagnostics.is_empty() {
        return ParseCheck {
            parse_ok: false,
            parsed: None,
            diagnostics,
        };
    }
    ParseCheck {
        parse_ok: true,
        parsed: Some(ParsedOutput::Cga { request, programs }),
        diagnostics,
    }
}

/// parse_ok iff the document is well-formed and every expression evaluates.
/// Failures are reported as verdicts, never as errors.
pub fn check_parse(raw: &str, kind: OutputKind) -> ParseCheck {
    let payload = extract_json(raw);
    let value: serde_json::Value = match serde_json::from_str(payload) {
        Ok(v) => v,
        Err(e) => return ParseCheck::failed(format!("malformed JSON: {e}")),
    };
    match kind {
        OutputKind::CgaJson => check_cga(&value),
        OutputKind::Se3Json => match baseline::parse_se3_value(&value) {
            Ok(req) => ParseCheck {
                parse_ok: true,
                parsed: Some(ParsedOutput::Se3(req)),
                diagnostics: vec![],
            },
            Err(e) => ParseCheck::failed(e.to_string()),
        },
        OutputKind::Mat4Json => match baseline::parse_mat4_value(&value) {
            Ok(m) => ParseCheck {
                parse_ok: true,
                parsed: Some(ParsedOutput::Mat4(m)),
                diagnostics: vec![],
            },
            Err(e) => ParseCheck::failed(e.to_string()),
        },
    }
}

pub fn execute_parsed(scene: &Scene, parsed: &ParsedOutput) -> Execution {
    match parsed {
        ParsedOutput::Cga { request, .. } => expr::execute_request(scene, request),
        ParsedOutput::Se3(req) => baseline::apply_se3(scene, req),
        ParsedOutput::Mat4(m) => baseline::apply_mat4(scene, m),
    }
}

/// Execution-ordered chain across all assignments, in document order.
pub fn extract_chain(parsed: &ParsedOutput) -> OperationChain {
    match parsed {
        ParsedOutput::Cga { programs, .. } => programs.values().flat_map(|p| p.op_chain.ops.iter().cloned()).collect(),
        ParsedOutput::Se3(req) => req.chain(),
        ParsedOutput::Mat4(m) => baseline::mat4_chain(m),
    }
}

/// Expected ops must appear in order within `actual`, parameters agreeing
/// to 1e-6 relative. Extra ops in `actual` are allowed.
pub fn check_sequence_fidelity(expected: &OperationChain, actual: &OperationChain) -> bool {
    expected.is_subsequence_of(actual)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialError {
    pub per_object: IndexMap<String, f64>,
    pub max_error: f64,
    pub exact_success: bool,
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn spatial_error(scene_after: &Scene, expected: &IndexMap<String, [f64; 3]>) -> Result<SpatialError, EvalError> {
    let mut per_object = IndexMap::new();
    for (name, want) in expected {
        let obj = scene_after.get(name).ok_or_else(|| EvalError::UnknownObject(name.clone()))?;
        per_object.insert(name.clone(), distance(obj.center, *want));
    }
    let max_error = per_object.values().copied().fold(0.0, f64::max);
    Ok(SpatialError {
        per_object,
        max_error,
        exact_success: max_error < EXACT_SUCCESS_THRESHOLD,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Which face of the target the mover should touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Mover sits on the target's +axis face (e.g. "on top" for y).
    Positive,
    /// Mover sits against the target's −axis face (e.g. "left of" for x).
    Negative,
    Either,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SemanticRule {
    SurfaceContact {
        mover: String,
        target: String,
        axis: Axis,
        #[serde(default = "either")]
        side: Side,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Midpoint {
        mover: String,
        a: String,
        b: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    TargetDisplacement {
        mover: String,
        delta: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    ScaleFactor {
        mover: String,
        s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    AbsolutePlacement {
        mover: String,
        position: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
}

fn either() -> Side {
    Side::Either
}

impl SemanticRule {
    pub fn tolerance(&self) -> f64 {
        match self {
            SemanticRule::ScaleFactor { tolerance, .. } => tolerance.unwrap_or(DEFAULT_SCALE_REL_TOL),
            SemanticRule::SurfaceContact { tolerance, .. }
            | SemanticRule::Midpoint { tolerance, .. }
            | SemanticRule::TargetDisplacement { tolerance, .. }
            | SemanticRule::AbsolutePlacement { tolerance, .. } => tolerance.unwrap_or(DEFAULT_PLACEMENT_TOL),
        }
    }

    pub fn mover(&self) -> &str {
        match self {
            SemanticRule::SurfaceContact { mover, .. }
            | SemanticRule::Midpoint { mover, .. }
            | SemanticRule::TargetDisplacement { mover, .. }
            | SemanticRule::ScaleFactor { mover, .. }
            | SemanticRule::AbsolutePlacement { mover, .. } => mover,
        }
    }
}

fn lookup<'a>(scene: &'a Scene, name: &str) -> Result<&'a crate::scene::SceneObject, EvalError> {
    scene.get(name).ok_or_else(|| EvalError::UnknownObject(name.to_string()))
}

pub fn check_semantic(rule: &SemanticRule, before: &Scene, after: &Scene) -> Result<bool, EvalError> {
    let tol = rule.tolerance();
    if !(tol > 0.0) {
        return Err(EvalError::BadTolerance(tol));
    }
    let moved = lookup(after, rule.mover())?;
    let original = lookup(before, rule.mover())?;
    Ok(match rule {
        SemanticRule::SurfaceContact { target, axis, side, .. } => {
            let t = lookup(after, target)?.aabb();
            let m = moved.aabb();
            let a = axis.index();
            let on_positive = (m.min[a] - t.max[a]).abs();
            let on_negative = (m.max[a] - t.min[a]).abs();
            let gap = match side {
                Side::Positive => on_positive,
                Side::Negative => on_negative,
                Side::Either => on_positive.min(on_negative),
            };
            gap <= tol
        }
        SemanticRule::Midpoint { a, b, .. } => {
            let (a, b) = (lookup(after, a)?.center, lookup(after, b)?.center);
            let mid = std::array::from_fn(|i| (a[i] + b[i]) / 2.0);
            distance(moved.center, mid) <= tol
        }
        SemanticRule::TargetDisplacement { delta, .. } => {
            let actual: [f64; 3] = std::array::from_fn(|i| moved.center[i] - original.center[i]);
            distance(actual, *delta) <= tol
        }
        SemanticRule::ScaleFactor { s, .. } => (moved.size / original.size - s).abs() <= tol * s.abs(),
        SemanticRule::AbsolutePlacement { position, .. } => distance(moved.center, *position) <= tol,
    })
}

/// One evaluation unit: an instruction plus whatever ground truth is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub instruction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_chain: Option<OperationChain>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub semantic_rules: Vec<SemanticRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_positions: Option<IndexMap<String, [f64; 3]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub parse_ok: bool,
    pub semantic_ok: Option<bool>,
    pub fidelity_ok: Option<bool>,
    pub spatial_error: Option<f64>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl Verdict {
    pub fn exact_success(&self) -> bool {
        self.spatial_error.is_some_and(|e| e < EXACT_SUCCESS_THRESHOLD)
    }

    /// The layering invariant: higher layers are only populated above a valid parse.
    pub fn is_layered(&self) -> bool {
        self.parse_ok || (self.semantic_ok.is_none() && self.fidelity_ok.is_none() && self.spatial_error.is_none())
    }
}

/// Runs every applicable verdict layer for one raw model reply.
pub fn judge(task: &Task, scene: &Scene, raw: &str, kind: OutputKind) -> (Verdict, Option<Scene>) {
    let check = check_parse(raw, kind);
    let mut verdict = Verdict {
        parse_ok: check.parse_ok,
        semantic_ok: None,
        fidelity_ok: None,
        spatial_error: None,
        diagnostics: check.diagnostics,
    };
    let Some(parsed) = check.parsed else {
        return (verdict, None);
    };

    let execution = execute_parsed(scene, &parsed);
    verdict.diagnostics.extend(execution.errors());
    verdict.diagnostics.extend(execution.warnings.iter().cloned());
    let after = execution.scene;

    if let Some(expected) = &task.expected_chain {
        verdict.fidelity_ok = Some(check_sequence_fidelity(expected, &extract_chain(&parsed)));
    }
    if !task.semantic_rules.is_empty() {
        let mut ok = execution.statuses.iter().all(|s| s.ok);
        for rule in &task.semantic_rules {
            match check_semantic(rule, scene, &after) {
                Ok(pass) => ok &= pass,
                Err(e) => {
                    verdict.diagnostics.push(e.to_string());
                    ok = false;
                }
            }
        }
        verdict.semantic_ok = Some(ok);
    }
    if let Some(expected) = &task.expected_positions {
        match spatial_error(&after, expected) {
            Ok(err) => verdict.spatial_error = Some(err.max_error),
            Err(e) => verdict.diagnostics.push(e.to_string()),
        }
    }
    (verdict, Some(after))
}

/// Ops a CGA chain would carry for a plain displacement, for building expectations.
pub fn translate_op(v: [f64; 3]) -> ChainOp {
    ChainOp::Translate { v }
}
