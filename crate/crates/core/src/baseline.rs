//! Non-CGA executors: Compact SE3 operation queues and Euclidean 4×4 matrices.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::chain::{ChainOp, OperationChain};
use crate::expr::{AssignmentStatus, Execution};
use crate::scene::Scene;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("document must be a JSON object keyed by object name: {0}")]
    Structure(String),
    #[error("'{name}': operation {index} has unknown type {tag}")]
    UnknownType { name: String, index: usize, tag: String },
    #[error("'{name}': operation {index} is missing field '{field}'")]
    MissingField { name: String, index: usize, field: &'static str },
    #[error("'{name}': operation {index} field '{field}' is malformed")]
    BadField { name: String, index: usize, field: &'static str },
    #[error("'{name}': operation {index} has a zero-norm rotation axis")]
    ZeroAxis { name: String, index: usize },
    #[error("'{name}': operation {index} has non-positive scale factor {factor}")]
    NonPositiveFactor { name: String, index: usize, factor: f64 },
    #[error("'{0}': operation list is empty")]
    EmptyOps(String),
    #[error("'{name}': expected a 4x4 numeric array ({detail})")]
    Shape { name: String, detail: String },
    #[error("request has no assignments")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Se3Op {
    T { v: [f64; 3] },
    R { axis: [f64; 3], angle_rad: f64 },
    D { factor: f64 },
}

impl Se3Op {
    pub fn chain_op(&self) -> ChainOp {
        match self {
            Se3Op::T { v } => ChainOp::Translate { v: *v },
            Se3Op::R { axis, angle_rad } => ChainOp::Rotate {
                axis: *axis,
                angle: *angle_rad,
            },
            Se3Op::D { factor } => ChainOp::Dilate { factor: *factor },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Se3Request {
    pub assignments: IndexMap<String, Vec<Se3Op>>,
}

impl Se3Request {
    /// List order is execution order.
    pub fn chain(&self) -> OperationChain {
        self.assignments.values().flatten().map(Se3Op::chain_op).collect()
    }
}

fn as_object(doc: &Value) -> Result<&serde_json::Map<String, Value>, BaselineError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| BaselineError::Structure("top level is not an object".into()))?;
    if obj.is_empty() {
        return Err(BaselineError::Empty);
    }
    Ok(obj)
}

fn vec3(op: &Value, name: &str, index: usize, field: &'static str) -> Result<[f64; 3], BaselineError> {
    let raw = op.get(field).ok_or_else(|| BaselineError::MissingField {
        name: name.to_string(),
        index,
        field,
    })?;
    let bad = || BaselineError::BadField {
        name: name.to_string(),
        index,
        field,
    };
    let arr = raw.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
    let mut out = [0.0; 3];
    for (slot, v) in out.iter_mut().zip(arr) {
        *slot = v.as_f64().filter(|x| x.is_finite()).ok_or_else(bad)?;
    }
    Ok(out)
}

fn number(op: &Value, name: &str, index: usize, field: &'static str) -> Result<f64, BaselineError> {
    op.get(field)
        .ok_or_else(|| BaselineError::MissingField {
            name: name.to_string(),
            index,
            field,
        })?
        .as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| BaselineError::BadField {
            name: name.to_string(),
            index,
            field,
        })
}

fn parse_op(op: &Value, name: &str, index: usize) -> Result<Se3Op, BaselineError> {
    let tag = op.get("type").ok_or_else(|| BaselineError::MissingField {
        name: name.to_string(),
        index,
        field: "type",
    })?;
    match tag.as_str() {
        Some("T") => Ok(Se3Op::T {
            v: vec3(op, name, index, "v")?,
        }),
        Some("R") => {
            let axis = vec3(op, name, index, "axis")?;
            let angle_rad = number(op, name, index, "angle_rad")?;
            let norm = axis.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(BaselineError::ZeroAxis {
                    name: name.to_string(),
                    index,
                });
            }
            Ok(Se3Op::R {
                axis: axis.map(|c| c / norm),
                angle_rad,
            })
        }
        Some("D") => {
            let factor = number(op, name, index, "factor")?;
            if factor <= 0.0 {
                return Err(BaselineError::NonPositiveFactor {
                    name: name.to_string(),
                    index,
                    factor,
                });
            }
            Ok(Se3Op::D { factor })
        }
        _ => Err(BaselineError::UnknownType {
            name: name.to_string(),
            index,
            tag: tag.to_string(),
        }),
    }
}

pub fn parse_se3_value(doc: &Value) -> Result<Se3Request, BaselineError> {
    let mut assignments = IndexMap::new();
    for (name, ops) in as_object(doc)? {
        let list = ops
            .as_array()
            .ok_or_else(|| BaselineError::Structure(format!("value for '{name}' is not a list")))?;
        if list.is_empty() {
            return Err(BaselineError::EmptyOps(name.clone()));
        }
        let parsed = list
            .iter()
            .enumerate()
            .map(|(i, op)| parse_op(op, name, i))
            .collect::<Result<Vec<_>, _>>()?;
        assignments.insert(name.clone(), parsed);
    }
    Ok(Se3Request { assignments })
}

pub fn parse_se3(doc: &str) -> Result<Se3Request, BaselineError> {
    let value: Value = serde_json::from_str(doc).map_err(|e| BaselineError::Structure(e.to_string()))?;
    parse_se3_value(&value)
}

/// Rodrigues rotation of `p` about the unit `axis` through the origin.
pub fn rodrigues(p: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let k = axis;
    let kxp = [k[1] * p[2] - k[2] * p[1], k[2] * p[0] - k[0] * p[2], k[0] * p[1] - k[1] * p[0]];
    let kdp = k[0] * p[0] + k[1] * p[1] + k[2] * p[2];
    std::array::from_fn(|i| p[i] * c + kxp[i] * s + k[i] * kdp * (1.0 - c))
}

fn record(statuses: &mut Vec<AssignmentStatus>, name: &str, expression: String, error: Option<String>) {
    statuses.push(AssignmentStatus {
        name: name.to_string(),
        expression,
        ok: error.is_none(),
        error,
    });
}

/// Executes each object's list left-to-right. T moves the center, R rotates
/// it about the world origin, D scales the object in place.
pub fn apply_se3(scene: &Scene, req: &Se3Request) -> Execution {
    let mut current = scene.clone();
    let mut statuses = Vec::new();
    for (name, ops) in &req.assignments {
        let text = serde_json::to_string(ops).unwrap_or_default();
        let Some(obj) = current.get(name) else {
            record(&mut statuses, name, text, Some(format!("unknown object '{name}'")));
            continue;
        };
        let (mut center, mut size) = (obj.center, obj.size);
        for op in ops {
            match op {
                Se3Op::T { v } => center = std::array::from_fn(|i| center[i] + v[i]),
                Se3Op::R { axis, angle_rad } => center = rodrigues(center, *axis, *angle_rad),
                Se3Op::D { factor } => size *= factor,
            }
        }
        let size_ratio = size / obj.size;
        let next = current
            .set_center(name, center)
            .and_then(|s| s.scale_object(name, size_ratio).map(|s| s.with_revision(current.revision() + 1)));
        match next {
            Ok(next) => {
                current = next;
                record(&mut statuses, name, text, None);
            }
            Err(e) => record(&mut statuses, name, text, Some(e.to_string())),
        }
    }
    Execution {
        scene: current,
        statuses,
        warnings: Vec::new(),
    }
}

/// Row-major homogeneous transform acting on column vectors.
pub type Mat4 = [[f64; 4]; 4];

pub const IDENTITY4: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

fn parse_matrix(name: &str, value: &Value) -> Result<Mat4, BaselineError> {
    let shape = |detail: String| BaselineError::Shape {
        name: name.to_string(),
        detail,
    };
    let rows = value.as_array().ok_or_else(|| shape("not an array".into()))?;
    if rows.len() != 4 {
        return Err(shape(format!("{} rows", rows.len())));
    }
    let mut m = [[0.0; 4]; 4];
    for (i, row) in rows.iter().enumerate() {
        let cols = row.as_array().ok_or_else(|| shape(format!("row {i} is not an array")))?;
        if cols.len() != 4 {
            return Err(shape(format!("row {i} has {} entries", cols.len())));
        }
        for (j, v) in cols.iter().enumerate() {
            m[i][j] = v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| shape(format!("entry ({i},{j}) is not a finite number")))?;
        }
    }
    Ok(m)
}

pub fn parse_mat4_value(doc: &Value) -> Result<IndexMap<String, Mat4>, BaselineError> {
    as_object(doc)?
        .iter()
        .map(|(name, v)| Ok((name.clone(), parse_matrix(name, v)?)))
        .collect()
}

pub fn parse_mat4(doc: &str) -> Result<IndexMap<String, Mat4>, BaselineError> {
    let value: Value = serde_json::from_str(doc).map_err(|e| BaselineError::Structure(e.to_string()))?;
    parse_mat4_value(&value)
}

pub fn is_affine(m: &Mat4) -> bool {
    m[3] == [0.0, 0.0, 0.0, 1.0]
}

/// center ← dehomogenized M·[center; 1]. Size is untouched.
pub fn apply_mat4(scene: &Scene, mats: &IndexMap<String, Mat4>) -> Execution {
    let mut current = scene.clone();
    let mut statuses = Vec::new();
    let mut warnings = Vec::new();
    for (name, m) in mats {
        let text = serde_json::to_string(m).unwrap_or_default();
        let Some(obj) = current.get(name) else {
            record(&mut statuses, name, text, Some(format!("unknown object '{name}'")));
            continue;
        };
        if !is_affine(m) {
            warnings.push(format!("'{name}': bottom row {:?} is not (0,0,0,1)", m[3]));
        }
        let c = obj.center;
        let h: [f64; 4] = std::array::from_fn(|i| m[i][0] * c[0] + m[i][1] * c[1] + m[i][2] * c[2] + m[i][3]);
        if h[3].abs() < 1e-12 || !h[3].is_finite() {
            record(&mut statuses, name, text, Some(format!("'{name}': homogeneous weight {} after transform", h[3])));
            continue;
        }
        match current.set_center(name, [h[0] / h[3], h[1] / h[3], h[2] / h[3]]) {
            Ok(next) => {
                current = next;
                record(&mut statuses, name, text, None);
            }
            Err(e) => record(&mut statuses, name, text, Some(e.to_string())),
        }
    }
    Execution {
        scene: current,
        statuses,
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationDiagnostic {
    pub orthonormality_residual: f64,
    pub det: f64,
}

fn upper3(m: &Mat4) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[i][j]))
}

fn det3(u: &[[f64; 3]; 3]) -> f64 {
    u[0][0] * (u[1][1] * u[2][2] - u[1][2] * u[2][1]) - u[0][1] * (u[1][0] * u[2][2] - u[1][2] * u[2][0])
        + u[0][2] * (u[1][0] * u[2][1] - u[1][1] * u[2][0])
}

/// ‖UᵀU − I‖_max and det(U) for the upper-left 3×3 block.
pub fn rotation_consistency_check(m: &Mat4) -> RotationDiagnostic {
    let u = upper3(m);
    let mut residual: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| u[k][i] * u[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((dot - target).abs());
        }
    }
    RotationDiagnostic {
        orthonormality_residual: residual,
        det: det3(&u),
    }
}

const STRUCTURE_TOL: f64 = 1e-9;

/// Classifies a matrix as a single chain op: pure translation, pure rotation
/// about the origin, or an opaque matrix.
pub fn mat4_chain_op(m: &Mat4) -> ChainOp {
    let affine = is_affine(m);
    let u = upper3(m);
    let t = [m[0][3], m[1][3], m[2][3]];
    let identity_block = (0..3).all(|i| (0..3).all(|j| (u[i][j] - if i == j { 1.0 } else { 0.0 }).abs() <= STRUCTURE_TOL));
    if affine && identity_block {
        return ChainOp::Translate { v: t };
    }
    let diag = rotation_consistency_check(m);
    let no_shift = t.iter().all(|c| c.abs() <= STRUCTURE_TOL);
    if affine && no_shift && diag.orthonormality_residual <= STRUCTURE_TOL && (diag.det - 1.0).abs() <= STRUCTURE_TOL {
        let (axis, angle) = axis_angle(&u);
        return ChainOp::Rotate { axis, angle };
    }
    ChainOp::Other { matrix: *m }
}

/// Axis-angle of a proper rotation matrix, angle in [0, π].
pub fn axis_angle(u: &[[f64; 3]; 3]) -> ([f64; 3], f64) {
    let trace = u[0][0] + u[1][1] + u[2][2];
    let angle = ((trace - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
    let skew = [u[2][1] - u[1][2], u[0][2] - u[2][0], u[1][0] - u[0][1]];
    let skew_norm = skew.iter().map(|c| c * c).sum::<f64>().sqrt();
    if angle < 1e-12 {
        return ([0.0, 0.0, 1.0], 0.0);
    }
    if skew_norm > 1e-6 {
        return (skew.map(|c| c / skew_norm), angle);
    }
    // angle ≈ π: axis from the largest diagonal of (U + I)/2 = k kᵀ.
    let i = (0..3).max_by(|&a, &b| u[a][a].total_cmp(&u[b][b])).unwrap();
    let col: [f64; 3] = std::array::from_fn(|r| (u[r][i] + if r == i { 1.0 } else { 0.0 }) / 2.0);
    let n = col.iter().map(|c| c * c).sum::<f64>().sqrt();
    (col.map(|c| c / n), angle)
}

pub fn mat4_chain(mats: &IndexMap<String, Mat4>) -> OperationChain {
    mats.values().map(mat4_chain_op).collect()
}

pub fn translation_mat4(v: [f64; 3]) -> Mat4 {
    let mut m = IDENTITY4;
    for i in 0..3 {
        m[i][3] = v[i];
    }
    m
}

/// Rotation about a unit axis through the origin.
pub fn rotation_mat4(axis: [f64; 3], angle: f64) -> Mat4 {
    let mut m = IDENTITY4;
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        let col = rodrigues(e, axis, angle);
        for i in 0..3 {
            m[i][j] = col[i];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{execute_request, EditRequest};
    use crate::scene::default_scene;
    use proptest::prelude::*;
    use serde_json::json;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn se3_parsing() {
        let req = parse_se3(r#"{"Obj":[{"type":"T","v":[1,2,3]}]}"#).unwrap();
        assert_eq!(req.assignments["Obj"], vec![Se3Op::T { v: [1.0, 2.0, 3.0] }]);

        let req = parse_se3(r#"{"Obj":[{"type":"R","axis":[0,0,2],"angle_rad":1.25}]}"#).unwrap();
        assert_eq!(
            req.assignments["Obj"][0],
            Se3Op::R {
                axis: [0.0, 0.0, 1.0],
                angle_rad: 1.25
            }
        );

        assert!(matches!(parse_se3(r#"{"Obj":[{"type":"Q"}]}"#), Err(BaselineError::UnknownType { .. })));
        assert!(matches!(parse_se3(r#"{"Obj":[{"v":[1,2,3]}]}"#), Err(BaselineError::MissingField { field: "type", .. })));
        assert!(matches!(parse_se3(r#"{"Obj":[{"type":"T"}]}"#), Err(BaselineError::MissingField { field: "v", .. })));
        assert!(matches!(parse_se3(r#"{"Obj":[{"type":"T","v":[1,2]}]}"#), Err(BaselineError::BadField { .. })));
        assert!(matches!(
            parse_se3(r#"{"Obj":[{"type":"R","axis":[0,0,0],"angle_rad":1}]}"#),
            Err(BaselineError::ZeroAxis { .. })
        ));
        assert!(matches!(
            parse_se3(r#"{"Obj":[{"type":"D","factor":0}]}"#),
            Err(BaselineError::NonPositiveFactor { .. })
        ));
        assert!(matches!(parse_se3(r#"{"Obj":[]}"#), Err(BaselineError::EmptyOps(_))));
        assert!(matches!(parse_se3("[1]"), Err(BaselineError::Structure(_))));
        assert!(matches!(parse_se3(r#"{"Obj":[{"type":"T","v":[1,2"#), Err(BaselineError::Structure(_))));
    }

    #[test]
    fn se3_translation_matches_cga() {
        let scene = default_scene();
        let se3 = apply_se3(&scene, &parse_se3(r#"{"RedSphere":[{"type":"T","v":[2,0,0]}]}"#).unwrap());
        let cga = execute_request(&scene, &EditRequest::single("RedSphere", "T(2*e1)"));
        let a = se3.scene.get("RedSphere").unwrap().center;
        let b = cga.scene.get("RedSphere").unwrap().center;
        assert!(close(a, [2.0, 0.0, 0.0], 1e-12));
        assert!(close(a, b, 1e-9));
    }

    #[test]
    fn rodrigues_quarter_turn() {
        // Independent oracle: the z-rotation matrix [[0,-1,0],[1,0,0],[0,0,1]].
        let p = [1.0, 0.0, 0.0];
        let oracle = [0.0 * p[0] - 1.0 * p[1], 1.0 * p[0] + 0.0 * p[1], p[2]];
        let got = rodrigues(p, [0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2);
        assert!(close(got, oracle, 1e-12));
        assert!(close(oracle, [0.0, 1.0, 0.0], 0.0));
    }

    #[test]
    fn se3_dilation_is_object_centric() {
        let scene = default_scene();
        let out = apply_se3(&scene, &parse_se3(r#"{"BlueCube":[{"type":"D","factor":3}]}"#).unwrap());
        let blue = out.scene.get("BlueCube").unwrap();
        assert_eq!((blue.size, blue.center), (3.0, [4.0, 0.0, 0.0]));
        assert_eq!(out.scene.revision(), 1);
    }

    #[test]
    fn se3_order_matters() {
        let scene = default_scene();
        let tr = parse_se3(r#"{"RedSphere":[{"type":"T","v":[1,0,0]},{"type":"R","axis":[0,0,1],"angle_rad":1.5707963267948966}]}"#).unwrap();
        let rt = parse_se3(r#"{"RedSphere":[{"type":"R","axis":[0,0,1],"angle_rad":1.5707963267948966},{"type":"T","v":[1,0,0]}]}"#).unwrap();
        let a = apply_se3(&scene, &tr).scene.get("RedSphere").unwrap().center;
        let b = apply_se3(&scene, &rt).scene.get("RedSphere").unwrap().center;
        assert!(close(a, [0.0, 1.0, 0.0], 1e-12));
        assert!(close(b, [1.0, 0.0, 0.0], 1e-12));
        assert_eq!(tr.chain().kinds(), vec![crate::chain::OpKind::Translate, crate::chain::OpKind::Rotate]);
    }

    #[test]
    fn se3_unknown_object_is_per_assignment() {
        let scene = default_scene();
        let req = parse_se3(r#"{"Ghost":[{"type":"T","v":[1,0,0]}],"RedSphere":[{"type":"T","v":[1,0,0]}]}"#).unwrap();
        let out = apply_se3(&scene, &req);
        assert_eq!(out.statuses.iter().map(|s| s.ok).collect::<Vec<_>>(), vec![false, true]);
    }

    #[test]
    fn mat4_parsing_and_application() {
        let scene = default_scene();
        let mats = parse_mat4(r#"{"RedSphere": [[1,0,0,3],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#).unwrap();
        let out = apply_mat4(&scene, &mats);
        assert!(out.all_ok() && out.warnings.is_empty());
        assert_eq!(out.scene.get("RedSphere").unwrap().center, [3.0, 0.0, 0.0]);
        assert_eq!(mat4_chain_op(&mats["RedSphere"]), ChainOp::Translate { v: [3.0, 0.0, 0.0] });

        let rz = parse_mat4(r#"{"BlueCube": [[0,-1,0,0],[1,0,0,0],[0,0,1,0],[0,0,0,1]]}"#).unwrap();
        let out = apply_mat4(&scene, &rz);
        // matrix-vector oracle on (4,0,0)
        assert_eq!(out.scene.get("BlueCube").unwrap().center, [0.0, 4.0, 0.0]);
        let ChainOp::Rotate { axis, angle } = mat4_chain_op(&rz["BlueCube"]) else { panic!() };
        assert!(close(axis, [0.0, 0.0, 1.0], 1e-12) && (angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        let id = IndexMap::from([("RedSphere".to_string(), IDENTITY4)]);
        assert_eq!(apply_mat4(&scene, &id).scene.get("RedSphere"), scene.get("RedSphere"));

        assert!(matches!(parse_mat4(r#"{"A": [[1,0,0],[0,1,0],[0,0,1]]}"#), Err(BaselineError::Shape { .. })));
        assert!(matches!(parse_mat4(r#"{"A": [[1,0,0,"x"],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#), Err(BaselineError::Shape { .. })));
    }

    #[test]
    fn mat4_non_affine_warns_and_dehomogenizes() {
        let scene = default_scene();
        let mats = parse_mat4_value(&json!({"BlueCube": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,2]]})).unwrap();
        let out = apply_mat4(&scene, &mats);
        assert!(out.all_ok());
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.scene.get("BlueCube").unwrap().center, [2.0, 0.0, 0.0]);

        let zero_w = parse_mat4_value(&json!({"BlueCube": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,0]]})).unwrap();
        assert!(!apply_mat4(&scene, &zero_w).all_ok());
    }

    #[test]
    fn mat4_scale_moves_center_only() {
        let scene = default_scene();
        let mats = parse_mat4_value(&json!({"BlueCube": [[2,0,0,0],[0,2,0,0],[0,0,2,0],[0,0,0,1]]})).unwrap();
        let blue = apply_mat4(&scene, &mats).scene.get("BlueCube").unwrap().clone();
        assert_eq!((blue.center, blue.size), ([8.0, 0.0, 0.0], 1.0));
        assert!(matches!(mat4_chain_op(&mats["BlueCube"]), ChainOp::Other { .. }));
    }

    #[test]
    fn rotation_diagnostics() {
        let d = rotation_consistency_check(&IDENTITY4);
        assert_eq!((d.orthonormality_residual, d.det), (0.0, 1.0));
        let rz = [[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        let d = rotation_consistency_check(&rz);
        assert_eq!((d.orthonormality_residual, d.det), (0.0, 1.0));
        let bad = [[0.0, -1.0, 0.0, 0.0], [0.5, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        let d = rotation_consistency_check(&bad);
        // column 0 is (0, 0.5, 0): its squared norm is 0.25
        assert!((d.orthonormality_residual - 0.75).abs() < 1e-15);
        assert!((d.det - 0.5).abs() < 1e-15);
    }

    #[test]
    fn axis_angle_near_pi() {
        let m = rotation_mat4([0.0, 1.0, 0.0], std::f64::consts::PI);
        let ChainOp::Rotate { axis, angle } = mat4_chain_op(&m) else { panic!() };
        assert!((angle - std::f64::consts::PI).abs() < 1e-9);
        assert!(close(axis.map(f64::abs), [0.0, 1.0, 0.0], 1e-9));
    }

    // --- cross-representation equivalence

    #[derive(Debug, Clone)]
    enum Step {
        T([f64; 3]),
        R(usize, f64),
    }

    fn step() -> impl Strategy<Value = Step> {
        prop_oneof![
            prop::array::uniform3(-10f64..10.0).prop_map(Step::T),
            (0usize..3, -6.3f64..6.3).prop_map(|(a, th)| Step::R(a, th)),
        ]
    }

    // Coordinate axis k ↔ the CGA plane whose right-handed normal is +k.
    const PLANES: [(usize, usize); 3] = [(2, 3), (3, 1), (1, 2)];

    fn unit(k: usize) -> [f64; 3] {
        std::array::from_fn(|i| if i == k { 1.0 } else { 0.0 })
    }

    proptest! {
        #[test]
        fn se3_mat4_and_cga_agree(steps in prop::collection::vec(step(), 1..6), start in prop::array::uniform3(-10f64..10.0)) {
            let scene = Scene::new([crate::scene::SceneObject::new("Obj", crate::scene::Shape::Cube, "red", start, 1.0)]).unwrap();

            let ops: Vec<Se3Op> = steps.iter().map(|s| match s {
                Step::T(v) => Se3Op::T { v: *v },
                Step::R(k, th) => Se3Op::R { axis: unit(*k), angle_rad: *th },
            }).collect();
            let se3 = apply_se3(&scene, &Se3Request { assignments: IndexMap::from([("Obj".to_string(), ops)]) });

            let mut m = IDENTITY4;
            for s in &steps {
                let step_m = match s {
                    Step::T(v) => translation_mat4(*v),
                    Step::R(k, th) => rotation_mat4(unit(*k), *th),
                };
                m = mat_mul(&step_m, &m);
            }
            let mat = apply_mat4(&scene, &IndexMap::from([("Obj".to_string(), m)]));

            // CGA factors are written right-to-left relative to execution.
            let expr = steps.iter().rev().map(|s| match s {
                Step::T(v) => format!("T({:?}*e1 + {:?}*e2 + {:?}*e3)", v[0], v[1], v[2]),
                Step::R(k, th) => format!("R({th:?}, e{}, e{})", PLANES[*k].0, PLANES[*k].1),
            }).collect::<Vec<_>>().join("*");
            let cga = execute_request(&scene, &EditRequest::single("Obj", expr.clone()));
            prop_assert!(cga.all_ok(), "{:?}", cga.errors());

            let a = se3.scene.get("Obj").unwrap().center;
            let b = mat.scene.get("Obj").unwrap().center;
            let c = cga.scene.get("Obj").unwrap().center;
            prop_assert!(close(a, b, 1e-9), "se3 {a:?} vs mat4 {b:?}");
            prop_assert!(close(a, c, 1e-9), "se3 {a:?} vs cga {c:?} for {expr}");
        }
    }
}
