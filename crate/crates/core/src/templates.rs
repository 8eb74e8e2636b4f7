//! Deterministic templates for known spatial phrases, and the router that
//! decides between templates and the language model.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::EditRequest;
use crate::scene::{Scene, SceneObject, Shape};

/// Scanned case-insensitively; on equal positions the earlier entry wins.
pub const KEYWORDS: [&str; 6] = ["on top", "between", "next to", "left", "rotate", "scale"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemplateError {
    #[error("instruction mentions no known object color")]
    NoColor,
    #[error("color '{0}' matches no object in the scene")]
    NoObjectForColor(String),
    #[error("'{color}' is ambiguous between {candidates:?}")]
    Ambiguous { color: String, candidates: Vec<String> },
    #[error("'{keyword}' needs {needed} reference object(s), found {found}")]
    MissingTargets { keyword: String, needed: usize, found: usize },
    #[error("rotation plane must use two distinct axes among e1, e2, e3")]
    BadPlane,
    #[error("scale factor must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("could not find a scale factor in the instruction")]
    NoScaleFactor,
    #[error("no template keyword in instruction")]
    NoKeyword,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Template,
    Llm,
    FallbackTemplate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteDecision {
    pub route: Route,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_keyword: Option<String>,
}

fn first_keyword(instruction: &str) -> Option<&'static str> {
    let lower = instruction.to_lowercase();
    KEYWORDS
        .iter()
        .enumerate()
        .filter_map(|(priority, kw)| lower.find(kw).map(|pos| (pos, priority, *kw)))
        .min()
        .map(|(_, _, kw)| kw)
}

pub fn route(instruction: &str, llm_available: bool) -> RouteDecision {
    match first_keyword(instruction) {
        Some(kw) => RouteDecision {
            route: Route::Template,
            matched_keyword: Some(kw.to_string()),
        },
        None => RouteDecision {
            route: if llm_available { Route::Llm } else { Route::FallbackTemplate },
            matched_keyword: None,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    NextToLeft,
    OnTopOf,
    Between,
    Rotate,
    Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RelationParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialRelation {
    pub kind: RelationKind,
    pub mover: String,
    pub targets: Vec<String>,
    #[serde(default)]
    pub params: RelationParams,
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Whole-word, case-insensitive occurrences of `word` in `lower`.
fn word_positions(lower: &str, word: &str) -> Vec<usize> {
    let bytes = lower.as_bytes();
    lower
        .match_indices(word)
        .map(|(i, _)| i)
        .filter(|&i| {
            let before = i == 0 || !is_word_byte(bytes[i - 1]);
            let end = i + word.len();
            let after = end >= bytes.len() || !is_word_byte(bytes[end]);
            before && after
        })
        .collect()
}

fn shape_after(lower: &str, pos: usize) -> Option<Shape> {
    let next = lower[pos..].split_whitespace().nth(1)?;
    let next = next.trim_matches(|c: char| !c.is_ascii_alphanumeric());
    match next {
        "sphere" | "spheres" | "ball" => Some(Shape::Sphere),
        "cube" | "cubes" | "box" | "block" => Some(Shape::Cube),
        _ => None,
    }
}

/// First color mention is the mover; later distinct mentions are targets.
/// The color vocabulary comes from the scene itself.
pub fn parse_references(instruction: &str, scene: &Scene) -> Result<(String, Vec<String>), TemplateError> {
    let lower = instruction.to_lowercase();
    let mut colors: Vec<String> = scene.objects().map(|o| o.color.to_lowercase()).collect();
    colors.sort();
    colors.dedup();

    let mut mentions: Vec<(usize, String)> = colors
        .iter()
        .flat_map(|c| word_positions(&lower, c).into_iter().map(move |p| (p, c.clone())))
        .collect();
    mentions.sort();
    if mentions.is_empty() {
        return Err(TemplateError::NoColor);
    }

    let mut resolved: Vec<String> = Vec::new();
    for (pos, color) in mentions {
        let mut candidates: Vec<&SceneObject> = scene.objects().filter(|o| o.color.eq_ignore_ascii_case(&color)).collect();
        if candidates.len() > 1 {
            if let Some(shape) = shape_after(&lower, pos) {
                candidates.retain(|o| o.shape == shape);
            }
        }
        let name = match candidates.as_slice() {
            [] => return Err(TemplateError::NoObjectForColor(color)),
            [one] => one.name.clone(),
            many => {
                return Err(TemplateError::Ambiguous {
                    color,
                    candidates: many.iter().map(|o| o.name.clone()).collect(),
                })
            }
        };
        if !resolved.contains(&name) {
            resolved.push(name);
        }
    }
    let mover = resolved.remove(0);
    Ok((mover, resolved))
}

/// Shortest round-trip decimal with a trailing `.0` for integers; `-0` prints as `0.0`.
pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:?}")
}

pub fn translation_expr(d: [f64; 3]) -> String {
    format!(
        "T({}*e1 + {}*e2 + {}*e3)",
        format_number(d[0]),
        format_number(d[1]),
        format_number(d[2])
    )
}

/// Angles that are small rational multiples of π print as such ("pi/2", "-3*pi/4").
pub fn format_angle(rad: f64) -> String {
    if rad == 0.0 {
        return "0".into();
    }
    for den in [1i64, 2, 3, 4, 6, 8, 12] {
        let num = rad * den as f64 / PI;
        let rounded = num.round();
        if (num - rounded).abs() < 1e-9 && rounded != 0.0 {
            let n = rounded as i64;
            let sign = if n < 0 { "-" } else { "" };
            let mag = match n.abs() {
                1 => "pi".to_string(),
                k => format!("{k}*pi"),
            };
            return if den == 1 { format!("{sign}{mag}") } else { format!("{sign}{mag}/{den}") };
        }
    }
    format_number(rad)
}

fn format_factor(s: f64) -> String {
    if s.fract() == 0.0 && s.abs() < 1e15 {
        format!("{}", s as i64)
    } else {
        format_number(s)
    }
}

fn single(mover: &SceneObject, expr: String) -> EditRequest {
    EditRequest::single(mover.name.clone(), expr)
}

/// Left-side tangent placement along x; the mover keeps its own y and z.
pub fn next_to_left(mover: &SceneObject, target: &SceneObject) -> EditRequest {
    let dx = target.aabb().min[0] - mover.size - mover.center[0];
    single(mover, translation_expr([dx, 0.0, 0.0]))
}

/// Rest the mover on the target's top face, centered over it in x and z.
pub fn on_top_of(mover: &SceneObject, target: &SceneObject) -> EditRequest {
    let new_y = target.aabb().max[1] + mover.size;
    let delta = [
        target.center[0] - mover.center[0],
        new_y - mover.center[1],
        target.center[2] - mover.center[2],
    ];
    single(mover, translation_expr(delta))
}

pub fn between(mover: &SceneObject, a: &SceneObject, b: &SceneObject) -> EditRequest {
    let delta: [f64; 3] = std::array::from_fn(|i| (a.center[i] + b.center[i]) / 2.0 - mover.center[i]);
    single(mover, translation_expr(delta))
}

pub fn rotate_template(mover: &SceneObject, angle_rad: f64, plane: (usize, usize)) -> Result<EditRequest, TemplateError> {
    let (i, j) = plane;
    if i == j || !(1..=3).contains(&i) || !(1..=3).contains(&j) || !angle_rad.is_finite() {
        return Err(TemplateError::BadPlane);
    }
    Ok(single(mover, format!("R({}, e{i}, e{j})", format_angle(angle_rad))))
}

pub fn scale_template(mover: &SceneObject, s: f64) -> Result<EditRequest, TemplateError> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(TemplateError::BadScale(s));
    }
    Ok(single(mover, format!("D({})", format_factor(s))))
}

fn numbers_in(lower: &str) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let bytes = lower.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let starts = bytes[i].is_ascii_digit() || (bytes[i] == b'.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit());
        if starts && (i == 0 || !is_word_byte(bytes[i - 1]) || bytes[i - 1] == b'x') {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let text = lower[start..i].trim_end_matches('.');
            if let Ok(v) = text.parse::<f64>() {
                let negative = start > 0 && bytes[start - 1] == b'-';
                out.push((start, if negative { -v } else { v }));
            }
        } else {
            i += 1;
        }
    }
    out
}

fn rotation_params(lower: &str) -> (f64, (usize, usize)) {
    let degrees = numbers_in(lower)
        .into_iter()
        .find(|(pos, _)| {
            let rest = &lower[*pos..];
            rest.contains("deg") || rest.contains('°')
        })
        .map(|(_, v)| v);
    let angle = match degrees {
        Some(d) => d.to_radians(),
        None if lower.contains("half turn") || lower.contains("180") => PI,
        None => PI / 2.0,
    };
    let angle = if lower.contains("clockwise") && !lower.contains("counterclockwise") && !lower.contains("counter-clockwise") {
        -angle
    } else {
        angle
    };
    let has = |words: &[&str]| words.iter().any(|w| lower.contains(w));
    let plane = if has(&["x axis", "x-axis"]) {
        (2, 3)
    } else if has(&["y axis", "y-axis", "vertical"]) {
        (3, 1)
    } else {
        (1, 2)
    };
    (angle, plane)
}

fn scale_factor(lower: &str) -> Option<f64> {
    for (word, s) in [("double", 2.0), ("twice", 2.0), ("triple", 3.0), ("halve", 0.5), ("half", 0.5)] {
        if lower.contains(word) {
            return Some(s);
        }
    }
    let (pos, v) = numbers_in(lower).into_iter().next()?;
    let percent = lower[pos..].split_whitespace().next().is_some_and(|w| w.contains('%')) || lower[pos..].contains("percent");
    Some(if percent { v / 100.0 } else { v })
}

fn resolve<'a>(scene: &'a Scene, name: &str) -> &'a SceneObject {
    scene.get(name).expect("references resolve against the same scene")
}

/// Instruction → relation → CGA request, for template-routed instructions.
pub fn plan(instruction: &str, scene: &Scene) -> Result<(SpatialRelation, EditRequest), TemplateError> {
    let keyword = first_keyword(instruction).ok_or(TemplateError::NoKeyword)?;
    let lower = instruction.to_lowercase();
    let (mover_name, targets) = parse_references(instruction, scene)?;
    let mover = resolve(scene, &mover_name);
    let need = |n: usize| -> Result<(), TemplateError> {
        if targets.len() < n {
            Err(TemplateError::MissingTargets {
                keyword: keyword.to_string(),
                needed: n,
                found: targets.len(),
            })
        } else {
            Ok(())
        }
    };
    let mut params = RelationParams::default();
    let (kind, used_targets, request) = match keyword {
        "on top" => {
            need(1)?;
            (RelationKind::OnTopOf, targets[..1].to_vec(), on_top_of(mover, resolve(scene, &targets[0])))
        }
        "between" => {
            need(2)?;
            let req = between(mover, resolve(scene, &targets[0]), resolve(scene, &targets[1]));
            (RelationKind::Between, targets[..2].to_vec(), req)
        }
        "next to" | "left" => {
            need(1)?;
            (RelationKind::NextToLeft, targets[..1].to_vec(), next_to_left(mover, resolve(scene, &targets[0])))
        }
        "rotate" => {
            let (angle, plane) = rotation_params(&lower);
            params.angle_rad = Some(angle);
            params.plane = Some(plane);
            (RelationKind::Rotate, vec![mover_name.clone()], rotate_template(mover, angle, plane)?)
        }
        _ => {
            let s = scale_factor(&lower).ok_or(TemplateError::NoScaleFactor)?;
            params.factor = Some(s);
            (RelationKind::Scale, vec![mover_name.clone()], scale_template(mover, s)?)
        }
    };
    Ok((
        SpatialRelation {
            kind,
            mover: mover_name,
            targets: used_targets,
            params,
        },
        request,
    ))
}
