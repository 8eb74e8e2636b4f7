//! Scene state: named primitives with a center and a half-extent size.
//!
//! Scenes are immutable snapshots. Every mutation returns a new [`Scene`]
//! with `revision + 1`, so callers can keep before/after pairs around.
//!
//! Axis convention: e1 = X (right), e2 = Y (up), e3 = Z (towards the viewer).

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformal::{self, ConformalError, Motor};

/// Default five-object scene. RedSphere, BlueCube and GreenSphere carry the
/// published coordinates; YellowCube and PurpleSphere are placeholder
/// defaults chosen to sit clear of the others.
const DEFAULT_SCENE_JSON: &str = include_str!("../fixtures/default_scene.json");

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("unknown object '{0}'")]
    UnknownObject(String),
    #[error("duplicate object name '{0}'")]
    DuplicateName(String),
    #[error("object name must be nonempty")]
    EmptyName,
    #[error("object '{name}' has invalid size {size}; sizes must be positive and finite")]
    InvalidSize { name: String, size: f64 },
    #[error("object '{name}' has a non-finite center")]
    NonFiniteCenter { name: String },
    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error("scene document: {0}")]
    Document(#[from] serde_json::Error),
    #[error("reading scene file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    Cube,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Sphere => write!(f, "sphere"),
            Shape::Cube => write!(f, "cube"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub name: String,
    pub shape: Shape,
    pub color: String,
    pub center: [f64; 3],
    /// Half-extent radius in world units.
    pub size: f64,
}

impl SceneObject {
    pub fn new(name: impl Into<String>, shape: Shape, color: impl Into<String>, center: [f64; 3], size: f64) -> Self {
        Self {
            name: name.into(),
            shape,
            color: color.into(),
            center,
            size,
        }
    }

    pub fn aabb(&self) -> Aabb {
        aabb(self)
    }

    fn validate(&self) -> Result<(), SceneError> {
        if self.name.is_empty() {
            return Err(SceneError::EmptyName);
        }
        if !(self.size > 0.0) || !self.size.is_finite() {
            return Err(SceneError::InvalidSize {
                name: self.name.clone(),
                size: self.size,
            });
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(SceneError::NonFiniteCenter {
                name: self.name.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

pub fn aabb(obj: &SceneObject) -> Aabb {
    Aabb {
        min: obj.center.map(|c| c - obj.size),
        max: obj.center.map(|c| c + obj.size),
    }
}

/// Wire shape of a scene: `{revision, objects: [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    pub revision: u64,
    pub objects: Vec<SceneObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SceneDocument", into = "SceneDocument")]
pub struct Scene {
    objects: IndexMap<String, SceneObject>,
    revision: u64,
}

impl TryFrom<SceneDocument> for Scene {
    type Error = SceneError;

    fn try_from(doc: SceneDocument) -> Result<Self, Self::Error> {
        let mut scene = Scene::new(doc.objects)?;
        scene.revision = doc.revision;
        Ok(scene)
    }
}

impl From<Scene> for SceneDocument {
    fn from(scene: Scene) -> Self {
        scene.to_document()
    }
}

impl Scene {
    pub fn new(objects: impl IntoIterator<Item = SceneObject>) -> Result<Self, SceneError> {
        let mut map = IndexMap::new();
        for obj in objects {
            obj.validate()?;
            if map.contains_key(&obj.name) {
                return Err(SceneError::DuplicateName(obj.name));
            }
            map.insert(obj.name.clone(), obj);
        }
        Ok(Self {
            objects: map,
            revision: 0,
        })
    }

    pub fn empty() -> Self {
        Self {
            objects: IndexMap::new(),
            revision: 0,
        }
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&SceneObject> {
        self.objects.get(name)
    }

    pub fn object(&self, name: &str) -> Result<&SceneObject, SceneError> {
        self.objects
            .get(name)
            .ok_or_else(|| SceneError::UnknownObject(name.to_string()))
    }

    pub fn objects(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(String::as_str)
    }

    pub fn centers(&self) -> HashMap<String, [f64; 3]> {
        self.objects
            .values()
            .map(|o| (o.name.clone(), o.center))
            .collect()
    }

    pub fn to_document(&self) -> SceneDocument {
        SceneDocument {
            revision: self.revision,
            objects: self.objects.values().cloned().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("scene documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, SceneError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Copy-forward edit of one object.
    fn with_object(&self, name: &str, edit: impl FnOnce(&mut SceneObject)) -> Result<Scene, SceneError> {
        let mut next = self.clone();
        let obj = next
            .objects
            .get_mut(name)
            .ok_or_else(|| SceneError::UnknownObject(name.to_string()))?;
        edit(obj);
        obj.validate()?;
        next.revision += 1;
        Ok(next)
    }

    /// Moves the object's center through `down(M · up(center) · M̃)`; size is kept.
    pub fn apply_motor_to_object(&self, name: &str, motor: &Motor) -> Result<Scene, SceneError> {
        let center = self.object(name)?.center;
        let moved = motor.apply_to(center)?;
        self.with_object(name, |o| o.center = moved)
    }

    /// Object-centric uniform scale: `size *= s`, center fixed.
    pub fn scale_object(&self, name: &str, s: f64) -> Result<Scene, SceneError> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(SceneError::InvalidScale(s));
        }
        self.object(name)?;
        self.with_object(name, |o| o.size *= s)
    }

    pub fn set_center(&self, name: &str, center: [f64; 3]) -> Result<Scene, SceneError> {
        self.with_object(name, |o| o.center = center)
    }

    /// Same objects, revision bumped, for no-op edits that still count as a step.
    pub fn touched(&self) -> Scene {
        let mut next = self.clone();
        next.revision += 1;
        next
    }

    pub fn with_revision(mut self, revision: u64) -> Scene {
        self.revision = revision;
        self
    }
}

pub fn default_scene() -> Scene {
    Scene::from_json(DEFAULT_SCENE_JSON).expect("bundled default scene is valid")
}

/// Free function form of [`Scene::apply_motor_to_object`].
pub fn apply_motor_to_object(scene: &Scene, name: &str, motor: &Motor) -> Result<Scene, SceneError> {
    scene.apply_motor_to_object(name, motor)
}

pub fn scale_object(scene: &Scene, name: &str, s: f64) -> Result<Scene, SceneError> {
    scene.scale_object(name, s)
}

const GENERATED_COLORS: [&str; 12] = [
    "orange", "teal", "pink", "cyan", "magenta", "brown", "lime", "navy", "olive", "maroon", "gold", "silver",
];

/// Large scene for context-scaling runs: the default five objects followed by
/// `count - 5` seeded random primitives (positions uniform in [−20,20]³, sizes
/// in [0.5,1.5]) named `<Color><Shape><index>`.
pub fn generate_large_scene(count: usize, seed: u64) -> Scene {
    let base = default_scene();
    let mut objects: Vec<SceneObject> = base.objects().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut index = 0usize;
    while objects.len() < count {
        index += 1;
        let color = GENERATED_COLORS[rng.gen_range(0..GENERATED_COLORS.len())];
        let shape = if rng.gen_bool(0.5) { Shape::Sphere } else { Shape::Cube };
        let center = [
            rng.gen_range(-20.0..=20.0),
            rng.gen_range(-20.0..=20.0),
            rng.gen_range(-20.0..=20.0),
        ];
        let size = rng.gen_range(0.5..=1.5);
        let name = format!("{}{}{:02}", capitalize(color), capitalize(&shape.to_string()), index);
        objects.push(SceneObject::new(name, shape, color, center, size));
    }
    Scene::new(objects).expect("generated names are unique")
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Triangle mesh in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

/// Sphere: icosahedron subdivided once (42 vertices, 80 faces).
/// Cube: 8 corners, 12 triangles.
pub fn make_mesh(obj: &SceneObject) -> Mesh {
    let (unit_vertices, faces) = match obj.shape {
        Shape::Sphere => icosphere(),
        Shape::Cube => unit_cube(),
    };
    let vertices = unit_vertices
        .into_iter()
        .map(|v| {
            [
                obj.center[0] + obj.size * v[0],
                obj.center[1] + obj.size * v[1],
                obj.center[2] + obj.size * v[2],
            ]
        })
        .collect();
    Mesh { vertices, faces }
}

fn unit_cube() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let mut vertices = Vec::with_capacity(8);
    for i in 0..8 {
        let pick = |bit: usize| if i & bit != 0 { 1.0 } else { -1.0 };
        vertices.push([pick(1), pick(2), pick(4)]);
    }
    let faces = vec![
        [0, 2, 1], [1, 2, 3], // z = -1
        [4, 5, 6], [5, 7, 6], // z = +1
        [0, 1, 4], [1, 5, 4], // y = -1
        [2, 6, 3], [3, 6, 7], // y = +1
        [0, 4, 2], [2, 4, 6], // x = -1
        [1, 3, 5], [3, 7, 5], // x = +1
    ];
    (vertices, faces)
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|c| c / n)
}

fn icosphere() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<[f64; 3]> = [
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize)
    .collect();
    let base: [[usize; 3]; 20] = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let (va, vb) = (vertices[a], vertices[b]);
            vertices.push(normalize([(va[0] + vb[0]) / 2.0, (va[1] + vb[1]) / 2.0, (va[2] + vb[2]) / 2.0]));
            vertices.len() - 1
        })
    };
    let mut faces = Vec::with_capacity(80);
    for [a, b, c] in base {
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        faces.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    (vertices, faces)
}

/// Translate an object's center by a Euclidean displacement via a translator motor.
pub fn translate_object(scene: &Scene, name: &str, delta: [f64; 3]) -> Result<Scene, SceneError> {
    let motor = conformal::translator(delta[0], delta[1], delta[2])?;
    scene.apply_motor_to_object(name, &motor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn default_scene_matches_published_objects() {
        let scene = default_scene();
        assert_eq!(scene.len(), 5);
        let red = scene.get("RedSphere").unwrap();
        assert_eq!((red.center, red.size, red.shape), ([0.0, 0.0, 0.0], 1.0, Shape::Sphere));
        let blue = scene.get("BlueCube").unwrap();
        assert_eq!((blue.center, blue.size, blue.shape), ([4.0, 0.0, 0.0], 1.0, Shape::Cube));
        let green = scene.get("GreenSphere").unwrap();
        assert_eq!((green.center, green.size), ([-3.0, 0.0, 2.0], 0.7));
        assert_eq!(default_scene(), scene);
    }

    #[test]
    fn bounding_boxes() {
        let scene = default_scene();
        let blue = scene.get("BlueCube").unwrap().aabb();
        assert_eq!(blue.min, [3.0, -1.0, -1.0]);
        assert_eq!(blue.max, [5.0, 1.0, 1.0]);
        let green = scene.get("GreenSphere").unwrap().aabb();
        assert!(close(green.min, [-3.7, -0.7, 1.3], 1e-12));
    }

    #[test]
    fn motor_moves_center_only() {
        let scene = default_scene();
        let t = conformal::translator(2.0, 0.0, 0.0).unwrap();
        let next = scene.apply_motor_to_object("RedSphere", &t).unwrap();
        let red = next.get("RedSphere").unwrap();
        assert!(close(red.center, [2.0, 0.0, 0.0], 1e-9));
        assert_eq!(red.size, 1.0);
        assert_eq!(next.revision(), scene.revision() + 1);

        let t = conformal::translator(7.0, 1.7, -2.0).unwrap();
        let next = scene.apply_motor_to_object("GreenSphere", &t).unwrap();
        assert!(close(next.get("GreenSphere").unwrap().center, [4.0, 1.7, 0.0], 1e-9));
    }

    #[test]
    fn identity_motor_only_bumps_revision() {
        let scene = default_scene();
        let next = scene.apply_motor_to_object("BlueCube", &Motor::identity()).unwrap();
        assert_eq!(next.revision(), 1);
        assert_eq!(next.with_revision(0), scene);
    }

    #[test]
    fn unknown_object_is_rejected() {
        let scene = default_scene();
        assert!(matches!(
            scene.apply_motor_to_object("Teapot", &Motor::identity()),
            Err(SceneError::UnknownObject(_))
        ));
        assert!(matches!(scene.scale_object("Teapot", 2.0), Err(SceneError::UnknownObject(_))));
    }

    #[test]
    fn scaling_keeps_center() {
        let scene = default_scene();
        let next = scene.scale_object("RedSphere", 3.0).unwrap();
        let red = next.get("RedSphere").unwrap();
        assert_eq!((red.size, red.center), (3.0, [0.0, 0.0, 0.0]));
        let same = scene.scale_object("RedSphere", 1.0).unwrap();
        assert_eq!(same.with_revision(0), scene);
        let twice = scene.scale_object("BlueCube", 0.5).unwrap().scale_object("BlueCube", 0.5).unwrap();
        assert_eq!(twice.get("BlueCube").unwrap().size, 0.25);
        assert!(matches!(scene.scale_object("RedSphere", 0.0), Err(SceneError::InvalidScale(_))));
        assert!(matches!(scene.scale_object("RedSphere", -1.0), Err(SceneError::InvalidScale(_))));
    }

    #[test]
    fn meshes_have_expected_topology() {
        let scene = default_scene();
        let sphere = make_mesh(scene.get("GreenSphere").unwrap());
        assert_eq!((sphere.vertices.len(), sphere.faces.len()), (42, 80));
        for v in &sphere.vertices {
            let r = ((v[0] + 3.0).powi(2) + v[1].powi(2) + (v[2] - 2.0).powi(2)).sqrt();
            assert!((r - 0.7).abs() < 1e-12);
        }
        let cube = make_mesh(scene.get("BlueCube").unwrap());
        assert_eq!((cube.vertices.len(), cube.faces.len()), (8, 12));
        for v in &cube.vertices {
            let cheb = (v[0] - 4.0).abs().max(v[1].abs()).max(v[2].abs());
            assert!((cheb - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cube_faces_point_outward() {
        let (v, faces) = unit_cube();
        for f in faces {
            let (a, b, c) = (v[f[0]], v[f[1]], v[f[2]]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
            let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0, (a[2] + b[2] + c[2]) / 3.0];
            assert!(n[0] * centroid[0] + n[1] * centroid[1] + n[2] * centroid[2] > 0.0, "{f:?}");
        }
    }

    #[test]
    fn document_shape_and_validation() {
        let scene = default_scene();
        let value: serde_json::Value = serde_json::from_str(&scene.to_json()).unwrap();
        assert_eq!(value["revision"], 0);
        assert_eq!(value["objects"][1]["name"], "BlueCube");
        assert_eq!(value["objects"][1]["center"], serde_json::json!([4.0, 0.0, 0.0]));
        assert_eq!(value["objects"][1]["shape"], "cube");
        assert_eq!(Scene::from_json(&scene.to_json()).unwrap(), scene);

        let dup = r#"{"revision":0,"objects":[
            {"name":"A","shape":"cube","color":"red","center":[0,0,0],"size":1},
            {"name":"A","shape":"cube","color":"red","center":[1,0,0],"size":1}]}"#;
        assert!(Scene::from_json(dup).is_err());
        let bad_size = r#"{"revision":0,"objects":[{"name":"A","shape":"cube","color":"red","center":[0,0,0],"size":0}]}"#;
        assert!(Scene::from_json(bad_size).is_err());
    }

    #[test]
    fn large_scene_is_seeded() {
        let a = generate_large_scene(100, 7);
        let b = generate_large_scene(100, 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert_ne!(a, generate_large_scene(100, 8));
        assert!(a.get("RedSphere").is_some());
        for o in a.objects().skip(5) {
            assert!(o.center.iter().all(|c| (-20.0..=20.0).contains(c)));
            assert!((0.5..=1.5).contains(&o.size));
        }
    }

    proptest! {
        #[test]
        fn translation_moves_by_displacement(d in prop::array::uniform3(-30f64..30.0)) {
            let scene = default_scene();
            let before = scene.get("GreenSphere").unwrap().center;
            let after = translate_object(&scene, "GreenSphere", d).unwrap();
            let c = after.get("GreenSphere").unwrap().center;
            prop_assert!(close(c, [before[0] + d[0], before[1] + d[1], before[2] + d[2]], 1e-9));
        }

        #[test]
        fn aabb_contains_center(c in prop::array::uniform3(-100f64..100.0), size in 0.01f64..10.0) {
            let o = SceneObject::new("X", Shape::Cube, "red", c, size);
            let b = o.aabb();
            for i in 0..3 {
                prop_assert!(b.min[i] <= c[i] && c[i] <= b.max[i]);
            }
        }

        #[test]
        fn mesh_counts_ignore_placement(c in prop::array::uniform3(-100f64..100.0), size in 0.01f64..10.0) {
            let s = make_mesh(&SceneObject::new("S", Shape::Sphere, "red", c, size));
            let k = make_mesh(&SceneObject::new("K", Shape::Cube, "red", c, size));
            prop_assert_eq!((s.vertices.len(), s.faces.len(), k.vertices.len(), k.faces.len()), (42, 80, 8, 12));
        }
    }
}
