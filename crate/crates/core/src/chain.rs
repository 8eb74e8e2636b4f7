//! Representation-neutral operation chains, in execution order.

use serde::{Deserialize, Serialize};

/// Relative tolerance used when comparing operation parameters.
pub const PARAM_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Translate,
    Rotate,
    Dilate,
    /// A matrix that is neither a pure translation nor a pure rotation.
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainOp {
    Translate { v: [f64; 3] },
    /// Right-handed rotation of `angle` radians about unit `axis`.
    Rotate { axis: [f64; 3], angle: f64 },
    Dilate { factor: f64 },
    Other { matrix: [[f64; 4]; 4] },
}

fn param_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= PARAM_REL_TOL * a.abs().max(b.abs()).max(1.0)
}

fn all_close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| param_close(*x, *y))
}

impl ChainOp {
    pub fn kind(&self) -> OpKind {
        match self {
            ChainOp::Translate { .. } => OpKind::Translate,
            ChainOp::Rotate { .. } => OpKind::Rotate,
            ChainOp::Dilate { .. } => OpKind::Dilate,
            ChainOp::Other { .. } => OpKind::Other,
        }
    }

    /// Axis-angle collapsed to a rotation vector, so R(θ, e2, e1) and
    /// R(−θ, e1, e2) compare equal.
    pub fn rotation_vector(&self) -> Option<[f64; 3]> {
        match self {
            ChainOp::Rotate { axis, angle } => Some(axis.map(|c| c * angle)),
            _ => None,
        }
    }

    /// Same kind and parameters within `PARAM_REL_TOL` (relative, floored at 1).
    pub fn matches(&self, other: &ChainOp) -> bool {
        match (self, other) {
            (ChainOp::Translate { v: a }, ChainOp::Translate { v: b }) => all_close(a, b),
            (ChainOp::Rotate { .. }, ChainOp::Rotate { .. }) => {
                all_close(&self.rotation_vector().unwrap(), &other.rotation_vector().unwrap())
            }
            (ChainOp::Dilate { factor: a }, ChainOp::Dilate { factor: b }) => param_close(*a, *b),
            (ChainOp::Other { matrix: a }, ChainOp::Other { matrix: b }) => {
                all_close(a.as_flattened(), b.as_flattened())
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OperationChain {
    pub ops: Vec<ChainOp>,
}

impl OperationChain {
    pub fn new(ops: Vec<ChainOp>) -> Self {
        Self { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn kinds(&self) -> Vec<OpKind> {
        self.ops.iter().map(ChainOp::kind).collect()
    }

    /// True iff every op of `self` matches some op of `actual`, in order.
    ///
    /// Greedy leftmost matching is complete here: the match predicate depends
    /// only on the pair, so any valid embedding can be shifted to the leftmost one.
    pub fn is_subsequence_of(&self, actual: &OperationChain) -> bool {
        let mut rest = actual.ops.iter();
        self.ops
            .iter()
            .all(|want| rest.by_ref().any(|have| want.matches(have)))
    }
}

impl FromIterator<ChainOp> for OperationChain {
    fn from_iter<I: IntoIterator<Item = ChainOp>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(x: f64) -> ChainOp {
        ChainOp::Translate { v: [x, 0.0, 0.0] }
    }

    fn rz(angle: f64) -> ChainOp {
        ChainOp::Rotate {
            axis: [0.0, 0.0, 1.0],
            angle,
        }
    }

    #[test]
    fn rotation_vectors_absorb_orientation() {
        let a = ChainOp::Rotate {
            axis: [0.0, 0.0, -1.0],
            angle: 0.5,
        };
        assert!(a.matches(&rz(-0.5)));
        assert!(!a.matches(&rz(0.5)));
    }

    #[test]
    fn tolerance_is_relative_with_unit_floor() {
        assert!(t(1000.0).matches(&t(1000.0005)));
        assert!(!t(1000.0).matches(&t(1000.01)));
        assert!(t(0.0).matches(&t(5e-7)));
        assert!(!t(0.0).matches(&t(2e-6)));
        assert!(!t(1.0).matches(&ChainOp::Dilate { factor: 1.0 }));
    }

    #[test]
    fn subsequence_examples() {
        let expected = OperationChain::new(vec![t(1.0), rz(1.0)]);
        assert!(expected.is_subsequence_of(&expected));
        assert!(!expected.is_subsequence_of(&OperationChain::new(vec![rz(1.0), t(1.0)])));
        let padded = OperationChain::new(vec![t(1.0), ChainOp::Dilate { factor: 2.0 }, rz(1.0)]);
        assert!(expected.is_subsequence_of(&padded));
        assert!(!expected.is_subsequence_of(&OperationChain::new(vec![t(1.0), rz(1.1)])));
        assert!(OperationChain::default().is_subsequence_of(&padded));
    }

    #[test]
    fn serializes_with_kind_tag() {
        let chain = OperationChain::new(vec![t(2.0), ChainOp::Dilate { factor: 3.0 }]);
        let json = serde_json::to_value(&chain).unwrap();
        assert_eq!(json[0]["kind"], "translate");
        assert_eq!(json[1]["factor"], 3.0);
        let back: OperationChain = serde_json::from_value(json).unwrap();
        assert_eq!(back, chain);
    }

    // Exhaustive alignment search, independent of the greedy implementation.
    fn brute_force(expected: &[ChainOp], actual: &[ChainOp]) -> bool {
        if expected.is_empty() {
            return true;
        }
        (0..actual.len()).any(|i| expected[0].matches(&actual[i]) && brute_force(&expected[1..], &actual[i + 1..]))
    }

    fn small_op() -> impl Strategy<Value = ChainOp> {
        prop_oneof![
            (0..3i32).prop_map(|x| t(x as f64)),
            (0..3i32).prop_map(|x| rz(x as f64)),
            (1..3i32).prop_map(|x| ChainOp::Dilate { factor: x as f64 }),
        ]
    }

    proptest! {
        #[test]
        fn greedy_agrees_with_brute_force(
            e in prop::collection::vec(small_op(), 0..4),
            a in prop::collection::vec(small_op(), 0..7),
        ) {
            let (ec, ac) = (OperationChain::new(e.clone()), OperationChain::new(a.clone()));
            prop_assert_eq!(ec.is_subsequence_of(&ac), brute_force(&e, &a));
        }

        #[test]
        fn reflexive(a in prop::collection::vec(small_op(), 0..7)) {
            let c = OperationChain::new(a);
            prop_assert!(c.is_subsequence_of(&c));
        }
    }
}
