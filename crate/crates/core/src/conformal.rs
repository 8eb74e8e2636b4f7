//! Conformal model of Euclidean 3-space inside Cl(4,1).
//!
//! Points embed as null vectors `P = no + x + ½|x|² ni` with the null basis
//! `no = ½(e5 − e4)` and `ni = e4 + e5`. Motors act by the sandwich
//! `P' = M P M̃`; in a product `T * R * D` the rightmost factor acts first.

use thiserror::Error;

use crate::algebra::{AlgebraError, Multivector};

/// Threshold on `|P · ni|` below which a point cannot be projected down.
pub const DEGENERATE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConformalError {
    #[error("point has vanishing ni-component (|P·ni| = {0:e}); cannot project down")]
    DegeneratePoint(f64),
    #[error("rotation plane is degenerate: u ∧ v vanishes")]
    DegeneratePlane,
    #[error("dilation factor must be positive and finite, got {0}")]
    InvalidDilation(f64),
    #[error("non-finite parameter {0}")]
    NonFinite(f64),
    #[error("cannot compose an empty motor list")]
    EmptyComposition,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Origin null vector `no = ½(e5 − e4)`.
pub fn no() -> Multivector {
    (Multivector::e5() - Multivector::e4()).scale(0.5)
}

/// Point at infinity `ni = e4 + e5`.
pub fn ni() -> Multivector {
    Multivector::e4() + Multivector::e5()
}

pub fn null_basis() -> (Multivector, Multivector) {
    (no(), ni())
}

/// A grade-1 conformal point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalPoint {
    pub value: Multivector,
}

impl ConformalPoint {
    pub fn from_multivector(value: Multivector) -> Self {
        Self { value }
    }

    pub fn down(&self) -> Result<[f64; 3], ConformalError> {
        down(self)
    }
}

pub fn up(x: f64, y: f64, z: f64) -> ConformalPoint {
    let sq = x * x + y * y + z * z;
    let value = no() + Multivector::euclidean_vector(x, y, z) + ni().scale(0.5 * sq);
    ConformalPoint { value }
}

pub fn up_array(p: [f64; 3]) -> ConformalPoint {
    up(p[0], p[1], p[2])
}

/// Euclidean coordinates `x_i = (P·e_i) / (−P·ni)`.
///
/// For a null `P = w(no + x + ½|x|² ni)` the weight `w = −P·ni = p5 − p4` is a
/// difference of two coefficients of size `w|x|²/2`, which cancels badly far
/// from the origin. There the equivalent `w = |x_E|² / (p4 + p5)` is used
/// instead; non-null inputs always take the direct form.
pub fn down(point: &ConformalPoint) -> Result<[f64; 3], ConformalError> {
    let p = point.value;
    let euclid = [
        p.vector_dot(&Multivector::e1())?,
        p.vector_dot(&Multivector::e2())?,
        p.vector_dot(&Multivector::e3())?,
    ];
    let direct = -p.vector_dot(&ni())?;
    let (p4, p5) = (p.get(0b01000), p.get(0b10000));
    let sum = p4 + p5;
    let euclid_sq: f64 = euclid.iter().map(|c| c * c).sum();
    let null_residual = (euclid_sq - direct * sum).abs();
    // rounding in `direct` is about ε(|p4| + |p5|), so the nullness test has
    // to tolerate that much residual
    let is_null = null_residual <= 1e-9 * (euclid_sq + sum.abs() * (p4.abs() + p5.abs()));
    let weight = if is_null && sum.abs() > direct.abs() {
        euclid_sq / sum
    } else {
        direct
    };
    if weight.abs() < DEGENERATE_EPS || !weight.is_finite() {
        return Err(ConformalError::DegeneratePoint(weight.abs()));
    }
    Ok(euclid.map(|c| c / weight))
}

/// Diagnostic label for how a motor was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotorKind {
    Translator,
    Rotor,
    Dilator,
    Composite,
}

/// An even-grade versor applied by sandwich product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motor {
    pub value: Multivector,
    pub kind_hint: MotorKind,
}

impl Motor {
    pub fn identity() -> Self {
        Self {
            value: Multivector::one(),
            kind_hint: MotorKind::Composite,
        }
    }

    pub fn reverse(&self) -> Multivector {
        self.value.reverse()
    }

    /// `M M̃`, a positive scalar for every well-formed motor.
    pub fn norm_squared(&self) -> Multivector {
        self.value * self.value.reverse()
    }

    pub fn then(&self, next: &Motor) -> Motor {
        // `next` applies after `self`, so it stands on the left
        Motor {
            value: next.value * self.value,
            kind_hint: MotorKind::Composite,
        }
    }

    pub fn apply(&self, point: &ConformalPoint) -> ConformalPoint {
        apply(self, point)
    }

    /// Apply to a Euclidean point and project back down.
    pub fn apply_to(&self, p: [f64; 3]) -> Result<[f64; 3], ConformalError> {
        down(&apply(self, &up_array(p)))
    }
}

fn check_finite(values: &[f64]) -> Result<(), ConformalError> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(ConformalError::NonFinite(*v)),
        None => Ok(()),
    }
}

/// `T(t) = 1 − ½ t ni`.
pub fn translator(tx: f64, ty: f64, tz: f64) -> Result<Motor, ConformalError> {
    check_finite(&[tx, ty, tz])?;
    let t = Multivector::euclidean_vector(tx, ty, tz);
    let value = Multivector::one() - (t * ni()).scale(0.5);
    Ok(Motor {
        value,
        kind_hint: MotorKind::Translator,
    })
}

/// `R(θ, u, v) = cos(θ/2) − sin(θ/2) B` with `B = u∧v` scaled to unit size.
///
/// Rotates `u` towards `v` by `angle_rad`. Any two independent grade-1
/// vectors are accepted; the plane bivector is normalised first.
pub fn rotor(angle_rad: f64, u: &Multivector, v: &Multivector) -> Result<Motor, ConformalError> {
    check_finite(&[angle_rad])?;
    for g in u.grades_present().into_iter().chain(v.grades_present()) {
        if g != 1 {
            return Err(AlgebraError::NotAVector(g).into());
        }
    }
    let plane = u.outer_product(v);
    let magnitude = (plane * plane.reverse()).scalar_part().abs().sqrt();
    if magnitude < DEGENERATE_EPS || !magnitude.is_finite() {
        return Err(ConformalError::DegeneratePlane);
    }
    let unit = plane.scale(1.0 / magnitude);
    let half = angle_rad / 2.0;
    let value = Multivector::scalar(half.cos()) - unit.scale(half.sin());
    Ok(Motor {
        value,
        kind_hint: MotorKind::Rotor,
    })
}

/// `D(s) = cosh(ln s / 2) + sinh(ln s / 2)(no ∧ ni)`, scaling about the origin.
pub fn dilator(s: f64) -> Result<Motor, ConformalError> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(ConformalError::InvalidDilation(s));
    }
    let half = s.ln() / 2.0;
    let e = no().outer_product(&ni());
    let value = Multivector::scalar(half.cosh()) + e.scale(half.sinh());
    Ok(Motor {
        value,
        kind_hint: MotorKind::Dilator,
    })
}

/// Sandwich product `M P M̃`, keeping the grade-1 part.
pub fn apply(motor: &Motor, point: &ConformalPoint) -> ConformalPoint {
    let out = motor.value * point.value * motor.value.reverse();
    ConformalPoint {
        value: out.grade_project(1).expect("grade 1 is in range"),
    }
}

/// Left-fold geometric product: `compose([A, B, C]) = A·B·C`, so `C` acts first.
pub fn compose(motors: &[Motor]) -> Result<Motor, ConformalError> {
    let (first, rest) = motors.split_first().ok_or(ConformalError::EmptyComposition)?;
    if rest.is_empty() {
        return Ok(*first);
    }
    let value = rest.iter().fold(first.value, |acc, m| acc * m.value);
    Ok(Motor {
        value,
        kind_hint: MotorKind::Composite,
    })
}

/// Rotor about a coordinate plane given as 1-based basis indices.
pub fn plane_rotor(angle_rad: f64, i: usize, j: usize) -> Result<Motor, ConformalError> {
    rotor(angle_rad, &Multivector::basis(i)?, &Multivector::basis(j)?)
}

/// Axis (unit, right-handed) of the rotation carried by the plane `(e_i, e_j)`
/// for Euclidean basis indices; rotating `e_i` towards `e_j` is a positive
/// rotation about this axis.
pub fn plane_axis(i: usize, j: usize) -> Option<[f64; 3]> {
    let ei = unit_axis(i)?;
    let ej = unit_axis(j)?;
    let n = [
        ei[1] * ej[2] - ei[2] * ej[1],
        ei[2] * ej[0] - ei[0] * ej[2],
        ei[0] * ej[1] - ei[1] * ej[0],
    ];
    if n.iter().all(|c| *c == 0.0) {
        None
    } else {
        Some(n)
    }
}

fn unit_axis(i: usize) -> Option<[f64; 3]> {
    match i {
        1 => Some([1.0, 0.0, 0.0]),
        2 => Some([0.0, 1.0, 0.0]),
        3 => Some([0.0, 0.0, 1.0]),
        _ => None,
    }
}
