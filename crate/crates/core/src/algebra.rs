//! Dense multivectors over Cl(4,1).
//!
//! A [`Multivector`] stores all 32 basis-blade coefficients. Slot `b` holds the
//! coefficient of the blade whose basis vectors are the set bits of `b`
//! (bit `i` set means `e(i+1)` is present), written in ascending index order.
//! So slot `0b00011` is `e1∧e2 = e12` and slot `0b11000` is `e45`.
//!
//! Products of blades are computed by merging bitmasks: the sign is the parity
//! of the number of transpositions needed to sort the concatenated vectors
//! (a bubble count), times the metric factor of every vector shared by both
//! blades.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

/// Number of basis vectors.
pub const DIM: usize = 5;
/// Number of basis blades, `2^DIM`.
pub const BLADES: usize = 1 << DIM;

/// Metric signature `(+,+,+,+,−)`: `e1..e4` square to `+1`, `e5` to `−1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signature {
    pub metric: [f64; DIM],
}

pub const SIGNATURE: Signature = Signature {
    metric: [1.0, 1.0, 1.0, 1.0, -1.0],
};

impl Signature {
    /// Sign and result slot of the product of basis blades `a` and `b`.
    #[inline]
    pub fn blade_product(&self, a: usize, b: usize) -> (f64, usize) {
        let mut swaps = 0u32;
        let mut rest = a >> 1;
        while rest != 0 {
            swaps += (rest & b).count_ones();
            rest >>= 1;
        }
        let mut sign = if swaps.is_multiple_of(2) { 1.0 } else { -1.0 };
        let shared = a & b;
        for (i, m) in self.metric.iter().enumerate() {
            if shared & (1 << i) != 0 {
                sign *= m;
            }
        }
        (sign, a ^ b)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("grade {0} out of range 0..=5")]
    GradeOutOfRange(usize),
    #[error("expected a pure grade-1 vector, found components of grade {0}")]
    NotAVector(usize),
    #[error("basis index {0} out of range 1..=5")]
    BasisOutOfRange(usize),
}

/// Grade of the blade stored at slot `blade`.
#[inline]
pub fn grade_of(blade: usize) -> usize {
    blade.count_ones() as usize
}

/// A general element of Cl(4,1).
#[derive(Clone, Copy, PartialEq)]
pub struct Multivector {
    pub coefficients: [f64; BLADES],
}

impl Default for Multivector {
    fn default() -> Self {
        Self::zero()
    }
}

impl Multivector {
    pub const fn zero() -> Self {
        Self {
            coefficients: [0.0; BLADES],
        }
    }

    pub fn scalar(s: f64) -> Self {
        let mut m = Self::zero();
        m.coefficients[0] = s;
        m
    }

    pub fn one() -> Self {
        Self::scalar(1.0)
    }

    /// Basis vector `e(index)` for `index` in `1..=5`.
    pub fn basis(index: usize) -> Result<Self, AlgebraError> {
        if !(1..=DIM).contains(&index) {
            return Err(AlgebraError::BasisOutOfRange(index));
        }
        Ok(Self::blade(1 << (index - 1), 1.0))
    }

    /// A single blade with the given slot and coefficient.
    pub fn blade(slot: usize, value: f64) -> Self {
        let mut m = Self::zero();
        m.coefficients[slot] = value;
        m
    }

    pub fn e1() -> Self {
        Self::blade(0b00001, 1.0)
    }
    pub fn e2() -> Self {
        Self::blade(0b00010, 1.0)
    }
    pub fn e3() -> Self {
        Self::blade(0b00100, 1.0)
    }
    pub fn e4() -> Self {
        Self::blade(0b01000, 1.0)
    }
    pub fn e5() -> Self {
        Self::blade(0b10000, 1.0)
    }

    /// Grade-1 element `x e1 + y e2 + z e3`.
    pub fn euclidean_vector(x: f64, y: f64, z: f64) -> Self {
        let mut m = Self::zero();
        m.coefficients[0b001] = x;
        m.coefficients[0b010] = y;
        m.coefficients[0b100] = z;
        m
    }

    pub fn scalar_part(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn get(&self, slot: usize) -> f64 {
        self.coefficients[slot]
    }

    pub fn is_finite(&self) -> bool {
        self.coefficients.iter().all(|c| c.is_finite())
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coefficients
            .iter()
            .zip(other.coefficients.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for c in out.coefficients.iter_mut() {
            *c *= s;
        }
        out
    }

    /// Grades that carry a nonzero coefficient, ascending.
    pub fn grades_present(&self) -> Vec<usize> {
        let mut present = [false; DIM + 1];
        for (slot, c) in self.coefficients.iter().enumerate() {
            if *c != 0.0 {
                present[grade_of(slot)] = true;
            }
        }
        (0..=DIM).filter(|g| present[*g]).collect()
    }

    pub fn geometric_product(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in self.coefficients.iter().enumerate() {
            if *ca == 0.0 {
                continue;
            }
            for (b, cb) in other.coefficients.iter().enumerate() {
                if *cb == 0.0 {
                    continue;
                }
                let (sign, slot) = SIGNATURE.blade_product(a, b);
                out.coefficients[slot] += sign * ca * cb;
            }
        }
        out
    }

    /// Outer (wedge) product: for each pair of blades of grades r and s keep
    /// only the grade r+s part of their geometric product.
    pub fn outer_product(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in self.coefficients.iter().enumerate() {
            if *ca == 0.0 {
                continue;
            }
            for (b, cb) in other.coefficients.iter().enumerate() {
                if *cb == 0.0 || a & b != 0 {
                    continue;
                }
                let (sign, slot) = SIGNATURE.blade_product(a, b);
                out.coefficients[slot] += sign * ca * cb;
            }
        }
        out
    }

    /// Reversion: grade-k part scaled by `(−1)^(k(k−1)/2)`.
    pub fn reverse(&self) -> Self {
        let mut out = *self;
        for (slot, c) in out.coefficients.iter_mut().enumerate() {
            let k = grade_of(slot);
            if (k * k.saturating_sub(1) / 2) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }

    pub fn grade_project(&self, k: usize) -> Result<Self, AlgebraError> {
        if k > DIM {
            return Err(AlgebraError::GradeOutOfRange(k));
        }
        let mut out = Self::zero();
        for (slot, c) in self.coefficients.iter().enumerate() {
            if grade_of(slot) == k {
                out.coefficients[slot] = *c;
            }
        }
        Ok(out)
    }

    /// Even-grade part (grades 0, 2, 4).
    pub fn even_part(&self) -> Self {
        let mut out = *self;
        for (slot, c) in out.coefficients.iter_mut().enumerate() {
            if grade_of(slot) % 2 == 1 {
                *c = 0.0;
            }
        }
        out
    }

    /// Metric inner product of two grade-1 vectors.
    pub fn vector_dot(&self, other: &Self) -> Result<f64, AlgebraError> {
        self.ensure_vector()?;
        other.ensure_vector()?;
        Ok(self.geometric_product(other).scalar_part())
    }

    fn ensure_vector(&self) -> Result<(), AlgebraError> {
        for (slot, c) in self.coefficients.iter().enumerate() {
            let g = grade_of(slot);
            if g != 1 && *c != 0.0 {
                return Err(AlgebraError::NotAVector(g));
            }
        }
        Ok(())
    }
}

pub fn geometric_product(a: &Multivector, b: &Multivector) -> Multivector {
    a.geometric_product(b)
}

pub fn outer_product(a: &Multivector, b: &Multivector) -> Multivector {
    a.outer_product(b)
}

pub fn reverse(a: &Multivector) -> Multivector {
    a.reverse()
}

pub fn grade_project(a: &Multivector, k: usize) -> Result<Multivector, AlgebraError> {
    a.grade_project(k)
}

pub fn vector_dot(a: &Multivector, b: &Multivector) -> Result<f64, AlgebraError> {
    a.vector_dot(b)
}

/// Name of the blade at `slot`, e.g. `"e12"` or `"1"`.
pub fn blade_name(slot: usize) -> String {
    if slot == 0 {
        return "1".to_string();
    }
    let mut name = String::from("e");
    for i in 0..DIM {
        if slot & (1 << i) != 0 {
            name.push(char::from(b'1' + i as u8));
        }
    }
    name
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multivector({})", self)
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        // grade-major order reads more naturally than raw slot order
        let mut slots: Vec<usize> = (0..BLADES).collect();
        slots.sort_by_key(|s| (grade_of(*s), *s));
        for slot in slots {
            let c = self.coefficients[slot];
            if c == 0.0 {
                continue;
            }
            if first {
                write!(f, "{}", if slot == 0 { format!("{c}") } else { format!("{c}*{}", blade_name(slot)) })?;
                first = false;
            } else {
                let sign = if c < 0.0 { '-' } else { '+' };
                if slot == 0 {
                    write!(f, " {sign} {}", c.abs())?;
                } else {
                    write!(f, " {sign} {}*{}", c.abs(), blade_name(slot))?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for Multivector {
    type Output = Multivector;
    fn add(mut self, rhs: Multivector) -> Multivector {
        self += rhs;
        self
    }
}

impl AddAssign for Multivector {
    fn add_assign(&mut self, rhs: Multivector) {
        for (a, b) in self.coefficients.iter_mut().zip(rhs.coefficients.iter()) {
            *a += b;
        }
    }
}

impl Sub for Multivector {
    type Output = Multivector;
    fn sub(mut self, rhs: Multivector) -> Multivector {
        for (a, b) in self.coefficients.iter_mut().zip(rhs.coefficients.iter()) {
            *a -= b;
        }
        self
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Mul for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: Multivector) -> Multivector {
        self.geometric_product(&rhs)
    }
}

impl Mul<&Multivector> for &Multivector {
    type Output = Multivector;
    fn mul(self, rhs: &Multivector) -> Multivector {
        self.geometric_product(rhs)
    }
}

impl Mul<f64> for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: f64) -> Multivector {
        self.scale(rhs)
    }
}

impl Mul<Multivector> for f64 {
    type Output = Multivector;
    fn mul(self, rhs: Multivector) -> Multivector {
        rhs.scale(self)
    }
}
