//! Small fixed-capacity vectors for 1D and 2D robot states.
//!
//! A [`Vector`] stores up to two components. One-dimensional vectors keep
//! their unused second slot at exactly `0.0`, so arithmetic between
//! vectors of the same dimension never has to branch on it.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{CbfError, Result};

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector {
    comps: [f64; 2],
    dim: usize,
}

impl Vector {
    pub const fn new1(x: f64) -> Self {
        Self { comps: [x, 0.0], dim: 1 }
    }

    pub const fn new2(x: f64, y: f64) -> Self {
        Self { comps: [x, y], dim: 2 }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        match dim {
            1 | 2 => Ok(Self { comps: [0.0; 2], dim }),
            d => Err(CbfError::UnsupportedDimension(d)),
        }
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        match *values {
            [x] => Ok(Self::new1(x)),
            [x, y] => Ok(Self::new2(x, y)),
            _ => Err(CbfError::UnsupportedDimension(values.len())),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.comps[..self.dim]
    }

    pub fn x(&self) -> f64 {
        self.comps[0]
    }

    /// Second component; `0.0` for 1D vectors.
    pub fn y(&self) -> f64 {
        self.comps[1]
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.comps[0] * other.comps[0] + self.comps[1] * other.comps[1]
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.comps[0].hypot(self.comps[1])
    }

    /// Planar determinant `self.x * other.y - self.y * other.x`.
    ///
    /// Identically zero for 1D vectors.
    pub fn cross(&self, other: &Vector) -> f64 {
        if self.dim < 2 {
            return 0.0;
        }
        self.comps[0] * other.comps[1] - self.comps[1] * other.comps[0]
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = CbfError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Vector::from_slice(&values)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.as_slice().to_vec()
    }
}

impl Add for Vector {
    type Output = Vector;

    fn add(self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.dim, rhs.dim);
        Vector { comps: [self.comps[0] + rhs.comps[0], self.comps[1] + rhs.comps[1]], dim: self.dim }
    }
}

impl AddAssign for Vector {
    fn add_assign(&mut self, rhs: Vector) {
        *self = *self + rhs;
    }
}

impl Sub for Vector {
    type Output = Vector;

    fn sub(self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.dim, rhs.dim);
        Vector { comps: [self.comps[0] - rhs.comps[0], self.comps[1] - rhs.comps[1]], dim: self.dim }
    }
}

impl Neg for Vector {
    type Output = Vector;

    fn neg(self) -> Vector {
        // `0.0 - 0.0` keeps the unused slot at +0.0 rather than -0.0.
        Vector { comps: [-self.comps[0], if self.dim == 2 { -self.comps[1] } else { 0.0 }], dim: self.dim }
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;

    fn mul(self, s: f64) -> Vector {
        Vector {
            comps: [self.comps[0] * s, if self.dim == 2 { self.comps[1] * s } else { 0.0 }],
            dim: self.dim,
        }
    }
}

impl Div<f64> for Vector {
    type Output = Vector;

    fn div(self, s: f64) -> Vector {
        Vector {
            comps: [self.comps[0] / s, if self.dim == 2 { self.comps[1] / s } else { 0.0 }],
            dim: self.dim,
        }
    }
}
