//! Pairwise distance barrier for double-integrator robots.
//!
//! The position barrier `h0 = |x_ij| - r_s` has relative degree two, so the
//! filter works with the augmented barrier
//!
//! ```text
//! h = |x_ij| + (v_ij . x_ij / |x_ij|) T_c - r_s
//! ```
//!
//! together with its Lie derivatives along the drift `f` and the input
//! field `g` of the relative dynamics `q_ij' = f(q_ij) + g (u_j - u_i)`.
//!
//! All evaluations reject pairs closer than [`SINGULAR_DISTANCE`].

use serde::{Deserialize, Serialize};

use crate::dynamics::PairState;
use crate::error::{CbfError, Result};
use crate::vector::Vector;

/// Pairs with `|x_ij|` below this are treated as overlapping.
pub const SINGULAR_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CbfParams {
    /// Safe distance.
    pub r_s: f64,
    /// Linear class-K gain.
    pub gamma: f64,
    /// Look-ahead time constant of the augmented barrier.
    pub t_c: f64,
}

impl CbfParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.r_s) && ok(self.gamma) && ok(self.t_c) {
            Ok(())
        } else {
            Err(CbfError::InvalidScenario(format!(
                "barrier parameters must be positive and finite: {self:?}"
            )))
        }
    }
}

/// Quantities shared by every barrier expression for one pair.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairGeometry {
    pub dist: f64,
    pub unit: Vector,
    /// `v_ij . x_ij / |x_ij|`
    pub radial: f64,
    /// `(y_ij vx_ij - x_ij vy_ij)^2 / |x_ij|^3`; zero in 1D.
    pub tangential: f64,
}

impl PairGeometry {
    pub fn of(q: &PairState) -> Result<Self> {
        let dist = q.x_ij.norm();
        if dist.is_nan() || dist < SINGULAR_DISTANCE {
            return Err(CbfError::SingularPair { distance: dist });
        }
        let cross = q.x_ij.cross(&q.v_ij);
        Ok(Self {
            dist,
            unit: q.x_ij / dist,
            radial: q.v_ij.dot(&q.x_ij) / dist,
            tangential: cross * cross / (dist * dist * dist),
        })
    }
}

pub fn h0(q: &PairState, p: &CbfParams) -> Result<f64> {
    Ok(PairGeometry::of(q)?.dist - p.r_s)
}

pub fn h(q: &PairState, p: &CbfParams) -> Result<f64> {
    let g = PairGeometry::of(q)?;
    Ok(g.dist + g.radial * p.t_c - p.r_s)
}

pub fn lie_f_h(q: &PairState, p: &CbfParams) -> Result<f64> {
    let g = PairGeometry::of(q)?;
    Ok(g.radial + g.tangential * p.t_c)
}

/// Row vector multiplying `u_j - u_i`; its norm is always `T_c / m`.
pub fn lie_g_h(q: &PairState, p: &CbfParams, m: f64) -> Result<Vector> {
    let g = PairGeometry::of(q)?;
    Ok(g.unit * (p.t_c / m))
}

/// `L_f h + gamma h`.
///
/// Under the symmetric split a robot squeezed between two mirrored
/// neighbours has a non-empty input interval iff this is non-negative.
pub fn symmetric_margin(q: &PairState, p: &CbfParams) -> Result<f64> {
    let g = PairGeometry::of(q)?;
    Ok(g.radial + g.tangential * p.t_c + p.gamma * (g.dist + g.radial * p.t_c - p.r_s))
}

/// Analytic lower envelope of [`symmetric_margin`] for 1D pairs that keep
/// `h >= 0` and `h2 >= 0`: `max(r, r gamma T_c)` with `r` the radial speed.
pub fn margin_lower_bound(q: &PairState, p: &CbfParams) -> Result<f64> {
    let r = PairGeometry::of(q)?.radial;
    Ok(r.max(r * p.gamma * p.t_c))
}

/// `h2 = gamma T_c (|x| - r_s) + r T_c`, a secondary barrier that stays
/// non-negative whenever `h' + gamma h >= 0` holds along the trajectory.
pub fn h2_diag(q: &PairState, p: &CbfParams) -> Result<f64> {
    let g = PairGeometry::of(q)?;
    Ok(p.gamma * p.t_c * (g.dist - p.r_s) + g.radial * p.t_c)
}
