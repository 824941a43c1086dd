//! Splitting the pairwise barrier condition into one linear input
//! constraint per robot.
//!
//! The pairwise condition
//!
//! ```text
//! L_f h + L_g h (u_j - u_i) + gamma h >= 0
//! ```
//!
//! couples both robots' inputs. Each robot instead enforces
//!
//! ```text
//! w1_ij L_f h - 2 L_g h u_i + w2_ij gamma h >= 0
//! ```
//!
//! and whenever `w1_ij + w1_ji = 2` and `w2_ij + w2_ji = 2` the two halves
//! add back up to twice the pairwise condition.
//!
//! Three weightings are provided:
//!
//! * [`StrategyKind::Symmetric`]: all weights one.
//! * [`StrategyKind::PreviousAsymmetric`]: `w1 = 1` and a speed-ratio `w2`.
//! * [`StrategyKind::ProposedAsymmetric`]: weights built from each robot's
//!   own radial speed, under which the braking input of [`fallback_input`]
//!   satisfies every constraint of the robot at once.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::barrier::{CbfParams, PairGeometry};
use crate::dynamics::{pair_state, PairState, RobotState};
use crate::error::{CbfError, Result};
use crate::vector::Vector;

/// Denominators and speeds below this are treated as zero.
pub const WEIGHT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Symmetric,
    #[serde(rename = "previous", alias = "previous_asymmetric")]
    PreviousAsymmetric,
    #[serde(rename = "proposed", alias = "proposed_asymmetric")]
    ProposedAsymmetric,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] =
        [StrategyKind::ProposedAsymmetric, StrategyKind::PreviousAsymmetric, StrategyKind::Symmetric];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::Symmetric => "symmetric",
            StrategyKind::PreviousAsymmetric => "previous",
            StrategyKind::ProposedAsymmetric => "proposed",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "symmetric" => Ok(StrategyKind::Symmetric),
            "previous" | "previous_asymmetric" => Ok(StrategyKind::PreviousAsymmetric),
            "proposed" | "proposed_asymmetric" => Ok(StrategyKind::ProposedAsymmetric),
            other => Err(format!("unknown strategy '{other}' (expected symmetric, previous or proposed)")),
        }
    }
}

/// Half-plane `g . u + b >= 0` on one robot's input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConstraint {
    pub g: Vector,
    pub b: f64,
}

impl LinearConstraint {
    pub fn new(g: Vector, b: f64) -> Self {
        Self { g, b }
    }

    /// Left-hand side `g . u + b`; negative means violated.
    pub fn lhs(&self, u: &Vector) -> f64 {
        self.g.dot(u) + self.b
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPair {
    pub w1: f64,
    pub w2: f64,
}

/// Even split: `-2 L_g h u_i + L_f h + gamma h >= 0`.
pub fn constraint_symmetric(q_ij: &PairState, p: &CbfParams, m: f64) -> Result<LinearConstraint> {
    constraint_weighted(WeightPair { w1: 1.0, w2: 1.0 }, q_ij, p, m)
}

/// Generic weighted split `w1 L_f h - 2 L_g h u_i + w2 gamma h >= 0`.
pub fn constraint_weighted(
    w: WeightPair,
    q_ij: &PairState,
    p: &CbfParams,
    m: f64,
) -> Result<LinearConstraint> {
    let geo = PairGeometry::of(q_ij)?;
    let lf = geo.radial + geo.tangential * p.t_c;
    let h = geo.dist + geo.radial * p.t_c - p.r_s;
    Ok(LinearConstraint { g: geo.unit * (-2.0 * p.t_c / m), b: w.w1 * lf + w.w2 * p.gamma * h })
}

/// Velocity-based weights of robot `i` for the pair `(i, j)`.
///
/// Only needed for diagnostics; [`constraint_proposed`] evaluates the
/// weighted constraint without dividing by `L_f h` or `h`.
pub fn weights_proposed(self_velocity: &Vector, q_ij: &PairState, p: &CbfParams) -> Result<WeightPair> {
    let geo = PairGeometry::of(q_ij)?;
    let lf = geo.radial + geo.tangential * p.t_c;
    let h = geo.dist + geo.radial * p.t_c - p.r_s;
    if lf.abs() <= WEIGHT_EPS {
        return Err(CbfError::DegenerateWeight { which: "L_f h", value: lf });
    }
    if h.abs() <= WEIGHT_EPS {
        return Err(CbfError::DegenerateWeight { which: "h", value: h });
    }
    let own = self_velocity.dot(&geo.unit);
    Ok(WeightPair {
        w1: (-2.0 * own + geo.tangential * p.t_c) / lf,
        w2: (geo.dist - 2.0 * own * p.t_c - p.r_s) / h,
    })
}

/// Speed-ratio weights: `w1 = 1`, `w2 = |v_j| / (|v_i| + |v_j|)`.
///
/// When both robots are (numerically) at rest the ratio is undefined and
/// `w2 = 1/2` is used.
pub fn weights_previous(self_speed: f64, other_speed: f64) -> WeightPair {
    let w2 = if self_speed < WEIGHT_EPS && other_speed < WEIGHT_EPS {
        0.5
    } else {
        other_speed / (self_speed + other_speed)
    };
    WeightPair { w1: 1.0, w2 }
}

/// Velocity-weighted constraint of robot `i`:
///
/// ```text
/// -2 r_i + c T_c - 2 L_g h u_i + gamma (|x_ij| - 2 r_i T_c - r_s) >= 0
/// ```
///
/// with `r_i = v_i . x_ij / |x_ij|` and `c` the tangential term of `L_f h`.
pub fn constraint_proposed(
    me: &RobotState,
    q_ij: &PairState,
    p: &CbfParams,
    m: f64,
) -> Result<LinearConstraint> {
    let geo = PairGeometry::of(q_ij)?;
    let own = me.velocity.dot(&geo.unit);
    Ok(LinearConstraint {
        g: geo.unit * (-2.0 * p.t_c / m),
        b: -2.0 * own + geo.tangential * p.t_c + p.gamma * (geo.dist - 2.0 * own * p.t_c - p.r_s),
    })
}

pub fn constraint_previous(
    me: &RobotState,
    other_speed: f64,
    q_ij: &PairState,
    p: &CbfParams,
    m: f64,
) -> Result<LinearConstraint> {
    constraint_weighted(weights_previous(me.speed(), other_speed), q_ij, p, m)
}

/// Braking input `-m (gamma + 1/T_c) v_i`.
///
/// It satisfies every [`constraint_proposed`] row of the robot as long as
/// the robot is at least `r_s` away from each neighbour.
pub fn fallback_input(me: &RobotState, p: &CbfParams, m: f64) -> Vector {
    me.velocity * (-m * (p.gamma + 1.0 / p.t_c))
}

/// Constraint robot `me` places on its own input because of `other`.
pub fn build_constraint(
    strategy: StrategyKind,
    me: &RobotState,
    other: &RobotState,
    p: &CbfParams,
    m: f64,
) -> Result<LinearConstraint> {
    let q = pair_state(me, other);
    match strategy {
        StrategyKind::Symmetric => constraint_symmetric(&q, p, m),
        StrategyKind::PreviousAsymmetric => constraint_previous(me, other.speed(), &q, p, m),
        StrategyKind::ProposedAsymmetric => constraint_proposed(me, &q, p, m),
    }
}
