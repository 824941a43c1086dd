//! Point-mass robot states, the double-integrator update and the nominal
//! goal-seeking controller.

use serde::{Deserialize, Serialize};

use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotState {
    pub position: Vector,
    pub velocity: Vector,
}

impl RobotState {
    pub fn new(position: Vector, velocity: Vector) -> Self {
        debug_assert_eq!(position.dim(), velocity.dim());
        Self { position, velocity }
    }

    pub fn dim(&self) -> usize {
        self.position.dim()
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

/// Mass, feedback gains and goal of one robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub m: f64,
    /// Position feedback coefficient.
    pub k: f64,
    /// Damper coefficient.
    pub c: f64,
    pub goal: Vector,
}

/// Relative state of robot `j` as seen from robot `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    /// `x_j - x_i`
    pub x_ij: Vector,
    /// `v_j - v_i`
    pub v_ij: Vector,
}

impl std::ops::Neg for PairState {
    type Output = PairState;

    fn neg(self) -> PairState {
        PairState { x_ij: -self.x_ij, v_ij: -self.v_ij }
    }
}

/// Goal-seeking PD input `k (goal - x) - c v`, ignoring other robots.
pub fn nominal_input(state: &RobotState, params: &PhysicalParams) -> Vector {
    (params.goal - state.position) * params.k - state.velocity * params.c
}

/// Semi-implicit Euler: the velocity is updated first and the position
/// advances with the new velocity.
pub fn step_dynamics(state: &RobotState, u: Vector, m: f64, dt: f64) -> RobotState {
    let velocity = state.velocity + u * (dt / m);
    let position = state.position + velocity * dt;
    RobotState { position, velocity }
}

pub fn pair_state(a: &RobotState, b: &RobotState) -> PairState {
    PairState { x_ij: b.position - a.position, v_ij: b.velocity - a.velocity }
}
