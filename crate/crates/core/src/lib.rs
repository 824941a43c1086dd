//! Decentralized control barrier function (CBF) safety filters for teams
//! of double-integrator robots.
//!
//! Each robot turns the pairwise collision barrier into one linear
//! constraint on its own input per neighbour and projects its nominal
//! input onto them with a small exact QP. How the pairwise condition is
//! split between the two robots is selected by [`StrategyKind`]:
//!
//! * `Symmetric` gives each robot half of the burden. A robot squeezed
//!   between approaching neighbours can end up with no admissible input.
//! * `PreviousAsymmetric` splits the class-K term by speed ratio.
//! * `ProposedAsymmetric` splits both terms by each robot's own radial
//!   speed. The braking input `-m (gamma + 1/T_c) v` then satisfies all of
//!   a robot's constraints at once, so its QP always has a solution.
//!
//! The [`sim`] module runs the built-in line and circle scenarios and
//! batches of perturbed trials; [`io`] loads run configurations and writes
//! traces and reports.

pub mod barrier;
pub mod decentralize;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod qp;
pub mod sim;
pub mod vector;

pub use barrier::CbfParams;
pub use decentralize::{LinearConstraint, StrategyKind, WeightPair};
pub use dynamics::{PairState, PhysicalParams, RobotState};
pub use error::{CbfError, Result};
pub use qp::{QpOutcome, QpProblem};
pub use sim::{BatchReport, Scenario, SimulationTrace};
pub use vector::Vector;
