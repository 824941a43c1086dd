//! Synchronous multi-robot simulation with a per-robot barrier QP filter.
//!
//! Every step, each robot builds one constraint per other robot under the
//! scenario's [`StrategyKind`], projects its nominal input onto them and,
//! if its QP has no solution, brakes with [`fallback_input`]. All robots
//! solve against the same snapshot and are then integrated together.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barrier::{self, CbfParams};
use crate::decentralize::{build_constraint, fallback_input, LinearConstraint, StrategyKind};
use crate::dynamics::{nominal_input, pair_state, step_dynamics, PhysicalParams, RobotState};
use crate::error::{CbfError, Result};
use crate::qp::{self, QpOutcome, QpProblem};
use crate::vector::Vector;

/// Control period used by all built-in scenarios.
pub const CONTROL_PERIOD: f64 = 0.025;

/// Amount subtracted from every constraint constant before it is handed
/// to the QP, so that active constraints hold with a positive left-hand
/// side after rounding. Small against the solver tolerance.
pub const CONSTRAINT_BACKOFF: f64 = 1e-9;

pub const ONE_D_SCENARIO: &str = "one_d_three_robots";
pub const CIRCLE_SCENARIO: &str = "circle_20";

/// Barrier parameters of the three-robot line scenario.
pub const LINE_CBF: CbfParams = CbfParams { r_s: 0.5, gamma: 2.0, t_c: 0.025 };

/// Barrier parameters of the circle scenario; `gamma` is swept by batches.
pub const CIRCLE_CBF: CbfParams = CbfParams { r_s: 0.08, gamma: 1.0, t_c: 0.025 };

pub const CIRCLE_RADIUS: f64 = 1.0;
pub const CIRCLE_ROBOTS: usize = 20;
pub const CIRCLE_STEPS: usize = 400;
pub const CIRCLE_PERTURBATION: f64 = 0.06;
pub const TABLE_GAMMAS: [f64; 3] = [0.5, 1.0, 5.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub robots: Vec<RobotState>,
    pub params: Vec<PhysicalParams>,
    pub cbf: CbfParams,
    pub strategy: StrategyKind,
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Half-width of the uniform noise added to every initial position and
    /// velocity component.
    #[serde(default)]
    pub perturbation: f64,
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.robots.first().map_or(0, RobotState::dim)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(CbfError::InvalidScenario(msg));
        if self.robots.is_empty() {
            return invalid("scenario has no robots".into());
        }
        if self.params.len() != self.robots.len() {
            return invalid(format!("{} robots but {} parameter sets", self.robots.len(), self.params.len()));
        }
        if self.steps < 1 {
            return invalid("steps must be at least 1".into());
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.perturbation.is_finite() && self.perturbation >= 0.0) {
            return invalid(format!("perturbation must be non-negative, got {}", self.perturbation));
        }
        self.cbf.validate()?;
        let dim = self.dim();
        for (i, (r, p)) in self.robots.iter().zip(&self.params).enumerate() {
            let dims = [r.position.dim(), r.velocity.dim(), p.goal.dim()];
            if let Some(&bad) = dims.iter().find(|&&d| d != dim) {
                return Err(CbfError::DimensionMismatch { expected: dim, actual: bad });
            }
            if !(r.position.is_finite() && r.velocity.is_finite() && p.goal.is_finite()) {
                return invalid(format!("robot {i} has non-finite state"));
            }
            if !(p.m.is_finite() && p.m > 0.0) {
                return invalid(format!("robot {i} mass must be positive"));
            }
            if !(p.k >= 0.0 && p.c >= 0.0 && p.k.is_finite() && p.c.is_finite()) {
                return invalid(format!("robot {i} gains must be non-negative"));
            }
        }
        check_spacing(&self.robots, self.cbf.r_s)
    }

    /// Initial states with the seeded perturbation applied.
    pub fn initial_states(&self) -> Vec<RobotState> {
        if self.perturbation == 0.0 {
            return self.robots.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let p = self.perturbation;
        let mut jitter = |v: Vector| -> Vector {
            let comps: Vec<f64> = v.as_slice().iter().map(|c| c + rng.random_range(-p..=p)).collect();
            Vector::from_slice(&comps).expect("dimension preserved")
        };
        self.robots
            .iter()
            .map(|r| {
                let position = jitter(r.position);
                let velocity = jitter(r.velocity);
                RobotState { position, velocity }
            })
            .collect()
    }

    pub fn with_gamma(&self, gamma: f64) -> Scenario {
        Scenario { cbf: CbfParams { gamma, ..self.cbf }, ..self.clone() }
    }

    pub fn with_strategy(&self, strategy: StrategyKind) -> Scenario {
        Scenario { strategy, ..self.clone() }
    }
}

fn check_spacing(robots: &[RobotState], r_s: f64) -> Result<()> {
    for i in 0..robots.len() {
        for j in i + 1..robots.len() {
            if (robots[j].position - robots[i].position).norm() < r_s {
                return Err(CbfError::SpacingTooTight(i, j));
            }
        }
    }
    Ok(())
}

/// Three robots on a line closing in on a stationary centre robot.
pub fn make_1d_scenario(cbf: CbfParams, strategy: StrategyKind) -> Scenario {
    let robot = |x: f64, v: f64| RobotState::new(Vector::new1(x), Vector::new1(v));
    let coast = PhysicalParams { m: 1.0, k: 0.0, c: 0.0, goal: Vector::new1(0.0) };
    Scenario {
        name: ONE_D_SCENARIO.into(),
        robots: vec![robot(-10.0, 5.0), robot(0.0, 0.0), robot(10.0, -5.0)],
        params: vec![coast; 3],
        cbf,
        strategy,
        dt: CONTROL_PERIOD,
        steps: 320,
        seed: 0,
        perturbation: 0.0,
    }
}

/// `n` robots at rest, evenly spaced on a circle, all driven to its centre.
pub fn make_circle_scenario(
    n: usize,
    radius: f64,
    cbf: CbfParams,
    strategy: StrategyKind,
) -> Result<Scenario> {
    if n < 2 {
        return Err(CbfError::InvalidScenario(format!("circle needs at least 2 robots, got {n}")));
    }
    let spacing = 2.0 * radius * (PI / n as f64).sin();
    if spacing.is_nan() || spacing < cbf.r_s {
        return Err(CbfError::SpacingTooTight(0, 1));
    }
    let center = Vector::new2(0.0, 0.0);
    let robots = (0..n)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / n as f64;
            RobotState::new(Vector::new2(radius * angle.cos(), radius * angle.sin()), center)
        })
        .collect();
    Ok(Scenario {
        name: CIRCLE_SCENARIO.into(),
        robots,
        params: vec![PhysicalParams { m: 1.0, k: 1.0, c: 0.3, goal: center }; n],
        cbf,
        strategy,
        dt: CONTROL_PERIOD,
        steps: CIRCLE_STEPS,
        seed: 0,
        perturbation: CIRCLE_PERTURBATION,
    })
}

/// Barrier diagnostics of one unordered pair `(i, j)`, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDiagnostics {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub h: f64,
    pub margin: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    /// States at which the inputs were computed (before integration).
    pub states: Vec<RobotState>,
    pub applied_u: Vec<Vector>,
    pub feasible: Vec<bool>,
    /// Smallest left-hand side over every robot's constraints at its
    /// applied input; `+inf` without pairs.
    pub min_constraint_lhs: f64,
    pub min_pair_distance: f64,
    pub pairs: Vec<PairDiagnostics>,
}

impl StepRecord {
    pub fn all_feasible(&self) -> bool {
        self.feasible.iter().all(|&f| f)
    }
}

/// Constraints robot `i` places on its own input.
pub fn robot_constraints(
    states: &[RobotState],
    scenario: &Scenario,
    i: usize,
) -> Result<Vec<LinearConstraint>> {
    let m = scenario.params[i].m;
    states
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, other)| build_constraint(scenario.strategy, &states[i], other, &scenario.cbf, m))
        .collect()
}

/// Mutable simulation state.
#[derive(Debug, Clone)]
pub struct World {
    pub states: Vec<RobotState>,
    pub step_index: usize,
}

impl World {
    pub fn new(states: Vec<RobotState>) -> Self {
        Self { states, step_index: 0 }
    }

    /// Compute every robot's input, record diagnostics and integrate.
    pub fn step(&mut self, scenario: &Scenario) -> Result<StepRecord> {
        let n = self.states.len();
        let mut applied_u = Vec::with_capacity(n);
        let mut feasible = Vec::with_capacity(n);
        let mut min_lhs = f64::INFINITY;

        for i in 0..n {
            let state = &self.states[i];
            let params = &scenario.params[i];
            let constraints = robot_constraints(&self.states, scenario, i)?;
            let tightened =
                constraints.iter().map(|c| LinearConstraint::new(c.g, c.b - CONSTRAINT_BACKOFF)).collect();
            let problem = QpProblem::new(nominal_input(state, params), tightened);
            let (u, ok) = match qp::solve(&problem, qp::DEFAULT_TOLERANCE)? {
                QpOutcome::Feasible { u, .. } => (u, true),
                QpOutcome::Infeasible { .. } => (fallback_input(state, &scenario.cbf, params.m), false),
            };
            min_lhs = constraints.iter().map(|c| c.lhs(&u)).fold(min_lhs, f64::min);
            applied_u.push(u);
            feasible.push(ok);
        }

        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        let mut min_dist = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                let q = pair_state(&self.states[i], &self.states[j]);
                let p = &scenario.cbf;
                let diag = PairDiagnostics {
                    i,
                    j,
                    distance: q.x_ij.norm(),
                    h: barrier::h(&q, p)?,
                    margin: barrier::symmetric_margin(&q, p)?,
                    h2: barrier::h2_diag(&q, p)?,
                };
                min_dist = min_dist.min(diag.distance);
                pairs.push(diag);
            }
        }

        let record = StepRecord {
            step: self.step_index,
            t: self.step_index as f64 * scenario.dt,
            states: self.states.clone(),
            applied_u: applied_u.clone(),
            feasible,
            min_constraint_lhs: min_lhs,
            min_pair_distance: min_dist,
            pairs,
        };
        self.states = self
            .states
            .iter()
            .zip(&applied_u)
            .zip(&scenario.params)
            .map(|((s, u), p)| step_dynamics(s, *u, p.m, scenario.dt))
            .collect();
        self.step_index += 1;
        Ok(record)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    /// The scenario as run: perturbed initial states, `perturbation = 0`.
    pub scenario: Scenario,
    pub records: Vec<StepRecord>,
    pub no_solution_steps: usize,
    pub first_infeasible_time: Option<f64>,
}

impl SimulationTrace {
    /// Trace of `scenario` started from `initial` (its perturbed states).
    pub fn new(scenario: &Scenario, initial: Vec<RobotState>, records: Vec<StepRecord>) -> Self {
        let infeasible: Vec<&StepRecord> = records.iter().filter(|r| !r.all_feasible()).collect();
        Self {
            no_solution_steps: infeasible.len(),
            first_infeasible_time: infeasible.first().map(|r| r.t),
            scenario: Scenario { robots: initial, perturbation: 0.0, ..scenario.clone() },
            records,
        }
    }

    pub fn min_constraint_lhs(&self) -> f64 {
        self.records.iter().map(|r| r.min_constraint_lhs).fold(f64::INFINITY, f64::min)
    }

    pub fn min_pair_distance(&self) -> f64 {
        self.records.iter().map(|r| r.min_pair_distance).fold(f64::INFINITY, f64::min)
    }

    /// Smallest `symmetric_margin` of pair `(i, j)` over the run.
    pub fn min_margin(&self, i: usize, j: usize) -> Option<f64> {
        let (i, j) = (i.min(j), i.max(j));
        self.records
            .iter()
            .flat_map(|r| r.pairs.iter().filter(|p| p.i == i && p.j == j).map(|p| p.margin))
            .reduce(f64::min)
    }
}

pub fn run_scenario(scenario: &Scenario) -> Result<SimulationTrace> {
    scenario.validate()?;
    let initial = scenario.initial_states();
    check_spacing(&initial, scenario.cbf.r_s)?;

    let mut world = World::new(initial.clone());
    let mut records = Vec::with_capacity(scenario.steps);
    for step in 0..scenario.steps {
        let record = world.step(scenario).map_err(|e| CbfError::Fatal { step, source: Box::new(e) })?;
        records.push(record);
    }
    Ok(SimulationTrace::new(scenario, initial, records))
}

/// Seed of trial `trial` in a batch started from `base_seed`.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed.wrapping_add(trial as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub seed: u64,
    pub no_solution_steps: usize,
    pub first_infeasible_time: Option<f64>,
    pub min_constraint_lhs: f64,
    pub min_pair_distance: f64,
    pub min_h: f64,
    pub min_h2: f64,
    /// Fatal diagnostic, if the trial aborted.
    pub fatal: Option<String>,
}

impl TrialSummary {
    fn from_trace(trial: usize, seed: u64, trace: &SimulationTrace) -> Self {
        let pairs = || trace.records.iter().flat_map(|r| r.pairs.iter());
        Self {
            trial,
            seed,
            no_solution_steps: trace.no_solution_steps,
            first_infeasible_time: trace.first_infeasible_time,
            min_constraint_lhs: trace.min_constraint_lhs(),
            min_pair_distance: trace.min_pair_distance(),
            min_h: pairs().map(|p| p.h).fold(f64::INFINITY, f64::min),
            min_h2: pairs().map(|p| p.h2).fold(f64::INFINITY, f64::min),
            fatal: None,
        }
    }

    fn from_fatal(trial: usize, seed: u64, err: &CbfError) -> Self {
        Self {
            trial,
            seed,
            no_solution_steps: 0,
            first_infeasible_time: None,
            min_constraint_lhs: f64::NAN,
            min_pair_distance: f64::NAN,
            min_h: f64::NAN,
            min_h2: f64::NAN,
            fatal: Some(err.to_string()),
        }
    }

    pub fn had_no_solution(&self) -> bool {
        self.no_solution_steps > 0
    }
}

/// Results of all trials for one `(strategy, gamma)` combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchCell {
    pub strategy: StrategyKind,
    pub gamma: f64,
    pub trials: usize,
    /// Trials with at least one no-solution step.
    pub no_solution_trials: usize,
    pub fatal_trials: usize,
    pub summaries: Vec<TrialSummary>,
    /// Per-step minimum of `min_constraint_lhs` across completed trials.
    pub min_lhs_series: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub scenario: String,
    pub base_seed: u64,
    pub trials: usize,
    pub cells: Vec<BatchCell>,
}

impl BatchReport {
    pub fn cell(&self, strategy: StrategyKind, gamma: f64) -> Option<&BatchCell> {
        self.cells.iter().find(|c| c.strategy == strategy && c.gamma == gamma)
    }

    pub fn merge(mut self, other: BatchReport) -> BatchReport {
        self.cells.extend(other.cells);
        self
    }
}

fn run_cell(base: &Scenario, gamma: f64, trials: usize) -> BatchCell {
    let scenario = base.with_gamma(gamma);
    let outcomes: Vec<(TrialSummary, Option<Vec<f64>>)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(base.seed, trial);
            let run = Scenario { seed, ..scenario.clone() };
            match run_scenario(&run) {
                Ok(trace) => {
                    let series = trace.records.iter().map(|r| r.min_constraint_lhs).collect();
                    (TrialSummary::from_trace(trial, seed, &trace), Some(series))
                }
                Err(e) => (TrialSummary::from_fatal(trial, seed, &e), None),
            }
        })
        .collect();

    let mut min_lhs_series = vec![f64::INFINITY; base.steps];
    for series in outcomes.iter().filter_map(|(_, s)| s.as_ref()) {
        for (acc, v) in min_lhs_series.iter_mut().zip(series) {
            *acc = acc.min(*v);
        }
    }
    let summaries: Vec<TrialSummary> = outcomes.into_iter().map(|(s, _)| s).collect();
    BatchCell {
        strategy: base.strategy,
        gamma,
        trials,
        no_solution_trials: summaries.iter().filter(|s| s.had_no_solution()).count(),
        fatal_trials: summaries.iter().filter(|s| s.fatal.is_some()).count(),
        summaries,
        min_lhs_series,
    }
}

/// Run `trials` perturbed copies of `base` for each gamma.
///
/// Trial `k` uses seed [`trial_seed`]`(base.seed, k)` regardless of gamma,
/// so cells differ only in the barrier gain. Trials run in parallel; the
/// report is ordered by gamma, then trial index.
pub fn run_batch(base: &Scenario, trials: usize, gammas: &[f64]) -> Result<BatchReport> {
    if trials == 0 {
        return Err(CbfError::InvalidScenario("trials must be at least 1".into()));
    }
    if gammas.is_empty() {
        return Err(CbfError::InvalidScenario("no gamma values given".into()));
    }
    base.validate()?;
    for &g in gammas {
        base.with_gamma(g).cbf.validate()?;
    }
    Ok(BatchReport {
        scenario: base.name.clone(),
        base_seed: base.seed,
        trials,
        cells: gammas.iter().map(|&g| run_cell(base, g, trials)).collect(),
    })
}

/// All three strategies over the given gammas on the circle scenario.
pub fn run_table3(base: &Scenario, trials: usize, gammas: &[f64]) -> Result<BatchReport> {
    let mut report: Option<BatchReport> = None;
    for strategy in StrategyKind::ALL {
        let part = run_batch(&base.with_strategy(strategy), trials, gammas)?;
        report = Some(match report {
            Some(r) => r.merge(part),
            None => part,
        });
    }
    Ok(report.expect("at least one strategy"))
}
