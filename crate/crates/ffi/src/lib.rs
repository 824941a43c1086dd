//! C ABI over `cbf_swarm`.
//!
//! Every function returns a [`CbfStatus`]. On failure a description is
//! kept per thread and can be read with [`cbf_last_error_message`].
//! Simulations are opaque [`CbfSimulation`] handles created from a JSON
//! run configuration and released with [`cbf_simulation_free`].
//!
//! Vectors cross the boundary as two-element `double` arrays plus a
//! dimension of 1 or 2; in 1D only the first element is read or written.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use cbf_swarm::decentralize::{build_constraint, fallback_input};
use cbf_swarm::io;
use cbf_swarm::qp::{self, QpOutcome, QpProblem};
use cbf_swarm::sim::{Scenario, SimulationTrace, StepRecord, World};
use cbf_swarm::{CbfError, CbfParams, LinearConstraint, RobotState, StrategyKind, Vector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ValidationError = 4,
    SingularPair = 5,
    DegenerateWeight = 6,
    DegenerateConstraint = 7,
    Fatal = 8,
    IoError = 9,
    /// The simulation has already run all of its steps.
    Finished = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbfStrategy {
    Symmetric = 0,
    PreviousAsymmetric = 1,
    ProposedAsymmetric = 2,
}

impl From<CbfStrategy> for StrategyKind {
    fn from(s: CbfStrategy) -> Self {
        match s {
            CbfStrategy::Symmetric => StrategyKind::Symmetric,
            CbfStrategy::PreviousAsymmetric => StrategyKind::PreviousAsymmetric,
            CbfStrategy::ProposedAsymmetric => StrategyKind::ProposedAsymmetric,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbfBarrierParams {
    pub r_s: f64,
    pub gamma: f64,
    pub t_c: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbfRobotState {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
}

/// Half-plane `g . u + b >= 0`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbfConstraint {
    pub g: [f64; 2],
    pub b: f64,
}

/// Result of a QP solve. `u` is the projection when `feasible` is true,
/// otherwise the least-violating point; `max_violation` is `0` when
/// feasible.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbfQpResult {
    pub feasible: bool,
    pub u: [f64; 2],
    pub max_violation: f64,
}

/// Opaque simulation handle.
pub struct CbfSimulation {
    scenario: Scenario,
    initial: Vec<RobotState>,
    world: World,
    records: Vec<StepRecord>,
}

impl CbfSimulation {
    fn trace(&self) -> SimulationTrace {
        SimulationTrace::new(&self.scenario, self.initial.clone(), self.records.clone())
    }

    fn step(&mut self) -> Result<(), Failure> {
        if self.records.len() >= self.scenario.steps {
            return Err(Failure(CbfStatus::Finished, "all steps have been run".into()));
        }
        let step = self.records.len();
        let record =
            self.world.step(&self.scenario).map_err(|e| CbfError::Fatal { step, source: Box::new(e) })?;
        self.records.push(record);
        Ok(())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CbfStatus, String);

impl From<CbfError> for Failure {
    fn from(e: CbfError) -> Self {
        let status = match &e {
            CbfError::SingularPair { .. } => CbfStatus::SingularPair,
            CbfError::DegenerateWeight { .. } => CbfStatus::DegenerateWeight,
            CbfError::DegenerateConstraint { .. } => CbfStatus::DegenerateConstraint,
            CbfError::Parse { .. } => CbfStatus::ParseError,
            CbfError::Fatal { .. } => CbfStatus::Fatal,
            CbfError::Io { .. } => CbfStatus::IoError,
            CbfError::DimensionMismatch { .. } | CbfError::UnsupportedDimension(_) => {
                CbfStatus::InvalidArgument
            }
            _ => CbfStatus::ValidationError,
        };
        Failure(status, e.to_string())
    }
}

fn null() -> Failure {
    Failure(CbfStatus::NullPointer, "null pointer argument".into())
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(CbfStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CbfStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|_| Err(Failure(CbfStatus::Panic, "internal panic".into())));
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CbfStatus::Ok
        }
        Err(Failure(status, msg)) => {
            let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
            LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
            status
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn deref_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid("string is not valid UTF-8"))
}

/// `dim` must already have passed [`check_dim`].
fn vector(v: &[f64; 2], dim: usize) -> Result<Vector, Failure> {
    Ok(Vector::from_slice(&v[..dim])?)
}

fn check_dim(dim: usize) -> Result<(), Failure> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(CbfError::UnsupportedDimension(dim).into())
    }
}

fn robot(s: &CbfRobotState, dim: usize) -> Result<RobotState, Failure> {
    Ok(RobotState::new(vector(&s.position, dim)?, vector(&s.velocity, dim)?))
}

fn params(p: &CbfBarrierParams) -> Result<CbfParams, Failure> {
    let p = CbfParams { r_s: p.r_s, gamma: p.gamma, t_c: p.t_c };
    p.validate()?;
    Ok(p)
}

fn positive_mass(m: f64) -> Result<(), Failure> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("mass must be positive, got {m}")))
    }
}

fn write_vec(out: &mut [f64; 2], v: &Vector) {
    *out = [v.x(), v.y()];
}

/// Message describing the last failed call on this thread, or null. The
/// pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn cbf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Braking input `-m (gamma + 1/T_c) v` of one robot.
///
/// # Safety
/// All pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn cbf_fallback_input(
    dim: usize,
    me: *const CbfRobotState,
    barrier: *const CbfBarrierParams,
    mass: f64,
    out_u: *mut [f64; 2],
) -> CbfStatus {
    guard(|| {
        check_dim(dim)?;
        let me = robot(deref(me)?, dim)?;
        let p = params(deref(barrier)?)?;
        positive_mass(mass)?;
        let out = deref_mut(out_u)?;
        write_vec(out, &fallback_input(&me, &p, mass));
        Ok(())
    })
}

/// Constraint robot `me` places on its own input because of `other`.
///
/// # Safety
/// All pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn cbf_build_constraint(
    strategy: CbfStrategy,
    dim: usize,
    me: *const CbfRobotState,
    other: *const CbfRobotState,
    barrier: *const CbfBarrierParams,
    mass: f64,
    out: *mut CbfConstraint,
) -> CbfStatus {
    guard(|| {
        check_dim(dim)?;
        let me = robot(deref(me)?, dim)?;
        let other = robot(deref(other)?, dim)?;
        let p = params(deref(barrier)?)?;
        positive_mass(mass)?;
        let out = deref_mut(out)?;
        let c = build_constraint(strategy.into(), &me, &other, &p, mass)?;
        let mut g = [0.0; 2];
        write_vec(&mut g, &c.g);
        *out = CbfConstraint { g, b: c.b };
        Ok(())
    })
}

/// Project `u_hat` onto `count` half-planes. A non-positive `tolerance`
/// selects the library default of `1e-6`.
///
/// # Safety
/// `constraints` must point to `count` elements (it may be null when
/// `count` is 0); the other pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn cbf_qp_solve(
    dim: usize,
    u_hat: *const [f64; 2],
    constraints: *const CbfConstraint,
    count: usize,
    tolerance: f64,
    out: *mut CbfQpResult,
) -> CbfStatus {
    guard(|| {
        check_dim(dim)?;
        let u_hat = vector(deref(u_hat)?, dim)?;
        let rows: &[CbfConstraint] = if count == 0 {
            &[]
        } else if constraints.is_null() {
            return Err(null());
        } else {
            std::slice::from_raw_parts(constraints, count)
        };
        let rows = rows
            .iter()
            .map(|c| Ok(LinearConstraint::new(vector(&c.g, dim)?, c.b)))
            .collect::<Result<Vec<_>, Failure>>()?;
        let tol = if tolerance > 0.0 { tolerance } else { qp::DEFAULT_TOLERANCE };
        let out = deref_mut(out)?;
        let mut u = [0.0; 2];
        *out = match qp::solve(&QpProblem::new(u_hat, rows), tol)? {
            QpOutcome::Feasible { u: sol, .. } => {
                write_vec(&mut u, &sol);
                CbfQpResult { feasible: true, u, max_violation: 0.0 }
            }
            QpOutcome::Infeasible { max_violation, point } => {
                write_vec(&mut u, &point);
                CbfQpResult { feasible: false, u, max_violation }
            }
        };
        Ok(())
    })
}

/// Create a simulation from a JSON run configuration.
///
/// # Safety
/// `config_json` must be a nul-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cbf_simulation_new(
    config_json: *const c_char,
    out: *mut *mut CbfSimulation,
) -> CbfStatus {
    guard(|| {
        let out = deref_mut(out)?;
        *out = std::ptr::null_mut();
        let config = io::load_config(str_arg(config_json)?)?;
        let scenario = config.scenario()?;
        let initial = scenario.initial_states();
        let sim = CbfSimulation {
            world: World::new(initial.clone()),
            records: Vec::with_capacity(scenario.steps),
            initial,
            scenario,
        };
        *out = Box::into_raw(Box::new(sim));
        Ok(())
    })
}

/// Release a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from [`cbf_simulation_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cbf_simulation_free(sim: *mut CbfSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advance one control period.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn cbf_simulation_step(sim: *mut CbfSimulation) -> CbfStatus {
    guard(|| deref_mut(sim)?.step())
}

/// Run every remaining step.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn cbf_simulation_run(sim: *mut CbfSimulation) -> CbfStatus {
    guard(|| {
        let sim = deref_mut(sim)?;
        while sim.records.len() < sim.scenario.steps {
            sim.step()?;
        }
        Ok(())
    })
}

/// Number of robots, spatial dimension, configured steps and steps run.
///
/// # Safety
/// `sim` must be a live handle or null; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn cbf_simulation_info(
    sim: *const CbfSimulation,
    robots: *mut usize,
    dim: *mut usize,
    steps: *mut usize,
    steps_done: *mut usize,
) -> CbfStatus {
    guard(|| {
        let sim = deref(sim)?;
        for (p, v) in [
            (robots, sim.initial.len()),
            (dim, sim.scenario.dim()),
            (steps, sim.scenario.steps),
            (steps_done, sim.records.len()),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Current state of `robot`.
///
/// # Safety
/// `sim` must be a live handle or null; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cbf_simulation_robot_state(
    sim: *const CbfSimulation,
    robot: usize,
    out: *mut CbfRobotState,
) -> CbfStatus {
    guard(|| {
        let sim = deref(sim)?;
        let out = deref_mut(out)?;
        let s = sim
            .world
            .states
            .get(robot)
            .ok_or_else(|| invalid(format!("robot index {robot} out of range")))?;
        let mut state = CbfRobotState { position: [0.0; 2], velocity: [0.0; 2] };
        write_vec(&mut state.position, &s.position);
        write_vec(&mut state.velocity, &s.velocity);
        *out = state;
        Ok(())
    })
}

/// Summary over the steps run so far. `first_infeasible_time` is set to
/// NaN when every step was feasible.
///
/// # Safety
/// `sim` must be a live handle or null; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn cbf_simulation_summary(
    sim: *const CbfSimulation,
    no_solution_steps: *mut usize,
    first_infeasible_time: *mut f64,
    min_constraint_lhs: *mut f64,
    min_pair_distance: *mut f64,
) -> CbfStatus {
    guard(|| {
        let trace = deref(sim)?.trace();
        if let Some(p) = no_solution_steps.as_mut() {
            *p = trace.no_solution_steps;
        }
        for (p, v) in [
            (first_infeasible_time, trace.first_infeasible_time.unwrap_or(f64::NAN)),
            (min_constraint_lhs, trace.min_constraint_lhs()),
            (min_pair_distance, trace.min_pair_distance()),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Write the trace CSV (and its scenario sidecar) of the steps run so far.
///
/// # Safety
/// `sim` must be a live handle or null; `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cbf_simulation_export_trace(
    sim: *const CbfSimulation,
    path: *const c_char,
) -> CbfStatus {
    guard(|| {
        let trace = deref(sim)?.trace();
        io::export_trace(&trace, Path::new(str_arg(path)?))?;
        Ok(())
    })
}
