//! Exact projection of a nominal input onto a polyhedron in one or two
//! dimensions.
//!
//! Solves
//!
//! ```text
//! minimize   1/2 |u - u_hat|^2
//! subject to g_k . u + b_k >= 0   for every k
//! ```
//!
//! by enumerating every candidate active set: the unconstrained point, the
//! projection onto each single constraint boundary and (in 2D) every
//! pairwise boundary intersection. The optimum is always one of these
//! candidates, so the feasible candidate closest to `u_hat` is the exact
//! solution. With at most a few dozen constraints the `O(n^2)` candidates
//! are cheap, and there is no iteration count or convergence test that
//! could blur the difference between "infeasible" and "solver gave up".
//!
//! When no candidate is feasible the solver minimizes the largest
//! violation `max_k -(g_k . u + b_k)` (a Chebyshev phase-one problem) by
//! enumerating its basic points, and reports the problem infeasible iff
//! that minimum exceeds the tolerance.

use std::cmp::Ordering;

use crate::decentralize::LinearConstraint;
use crate::error::{CbfError, Result};
use crate::vector::Vector;

/// Constraint-violation tolerance used to declare a QP infeasible.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Relative slack used when checking candidate points; absorbs rounding in
/// the projection formulas but never exceeds the caller's tolerance.
const ACCEPT_REL: f64 = 1e-10;

const PARALLEL_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub u_hat: Vector,
    pub constraints: Vec<LinearConstraint>,
}

impl QpProblem {
    pub fn new(u_hat: Vector, constraints: Vec<LinearConstraint>) -> Self {
        Self { u_hat, constraints }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QpOutcome {
    Feasible {
        u: Vector,
        /// Indices of the constraints held with equality at `u`.
        active_set: Vec<usize>,
    },
    Infeasible {
        /// Smallest achievable worst-case violation (> tolerance).
        max_violation: f64,
        /// Point attaining `max_violation`.
        point: Vector,
    },
}

impl QpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, QpOutcome::Feasible { .. })
    }

    pub fn solution(&self) -> Option<Vector> {
        match self {
            QpOutcome::Feasible { u, .. } => Some(*u),
            QpOutcome::Infeasible { .. } => None,
        }
    }
}

/// Closed input interval `[lower, upper]`; empty when `lower > upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lower).min(self.upper)
    }
}

/// Constraints with a non-zero coefficient, tagged with their original index.
fn effective_rows(
    constraints: &[LinearConstraint],
    dim: usize,
    tolerance: f64,
) -> Result<(Vec<(usize, LinearConstraint)>, f64)> {
    let mut rows = Vec::with_capacity(constraints.len());
    // worst violation among vacuous rows; they are constant in u
    let mut floor = f64::NEG_INFINITY;
    for (index, c) in constraints.iter().enumerate() {
        if c.dim() != dim {
            return Err(CbfError::DimensionMismatch { expected: dim, actual: c.dim() });
        }
        if c.g.norm_sq() == 0.0 {
            if c.b < -tolerance {
                return Err(CbfError::DegenerateConstraint { index, b: c.b });
            }
            floor = floor.max(-c.b);
        } else {
            rows.push((index, *c));
        }
    }
    Ok((rows, floor))
}

/// Bounds on a scalar input implied by 1D constraints.
pub fn feasible_interval_1d(constraints: &[LinearConstraint]) -> Result<Interval> {
    let (rows, _) = effective_rows(constraints, 1, DEFAULT_TOLERANCE)?;
    let mut interval = Interval { lower: f64::NEG_INFINITY, upper: f64::INFINITY };
    for (_, c) in rows {
        let bound = -c.b / c.g.x();
        if c.g.x() > 0.0 {
            interval.lower = interval.lower.max(bound);
        } else {
            interval.upper = interval.upper.min(bound);
        }
    }
    Ok(interval)
}

struct Candidate {
    u: Vector,
    dist_sq: f64,
    active: Vec<usize>,
}

fn accepts(rows: &[(usize, LinearConstraint)], u: &Vector, tolerance: f64) -> bool {
    let unorm = u.norm();
    rows.iter().all(|(_, c)| {
        let slack = (ACCEPT_REL * (1.0 + c.b.abs() + c.g.norm() * unorm)).min(tolerance);
        c.lhs(u) >= -slack
    })
}

fn max_violation(rows: &[(usize, LinearConstraint)], u: &Vector) -> f64 {
    rows.iter().map(|(_, c)| -c.lhs(u)).fold(f64::NEG_INFINITY, f64::max)
}

/// Solve the 2x2 system `a1 . u = c1`, `a2 . u = c2`.
fn solve_2x2(a1: &Vector, c1: f64, a2: &Vector, c2: f64) -> Option<Vector> {
    let det = a1.x() * a2.y() - a1.y() * a2.x();
    if det.abs() <= PARALLEL_REL * a1.norm() * a2.norm() || det == 0.0 {
        return None;
    }
    Some(Vector::new2((c1 * a2.y() - c2 * a1.y()) / det, (a1.x() * c2 - a2.x() * c1) / det))
}

fn project_onto(u_hat: &Vector, c: &LinearConstraint) -> Vector {
    *u_hat + c.g * ((-c.b - c.g.dot(u_hat)) / c.g.norm_sq())
}

fn candidates(u_hat: &Vector, rows: &[(usize, LinearConstraint)]) -> Vec<Candidate> {
    let mut out = Vec::with_capacity(1 + rows.len() * (rows.len() + 1) / 2);
    let mut push = |u: Vector, active: Vec<usize>| {
        let dist_sq = (u - *u_hat).norm_sq();
        if dist_sq.is_finite() {
            out.push(Candidate { u, dist_sq, active });
        }
    };
    for (k, c) in rows {
        push(project_onto(u_hat, c), vec![*k]);
    }
    if u_hat.dim() == 2 {
        for (a, (k, ck)) in rows.iter().enumerate() {
            for (l, cl) in &rows[a + 1..] {
                if let Some(u) = solve_2x2(&ck.g, -ck.b, &cl.g, -cl.b) {
                    push(u, vec![*k, *l]);
                }
            }
        }
    }
    out.sort_by(|p, q| {
        p.dist_sq.partial_cmp(&q.dist_sq).unwrap_or(Ordering::Equal).then_with(|| p.active.cmp(&q.active))
    });
    out
}

/// Minimizer of the worst-case violation and the value attained there.
fn phase_one(u_hat: &Vector, rows: &[(usize, LinearConstraint)]) -> (f64, Vector, Vec<usize>) {
    let mut best = (max_violation(rows, u_hat), *u_hat, Vec::new());
    let mut consider = |u: Vector, basis: Vec<usize>| {
        let v = max_violation(rows, &u);
        if v < best.0 {
            best = (v, u, basis);
        }
    };

    let scalar = |c: &LinearConstraint, dir: &Vector| c.g.dot(dir);
    let dir = match u_hat.dim() {
        1 => Some(Vector::new1(1.0)),
        _ => {
            // all coefficients parallel: the problem is one-dimensional
            let g0 = rows.first().map(|(_, c)| c.g);
            g0.filter(|g0| {
                rows.iter().all(|(_, c)| g0.cross(&c.g).abs() <= PARALLEL_REL * g0.norm() * c.g.norm())
            })
            .map(|g0| g0 / g0.norm())
        }
    };

    if let Some(dir) = dir {
        // equalize two rows: -s_k t - b_k = -s_l t - b_l along `dir`
        let base = *u_hat - dir * u_hat.dot(&dir);
        for (a, (k, ck)) in rows.iter().enumerate() {
            for (l, cl) in &rows[a + 1..] {
                let (sk, sl) = (scalar(ck, &dir), scalar(cl, &dir));
                if sk != sl {
                    let t = (ck.b - cl.b) / (sl - sk);
                    consider(base + dir * t, vec![*k, *l]);
                }
            }
        }
    } else {
        // basic points of min t s.t. g_k . u + b_k + t >= 0: three rows tight
        for (a, (k, ck)) in rows.iter().enumerate() {
            for (b, (l, cl)) in rows.iter().enumerate().skip(a + 1) {
                for (m, cm) in &rows[b + 1..] {
                    let sol = solve_2x2(&(cl.g - ck.g), ck.b - cl.b, &(cm.g - ck.g), ck.b - cm.b);
                    if let Some(u) = sol {
                        consider(u, vec![*k, *l, *m]);
                    }
                }
            }
        }
    }
    best
}

/// Project `problem.u_hat` onto the feasible set, or certify that the set
/// is empty up to `tolerance`.
pub fn solve(problem: &QpProblem, tolerance: f64) -> Result<QpOutcome> {
    let u_hat = problem.u_hat;
    let dim = u_hat.dim();
    let (rows, floor) = effective_rows(&problem.constraints, dim, tolerance)?;

    if accepts(&rows, &u_hat, tolerance) {
        return Ok(QpOutcome::Feasible { u: u_hat, active_set: Vec::new() });
    }
    if let Some(best) = candidates(&u_hat, &rows).into_iter().find(|c| accepts(&rows, &c.u, tolerance)) {
        return Ok(QpOutcome::Feasible { u: best.u, active_set: best.active });
    }

    let (value, point, basis) = phase_one(&u_hat, &rows);
    let value = value.max(floor);
    if value <= tolerance {
        Ok(QpOutcome::Feasible { u: point, active_set: basis })
    } else {
        Ok(QpOutcome::Infeasible { max_violation: value, point })
    }
}
