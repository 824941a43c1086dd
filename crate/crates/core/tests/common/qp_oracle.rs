//! Reference answers for small projection problems onto half-planes
//! `g . u + b >= 0` in one or two dimensions.
//!
//! Feasibility is decided by Fourier-Motzkin elimination; the projection
//! by enumerating KKT points over every active set of at most two rows.

use cbf_swarm::{LinearConstraint, QpProblem, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct Row {
    pub g: [f64; 2],
    pub b: f64,
}

impl Row {
    pub fn lhs(&self, u: [f64; 2]) -> f64 {
        self.g[0] * u[0] + self.g[1] * u[1] + self.b
    }
}

pub fn rows_of(problem: &QpProblem) -> Vec<Row> {
    problem.constraints.iter().map(|c| Row { g: [c.g.x(), c.g.y()], b: c.b }).collect()
}

const ZERO: f64 = 1e-14;

/// Is there a `u` with `g . u + b + slack >= 0` for every row?
pub fn fm_feasible(rows: &[Row], slack: f64) -> bool {
    let rows: Vec<Row> = rows.iter().map(|r| Row { g: r.g, b: r.b + slack }).collect();
    // eliminate u_y
    let mut reduced: Vec<(f64, f64)> = Vec::new();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for r in &rows {
        if r.g[1].abs() <= ZERO * (1.0 + r.g[0].abs()) {
            reduced.push((r.g[0], r.b));
        } else if r.g[1] > 0.0 {
            pos.push(*r);
        } else {
            neg.push(*r);
        }
    }
    for p in &pos {
        for n in &neg {
            let (sp, sn) = (1.0 / p.g[1], -1.0 / n.g[1]);
            reduced.push((p.g[0] * sp + n.g[0] * sn, p.b * sp + n.b * sn));
        }
    }
    // one variable left
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (a, c) in reduced {
        if a.abs() <= ZERO * (1.0 + c.abs()) {
            if c < -ZERO {
                return false;
            }
        } else if a > 0.0 {
            lo = lo.max(-c / a);
        } else {
            hi = hi.min(-c / a);
        }
    }
    lo <= hi + 1e-12 * (1.0 + lo.abs().max(hi.abs()))
}

fn satisfies_all(rows: &[Row], u: [f64; 2]) -> bool {
    rows.iter().all(|r| {
        let scale = 1.0 + r.b.abs() + (r.g[0].abs() + r.g[1].abs()) * (u[0].abs() + u[1].abs());
        r.lhs(u) >= -1e-11 * scale
    })
}

/// Closest point to `u_hat` satisfying every row exactly, or `None` if the
/// rows have no common point.
pub fn kkt_projection(u_hat: [f64; 2], rows: &[Row]) -> Option<[f64; 2]> {
    if satisfies_all(rows, u_hat) {
        return Some(u_hat);
    }
    let mut best: Option<([f64; 2], f64)> = None;
    let mut consider = |u: [f64; 2]| {
        if satisfies_all(rows, u) {
            let d = (u[0] - u_hat[0]).powi(2) + (u[1] - u_hat[1]).powi(2);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((u, d));
            }
        }
    };
    for r in rows {
        let gg = r.g[0] * r.g[0] + r.g[1] * r.g[1];
        if gg == 0.0 {
            continue;
        }
        let lam = -r.lhs(u_hat) / gg;
        if lam >= 0.0 {
            consider([u_hat[0] + lam * r.g[0], u_hat[1] + lam * r.g[1]]);
        }
    }
    for (i, a) in rows.iter().enumerate() {
        for c in &rows[i + 1..] {
            // u = u_hat + la a.g + lc c.g with both rows active
            let (aa, ac, cc) = (
                a.g[0] * a.g[0] + a.g[1] * a.g[1],
                a.g[0] * c.g[0] + a.g[1] * c.g[1],
                c.g[0] * c.g[0] + c.g[1] * c.g[1],
            );
            let det = aa * cc - ac * ac;
            if det.abs() <= 1e-12 * aa * cc {
                continue;
            }
            let (ra, rc) = (-a.lhs(u_hat), -c.lhs(u_hat));
            let la = (ra * cc - rc * ac) / det;
            let lc = (rc * aa - ra * ac) / det;
            if la >= 0.0 && lc >= 0.0 {
                consider([u_hat[0] + la * a.g[0] + lc * c.g[0], u_hat[1] + la * a.g[1] + lc * c.g[1]]);
            }
        }
    }
    best.map(|(u, _)| u)
}

fn direction(rng: &mut ChaCha8Rng, dim: usize) -> [f64; 2] {
    if dim == 1 {
        return [if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0];
    }
    let a = rng.random_range(0.0..std::f64::consts::TAU);
    [a.cos(), a.sin()]
}

/// Random problem with up to `max_rows` constraints. About half are built
/// around a known feasible point; some rows share a direction.
pub fn random_problem(rng: &mut ChaCha8Rng, dim: usize, max_rows: usize) -> QpProblem {
    let n = rng.random_range(0..=max_rows);
    let anchored = rng.random_bool(0.5);
    let u0 = [rng.random_range(-5.0..5.0), if dim == 2 { rng.random_range(-5.0..5.0) } else { 0.0 }];
    let mut rows: Vec<Row> = Vec::with_capacity(n);
    for _ in 0..n {
        let dir = if !rows.is_empty() && rng.random_bool(0.15) {
            let prev = rows[rng.random_range(0..rows.len())].g;
            let len = (prev[0] * prev[0] + prev[1] * prev[1]).sqrt();
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            [s * prev[0] / len, s * prev[1] / len]
        } else {
            direction(rng, dim)
        };
        let mag = if rng.random_bool(0.3) { 0.05 } else { rng.random_range(0.05..3.0) };
        let g = [dir[0] * mag, dir[1] * mag];
        let b = if anchored {
            let s = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..2.0) };
            -(g[0] * u0[0] + g[1] * u0[1]) + s
        } else {
            rng.random_range(-3.0..3.0)
        };
        rows.push(Row { g, b });
    }
    let u_hat = [rng.random_range(-10.0..10.0), if dim == 2 { rng.random_range(-10.0..10.0) } else { 0.0 }];
    let v = |a: [f64; 2]| Vector::from_slice(&a[..dim]).unwrap();
    QpProblem::new(v(u_hat), rows.iter().map(|r| LinearConstraint::new(v(r.g), r.b)).collect())
}

/// Compare `qp::solve` against the oracles on one problem.
pub fn check(problem: &QpProblem, tolerance: f64) -> Result<(), String> {
    let rows = rows_of(problem);
    let u_hat = arr2(&problem.u_hat);
    let outcome = cbf_swarm::qp::solve(problem, tolerance).map_err(|e| e.to_string())?;
    let expect_feasible = fm_feasible(&rows, tolerance);
    if outcome.is_feasible() != expect_feasible {
        return Err(format!("verdict {} but oracle says {expect_feasible}", outcome.is_feasible()));
    }
    let Some(u) = outcome.solution() else { return Ok(()) };
    let got = arr2(&u);
    for (k, r) in rows.iter().enumerate() {
        if r.lhs(got) < -tolerance {
            return Err(format!("row {k} violated by {}", -r.lhs(got)));
        }
    }
    // within the tolerance band only re-verification applies
    if let Some(want) = kkt_projection(u_hat, &rows) {
        let err = (got[0] - want[0]).abs().max((got[1] - want[1]).abs());
        if err > 1e-6 {
            return Err(format!("solution {got:?} vs oracle {want:?}"));
        }
    }
    Ok(())
}

fn arr2(v: &Vector) -> [f64; 2] {
    [v.x(), v.y()]
}
