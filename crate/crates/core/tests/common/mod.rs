//! Closed-form reference formulas written directly over `[f64; 2]`, plus
//! random state generators shared by the integration tests.
#![allow(dead_code)]

use cbf_swarm::{CbfParams, PairState, RobotState, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub mod qp_oracle;

pub const TABLE1: CbfParams = CbfParams { r_s: 0.5, gamma: 2.0, t_c: 0.025 };
pub const TABLE2: CbfParams = CbfParams { r_s: 0.08, gamma: 1.0, t_c: 0.025 };

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn vec_of(a: [f64; 2], dim: usize) -> Vector {
    Vector::from_slice(&a[..dim]).unwrap()
}

pub fn arr(v: &Vector) -> [f64; 2] {
    [v.x(), v.y()]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: [f64; 2]) -> f64 {
    dot(a, a).sqrt()
}

/// `(y vx - x vy)^2 / |x|^3`.
fn tangential(x: [f64; 2], v: [f64; 2]) -> f64 {
    let c = x[1] * v[0] - x[0] * v[1];
    c * c / norm(x).powi(3)
}

pub fn h(x: [f64; 2], v: [f64; 2], p: &CbfParams) -> f64 {
    norm(x) + dot(v, x) / norm(x) * p.t_c - p.r_s
}

pub fn lie_f_h(x: [f64; 2], v: [f64; 2], p: &CbfParams) -> f64 {
    dot(v, x) / norm(x) + tangential(x, v) * p.t_c
}

pub fn lie_g_h(x: [f64; 2], p: &CbfParams, m: f64) -> [f64; 2] {
    let n = norm(x);
    [x[0] / n * p.t_c / m, x[1] / n * p.t_c / m]
}

/// Pairwise condition `L_f h + L_g h (u_j - u_i) + gamma h`.
pub fn pairwise(x: [f64; 2], v: [f64; 2], ui: [f64; 2], uj: [f64; 2], p: &CbfParams, m: f64) -> f64 {
    let lg = lie_g_h(x, p, m);
    lie_f_h(x, v, p) + dot(lg, [uj[0] - ui[0], uj[1] - ui[1]]) + p.gamma * h(x, v, p)
}

/// Constant term of robot `i`'s proposed constraint.
pub fn proposed_b(vi: [f64; 2], x: [f64; 2], v: [f64; 2], p: &CbfParams) -> f64 {
    let n = norm(x);
    let own = dot(vi, x) / n;
    -2.0 * own + tangential(x, v) * p.t_c + p.gamma * (n - 2.0 * own * p.t_c - p.r_s)
}

/// Left-hand side `-2 L_g h . u + b`.
pub fn lhs(x: [f64; 2], p: &CbfParams, m: f64, u: [f64; 2], b: f64) -> f64 {
    let lg = lie_g_h(x, p, m);
    -2.0 * dot(lg, u) + b
}

/// `(w1, w2)` of the proposed split.
pub fn proposed_weights(vi: [f64; 2], x: [f64; 2], v: [f64; 2], p: &CbfParams) -> (f64, f64) {
    let n = norm(x);
    let own = dot(vi, x) / n;
    let w1 = (-2.0 * own + tangential(x, v) * p.t_c) / lie_f_h(x, v, p);
    let w2 = (n - 2.0 * own * p.t_c - p.r_s) / h(x, v, p);
    (w1, w2)
}

pub fn in_dim(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> [f64; 2] {
    let mut a = [0.0; 2];
    for c in a.iter_mut().take(dim) {
        *c = rng.random_range(lo..hi);
    }
    a
}

/// Vector of the given length in a random direction.
pub fn with_norm(rng: &mut ChaCha8Rng, dim: usize, len: f64) -> [f64; 2] {
    if dim == 1 {
        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        return [s * len, 0.0];
    }
    let a = rng.random_range(0.0..std::f64::consts::TAU);
    [len * a.cos(), len * a.sin()]
}

/// Two robots `len` apart with speeds up to `max_speed`.
pub fn robot_pair(rng: &mut ChaCha8Rng, dim: usize, len: f64, max_speed: f64) -> (RobotState, RobotState) {
    let xi = in_dim(rng, dim, -50.0, 50.0);
    let off = with_norm(rng, dim, len);
    let xj = [xi[0] + off[0], xi[1] + off[1]];
    let (si, sj) = (rng.random_range(0.0..max_speed), rng.random_range(0.0..max_speed));
    let vi = with_norm(rng, dim, si);
    let vj = with_norm(rng, dim, sj);
    (RobotState::new(vec_of(xi, dim), vec_of(vi, dim)), RobotState::new(vec_of(xj, dim), vec_of(vj, dim)))
}

pub fn pair(a: &RobotState, b: &RobotState) -> PairState {
    cbf_swarm::dynamics::pair_state(a, b)
}

/// Property-test settings with a fixed seed so every run sees the same cases.
pub fn fixed_cases(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x00c0_ffee),
        failure_persistence: None,
        ..Default::default()
    }
}
