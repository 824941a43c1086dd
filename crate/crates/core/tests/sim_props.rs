mod common;

use cbf_swarm::dynamics::{nominal_input, step_dynamics};
use cbf_swarm::qp::DEFAULT_TOLERANCE;
use cbf_swarm::sim::{self, make_1d_scenario, make_circle_scenario, run_scenario, LINE_CBF};
use cbf_swarm::{CbfError, PhysicalParams, RobotState, Scenario, StrategyKind, Vector};
use common::*;
use proptest::prelude::*;

fn small_circle(n: usize, strategy: StrategyKind, steps: usize, seed: u64) -> Scenario {
    let mut s = make_circle_scenario(n, 1.0, TABLE2, strategy).unwrap();
    s.steps = steps;
    s.seed = seed;
    s
}

#[test]
fn line_scenario_stays_mirror_symmetric() {
    for strategy in StrategyKind::ALL {
        let trace = run_scenario(&make_1d_scenario(LINE_CBF, strategy)).unwrap();
        for r in &trace.records {
            let x: Vec<f64> = r.states.iter().map(|s| s.position.x()).collect();
            assert!((x[0] + x[2]).abs() < 1e-9, "{strategy:?} at t={}: {x:?}", r.t);
            assert!(x[1].abs() < 1e-9);
        }
    }
}

#[test]
fn line_trace_shape() {
    let trace = run_scenario(&make_1d_scenario(LINE_CBF, StrategyKind::Symmetric)).unwrap();
    assert_eq!(trace.records.len(), 320);
    for (k, r) in trace.records.iter().enumerate() {
        assert_eq!(r.step, k);
        assert!((r.t - k as f64 * 0.025).abs() < 1e-12);
        assert_eq!((r.states.len(), r.applied_u.len(), r.feasible.len(), r.pairs.len()), (3, 3, 3, 3));
    }
    assert_eq!(trace.records[0].states, trace.scenario.robots);
}

#[test]
fn summary_counts_match_records() {
    for strategy in StrategyKind::ALL {
        let trace = run_scenario(&small_circle(8, strategy, 120, 3)).unwrap();
        let bad: Vec<_> = trace.records.iter().filter(|r| !r.all_feasible()).collect();
        assert_eq!(trace.no_solution_steps, bad.len());
        assert_eq!(trace.first_infeasible_time, bad.first().map(|r| r.t));
        let lhs = trace.records.iter().map(|r| r.min_constraint_lhs).fold(f64::INFINITY, f64::min);
        assert_eq!(trace.min_constraint_lhs(), lhs);
    }
}

#[test]
fn runs_are_deterministic() {
    let s = small_circle(10, StrategyKind::ProposedAsymmetric, 60, 11);
    assert_eq!(run_scenario(&s).unwrap(), run_scenario(&s).unwrap());
    let other = Scenario { seed: 12, ..s.clone() };
    assert_ne!(s.initial_states(), other.initial_states());
}

#[test]
fn perturbation_stays_in_bounds() {
    let s = small_circle(20, StrategyKind::Symmetric, 1, 5);
    for (a, b) in s.robots.iter().zip(s.initial_states()) {
        let d = b.position - a.position;
        let v = b.velocity - a.velocity;
        for c in [d.x(), d.y(), v.x(), v.y()] {
            assert!(c.abs() <= s.perturbation);
        }
    }
}

#[test]
fn lone_robot_follows_nominal_input() {
    let params = PhysicalParams { m: 2.0, k: 1.0, c: 0.3, goal: Vector::new2(1.0, -1.0) };
    let start = RobotState::new(Vector::new2(-1.0, 2.0), Vector::new2(0.5, 0.0));
    let s = Scenario {
        robots: vec![start],
        params: vec![params],
        steps: 50,
        ..small_circle(2, StrategyKind::ProposedAsymmetric, 50, 0)
    };
    let trace = run_scenario(&Scenario { perturbation: 0.0, ..s }).unwrap();
    let mut want = start;
    for r in &trace.records {
        assert_eq!(r.states[0], want);
        assert!(r.feasible[0] && r.pairs.is_empty());
        want = step_dynamics(&want, nominal_input(&want, &params), params.m, 0.025);
    }
}

#[test]
fn resting_robots_stay_put() {
    let robots: Vec<RobotState> = (0..4)
        .map(|k| RobotState::new(Vector::new2(k as f64, 0.5 * k as f64), Vector::new2(0.0, 0.0)))
        .collect();
    let params = robots.iter().map(|r| PhysicalParams { m: 1.0, k: 1.0, c: 0.3, goal: r.position }).collect();
    let s = Scenario {
        robots: robots.clone(),
        params,
        perturbation: 0.0,
        steps: 30,
        ..small_circle(4, StrategyKind::Symmetric, 30, 0)
    };
    let trace = run_scenario(&s).unwrap();
    assert_eq!(trace.no_solution_steps, 0);
    assert_eq!(trace.records.last().unwrap().states, robots);
}

#[test]
fn invalid_scenarios_are_rejected() {
    let s = make_1d_scenario(LINE_CBF, StrategyKind::Symmetric);
    let mut tight = s.clone();
    tight.robots[1].position = Vector::new1(-9.8);
    assert!(matches!(run_scenario(&tight), Err(CbfError::SpacingTooTight(0, 1))));
    assert!(run_scenario(&s.with_gamma(-1.0)).is_err());
    assert!(make_circle_scenario(60, 0.5, TABLE2, StrategyKind::Symmetric).is_err());
    assert!(make_circle_scenario(1, 1.0, TABLE2, StrategyKind::Symmetric).is_err());
}

#[test]
fn batch_bookkeeping() {
    let base = small_circle(6, StrategyKind::Symmetric, 80, 100);
    let report = sim::run_table3(&base, 3, &[0.5, 5.0]).unwrap();
    assert_eq!(report.cells.len(), 6);
    for cell in &report.cells {
        assert_eq!(cell.summaries.len(), 3);
        assert_eq!(
            cell.no_solution_trials,
            cell.summaries.iter().filter(|s| s.no_solution_steps > 0).count()
        );
        assert_eq!(cell.min_lhs_series.len(), 80);
        for (k, s) in cell.summaries.iter().enumerate() {
            assert_eq!((s.trial, s.seed), (k, sim::trial_seed(100, k)));
            let run = Scenario { seed: s.seed, ..base.with_strategy(cell.strategy).with_gamma(cell.gamma) };
            let trace = run_scenario(&run).unwrap();
            assert_eq!(trace.no_solution_steps, s.no_solution_steps);
            assert_eq!(trace.min_constraint_lhs(), s.min_constraint_lhs);
        }
        let series_min = cell.min_lhs_series.iter().copied().fold(f64::INFINITY, f64::min);
        let trial_min = cell.summaries.iter().map(|s| s.min_constraint_lhs).fold(f64::INFINITY, f64::min);
        assert_eq!(series_min, trial_min);
    }
    assert!(report.cell(StrategyKind::PreviousAsymmetric, 5.0).is_some());
    assert!(sim::run_batch(&base, 0, &[1.0]).is_err());
    assert!(sim::run_batch(&base, 1, &[]).is_err());
}

prop_compose! {
    /// A few robots on a coarse grid, so none start inside the safe distance.
    fn scattered()(dim in 1usize..=2, cells in proptest::collection::btree_set(0usize..36, 2..6),
                   vel in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6),
                   goal in (-1.0..1.0f64, -1.0..1.0f64))
        -> Vec<(RobotState, PhysicalParams)>
    {
        cells.into_iter().zip(vel).map(|(c, v)| {
            let (gx, gy) = ((c % 6) as f64, (c / 6) as f64);
            let pos = if dim == 1 { [c as f64 * 0.3, 0.0] } else { [gx * 0.3, gy * 0.3] };
            let state = RobotState::new(vec_of(pos, dim), vec_of([v.0, v.1], dim));
            (state, PhysicalParams { m: 1.0, k: 1.0, c: 0.3, goal: vec_of([goal.0 + 0.8, goal.1 + 0.8], dim) })
        }).collect()
    }
}

proptest! {
    #![proptest_config(fixed_cases(64))]

    /// Every robot that found a solution meets each of its raw constraints
    /// to the solver tolerance; the others applied the braking input.
    #[test]
    fn applied_inputs_respect_constraints(robots in scattered(), s in 0usize..3, gamma in 0.5..5.0f64) {
        let strategy = StrategyKind::ALL[s];
        let base = small_circle(2, strategy, 60, 0);
        let scenario = Scenario {
            robots: robots.iter().map(|r| r.0).collect(),
            params: robots.iter().map(|r| r.1).collect(),
            perturbation: 0.0,
            ..base.with_gamma(gamma)
        };
        let trace = run_scenario(&scenario).unwrap();
        for r in &trace.records {
            for i in 0..r.states.len() {
                let cs = sim::robot_constraints(&r.states, &scenario, i).unwrap();
                if r.feasible[i] {
                    for c in &cs {
                        prop_assert!(c.lhs(&r.applied_u[i]) >= -DEFAULT_TOLERANCE);
                    }
                } else {
                    let brake = cbf_swarm::decentralize::fallback_input(&r.states[i], &scenario.cbf, 1.0);
                    prop_assert_eq!(r.applied_u[i], brake);
                }
            }
        }
    }

    /// The proposed strategy keeps the augmented barrier essentially
    /// non-negative on runs where every step was solvable.
    #[test]
    fn proposed_feasible_runs_keep_barrier(seed in 0u64..1000, gamma in 0.5..5.0f64) {
        let s = small_circle(8, StrategyKind::ProposedAsymmetric, 150, seed).with_gamma(gamma);
        let trace = run_scenario(&s).unwrap();
        prop_assume!(trace.no_solution_steps == 0);
        for p in trace.records.iter().flat_map(|r| &r.pairs) {
            prop_assert!(p.h >= -1e-3, "h {} at pair {:?}", p.h, (p.i, p.j));
            prop_assert!(p.distance >= 0.95 * s.cbf.r_s);
        }
    }
}
