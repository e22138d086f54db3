//! Exact-solver integration tests: solver vs solver, solver vs direct
//! enumeration, and the information-state property checker.

mod common;

use common::{flip_toy, minimax_oracle, perfect_toy, uninformative_toy};
use minimax_is::exact::{
    check_dp_equivalence, feasible_observations, initial_range, range_update, sigma_conditional_range,
    sigma_constant, sigma_identity, solve_infostate_dp, solve_memory_dp, verify_information_state,
    SolveBudget,
};
use minimax_is::instances::{random_instance, InstanceConfig, Observability};
use minimax_is::space::PointSet;

#[test]
fn uninformative_toy_has_worst_case_one() {
    // Both actions risk |x - u| = 1 somewhere in the range {0, 1}.
    let model = uninformative_toy();
    let budget = SolveBudget::default();
    let mem = solve_memory_dp(&model, budget).unwrap();
    let info = solve_infostate_dp(&model, budget).unwrap();
    assert_eq!(mem.root_value(0), Some(1.0));
    assert_eq!(info.root_value(0), Some(1.0));
}

#[test]
fn perfect_observation_pins_the_state() {
    let model = perfect_toy();
    let info = solve_infostate_dp(&model, SolveBudget::default()).unwrap();
    // Singleton ranges; V_0(y0) = min_u c(y0, u).
    assert_eq!(info.root_value(0), Some(2.0));
    assert_eq!(info.root_value(1), Some(3.0));
    let r = initial_range(&model, 1).unwrap();
    assert_eq!(r.members, PointSet::singleton(1));
}

#[test]
fn uninformative_initial_range_is_everything() {
    let model = uninformative_toy();
    let r = initial_range(&model, 0).unwrap();
    assert_eq!(r.members, PointSet::new(vec![0, 1]));
}

#[test]
fn infeasible_initial_observation_errors() {
    let mut model = perfect_toy();
    model.initial_states = PointSet::singleton(0);
    let err = initial_range(&model, 1).unwrap_err();
    assert!(err.to_string().contains("inconsistent"));
}

#[test]
fn flip_disturbance_spreads_the_range() {
    let model = flip_toy();
    let current = PointSet::singleton(0);
    let next = range_update(&model, 0, &current, 0, 0);
    assert_eq!(next, PointSet::new(vec![0, 1]));
    // Sole observation is always feasible.
    let feas = feasible_observations(&model, 0, &current, 0);
    assert_eq!(feas, PointSet::singleton(0));
}

#[test]
fn range_update_stays_inside_forward_image() {
    let cfg = InstanceConfig::equivalence();
    for seed in 0..20 {
        let model = random_instance(seed, &cfg);
        let info = solve_infostate_dp(&model, SolveBudget::default()).unwrap();
        for t in 0..model.horizon {
            for range in &info.states[t] {
                for u in 0..model.n_actions(t) as u32 {
                    let mut image = Vec::new();
                    for x in range.iter() {
                        for w in 0..model.n_disturbances(t) as u32 {
                            image.push(model.next_state(t, x, u, w));
                        }
                    }
                    let image = PointSet::new(image);
                    for y in feasible_observations(&model, t, range, u).iter() {
                        let next = range_update(&model, t, range, u, y);
                        assert!(next.is_subset(&image));
                        assert!(!next.is_empty());
                    }
                }
            }
        }
    }
}

#[test]
fn memory_and_infostate_agree_on_random_instances() {
    let cfg = InstanceConfig::equivalence();
    for seed in 0..30 {
        let model = random_instance(seed, &cfg);
        let report = check_dp_equivalence(&model, SolveBudget::default()).unwrap();
        assert!(
            report.passed(),
            "seed {seed}: {:?}",
            report.discrepancies.first()
        );
        assert!(report.checked_values > 0);
    }
}

#[test]
fn equality_is_exact_on_integer_costs() {
    // Integer tables stay exact in f64; the checker uses equality, not a
    // tolerance, so any drift would fail here.
    let model = random_instance(123, &InstanceConfig::equivalence());
    let report = check_dp_equivalence(&model, SolveBudget::default()).unwrap();
    assert!(report.passed());
}

#[test]
fn optimal_value_matches_direct_enumeration() {
    let cfg = InstanceConfig::micro();
    let mut compared = 0;
    for seed in 0..25 {
        let model = random_instance(seed, &cfg);
        let info = solve_infostate_dp(&model, SolveBudget::default()).unwrap();
        for y0 in 0..model.n_observations(0) as u32 {
            let oracle = minimax_oracle(&model, y0, false);
            assert_eq!(info.root_value(y0), oracle, "seed {seed}, y0 {y0}");
            if oracle.is_some() {
                compared += 1;
            }
        }
    }
    assert!(compared > 10);
}

#[test]
fn policy_attains_recorded_value() {
    let model = random_instance(7, &InstanceConfig::equivalence());
    let info = solve_infostate_dp(&model, SolveBudget::default()).unwrap();
    for t in 0..=model.horizon {
        for sid in 0..info.states[t].len() {
            let u = info.policy[t][sid] as usize;
            assert_eq!(info.q[t][sid][u], info.v[t][sid]);
        }
    }
}

#[test]
fn solver_is_deterministic() {
    let model = random_instance(99, &InstanceConfig::equivalence());
    let a = solve_infostate_dp(&model, SolveBudget::default()).unwrap();
    let b = solve_infostate_dp(&model, SolveBudget::default()).unwrap();
    assert_eq!(a.states, b.states);
    assert_eq!(a.q, b.q);
    assert_eq!(a.v, b.v);
    assert_eq!(a.policy, b.policy);
    assert_eq!(a.roots, b.roots);
}

#[test]
fn memory_budget_guard_trips() {
    let model = random_instance(3, &InstanceConfig::equivalence());
    let err = solve_memory_dp(&model, SolveBudget { max_nodes: 2 }).unwrap_err();
    assert!(matches!(err, minimax_is::Error::Capacity { .. }));
    assert!(err.to_string().contains("info-state"));
}

#[test]
fn conditional_range_and_identity_are_information_states() {
    for seed in [1, 17, 42] {
        let model = random_instance(seed, &InstanceConfig::equivalence());
        let budget = SolveBudget::default();
        let range_report =
            verify_information_state(&model, sigma_conditional_range, budget).unwrap();
        assert!(range_report.passed(), "range candidate failed: {range_report:?}");
        let id_report = verify_information_state(&model, sigma_identity, budget).unwrap();
        assert!(id_report.passed(), "identity candidate failed");
    }
}

#[test]
fn constant_map_fails_with_terminal_witness() {
    // Perfect observation separates states with different optimal costs;
    // collapsing all memories to one encoding must fail the terminal-cost
    // property.
    let model = perfect_toy();
    let report =
        verify_information_state(&model, sigma_constant, SolveBudget::default()).unwrap();
    assert!(!report.terminal_cost_property.passed());
    let witness = report.terminal_cost_property.witness.unwrap();
    assert_eq!(witness.t, 0);
}
