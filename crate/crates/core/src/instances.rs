//! Seeded random instances for randomized verification suites.

use crate::metric::MetricTable;
use crate::model::SystemModel;
use crate::space::{FiniteSpace, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observability {
    /// Y_t = X_t and every observation reveals the state.
    Perfect,
    /// Fully random observation channel.
    Partial,
    /// Partial, but with a persistence disturbance slice (w = 0 keeps the
    /// state) and a faithful observation slice (n = 0 reports the state,
    /// with the observation space extending the state space). This keeps
    /// the dynamics and observation Lipschitz constants at least 1, the
    /// regime in which the closed-form gap formulas dominate measured gaps.
    PartialAnchored,
}

#[derive(Debug, Clone)]
pub struct InstanceConfig {
    pub max_states: usize,
    pub max_actions: usize,
    pub max_disturbances: usize,
    pub max_noises: usize,
    pub max_horizon: usize,
    pub max_cost: u32,
    pub observability: Observability,
    pub with_step_costs: bool,
}

impl InstanceConfig {
    /// Caps used by the randomized equivalence suite.
    pub fn equivalence() -> Self {
        Self {
            max_states: 4,
            max_actions: 3,
            max_disturbances: 3,
            max_noises: 3,
            max_horizon: 4,
            max_cost: 20,
            observability: Observability::Partial,
            with_step_costs: false,
        }
    }

    /// Caps used by the bound suites (anchored channel, see
    /// [`Observability::PartialAnchored`]).
    pub fn bounds() -> Self {
        Self {
            observability: Observability::PartialAnchored,
            ..Self::equivalence()
        }
    }

    /// Micro caps for strategy-enumeration oracles.
    pub fn micro() -> Self {
        Self {
            max_states: 3,
            max_actions: 2,
            max_disturbances: 2,
            max_noises: 2,
            max_horizon: 2,
            max_cost: 9,
            observability: Observability::Partial,
            with_step_costs: false,
        }
    }
}

fn sample_dim(rng: &mut ChaCha8Rng, max: usize) -> usize {
    if max <= 1 {
        1
    } else {
        rng.gen_range(2..=max)
    }
}

/// Draws a well-formed instance with line metrics on every space. Spaces
/// are time-invariant; tables are drawn independently per step. The same
/// seed always yields the same instance.
pub fn random_instance(seed: u64, cfg: &InstanceConfig) -> SystemModel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_states = sample_dim(&mut rng, cfg.max_states);
    let n_actions = sample_dim(&mut rng, cfg.max_actions);
    let n_disturbances = sample_dim(&mut rng, cfg.max_disturbances);
    let n_noises = sample_dim(&mut rng, cfg.max_noises);
    let horizon = rng.gen_range(1..=cfg.max_horizon.max(1));
    let n_observations = match cfg.observability {
        Observability::Perfect | Observability::PartialAnchored => n_states,
        Observability::Partial => sample_dim(&mut rng, n_states.max(2)),
    };

    let stages = horizon + 1;
    let mut dynamics = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut per_state = Vec::with_capacity(n_states);
        for x in 0..n_states {
            let mut per_action = Vec::with_capacity(n_actions);
            for _ in 0..n_actions {
                let mut per_w = Vec::with_capacity(n_disturbances);
                for w in 0..n_disturbances {
                    let persist = cfg.observability == Observability::PartialAnchored && w == 0;
                    per_w.push(if persist {
                        x as u32
                    } else {
                        rng.gen_range(0..n_states as u32)
                    });
                }
                per_action.push(per_w);
            }
            per_state.push(per_action);
        }
        dynamics.push(per_state);
    }

    let mut observation = Vec::with_capacity(stages);
    for _ in 0..stages {
        let mut per_state = Vec::with_capacity(n_states);
        for x in 0..n_states {
            let mut per_noise = Vec::with_capacity(n_noises);
            for n in 0..n_noises {
                per_noise.push(match cfg.observability {
                    Observability::Perfect => x as u32,
                    Observability::PartialAnchored if n == 0 => x as u32,
                    _ => rng.gen_range(0..n_observations as u32),
                });
            }
            per_state.push(per_noise);
        }
        observation.push(per_state);
    }

    let cost_table = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..n_states)
            .map(|_| {
                (0..n_actions)
                    .map(|_| f64::from(rng.gen_range(0..=cfg.max_cost)))
                    .collect()
            })
            .collect()
    };
    let terminal_cost = cost_table(&mut rng);
    let step_costs = cfg
        .with_step_costs
        .then(|| (0..horizon).map(|_| cost_table(&mut rng)).collect());

    let mut initial: Vec<u32> = (0..n_states as u32).filter(|_| rng.gen_bool(0.5)).collect();
    if initial.is_empty() {
        initial.push(rng.gen_range(0..n_states as u32));
    }

    let model = SystemModel {
        horizon,
        state_spaces: vec![FiniteSpace::indexed(n_states); stages],
        action_spaces: vec![FiniteSpace::indexed(n_actions); stages],
        disturbance_spaces: vec![FiniteSpace::indexed(n_disturbances); stages],
        noise_spaces: vec![FiniteSpace::indexed(n_noises); stages],
        observation_spaces: vec![FiniteSpace::indexed(n_observations); stages],
        dynamics,
        observation,
        terminal_cost,
        step_costs,
        initial_states: PointSet::new(initial),
        state_metrics: vec![MetricTable::line(n_states); stages],
        observation_metrics: vec![MetricTable::line(n_observations); stages],
    };
    debug_assert!(model.validate().is_empty());
    model
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let cfg = InstanceConfig::equivalence();
        let a = random_instance(7, &cfg);
        let b = random_instance(7, &cfg);
        assert_eq!(a.dynamics, b.dynamics);
        assert_eq!(a.observation, b.observation);
        assert_eq!(a.terminal_cost, b.terminal_cost);
        assert_eq!(a.initial_states, b.initial_states);
    }

    #[test]
    fn instances_are_valid() {
        for seed in 0..50 {
            for cfg in [
                InstanceConfig::equivalence(),
                InstanceConfig::bounds(),
                InstanceConfig::micro(),
            ] {
                let m = random_instance(seed, &cfg);
                assert!(m.validate().is_empty(), "seed {seed}");
            }
        }
    }

    #[test]
    fn perfect_instances_reveal_the_state() {
        let cfg = InstanceConfig {
            observability: Observability::Perfect,
            ..InstanceConfig::equivalence()
        };
        for seed in 0..20 {
            assert!(random_instance(seed, &cfg).is_perfectly_observed());
        }
    }

    #[test]
    fn anchored_instances_have_persistence_and_faithful_slices() {
        let cfg = InstanceConfig::bounds();
        for seed in 0..20 {
            let m = random_instance(seed, &cfg);
            for t in 0..m.horizon {
                for x in 0..m.n_states(t) as u32 {
                    for u in 0..m.n_actions(t) as u32 {
                        assert_eq!(m.next_state(t, x, u, 0), x);
                    }
                }
            }
            for t in 0..=m.horizon {
                for x in 0..m.n_states(t) as u32 {
                    assert_eq!(m.observe(t, x, 0), x);
                }
            }
        }
    }
}
