//! Additive-cost reduction: augmenting the state with the accumulated cost
//! turns a sum-of-costs criterion into a terminal-cost one.

use crate::error::{Error, Result};
use crate::metric::MetricTable;
use crate::model::SystemModel;
use crate::scalar::{cmp, Scalar};
use crate::space::{FiniteSpace, PointSet};
use std::cmp::Ordering;

/// Per-step augmented state space: every reachable (state, accumulated cost)
/// combination, with the accumulated values materialized exactly by forward
/// enumeration of partial sums. Integer or rational step costs keep the
/// enumeration exact; float costs are deduplicated by exact equality.
#[derive(Debug, Clone)]
pub struct AugmentedLayout<S> {
    /// Distinct accumulated-cost values per step, ascending.
    pub sums: Vec<Vec<S>>,
    /// Augmented index -> (original state, index into `sums[t]`), per step.
    pub pairs: Vec<Vec<(u32, u32)>>,
}

impl<S: Scalar> AugmentedLayout<S> {
    /// Augmented-space index of (x, accumulated-sum index) at step t, if
    /// reachable.
    pub fn index_of(&self, t: usize, x: u32, sum_idx: u32) -> Option<u32> {
        self.pairs[t]
            .binary_search(&(x, sum_idx))
            .ok()
            .map(|i| i as u32)
    }

    pub fn split(&self, t: usize, augmented: u32) -> (u32, S) {
        let (x, a) = self.pairs[t][augmented as usize];
        (x, self.sums[t][a as usize].clone())
    }
}

/// Default per-step cap on |augmented state space|; the reduction is a
/// correctness tool, not the production path.
pub const DEFAULT_AUGMENT_BUDGET: usize = 100_000;

fn sum_index<S: Scalar>(sums: &[S], value: &S) -> Option<u32> {
    sums.binary_search_by(|s| cmp(s, value)).ok().map(|i| i as u32)
}

/// Rewrites an additive-cost model (step costs at t = 0..T-1 plus a terminal
/// cost) as a terminal-cost model over the augmented state (x, accumulated
/// cost). The augmented observation depends only on the x component; the
/// terminal cost is the accumulated sum plus the original terminal cost; the
/// worst-case value of the result equals the worst-case additive value of
/// the original.
pub fn augment_additive<S: Scalar>(
    model: &SystemModel<S>,
    budget_per_step: usize,
) -> Result<(SystemModel<S>, AugmentedLayout<S>)> {
    let step_costs = model.step_costs.as_ref().ok_or(Error::MissingStepCosts)?;
    let t_end = model.horizon;

    // Forward-enumerate reachable (state, partial sum) pairs.
    let mut sums: Vec<Vec<S>> = Vec::with_capacity(t_end + 1);
    let mut pairs: Vec<Vec<(u32, u32)>> = Vec::with_capacity(t_end + 1);
    sums.push(vec![S::zero()]);
    pairs.push((0..model.n_states(0) as u32).map(|x| (x, 0u32)).collect());
    for t in 0..t_end {
        let mut candidate_sums: Vec<S> = Vec::new();
        let mut candidate_pairs: Vec<(u32, S)> = Vec::new();
        for &(x, a_idx) in &pairs[t] {
            let a = sums[t][a_idx as usize].clone();
            for u in 0..model.n_actions(t) as u32 {
                let a_next = a.clone() + step_costs[t][x as usize][u as usize].clone();
                candidate_sums.push(a_next.clone());
                for w in 0..model.n_disturbances(t) as u32 {
                    candidate_pairs.push((model.next_state(t, x, u, w), a_next.clone()));
                }
            }
        }
        candidate_sums.sort_by(cmp);
        candidate_sums.dedup();
        candidate_pairs.sort_by(|(xa, aa), (xb, ab)| xa.cmp(xb).then_with(|| cmp(aa, ab)));
        candidate_pairs.dedup();
        let indexed: Vec<(u32, u32)> = candidate_pairs
            .into_iter()
            .map(|(x, a)| (x, sum_index(&candidate_sums, &a).expect("sum was recorded")))
            .collect();
        if indexed.len() > budget_per_step {
            return Err(Error::Capacity {
                what: format!("augmented state space at t={}", t + 1),
                reached: indexed.len(),
                budget: budget_per_step,
                hint: format!(
                    "partial-sum counts per step so far: {:?}",
                    sums.iter().map(Vec::len).collect::<Vec<_>>()
                ),
            });
        }
        sums.push(candidate_sums);
        pairs.push(indexed);
    }
    let layout = AugmentedLayout { sums, pairs };

    // Spaces and labels.
    let mut state_spaces = Vec::with_capacity(t_end + 1);
    for t in 0..=t_end {
        let labels: Vec<String> = layout.pairs[t]
            .iter()
            .map(|&(x, a_idx)| {
                format!(
                    "{}+{}",
                    model.state_spaces[t].label(x as usize),
                    layout.sums[t][a_idx as usize]
                )
            })
            .collect();
        state_spaces.push(FiniteSpace::new(labels)?);
    }

    // Dynamics carry the accumulated sum; observations only see x.
    let mut dynamics = Vec::with_capacity(t_end);
    for t in 0..t_end {
        let mut per_state = Vec::with_capacity(layout.pairs[t].len());
        for &(x, a_idx) in &layout.pairs[t] {
            let a = layout.sums[t][a_idx as usize].clone();
            let mut per_u = Vec::with_capacity(model.n_actions(t));
            for u in 0..model.n_actions(t) as u32 {
                let a_next = a.clone() + step_costs[t][x as usize][u as usize].clone();
                let a_next_idx =
                    sum_index(&layout.sums[t + 1], &a_next).expect("sum was enumerated");
                let mut per_w = Vec::with_capacity(model.n_disturbances(t));
                for w in 0..model.n_disturbances(t) as u32 {
                    let x_next = model.next_state(t, x, u, w);
                    per_w.push(
                        layout
                            .index_of(t + 1, x_next, a_next_idx)
                            .expect("pair was enumerated"),
                    );
                }
                per_u.push(per_w);
            }
            per_state.push(per_u);
        }
        dynamics.push(per_state);
    }

    let mut observation = Vec::with_capacity(t_end + 1);
    for t in 0..=t_end {
        observation.push(
            layout.pairs[t]
                .iter()
                .map(|&(x, _)| model.observation[t][x as usize].clone())
                .collect::<Vec<_>>(),
        );
    }

    let terminal_cost: Vec<Vec<S>> = layout.pairs[t_end]
        .iter()
        .map(|&(x, a_idx)| {
            let a = layout.sums[t_end][a_idx as usize].clone();
            (0..model.n_actions(t_end))
                .map(|u| a.clone() + model.terminal_cost[x as usize][u].clone())
                .collect()
        })
        .collect();

    // Metric on (x, a): state distance plus accumulated-cost difference.
    // Positive for distinct pairs, symmetric, triangle from both parts.
    let mut state_metrics = Vec::with_capacity(t_end + 1);
    for t in 0..=t_end {
        let base = &model.state_metrics[t];
        let layout_t = &layout.pairs[t];
        let sums_t = &layout.sums[t];
        let n = layout_t.len();
        let mut d = Vec::with_capacity(n * n);
        for &(xi, ai) in layout_t {
            for &(xj, aj) in layout_t {
                let dx = base.get(xi as usize, xj as usize);
                let da = if cmp(&sums_t[ai as usize], &sums_t[aj as usize]) == Ordering::Less {
                    sums_t[aj as usize].clone() - sums_t[ai as usize].clone()
                } else {
                    sums_t[ai as usize].clone() - sums_t[aj as usize].clone()
                };
                d.push(dx + da);
            }
        }
        // Triangle holds structurally: the distance is a sum of two metrics
        // evaluated on paired coordinates.
        state_metrics.push(MetricTable::dense_structural(n, d)?);
    }

    let initial_states: PointSet = model
        .initial_states
        .iter()
        .map(|x| layout.index_of(0, x, 0).expect("initial pair exists"))
        .collect();

    let augmented = SystemModel {
        horizon: t_end,
        state_spaces,
        action_spaces: model.action_spaces.clone(),
        disturbance_spaces: model.disturbance_spaces.clone(),
        noise_spaces: model.noise_spaces.clone(),
        observation_spaces: model.observation_spaces.clone(),
        dynamics,
        observation,
        terminal_cost,
        step_costs: None,
        initial_states,
        state_metrics,
        observation_metrics: model.observation_metrics.clone(),
    };
    let augmented = augmented.into_validated()?;
    Ok((augmented, layout))
}
