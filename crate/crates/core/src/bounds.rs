//! Approximation-gap measurement and worst-case error-bound ledgers.
//!
//! Two gap parameters certify an approximate information state: the terminal
//! gap (worst difference of worst-case terminal costs through the memory vs
//! through the approximate state) and per-step evolution gaps (Hausdorff
//! distance between the successor-state sets predicted from the memory and
//! from the approximate state). The accumulated bound alpha_t = alpha_{t+1}
//! + L_V(t+1) * delta_t, alpha_T = epsilon_T, then bounds every value-table
//! difference, and 2*alpha_0 bounds the realized policy loss.
//!
//! Measured gaps quantify over reachable memories, grouped by the statistic
//! they factor through (the exact range, the (range, approximate-state)
//! pair, or the state itself, per variant); the predicted set compared
//! against is exactly the successor set the approximate DP maximizes over.
//! Theoretical ledgers evaluate the closed-form radius-based formulas with
//! empirically computed Lipschitz constants.

use crate::approx::{
    quantize_range, solve_approx_dp, ApproxKey, ApproxSolution, QuantizationScheme,
    SigmaMode, Variant,
};
use crate::error::{Error, Result};
use crate::exact::{initial_range, successors_by_observation, terminal_q, SolveBudget};
use crate::metric::{hausdorff, hausdorff_with, lipschitz_constant, lipschitz_real, MetricTable};
use crate::model::SystemModel;
use crate::scalar::{abs_diff, cmp, smax, Scalar};
use crate::space::PointSet;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Measured,
    Theoretical,
}

/// Closed-form constants entering the radius formulas (theoretical ledgers
/// only; measuring them needs exhaustive table scans).
#[derive(Debug, Clone)]
pub struct TableLipschitz<S> {
    /// Largest Lipschitz constant of x -> c_T(x, u) over actions.
    pub terminal_cost: S,
    /// Per step t: largest Lipschitz constant of x -> f_t(x, u, w).
    pub dynamics: Vec<S>,
    /// Per step t: largest Lipschitz constant of x -> h_t(x, n).
    pub observation: Vec<S>,
    /// Per step t: Lipschitz constant of the successor-range-set map over
    /// reachable same-step range pairs (Hausdorff base metric); zero for the
    /// perfectly observed variant where it is not used.
    pub range_transition: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct GapWitness {
    pub t: usize,
    pub subject: String,
    pub action: u32,
}

/// Gap parameters, accumulated bounds and the constants they were built
/// from.
#[derive(Debug, Clone)]
pub struct BoundLedger<S> {
    pub provenance: Provenance,
    /// Requested radii per step; the (nonexistent) step T+1 has radius 0 by
    /// convention and is never stored.
    pub gamma: Vec<S>,
    pub epsilon_terminal: S,
    /// Evolution gaps, one per step t = 0..T-1.
    pub deltas: Vec<S>,
    /// Accumulated value-error bounds per step t = 0..=T.
    pub alphas: Vec<S>,
    /// Empirical Lipschitz constants of the computed value tables, per step.
    pub value_lipschitz: Vec<S>,
    pub table_lipschitz: Option<TableLipschitz<S>>,
    pub epsilon_witness: Option<GapWitness>,
    pub delta_witnesses: Vec<Option<GapWitness>>,
}

/// One measured successor-set comparison.
#[derive(Debug, Clone)]
pub struct MeasurementRecord<S> {
    pub t: usize,
    pub subject: String,
    pub action: u32,
    pub k_next: Vec<String>,
    pub k_hat_next: Vec<String>,
    pub gap: S,
}

pub struct MeasuredBounds<S> {
    pub ledger: BoundLedger<S>,
    pub records: Vec<MeasurementRecord<S>>,
    pub records_truncated: bool,
    pub solution: ApproxSolution<S>,
}

const MAX_RECORDS: usize = 20_000;

/// alpha_T = epsilon_T; alpha_t = alpha_{t+1} + L_V(t+1) * delta_t.
pub fn alpha_recursion<S: Scalar>(
    epsilon_terminal: &S,
    deltas: &[S],
    value_lipschitz: &[S],
) -> Vec<S> {
    let t_end = deltas.len();
    let mut alphas = vec![S::zero(); t_end + 1];
    alphas[t_end] = epsilon_terminal.clone();
    for t in (0..t_end).rev() {
        alphas[t] = alphas[t + 1].clone() + value_lipschitz[t + 1].clone() * deltas[t].clone();
    }
    alphas
}

fn key_str(key: &ApproxKey) -> String {
    let members: Vec<String> = key.members.iter().map(|m| m.to_string()).collect();
    match key.y0 {
        Some(y0) => format!("[{}]@y0={y0}", members.join(",")),
        None => format!("[{}]", members.join(",")),
    }
}

fn range_str(range: &PointSet) -> String {
    let members: Vec<String> = range.iter().map(|m| m.to_string()).collect();
    format!("[{}]", members.join(","))
}

/// On-demand distances between the approximate states of one step:
/// Hausdorff distance between member sets, combined by max with the
/// distance between pinned initial observations when present. Computed
/// distances are memoized by member-set pair.
pub struct KeyDistances<'a, S> {
    states: &'a [ApproxKey],
    member_of: Vec<u32>,
    sets: Vec<&'a PointSet>,
    state_metric: &'a MetricTable<S>,
    obs_metric0: &'a MetricTable<S>,
    cache: HashMap<(u32, u32), S>,
}

impl<'a, S: Scalar> KeyDistances<'a, S> {
    pub fn new(
        states: &'a [ApproxKey],
        state_metric: &'a MetricTable<S>,
        obs_metric0: &'a MetricTable<S>,
    ) -> Self {
        let mut set_index: HashMap<&PointSet, u32> = HashMap::new();
        let mut sets: Vec<&PointSet> = Vec::new();
        let mut member_of = Vec::with_capacity(states.len());
        for key in states {
            let id = *set_index.entry(&key.members).or_insert_with(|| {
                sets.push(&key.members);
                (sets.len() - 1) as u32
            });
            member_of.push(id);
        }
        Self {
            states,
            member_of,
            sets,
            state_metric,
            obs_metric0,
            cache: HashMap::new(),
        }
    }

    pub fn dist(&mut self, a: u32, b: u32) -> S {
        let (ma, mb) = (self.member_of[a as usize], self.member_of[b as usize]);
        let key = (ma.min(mb), ma.max(mb));
        let base = match self.cache.get(&key) {
            Some(d) => d.clone(),
            None => {
                let d = hausdorff(
                    self.sets[key.0 as usize],
                    self.sets[key.1 as usize],
                    self.state_metric,
                )
                .expect("approximate states are non-empty");
                self.cache.insert(key, d.clone());
                d
            }
        };
        match (self.states[a as usize].y0, self.states[b as usize].y0) {
            (Some(p), Some(q)) => smax(base, self.obs_metric0.get(p as usize, q as usize)),
            _ => base,
        }
    }

    /// Lower bound on the distance between distinct states.
    fn min_positive(&self) -> S {
        let base = self.state_metric.min_positive();
        let pinned = self.states.iter().any(|k| k.y0.is_some());
        if pinned {
            let obs = self.obs_metric0.min_positive();
            if base == S::zero() {
                obs
            } else if obs == S::zero() {
                base
            } else {
                crate::scalar::smin(base, obs)
            }
        } else {
            base
        }
    }
}

/// Empirical Lipschitz constant of one value table over the approximate
/// states of a step. States are bucketed by exact value and bucket pairs
/// are visited in decreasing value gap, so the scan stops as soon as no
/// remaining pair can beat the current ratio given the minimum positive
/// distance of the metric.
///
/// Exposed so value tables computed in one scalar type can have their
/// constants re-derived in another (e.g. exact rationals over an `f64`
/// solve of an integer-valued model).
pub fn value_lipschitz_step<S: Scalar>(kd: &mut KeyDistances<'_, S>, values: &[S]) -> S {
    let n = values.len();
    if n <= 1 {
        return S::zero();
    }
    // Bucket state ids by exact value, ascending.
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| cmp(&values[a as usize], &values[b as usize]));
    let mut buckets: Vec<(S, Vec<u32>)> = Vec::new();
    for id in order {
        let v = values[id as usize].clone();
        match buckets.last_mut() {
            Some((bv, ids)) if *bv == v => ids.push(id),
            _ => buckets.push((v, vec![id])),
        }
    }
    let d_lower = kd.min_positive();
    let mut best = S::zero();

    // Same-value pairs have ratio zero; distinct-bucket pairs by gap.
    let mut pairs: Vec<(usize, usize, S)> = Vec::new();
    for i in 0..buckets.len() {
        for j in (i + 1)..buckets.len() {
            pairs.push((i, j, buckets[j].0.clone() - buckets[i].0.clone()));
        }
    }
    pairs.sort_by(|a, b| cmp(&b.2, &a.2));
    for (i, j, gap) in pairs {
        if d_lower > S::zero() && cmp(&gap, &(best.clone() * d_lower.clone())) != Ordering::Greater
        {
            break;
        }
        'scan: for &a in &buckets[i].1 {
            for &b in &buckets[j].1 {
                let d = kd.dist(a, b);
                if d == S::zero() {
                    continue;
                }
                let ratio = gap.clone() / d.clone();
                if cmp(&ratio, &best) == Ordering::Greater {
                    best = ratio;
                }
                // This bucket pair cannot do better than gap / d_lower.
                if d_lower > S::zero() && d == d_lower {
                    break 'scan;
                }
            }
        }
    }
    best
}

/// Empirical Lipschitz constants of the computed value tables, one per step.
pub fn value_lipschitz<S: Scalar>(
    model: &SystemModel<S>,
    solution: &ApproxSolution<S>,
) -> Result<Vec<S>> {
    let obs0 = &model.observation_metrics[0];
    let mut out = Vec::with_capacity(solution.horizon + 1);
    for t in 0..=solution.horizon {
        let mut kd = KeyDistances::new(&solution.states[t], &model.state_metrics[t], obs0);
        out.push(value_lipschitz_step(&mut kd, &solution.v[t]));
    }
    Ok(out)
}

struct GapAccumulator<S> {
    deltas: Vec<S>,
    witnesses: Vec<Option<GapWitness>>,
    records: Vec<MeasurementRecord<S>>,
    truncated: bool,
}

impl<S: Scalar> GapAccumulator<S> {
    fn new(t_end: usize) -> Self {
        Self {
            deltas: vec![S::zero(); t_end],
            witnesses: vec![None; t_end],
            records: Vec::new(),
            truncated: false,
        }
    }

    fn record(
        &mut self,
        t: usize,
        subject: String,
        action: u32,
        k: Vec<String>,
        k_hat: Vec<String>,
        gap: S,
    ) {
        if cmp(&gap, &self.deltas[t]) == Ordering::Greater {
            self.deltas[t] = gap.clone();
            self.witnesses[t] = Some(GapWitness {
                t,
                subject: subject.clone(),
                action,
            });
        }
        if self.records.len() < MAX_RECORDS {
            self.records.push(MeasurementRecord {
                t,
                subject,
                action,
                k_next: k,
                k_hat_next: k_hat,
                gap,
            });
        } else {
            self.truncated = true;
        }
    }
}

/// Measures the two gap parameters of the implemented approximate
/// information state against the exact evolution, solving the approximate
/// DP along the way.
pub fn measured_bounds<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
    variant: Variant,
    roots: Option<&[u32]>,
    budget: SolveBudget,
) -> Result<MeasuredBounds<S>> {
    let solution = solve_approx_dp(model, scheme, variant, roots, budget)?;
    let t_end = model.horizon;
    let obs0 = &model.observation_metrics[0];

    let mut key_distances: Vec<KeyDistances<'_, S>> = (0..=t_end)
        .map(|t| KeyDistances::new(&solution.states[t], &model.state_metrics[t], obs0))
        .collect();

    let mut acc = GapAccumulator::new(t_end);
    let mut epsilon = S::zero();
    let mut epsilon_witness = None;
    let mut note_epsilon = |gap: S, subject: String, action: u32| {
        if cmp(&gap, &epsilon) == Ordering::Greater {
            epsilon = gap;
            epsilon_witness = Some(GapWitness {
                t: t_end,
                subject,
                action,
            });
        }
    };

    match variant {
        Variant::PerfectlyObserved => measure_perfect(
            model,
            &solution,
            roots,
            &mut key_distances,
            &mut acc,
            &mut note_epsilon,
        )?,
        Variant::PartiallyObserved {
            sigma: SigmaMode::Recursive,
            ..
        } => measure_recursive(
            model,
            scheme,
            &solution,
            &mut key_distances,
            budget,
            &mut acc,
            &mut note_epsilon,
        )?,
        Variant::PartiallyObserved {
            sigma: SigmaMode::QuantizeExact,
            pin_y0,
        } => measure_quantize_exact(
            model,
            scheme,
            &solution,
            roots,
            pin_y0,
            &mut key_distances,
            budget,
            &mut acc,
            &mut note_epsilon,
        )?,
    }

    // Reuse the memoized distances for the value-table constants.
    let mut value_l = Vec::with_capacity(t_end + 1);
    for (t, kd) in key_distances.iter_mut().enumerate() {
        value_l.push(value_lipschitz_step(kd, &solution.v[t]));
    }
    drop(key_distances);
    let alphas = alpha_recursion(&epsilon, &acc.deltas, &value_l);
    let ledger = BoundLedger {
        provenance: Provenance::Measured,
        gamma: scheme.steps.iter().map(|s| s.gamma.clone()).collect(),
        epsilon_terminal: epsilon,
        deltas: acc.deltas,
        alphas,
        value_lipschitz: value_l,
        table_lipschitz: None,
        epsilon_witness,
        delta_witnesses: acc.witnesses,
    };
    Ok(MeasuredBounds {
        ledger,
        records: acc.records,
        records_truncated: acc.truncated,
        solution,
    })
}

/// Gap between two successor-id sets under the step-(t+1) key metric. The
/// memory-side set is a subset of the state-side set for every implemented
/// variant, so only the extra elements need nearest-distance scans; the
/// general two-sided form covers the rest.
fn id_set_gap<S: Scalar>(k: &[u32], k_hat: &[u32], kd: &mut KeyDistances<'_, S>) -> S {
    let min_to = |kd: &mut KeyDistances<'_, S>, x: u32, set: &[u32]| -> S {
        let mut best: Option<S> = None;
        for &b in set {
            let d = kd.dist(x, b);
            best = Some(match best {
                None => d,
                Some(cur) => crate::scalar::smin(cur, d),
            });
        }
        best.expect("successor sets are non-empty")
    };
    let mut worst = S::zero();
    if k.iter().all(|x| k_hat.binary_search(x).is_ok()) {
        for &a in k_hat {
            if k.binary_search(&a).is_ok() {
                continue;
            }
            let d = min_to(kd, a, k);
            if cmp(&d, &worst) == Ordering::Greater {
                worst = d;
            }
        }
        worst
    } else {
        for &a in k {
            let d = min_to(kd, a, k_hat);
            if cmp(&d, &worst) == Ordering::Greater {
                worst = d;
            }
        }
        for &a in k_hat {
            let d = min_to(kd, a, k);
            if cmp(&d, &worst) == Ordering::Greater {
                worst = d;
            }
        }
        worst
    }
}

fn id_set_strs(ids: &[u32], states: &[ApproxKey]) -> Vec<String> {
    ids.iter().map(|&sid| key_str(&states[sid as usize])).collect()
}

fn measure_perfect<S: Scalar>(
    model: &SystemModel<S>,
    solution: &ApproxSolution<S>,
    roots: Option<&[u32]>,
    key_distances: &mut [KeyDistances<'_, S>],
    acc: &mut GapAccumulator<S>,
    note_epsilon: &mut impl FnMut(S, String, u32),
) -> Result<()> {
    let t_end = model.horizon;
    // Reachable states per step from the root scope.
    let mut reach: Vec<PointSet> = Vec::with_capacity(t_end + 1);
    let first: Vec<u32> = match roots {
        Some(list) => {
            let mut xs = Vec::new();
            for &y0 in list {
                xs.extend(initial_range(model, y0)?.members.iter());
            }
            xs
        }
        None => model.initial_states.iter().collect(),
    };
    reach.push(PointSet::new(first));
    for t in 0..t_end {
        let mut next = Vec::new();
        for x in reach[t].iter() {
            for u in 0..model.n_actions(t) as u32 {
                for w in 0..model.n_disturbances(t) as u32 {
                    next.push(model.next_state(t, x, u, w));
                }
            }
        }
        reach.push(PointSet::new(next));
    }

    let key_of = |t: usize, x: u32| ApproxKey {
        members: PointSet::singleton(solution.scheme.step(t).quantize(x)),
        y0: None,
    };

    for t in 0..t_end {
        for x in reach[t].iter() {
            let key = key_of(t, x);
            let sid = solution
                .state_id(t, &key)
                .expect("quantized reachable state is a DP state");
            for u in 0..model.n_actions(t) as u32 {
                let mut k: Vec<u32> = (0..model.n_disturbances(t) as u32)
                    .map(|w| {
                        let x2 = model.next_state(t, x, u, w);
                        solution
                            .state_id(t + 1, &key_of(t + 1, x2))
                            .expect("successor is a DP state")
                    })
                    .collect();
                k.sort_unstable();
                k.dedup();
                let k_hat = &solution.succ[t][sid as usize][u as usize];
                let gap = id_set_gap(&k, k_hat, &mut key_distances[t + 1]);
                acc.record(
                    t,
                    format!("x={}", model.state_spaces[t].label(x as usize)),
                    u,
                    id_set_strs(&k, &solution.states[t + 1]),
                    id_set_strs(k_hat, &solution.states[t + 1]),
                    gap,
                );
            }
        }
    }

    for x in reach[t_end].iter() {
        let key = key_of(t_end, x);
        let sid = solution
            .state_id(t_end, &key)
            .expect("quantized reachable state is a DP state") as usize;
        for u in 0..model.n_actions(t_end) as u32 {
            let own = model.terminal_cost_at(x, u);
            let through = solution.q[t_end][sid][u as usize].clone();
            note_epsilon(
                abs_diff(own, through),
                format!("x={}", model.state_spaces[t_end].label(x as usize)),
                u,
            );
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn measure_recursive<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
    solution: &ApproxSolution<S>,
    key_distances: &mut [KeyDistances<'_, S>],
    budget: SolveBudget,
    acc: &mut GapAccumulator<S>,
    note_epsilon: &mut impl FnMut(S, String, u32),
) -> Result<()> {
    let t_end = model.horizon;
    // Joint reachable (exact range, approximate state) pairs; the exact
    // range always stays inside the gamma-ball of its paired state, so the
    // memory-side successor observations are a subset of the state's.
    let mut pairs: Vec<Vec<(PointSet, u32)>> = vec![Vec::new(); t_end + 1];
    let mut pair_index: Vec<HashMap<(PointSet, u32), u32>> = vec![HashMap::new(); t_end + 1];
    for &(y0, root_sid) in &solution.roots {
        let members = initial_range(model, y0)?.members;
        let entry = (members, root_sid);
        if !pair_index[0].contains_key(&entry) {
            pair_index[0].insert(entry.clone(), pairs[0].len() as u32);
            pairs[0].push(entry);
        }
    }

    let rep_balls = crate::approx::representative_balls_per_step(model, scheme);
    let mut total = pairs[0].len();
    for t in 0..t_end {
        let n_actions = model.n_actions(t) as u32;
        let next_q = scheme.step(t + 1);

        // Observation -> successor-state-id map per (state, action) present
        // in this step's pairs.
        let sids_here: Vec<u32> = {
            let mut s: Vec<u32> = pairs[t].iter().map(|&(_, sid)| sid).collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let rep_balls_t = &rep_balls[t];
        let computed: Vec<((u32, u32), HashMap<u32, u32>)> = sids_here
            .par_iter()
            .flat_map_iter(|&sid| {
                let key = &solution.states[t][sid as usize];
                let expansion = rep_balls_t.expand(&key.members);
                (0..n_actions).map(move |u| {
                    let map: HashMap<u32, u32> =
                        successors_by_observation(model, t, &expansion, u)
                            .into_iter()
                            .map(|(y, next)| {
                                let next_key = ApproxKey {
                                    members: quantize_range(&next, next_q),
                                    y0: key.y0,
                                };
                                let next_sid = solution
                                    .state_id(t + 1, &next_key)
                                    .expect("transition state was interned by the solver");
                                (y, next_sid)
                            })
                            .collect();
                    ((sid, u), map)
                })
            })
            .collect();
        let trans: HashMap<(u32, u32), HashMap<u32, u32>> = computed.into_iter().collect();

        for pid in 0..pairs[t].len() {
            let (range, sid) = pairs[t][pid].clone();
            for u in 0..n_actions {
                let successors = successors_by_observation(model, t, &range, u);
                let map = &trans[&(sid, u)];
                let mut k: Vec<u32> = successors
                    .iter()
                    .map(|(y, _)| {
                        *map.get(y)
                            .expect("range stays inside the expanded approximate state")
                    })
                    .collect();
                k.sort_unstable();
                k.dedup();
                let k_hat = &solution.succ[t][sid as usize][u as usize];
                let gap = id_set_gap(&k, k_hat, &mut key_distances[t + 1]);
                acc.record(
                    t,
                    format!(
                        "P={} pi={}",
                        range_str(&range),
                        key_str(&solution.states[t][sid as usize])
                    ),
                    u,
                    id_set_strs(&k, &solution.states[t + 1]),
                    id_set_strs(k_hat, &solution.states[t + 1]),
                    gap,
                );
                for (y, next_range) in successors {
                    let entry = (next_range, map[&y]);
                    if !pair_index[t + 1].contains_key(&entry) {
                        pair_index[t + 1].insert(entry.clone(), pairs[t + 1].len() as u32);
                        pairs[t + 1].push(entry);
                    }
                }
            }
        }
        total += pairs[t + 1].len();
        if total > budget.max_nodes {
            return Err(Error::Capacity {
                what: "gap-measurement pair enumeration".into(),
                reached: total,
                budget: budget.max_nodes,
                hint: "raise the budget or coarsen the quantizer".into(),
            });
        }
    }

    for (range, sid) in &pairs[t_end] {
        for u in 0..model.n_actions(t_end) as u32 {
            let own = terminal_q(model, range, u);
            let through = solution.q[t_end][*sid as usize][u as usize].clone();
            note_epsilon(
                abs_diff(own, through),
                format!(
                    "P={} pi={}",
                    range_str(range),
                    key_str(&solution.states[t_end][*sid as usize])
                ),
                u,
            );
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn measure_quantize_exact<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
    solution: &ApproxSolution<S>,
    roots: Option<&[u32]>,
    pin_y0: bool,
    key_distances: &mut [KeyDistances<'_, S>],
    budget: SolveBudget,
    acc: &mut GapAccumulator<S>,
    note_epsilon: &mut impl FnMut(S, String, u32),
) -> Result<()> {
    let t_end = model.horizon;
    let mut ranges: Vec<Vec<(PointSet, Option<u32>)>> = vec![Vec::new(); t_end + 1];
    let mut range_index: Vec<HashMap<(PointSet, Option<u32>), u32>> =
        vec![HashMap::new(); t_end + 1];
    let push_range = |ranges: &mut Vec<Vec<(PointSet, Option<u32>)>>,
                          range_index: &mut Vec<HashMap<(PointSet, Option<u32>), u32>>,
                          t: usize,
                          entry: (PointSet, Option<u32>)| {
        if !range_index[t].contains_key(&entry) {
            range_index[t].insert(entry.clone(), ranges[t].len() as u32);
            ranges[t].push(entry);
        }
    };
    match roots {
        Some(list) => {
            for &y0 in list {
                let members = initial_range(model, y0)?.members;
                push_range(
                    &mut ranges,
                    &mut range_index,
                    0,
                    (members, pin_y0.then_some(y0)),
                );
            }
        }
        None => {
            for y0 in 0..model.n_observations(0) as u32 {
                if let Ok(r) = initial_range(model, y0) {
                    push_range(
                        &mut ranges,
                        &mut range_index,
                        0,
                        (r.members, pin_y0.then_some(y0)),
                    );
                }
            }
        }
    }

    let key_of = |t: usize, range: &PointSet, tag: Option<u32>| ApproxKey {
        members: quantize_range(range, scheme.step(t)),
        y0: tag,
    };

    let mut total = ranges[0].len();
    for t in 0..t_end {
        for rid in 0..ranges[t].len() {
            let (range, tag) = ranges[t][rid].clone();
            let key = key_of(t, &range, tag);
            let sid = solution
                .state_id(t, &key)
                .expect("quantized reachable range is a DP state");
            for u in 0..model.n_actions(t) as u32 {
                let successors = successors_by_observation(model, t, &range, u);
                let mut k: Vec<u32> = successors
                    .iter()
                    .map(|(_, next)| {
                        solution
                            .state_id(t + 1, &key_of(t + 1, next, tag))
                            .expect("successor class is a DP state")
                    })
                    .collect();
                k.sort_unstable();
                k.dedup();
                let k_hat = &solution.succ[t][sid as usize][u as usize];
                let gap = id_set_gap(&k, k_hat, &mut key_distances[t + 1]);
                acc.record(
                    t,
                    format!("P={} pi={}", range_str(&range), key_str(&key)),
                    u,
                    id_set_strs(&k, &solution.states[t + 1]),
                    id_set_strs(k_hat, &solution.states[t + 1]),
                    gap,
                );
                for (_, next) in successors {
                    push_range(&mut ranges, &mut range_index, t + 1, (next, tag));
                }
            }
        }
        total += ranges[t + 1].len();
        if total > budget.max_nodes {
            return Err(Error::Capacity {
                what: "gap-measurement range enumeration".into(),
                reached: total,
                budget: budget.max_nodes,
                hint: "this mode is oracle-scale; use the recursive mode".into(),
            });
        }
    }

    for (range, tag) in &ranges[t_end] {
        let key = key_of(t_end, range, *tag);
        let sid = solution
            .state_id(t_end, &key)
            .expect("quantized reachable range is a DP state") as usize;
        for u in 0..model.n_actions(t_end) as u32 {
            let own = terminal_q(model, range, u);
            let through = solution.q[t_end][sid][u as usize].clone();
            note_epsilon(
                abs_diff(own, through),
                format!("P={} pi={}", range_str(range), key_str(&key)),
                u,
            );
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Theoretical (radius-formula) ledgers
// ---------------------------------------------------------------------------

/// Work guard for exhaustive Lipschitz scans.
const MAX_LIPSCHITZ_PAIRS: usize = 50_000_000;

fn two<S: Scalar>() -> S {
    S::from_count(2)
}

/// Evaluates the closed-form gap formulas: epsilon_T = 2 L_c gamma_T and,
/// per step, delta_t = 2 gamma_{t+1} + 2 L_f gamma_t (perfectly observed)
/// or delta_t = 2 gamma_{t+1} + 2 L_fbar L_h L_f gamma_t (partially
/// observed), with every constant computed empirically from the tables and,
/// for the range-transition constant, over reachable same-step range pairs.
/// The accumulated alphas use the same empirical value-table constants as
/// the measured ledger.
pub fn theoretical_bounds<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
    variant: Variant,
    roots: Option<&[u32]>,
    budget: SolveBudget,
) -> Result<BoundLedger<S>> {
    let t_end = model.horizon;

    let pair_work: usize = (0..=t_end)
        .map(|t| {
            let n = model.n_states(t);
            let slices = model.n_actions(t) * model.n_disturbances(t) + model.n_noises(t);
            n * n * slices
        })
        .sum();
    if pair_work > MAX_LIPSCHITZ_PAIRS {
        return Err(Error::Capacity {
            what: "table Lipschitz scan".into(),
            reached: pair_work,
            budget: MAX_LIPSCHITZ_PAIRS,
            hint: "theoretical ledgers are oracle-scale".into(),
        });
    }

    let d_end = &model.state_metrics[t_end];
    let mut l_c = S::zero();
    for u in 0..model.n_actions(t_end) {
        let column: Vec<S> = (0..model.n_states(t_end))
            .map(|x| model.terminal_cost[x][u].clone())
            .collect();
        l_c = smax(l_c, lipschitz_real(&column, d_end)?);
    }

    let mut l_f = Vec::with_capacity(t_end);
    for t in 0..t_end {
        let mut best = S::zero();
        for u in 0..model.n_actions(t) as u32 {
            for w in 0..model.n_disturbances(t) as u32 {
                let slice: Vec<u32> = (0..model.n_states(t) as u32)
                    .map(|x| model.next_state(t, x, u, w))
                    .collect();
                best = smax(
                    best,
                    lipschitz_constant(
                        &slice,
                        &model.state_metrics[t],
                        &model.state_metrics[t + 1],
                    )?,
                );
            }
        }
        l_f.push(best);
    }

    let mut l_h = Vec::with_capacity(t_end + 1);
    for t in 0..=t_end {
        let mut best = S::zero();
        for n in 0..model.n_noises(t) as u32 {
            let slice: Vec<u32> = (0..model.n_states(t) as u32)
                .map(|x| model.observe(t, x, n))
                .collect();
            best = smax(
                best,
                lipschitz_constant(
                    &slice,
                    &model.state_metrics[t],
                    &model.observation_metrics[t],
                )?,
            );
        }
        l_h.push(best);
    }

    let l_fbar = match variant {
        Variant::PerfectlyObserved => vec![S::zero(); t_end],
        Variant::PartiallyObserved { .. } => {
            let info = crate::exact::solve_infostate_dp_scoped(model, roots, budget)?;
            let mut out = Vec::with_capacity(t_end);
            for t in 0..t_end {
                let ranges = &info.states[t];
                let n = ranges.len();
                if n * n > budget.max_nodes {
                    return Err(Error::Capacity {
                        what: "range-transition Lipschitz scan".into(),
                        reached: n * n,
                        budget: budget.max_nodes,
                        hint: "theoretical ledgers are oracle-scale".into(),
                    });
                }
                let d_t = &model.state_metrics[t];
                let d_next = &model.state_metrics[t + 1];
                let successor_sets: Vec<Vec<Vec<PointSet>>> = ranges
                    .par_iter()
                    .map(|p| {
                        (0..model.n_actions(t) as u32)
                            .map(|u| {
                                successors_by_observation(model, t, p, u)
                                    .into_iter()
                                    .map(|(_, next)| next)
                                    .collect()
                            })
                            .collect()
                    })
                    .collect();
                let best = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let mut local = S::zero();
                        for j in (i + 1)..n {
                            let base =
                                hausdorff(&ranges[i], &ranges[j], d_t).expect("non-empty range");
                            if base == S::zero() {
                                continue;
                            }
                            for u in 0..model.n_actions(t) {
                                let hh = hausdorff_with(
                                    &successor_sets[i][u],
                                    &successor_sets[j][u],
                                    |a, b| hausdorff(a, b, d_next).expect("non-empty range"),
                                )
                                .expect("successor sets are non-empty");
                                let ratio = hh / base.clone();
                                if cmp(&ratio, &local) == Ordering::Greater {
                                    local = ratio;
                                }
                            }
                        }
                        local
                    })
                    .reduce(S::zero, smax);
                out.push(best);
            }
            out
        }
    };

    let gamma: Vec<S> = scheme.steps.iter().map(|s| s.gamma.clone()).collect();
    let epsilon = two::<S>() * l_c.clone() * gamma[t_end].clone();
    let mut deltas = Vec::with_capacity(t_end);
    for t in 0..t_end {
        let spread = match variant {
            Variant::PerfectlyObserved => l_f[t].clone(),
            Variant::PartiallyObserved { .. } => {
                l_fbar[t].clone() * l_h[t + 1].clone() * l_f[t].clone()
            }
        };
        deltas.push(two::<S>() * gamma[t + 1].clone() + two::<S>() * spread * gamma[t].clone());
    }

    let solution = solve_approx_dp(model, scheme, variant, roots, budget)?;
    let value_l = value_lipschitz(model, &solution)?;
    let alphas = alpha_recursion(&epsilon, &deltas, &value_l);

    Ok(BoundLedger {
        provenance: Provenance::Theoretical,
        gamma,
        epsilon_terminal: epsilon,
        deltas,
        alphas,
        value_lipschitz: value_l,
        table_lipschitz: Some(TableLipschitz {
            terminal_cost: l_c,
            dynamics: l_f,
            observation: l_h,
            range_transition: l_fbar,
        }),
        epsilon_witness: None,
        delta_witnesses: vec![None; t_end],
    })
}

// ---------------------------------------------------------------------------
// Value-bound verification (the accumulated-bound inequality)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BoundViolation<S> {
    pub t: usize,
    pub memory: Vec<u32>,
    /// None compares V, Some(u) compares Q at action u.
    pub action: Option<u32>,
    pub gap: S,
    pub bound: S,
}

#[derive(Debug, Clone)]
pub struct BoundCheckReport<S> {
    pub checked: usize,
    pub violations: Vec<BoundViolation<S>>,
    /// Largest observed |value gap| per step, for reporting.
    pub max_gap: Vec<S>,
    pub scope: &'static str,
}

impl<S> BoundCheckReport<S> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks |V_t(m) - V-hat_t(sigma-hat(m))| <= alpha_t (and the same per
/// action for Q) over every reachable memory, by propagating the
/// approximate state along the memory tree.
pub fn check_value_bounds<S: Scalar>(
    model: &SystemModel<S>,
    memory: &crate::exact::MemorySolution<S>,
    approx: &ApproxSolution<S>,
    alphas: &[S],
) -> Result<BoundCheckReport<S>> {
    let t_end = model.horizon;
    let tree = &memory.tree;
    let mut report = BoundCheckReport {
        checked: 0,
        violations: Vec::new(),
        max_gap: vec![S::zero(); t_end + 1],
        scope: "reachable memories",
    };

    // sigma-hat(m) per node, propagated top-down.
    let mut keys: Vec<Vec<ApproxKey>> = Vec::with_capacity(t_end + 1);
    let mut root_keys = Vec::with_capacity(tree.nodes[0].len());
    for node in &tree.nodes[0] {
        root_keys.push(approx.root_key(model, node.y)?);
    }
    keys.push(root_keys);
    for t in 1..=t_end {
        let mut level = Vec::with_capacity(tree.nodes[t].len());
        for node in &tree.nodes[t] {
            let parent_key = &keys[t - 1][node.parent as usize];
            let key = match approx.variant {
                Variant::PartiallyObserved {
                    sigma: SigmaMode::QuantizeExact,
                    ..
                } => ApproxKey {
                    members: quantize_range(&node.range, approx.scheme.step(t)),
                    y0: parent_key.y0,
                },
                _ => approx.advance_key(model, t - 1, parent_key, node.action, node.y)?,
            };
            level.push(key);
        }
        keys.push(level);
    }

    for t in 0..=t_end {
        for (id, key) in keys[t].iter().enumerate() {
            let Some(sid) = approx.state_id(t, key) else {
                report.violations.push(BoundViolation {
                    t,
                    memory: tree.memory_node(t, id as u32).encoding(),
                    action: None,
                    gap: S::zero(),
                    bound: alphas[t].clone(),
                });
                continue;
            };
            let sid = sid as usize;
            report.checked += 1;
            let v_gap = abs_diff(memory.v[t][id].clone(), approx.v[t][sid].clone());
            if cmp(&v_gap, &report.max_gap[t]) == Ordering::Greater {
                report.max_gap[t] = v_gap.clone();
            }
            if cmp(&v_gap, &alphas[t]) == Ordering::Greater {
                report.violations.push(BoundViolation {
                    t,
                    memory: tree.memory_node(t, id as u32).encoding(),
                    action: None,
                    gap: v_gap,
                    bound: alphas[t].clone(),
                });
            }
            for u in 0..model.n_actions(t) {
                report.checked += 1;
                let q_gap = abs_diff(
                    memory.q[t][id][u].clone(),
                    approx.q[t][sid][u].clone(),
                );
                if cmp(&q_gap, &report.max_gap[t]) == Ordering::Greater {
                    report.max_gap[t] = q_gap.clone();
                }
                if cmp(&q_gap, &alphas[t]) == Ordering::Greater {
                    report.violations.push(BoundViolation {
                        t,
                        memory: tree.memory_node(t, id as u32).encoding(),
                        action: Some(u as u32),
                        gap: q_gap,
                        bound: alphas[t].clone(),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Measured-vs-theoretical dominance rows for one instance.
#[derive(Debug, Clone)]
pub struct DominanceRow<S> {
    pub name: String,
    pub measured: S,
    pub theoretical: S,
    pub holds: bool,
}

/// Compares a measured ledger against a theoretical one entry by entry
/// (epsilon_T, then each delta_t).
pub fn dominance_rows<S: Scalar>(
    measured: &BoundLedger<S>,
    theoretical: &BoundLedger<S>,
) -> Vec<DominanceRow<S>> {
    let mut rows = Vec::with_capacity(measured.deltas.len() + 1);
    rows.push(DominanceRow {
        name: "epsilon_T".into(),
        measured: measured.epsilon_terminal.clone(),
        theoretical: theoretical.epsilon_terminal.clone(),
        holds: cmp(&measured.epsilon_terminal, &theoretical.epsilon_terminal)
            != Ordering::Greater,
    });
    for (t, (m, th)) in measured
        .deltas
        .iter()
        .zip(theoretical.deltas.iter())
        .enumerate()
    {
        rows.push(DominanceRow {
            name: format!("delta_{t}"),
            measured: m.clone(),
            theoretical: th.clone(),
            holds: cmp(m, th) != Ordering::Greater,
        });
    }
    rows
}
