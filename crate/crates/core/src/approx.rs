//! State quantization and the approximate information-state DP.
//!
//! A per-step quantizer covers the state space with representatives within
//! radius gamma. The approximate state is, per variant:
//!
//! - perfectly observed: the quantized current state, interpreted as the
//!   gamma-ball around it when costs or successors are evaluated;
//! - partially observed, recursive mode (production): the element-wise
//!   quantization of the exact range update applied to the gamma-ball
//!   expansion of the previous approximate state: computable online
//!   without storing the memory, and total over reachable memories because
//!   the exact range always stays inside the expansion;
//! - partially observed, quantize-exact mode (oracle): the element-wise
//!   quantization of the exact conditional range; successor sets are unions
//!   over the reachable ranges in the same quantization class, so this mode
//!   costs as much as the exact solver and exists for bound measurement and
//!   cross-checks.
//!
//! The benchmark variant additionally pins the initial observation into the
//! state encoding, which refines value keying and the associated metric.

use crate::error::{Error, Result};
use crate::exact::{argmin_action, initial_range, successors_by_observation, SolveBudget};
use crate::metric::MetricTable;
use crate::model::SystemModel;
use crate::scalar::{cmp, Scalar};
use crate::space::PointSet;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::HashMap;

/// One step's quantizer: representatives, nearest-representative assignment
/// and the achieved covering radius (at most the requested gamma).
#[derive(Debug, Clone)]
pub struct StepQuantizer<S> {
    pub gamma: S,
    pub representatives: PointSet,
    /// `assignment[x]` = representative state index nearest to x (ties to
    /// the lowest representative index). Fixes representatives.
    pub assignment: Vec<u32>,
    pub radius: S,
}

impl<S: Scalar> StepQuantizer<S> {
    pub fn quantize(&self, x: u32) -> u32 {
        self.assignment[x as usize]
    }

    /// Identity quantizer (gamma = 0 keeps every state).
    pub fn is_identity(&self) -> bool {
        self.representatives.len() == self.assignment.len()
    }
}

/// Per-step quantizers for t = 0..=T. By convention the (nonexistent) step
/// T+1 has gamma = 0.
#[derive(Debug, Clone)]
pub struct QuantizationScheme<S> {
    pub steps: Vec<StepQuantizer<S>>,
}

impl<S: Scalar> QuantizationScheme<S> {
    pub fn step(&self, t: usize) -> &StepQuantizer<S> {
        &self.steps[t]
    }
}

fn nearest_representative<S: Scalar>(
    metric: &MetricTable<S>,
    reps: &PointSet,
    x: u32,
) -> (u32, S) {
    let mut best_rep = 0u32;
    let mut best: Option<S> = None;
    for r in reps.iter() {
        let d = metric.get(x as usize, r as usize);
        let better = match &best {
            None => true,
            Some(b) => cmp(&d, b) == Ordering::Less,
        };
        if better {
            best = Some(d);
            best_rep = r;
        }
    }
    (best_rep, best.expect("representatives are non-empty"))
}

/// Greedy farthest-point cover: starting from the lowest index, repeatedly
/// add the point farthest from the current representatives (ties to the
/// lowest index) until every point is within gamma of one. gamma = 0 keeps
/// the whole space.
pub fn build_quantizer<S: Scalar>(metric: &MetricTable<S>, gamma: S) -> StepQuantizer<S> {
    let n = metric.len();
    let mut reps: Vec<u32> = Vec::new();
    // None = not yet covered by any representative (infinite distance).
    let mut min_dist: Vec<Option<S>> = vec![None; n];
    loop {
        // Farthest uncovered point, ties to the lowest index.
        let pick_of = |range: std::ops::Range<usize>, dists: &[Option<S>]| {
            let mut pick = range.start;
            let mut best: Option<S> = dists[range.start].clone();
            for i in range.skip(1) {
                let better = match (&best, &dists[i]) {
                    (None, _) => false,
                    (Some(_), None) => true,
                    (Some(b), Some(c)) => cmp(c, b) == Ordering::Greater,
                };
                if better {
                    pick = i;
                    best = dists[i].clone();
                }
            }
            (pick, best)
        };
        let (pick, pick_dist) = if n >= 4096 {
            let chunk = n.div_ceil(rayon::current_num_threads().max(1));
            (0..n)
                .step_by(chunk)
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&start| pick_of(start..(start + chunk).min(n), &min_dist))
                .collect::<Vec<_>>()
                .into_iter()
                .reduce(|a, b| {
                    let b_better = match (&a.1, &b.1) {
                        (None, _) => false,
                        (Some(_), None) => true,
                        (Some(x), Some(y)) => cmp(y, x) == Ordering::Greater,
                    };
                    if b_better {
                        b
                    } else {
                        a
                    }
                })
                .expect("space is non-empty")
        } else {
            pick_of(0..n, &min_dist)
        };
        let covered = match &pick_dist {
            None => false,
            Some(d) => cmp(d, &gamma) != Ordering::Greater,
        };
        if covered && !reps.is_empty() {
            break;
        }
        reps.push(pick as u32);
        let update = |(i, cur): (usize, &mut Option<S>)| {
            let d = metric.get(i, pick);
            let closer = match cur {
                None => true,
                Some(existing) => cmp(&d, existing) == Ordering::Less,
            };
            if closer {
                *cur = Some(d);
            }
        };
        if n >= 4096 {
            min_dist.par_iter_mut().enumerate().for_each(|(i, cur)| update((i, cur)));
        } else {
            min_dist.iter_mut().enumerate().for_each(update);
        }
    }
    let representatives = PointSet::new(reps);
    finish_quantizer(metric, representatives, gamma)
}

/// Quantizer from an explicit representative set; fails when the covering
/// radius exceeds gamma.
pub fn quantizer_from_representatives<S: Scalar>(
    metric: &MetricTable<S>,
    representatives: PointSet,
    gamma: S,
) -> Result<StepQuantizer<S>> {
    if representatives.is_empty() || representatives.max_exclusive() > metric.len() {
        return Err(Error::Schema {
            field: "quantizer".into(),
            detail: "representatives must be a non-empty subset of the space".into(),
        });
    }
    let q = finish_quantizer(metric, representatives, gamma.clone());
    if cmp(&q.radius, &gamma) == Ordering::Greater {
        return Err(Error::Schema {
            field: "quantizer".into(),
            detail: format!(
                "covering radius {} exceeds gamma {}",
                q.radius, q.gamma
            ),
        });
    }
    Ok(q)
}

fn finish_quantizer<S: Scalar>(
    metric: &MetricTable<S>,
    representatives: PointSet,
    gamma: S,
) -> StepQuantizer<S> {
    let n = metric.len();
    let nearest: Vec<(u32, S)> = (0..n as u32)
        .into_par_iter()
        .map(|x| nearest_representative(metric, &representatives, x))
        .collect();
    let mut assignment = Vec::with_capacity(n);
    let mut radius = S::zero();
    for (rep, d) in nearest {
        if cmp(&d, &radius) == Ordering::Greater {
            radius = d;
        }
        assignment.push(rep);
    }
    StepQuantizer {
        gamma,
        representatives,
        assignment,
        radius,
    }
}

/// Same gamma at every step, over the model's per-step state metrics.
/// Consecutive steps with identical metrics share one cover.
pub fn uniform_quantizer<S: Scalar>(model: &SystemModel<S>, gamma: S) -> QuantizationScheme<S> {
    let mut steps: Vec<StepQuantizer<S>> = Vec::with_capacity(model.horizon + 1);
    for t in 0..=model.horizon {
        if t > 0 && model.state_metrics[t] == model.state_metrics[t - 1] {
            let prev = steps[t - 1].clone();
            steps.push(prev);
        } else {
            steps.push(build_quantizer(&model.state_metrics[t], gamma.clone()));
        }
    }
    QuantizationScheme { steps }
}

/// Element-wise quantization of a range; idempotent on already-quantized
/// ranges.
pub fn quantize_range<S: Scalar>(range: &PointSet, q: &StepQuantizer<S>) -> PointSet {
    range.iter().map(|x| q.quantize(x)).collect()
}

/// gamma-ball expansion: all states within gamma of some member.
pub fn ball<S: Scalar>(members: &PointSet, gamma: &S, metric: &MetricTable<S>) -> PointSet {
    if *gamma == S::zero() {
        return members.clone();
    }
    let mut merged = Vec::new();
    for m in members.iter() {
        merged.extend(metric.within(m as usize, gamma));
    }
    PointSet::new(merged)
}

/// Point balls around every representative of a step, for fast expansion of
/// quantized ranges (whose members are always representatives).
#[derive(Debug, Clone)]
pub(crate) struct RepresentativeBalls {
    balls: HashMap<u32, PointSet>,
    identity: bool,
}

impl RepresentativeBalls {
    pub(crate) fn build<S: Scalar>(q: &StepQuantizer<S>, metric: &MetricTable<S>) -> Self {
        if q.gamma == S::zero() {
            return Self {
                balls: HashMap::new(),
                identity: true,
            };
        }
        let reps: Vec<u32> = q.representatives.iter().collect();
        let balls: HashMap<u32, PointSet> = reps
            .par_iter()
            .map(|&r| (r, ball(&PointSet::singleton(r), &q.gamma, metric)))
            .collect();
        Self {
            balls,
            identity: false,
        }
    }

    /// Union of the point balls of `members` (all of which must be
    /// representatives).
    pub(crate) fn expand(&self, members: &PointSet) -> PointSet {
        if self.identity {
            return members.clone();
        }
        let mut merged = Vec::new();
        for m in members.iter() {
            merged.extend(self.balls[&m].iter());
        }
        PointSet::new(merged)
    }
}

/// Per-step representative balls with reuse across steps that share the
/// quantizer and metric.
pub(crate) fn representative_balls_per_step<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
) -> Vec<RepresentativeBalls> {
    let mut out: Vec<RepresentativeBalls> = Vec::with_capacity(model.horizon + 1);
    for t in 0..=model.horizon {
        let reusable = t > 0
            && scheme.steps[t].gamma == scheme.steps[t - 1].gamma
            && scheme.steps[t].representatives == scheme.steps[t - 1].representatives
            && model.state_metrics[t] == model.state_metrics[t - 1];
        if reusable {
            let prev = out[t - 1].clone();
            out.push(prev);
        } else {
            out.push(RepresentativeBalls::build(
                scheme.step(t),
                &model.state_metrics[t],
            ));
        }
    }
    out
}

/// Which approximate-state construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMode {
    /// Online recursion through the gamma-ball expansion (production).
    Recursive,
    /// Quantize the exact conditional range at every step (oracle scale).
    QuantizeExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    PerfectlyObserved,
    PartiallyObserved { sigma: SigmaMode, pin_y0: bool },
}

impl Variant {
    pub fn partial() -> Self {
        Variant::PartiallyObserved {
            sigma: SigmaMode::Recursive,
            pin_y0: false,
        }
    }

    /// Benchmark variant: recursive update with the initial observation
    /// pinned into the encoding.
    pub fn with_pinned_y0() -> Self {
        Variant::PartiallyObserved {
            sigma: SigmaMode::Recursive,
            pin_y0: true,
        }
    }

    pub fn pin_y0(&self) -> bool {
        matches!(
            self,
            Variant::PartiallyObserved { pin_y0: true, .. }
        )
    }
}

/// Canonical approximate-state encoding: quantized members plus the pinned
/// initial observation when the variant carries one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ApproxKey {
    pub members: PointSet,
    pub y0: Option<u32>,
}

/// Value tables and policy of the approximate DP.
#[derive(Debug, Clone)]
pub struct ApproxSolution<S> {
    pub horizon: usize,
    pub variant: Variant,
    pub scheme: QuantizationScheme<S>,
    pub states: Vec<Vec<ApproxKey>>,
    index: Vec<HashMap<ApproxKey, u32>>,
    /// `succ[t][sid][u]` = sorted successor state ids; this is exactly the
    /// successor set the DP maximizes over, and the set measured gaps are
    /// taken against.
    pub succ: Vec<Vec<Vec<Vec<u32>>>>,
    pub q: Vec<Vec<Vec<S>>>,
    pub v: Vec<Vec<S>>,
    pub policy: Vec<Vec<u32>>,
    pub roots: Vec<(u32, u32)>,
}

impl<S: Scalar> ApproxSolution<S> {
    pub fn state_id(&self, t: usize, key: &ApproxKey) -> Option<u32> {
        self.index[t].get(key).copied()
    }

    pub fn root_state(&self, y0: u32) -> Option<u32> {
        self.roots
            .binary_search_by_key(&y0, |&(y, _)| y)
            .ok()
            .map(|i| self.roots[i].1)
    }

    pub fn root_value(&self, y0: u32) -> Option<S> {
        self.root_state(y0).map(|sid| self.v[0][sid as usize].clone())
    }

    pub fn n_states_total(&self) -> usize {
        self.states.iter().map(Vec::len).sum()
    }

    /// The approximate state reached from the root observation y0.
    pub fn root_key(&self, model: &SystemModel<S>, y0: u32) -> Result<ApproxKey> {
        initial_key(model, &self.scheme, self.variant, y0)
    }

    /// Online approximate-state transition (recursive and perfectly
    /// observed variants; the quantize-exact mode tracks the exact range
    /// externally).
    pub fn advance_key(
        &self,
        model: &SystemModel<S>,
        t: usize,
        key: &ApproxKey,
        u: u32,
        y_next: u32,
    ) -> Result<ApproxKey> {
        advance_key(model, &self.scheme, self.variant, t, key, u, y_next)
    }
}

/// Approximate state induced by the first observation.
pub fn initial_key<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
    variant: Variant,
    y0: u32,
) -> Result<ApproxKey> {
    let r = initial_range(model, y0)?;
    Ok(ApproxKey {
        members: quantize_range(&r.members, scheme.step(0)),
        y0: variant.pin_y0().then_some(y0),
    })
}

/// Online approximate-state transition: the quantized current state for
/// perfectly observed systems, otherwise the element-wise quantization of
/// the exact range update applied to the gamma-ball expansion of the
/// current approximate state.
pub fn advance_key<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
    variant: Variant,
    t: usize,
    key: &ApproxKey,
    u: u32,
    y_next: u32,
) -> Result<ApproxKey> {
    match variant {
        Variant::PerfectlyObserved => Ok(ApproxKey {
            members: PointSet::singleton(scheme.step(t + 1).quantize(y_next)),
            y0: None,
        }),
        Variant::PartiallyObserved { .. } => {
            let step = scheme.step(t);
            let expanded = ball(&key.members, &step.gamma, &model.state_metrics[t]);
            let next = crate::exact::range_update(model, t, &expanded, u, y_next);
            if next.is_empty() {
                return Err(Error::InfeasibleObservation {
                    y0: y_next as usize,
                });
            }
            Ok(ApproxKey {
                members: quantize_range(&next, scheme.step(t + 1)),
                y0: key.y0,
            })
        }
    }
}

fn check_scheme<S: Scalar>(model: &SystemModel<S>, scheme: &QuantizationScheme<S>) -> Result<()> {
    if scheme.steps.len() != model.horizon + 1 {
        return Err(Error::Schema {
            field: "quantizer".into(),
            detail: format!(
                "{} quantizer steps for horizon {}",
                scheme.steps.len(),
                model.horizon
            ),
        });
    }
    for (t, step) in scheme.steps.iter().enumerate() {
        if step.assignment.len() != model.n_states(t) {
            return Err(Error::Schema {
                field: "quantizer".into(),
                detail: format!("quantizer at t={t} does not cover the state space"),
            });
        }
    }
    Ok(())
}

/// Solves the approximate DP from every feasible initial observation (or
/// the given subset).
pub fn solve_approx_dp<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
    variant: Variant,
    roots: Option<&[u32]>,
    budget: SolveBudget,
) -> Result<ApproxSolution<S>> {
    check_scheme(model, scheme)?;
    if matches!(variant, Variant::PerfectlyObserved) && !model.is_perfectly_observed() {
        return Err(Error::Schema {
            field: "variant".into(),
            detail: "perfectly-observed variant on a model whose observations do not reveal the state".into(),
        });
    }
    match variant {
        Variant::PerfectlyObserved
        | Variant::PartiallyObserved {
            sigma: SigmaMode::Recursive,
            ..
        } => solve_recursive(model, scheme, variant, roots, budget),
        Variant::PartiallyObserved {
            sigma: SigmaMode::QuantizeExact,
            pin_y0,
        } => solve_quantize_exact(model, scheme, pin_y0, roots, budget),
    }
}

struct Interner {
    states: Vec<Vec<ApproxKey>>,
    index: Vec<HashMap<ApproxKey, u32>>,
}

impl Interner {
    fn new(stages: usize) -> Self {
        Self {
            states: vec![Vec::new(); stages],
            index: vec![HashMap::new(); stages],
        }
    }

    fn intern(&mut self, t: usize, key: ApproxKey) -> u32 {
        if let Some(&sid) = self.index[t].get(&key) {
            return sid;
        }
        let sid = self.states[t].len() as u32;
        self.index[t].insert(key.clone(), sid);
        self.states[t].push(key);
        sid
    }

    fn total(&self) -> usize {
        self.states.iter().map(Vec::len).sum()
    }
}

fn feasible_roots<S: Scalar>(
    model: &SystemModel<S>,
    roots: Option<&[u32]>,
) -> Result<Vec<(u32, PointSet)>> {
    let mut out = Vec::new();
    match roots {
        Some(list) => {
            let mut sorted: Vec<u32> = list.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            for y0 in sorted {
                let r = initial_range(model, y0)?;
                out.push((y0, r.members));
            }
        }
        None => {
            for y0 in 0..model.n_observations(0) as u32 {
                if let Ok(r) = initial_range(model, y0) {
                    out.push((y0, r.members));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InfeasibleObservation { y0: 0 });
    }
    Ok(out)
}

/// Forward closure under the online successor map, then backward induction.
fn solve_recursive<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
    variant: Variant,
    roots: Option<&[u32]>,
    budget: SolveBudget,
) -> Result<ApproxSolution<S>> {
    let t_end = model.horizon;
    let mut interner = Interner::new(t_end + 1);
    let mut roots_out = Vec::new();
    for (y0, members) in feasible_roots(model, roots)? {
        let key = ApproxKey {
            members: quantize_range(&members, scheme.step(0)),
            y0: variant.pin_y0().then_some(y0),
        };
        let sid = interner.intern(0, key);
        roots_out.push((y0, sid));
    }

    let rep_balls = representative_balls_per_step(model, scheme);
    let mut succ: Vec<Vec<Vec<Vec<u32>>>> = vec![Vec::new(); t_end];
    for t in 0..t_end {
        let n_actions = model.n_actions(t) as u32;
        let next_q = scheme.step(t + 1);
        let expanded: Vec<Vec<Vec<ApproxKey>>> = interner.states[t]
            .par_iter()
            .map(|key| {
                let expansion = rep_balls[t].expand(&key.members);
                (0..n_actions)
                    .map(|u| {
                        successors_by_observation(model, t, &expansion, u)
                            .into_iter()
                            .map(|(_, next)| ApproxKey {
                                members: quantize_range(&next, next_q),
                                y0: key.y0,
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        for per_state in expanded {
            let mut rows = Vec::with_capacity(per_state.len());
            for keys in per_state {
                let mut ids: Vec<u32> =
                    keys.into_iter().map(|k| interner.intern(t + 1, k)).collect();
                ids.sort_unstable();
                ids.dedup();
                debug_assert!(!ids.is_empty());
                rows.push(ids);
            }
            succ[t].push(rows);
        }
        if interner.total() > budget.max_nodes {
            return Err(Error::Capacity {
                what: "approximate-state enumeration".into(),
                reached: interner.total(),
                budget: budget.max_nodes,
                hint: "raise the budget or coarsen the quantizer".into(),
            });
        }
    }

    let (q, v, policy) = backward(model, &rep_balls, &interner.states, &succ);
    Ok(ApproxSolution {
        horizon: t_end,
        variant,
        scheme: scheme.clone(),
        states: interner.states,
        index: interner.index,
        succ,
        q,
        v,
        policy,
        roots: roots_out,
    })
}

/// Enumerates exact ranges grouped by their quantization class and defines
/// successor sets as class unions.
fn solve_quantize_exact<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
    pin_y0: bool,
    roots: Option<&[u32]>,
    budget: SolveBudget,
) -> Result<ApproxSolution<S>> {
    let t_end = model.horizon;
    let mut interner = Interner::new(t_end + 1);
    // Exact ranges tagged with their pinned root (when pinning), per step.
    let mut ranges: Vec<Vec<(PointSet, Option<u32>)>> = vec![Vec::new(); t_end + 1];
    let mut range_index: Vec<HashMap<(PointSet, Option<u32>), u32>> =
        vec![HashMap::new(); t_end + 1];
    // Key id of each range node.
    let mut range_key: Vec<Vec<u32>> = vec![Vec::new(); t_end + 1];

    let intern_range = |ranges: &mut Vec<Vec<(PointSet, Option<u32>)>>,
                            range_index: &mut Vec<HashMap<(PointSet, Option<u32>), u32>>,
                            range_key: &mut Vec<Vec<u32>>,
                            interner: &mut Interner,
                            t: usize,
                            range: PointSet,
                            tag: Option<u32>|
     -> (u32, bool) {
        let entry = (range, tag);
        if let Some(&rid) = range_index[t].get(&entry) {
            return (rid, false);
        }
        let rid = ranges[t].len() as u32;
        range_index[t].insert(entry.clone(), rid);
        let key = ApproxKey {
            members: quantize_range(&entry.0, scheme.step(t)),
            y0: entry.1,
        };
        ranges[t].push(entry);
        range_key[t].push(interner.intern(t, key));
        (rid, true)
    };

    let mut roots_out = Vec::new();
    for (y0, members) in feasible_roots(model, roots)? {
        let tag = pin_y0.then_some(y0);
        let (rid, _) = intern_range(
            &mut ranges,
            &mut range_index,
            &mut range_key,
            &mut interner,
            0,
            members,
            tag,
        );
        roots_out.push((y0, range_key[0][rid as usize]));
    }

    let mut succ: Vec<Vec<Vec<Vec<u32>>>> = vec![Vec::new(); t_end];
    for t in 0..t_end {
        let n_actions = model.n_actions(t);
        // Successor key-ids per (key, action), unioned over the class.
        let mut per_key: Vec<Vec<Vec<u32>>> =
            vec![vec![Vec::new(); n_actions]; interner.states[t].len()];
        for rid in 0..ranges[t].len() {
            let (range, tag) = ranges[t][rid].clone();
            let kid = range_key[t][rid] as usize;
            for u in 0..n_actions as u32 {
                for (_, next) in successors_by_observation(model, t, &range, u) {
                    let (next_rid, _) = intern_range(
                        &mut ranges,
                        &mut range_index,
                        &mut range_key,
                        &mut interner,
                        t + 1,
                        next,
                        tag,
                    );
                    per_key[kid][u as usize].push(range_key[t + 1][next_rid as usize]);
                }
            }
        }
        // The per-key table may be shorter than the final state count at t
        // only if a key was first discovered at t+1; keys at step t are all
        // discovered before expanding step t, so sizes match.
        for row in &mut per_key {
            for ids in row.iter_mut() {
                ids.sort_unstable();
                ids.dedup();
                debug_assert!(!ids.is_empty());
            }
        }
        succ[t] = per_key;
        let total = interner.total() + ranges.iter().map(Vec::len).sum::<usize>();
        if total > budget.max_nodes {
            return Err(Error::Capacity {
                what: "quantize-exact enumeration".into(),
                reached: total,
                budget: budget.max_nodes,
                hint: "this mode is oracle-scale; use the recursive mode".into(),
            });
        }
    }

    let rep_balls = representative_balls_per_step(model, scheme);
    let (q, v, policy) = backward(model, &rep_balls, &interner.states, &succ);
    Ok(ApproxSolution {
        horizon: t_end,
        variant: Variant::PartiallyObserved {
            sigma: SigmaMode::QuantizeExact,
            pin_y0,
        },
        scheme: scheme.clone(),
        states: interner.states,
        index: interner.index,
        succ,
        q,
        v,
        policy,
        roots: roots_out,
    })
}

/// Worst-case terminal cost of an approximate state: max over the
/// gamma-ball around its members.
pub fn terminal_q_approx<S: Scalar>(
    model: &SystemModel<S>,
    scheme: &QuantizationScheme<S>,
    key: &ApproxKey,
    u: u32,
) -> S {
    let t_end = model.horizon;
    let step = scheme.step(t_end);
    let expanded = ball(&key.members, &step.gamma, &model.state_metrics[t_end]);
    crate::exact::terminal_q(model, &expanded, u)
}

fn backward<S: Scalar>(
    model: &SystemModel<S>,
    rep_balls: &[RepresentativeBalls],
    states: &[Vec<ApproxKey>],
    succ: &[Vec<Vec<Vec<u32>>>],
) -> (Vec<Vec<Vec<S>>>, Vec<Vec<S>>, Vec<Vec<u32>>) {
    let t_end = model.horizon;
    let mut q: Vec<Vec<Vec<S>>> = vec![Vec::new(); t_end + 1];
    let mut v: Vec<Vec<S>> = vec![Vec::new(); t_end + 1];
    let mut policy: Vec<Vec<u32>> = vec![Vec::new(); t_end + 1];

    let n_actions = model.n_actions(t_end) as u32;
    let terminal: Vec<(Vec<S>, S, u32)> = states[t_end]
        .par_iter()
        .map(|key| {
            let expanded = rep_balls[t_end].expand(&key.members);
            let q_row: Vec<S> = (0..n_actions)
                .map(|u| crate::exact::terminal_q(model, &expanded, u))
                .collect();
            let (u, val) = argmin_action(&q_row);
            (q_row, val, u)
        })
        .collect();
    for (q_row, val, u) in terminal {
        q[t_end].push(q_row);
        v[t_end].push(val);
        policy[t_end].push(u);
    }

    for t in (0..t_end).rev() {
        let next_v = &v[t + 1];
        let rows: Vec<(Vec<S>, S, u32)> = succ[t]
            .par_iter()
            .map(|per_action| {
                let q_row: Vec<S> = per_action
                    .iter()
                    .map(|ids| {
                        let mut best = next_v[ids[0] as usize].clone();
                        for &sid in &ids[1..] {
                            let cand = &next_v[sid as usize];
                            if cmp(cand, &best) == Ordering::Greater {
                                best = cand.clone();
                            }
                        }
                        best
                    })
                    .collect();
                let (u, val) = argmin_action(&q_row);
                (q_row, val, u)
            })
            .collect();
        for (q_row, val, u) in rows {
            q[t].push(q_row);
            v[t].push(val);
            policy[t].push(u);
        }
    }
    (q, v, policy)
}
