//! Policy evaluation: exact adversarial worst case of a fixed strategy, and
//! seeded randomized simulation with paired cost-difference statistics.

use crate::approx::{
    advance_key, initial_key, quantize_range, ApproxKey, ApproxSolution, QuantizationScheme,
    SigmaMode, Variant,
};
use crate::error::{Error, Result};
use crate::exact::{
    enumerate_memories, initial_range, range_update, InfostateSolution, MemorySolution,
    MemoryTree, SolveBudget,
};
use crate::model::{MemoryNode, SystemModel};
use crate::scalar::{abs_diff, cmp, Scalar};
use crate::space::PointSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::collections::HashMap;

/// An executable strategy: action tables keyed by the policy's own online
/// state, which it tracks from observations and past actions using only the
/// model. Detached from solver internals so policies round-trip through
/// solution files.
#[derive(Debug, Clone)]
pub enum RuntimePolicy<S> {
    /// Keyed by the exact conditional range.
    Infostate {
        actions: Vec<HashMap<PointSet, u32>>,
    },
    /// Keyed by the approximate state.
    Approx {
        actions: Vec<HashMap<ApproxKey, u32>>,
        scheme: QuantizationScheme<S>,
        variant: Variant,
    },
    /// Keyed by the interleaved memory encoding.
    Memory {
        actions: Vec<HashMap<Vec<u32>, u32>>,
    },
    Constant(u32),
}

/// Online state of a policy while it runs.
#[derive(Debug, Clone)]
pub enum PolicyState {
    Range(PointSet),
    Key(ApproxKey),
    /// Exact range plus pinned root, for the quantize-exact mode.
    ExactRange(PointSet, Option<u32>),
    Memory(MemoryNode),
    Unit,
}

impl<S: Scalar> RuntimePolicy<S> {
    pub fn from_infostate(solution: &InfostateSolution<S>) -> Self {
        let actions = solution
            .states
            .iter()
            .zip(&solution.policy)
            .map(|(states, policy)| {
                states
                    .iter()
                    .cloned()
                    .zip(policy.iter().copied())
                    .collect()
            })
            .collect();
        RuntimePolicy::Infostate { actions }
    }

    pub fn from_approx(solution: &ApproxSolution<S>) -> Self {
        let actions = solution
            .states
            .iter()
            .zip(&solution.policy)
            .map(|(states, policy)| {
                states
                    .iter()
                    .cloned()
                    .zip(policy.iter().copied())
                    .collect()
            })
            .collect();
        RuntimePolicy::Approx {
            actions,
            scheme: solution.scheme.clone(),
            variant: solution.variant,
        }
    }

    pub fn from_memory(solution: &MemorySolution<S>) -> Self {
        let mut actions = Vec::with_capacity(solution.tree.horizon + 1);
        for t in 0..=solution.tree.horizon {
            let mut level = HashMap::new();
            for id in 0..solution.tree.nodes[t].len() {
                level.insert(
                    solution.tree.memory_node(t, id as u32).encoding(),
                    solution.policy[t][id],
                );
            }
            actions.push(level);
        }
        RuntimePolicy::Memory { actions }
    }

    pub fn root(&self, model: &SystemModel<S>, y0: u32) -> Result<PolicyState> {
        match self {
            RuntimePolicy::Infostate { .. } => {
                Ok(PolicyState::Range(initial_range(model, y0)?.members))
            }
            RuntimePolicy::Approx {
                scheme, variant, ..
            } => match variant {
                Variant::PartiallyObserved {
                    sigma: SigmaMode::QuantizeExact,
                    pin_y0,
                } => Ok(PolicyState::ExactRange(
                    initial_range(model, y0)?.members,
                    pin_y0.then_some(y0),
                )),
                _ => Ok(PolicyState::Key(initial_key(model, scheme, *variant, y0)?)),
            },
            RuntimePolicy::Memory { .. } => Ok(PolicyState::Memory(MemoryNode::root(y0))),
            RuntimePolicy::Constant(_) => Ok(PolicyState::Unit),
        }
    }

    pub fn action(&self, model: &SystemModel<S>, t: usize, state: &PolicyState) -> Result<u32> {
        let missing = |encoding: String| Error::PolicyIncomplete { t, encoding };
        match (self, state) {
            (RuntimePolicy::Infostate { actions }, PolicyState::Range(range)) => actions[t]
                .get(range)
                .copied()
                .ok_or_else(|| missing(format!("{range:?}"))),
            (RuntimePolicy::Approx { actions, .. }, PolicyState::Key(key)) => actions[t]
                .get(key)
                .copied()
                .ok_or_else(|| missing(format!("{key:?}"))),
            (
                RuntimePolicy::Approx {
                    actions, scheme, ..
                },
                PolicyState::ExactRange(range, tag),
            ) => {
                let key = ApproxKey {
                    members: quantize_range(range, scheme.step(t)),
                    y0: *tag,
                };
                actions[t]
                    .get(&key)
                    .copied()
                    .ok_or_else(|| missing(format!("{key:?}")))
            }
            (RuntimePolicy::Memory { actions }, PolicyState::Memory(node)) => actions[t]
                .get(&node.encoding())
                .copied()
                .ok_or_else(|| missing(format!("{:?}", node.encoding()))),
            (RuntimePolicy::Constant(u), _) => {
                if (*u as usize) < model.n_actions(t) {
                    Ok(*u)
                } else {
                    Err(Error::IndexOutOfRange {
                        index: *u as usize,
                        size: model.n_actions(t),
                    })
                }
            }
            _ => Err(Error::PolicyMismatch("policy state shape".into())),
        }
    }

    pub fn advance(
        &self,
        model: &SystemModel<S>,
        t: usize,
        state: &PolicyState,
        u: u32,
        y_next: u32,
    ) -> Result<PolicyState> {
        match (self, state) {
            (RuntimePolicy::Infostate { .. }, PolicyState::Range(range)) => {
                let next = range_update(model, t, range, u, y_next);
                if next.is_empty() {
                    return Err(Error::InfeasibleObservation {
                        y0: y_next as usize,
                    });
                }
                Ok(PolicyState::Range(next))
            }
            (
                RuntimePolicy::Approx {
                    scheme, variant, ..
                },
                PolicyState::Key(key),
            ) => Ok(PolicyState::Key(advance_key(
                model, scheme, *variant, t, key, u, y_next,
            )?)),
            (RuntimePolicy::Approx { .. }, PolicyState::ExactRange(range, tag)) => {
                let next = range_update(model, t, range, u, y_next);
                if next.is_empty() {
                    return Err(Error::InfeasibleObservation {
                        y0: y_next as usize,
                    });
                }
                Ok(PolicyState::ExactRange(next, *tag))
            }
            (RuntimePolicy::Memory { .. }, PolicyState::Memory(node)) => {
                Ok(PolicyState::Memory(node.child(u, y_next)))
            }
            (RuntimePolicy::Constant(_), PolicyState::Unit) => Ok(PolicyState::Unit),
            _ => Err(Error::PolicyMismatch("policy state shape".into())),
        }
    }
}

// ---------------------------------------------------------------------------
// Exact adversarial evaluation
// ---------------------------------------------------------------------------

/// Worst-case evaluation tables of a fixed policy over the reachable memory
/// tree: per (memory, action) the worst successor value, per memory the
/// value under the policy's own action, plus argmax witnesses for
/// adversarial replay.
#[derive(Debug, Clone)]
pub struct EvalTables<S> {
    pub tree: MemoryTree,
    pub theta: Vec<Vec<Vec<S>>>,
    pub lambda: Vec<Vec<S>>,
    /// The policy's action at each memory node.
    pub actions: Vec<Vec<u32>>,
    /// `witness[t][node][u]` = child node id attaining theta (t < T).
    pub witness: Vec<Vec<Vec<u32>>>,
    /// Terminal argmax state per (node, action).
    pub terminal_witness: Vec<Vec<u32>>,
}

impl<S: Scalar> EvalTables<S> {
    /// Worst-case cost of the policy from the initial observation y0.
    pub fn lambda0(&self, y0: u32) -> Option<S> {
        self.tree
            .roots
            .iter()
            .find(|&&(y, _)| y == y0)
            .map(|&(_, id)| self.lambda[0][id as usize].clone())
    }

    /// Root with the largest worst-case cost.
    pub fn worst_root(&self) -> (u32, S) {
        let mut best = None;
        for &(y0, id) in &self.tree.roots {
            let v = self.lambda[0][id as usize].clone();
            best = match best {
                None => Some((y0, v)),
                Some((by, bv)) => {
                    if cmp(&v, &bv) == Ordering::Greater {
                        Some((y0, v))
                    } else {
                        Some((by, bv))
                    }
                }
            };
        }
        best.expect("at least one root")
    }
}

/// Exact adversarial evaluation of a policy by backward recursion over
/// reachable memories. For the optimal policy this reproduces the optimal
/// value; for an approximate policy the gap from the optimum is bounded by
/// twice the accumulated error bound.
pub fn evaluate_policy_worstcase<S: Scalar>(
    model: &SystemModel<S>,
    policy: &RuntimePolicy<S>,
    roots: Option<&[u32]>,
    budget: SolveBudget,
) -> Result<EvalTables<S>> {
    let tree = enumerate_memories(model, roots, budget)?;
    let t_end = model.horizon;

    // Policy-state propagation down the tree.
    let mut aux: Vec<Vec<PolicyState>> = Vec::with_capacity(t_end + 1);
    let mut level0 = Vec::with_capacity(tree.nodes[0].len());
    for node in &tree.nodes[0] {
        level0.push(policy.root(model, node.y)?);
    }
    aux.push(level0);
    for t in 1..=t_end {
        let mut level = Vec::with_capacity(tree.nodes[t].len());
        for node in &tree.nodes[t] {
            let parent = &aux[t - 1][node.parent as usize];
            level.push(policy.advance(model, t - 1, parent, node.action, node.y)?);
        }
        aux.push(level);
    }

    let mut theta: Vec<Vec<Vec<S>>> = vec![Vec::new(); t_end + 1];
    let mut lambda: Vec<Vec<S>> = vec![Vec::new(); t_end + 1];
    let mut actions: Vec<Vec<u32>> = vec![Vec::new(); t_end + 1];
    let mut witness: Vec<Vec<Vec<u32>>> = vec![Vec::new(); t_end];
    let mut terminal_witness: Vec<Vec<u32>> = Vec::new();

    for (id, node) in tree.nodes[t_end].iter().enumerate() {
        let mut theta_row = Vec::with_capacity(model.n_actions(t_end));
        let mut witness_row = Vec::with_capacity(model.n_actions(t_end));
        for u in 0..model.n_actions(t_end) as u32 {
            let mut best_x = node.range.members()[0];
            let mut best = model.terminal_cost_at(best_x, u);
            for x in node.range.iter().skip(1) {
                let c = model.terminal_cost_at(x, u);
                if cmp(&c, &best) == Ordering::Greater {
                    best = c;
                    best_x = x;
                }
            }
            theta_row.push(best);
            witness_row.push(best_x);
        }
        let g = policy.action(model, t_end, &aux[t_end][id])?;
        lambda[t_end].push(theta_row[g as usize].clone());
        actions[t_end].push(g);
        theta[t_end].push(theta_row);
        terminal_witness.push(witness_row);
    }

    for t in (0..t_end).rev() {
        for (id, edge_rows) in tree.edges[t].iter().enumerate() {
            let mut theta_row = Vec::with_capacity(edge_rows.len());
            let mut witness_row = Vec::with_capacity(edge_rows.len());
            for children in edge_rows {
                debug_assert!(!children.is_empty());
                let mut best_child = children[0];
                let mut best = lambda[t + 1][children[0] as usize].clone();
                for &c in &children[1..] {
                    let cand = &lambda[t + 1][c as usize];
                    if cmp(cand, &best) == Ordering::Greater {
                        best = cand.clone();
                        best_child = c;
                    }
                }
                theta_row.push(best);
                witness_row.push(best_child);
            }
            let g = policy.action(model, t, &aux[t][id])?;
            lambda[t].push(theta_row[g as usize].clone());
            actions[t].push(g);
            theta[t].push(theta_row);
            witness[t].push(witness_row);
        }
    }

    Ok(EvalTables {
        tree,
        theta,
        lambda,
        actions,
        witness,
        terminal_witness,
    })
}

/// Checks |Q - Theta| <= bound and |V - Lambda| <= bound over every
/// reachable memory/action pair, where the per-step bound is
/// 2*alpha_t.
pub fn check_policy_bounds<S: Scalar>(
    model: &SystemModel<S>,
    memory: &crate::exact::MemorySolution<S>,
    eval: &EvalTables<S>,
    alphas: &[S],
) -> Result<crate::bounds::BoundCheckReport<S>> {
    let t_end = model.horizon;
    let mut report = crate::bounds::BoundCheckReport {
        checked: 0,
        violations: Vec::new(),
        max_gap: vec![S::zero(); t_end + 1],
        scope: "reachable memories",
    };
    let two = S::from_count(2);
    for t in 0..=t_end {
        if memory.tree.nodes[t].len() != eval.tree.nodes[t].len() {
            return Err(Error::PolicyMismatch(
                "memory trees of the two evaluations differ".into(),
            ));
        }
        let bound = two.clone() * alphas[t].clone();
        for id in 0..memory.tree.nodes[t].len() {
            report.checked += 1;
            let v_gap = abs_diff(memory.v[t][id].clone(), eval.lambda[t][id].clone());
            if cmp(&v_gap, &report.max_gap[t]) == Ordering::Greater {
                report.max_gap[t] = v_gap.clone();
            }
            if cmp(&v_gap, &bound) == Ordering::Greater {
                report.violations.push(crate::bounds::BoundViolation {
                    t,
                    memory: memory.tree.memory_node(t, id as u32).encoding(),
                    action: None,
                    gap: v_gap,
                    bound: bound.clone(),
                });
            }
            for u in 0..model.n_actions(t) {
                report.checked += 1;
                let q_gap = abs_diff(memory.q[t][id][u].clone(), eval.theta[t][id][u].clone());
                if cmp(&q_gap, &report.max_gap[t]) == Ordering::Greater {
                    report.max_gap[t] = q_gap.clone();
                }
                if cmp(&q_gap, &bound) == Ordering::Greater {
                    report.violations.push(crate::bounds::BoundViolation {
                        t,
                        memory: memory.tree.memory_node(t, id as u32).encoding(),
                        action: Some(u as u32),
                        gap: q_gap,
                        bound: bound.clone(),
                    });
                }
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

/// One realized run: primitive variables, the induced observation/action
/// path and the terminal cost.
#[derive(Debug, Clone)]
pub struct TrajectorySample<S> {
    pub x0: u32,
    pub disturbances: Vec<u32>,
    pub noises: Vec<u32>,
    pub observations: Vec<u32>,
    pub actions: Vec<u32>,
    pub states: Vec<u32>,
    pub cost: S,
}

impl<S: Scalar> TrajectorySample<S> {
    /// Every recorded step matches the model tables.
    pub fn check_consistency(&self, model: &SystemModel<S>) -> Result<()> {
        let t_end = model.horizon;
        let mut x = self.x0;
        for t in 0..=t_end {
            if self.states[t] != x {
                return Err(Error::PolicyMismatch(format!("state mismatch at t={t}")));
            }
            if model.observe(t, x, self.noises[t]) != self.observations[t] {
                return Err(Error::PolicyMismatch(format!(
                    "observation mismatch at t={t}"
                )));
            }
            if t < t_end {
                x = model.next_state(t, x, self.actions[t], self.disturbances[t]);
            }
        }
        let cost = model.terminal_cost_at(self.states[t_end], self.actions[t_end]);
        if cost != self.cost {
            return Err(Error::PolicyMismatch("terminal cost mismatch".into()));
        }
        Ok(())
    }
}

/// Primitive-variable realization shared by paired runs.
struct Primitives {
    x0: u32,
    disturbances: Vec<u32>,
    noises: Vec<u32>,
}

/// Uniformly samples the primitive variables; when `condition_y0` is given,
/// (x0, n0) is drawn uniformly over the pairs consistent with that first
/// observation.
fn sample_primitives<S: Scalar>(
    model: &SystemModel<S>,
    rng: &mut ChaCha8Rng,
    condition_y0: Option<u32>,
) -> Result<Primitives> {
    let t_end = model.horizon;
    let (x0, n0) = match condition_y0 {
        None => {
            let xs = model.initial_states.members();
            let x0 = xs[rng.gen_range(0..xs.len())];
            let n0 = rng.gen_range(0..model.n_noises(0) as u32);
            (x0, n0)
        }
        Some(y0) => {
            let mut consistent = Vec::new();
            for x in model.initial_states.iter() {
                for n in 0..model.n_noises(0) as u32 {
                    if model.observe(0, x, n) == y0 {
                        consistent.push((x, n));
                    }
                }
            }
            if consistent.is_empty() {
                return Err(Error::InfeasibleObservation { y0: y0 as usize });
            }
            consistent[rng.gen_range(0..consistent.len())]
        }
    };
    let mut noises = vec![n0];
    for t in 1..=t_end {
        noises.push(rng.gen_range(0..model.n_noises(t) as u32));
    }
    let disturbances = (0..t_end)
        .map(|t| rng.gen_range(0..model.n_disturbances(t) as u32))
        .collect();
    Ok(Primitives {
        x0,
        disturbances,
        noises,
    })
}

fn run_policy<S: Scalar>(
    model: &SystemModel<S>,
    policy: &RuntimePolicy<S>,
    prim: &Primitives,
) -> Result<TrajectorySample<S>> {
    let t_end = model.horizon;
    let mut states = Vec::with_capacity(t_end + 1);
    let mut observations = Vec::with_capacity(t_end + 1);
    let mut actions = Vec::with_capacity(t_end + 1);
    let mut x = prim.x0;
    states.push(x);
    let y0 = model.observe(0, x, prim.noises[0]);
    observations.push(y0);
    let mut aux = policy.root(model, y0)?;
    for t in 0..=t_end {
        let u = policy.action(model, t, &aux)?;
        actions.push(u);
        if t < t_end {
            x = model.next_state(t, x, u, prim.disturbances[t]);
            states.push(x);
            let y = model.observe(t + 1, x, prim.noises[t + 1]);
            observations.push(y);
            aux = policy.advance(model, t, &aux, u, y)?;
        }
    }
    let cost = model.terminal_cost_at(x, actions[t_end]);
    Ok(TrajectorySample {
        x0: prim.x0,
        disturbances: prim.disturbances.clone(),
        noises: prim.noises.clone(),
        observations,
        actions,
        states,
        cost,
    })
}

pub enum DisturbanceSource<'a, S> {
    /// Independent uniform draws over the feasible sets, seeded per run;
    /// optionally conditioned on a fixed first observation.
    Uniform { condition_y0: Option<u32> },
    /// Replays the argmax witnesses of an adversarial evaluation (every run
    /// is the same worst-case trajectory from the worst root).
    Adversarial(&'a EvalTables<S>),
}

#[derive(Debug, Clone)]
pub struct CostSummary<S> {
    pub runs: usize,
    pub min: Option<S>,
    pub max: Option<S>,
    pub mean: f64,
    /// Distinct realized costs with multiplicities, ascending.
    pub histogram: Vec<(S, usize)>,
}

fn summarize<S: Scalar>(costs: &[S]) -> CostSummary<S> {
    let mut histogram: Vec<(S, usize)> = Vec::new();
    let mut sorted = costs.to_vec();
    sorted.sort_by(cmp);
    for c in sorted {
        match histogram.last_mut() {
            Some((v, n)) if *v == c => *n += 1,
            _ => histogram.push((c, 1)),
        }
    }
    let mean = if costs.is_empty() {
        0.0
    } else {
        costs.iter().map(|c| c.to_f64_value()).sum::<f64>() / costs.len() as f64
    };
    CostSummary {
        runs: costs.len(),
        min: histogram.first().map(|(c, _)| c.clone()),
        max: histogram.last().map(|(c, _)| c.clone()),
        mean,
        histogram,
    }
}

/// Runs a policy `runs` times against the chosen disturbance source. Run k
/// draws from stream k of the seeded generator, so runs are independent and
/// reproducible.
pub fn simulate<S: Scalar>(
    model: &SystemModel<S>,
    policy: &RuntimePolicy<S>,
    source: DisturbanceSource<'_, S>,
    runs: usize,
    seed: u64,
) -> Result<(Vec<TrajectorySample<S>>, CostSummary<S>)> {
    let mut samples = Vec::with_capacity(runs);
    match source {
        DisturbanceSource::Uniform { condition_y0 } => {
            for run in 0..runs {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(run as u64);
                let prim = sample_primitives(model, &mut rng, condition_y0)?;
                samples.push(run_policy(model, policy, &prim)?);
            }
        }
        DisturbanceSource::Adversarial(eval) => {
            let prim = adversarial_primitives(model, eval)?;
            for _ in 0..runs {
                samples.push(run_policy(model, policy, &prim)?);
            }
        }
    }
    let costs: Vec<S> = samples.iter().map(|s| s.cost.clone()).collect();
    let summary = summarize(&costs);
    Ok((samples, summary))
}

/// Reconstructs a primitive realization consistent with the worst-case
/// witness path of an adversarial evaluation.
fn adversarial_primitives<S: Scalar>(
    model: &SystemModel<S>,
    eval: &EvalTables<S>,
) -> Result<Primitives> {
    let t_end = model.horizon;
    let (y0, _) = eval.worst_root();
    let root_id = eval
        .tree
        .roots
        .iter()
        .find(|&&(y, _)| y == y0)
        .map(|&(_, id)| id)
        .expect("worst root exists");

    // Witness memory path and the terminal argmax state.
    let mut path = vec![root_id];
    let mut node = root_id;
    for t in 0..t_end {
        let u = eval.actions[t][node as usize];
        node = eval.witness[t][node as usize][u as usize];
        path.push(node);
    }
    let y_path: Vec<u32> = (0..=t_end)
        .map(|t| eval.tree.nodes[t][path[t] as usize].y)
        .collect();
    let u_path: Vec<u32> = (0..=t_end)
        .map(|t| eval.actions[t][path[t] as usize])
        .collect();
    let x_target =
        eval.terminal_witness[path[t_end] as usize][u_path[t_end] as usize];

    // Depth-first search for primitives realizing (y_path, u_path, x_target).
    fn dfs<S: Scalar>(
        model: &SystemModel<S>,
        t: usize,
        x: u32,
        y_path: &[u32],
        u_path: &[u32],
        x_target: u32,
        disturbances: &mut Vec<u32>,
        noises: &mut Vec<u32>,
    ) -> bool {
        let t_end = model.horizon;
        if t == t_end {
            return x == x_target;
        }
        for w in 0..model.n_disturbances(t) as u32 {
            let x2 = model.next_state(t, x, u_path[t], w);
            for n in 0..model.n_noises(t + 1) as u32 {
                if model.observe(t + 1, x2, n) == y_path[t + 1] {
                    disturbances.push(w);
                    noises.push(n);
                    if dfs(
                        model,
                        t + 1,
                        x2,
                        y_path,
                        u_path,
                        x_target,
                        disturbances,
                        noises,
                    ) {
                        return true;
                    }
                    disturbances.pop();
                    noises.pop();
                    break; // the noise only affects the observation; one consistent n suffices
                }
            }
        }
        false
    }

    for x0 in model.initial_states.iter() {
        for n0 in 0..model.n_noises(0) as u32 {
            if model.observe(0, x0, n0) != y_path[0] {
                continue;
            }
            let mut disturbances = Vec::new();
            let mut noises = vec![n0];
            if dfs(
                model,
                0,
                x0,
                &y_path,
                &u_path,
                x_target,
                &mut disturbances,
                &mut noises,
            ) {
                return Ok(Primitives {
                    x0,
                    disturbances,
                    noises,
                });
            }
        }
    }
    Err(Error::PolicyMismatch(
        "no primitive realization matches the adversarial witness path".into(),
    ))
}

// ---------------------------------------------------------------------------
// Paired comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ComparisonRow<S> {
    pub run: usize,
    pub cost_a: S,
    pub cost_b: S,
    /// cost_a - cost_b.
    pub diff: S,
}

#[derive(Debug, Clone)]
pub struct Comparison<S> {
    pub rows: Vec<ComparisonRow<S>>,
    /// Distinct differences with multiplicities, ascending.
    pub histogram: Vec<(S, usize)>,
    pub min_diff: Option<S>,
    pub max_diff: Option<S>,
    /// Most frequent difference (ties to the smallest value).
    pub mode_diff: Option<S>,
    pub mean_diff: f64,
}

/// Paired evaluation: both policies see identical primitive realizations
/// per run; reports per-run costs and the distribution of cost differences.
pub fn compare_policies<S: Scalar>(
    model: &SystemModel<S>,
    policy_a: &RuntimePolicy<S>,
    policy_b: &RuntimePolicy<S>,
    runs: usize,
    seed: u64,
    condition_y0: Option<u32>,
) -> Result<Comparison<S>> {
    let mut rows = Vec::with_capacity(runs);
    for run in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run as u64);
        let prim = sample_primitives(model, &mut rng, condition_y0)?;
        let a = run_policy(model, policy_a, &prim)?;
        let b = run_policy(model, policy_b, &prim)?;
        debug_assert_eq!(a.x0, b.x0);
        debug_assert_eq!(a.disturbances, b.disturbances);
        debug_assert_eq!(a.noises, b.noises);
        rows.push(ComparisonRow {
            run,
            diff: a.cost.clone() - b.cost.clone(),
            cost_a: a.cost,
            cost_b: b.cost,
        });
    }

    let mut diffs: Vec<S> = rows.iter().map(|r| r.diff.clone()).collect();
    diffs.sort_by(cmp);
    let mut histogram: Vec<(S, usize)> = Vec::new();
    for d in diffs {
        match histogram.last_mut() {
            Some((v, n)) if *v == d => *n += 1,
            _ => histogram.push((d, 1)),
        }
    }
    let mode_diff = histogram
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| cmp(&b.0, &a.0)))
        .map(|(d, _)| d.clone());
    let mean_diff = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.diff.to_f64_value()).sum::<f64>() / rows.len() as f64
    };
    Ok(Comparison {
        min_diff: histogram.first().map(|(d, _)| d.clone()),
        max_diff: histogram.last().map(|(d, _)| d.clone()),
        mode_diff,
        mean_diff,
        histogram,
        rows,
    })
}
