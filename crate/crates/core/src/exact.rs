//! Exact worst-case solvers: backward induction over full memories and over
//! conditional ranges, plus the equivalence and information-state property
//! checkers.
//!
//! All checkers quantify over *reachable* memories (those consistent with at
//! least one realization of the primitive variables); reports carry that
//! scope explicitly.

use crate::error::{Error, Result};
use crate::model::{MemoryNode, SystemModel};
use crate::scalar::{cmp, Scalar};
use crate::space::PointSet;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

/// Node-count guard for exhaustive enumerations.
#[derive(Debug, Clone, Copy)]
pub struct SolveBudget {
    pub max_nodes: usize,
}

impl Default for SolveBudget {
    fn default() -> Self {
        // The memory solver exists as an oracle, not a production path.
        Self {
            max_nodes: 5_000_000,
        }
    }
}

/// Realization of the conditional range of the state given a memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionalRange {
    pub t: usize,
    pub members: PointSet,
}

/// States at t=0 consistent with the first observation: all initial states
/// x with h_0(x, n) = y0 for some noise n. Errors when empty (the
/// observation cannot occur under the model).
pub fn initial_range<S: Scalar>(model: &SystemModel<S>, y0: u32) -> Result<ConditionalRange> {
    let n_noise = model.n_noises(0) as u32;
    let members: PointSet = model
        .initial_states
        .iter()
        .filter(|&x| (0..n_noise).any(|n| model.observe(0, x, n) == y0))
        .collect();
    if members.is_empty() {
        return Err(Error::InfeasibleObservation { y0: y0 as usize });
    }
    Ok(ConditionalRange { t: 0, members })
}

/// One-step image of `current` under action `u`: all states reachable by
/// some disturbance, sorted and duplicate-free.
fn forward_image<S: Scalar>(
    model: &SystemModel<S>,
    t: usize,
    current: &PointSet,
    u: u32,
) -> Vec<u32> {
    let n_dist = model.n_disturbances(t) as u32;
    let mut image = Vec::with_capacity(current.len() * n_dist as usize);
    for x in current.iter() {
        for w in 0..n_dist {
            image.push(model.next_state(t, x, u, w));
        }
    }
    image.sort_unstable();
    image.dedup();
    image
}

/// Conditional-range transition: the states reachable from `current` under
/// action `u` that are consistent with observing `y_next` at t+1. An empty
/// result signals that `y_next` cannot follow `(current, u)`.
pub fn range_update<S: Scalar>(
    model: &SystemModel<S>,
    t: usize,
    current: &PointSet,
    u: u32,
    y_next: u32,
) -> PointSet {
    let n_noise = model.n_noises(t + 1) as u32;
    forward_image(model, t, current, u)
        .into_iter()
        .filter(|&x2| (0..n_noise).any(|n| model.observe(t + 1, x2, n) == y_next))
        .collect()
}

/// Successor ranges keyed by the observation that produces them, ascending
/// in the observation index; only feasible observations appear.
pub fn successors_by_observation<S: Scalar>(
    model: &SystemModel<S>,
    t: usize,
    current: &PointSet,
    u: u32,
) -> Vec<(u32, PointSet)> {
    let image = forward_image(model, t, current, u);
    let n_noise = model.n_noises(t + 1) as u32;
    let mut pairs = Vec::with_capacity(image.len() * n_noise as usize);
    for &x2 in &image {
        for n in 0..n_noise {
            pairs.push((model.observe(t + 1, x2, n), x2));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let mut out = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let y = pairs[i].0;
        let mut members = Vec::new();
        while i < pairs.len() && pairs[i].0 == y {
            members.push(pairs[i].1);
            i += 1;
        }
        out.push((y, PointSet::new(members)));
    }
    out
}

/// Observations that can follow `(current, u)`; never empty for a non-empty
/// range.
pub fn feasible_observations<S: Scalar>(
    model: &SystemModel<S>,
    t: usize,
    current: &PointSet,
    u: u32,
) -> PointSet {
    successors_by_observation(model, t, current, u)
        .into_iter()
        .map(|(y, _)| y)
        .collect()
}

// ---------------------------------------------------------------------------
// Conditional-range (information-state) DP
// ---------------------------------------------------------------------------

/// Value tables and policy of the conditional-range DP. States are interned
/// per step; ids are assigned in discovery order, which is deterministic.
#[derive(Debug, Clone)]
pub struct InfostateSolution<S> {
    pub horizon: usize,
    pub states: Vec<Vec<PointSet>>,
    index: Vec<HashMap<PointSet, u32>>,
    /// `succ[t][sid][u]` = sorted successor state ids at t+1 (t < T).
    pub succ: Vec<Vec<Vec<Vec<u32>>>>,
    pub q: Vec<Vec<Vec<S>>>,
    pub v: Vec<Vec<S>>,
    pub policy: Vec<Vec<u32>>,
    /// (y0, state id at t=0) per feasible root, ascending in y0.
    pub roots: Vec<(u32, u32)>,
}

impl<S: Scalar> InfostateSolution<S> {
    pub fn state_id(&self, t: usize, range: &PointSet) -> Option<u32> {
        self.index[t].get(range).copied()
    }

    pub fn root_state(&self, y0: u32) -> Option<u32> {
        self.roots
            .binary_search_by_key(&y0, |&(y, _)| y)
            .ok()
            .map(|i| self.roots[i].1)
    }

    /// Optimal worst-case value from the initial observation y0.
    pub fn root_value(&self, y0: u32) -> Option<S> {
        self.root_state(y0).map(|sid| self.v[0][sid as usize].clone())
    }

    pub fn n_states_total(&self) -> usize {
        self.states.iter().map(Vec::len).sum()
    }
}

/// Solves the conditional-range DP from every feasible initial observation.
pub fn solve_infostate_dp<S: Scalar>(
    model: &SystemModel<S>,
    budget: SolveBudget,
) -> Result<InfostateSolution<S>> {
    solve_infostate_dp_scoped(model, None, budget)
}

/// As [`solve_infostate_dp`], but restricted to the given initial
/// observations when `roots` is `Some` (an infeasible requested root is an
/// error).
pub fn solve_infostate_dp_scoped<S: Scalar>(
    model: &SystemModel<S>,
    roots: Option<&[u32]>,
    budget: SolveBudget,
) -> Result<InfostateSolution<S>> {
    let t_end = model.horizon;
    let mut states: Vec<Vec<PointSet>> = vec![Vec::new(); t_end + 1];
    let mut index: Vec<HashMap<PointSet, u32>> = vec![HashMap::new(); t_end + 1];
    let mut roots_out = Vec::new();

    let intern = |states: &mut Vec<Vec<PointSet>>,
                      index: &mut Vec<HashMap<PointSet, u32>>,
                      t: usize,
                      range: PointSet|
     -> u32 {
        if let Some(&sid) = index[t].get(&range) {
            return sid;
        }
        let sid = states[t].len() as u32;
        index[t].insert(range.clone(), sid);
        states[t].push(range);
        sid
    };

    match roots {
        Some(list) => {
            let mut sorted: Vec<u32> = list.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            for y0 in sorted {
                let r = initial_range(model, y0)?;
                let sid = intern(&mut states, &mut index, 0, r.members);
                roots_out.push((y0, sid));
            }
        }
        None => {
            for y0 in 0..model.n_observations(0) as u32 {
                if let Ok(r) = initial_range(model, y0) {
                    let sid = intern(&mut states, &mut index, 0, r.members);
                    roots_out.push((y0, sid));
                }
            }
        }
    }
    if roots_out.is_empty() {
        return Err(Error::InfeasibleObservation { y0: 0 });
    }

    let mut succ: Vec<Vec<Vec<Vec<u32>>>> = vec![Vec::new(); t_end];
    let mut total = states[0].len();
    for t in 0..t_end {
        let n_actions = model.n_actions(t) as u32;
        let expanded: Vec<Vec<Vec<PointSet>>> = states[t]
            .par_iter()
            .map(|range| {
                (0..n_actions)
                    .map(|u| {
                        successors_by_observation(model, t, range, u)
                            .into_iter()
                            .map(|(_, next)| next)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        for per_state in expanded {
            let mut per_state_ids = Vec::with_capacity(per_state.len());
            for per_action in per_state {
                let mut ids: Vec<u32> = per_action
                    .into_iter()
                    .map(|next| intern(&mut states, &mut index, t + 1, next))
                    .collect();
                ids.sort_unstable();
                ids.dedup();
                debug_assert!(!ids.is_empty());
                per_state_ids.push(ids);
            }
            succ[t].push(per_state_ids);
        }
        total += states[t + 1].len();
        if total > budget.max_nodes {
            return Err(Error::Capacity {
                what: "conditional-range enumeration".into(),
                reached: total,
                budget: budget.max_nodes,
                hint: "raise the budget or quantize the state space".into(),
            });
        }
    }

    let (q, v, policy) = backward_induction(model, &states, &succ);
    Ok(InfostateSolution {
        horizon: t_end,
        states,
        index,
        succ,
        q,
        v,
        policy,
        roots: roots_out,
    })
}

/// Terminal worst-case cost over a range: max over members of c_T(x, u).
pub fn terminal_q<S: Scalar>(model: &SystemModel<S>, range: &PointSet, u: u32) -> S {
    let mut best: Option<S> = None;
    for x in range.iter() {
        let c = model.terminal_cost_at(x, u);
        best = Some(match best {
            None => c,
            Some(b) => {
                if cmp(&c, &b) == Ordering::Greater {
                    c
                } else {
                    b
                }
            }
        });
    }
    best.expect("range is non-empty")
}

/// Lowest-index argmin over the action axis.
pub(crate) fn argmin_action<S: Scalar>(q_row: &[S]) -> (u32, S) {
    let mut best_u = 0u32;
    let mut best = q_row[0].clone();
    for (u, q) in q_row.iter().enumerate().skip(1) {
        if cmp(q, &best) == Ordering::Less {
            best = q.clone();
            best_u = u as u32;
        }
    }
    (best_u, best)
}

fn backward_induction<S: Scalar>(
    model: &SystemModel<S>,
    states: &[Vec<PointSet>],
    succ: &[Vec<Vec<Vec<u32>>>],
) -> (Vec<Vec<Vec<S>>>, Vec<Vec<S>>, Vec<Vec<u32>>) {
    let t_end = model.horizon;
    let mut q: Vec<Vec<Vec<S>>> = vec![Vec::new(); t_end + 1];
    let mut v: Vec<Vec<S>> = vec![Vec::new(); t_end + 1];
    let mut policy: Vec<Vec<u32>> = vec![Vec::new(); t_end + 1];

    let n_actions = model.n_actions(t_end) as u32;
    let terminal: Vec<(Vec<S>, S, u32)> = states[t_end]
        .par_iter()
        .map(|range| {
            let q_row: Vec<S> = (0..n_actions).map(|u| terminal_q(model, range, u)).collect();
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

// ---------------------------------------------------------------------------
// Memory enumeration and the memory DP
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MemoryTreeNode {
    /// Parent node id at t-1 (0 and unused at t=0).
    pub parent: u32,
    /// Action taken at t-1 (unused at t=0).
    pub action: u32,
    /// Observation received at t.
    pub y: u32,
    /// Conditional range realization of this memory.
    pub range: PointSet,
}

/// All reachable memories, stratified by step, with the conditional range
/// carried on every node.
#[derive(Debug, Clone)]
pub struct MemoryTree {
    pub horizon: usize,
    pub nodes: Vec<Vec<MemoryTreeNode>>,
    /// `edges[t][node][u]` = child node ids at t+1, ascending in y (t < T).
    pub edges: Vec<Vec<Vec<Vec<u32>>>>,
    pub roots: Vec<(u32, u32)>,
}

impl MemoryTree {
    /// Reconstructs the observation/action sequences of a node.
    pub fn memory_node(&self, t: usize, id: u32) -> MemoryNode {
        let mut observations = vec![0u32; t + 1];
        let mut actions = vec![0u32; t];
        let mut step = t;
        let mut cur = id;
        loop {
            let node = &self.nodes[step][cur as usize];
            observations[step] = node.y;
            if step == 0 {
                break;
            }
            actions[step - 1] = node.action;
            cur = node.parent;
            step -= 1;
        }
        MemoryNode {
            t,
            observations,
            actions,
        }
    }

    pub fn n_nodes_total(&self) -> usize {
        self.nodes.iter().map(Vec::len).sum()
    }
}

/// Breadth-first enumeration of reachable memories (optionally restricted to
/// given initial observations), guarded by the node budget.
pub fn enumerate_memories<S: Scalar>(
    model: &SystemModel<S>,
    roots: Option<&[u32]>,
    budget: SolveBudget,
) -> Result<MemoryTree> {
    let t_end = model.horizon;
    let mut nodes: Vec<Vec<MemoryTreeNode>> = vec![Vec::new(); t_end + 1];
    let mut edges: Vec<Vec<Vec<Vec<u32>>>> = vec![Vec::new(); t_end];
    let mut roots_out = Vec::new();

    match roots {
        Some(list) => {
            let mut sorted: Vec<u32> = list.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            for y0 in sorted {
                let r = initial_range(model, y0)?;
                roots_out.push((y0, nodes[0].len() as u32));
                nodes[0].push(MemoryTreeNode {
                    parent: 0,
                    action: 0,
                    y: y0,
                    range: r.members,
                });
            }
        }
        None => {
            for y0 in 0..model.n_observations(0) as u32 {
                if let Ok(r) = initial_range(model, y0) {
                    roots_out.push((y0, nodes[0].len() as u32));
                    nodes[0].push(MemoryTreeNode {
                        parent: 0,
                        action: 0,
                        y: y0,
                        range: r.members,
                    });
                }
            }
        }
    }
    if roots_out.is_empty() {
        return Err(Error::InfeasibleObservation { y0: 0 });
    }

    let mut total = nodes[0].len();
    for t in 0..t_end {
        let n_actions = model.n_actions(t) as u32;
        let expanded: Vec<Vec<Vec<(u32, PointSet)>>> = nodes[t]
            .par_iter()
            .map(|node| {
                (0..n_actions)
                    .map(|u| successors_by_observation(model, t, &node.range, u))
                    .collect()
            })
            .collect();
        for (id, per_action) in expanded.into_iter().enumerate() {
            let mut edge_rows = Vec::with_capacity(per_action.len());
            for (u, children) in per_action.into_iter().enumerate() {
                let mut ids = Vec::with_capacity(children.len());
                for (y, range) in children {
                    let child_id = nodes[t + 1].len() as u32;
                    nodes[t + 1].push(MemoryTreeNode {
                        parent: id as u32,
                        action: u as u32,
                        y,
                        range,
                    });
                    ids.push(child_id);
                }
                edge_rows.push(ids);
            }
            edges[t].push(edge_rows);
        }
        total += nodes[t + 1].len();
        if total > budget.max_nodes {
            return Err(Error::Capacity {
                what: "memory enumeration".into(),
                reached: total,
                budget: budget.max_nodes,
                hint: "the memory DP is exponential; use the info-state solver".into(),
            });
        }
    }

    Ok(MemoryTree {
        horizon: t_end,
        nodes,
        edges,
        roots: roots_out,
    })
}

/// Value tables and policy of the memory DP.
#[derive(Debug, Clone)]
pub struct MemorySolution<S> {
    pub tree: MemoryTree,
    pub q: Vec<Vec<Vec<S>>>,
    pub v: Vec<Vec<S>>,
    pub policy: Vec<Vec<u32>>,
}

impl<S: Scalar> MemorySolution<S> {
    pub fn root_value(&self, y0: u32) -> Option<S> {
        self.tree
            .roots
            .iter()
            .find(|&&(y, _)| y == y0)
            .map(|&(_, id)| self.v[0][id as usize].clone())
    }
}

/// Exhaustive backward induction over full observation/action histories.
pub fn solve_memory_dp<S: Scalar>(
    model: &SystemModel<S>,
    budget: SolveBudget,
) -> Result<MemorySolution<S>> {
    let tree = enumerate_memories(model, None, budget)?;
    let t_end = model.horizon;
    let mut q: Vec<Vec<Vec<S>>> = vec![Vec::new(); t_end + 1];
    let mut v: Vec<Vec<S>> = vec![Vec::new(); t_end + 1];
    let mut policy: Vec<Vec<u32>> = vec![Vec::new(); t_end + 1];

    let n_actions = model.n_actions(t_end) as u32;
    for node in &tree.nodes[t_end] {
        let q_row: Vec<S> = (0..n_actions)
            .map(|u| terminal_q(model, &node.range, u))
            .collect();
        let (u, val) = argmin_action(&q_row);
        q[t_end].push(q_row);
        v[t_end].push(val);
        policy[t_end].push(u);
    }

    for t in (0..t_end).rev() {
        for edge_rows in &tree.edges[t] {
            let q_row: Vec<S> = edge_rows
                .iter()
                .map(|children| {
                    debug_assert!(!children.is_empty());
                    let mut best = v[t + 1][children[0] as usize].clone();
                    for &c in &children[1..] {
                        let cand = &v[t + 1][c as usize];
                        if cmp(cand, &best) == Ordering::Greater {
                            best = cand.clone();
                        }
                    }
                    best
                })
                .collect();
            let (u, val) = argmin_action(&q_row);
            q[t].push(q_row);
            v[t].push(val);
            policy[t].push(u);
        }
    }

    Ok(MemorySolution {
        tree,
        q,
        v,
        policy,
    })
}

// ---------------------------------------------------------------------------
// Equivalence of the two exact DPs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Discrepancy<S> {
    MissingState {
        t: usize,
        memory: Vec<u32>,
    },
    ValueMismatch {
        t: usize,
        memory: Vec<u32>,
        /// None compares V, Some(u) compares Q at action u.
        action: Option<u32>,
        memory_value: S,
        infostate_value: S,
    },
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport<S> {
    pub checked_memories: usize,
    pub checked_values: usize,
    pub discrepancies: Vec<Discrepancy<S>>,
    /// Quantifier scope of the check.
    pub scope: &'static str,
}

impl<S> EquivalenceReport<S> {
    pub fn passed(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Runs both exact solvers and asserts exact equality of values on every
/// reachable memory/action pair, via the conditional range of each memory.
pub fn check_dp_equivalence<S: Scalar>(
    model: &SystemModel<S>,
    budget: SolveBudget,
) -> Result<EquivalenceReport<S>> {
    let mem = solve_memory_dp(model, budget)?;
    let info = solve_infostate_dp(model, budget)?;
    let mut report = EquivalenceReport {
        checked_memories: 0,
        checked_values: 0,
        discrepancies: Vec::new(),
        scope: "reachable memories",
    };
    for t in 0..=model.horizon {
        for (id, node) in mem.tree.nodes[t].iter().enumerate() {
            report.checked_memories += 1;
            let Some(sid) = info.state_id(t, &node.range) else {
                report.discrepancies.push(Discrepancy::MissingState {
                    t,
                    memory: mem.tree.memory_node(t, id as u32).encoding(),
                });
                continue;
            };
            let sid = sid as usize;
            report.checked_values += 1;
            if mem.v[t][id] != info.v[t][sid] {
                report.discrepancies.push(Discrepancy::ValueMismatch {
                    t,
                    memory: mem.tree.memory_node(t, id as u32).encoding(),
                    action: None,
                    memory_value: mem.v[t][id].clone(),
                    infostate_value: info.v[t][sid].clone(),
                });
            }
            for (u, (qm, qi)) in mem.q[t][id].iter().zip(info.q[t][sid].iter()).enumerate() {
                report.checked_values += 1;
                if qm != qi {
                    report.discrepancies.push(Discrepancy::ValueMismatch {
                        t,
                        memory: mem.tree.memory_node(t, id as u32).encoding(),
                        action: Some(u as u32),
                        memory_value: qm.clone(),
                        infostate_value: qi.clone(),
                    });
                }
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Information-state property verification
// ---------------------------------------------------------------------------

/// Context handed to a candidate information-state map.
pub struct MemoryCtx<'a> {
    pub t: usize,
    pub node: &'a MemoryNode,
    pub range: &'a PointSet,
}

/// Built-in candidate: the conditional range itself.
pub fn sigma_conditional_range(ctx: &MemoryCtx<'_>) -> Vec<u32> {
    ctx.range.members().to_vec()
}

/// Built-in candidate: the full memory (trivially an information state).
pub fn sigma_identity(ctx: &MemoryCtx<'_>) -> Vec<u32> {
    ctx.node.encoding()
}

/// Built-in candidate: a constant map (fails whenever costs separate
/// memories).
pub fn sigma_constant(_ctx: &MemoryCtx<'_>) -> Vec<u32> {
    Vec::new()
}

#[derive(Debug, Clone)]
pub struct PropertyWitness {
    pub t: usize,
    pub memory: Vec<u32>,
    pub action: Option<u32>,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct PropertyCheck {
    pub checked: usize,
    pub witness: Option<PropertyWitness>,
}

impl PropertyCheck {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Result of checking the two defining properties of an information state
/// for a candidate compression of the memory.
#[derive(Debug, Clone)]
pub struct InfoStateCheckReport {
    /// Terminal-cost sufficiency: the worst-case terminal cost through the
    /// candidate encoding matches the memory's own.
    pub terminal_cost_property: PropertyCheck,
    /// Self-prediction sufficiency: successor encoding sets conditioned on
    /// the memory match those conditioned on the encoding class.
    pub evolution_property: PropertyCheck,
    pub scope: &'static str,
}

impl InfoStateCheckReport {
    pub fn passed(&self) -> bool {
        self.terminal_cost_property.passed() && self.evolution_property.passed()
    }
}

/// Verifies the two information-state properties for a candidate map over
/// all reachable memories. Conditioning on an encoding is interpreted as the
/// union over reachable memories sharing it.
pub fn verify_information_state<S: Scalar>(
    model: &SystemModel<S>,
    sigma: impl Fn(&MemoryCtx<'_>) -> Vec<u32>,
    budget: SolveBudget,
) -> Result<InfoStateCheckReport> {
    let tree = enumerate_memories(model, None, budget)?;
    let t_end = model.horizon;

    // Encode every node once.
    let mut encodings: Vec<Vec<Vec<u32>>> = Vec::with_capacity(t_end + 1);
    for t in 0..=t_end {
        let mut per_t = Vec::with_capacity(tree.nodes[t].len());
        for (id, node) in tree.nodes[t].iter().enumerate() {
            let memory = tree.memory_node(t, id as u32);
            per_t.push(sigma(&MemoryCtx {
                t,
                node: &memory,
                range: &node.range,
            }));
        }
        encodings.push(per_t);
    }

    // Group nodes by encoding per step.
    let classes: Vec<HashMap<&Vec<u32>, Vec<u32>>> = (0..=t_end)
        .map(|t| {
            let mut map: HashMap<&Vec<u32>, Vec<u32>> = HashMap::new();
            for (id, enc) in encodings[t].iter().enumerate() {
                map.entry(enc).or_default().push(id as u32);
            }
            map
        })
        .collect();

    // Terminal-cost sufficiency: per class, compare each member's worst-case
    // terminal cost against the class-union range.
    let mut terminal_check = PropertyCheck {
        checked: 0,
        witness: None,
    };
    'outer_t: for members in classes[t_end].values() {
        let mut union = tree.nodes[t_end][members[0] as usize].range.clone();
        for &id in &members[1..] {
            union = union.union(&tree.nodes[t_end][id as usize].range);
        }
        for &id in members {
            let range = &tree.nodes[t_end][id as usize].range;
            for u in 0..model.n_actions(t_end) as u32 {
                terminal_check.checked += 1;
                let own = terminal_q(model, range, u);
                let through_class = terminal_q(model, &union, u);
                if own != through_class {
                    terminal_check.witness = Some(PropertyWitness {
                        t: t_end,
                        memory: tree.memory_node(t_end, id).encoding(),
                        action: Some(u),
                        detail: format!(
                            "worst-case terminal cost {own} through memory vs {through_class} through encoding class"
                        ),
                    });
                    break 'outer_t;
                }
            }
        }
    }

    // Self-prediction sufficiency: successor-encoding sets per (memory,
    // action) must equal the class union.
    let mut evolution_check = PropertyCheck {
        checked: 0,
        witness: None,
    };
    'outer_e: for t in 0..t_end {
        let successor_set = |id: u32, u: usize| -> BTreeSet<&Vec<u32>> {
            tree.edges[t][id as usize][u]
                .iter()
                .map(|&child| &encodings[t + 1][child as usize])
                .collect()
        };
        for members in classes[t].values() {
            for u in 0..model.n_actions(t) {
                let mut class_union: BTreeSet<&Vec<u32>> = BTreeSet::new();
                for &id in members {
                    class_union.extend(successor_set(id, u));
                }
                for &id in members {
                    evolution_check.checked += 1;
                    let own = successor_set(id, u);
                    if own != class_union {
                        evolution_check.witness = Some(PropertyWitness {
                            t,
                            memory: tree.memory_node(t, id).encoding(),
                            action: Some(u as u32),
                            detail: format!(
                                "successor encodings through memory ({} sets) differ from encoding class ({} sets)",
                                own.len(),
                                class_union.len()
                            ),
                        });
                        break 'outer_e;
                    }
                }
            }
        }
    }

    Ok(InfoStateCheckReport {
        terminal_cost_property: terminal_check,
        evolution_property: evolution_check,
        scope: "reachable memories",
    })
}
