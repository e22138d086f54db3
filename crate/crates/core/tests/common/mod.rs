// Different test binaries use different subsets of these helpers.
#![allow(dead_code)]

//! Shared oracles and toy models for the integration suites.
//!
//! The minimax oracle evaluates the worst-case criterion directly: it
//! enumerates primitive-variable assignments, filters them by the observable
//! history, and recurses over the decision-maker's action choices. It never
//! touches conditional ranges, interning or value tables, so it is an
//! independent check of the solvers.

use minimax_is::metric::MetricTable;
use minimax_is::model::SystemModel;
use minimax_is::scalar::Scalar;
use minimax_is::space::{FiniteSpace, PointSet};

/// One realization of all primitive variables.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub x0: u32,
    pub w: Vec<u32>,
    pub n: Vec<u32>,
}

pub fn all_assignments<S: Scalar>(model: &SystemModel<S>) -> Vec<Assignment> {
    let t_end = model.horizon;
    let mut out = vec![];
    let mut w_choices: Vec<Vec<u32>> = vec![vec![]];
    for t in 0..t_end {
        let mut next = Vec::new();
        for prefix in &w_choices {
            for w in 0..model.n_disturbances(t) as u32 {
                let mut p = prefix.clone();
                p.push(w);
                next.push(p);
            }
        }
        w_choices = next;
    }
    let mut n_choices: Vec<Vec<u32>> = vec![vec![]];
    for t in 0..=t_end {
        let mut next = Vec::new();
        for prefix in &n_choices {
            for n in 0..model.n_noises(t) as u32 {
                let mut p = prefix.clone();
                p.push(n);
                next.push(p);
            }
        }
        n_choices = next;
    }
    for x0 in model.initial_states.iter() {
        for w in &w_choices {
            for n in &n_choices {
                out.push(Assignment {
                    x0,
                    w: w.clone(),
                    n: n.clone(),
                });
            }
        }
    }
    out
}

/// State of an assignment at step t under an action prefix u_0..u_{t-1}.
fn state_at<S: Scalar>(
    model: &SystemModel<S>,
    a: &Assignment,
    actions: &[u32],
    t: usize,
) -> u32 {
    let mut x = a.x0;
    for s in 0..t {
        x = model.next_state(s, x, actions[s], a.w[s]);
    }
    x
}

fn realized_cost<S: Scalar>(
    model: &SystemModel<S>,
    a: &Assignment,
    actions: &[u32],
    additive: bool,
) -> S {
    let t_end = model.horizon;
    let mut total = S::zero();
    if additive {
        for t in 0..t_end {
            let x = state_at(model, a, actions, t);
            total = total
                + model
                    .step_cost_at(t, x, actions[t])
                    .expect("additive oracle needs step costs");
        }
    }
    total + model.terminal_cost_at(state_at(model, a, actions, t_end), actions[t_end])
}

fn minimax_rec<S: Scalar>(
    model: &SystemModel<S>,
    live: &[Assignment],
    actions: &mut Vec<u32>,
    t: usize,
    additive: bool,
) -> S {
    let t_end = model.horizon;
    let mut best: Option<S> = None;
    for u in 0..model.n_actions(t) as u32 {
        actions.push(u);
        let value = if t == t_end {
            let mut worst: Option<S> = None;
            for a in live {
                let c = realized_cost(model, a, actions, additive);
                worst = Some(match worst {
                    None => c,
                    Some(w) => minimax_is::scalar::smax(w, c),
                });
            }
            worst.expect("live set is non-empty")
        } else {
            // Partition the live assignments by the next observation.
            let mut worst: Option<S> = None;
            let mut seen_y = Vec::new();
            for a in live {
                let x_next = state_at(model, a, actions, t + 1);
                let y = model.observe(t + 1, x_next, a.n[t + 1]);
                if seen_y.contains(&y) {
                    continue;
                }
                seen_y.push(y);
                let branch: Vec<Assignment> = live
                    .iter()
                    .filter(|b| {
                        let xb = state_at(model, b, actions, t + 1);
                        model.observe(t + 1, xb, b.n[t + 1]) == y
                    })
                    .cloned()
                    .collect();
                let v = minimax_rec(model, &branch, actions, t + 1, additive);
                worst = Some(match worst {
                    None => v,
                    Some(w) => minimax_is::scalar::smax(w, v),
                });
            }
            worst.expect("live set is non-empty")
        };
        actions.pop();
        best = Some(match best {
            None => value,
            Some(b) => minimax_is::scalar::smin(b, value),
        });
    }
    best.expect("at least one action")
}

/// Worst-case optimal value from the first observation y0, by direct
/// enumeration; `None` when y0 is infeasible.
pub fn minimax_oracle<S: Scalar>(model: &SystemModel<S>, y0: u32, additive: bool) -> Option<S> {
    let live: Vec<Assignment> = all_assignments(model)
        .into_iter()
        .filter(|a| model.observe(0, a.x0, a.n[0]) == y0)
        .collect();
    if live.is_empty() {
        return None;
    }
    Some(minimax_rec(model, &live, &mut Vec::new(), 0, additive))
}

/// Worst realized cost of a fixed strategy from y0, by simulating every
/// consistent assignment. The strategy sees the full history.
pub fn policy_worstcase_oracle<S: Scalar>(
    model: &SystemModel<S>,
    y0: u32,
    mut policy: impl FnMut(usize, &[u32], &[u32]) -> u32,
) -> Option<S> {
    let t_end = model.horizon;
    let mut worst: Option<S> = None;
    for a in all_assignments(model) {
        if model.observe(0, a.x0, a.n[0]) != y0 {
            continue;
        }
        let mut ys = vec![y0];
        let mut us: Vec<u32> = Vec::new();
        let mut x = a.x0;
        for t in 0..=t_end {
            let u = policy(t, &ys, &us);
            us.push(u);
            if t < t_end {
                x = model.next_state(t, x, u, a.w[t]);
                ys.push(model.observe(t + 1, x, a.n[t + 1]));
            }
        }
        let c = model.terminal_cost_at(x, us[t_end]);
        worst = Some(match worst {
            None => c,
            Some(w) => minimax_is::scalar::smax(w, c),
        });
    }
    worst
}

/// Uninformative two-state, two-action toy with c_T(x,u) = |x - u|.
pub fn uninformative_toy() -> SystemModel<f64> {
    let two = FiniteSpace::indexed(2);
    let one = FiniteSpace::indexed(1);
    SystemModel {
        horizon: 0,
        state_spaces: vec![two.clone()],
        action_spaces: vec![two],
        disturbance_spaces: vec![one.clone()],
        noise_spaces: vec![one.clone()],
        observation_spaces: vec![one],
        dynamics: vec![],
        observation: vec![vec![vec![0], vec![0]]],
        terminal_cost: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        step_costs: None,
        initial_states: PointSet::new(vec![0, 1]),
        state_metrics: vec![MetricTable::line(2)],
        observation_metrics: vec![MetricTable::line(1)],
    }
}

/// Perfectly observed single-stage toy (T=0) with distinct optimal actions
/// per state.
pub fn perfect_toy() -> SystemModel<f64> {
    let two = FiniteSpace::indexed(2);
    let one = FiniteSpace::indexed(1);
    SystemModel {
        horizon: 0,
        state_spaces: vec![two.clone()],
        action_spaces: vec![two.clone()],
        disturbance_spaces: vec![one.clone()],
        noise_spaces: vec![one],
        observation_spaces: vec![two],
        dynamics: vec![],
        observation: vec![vec![vec![0], vec![1]]],
        terminal_cost: vec![vec![2.0, 5.0], vec![7.0, 3.0]],
        step_costs: None,
        initial_states: PointSet::new(vec![0, 1]),
        state_metrics: vec![MetricTable::line(2)],
        observation_metrics: vec![MetricTable::line(2)],
    }
}

/// Two-state flip system over one step: the disturbance flips the state,
/// observations are uninformative.
pub fn flip_toy() -> SystemModel<f64> {
    let two = FiniteSpace::indexed(2);
    let one = FiniteSpace::indexed(1);
    SystemModel {
        horizon: 1,
        state_spaces: vec![two.clone(), two.clone()],
        action_spaces: vec![two.clone(), two.clone()],
        disturbance_spaces: vec![two.clone(), two],
        noise_spaces: vec![one.clone(), one.clone()],
        observation_spaces: vec![one.clone(), one],
        dynamics: vec![vec![
            vec![vec![0, 1], vec![0, 1]],
            vec![vec![1, 0], vec![1, 0]],
        ]],
        observation: vec![vec![vec![0], vec![0]], vec![vec![0], vec![0]]],
        terminal_cost: vec![vec![0.0, 4.0], vec![4.0, 0.0]],
        step_costs: None,
        initial_states: PointSet::new(vec![0]),
        state_metrics: vec![MetricTable::line(2), MetricTable::line(2)],
        observation_metrics: vec![MetricTable::line(1), MetricTable::line(1)],
    }
}
