//! Declarative model of a finite, partially observed controlled system.

use crate::error::{Error, Result};
use crate::metric::MetricTable;
use crate::scalar::{cmp, Scalar};
use crate::space::{FiniteSpace, PointSet};
use std::cmp::Ordering;
use std::fmt;

/// Finite-horizon system: per-step finite spaces, dense transition and
/// observation tables, a terminal cost table and optional per-step costs.
///
/// Conventions: steps run t = 0..=T. `dynamics[t]` maps (x, u, w) at step t
/// to the successor state index at t+1 (so it has length T); `observation[t]`
/// maps (x, n) to an observation index at step t (length T+1). Primitive
/// variables (initial state, disturbances, noises) carry no distributions,
/// only their feasible sets; independence is encoded by the product
/// structure of the tables.
#[derive(Debug, Clone)]
pub struct SystemModel<S> {
    pub horizon: usize,
    pub state_spaces: Vec<FiniteSpace>,
    pub action_spaces: Vec<FiniteSpace>,
    pub disturbance_spaces: Vec<FiniteSpace>,
    pub noise_spaces: Vec<FiniteSpace>,
    pub observation_spaces: Vec<FiniteSpace>,
    /// `dynamics[t][x][u][w]` = successor state index in `state_spaces[t+1]`.
    pub dynamics: Vec<Vec<Vec<Vec<u32>>>>,
    /// `observation[t][x][n]` = observation index in `observation_spaces[t]`.
    pub observation: Vec<Vec<Vec<u32>>>,
    /// `terminal_cost[x][u]` over `state_spaces[T]` x `action_spaces[T]`.
    pub terminal_cost: Vec<Vec<S>>,
    /// `step_costs[t][x][u]` for t = 0..T-1, when the criterion is additive.
    pub step_costs: Option<Vec<Vec<Vec<S>>>>,
    pub initial_states: PointSet,
    pub state_metrics: Vec<MetricTable<S>>,
    pub observation_metrics: Vec<MetricTable<S>>,
}

impl<S: Scalar> SystemModel<S> {
    pub fn n_states(&self, t: usize) -> usize {
        self.state_spaces[t].len()
    }

    pub fn n_actions(&self, t: usize) -> usize {
        self.action_spaces[t].len()
    }

    pub fn n_disturbances(&self, t: usize) -> usize {
        self.disturbance_spaces[t].len()
    }

    pub fn n_noises(&self, t: usize) -> usize {
        self.noise_spaces[t].len()
    }

    pub fn n_observations(&self, t: usize) -> usize {
        self.observation_spaces[t].len()
    }

    /// Successor state f_t(x, u, w).
    pub fn next_state(&self, t: usize, x: u32, u: u32, w: u32) -> u32 {
        self.dynamics[t][x as usize][u as usize][w as usize]
    }

    /// Observation h_t(x, n).
    pub fn observe(&self, t: usize, x: u32, n: u32) -> u32 {
        self.observation[t][x as usize][n as usize]
    }

    pub fn terminal_cost_at(&self, x: u32, u: u32) -> S {
        self.terminal_cost[x as usize][u as usize].clone()
    }

    pub fn step_cost_at(&self, t: usize, x: u32, u: u32) -> Option<S> {
        self.step_costs
            .as_ref()
            .map(|c| c[t][x as usize][u as usize].clone())
    }

    /// True when every observation reveals the state exactly: Y_t = X_t and
    /// h_t(x, n) = x for all n.
    pub fn is_perfectly_observed(&self) -> bool {
        (0..=self.horizon).all(|t| {
            self.n_observations(t) == self.n_states(t)
                && (0..self.n_states(t) as u32)
                    .all(|x| (0..self.n_noises(t) as u32).all(|n| self.observe(t, x, n) == x))
        })
    }

    /// Worst-case terminal cost at (x_T, u_T) maxima are finite by
    /// validation; convenience for reports.
    pub fn max_terminal_cost(&self) -> S {
        let mut best = S::zero();
        for row in &self.terminal_cost {
            for c in row {
                if cmp(c, &best) == Ordering::Greater {
                    best = c.clone();
                }
            }
        }
        best
    }

    /// Re-types every numeric table through `f64`. Exact for integer-valued
    /// tables; used to move between the fast float path and exact rationals.
    pub fn convert<T: Scalar>(&self) -> Result<SystemModel<T>> {
        let conv = |v: &S| -> Result<T> {
            let f = v.to_f64_value();
            T::from_f64_value(f).ok_or(Error::ScalarConversion(f))
        };
        let conv_table2 = |t: &Vec<Vec<S>>| -> Result<Vec<Vec<T>>> {
            t.iter()
                .map(|row| row.iter().map(conv).collect())
                .collect()
        };
        let step_costs = match &self.step_costs {
            None => None,
            Some(tables) => Some(
                tables
                    .iter()
                    .map(conv_table2)
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(SystemModel {
            horizon: self.horizon,
            state_spaces: self.state_spaces.clone(),
            action_spaces: self.action_spaces.clone(),
            disturbance_spaces: self.disturbance_spaces.clone(),
            noise_spaces: self.noise_spaces.clone(),
            observation_spaces: self.observation_spaces.clone(),
            dynamics: self.dynamics.clone(),
            observation: self.observation.clone(),
            terminal_cost: conv_table2(&self.terminal_cost)?,
            step_costs,
            initial_states: self.initial_states.clone(),
            state_metrics: self
                .state_metrics
                .iter()
                .map(|m| m.convert::<T>())
                .collect::<Result<Vec<_>>>()?,
            observation_metrics: self
                .observation_metrics
                .iter()
                .map(|m| m.convert::<T>())
                .collect::<Result<Vec<_>>>()?,
        })
    }

    /// Full structural and codomain validation. Violations are data, not
    /// failures; an empty report means the model is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let stages = self.horizon + 1;

        let mut check_len = |what: &'static str, got: usize, expected: usize| {
            if got != expected {
                out.push(Violation::Shape {
                    what,
                    detail: format!("expected {expected} entries, got {got}"),
                });
            }
        };
        check_len("state_spaces", self.state_spaces.len(), stages);
        check_len("action_spaces", self.action_spaces.len(), stages);
        check_len("disturbance_spaces", self.disturbance_spaces.len(), stages);
        check_len("noise_spaces", self.noise_spaces.len(), stages);
        check_len("observation_spaces", self.observation_spaces.len(), stages);
        check_len("dynamics", self.dynamics.len(), self.horizon);
        check_len("observation", self.observation.len(), stages);
        check_len("state_metrics", self.state_metrics.len(), stages);
        check_len(
            "observation_metrics",
            self.observation_metrics.len(),
            stages,
        );
        if let Some(c) = &self.step_costs {
            check_len("step_costs", c.len(), self.horizon);
        }
        if !out.is_empty() {
            // Shape is broken; deeper indexing would be meaningless.
            return out;
        }

        for t in 0..self.horizon {
            let (nx, nu, nw) = (self.n_states(t), self.n_actions(t), self.n_disturbances(t));
            let nx_next = self.n_states(t + 1);
            if self.dynamics[t].len() != nx
                || self.dynamics[t].iter().any(|per_x| {
                    per_x.len() != nu || per_x.iter().any(|per_u| per_u.len() != nw)
                })
            {
                out.push(Violation::Shape {
                    what: "dynamics",
                    detail: format!("table at t={t} does not match |X|x|U|x|W|"),
                });
                continue;
            }
            for x in 0..nx {
                for u in 0..nu {
                    for w in 0..nw {
                        let got = self.dynamics[t][x][u][w];
                        if got as usize >= nx_next {
                            out.push(Violation::DynamicsCodomain { t, x, u, w, got });
                        }
                    }
                }
            }
        }

        for t in 0..=self.horizon {
            let (nx, nn, ny) = (self.n_states(t), self.n_noises(t), self.n_observations(t));
            if self.observation[t].len() != nx
                || self.observation[t].iter().any(|per_x| per_x.len() != nn)
            {
                out.push(Violation::Shape {
                    what: "observation",
                    detail: format!("table at t={t} does not match |X|x|N|"),
                });
                continue;
            }
            for x in 0..nx {
                for n in 0..nn {
                    let got = self.observation[t][x][n];
                    if got as usize >= ny {
                        out.push(Violation::ObservationCodomain { t, x, n, got });
                    }
                }
            }
        }

        let t_end = self.horizon;
        if self.terminal_cost.len() != self.n_states(t_end)
            || self
                .terminal_cost
                .iter()
                .any(|row| row.len() != self.n_actions(t_end))
        {
            out.push(Violation::Shape {
                what: "terminal_cost",
                detail: "table does not match |X_T| x |U_T|".into(),
            });
        } else {
            for (x, row) in self.terminal_cost.iter().enumerate() {
                for (u, c) in row.iter().enumerate() {
                    push_cost_violations(&mut out, "terminal_cost", t_end, x, u, c);
                }
            }
        }

        if let Some(tables) = &self.step_costs {
            for (t, table) in tables.iter().enumerate() {
                if table.len() != self.n_states(t)
                    || table.iter().any(|row| row.len() != self.n_actions(t))
                {
                    out.push(Violation::Shape {
                        what: "step_costs",
                        detail: format!("table at t={t} does not match |X|x|U|"),
                    });
                    continue;
                }
                for (x, row) in table.iter().enumerate() {
                    for (u, c) in row.iter().enumerate() {
                        push_cost_violations(&mut out, "step_costs", t, x, u, c);
                    }
                }
            }
        }

        if self.initial_states.is_empty() {
            out.push(Violation::InitialStatesEmpty);
        } else if self.initial_states.max_exclusive() > self.n_states(0) {
            out.push(Violation::InitialStateOutOfRange {
                index: self.initial_states.max_exclusive() - 1,
            });
        }

        for t in 0..=self.horizon {
            if self.state_metrics[t].len() != self.n_states(t) {
                out.push(Violation::MetricSize {
                    which: "state",
                    t,
                    expected: self.n_states(t),
                    got: self.state_metrics[t].len(),
                });
            }
            if self.observation_metrics[t].len() != self.n_observations(t) {
                out.push(Violation::MetricSize {
                    which: "observation",
                    t,
                    expected: self.n_observations(t),
                    got: self.observation_metrics[t].len(),
                });
            }
        }

        out
    }

    /// Validation as a hard gate, for load paths.
    pub fn into_validated(self) -> Result<Self> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidModel {
                count: violations.len(),
                first: violations[0].to_string(),
            })
        }
    }
}

fn push_cost_violations<S: Scalar>(
    out: &mut Vec<Violation>,
    table: &'static str,
    t: usize,
    x: usize,
    u: usize,
    c: &S,
) {
    if !c.to_f64_value().is_finite() {
        out.push(Violation::NonFiniteCost { table, t, x, u });
    } else if cmp(c, &S::zero()) == Ordering::Less {
        out.push(Violation::NegativeCost { table, t, x, u });
    }
}

/// One structural defect found by [`SystemModel::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Shape {
        what: &'static str,
        detail: String,
    },
    DynamicsCodomain {
        t: usize,
        x: usize,
        u: usize,
        w: usize,
        got: u32,
    },
    ObservationCodomain {
        t: usize,
        x: usize,
        n: usize,
        got: u32,
    },
    NegativeCost {
        table: &'static str,
        t: usize,
        x: usize,
        u: usize,
    },
    NonFiniteCost {
        table: &'static str,
        t: usize,
        x: usize,
        u: usize,
    },
    InitialStatesEmpty,
    InitialStateOutOfRange {
        index: usize,
    },
    MetricSize {
        which: &'static str,
        t: usize,
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { what, detail } => write!(f, "{what}: {detail}"),
            Violation::DynamicsCodomain { t, x, u, w, got } => write!(
                f,
                "dynamics value {got} at (t={t},x={x},u={u},w={w}) is outside the step-{} state space",
                t + 1
            ),
            Violation::ObservationCodomain { t, x, n, got } => write!(
                f,
                "observation value {got} at (t={t},x={x},n={n}) is outside the observation space"
            ),
            Violation::NegativeCost { table, t, x, u } => {
                write!(f, "{table} entry at (t={t},x={x},u={u}) is negative")
            }
            Violation::NonFiniteCost { table, t, x, u } => {
                write!(f, "{table} entry at (t={t},x={x},u={u}) is not finite")
            }
            Violation::InitialStatesEmpty => write!(f, "initial state set is empty"),
            Violation::InitialStateOutOfRange { index } => {
                write!(f, "initial state index {index} is outside the step-0 state space")
            }
            Violation::MetricSize {
                which,
                t,
                expected,
                got,
            } => write!(
                f,
                "{which} metric at t={t} covers {got} points, space has {expected}"
            ),
        }
    }
}

/// A realized memory: all observations up to t and actions up to t-1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MemoryNode {
    pub t: usize,
    pub observations: Vec<u32>,
    pub actions: Vec<u32>,
}

impl MemoryNode {
    pub fn root(y0: u32) -> Self {
        Self {
            t: 0,
            observations: vec![y0],
            actions: Vec::new(),
        }
    }

    pub fn child(&self, u: u32, y_next: u32) -> Self {
        let mut observations = self.observations.clone();
        observations.push(y_next);
        let mut actions = self.actions.clone();
        actions.push(u);
        Self {
            t: self.t + 1,
            observations,
            actions,
        }
    }

    pub fn check_consistency<S: Scalar>(&self, model: &SystemModel<S>) -> Result<()> {
        if self.observations.len() != self.t + 1 || self.actions.len() != self.t {
            return Err(Error::Schema {
                field: "memory".into(),
                detail: format!(
                    "memory at t={} has {} observations and {} actions",
                    self.t,
                    self.observations.len(),
                    self.actions.len()
                ),
            });
        }
        for (t, &y) in self.observations.iter().enumerate() {
            if y as usize >= model.n_observations(t) {
                return Err(Error::IndexOutOfRange {
                    index: y as usize,
                    size: model.n_observations(t),
                });
            }
        }
        for (t, &u) in self.actions.iter().enumerate() {
            if u as usize >= model.n_actions(t) {
                return Err(Error::IndexOutOfRange {
                    index: u as usize,
                    size: model.n_actions(t),
                });
            }
        }
        Ok(())
    }

    /// Interleaved canonical encoding: y_0, u_0, y_1, ..., u_{t-1}, y_t.
    pub fn encoding(&self) -> Vec<u32> {
        let mut enc = Vec::with_capacity(self.observations.len() + self.actions.len());
        for i in 0..self.observations.len() {
            enc.push(self.observations[i]);
            if i < self.actions.len() {
                enc.push(self.actions[i]);
            }
        }
        enc
    }
}
