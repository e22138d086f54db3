//! Pursuit benchmark: an agent chasing a moving target on a grid with
//! obstacles, both moving by axis-aligned unit steps, the target observed
//! through one-step noise.

use crate::error::{Error, Result};
use crate::grid::{cell_coord, cell_index, shortest_path_metric, MOVES};
use crate::metric::MetricTable;
use crate::model::SystemModel;
use crate::scalar::Scalar;
use crate::space::{FiniteSpace, PointSet};

/// Grid geometry, start cells and horizon for [`build_gridworld`].
#[derive(Debug, Clone)]
pub struct GridworldConfig {
    pub width: usize,
    pub height: usize,
    /// Obstacle cells in signed (col,row) coordinates.
    pub obstacles: Vec<(i64, i64)>,
    /// Agent start cell; the agent always knows its own position.
    pub agent_start: (i64, i64),
    /// Initial observation of the target cell.
    pub initial_observation: (i64, i64),
    pub horizon: usize,
}

impl GridworldConfig {
    /// 9x9 defaults matching the benchmark's initial conditions. The
    /// obstacle layout is a reconstruction (three vertical walls) and is
    /// fully configurable.
    pub fn default_benchmark() -> Self {
        Self {
            width: 9,
            height: 9,
            obstacles: default_obstacles(),
            agent_start: (-2, -3),
            initial_observation: (-4, 3),
            horizon: 6,
        }
    }
}

pub fn default_obstacles() -> Vec<(i64, i64)> {
    vec![
        (-3, -1),
        (-3, 0),
        (-3, 1),
        (0, -1),
        (0, 0),
        (0, 1),
        (3, -1),
        (3, 0),
        (3, 1),
    ]
}

/// Built benchmark: the system model plus the cell-level geometry needed to
/// display and post-process solutions.
#[derive(Debug, Clone)]
pub struct Gridworld<S> {
    pub model: SystemModel<S>,
    pub layout: GridLayout<S>,
}

#[derive(Debug, Clone)]
pub struct GridLayout<S> {
    pub width: usize,
    pub height: usize,
    /// Free cells as row-major grid indices, ascending; cell identity below
    /// is the position in this list.
    pub free_cells: Vec<u32>,
    /// Obstacle-avoiding shortest-path metric over the free cells.
    pub cell_metric: MetricTable<S>,
    pub agent_start: u32,
    pub observed_target_start: u32,
    /// `moves[cell][k]` = resulting free cell when applying `MOVES[k]`;
    /// moves leaving the grid or entering an obstacle leave the cell
    /// unchanged.
    pub moves: Vec<[u32; 5]>,
}

impl<S: Scalar> GridLayout<S> {
    pub fn n_free(&self) -> usize {
        self.free_cells.len()
    }

    pub fn coord_of(&self, free_index: u32) -> (i64, i64) {
        cell_coord(self.width, self.height, self.free_cells[free_index as usize] as usize)
    }

    pub fn free_index_of(&self, coord: (i64, i64)) -> Option<u32> {
        let grid = cell_index(self.width, self.height, coord.0, coord.1)?;
        self.free_cells
            .binary_search(&(grid as u32))
            .ok()
            .map(|i| i as u32)
    }

    /// Composite (agent, target) state index.
    pub fn state_of(&self, agent: u32, target: u32) -> u32 {
        agent * self.n_free() as u32 + target
    }

    pub fn split_state(&self, state: u32) -> (u32, u32) {
        let n = self.n_free() as u32;
        (state / n, state % n)
    }

    /// Observation index of the configured initial condition (agent start,
    /// observed target cell).
    pub fn initial_observation_index(&self) -> u32 {
        self.state_of(self.agent_start, self.observed_target_start)
    }
}

fn pair_label(agent: (i64, i64), target: (i64, i64)) -> String {
    format!(
        "({},{})|({},{})",
        agent.0, agent.1, target.0, target.1
    )
}

/// Builds the pursuit model. State = (agent cell, target cell) over free
/// cells; actions, disturbances and noises are the five moves; the target
/// (resp. observation, agent) cell moves by the disturbance (resp. noise,
/// action) with blocked moves leaving the position unchanged; terminal cost
/// is the shortest-path distance between target and agent.
///
/// The composite metric is K * d(agent, agent') + d(target, target') with
/// K = cell diameter + 1, so quantization with gamma below K acts on the
/// target component only.
pub fn build_gridworld<S: Scalar>(cfg: &GridworldConfig) -> Result<Gridworld<S>> {
    let total = cfg
        .width
        .checked_mul(cfg.height)
        .ok_or_else(|| Error::InvalidGrid("grid size overflow".into()))?;
    let mut obstacle_indices = Vec::new();
    for &(c, r) in &cfg.obstacles {
        let idx = cell_index(cfg.width, cfg.height, c, r).ok_or_else(|| {
            Error::InvalidGrid(format!("obstacle ({c},{r}) is outside the grid"))
        })?;
        obstacle_indices.push(idx as u32);
    }
    let obstacles = PointSet::new(obstacle_indices);
    if obstacles.len() >= total {
        return Err(Error::InvalidGrid("all cells are obstacles".into()));
    }

    let (free_cells, cell_metric) = shortest_path_metric::<S>(cfg.width, cfg.height, &obstacles)?;
    let free_of = |coord: (i64, i64), what: &str| -> Result<u32> {
        let grid = cell_index(cfg.width, cfg.height, coord.0, coord.1).ok_or_else(|| {
            Error::InvalidGrid(format!("{what} ({},{}) is outside the grid", coord.0, coord.1))
        })?;
        free_cells
            .binary_search(&(grid as u32))
            .map(|i| i as u32)
            .map_err(|_| {
                Error::InvalidGrid(format!(
                    "{what} ({},{}) is an obstacle cell",
                    coord.0, coord.1
                ))
            })
    };
    let agent_start = free_of(cfg.agent_start, "agent start")?;
    let observed_target_start = free_of(cfg.initial_observation, "initial observation")?;

    let n_free = free_cells.len();
    let mut moves = Vec::with_capacity(n_free);
    for (i, &cell) in free_cells.iter().enumerate() {
        let (c, r) = cell_coord(cfg.width, cfg.height, cell as usize);
        let mut row = [0u32; 5];
        for (k, (dc, dr)) in MOVES.iter().enumerate() {
            let next = cell_index(cfg.width, cfg.height, c + dc, r + dr)
                .and_then(|g| free_cells.binary_search(&(g as u32)).ok());
            row[k] = next.map_or(i as u32, |f| f as u32);
        }
        moves.push(row);
    }

    let layout = GridLayout {
        width: cfg.width,
        height: cfg.height,
        free_cells: free_cells.clone(),
        cell_metric: cell_metric.clone(),
        agent_start,
        observed_target_start,
        moves,
    };

    // Composite (agent, target) spaces and tables.
    let n_states = n_free * n_free;
    let labels: Vec<String> = (0..n_states)
        .map(|s| {
            let agent = (s / n_free) as u32;
            let target = (s % n_free) as u32;
            pair_label(layout.coord_of(agent), layout.coord_of(target))
        })
        .collect();
    let state_space = FiniteSpace::new(labels)?;
    let move_labels: Vec<String> = MOVES.iter().map(|(c, r)| format!("({c},{r})")).collect();
    let move_space = FiniteSpace::new(move_labels)?;

    let mut dynamics_t = Vec::with_capacity(n_states);
    let mut observation_t = Vec::with_capacity(n_states);
    for s in 0..n_states as u32 {
        let (agent, target) = layout.split_state(s);
        let mut per_u = Vec::with_capacity(5);
        for u in 0..5 {
            let agent_next = layout.moves[agent as usize][u];
            let mut per_w = Vec::with_capacity(5);
            for w in 0..5 {
                let target_next = layout.moves[target as usize][w];
                per_w.push(layout.state_of(agent_next, target_next));
            }
            per_u.push(per_w);
        }
        dynamics_t.push(per_u);
        let mut per_n = Vec::with_capacity(5);
        for n in 0..5 {
            let observed = layout.moves[target as usize][n];
            per_n.push(layout.state_of(agent, observed));
        }
        observation_t.push(per_n);
    }

    let mut terminal_cost = Vec::with_capacity(n_states);
    for s in 0..n_states as u32 {
        let (agent, target) = layout.split_state(s);
        let d = cell_metric.get(target as usize, agent as usize);
        terminal_cost.push(vec![d; 5]);
    }

    let weight = cell_metric.diameter() + S::one();
    let composite_metric =
        MetricTable::product(cell_metric.clone(), cell_metric.clone(), weight)?;

    let initial_states: PointSet = (0..n_free as u32)
        .map(|target| layout.state_of(agent_start, target))
        .collect();

    let stages = cfg.horizon + 1;
    let model = SystemModel {
        horizon: cfg.horizon,
        state_spaces: vec![state_space.clone(); stages],
        action_spaces: vec![move_space.clone(); stages],
        disturbance_spaces: vec![move_space.clone(); stages],
        noise_spaces: vec![move_space; stages],
        observation_spaces: vec![state_space; stages],
        dynamics: vec![dynamics_t; cfg.horizon],
        observation: vec![observation_t; stages],
        terminal_cost,
        step_costs: None,
        initial_states,
        state_metrics: vec![composite_metric.clone(); stages],
        observation_metrics: vec![composite_metric; stages],
    };

    Ok(Gridworld { model, layout })
}
