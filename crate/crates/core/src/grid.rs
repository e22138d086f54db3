//! Shortest-path metrics over rectangular grids with obstacles.

use crate::error::{Error, Result};
use crate::metric::MetricTable;
use crate::scalar::Scalar;
use crate::space::PointSet;
use std::collections::VecDeque;

/// Axis-aligned unit moves plus "stay"; the action/disturbance/noise set of
/// the pursuit benchmark. Metric adjacency uses only the four unit moves.
pub const MOVES: [(i64, i64); 5] = [(-1, 0), (1, 0), (0, 0), (0, 1), (0, -1)];

const NEIGHBORS: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, 1), (0, -1)];

/// Signed-coordinate convention: the grid is centered, so a 9x9 grid spans
/// columns and rows -4..=4.
pub fn coord_offset(extent: usize) -> i64 {
    (extent as i64 - 1) / 2
}

/// Signed (col,row) -> row-major cell index, if inside the grid.
pub fn cell_index(width: usize, height: usize, col: i64, row: i64) -> Option<usize> {
    let c = col + coord_offset(width);
    let r = row + coord_offset(height);
    if c < 0 || r < 0 || c >= width as i64 || r >= height as i64 {
        None
    } else {
        Some(r as usize * width + c as usize)
    }
}

/// Row-major cell index -> signed (col,row).
pub fn cell_coord(width: usize, height: usize, index: usize) -> (i64, i64) {
    let c = (index % width) as i64 - coord_offset(width);
    let r = (index / width) as i64 - coord_offset(height);
    (c, r)
}

/// Breadth-first hop counts from `start` over free cells, 4-neighbor
/// adjacency. `usize::MAX` marks unreachable cells.
fn bfs(width: usize, height: usize, free: &[bool], start: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; width * height];
    let mut queue = VecDeque::new();
    dist[start] = 0;
    queue.push_back(start);
    while let Some(cell) = queue.pop_front() {
        let (c, r) = cell_coord(width, height, cell);
        for (dc, dr) in NEIGHBORS {
            if let Some(next) = cell_index(width, height, c + dc, r + dr) {
                if free[next] && dist[next] == usize::MAX {
                    dist[next] = dist[cell] + 1;
                    queue.push_back(next);
                }
            }
        }
    }
    dist
}

/// Obstacle-avoiding shortest-path metric over the free cells of a
/// `width x height` grid. `obstacles` holds row-major cell indices. Returns
/// the free cells (row-major indices, ascending) together with the metric
/// over them; adjacent free cells are at distance 1.
///
/// Fails if the free cells do not form a single 4-connected component,
/// naming an unreachable pair.
pub fn shortest_path_metric<S: Scalar>(
    width: usize,
    height: usize,
    obstacles: &PointSet,
) -> Result<(Vec<u32>, MetricTable<S>)> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidGrid("grid must have positive extent".into()));
    }
    let total = width * height;
    if obstacles.max_exclusive() > total {
        return Err(Error::IndexOutOfRange {
            index: obstacles.max_exclusive() - 1,
            size: total,
        });
    }
    let mut free = vec![true; total];
    for o in obstacles.iter() {
        free[o as usize] = false;
    }
    let free_cells: Vec<u32> = (0..total as u32).filter(|&i| free[i as usize]).collect();
    if free_cells.is_empty() {
        return Err(Error::InvalidGrid("all cells are obstacles".into()));
    }

    let coord_label = |cell: u32| {
        let (c, r) = cell_coord(width, height, cell as usize);
        format!("({c},{r})")
    };

    let n = free_cells.len();
    let mut distances = Vec::with_capacity(n * n);
    for &a in &free_cells {
        let hops = bfs(width, height, &free, a as usize);
        for &b in &free_cells {
            let h = hops[b as usize];
            if h == usize::MAX {
                return Err(Error::DisconnectedGrid {
                    a: coord_label(a),
                    b: coord_label(b),
                });
            }
            distances.push(S::from_count(h));
        }
    }
    let metric = MetricTable::dense(n, distances)?;
    Ok((free_cells, metric))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: plain breadth-first search on the coordinate grid.
    fn bfs_oracle(
        width: usize,
        height: usize,
        obstacles: &[(i64, i64)],
        from: (i64, i64),
        to: (i64, i64),
    ) -> Option<usize> {
        let blocked: Vec<usize> = obstacles
            .iter()
            .filter_map(|&(c, r)| cell_index(width, height, c, r))
            .collect();
        let mut dist = std::collections::HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(from, 0usize);
        queue.push_back(from);
        while let Some((c, r)) = queue.pop_front() {
            if (c, r) == to {
                return Some(dist[&(c, r)]);
            }
            for (dc, dr) in NEIGHBORS {
                let next = (c + dc, r + dr);
                if let Some(idx) = cell_index(width, height, next.0, next.1) {
                    if !blocked.contains(&idx) && !dist.contains_key(&next) {
                        dist.insert(next, dist[&(c, r)] + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
        None
    }

    #[test]
    fn adjacent_cells_are_one_apart() {
        let (free, d) = shortest_path_metric::<f64>(3, 3, &PointSet::empty()).unwrap();
        let at = |c, r| {
            free.iter()
                .position(|&f| f as usize == cell_index(3, 3, c, r).unwrap())
                .unwrap()
        };
        assert_eq!(d.get(at(0, 0), at(1, 0)), 1.0);
        assert_eq!(d.get(at(0, 0), at(0, 0)), 0.0);
    }

    #[test]
    fn wall_forces_detour() {
        // 3x3 grid, wall at the center: mid-left to mid-right detours around.
        let wall = PointSet::singleton(cell_index(3, 3, 0, 0).unwrap() as u32);
        let (free, d) = shortest_path_metric::<f64>(3, 3, &wall).unwrap();
        let at = |c, r| {
            free.iter()
                .position(|&f| f as usize == cell_index(3, 3, c, r).unwrap())
                .unwrap()
        };
        let expected = bfs_oracle(3, 3, &[(0, 0)], (-1, 0), (1, 0)).unwrap();
        assert_eq!(expected, 4);
        assert_eq!(d.get(at(-1, 0), at(1, 0)), expected as f64);
    }

    #[test]
    fn disconnected_free_space_is_rejected() {
        // Vertical wall splits a 3x1 grid... use 3x3 with a full column wall.
        let wall: PointSet = (0..3)
            .map(|r| cell_index(3, 3, 0, r - 1).unwrap() as u32)
            .collect();
        let err = shortest_path_metric::<f64>(3, 3, &wall).unwrap_err();
        match err {
            Error::DisconnectedGrid { a, b } => {
                assert_ne!(a, b);
            }
            other => panic!("expected disconnection error, got {other}"),
        }
    }

    #[test]
    fn metric_matches_bfs_oracle_everywhere() {
        let obstacles = [(0, 0), (0, 1), (1, -1)];
        let obs_set: PointSet = obstacles
            .iter()
            .map(|&(c, r)| cell_index(4, 4, c, r).unwrap() as u32)
            .collect();
        let (free, d) = shortest_path_metric::<f64>(4, 4, &obs_set).unwrap();
        for (i, &a) in free.iter().enumerate() {
            for (j, &b) in free.iter().enumerate() {
                let ca = cell_coord(4, 4, a as usize);
                let cb = cell_coord(4, 4, b as usize);
                let expected = bfs_oracle(4, 4, &obstacles, ca, cb).unwrap();
                assert_eq!(d.get(i, j), expected as f64, "{ca:?} -> {cb:?}");
            }
        }
    }

    #[test]
    fn signed_coordinates_round_trip() {
        assert_eq!(cell_index(9, 9, -4, -4), Some(0));
        assert_eq!(cell_index(9, 9, 4, 4), Some(80));
        assert_eq!(cell_coord(9, 9, 40), (0, 0));
        assert_eq!(cell_index(9, 9, 5, 0), None);
    }
}
