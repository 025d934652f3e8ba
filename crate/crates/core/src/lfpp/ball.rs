//! Metric balls, filled balls and internal distances.

use super::search::{run, Search};
use super::{CellSet, WeightedGrid};
use crate::error::{LqgError, Result};

/// Open ball `{v : D(center, v) < r}`.
pub fn metric_ball(graph: &WeightedGrid, center: usize, r: f64) -> Result<CellSet> {
    if !(r >= 0.0) {
        return Err(LqgError::InvalidParameter(format!(
            "ball radius must be nonnegative, got {r}"
        )));
    }
    let dist = ball_distances(graph, center, r)?;
    Ok(CellSet::from_mask(
        graph.spec,
        dist.iter().map(|d| *d < r).collect(),
    ))
}

fn ball_distances(graph: &WeightedGrid, center: usize, limit: f64) -> Result<Vec<f64>> {
    if center >= graph.spec.len() {
        return Err(LqgError::OutOfDomain(format!(
            "center cell {center} outside the grid"
        )));
    }
    let mut dist = vec![f64::INFINITY; graph.spec.len()];
    run(
        graph,
        &[center],
        &mut dist,
        None,
        Search {
            limit,
            ..Search::default()
        },
    );
    Ok(dist)
}

/// Closed ball `{D ≤ r}` together with every component of its complement
/// (in the 4-neighbor sense) that does not reach the edge of the grid.
pub fn filled_metric_ball(graph: &WeightedGrid, center: usize, r: f64) -> Result<CellSet> {
    if !(r >= 0.0) {
        return Err(LqgError::InvalidParameter(format!(
            "ball radius must be nonnegative, got {r}"
        )));
    }
    let dist = ball_distances(graph, center, r.next_up())?;
    let spec = graph.spec;
    let n = spec.n();
    let closed: Vec<bool> = dist.iter().map(|d| *d <= r).collect();
    let on_edge = |i: usize| {
        let (c, row) = spec.col_row(i);
        c == 0 || row == 0 || c + 1 == n || row + 1 == n
    };
    if (0..spec.len()).any(|i| closed[i] && on_edge(i)) {
        return Err(LqgError::OutOfDomain(format!(
            "closed ball of radius {r} about cell {center} touches the grid boundary"
        )));
    }
    // Flood the complement from the grid edge; whatever stays dry is a hole.
    let mut outside = vec![false; spec.len()];
    let mut stack: Vec<usize> = (0..spec.len()).filter(|&i| on_edge(i)).collect();
    for &i in &stack {
        outside[i] = true;
    }
    while let Some(i) = stack.pop() {
        let (c, row) = spec.col_row(i);
        let mut visit = |j: usize| {
            if !closed[j] && !outside[j] {
                outside[j] = true;
                stack.push(j);
            }
        };
        if c > 0 {
            visit(i - 1);
        }
        if c + 1 < n {
            visit(i + 1);
        }
        if row > 0 {
            visit(i - n);
        }
        if row + 1 < n {
            visit(i + n);
        }
    }
    Ok(CellSet::from_mask(
        spec,
        outside.iter().map(|o| !o).collect(),
    ))
}

/// Shortest-path distance using only cells of `region`; `+∞` when `u` and
/// `v` lie in different components of the region.
pub fn internal_distance(
    graph: &WeightedGrid,
    region: &CellSet,
    u: usize,
    v: usize,
) -> Result<f64> {
    graph.spec.check_compatible(&region.spec)?;
    for cell in [u, v] {
        if cell >= graph.spec.len() || !region.mask[cell] {
            return Err(LqgError::OutOfDomain(format!(
                "cell {cell} is not in the region"
            )));
        }
    }
    let mut dist = vec![f64::INFINITY; graph.spec.len()];
    run(
        graph,
        &[u],
        &mut dist,
        None,
        Search {
            allowed: Some(&region.mask),
            target: Some(v),
            ..Search::default()
        },
    );
    Ok(dist[v])
}
