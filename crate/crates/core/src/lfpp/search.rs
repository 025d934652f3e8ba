//! Heap-based shortest paths.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use ordered_float::OrderedFloat;

use super::{edge_cost, WeightedGrid, OFFSETS};
use crate::error::{LqgError, Result};

pub const NO_PREDECESSOR: usize = usize::MAX;

/// Distances from a source (or source set); unreached cells hold `+∞`.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub sources: Vec<usize>,
    pub dist: Vec<f64>,
    /// Shortest-path tree; `NO_PREDECESSOR` at sources and unreached cells.
    pub predecessor: Option<Vec<usize>>,
}

impl DistanceField {
    /// Cells of a shortest path from the nearest source to `v`.
    pub fn path_to(&self, v: usize) -> Option<Vec<usize>> {
        let pred = self.predecessor.as_ref()?;
        if !self.dist[v].is_finite() {
            return None;
        }
        let mut path = vec![v];
        let mut cur = v;
        while pred[cur] != NO_PREDECESSOR {
            cur = pred[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// Parameters of one search.
#[derive(Clone, Copy)]
pub(crate) struct Search<'a> {
    pub allowed: Option<&'a [bool]>,
    /// Only cells with distance strictly below the limit are labeled.
    pub limit: f64,
    pub target: Option<usize>,
}

impl Default for Search<'_> {
    fn default() -> Self {
        Self {
            allowed: None,
            limit: f64::INFINITY,
            target: None,
        }
    }
}

/// Dijkstra that only lowers entries of `dist`. Starting from a previous
/// nearest-source field, this adds `sources` to the source set while
/// touching only the cells whose distance improves.
pub(crate) fn run(
    graph: &WeightedGrid,
    sources: &[usize],
    dist: &mut [f64],
    mut pred: Option<&mut [usize]>,
    search: Search<'_>,
) {
    let n = graph.spec.n() as isize;
    let delta = graph.spec.delta();
    let diag = delta * SQRT_2;
    let w = &graph.vertex_weights;
    let allowed = |v: usize| search.allowed.is_none_or(|a| a[v]);
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if allowed(s) && 0.0 < search.limit && dist[s] > 0.0 {
            dist[s] = 0.0;
            if let Some(p) = pred.as_deref_mut() {
                p[s] = NO_PREDECESSOR;
            }
            heap.push(Reverse((OrderedFloat(0.0), s)));
        }
    }
    while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if search.target == Some(u) {
            break;
        }
        let (c, r) = ((u as isize) % n, (u as isize) / n);
        for (k, &(dc, dr)) in OFFSETS.iter().enumerate() {
            let (cc, rr) = (c + dc, r + dr);
            if cc < 0 || rr < 0 || cc >= n || rr >= n {
                continue;
            }
            let v = (rr * n + cc) as usize;
            if !allowed(v) {
                continue;
            }
            let len = if k < 4 { delta } else { diag };
            let nd = d + edge_cost(len, w[u], w[v]);
            if nd < dist[v] && nd < search.limit {
                dist[v] = nd;
                if let Some(p) = pred.as_deref_mut() {
                    p[v] = u;
                }
                heap.push(Reverse((OrderedFloat(nd), v)));
            }
        }
    }
}

/// Lowers `nearest` to account for a new source.
pub(crate) fn relax_from(graph: &WeightedGrid, source: usize, nearest: &mut [f64]) {
    run(graph, &[source], nearest, None, Search::default());
}

fn check_cell(graph: &WeightedGrid, cell: usize) -> Result<()> {
    if cell >= graph.spec.len() {
        return Err(LqgError::OutOfDomain(format!(
            "cell {cell} outside a grid of {} cells",
            graph.spec.len()
        )));
    }
    Ok(())
}

/// Exact single-source distances with the shortest-path tree.
pub fn shortest_distances(graph: &WeightedGrid, source: usize) -> Result<DistanceField> {
    check_cell(graph, source)?;
    let mut dist = vec![f64::INFINITY; graph.spec.len()];
    let mut pred = vec![NO_PREDECESSOR; graph.spec.len()];
    run(
        graph,
        &[source],
        &mut dist,
        Some(&mut pred),
        Search::default(),
    );
    Ok(DistanceField {
        sources: vec![source],
        dist,
        predecessor: Some(pred),
    })
}

/// Distance to the nearest of `sources`, labeled only below `limit`.
pub fn multi_source_distances(
    graph: &WeightedGrid,
    sources: &[usize],
    limit: f64,
) -> Result<DistanceField> {
    for &s in sources {
        check_cell(graph, s)?;
    }
    let mut dist = vec![f64::INFINITY; graph.spec.len()];
    run(
        graph,
        sources,
        &mut dist,
        None,
        Search {
            limit,
            ..Search::default()
        },
    );
    Ok(DistanceField {
        sources: sources.to_vec(),
        dist,
        predecessor: None,
    })
}

/// Point-to-point distance with early exit at the target.
pub fn distance_between(graph: &WeightedGrid, u: usize, v: usize) -> Result<f64> {
    check_cell(graph, u)?;
    check_cell(graph, v)?;
    let mut dist = vec![f64::INFINITY; graph.spec.len()];
    run(
        graph,
        &[u],
        &mut dist,
        None,
        Search {
            target: Some(v),
            ..Search::default()
        },
    );
    Ok(dist[v])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_spec(n: usize) -> GridSpec {
        GridSpec::new(n, 1.0, Complex64::new(0.0, 0.0)).unwrap()
    }

    /// Minimum over all simple paths, summing costs from the source outward.
    fn enumerate(graph: &WeightedGrid, s: usize, t: usize) -> f64 {
        fn dfs(g: &WeightedGrid, u: usize, t: usize, acc: f64, seen: &mut [bool], best: &mut f64) {
            if acc >= *best {
                return;
            }
            if u == t {
                *best = acc;
                return;
            }
            for v in 0..g.spec.len() {
                if seen[v] {
                    continue;
                }
                if let Some(c) = g.edge_cost(u, v) {
                    seen[v] = true;
                    dfs(g, v, t, acc + c, seen, best);
                    seen[v] = false;
                }
            }
        }
        let mut seen = vec![false; graph.spec.len()];
        seen[s] = true;
        let mut best = f64::INFINITY;
        dfs(graph, s, t, 0.0, &mut seen, &mut best);
        best
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> WeightedGrid {
        let spec = unit_spec(n);
        let w = (0..spec.len())
            .map(|_| rng.random_range(0.05..3.0))
            .collect();
        WeightedGrid::from_weights(spec, 1.0, 1.0, w).unwrap()
    }

    #[test]
    fn uniform_distance_to_offset_three_four() {
        let g = WeightedGrid::flat(unit_spec(6));
        let d = shortest_distances(&g, g.spec.index(0, 0)).unwrap();
        let target = g.spec.index(3, 4);
        let oracle = enumerate(&g, g.spec.index(0, 0), target);
        assert_eq!(d.dist[target], oracle);
        assert!((oracle - (3.0 * SQRT_2 + 1.0)).abs() < 1e-12);
        assert_eq!(d.dist[g.spec.index(0, 0)], 0.0);
        let path = d.path_to(target).unwrap();
        assert_eq!(path.len(), 5);
    }

    #[test]
    fn heap_solver_matches_enumeration_on_small_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.random_range(2..=4);
            let g = random_graph(&mut rng, n);
            for s in 0..g.spec.len() {
                let d = shortest_distances(&g, s).unwrap();
                for t in 0..g.spec.len() {
                    assert_eq!(d.dist[t], enumerate(&g, s, t));
                }
            }
        }
    }

    #[test]
    fn symmetric_on_five_by_five() {
        let g = WeightedGrid::flat(unit_spec(5));
        let all: Vec<Vec<f64>> = (0..25)
            .map(|s| shortest_distances(&g, s).unwrap().dist)
            .collect();
        for a in 0..25 {
            for b in 0..25 {
                assert_eq!(all[a][b], all[b][a]);
            }
        }
    }

    #[test]
    fn random_weights_are_symmetric_and_satisfy_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(&mut rng, 7);
        let all: Vec<Vec<f64>> = (0..49)
            .map(|s| shortest_distances(&g, s).unwrap().dist)
            .collect();
        let tol = 8.0 * f64::EPSILON;
        for a in 0..49 {
            for b in 0..49 {
                assert!((all[a][b] - all[b][a]).abs() <= tol * all[a][b]);
                for c in 0..49 {
                    assert!(all[a][c] <= (all[a][b] + all[b][c]) * (1.0 + tol));
                }
            }
        }
    }

    #[test]
    fn early_exit_and_limit_agree_with_full_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_graph(&mut rng, 12);
        let full = shortest_distances(&g, 7).unwrap();
        for t in [0, 50, 143] {
            assert_eq!(distance_between(&g, 7, t).unwrap(), full.dist[t]);
        }
        let limited = multi_source_distances(&g, &[7], 2.0).unwrap();
        for (a, b) in limited.dist.iter().zip(&full.dist) {
            if *b < 2.0 {
                assert_eq!(a, b);
            } else {
                assert!(a.is_infinite());
            }
        }
    }

    #[test]
    fn incremental_relaxation_equals_multi_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_graph(&mut rng, 16);
        let sources = [4, 100, 200, 37];
        let mut nearest = vec![f64::INFINITY; g.spec.len()];
        for &s in &sources {
            relax_from(&g, s, &mut nearest);
        }
        let direct = multi_source_distances(&g, &sources, f64::INFINITY).unwrap();
        assert_eq!(nearest, direct.dist);
    }

    #[test]
    fn refuses_cells_outside_grid() {
        let g = WeightedGrid::flat(unit_spec(3));
        assert!(shortest_distances(&g, 9).is_err());
    }
}
