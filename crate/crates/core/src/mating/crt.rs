//! Mated-CRT maps: cells are `ε`-increments of `(L, R)`, adjacent when their
//! boundary arcs touch.

use std::collections::VecDeque;

use rayon::prelude::*;

use super::BoundaryLengthProcess;
use crate::error::{LqgError, Result};
use crate::fractal::ScalingFit;

/// Smallest map [`mated_crt_graph`] will build.
pub const MIN_CELLS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct MatedCrtGraph {
    pub eps: f64,
    pub num_cells: usize,
    /// Sorted, deduplicated pairs `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl MatedCrtGraph {
    pub fn from_edges(eps: f64, num_cells: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        if edges.iter().any(|&(i, j)| i >= j || j >= num_cells) {
            return Err(LqgError::InvalidParameter(
                "edges must satisfy i < j < num_cells".into(),
            ));
        }
        edges.sort_unstable();
        edges.dedup();
        let mut degree = vec![0usize; num_cells + 1];
        for &(i, j) in &edges {
            degree[i + 1] += 1;
            degree[j + 1] += 1;
        }
        for k in 0..num_cells {
            degree[k + 1] += degree[k];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![0; 2 * edges.len()];
        for &(i, j) in &edges {
            targets[fill[i]] = j;
            fill[i] += 1;
            targets[fill[j]] = i;
            fill[j] += 1;
        }
        Ok(Self {
            eps,
            num_cells,
            edges,
            offsets,
            targets,
        })
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.num_cells as f64
    }

    /// Graph distances from `source`, `usize::MAX` where unreachable or
    /// beyond `limit`.
    pub fn bfs(&self, source: usize, limit: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_cells];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            if dist[u] == limit {
                continue;
            }
            for &v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.num_cells == 0 || self.bfs(0, usize::MAX).iter().all(|&d| d != usize::MAX)
    }

    /// Lower bound on the diameter from two breadth-first sweeps.
    pub fn diameter_estimate(&self) -> usize {
        let far = |s: usize| {
            let d = self.bfs(s, usize::MAX);
            (0..d.len())
                .filter(|&v| d[v] != usize::MAX)
                .max_by_key(|&v| (d[v], std::cmp::Reverse(v)))
                .map(|v| (v, d[v]))
        };
        match far(0).and_then(|(a, _)| far(a)) {
            Some((_, d)) => d,
            None => 0,
        }
    }
}

/// Pairs `(i, j)`, `i < j`, with `min(m[i+1..j]) ≥ max(m[i], m[j])`.
/// Consecutive pairs satisfy this vacuously.
fn shared_infimum_pairs(m: &[f64], out: &mut Vec<(usize, usize)>) {
    // Groups of equal values, strictly increasing from bottom to top.
    let mut stack: Vec<(f64, Vec<usize>)> = vec![];
    for (j, &v) in m.iter().enumerate() {
        while let Some((top, _)) = stack.last() {
            if *top <= v {
                break;
            }
            let (_, group) = stack.pop().unwrap();
            out.extend(group.into_iter().map(|i| (i, j)));
        }
        let depth = stack.len();
        match stack.last_mut() {
            Some((top, group)) if *top == v => {
                out.extend(group.iter().map(|&i| (i, j)));
                group.push(j);
                if depth >= 2 {
                    out.push((*stack[depth - 2].1.last().unwrap(), j));
                }
            }
            Some((_, group)) => {
                out.push((*group.last().unwrap(), j));
                stack.push((v, vec![j]));
            }
            None => stack.push((v, vec![j])),
        }
    }
}

/// Minimum of `z` over each cell. Cell `k` spans samples
/// `⌊k·ε/dt⌋ ..= ⌊(k+1)·ε/dt⌋`, so neighbors share an endpoint.
fn cell_minima(z: &[f64], per_cell: f64, cells: usize) -> Vec<f64> {
    let bound = |k: usize| ((k as f64 * per_cell + 1e-9).floor() as usize).min(z.len() - 1);
    (0..cells)
        .map(|k| {
            z[bound(k)..=bound(k + 1)]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Cells `x < y` are adjacent when `y = x + 1` or, for `Z = L` or `Z = R`,
/// both cell minima lie at or below the minimum of `Z` between them.
pub fn mated_crt_graph(process: &BoundaryLengthProcess, eps: f64) -> Result<MatedCrtGraph> {
    if !(eps >= 10.0 * process.dt * (1.0 - 1e-12)) {
        return Err(LqgError::InvalidParameter(format!(
            "eps={eps} is below 10·dt = {}",
            10.0 * process.dt
        )));
    }
    let cells = (process.horizon() / eps + 1e-9).floor() as usize;
    if cells < MIN_CELLS {
        return Err(LqgError::InvalidParameter(format!(
            "T/eps gives {cells} cells, fewer than {MIN_CELLS}"
        )));
    }
    let per_cell = eps / process.dt;
    let mut edges = vec![];
    for z in [&process.l, &process.r] {
        shared_infimum_pairs(&cell_minima(z, per_cell, cells), &mut edges);
    }
    MatedCrtGraph::from_edges(eps, cells, edges)
}

#[derive(Debug, Clone)]
pub struct BallGrowthReport {
    /// Pooled fit of `log |B_r|` against `log r`.
    pub fit: ScalingFit,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// `sizes[c][k]`: cells within distance `radii[k]` of the `c`-th kept center.
    pub sizes: Vec<Vec<usize>>,
}

/// Ball sizes about each center. Centers within `2·max(radii)` cells of
/// either end of the time window are dropped.
pub fn graph_ball_growth(
    graph: &MatedCrtGraph,
    centers: &[usize],
    radii: &[usize],
) -> Result<BallGrowthReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] == 0 {
        return Err(LqgError::InvalidParameter(
            "radii must be at least 2 increasing positive integers".into(),
        ));
    }
    let r_max = *radii.last().unwrap();
    let diameter = graph.diameter_estimate();
    if 4 * r_max > diameter {
        return Err(LqgError::InvalidParameter(format!(
            "radius {r_max} exceeds a quarter of the diameter {diameter}"
        )));
    }
    if let Some(&c) = centers.iter().find(|&&c| c >= graph.num_cells) {
        return Err(LqgError::OutOfDomain(format!("center {c} is not a cell")));
    }
    let margin = 2 * r_max;
    let (kept, dropped): (Vec<usize>, Vec<usize>) = centers
        .iter()
        .partition(|&&c| c >= margin && c + margin < graph.num_cells);
    if !dropped.is_empty() {
        log::warn!(
            "{} ball centers lie within {margin} cells of the time boundary; dropped",
            dropped.len()
        );
    }
    if kept.is_empty() {
        return Err(LqgError::OutOfDomain(
            "every ball center was dropped".into(),
        ));
    }
    let sizes: Vec<Vec<usize>> = kept
        .par_iter()
        .map(|&c| {
            let dist = graph.bfs(c, r_max);
            let mut hist = vec![0usize; r_max + 1];
            for d in dist.into_iter().filter(|&d| d <= r_max) {
                hist[d] += 1;
            }
            let mut acc = 0;
            let cumulative: Vec<usize> = hist
                .iter()
                .map(|h| {
                    acc += h;
                    acc
                })
                .collect();
            radii.iter().map(|&r| cumulative[r]).collect()
        })
        .collect();
    let (mut xs, mut ys) = (vec![], vec![]);
    for row in &sizes {
        for (r, s) in radii.iter().zip(row) {
            xs.push((*r as f64).ln());
            ys.push((*s as f64).ln());
        }
    }
    Ok(BallGrowthReport {
        fit: ScalingFit::fit(xs, ys)?,
        kept,
        dropped,
        sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mating::sample_lr;
    use rand::{Rng, SeedableRng};

    fn brute_pairs(m: &[f64]) -> Vec<(usize, usize)> {
        let mut out = vec![];
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                let between = m[i + 1..j].iter().copied().fold(f64::INFINITY, f64::min);
                if between >= m[i].max(m[j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn stack_matches_brute_force_with_ties() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let n = rng.random_range(1..14);
            let m: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
            let mut got = vec![];
            shared_infimum_pairs(&m, &mut got);
            got.sort_unstable();
            assert_eq!(got, brute_pairs(&m), "{m:?}");
        }
    }

    fn synthetic(l: Vec<f64>, r: Vec<f64>) -> BoundaryLengthProcess {
        let dt = 1.0 / (l.len() - 1) as f64;
        BoundaryLengthProcess::from_paths(6.0, 1.0, dt, l, r).unwrap()
    }

    #[test]
    fn increasing_paths_give_a_path_graph() {
        let up: Vec<f64> = (0..=2000).map(|k| k as f64).collect();
        let g = mated_crt_graph(&synthetic(up.clone(), up), 0.005).unwrap();
        assert_eq!(g.num_cells, 200);
        assert_eq!(g.edges, (0..199).map(|i| (i, i + 1)).collect::<Vec<_>>());
    }

    #[test]
    fn tent_links_distant_cells() {
        // Cells of 10 steps. L rises through cells 1..=3 and returns, so the
        // minima of cells 0 and 4 sit below everything in between.
        let mut l: Vec<f64> = (0..=1000).map(|k| k as f64).collect();
        for (k, x) in l.iter_mut().enumerate().take(51) {
            *x = match k {
                0..=10 => -(k as f64),
                11..=40 => -10.0 + 5.0 * (1.0 - ((k as f64 - 25.0) / 15.0).abs()) + 1.0,
                _ => -12.0 + (k as f64 - 40.0) * 0.1,
            };
        }
        l[10] = -10.0;
        l[40] = -9.0;
        let r: Vec<f64> = (0..=1000).map(|k| k as f64).collect();
        let g = mated_crt_graph(&synthetic(l, r), 0.01).unwrap();
        assert!(g.edges.contains(&(0, 4)));
        assert!(!g.edges.contains(&(0, 3)));
    }

    #[test]
    fn refusals() {
        let p = sample_lr(6.0, 1.0, 1.0, 1e-4, 1).unwrap();
        assert!(mated_crt_graph(&p, 5e-4).is_err());
        assert!(mated_crt_graph(&p, 0.02).is_err());
        assert!(mated_crt_graph(&p, 0.01).is_ok());
    }

    #[test]
    fn sampled_graphs_are_connected_and_planar_sized() {
        let mut degrees = vec![];
        for seed in 0..5 {
            let p = sample_lr(6.0, 1.0, 1.0, 1e-5, seed).unwrap();
            let g = mated_crt_graph(&p, 1e-3).unwrap();
            assert_eq!(g, mated_crt_graph(&p, 1e-3).unwrap());
            assert!(g.is_connected());
            assert!((0..g.num_cells - 1).all(|i| g.neighbors(i).contains(&(i + 1))));
            assert!((0..g.num_cells)
                .all(|i| g.neighbors(i).iter().all(|&j| g.neighbors(j).contains(&i))));
            // A simple planar graph has at most 3n − 6 edges.
            assert!(g.edges.len() <= 3 * g.num_cells - 6);
            degrees.push(g.mean_degree());
        }
        let m = crate::stats::mean(&degrees);
        assert!(m > 5.0 && m <= 6.0, "mean degree {m}");
    }

    #[test]
    fn path_graph_grows_linearly() {
        let up: Vec<f64> = (0..=40000).map(|k| k as f64).collect();
        let g = mated_crt_graph(&synthetic(up.clone(), up), 2.5e-4).unwrap();
        let rep = graph_ball_growth(&g, &[1000, 2000, 3000], &[32, 64, 128, 256]).unwrap();
        assert!(
            (rep.fit.slope - 1.0).abs() < 0.05,
            "slope {}",
            rep.fit.slope
        );
        assert_eq!(rep.sizes[0], vec![65, 129, 257, 513]);
    }

    #[test]
    fn ball_growth_drops_boundary_centers_and_ignores_a() {
        let p = sample_lr(6.0, 1.0, 1.0, 1e-5, 3).unwrap();
        let g = mated_crt_graph(&p, 1e-4 * 5.0).unwrap();
        let q = mated_crt_graph(&p.rescaled(7.0), 1e-4 * 5.0).unwrap();
        assert_eq!(g.edges, q.edges);
        let rep = graph_ball_growth(&g, &[0, 500, 1000, 1500], &[1, 2, 3]).unwrap();
        assert_eq!(rep.dropped, vec![0]);
        assert_eq!(
            rep.fit.slope,
            graph_ball_growth(&q, &[0, 500, 1000, 1500], &[1, 2, 3])
                .unwrap()
                .fit
                .slope
        );
        assert!(graph_ball_growth(&g, &[500], &[1, 1000]).is_err());
    }
}
