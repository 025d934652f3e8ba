//! Covering and packing numbers with open balls centered in the set.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::error::{LqgError, Result};
use crate::lfpp::{multi_source_distances, shortest_distances, CellSet, WeightedGrid};

/// Largest set accepted by [`exact_cover_count`].
pub const EXACT_COVER_MAX: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverMethod {
    Greedy,
    ExactBruteForce,
    Packing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverResult {
    pub eps: f64,
    /// Labels of the chosen centers (cell indices for grid sets).
    pub centers: Vec<usize>,
    pub count: usize,
    pub method: CoverMethod,
}

/// Distances from a growing set of centers to every point of a finite set.
pub trait NearestCenters: Clone {
    fn size(&self) -> usize;
    fn add_center(&mut self, p: usize);
    /// Distance from point `p` to the nearest center so far (`+∞` if none).
    fn nearest(&self, p: usize) -> f64;
}

/// A finite metric space whose points are indexed `0..size`.
pub trait CoverSpace {
    type Tracker<'a>: NearestCenters
    where
        Self: 'a;
    fn size(&self) -> usize;
    /// External label of point `p`.
    fn label(&self, p: usize) -> usize;
    /// A tracker with no centers yet.
    fn tracker(&self) -> Self::Tracker<'_>;
}

/// Explicit symmetric distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Row-major `n × n` entries; must be symmetric, nonnegative, with zero
    /// diagonal.
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(LqgError::InvalidParameter(format!(
                "{} entries for {n} points",
                d.len()
            )));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(LqgError::InvalidParameter(format!(
                    "nonzero diagonal at {i}"
                )));
            }
            for j in 0..n {
                let x = d[i * n + j];
                if !(x >= 0.0) || x != d[j * n + i] {
                    return Err(LqgError::InvalidParameter(format!(
                        "entry ({i},{j}) breaks symmetry or sign"
                    )));
                }
            }
        }
        Ok(Self { n, d })
    }

    /// Points on a line with `|x − y|` distances.
    pub fn from_line(xs: &[f64]) -> Self {
        let n = xs.len();
        let d = (0..n * n).map(|k| (xs[k / n] - xs[k % n]).abs()).collect();
        Self { n, d }
    }

    /// LFPP distances among the given cells.
    pub fn from_cells(graph: &WeightedGrid, cells: &[usize]) -> Result<Self> {
        let n = cells.len();
        let mut d = vec![0.0; n * n];
        for (i, &c) in cells.iter().enumerate() {
            let field = shortest_distances(graph, c)?;
            for (j, &e) in cells.iter().enumerate() {
                d[i * n + j] = field.dist[e];
            }
        }
        // Floating-point sums along reversed paths can differ in the last
        // bit; keep the smaller value so the matrix is exactly symmetric.
        for i in 0..n {
            for j in 0..i {
                let m = d[i * n + j].min(d[j * n + i]);
                d[i * n + j] = m;
                d[j * n + i] = m;
            }
        }
        Ok(Self { n, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// Bitmask of points inside the open ball of radius `eps` about `c`.
    pub fn ball_mask(&self, c: usize, eps: f64) -> u32 {
        (0..self.n)
            .filter(|&p| self.get(c, p) < eps)
            .fold(0, |m, p| m | (1 << p))
    }
}

#[derive(Clone)]
pub struct MatrixTracker<'a> {
    matrix: &'a DistanceMatrix,
    near: Vec<f64>,
}

impl NearestCenters for MatrixTracker<'_> {
    fn size(&self) -> usize {
        self.matrix.n
    }

    fn add_center(&mut self, c: usize) {
        for (p, v) in self.near.iter_mut().enumerate() {
            *v = v.min(self.matrix.get(c, p));
        }
    }

    fn nearest(&self, p: usize) -> f64 {
        self.near[p]
    }
}

impl CoverSpace for DistanceMatrix {
    type Tracker<'a> = MatrixTracker<'a>;

    fn size(&self) -> usize {
        self.n
    }

    fn label(&self, p: usize) -> usize {
        p
    }

    fn tracker(&self) -> MatrixTracker<'_> {
        MatrixTracker {
            matrix: self,
            near: vec![f64::INFINITY; self.n],
        }
    }
}

/// Cells of a [`CellSet`] under the LFPP metric of the whole grid.
pub struct GridSet<'a> {
    graph: &'a WeightedGrid,
    cells: Vec<usize>,
}

impl<'a> GridSet<'a> {
    pub fn new(graph: &'a WeightedGrid, set: &CellSet) -> Result<Self> {
        graph.spec.check_compatible(&set.spec)?;
        Ok(Self {
            graph,
            cells: set.cells().collect(),
        })
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }
}

#[derive(Clone)]
pub struct GridTracker<'a> {
    graph: &'a WeightedGrid,
    cells: &'a [usize],
    dist: Vec<f64>,
}

impl NearestCenters for GridTracker<'_> {
    fn size(&self) -> usize {
        self.cells.len()
    }

    fn add_center(&mut self, p: usize) {
        crate::lfpp::relax_from(self.graph, self.cells[p], &mut self.dist);
    }

    fn nearest(&self, p: usize) -> f64 {
        self.dist[self.cells[p]]
    }
}

impl CoverSpace for GridSet<'_> {
    type Tracker<'b>
        = GridTracker<'b>
    where
        Self: 'b;

    fn size(&self) -> usize {
        self.cells.len()
    }

    fn label(&self, p: usize) -> usize {
        self.cells[p]
    }

    fn tracker(&self) -> GridTracker<'_> {
        GridTracker {
            graph: self.graph,
            cells: &self.cells,
            dist: vec![f64::INFINITY; self.graph.spec.len()],
        }
    }
}

/// Adds centers farthest-first, starting from an already seeded tracker,
/// until every point is within `threshold` (strictly) of a center. Ties go
/// to the smallest index.
fn farthest_first<T: NearestCenters>(tracker: &mut T, centers: &mut Vec<usize>, threshold: f64) {
    let mut heap: BinaryHeap<(OrderedFloat<f64>, Reverse<usize>)> = (0..tracker.size())
        .map(|p| (OrderedFloat(tracker.nearest(p)), Reverse(p)))
        .filter(|(d, _)| d.0 >= threshold)
        .collect();
    while let Some((OrderedFloat(d), Reverse(p))) = heap.pop() {
        let current = tracker.nearest(p);
        if current < d {
            if current >= threshold {
                heap.push((OrderedFloat(current), Reverse(p)));
            }
            continue;
        }
        tracker.add_center(p);
        centers.push(p);
    }
}

fn argmax<T: NearestCenters>(t: &T) -> usize {
    (0..t.size()).fold(0, |best, p| {
        if t.nearest(p) > t.nearest(best) {
            p
        } else {
            best
        }
    })
}

/// Seeds shared by every radius: the first point and an approximate
/// 1-center found by a double sweep (midpoint of a long geodesic pair).
struct Seeds<'a, S: CoverSpace + 'a> {
    first: S::Tracker<'a>,
    central: (usize, S::Tracker<'a>),
}

impl<'a, S: CoverSpace> Seeds<'a, S> {
    fn new(space: &'a S) -> Self {
        let mut first = space.tracker();
        first.add_center(0);
        let a = argmax(&first);
        let mut from_a = space.tracker();
        from_a.add_center(a);
        let b = argmax(&from_a);
        let mut from_b = space.tracker();
        from_b.add_center(b);
        let c = (0..space.size())
            .min_by(|&p, &q| {
                let ep = from_a.nearest(p).max(from_b.nearest(p));
                let eq = from_a.nearest(q).max(from_b.nearest(q));
                ep.total_cmp(&eq).then(p.cmp(&q))
            })
            .unwrap_or(0);
        let mut central = space.tracker();
        central.add_center(c);
        Self {
            first,
            central: (c, central),
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(LqgError::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    Ok(())
}

/// Farthest-first cover, run from the first point and from an approximate
/// 1-center; the smaller cover wins. The first run picks exactly the
/// centers of [`maximal_packing`] at `eps/2`, so the result never exceeds
/// that packing number.
pub fn greedy_cover<S: CoverSpace>(space: &S, eps: f64) -> Result<CoverResult> {
    Ok(greedy_cover_levels(space, &[eps])?.remove(0))
}

/// [`greedy_cover`] at several radii, sharing the seed searches.
pub fn greedy_cover_levels<S: CoverSpace>(space: &S, eps_list: &[f64]) -> Result<Vec<CoverResult>> {
    for &e in eps_list {
        check_eps(e)?;
    }
    if space.size() == 0 {
        return Ok(eps_list
            .iter()
            .map(|&eps| CoverResult {
                eps,
                centers: vec![],
                count: 0,
                method: CoverMethod::Greedy,
            })
            .collect());
    }
    let seeds = Seeds::new(space);
    Ok(eps_list
        .iter()
        .map(|&eps| {
            let mut best: Option<Vec<usize>> = None;
            for (seed, tracker) in [(0, &seeds.first), (seeds.central.0, &seeds.central.1)] {
                let mut t = tracker.clone();
                let mut centers = vec![seed];
                farthest_first(&mut t, &mut centers, eps);
                if best.as_ref().is_none_or(|b| centers.len() < b.len()) {
                    best = Some(centers);
                }
            }
            let centers: Vec<usize> = best
                .unwrap_or_default()
                .into_iter()
                .map(|p| space.label(p))
                .collect();
            CoverResult {
                eps,
                count: centers.len(),
                centers,
                method: CoverMethod::Greedy,
            }
        })
        .collect())
}

/// Greedy maximal packing: centers pairwise at distance `≥ 2·eps`, chosen
/// farthest-first from the first point.
pub fn maximal_packing<S: CoverSpace>(space: &S, eps: f64) -> Result<CoverResult> {
    check_eps(eps)?;
    let mut centers = vec![];
    if space.size() > 0 {
        let mut t = space.tracker();
        t.add_center(0);
        centers.push(0);
        farthest_first(&mut t, &mut centers, 2.0 * eps);
    }
    let centers: Vec<usize> = centers.into_iter().map(|p| space.label(p)).collect();
    Ok(CoverResult {
        eps,
        count: centers.len(),
        centers,
        method: CoverMethod::Packing,
    })
}

/// Minimum cover size by exhaustive search (branching on the first
/// uncovered point, iterative deepening on the count).
pub fn exact_cover_count(matrix: &DistanceMatrix, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    let n = matrix.len();
    if n > EXACT_COVER_MAX {
        return Err(LqgError::SetTooLarge {
            size: n,
            limit: EXACT_COVER_MAX,
        });
    }
    if n == 0 {
        return Ok(0);
    }
    let balls: Vec<u32> = (0..n).map(|c| matrix.ball_mask(c, eps)).collect();
    let full = (1u32 << n) - 1;
    fn search(balls: &[u32], covered: u32, full: u32, left: usize) -> bool {
        if covered == full {
            return true;
        }
        if left == 0 {
            return false;
        }
        let p = (!covered & full).trailing_zeros();
        balls
            .iter()
            .filter(|b| *b & (1 << p) != 0)
            .any(|b| search(balls, covered | b, full, left - 1))
    }
    Ok((1..=n).find(|&k| search(&balls, 0, full, k)).unwrap_or(n))
}

/// Checks that open balls about `result.centers` cover the space.
pub fn verify_cover<S: CoverSpace>(space: &S, result: &CoverResult) -> bool {
    let mut t = space.tracker();
    let index: std::collections::HashMap<usize, usize> =
        (0..space.size()).map(|p| (space.label(p), p)).collect();
    for c in &result.centers {
        match index.get(c) {
            Some(&p) => t.add_center(p),
            None => return false,
        }
    }
    (0..space.size()).all(|p| t.nearest(p) < result.eps)
}

/// `{z ∈ set : D(z, ∂set) < eps}`, where `∂set` are the set's cells with a
/// 4-neighbor outside it.
pub fn boundary_neighborhood(set: &CellSet, graph: &WeightedGrid, eps: f64) -> Result<CellSet> {
    check_eps(eps)?;
    graph.spec.check_compatible(&set.spec)?;
    let sources: Vec<usize> = set.cells().filter(|&i| set.boundary_mask[i]).collect();
    let dist = multi_source_distances(graph, &sources, eps)?.dist;
    Ok(CellSet::from_mask(
        set.spec,
        (0..set.spec.len())
            .map(|i| set.mask[i] && dist[i] < eps)
            .collect(),
    ))
}
