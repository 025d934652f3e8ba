//! Liouville first passage percolation on the 8-neighbor lattice.
//!
//! Vertex weights are `e^{ξ h*_ε}`; the edge between neighboring cells `u`
//! and `v` costs `|u − v|·(w_u + w_v)/2`. Distances are exact shortest paths
//! of this graph and carry no normalizing constant.

mod ball;
mod bound;
mod search;

pub use ball::{filled_metric_ball, internal_distance, metric_ball};
pub use bound::{circle_average_distance_bound, flat_bound, DistanceBound};
pub use search::{
    distance_between, multi_source_distances, shortest_distances, DistanceField, NO_PREDECESSOR,
};

pub(crate) use search::relax_from;

use std::f64::consts::SQRT_2;

use crate::error::{LqgError, Result};
use crate::field::heat_kernel_mollify;
use crate::gmc::Region;
use crate::grid::{GridField, GridSpec};

/// Cell set returned by ball queries; shares the measure module's
/// representation so balls can be measured directly.
pub type CellSet = Region;

/// Neighbor offsets `(dcol, drow)`; the first four are axis steps.
pub(crate) const OFFSETS: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGrid {
    pub spec: GridSpec,
    pub xi: f64,
    pub eps: f64,
    pub vertex_weights: Vec<f64>,
}

impl WeightedGrid {
    /// Wraps precomputed weights; all must be finite and positive.
    pub fn from_weights(
        spec: GridSpec,
        xi: f64,
        eps: f64,
        vertex_weights: Vec<f64>,
    ) -> Result<Self> {
        if vertex_weights.len() != spec.len() {
            return Err(LqgError::SpecMismatch(format!(
                "{} weights for a grid of {} cells",
                vertex_weights.len(),
                spec.len()
            )));
        }
        if let Some(w) = vertex_weights
            .iter()
            .find(|w| !(w.is_finite() && **w > 0.0))
        {
            return Err(LqgError::InvalidParameter(format!(
                "vertex weight {w} is not positive and finite"
            )));
        }
        Ok(Self {
            spec,
            xi,
            eps,
            vertex_weights,
        })
    }

    /// Uniform unit weights: the Euclidean 8-neighbor metric.
    pub fn flat(spec: GridSpec) -> Self {
        Self {
            spec,
            xi: 0.0,
            eps: spec.delta(),
            vertex_weights: vec![1.0; spec.len()],
        }
    }

    /// Cost of the edge `u–v`, or `None` if the cells are not neighbors.
    pub fn edge_cost(&self, u: usize, v: usize) -> Option<f64> {
        let (cu, ru) = self.spec.col_row(u);
        let (cv, rv) = self.spec.col_row(v);
        let (dc, dr) = (cu.abs_diff(cv), ru.abs_diff(rv));
        let len = match (dc, dr) {
            (1, 0) | (0, 1) => self.spec.delta(),
            (1, 1) => self.spec.delta() * SQRT_2,
            _ => return None,
        };
        Some(edge_cost(
            len,
            self.vertex_weights[u],
            self.vertex_weights[v],
        ))
    }

    /// Neighbors of `u` with their edge costs.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = self.spec.n() as isize;
        let (c, r) = self.spec.col_row(u);
        let (c, r) = (c as isize, r as isize);
        let delta = self.spec.delta();
        let wu = self.vertex_weights[u];
        OFFSETS
            .iter()
            .enumerate()
            .filter_map(move |(k, &(dc, dr))| {
                let (cc, rr) = (c + dc, r + dr);
                if cc < 0 || rr < 0 || cc >= n || rr >= n {
                    return None;
                }
                let v = (rr * n + cc) as usize;
                let len = if k < 4 { delta } else { delta * SQRT_2 };
                Some((v, edge_cost(len, wu, self.vertex_weights[v])))
            })
    }

    /// Largest edge cost in the graph.
    pub fn max_edge_cost(&self) -> f64 {
        (0..self.spec.len())
            .flat_map(|u| self.neighbors(u).map(|(_, c)| c))
            .fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn edge_cost(len: f64, wu: f64, wv: f64) -> f64 {
    len * (wu + wv) / 2.0
}

/// Weights `exp(ξ·h*_eps)` from a raw field.
pub fn build_lfpp_graph(field: &GridField, xi: f64, eps: f64) -> Result<WeightedGrid> {
    check_xi(xi)?;
    let mollified = heat_kernel_mollify(field, eps)?;
    Ok(build_lfpp_graph_from_mollified(&mollified, xi, eps))
}

/// Same as [`build_lfpp_graph`] for a field already mollified at `eps`.
pub fn build_lfpp_graph_from_mollified(mollified: &GridField, xi: f64, eps: f64) -> WeightedGrid {
    let vertex_weights = mollified.values.iter().map(|h| (xi * h).exp()).collect();
    WeightedGrid {
        spec: mollified.spec,
        xi,
        eps,
        vertex_weights,
    }
}

/// Multiplies the weights by `exp(ξ·f)` cell-wise.
pub fn weyl_scale(graph: &WeightedGrid, f: &GridField) -> Result<WeightedGrid> {
    graph.spec.check_compatible(&f.spec)?;
    let vertex_weights = graph
        .vertex_weights
        .iter()
        .zip(&f.values)
        .map(|(w, v)| w * (graph.xi * v).exp())
        .collect();
    WeightedGrid::from_weights(graph.spec, graph.xi, graph.eps, vertex_weights)
}

/// `ξ = γ/d_γ`. `d_γ` defaults to 4 only at `γ = √(8/3)`.
pub fn xi_from(gamma: f64, d_gamma: Option<f64>) -> Result<f64> {
    crate::field::check_gamma(gamma)?;
    let d = match d_gamma {
        Some(d) => d,
        None if (gamma - (8.0f64 / 3.0).sqrt()).abs() < 1e-12 => 4.0,
        None => {
            return Err(LqgError::InvalidParameter(format!(
                "d_gamma is not known in closed form at gamma={gamma}; supply it or xi"
            )))
        }
    };
    Ok(crate::field::constants_q_xi(gamma, d)?.1)
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(LqgError::InvalidParameter(format!(
            "xi must be positive, got {xi}"
        )));
    }
    Ok(())
}
