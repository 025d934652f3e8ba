//! Ratio `ε^d·N_ε(A)/μ(A)` across regions and scales.

use super::cover::{greedy_cover_levels, GridSet};
use super::inner_half;
use crate::error::{LqgError, Result};
use crate::field::heat_kernel_mollify;
use crate::gmc::{gmc_from_mollified, measure_of, Shape};
use crate::grid::GridField;
use crate::lfpp::build_lfpp_graph_from_mollified;
use crate::stats::coefficient_of_variation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentRow {
    pub eps: f64,
    pub region: usize,
    pub count: usize,
    pub mass: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentRatioTable {
    pub rows: Vec<ContentRow>,
    pub eps_list: Vec<f64>,
    /// Coefficient of variation of the ratios across regions, per eps.
    pub cv: Vec<f64>,
    /// Regions dropped for carrying almost no mass.
    pub dropped: Vec<usize>,
}

/// Covers each region at every eps under the LFPP metric of `field` and
/// divides `ε^{d_γ}·N_ε` by the region's LQG mass. Both the measure and the
/// metric use the mollification scale `mollify_eps`.
pub fn content_ratio_experiment(
    field: &GridField,
    gamma: f64,
    d_gamma: f64,
    regions: &[Shape],
    eps_list: &[f64],
    mollify_eps: f64,
) -> Result<ContentRatioTable> {
    let (_, xi) = crate::field::constants_q_xi(gamma, d_gamma)?;
    let spec = field.spec;
    let inner = inner_half(&spec);
    let rasters: Vec<_> = regions.iter().map(|s| s.rasterize(&spec)).collect();
    for (i, r) in rasters.iter().enumerate() {
        if r.is_empty() {
            return Err(LqgError::InvalidParameter(format!(
                "region {i} contains no cells"
            )));
        }
        if r.cells().any(|c| !inner.mask[c]) {
            return Err(LqgError::OutOfDomain(format!(
                "region {i} leaves the inner half of the grid"
            )));
        }
    }
    let mollified = heat_kernel_mollify(field, mollify_eps)?;
    let measure = gmc_from_mollified(&mollified, gamma, mollify_eps);
    let graph = build_lfpp_graph_from_mollified(&mollified, xi, mollify_eps);
    let total = measure.total();

    let mut rows = vec![];
    let mut dropped = vec![];
    for (i, region) in rasters.iter().enumerate() {
        let mass = measure_of(&measure, region)?;
        if mass < 1e-6 * total {
            log::warn!("region {i} carries mass {mass:.3e} below 1e-6 of the total; dropped");
            dropped.push(i);
            continue;
        }
        let set = GridSet::new(&graph, region)?;
        for cover in greedy_cover_levels(&set, eps_list)? {
            rows.push(ContentRow {
                eps: cover.eps,
                region: i,
                count: cover.count,
                mass,
                ratio: cover.count as f64 * cover.eps.powf(d_gamma) / mass,
            });
        }
    }
    let cv = eps_list
        .iter()
        .map(|&e| {
            let ratios: Vec<f64> = rows
                .iter()
                .filter(|r| r.eps == e)
                .map(|r| r.ratio)
                .collect();
            coefficient_of_variation(&ratios)
        })
        .collect();
    Ok(ContentRatioTable {
        rows,
        eps_list: eps_list.to_vec(),
        cv,
        dropped,
    })
}
