//! Covering numbers, scaling fits and the Minkowski-content experiment.

mod content;
mod cover;

pub use content::{content_ratio_experiment, ContentRatioTable, ContentRow};
pub use cover::{
    boundary_neighborhood, exact_cover_count, greedy_cover, greedy_cover_levels, maximal_packing,
    verify_cover, CoverMethod, CoverResult, CoverSpace, DistanceMatrix, GridSet, GridTracker,
    MatrixTracker, NearestCenters, EXACT_COVER_MAX,
};

use crate::error::{LqgError, Result};
use crate::gmc::{GridMeasure, Region};
use crate::grid::GridSpec;
use crate::lfpp::{multi_source_distances, WeightedGrid};
use crate::stats::{least_squares, mean};

/// Straight-line fit `log_value ≈ intercept + slope·log_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub log_scale: Vec<f64>,
    pub log_value: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r2: f64,
}

impl ScalingFit {
    pub fn fit(log_scale: Vec<f64>, log_value: Vec<f64>) -> Result<Self> {
        let line = least_squares(&log_scale, &log_value)?;
        Ok(Self {
            log_scale,
            log_value,
            slope: line.slope,
            intercept: line.intercept,
            stderr: line.stderr,
            r2: line.r2,
        })
    }
}

/// Slope of `log N_ε` against `log(1/ε)`.
pub fn dimension_fit(counts: &[(f64, f64)]) -> Result<ScalingFit> {
    if counts.len() < 3 {
        return Err(LqgError::InvalidParameter(format!(
            "dimension fit needs 3 eps levels, got {}",
            counts.len()
        )));
    }
    if counts.iter().any(|&(e, c)| !(e > 0.0 && c > 0.0)) {
        return Err(LqgError::InvalidParameter(
            "eps and counts must be positive".into(),
        ));
    }
    ScalingFit::fit(
        counts.iter().map(|(e, _)| -e.ln()).collect(),
        counts.iter().map(|(_, c)| c.ln()).collect(),
    )
}

/// Cells strictly inside the central square of half the grid's side.
pub fn inner_half(spec: &GridSpec) -> Region {
    let o = spec.origin();
    let h = spec.extent() / 2.0;
    Region::from_mask(
        *spec,
        spec.centers()
            .map(|z| (z.re - o.re).abs() < h && (z.im - o.im).abs() < h)
            .collect(),
    )
}

#[derive(Debug, Clone)]
pub struct BallVolumeReport {
    /// Pooled fit of `log μ(B_r(z))` against `log r` over the kept centers.
    pub fit: ScalingFit,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// `volumes[c][k]` is the mass of the ball of radius `radii[k]` about
    /// the `c`-th kept center.
    pub volumes: Vec<Vec<f64>>,
    /// Per radius, `sup/inf` over centers of `μ(B_r(z))/r^slope`.
    pub spread: Vec<f64>,
}

/// Ball masses about each center at each radius and their pooled exponent.
/// Centers whose largest ball leaves the inner half of the grid are dropped.
pub fn ball_volume_scaling(
    measure: &GridMeasure,
    graph: &WeightedGrid,
    centers: &[usize],
    radii: &[f64],
) -> Result<BallVolumeReport> {
    measure.spec.check_compatible(&graph.spec)?;
    if radii.len() < 3 || radii.windows(2).any(|w| !(w[0] > 0.0 && w[1] > w[0])) {
        return Err(LqgError::InvalidParameter(
            "ball radii must be at least 3 increasing positive values".into(),
        ));
    }
    let inner = inner_half(&graph.spec);
    let r_max = radii[radii.len() - 1];
    let (mut kept, mut dropped, mut volumes) = (vec![], vec![], vec![]);
    for &c in centers {
        let dist = multi_source_distances(graph, &[c], r_max)?.dist;
        if (0..dist.len()).any(|i| dist[i] < r_max && !inner.mask[i]) {
            log::warn!(
                "ball of radius {r_max} about cell {c} leaves the inner half-grid; center dropped"
            );
            dropped.push(c);
            continue;
        }
        let mut v = vec![0.0; radii.len()];
        for (i, d) in dist.iter().enumerate() {
            if *d < r_max {
                let first = radii.partition_point(|r| r <= d);
                for slot in &mut v[first..] {
                    *slot += measure.masses[i];
                }
            }
        }
        kept.push(c);
        volumes.push(v);
    }
    if kept.is_empty() {
        return Err(LqgError::OutOfDomain(
            "every ball center was dropped".into(),
        ));
    }
    let (mut xs, mut ys) = (vec![], vec![]);
    for v in &volumes {
        for (r, m) in radii.iter().zip(v) {
            xs.push(r.ln());
            ys.push(m.ln());
        }
    }
    let fit = ScalingFit::fit(xs, ys)?;
    let spread = (0..radii.len())
        .map(|k| {
            let normalized: Vec<f64> = volumes
                .iter()
                .map(|v| v[k] / radii[k].powf(fit.slope))
                .collect();
            let hi = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
            hi / lo
        })
        .collect();
    Ok(BallVolumeReport {
        fit,
        kept,
        dropped,
        volumes,
        spread,
    })
}

/// Observed `b_{rε}/b_ε` against the regular-variation prediction `r^{−δ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioTest {
    pub r: f64,
    pub eps: f64,
    pub observed: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescalingCoefficients {
    pub eps_grid: Vec<f64>,
    /// Ensemble means of the cover counts.
    pub b_values: Vec<f64>,
    /// Fitted index `δ` in `b_ε ≈ c·ε^{−δ}`.
    pub delta_dim: f64,
    pub delta_stderr: f64,
    /// Smallest and largest `b_ε·ε^δ` over the grid.
    pub c1: f64,
    pub c2: f64,
    pub ratio_tests: Vec<RatioTest>,
}

/// Minimum ensemble size for [`estimate_rescaling_coefficients`].
pub const MIN_RESCALING_SAMPLES: usize = 20;

/// `counts[s][k]` is the cover count of sample `s` at `eps_grid[k]`.
pub fn estimate_rescaling_coefficients(
    eps_grid: &[f64],
    counts: &[Vec<f64>],
) -> Result<RescalingCoefficients> {
    if counts.len() < MIN_RESCALING_SAMPLES {
        return Err(LqgError::InvalidParameter(format!(
            "need {MIN_RESCALING_SAMPLES} ensemble samples, got {}",
            counts.len()
        )));
    }
    if eps_grid.len() < 4 {
        return Err(LqgError::InvalidParameter(format!(
            "need 4 eps levels, got {}",
            eps_grid.len()
        )));
    }
    if counts.iter().any(|c| c.len() != eps_grid.len()) {
        return Err(LqgError::InvalidParameter(
            "every sample needs one count per eps level".into(),
        ));
    }
    let b_values: Vec<f64> = (0..eps_grid.len())
        .map(|k| mean(&counts.iter().map(|c| c[k]).collect::<Vec<_>>()))
        .collect();
    let fit = dimension_fit(
        &eps_grid
            .iter()
            .copied()
            .zip(b_values.iter().copied())
            .collect::<Vec<_>>(),
    )?;
    let delta = fit.slope;
    let scaled: Vec<f64> = eps_grid
        .iter()
        .zip(&b_values)
        .map(|(e, b)| b * e.powf(delta))
        .collect();
    let mut ratio_tests = vec![];
    for r in [2.0, 4.0] {
        for (k, &e) in eps_grid.iter().enumerate() {
            if let Some(j) = eps_grid
                .iter()
                .position(|&x| (x / (r * e) - 1.0).abs() < 1e-9)
            {
                ratio_tests.push(RatioTest {
                    r,
                    eps: e,
                    observed: b_values[j] / b_values[k],
                    predicted: r.powf(-delta),
                });
            }
        }
    }
    Ok(RescalingCoefficients {
        eps_grid: eps_grid.to_vec(),
        b_values,
        delta_dim: delta,
        delta_stderr: fit.stderr,
        c1: scaled.iter().copied().fold(f64::INFINITY, f64::min),
        c2: scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ratio_tests,
    })
}

#[cfg(test)]
mod tests;
