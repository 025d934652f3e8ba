//! Circle averages of lattice fields.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LqgError, Result};
use crate::grid::GridField;

/// Number of equispaced quadrature angles for a circle of radius `r`.
pub fn quadrature_angles(r: f64, delta: f64) -> usize {
    16usize.max((2.0 * PI * r / delta).ceil() as usize)
}

/// Trapezoid-rule average of the bilinearly interpolated field over the
/// circle `|w − z| = r`.
pub fn circle_average(field: &GridField, z: Complex64, r: f64) -> Result<f64> {
    let delta = field.spec.delta();
    if !(r >= 2.0 * delta) {
        return Err(LqgError::InvalidParameter(format!(
            "circle radius {r} below twice the spacing {delta}"
        )));
    }
    if field.spec.interior_margin(z) < r {
        return Err(LqgError::OutOfDomain(format!(
            "circle of radius {r} about {z} exits the grid"
        )));
    }
    let m = quadrature_angles(r, delta);
    let sum: f64 = (0..m)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / m as f64;
            field.interpolate_unchecked(z + Complex64::from_polar(r, theta))
        })
        .sum();
    Ok(sum / m as f64)
}

/// `t ↦ h_{e^{-t}}(center)` on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleAverageProcess {
    pub center: Complex64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl CircleAverageProcess {
    /// Increments between consecutive times.
    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub fn circle_average_process(
    field: &GridField,
    center: Complex64,
    times: &[f64],
) -> Result<CircleAverageProcess> {
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LqgError::InvalidParameter(
            "time grid must be strictly increasing".into(),
        ));
    }
    let values = times
        .iter()
        .map(|t| circle_average(field, center, (-t).exp()))
        .collect::<Result<Vec<_>>>()?;
    Ok(CircleAverageProcess {
        center,
        times: times.to_vec(),
        values,
    })
}
