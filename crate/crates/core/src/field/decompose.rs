//! Split of a field into its circle-average (radial) and lateral parts.

use num_complex::Complex64;

use super::circle::circle_average;
use crate::error::{LqgError, Result};
use crate::grid::GridField;

/// Radii are tabulated at `exp(k·RADIAL_STEP)` for integer `k`, so the unit
/// circle is always on the grid when it fits.
pub const RADIAL_STEP: f64 = std::f64::consts::LN_2 / 8.0;

#[derive(Debug, Clone)]
pub struct RadialLateralParts {
    pub center: Complex64,
    /// Tabulated radii, increasing.
    pub radii: Vec<f64>,
    /// `h_r(center)` at each tabulated radius.
    pub radial: Vec<f64>,
    pub lateral: GridField,
}

impl RadialLateralParts {
    /// Radial part at radius `r`: linear in `log r` between tabulated radii,
    /// constant beyond either end of the table.
    pub fn radial_at(&self, r: f64) -> f64 {
        interpolate_log_radius(&self.radii, &self.radial, r)
    }
}

pub(crate) fn interpolate_log_radius(radii: &[f64], values: &[f64], r: f64) -> f64 {
    let first = radii[0];
    let last = radii[radii.len() - 1];
    if r <= first {
        return values[0];
    }
    if r >= last {
        return values[values.len() - 1];
    }
    let pos = (r.ln() - first.ln()) / RADIAL_STEP;
    let k = (pos.floor() as usize).min(radii.len() - 2);
    let frac = pos - k as f64;
    values[k] * (1.0 - frac) + values[k + 1] * frac
}

/// Decomposes about the grid origin.
pub fn radial_lateral_decompose(field: &GridField) -> Result<RadialLateralParts> {
    decompose_about(field, field.spec.origin())
}

/// Decomposes about an arbitrary center. The table spans `[4·delta, r_max]`,
/// where `r_max` is the largest circle about `center` inside the grid.
pub fn decompose_about(field: &GridField, center: Complex64) -> Result<RadialLateralParts> {
    let delta = field.spec.delta();
    let r_max = field.spec.interior_margin(center);
    let r_min = 4.0 * delta;
    if r_max < r_min * RADIAL_STEP.exp() {
        return Err(LqgError::OutOfDomain(format!(
            "grid does not contain an annulus [{r_min}, {}] about {center}",
            r_min * RADIAL_STEP.exp()
        )));
    }
    let k_lo = (r_min.ln() / RADIAL_STEP).ceil() as i64;
    let k_hi = (r_max.ln() / RADIAL_STEP).floor() as i64;
    let radii: Vec<f64> = (k_lo..=k_hi)
        .map(|k| (k as f64 * RADIAL_STEP).exp())
        .collect();
    let radial = radii
        .iter()
        .map(|&r| circle_average(field, center, r))
        .collect::<Result<Vec<_>>>()?;
    let lateral_values = field
        .spec
        .centers()
        .zip(&field.values)
        .map(|(z, v)| v - interpolate_log_radius(&radii, &radial, (z - center).norm()))
        .collect();
    let lateral = field.derived(lateral_values, "lateral part");
    Ok(RadialLateralParts {
        center,
        radii,
        radial,
        lateral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn radial_field_has_small_lateral_part() {
        let spec = GridSpec::centered(128, 2.0).unwrap();
        let f = GridField::from_fn(spec, |z| (z.norm() + 0.1).ln());
        let parts = radial_lateral_decompose(&f).unwrap();
        // only compare inside the tabulated annulus
        let (lo, hi) = (parts.radii[0], *parts.radii.last().unwrap());
        let mut worst: f64 = 0.0;
        for (z, l) in spec.centers().zip(&parts.lateral.values) {
            if (lo..=hi).contains(&z.norm()) {
                worst = worst.max(l.abs());
            }
        }
        assert!(worst < 5e-3, "max lateral {worst}");
    }

    #[test]
    fn reconstruction_is_exact() {
        let spec = GridSpec::centered(64, 2.0).unwrap();
        let f = GridField::from_fn(spec, |z| (3.0 * z.re).sin() + z.im * z.norm());
        let parts = radial_lateral_decompose(&f).unwrap();
        for (i, z) in spec.centers().enumerate() {
            let back = parts.radial_at(z.norm()) + parts.lateral.values[i];
            assert!((back - f.values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_circle_is_tabulated() {
        let spec = GridSpec::centered(64, 2.0).unwrap();
        let parts = radial_lateral_decompose(&GridField::constant(spec, 0.0)).unwrap();
        assert!(parts.radii.iter().any(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn lateral_part_has_zero_circle_averages() {
        let spec = GridSpec::centered(128, 2.0).unwrap();
        let f = GridField::from_fn(spec, |z| z.norm().powi(2) + 0.3 * (2.0 * z.arg()).cos());
        let parts = radial_lateral_decompose(&f).unwrap();
        for &r in parts.radii.iter().step_by(4) {
            let avg = circle_average(&parts.lateral, parts.center, r).unwrap();
            assert!(avg.abs() < 1e-2, "r={r}: {avg}");
        }
    }
}
