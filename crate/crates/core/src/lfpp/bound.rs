//! Circle-average upper bound for the distance from the cone point.

use num_complex::Complex64;

use super::{build_lfpp_graph_from_mollified, distance_between};
use crate::error::{LqgError, Result};
use crate::field::{check_gamma, circle_average, constants_q_xi, heat_kernel_mollify};
use crate::grid::GridField;

/// Step of the Riemann sum in `t = −log r`.
const BOUND_DT: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBound {
    /// `∫ e^{ξh_{e^{−t}}(0) − ξ(Q−γ)t} + e^{ξh_{e^{−t}}(z) − ξQt} dt`.
    pub bound: f64,
    /// LFPP distance from the origin cell to the cell of `z` under
    /// `h − γ log|·|`.
    pub dist: f64,
}

/// Evaluates the bound over `t ∈ [−log(|z|/2), log(1/delta)]` and the
/// matching LFPP distance.
///
/// Circle averages below radius `2·delta` are not resolved by the lattice;
/// the integrand there uses the radius-`2·delta` average.
pub fn circle_average_distance_bound(
    field: &GridField,
    z: Complex64,
    gamma: f64,
    d_gamma: f64,
) -> Result<DistanceBound> {
    let t_max = (1.0 / field.spec.delta()).ln();
    let bound = bound_to(field, z, gamma, d_gamma, t_max)?;
    let (_, xi) = constants_q_xi(gamma, d_gamma)?;
    let delta = field.spec.delta();
    let mollified = heat_kernel_mollify(field, delta)?;
    let values = field
        .spec
        .centers()
        .zip(&mollified.values)
        .map(|(w, h)| h - gamma * w.norm().max(delta / 2.0).ln())
        .collect();
    let singular = mollified.derived(values, "mollified field with -gamma log|z| singularity");
    let graph = build_lfpp_graph_from_mollified(&singular, xi, delta);
    let origin = field.spec.nearest_cell(Complex64::new(0.0, 0.0));
    let dist = distance_between(&graph, origin, field.spec.nearest_cell(z))?;
    Ok(DistanceBound { bound, dist })
}

/// The bound's integral truncated at `t_max`.
pub(crate) fn bound_to(
    field: &GridField,
    z: Complex64,
    gamma: f64,
    d_gamma: f64,
    t_max: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    let (q, xi) = constants_q_xi(gamma, d_gamma)?;
    let delta = field.spec.delta();
    let zn = z.norm();
    if zn < 4.0 * delta {
        return Err(LqgError::InvalidParameter(format!(
            "|z| = {zn} is within 4 lattice spacings of 0"
        )));
    }
    if zn > 0.25 {
        return Err(LqgError::OutOfDomain(format!("|z| = {zn} exceeds 1/4")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let t0 = -(zn / 2.0).ln();
    if t_max <= t0 {
        return Ok(0.0);
    }
    let steps = ((t_max - t0) / BOUND_DT).ceil() as usize;
    let h = (t_max - t0) / steps as f64;
    let mut total = 0.0;
    for k in 0..=steps {
        let t = t0 + k as f64 * h;
        let r = (-t).exp().max(2.0 * delta);
        let a0 = circle_average(field, zero, r)?;
        let az = circle_average(field, z, r)?;
        let f = (xi * a0 - xi * (q - gamma) * t).exp() + (xi * az - xi * q * t).exp();
        let weight = if k == 0 || k == steps { 0.5 } else { 1.0 };
        total += weight * f * h;
    }
    Ok(total)
}

/// Closed form of the bound for a field with vanishing circle averages.
pub fn flat_bound(z: Complex64, gamma: f64, d_gamma: f64, t_max: f64) -> Result<f64> {
    let (q, xi) = constants_q_xi(gamma, d_gamma)?;
    let t0 = -(z.norm() / 2.0).ln();
    let integral = |a: f64| ((-a * t0).exp() - (-a * t_max).exp()) / a;
    Ok(integral(xi * (q - gamma)) + integral(xi * q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sample_gff_spectral;
    use crate::grid::GridSpec;

    #[test]
    fn flat_field_matches_closed_form() {
        let spec = GridSpec::centered(128, 1.0).unwrap();
        let f = GridField::constant(spec, 0.0);
        let g = (8.0f64 / 3.0).sqrt();
        let z = Complex64::new(0.2, 0.05);
        let t_max = (1.0 / spec.delta()).ln();
        let got = bound_to(&f, z, g, 4.0, t_max).unwrap();
        let want = flat_bound(z, g, 4.0, t_max).unwrap();
        assert!((got / want - 1.0).abs() < 1e-4, "{got} vs {want}");
    }

    #[test]
    fn bound_grows_with_the_horizon() {
        let spec = GridSpec::centered(128, 1.0).unwrap();
        let f = sample_gff_spectral(spec, 4).unwrap();
        let z = Complex64::new(-0.15, 0.1);
        let mut last = 0.0;
        for t in [1.5, 2.0, 3.0, 4.0, 5.0] {
            let b = bound_to(&f, z, 1.2, 3.0, t).unwrap();
            assert!(b >= last);
            last = b;
        }
    }

    #[test]
    fn refuses_points_near_or_far_from_zero() {
        let spec = GridSpec::centered(128, 1.0).unwrap();
        let f = GridField::constant(spec, 0.0);
        assert!(circle_average_distance_bound(&f, Complex64::new(0.02, 0.0), 1.0, 3.0).is_err());
        assert!(circle_average_distance_bound(&f, Complex64::new(0.3, 0.0), 1.0, 3.0).is_err());
    }

    #[test]
    fn distance_rarely_exceeds_ten_bounds() {
        let spec = GridSpec::centered(128, 1.0).unwrap();
        let g = (8.0f64 / 3.0).sqrt();
        let z = Complex64::new(0.2, 0.1);
        let mut ok = 0;
        for seed in 0..20 {
            let f = sample_gff_spectral(spec, seed).unwrap();
            let b = circle_average_distance_bound(&f, z, g, 4.0).unwrap();
            assert!(b.dist.is_finite() && b.bound > 0.0);
            if b.dist <= 10.0 * b.bound {
                ok += 1;
            }
        }
        assert!(ok >= 19, "{ok}/20");
    }
}
