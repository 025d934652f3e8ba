//! Whole-plane GFF covariance, its lattice regularization, and the
//! dimension-dependent constants `Q` and `ξ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LqgError, Result};

/// `G(z, w) = log( max(|z|,1)·max(|w|,1) / |z − w| )`, the covariance of the
/// whole-plane GFF normalized so that its unit-circle average vanishes.
pub fn covariance_g(z: Complex64, w: Complex64) -> Result<f64> {
    let sep = (z - w).norm();
    if sep == 0.0 {
        return Err(LqgError::Domain(format!(
            "covariance kernel diverges on the diagonal at {z}"
        )));
    }
    Ok((z.norm().max(1.0) * w.norm().max(1.0) / sep).ln())
}

/// `Q = γ/2 + 2/γ` and `ξ = γ/d_γ`.
pub fn constants_q_xi(gamma: f64, d_gamma: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    if !(d_gamma > 2.0 && d_gamma.is_finite()) {
        return Err(LqgError::InvalidParameter(format!(
            "the LQG dimension must exceed 2, got {d_gamma}"
        )));
    }
    Ok((q_of(gamma), gamma / d_gamma))
}

pub(crate) fn q_of(gamma: f64) -> f64 {
    gamma / 2.0 + 2.0 / gamma
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 2.0 {
        Ok(())
    } else {
        Err(LqgError::InvalidParameter(format!(
            "gamma must lie in (0, 2), got {gamma}"
        )))
    }
}

const KERNEL_ANGLES: usize = 4096;

/// Covariance of `log(1/|·|)` paired with two uniform circles of radius
/// `delta` whose centers are `sep` apart. Equals `log(1/sep)` once the circles
/// are disjoint (`sep ≥ 2·delta`) and `log(1/delta)` at `sep = 0`.
pub fn smoothed_log_kernel(sep: f64, delta: f64) -> f64 {
    if sep >= 2.0 * delta {
        return -sep.ln();
    }
    // Averaging log(1/|x + δe^{iθ}|) over θ gives log(1/max(|x|, δ)), which
    // leaves a single angular integral.
    let sum: f64 = (0..KERNEL_ANGLES)
        .map(|k| {
            let phi = 2.0 * PI * (k as f64 + 0.5) / KERNEL_ANGLES as f64;
            let x = Complex64::new(sep + delta * phi.cos(), delta * phi.sin());
            -x.norm().max(delta).ln()
        })
        .sum();
    sum / KERNEL_ANGLES as f64
}

/// Mean of `log max(|u|, 1)` over the circle of radius `delta` about `z`.
pub fn smoothed_radial_term(z: Complex64, delta: f64) -> f64 {
    let r = z.norm();
    if r >= 1.0 + delta {
        return r.ln();
    }
    if r <= 1.0 - delta {
        return 0.0;
    }
    let m = 1024;
    let sum: f64 = (0..m)
        .map(|k| {
            let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            (z + Complex64::from_polar(delta, phi)).norm().max(1.0).ln()
        })
        .sum();
    sum / m as f64
}

/// Lattice covariance used by the dense sampler: the covariance of the
/// circle-average field `h_delta` at the two points. It coincides with
/// [`covariance_g`] whenever `|z − w| ≥ 2·delta` and both circles avoid the
/// unit circle.
pub fn lattice_covariance(z: Complex64, w: Complex64, delta: f64) -> f64 {
    smoothed_log_kernel((z - w).norm(), delta)
        + smoothed_radial_term(z, delta)
        + smoothed_radial_term(w, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn covariance_examples() {
        assert!((covariance_g(c(0.3, 0.0), c(0.4, 0.0)).unwrap() - 10f64.ln()).abs() < 1e-12);
        assert!((covariance_g(c(2.0, 0.0), c(3.0, 0.0)).unwrap() - 6f64.ln()).abs() < 1e-12);
        let w = Complex64::from_polar(1.0, 0.7);
        assert!(covariance_g(c(0.0, 0.0), w).unwrap().abs() < 1e-12);
    }

    #[test]
    fn covariance_diverges_on_diagonal() {
        assert!(matches!(
            covariance_g(c(0.5, 0.5), c(0.5, 0.5)),
            Err(LqgError::Domain(_))
        ));
    }

    #[test]
    fn q_and_xi() {
        let (q, xi) = constants_q_xi(1.0, 2.5).unwrap();
        assert!((q - 2.5).abs() < 1e-15);
        assert!((xi - 0.4).abs() < 1e-15);

        let g = (8.0f64 / 3.0).sqrt();
        let (q, xi) = constants_q_xi(g, 4.0).unwrap();
        assert!((q - 5.0 / 6f64.sqrt()).abs() < 1e-12);
        assert!((q - 2.041241).abs() < 1e-6);
        assert!((xi - 0.408248).abs() < 1e-6);

        let (q, _) = constants_q_xi(1.999, 4.0).unwrap();
        assert!(q > 2.0);
    }

    #[test]
    fn q_xi_rejects_bad_input() {
        assert!(constants_q_xi(1.0, 2.0).is_err());
        assert!(constants_q_xi(1.0, 1.5).is_err());
        assert!(constants_q_xi(0.0, 4.0).is_err());
        assert!(constants_q_xi(2.0, 4.0).is_err());
    }

    #[test]
    fn smoothed_kernel_limits() {
        let d = 0.1;
        assert!((smoothed_log_kernel(0.0, d) - (1.0 / d).ln()).abs() < 1e-6);
        assert_eq!(smoothed_log_kernel(0.25, d), -(0.25f64).ln());
        // continuity across the disjointness threshold
        let below = smoothed_log_kernel(2.0 * d - 1e-9, d);
        assert!((below - -(2.0 * d).ln()).abs() < 1e-4);
        // overlapping circles decorrelate below the point kernel
        assert!(smoothed_log_kernel(d, d) < -(d.ln()));
    }

    #[test]
    fn smoothed_radial_term_matches_outside_band() {
        assert_eq!(smoothed_radial_term(c(0.2, 0.1), 0.05), 0.0);
        assert_eq!(smoothed_radial_term(c(1.5, 0.0), 0.05), 1.5f64.ln());
        let on = smoothed_radial_term(c(1.0, 0.0), 0.05);
        assert!(on > 0.0 && on < 0.05);
    }
}
