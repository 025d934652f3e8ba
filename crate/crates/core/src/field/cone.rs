//! γ-quantum cone fields in the circle-average embedding.
//!
//! The field is `A_{−log|z|} + lateral(z)`, where the radial profile `A` is a
//! drifted Brownian motion for `t ≥ 0` and, for `t < 0`, a Brownian motion
//! conditioned to keep `B̂_s + (Q−γ)s > 0`. The conditioning is enforced by
//! rejection at every point of the simulated negative-time horizon, which is
//! finite; the infinite-horizon event is never sampled.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::covariance::{check_gamma, q_of};
use super::decompose::decompose_about;
use super::exact::{ExactGffSampler, EXACT_MAX_N};
use super::spectral::{SpectralGffSampler, SPECTRAL_MIN_N};
use crate::error::{LqgError, Result};
use crate::grid::{FieldKind, GridField, GridSpec};
use crate::rng::{stream_rng, streams};

/// Euler step in `t = −log r`.
pub const PROFILE_DT: f64 = 1e-3;
/// Rejection budget for the negative-time conditioning.
pub const CONDITIONING_BUDGET: usize = 100_000;

/// Radial profile `t ↦ A_t` tabulated on `t_min + k·dt`.
#[derive(Debug, Clone)]
pub struct ConeRadialProfile {
    pub gamma: f64,
    pub dt: f64,
    pub t_min: f64,
    pub values: Vec<f64>,
    /// Index of `t = 0` in `values`.
    pub zero_index: usize,
    /// Rejection attempts spent on the negative-time side.
    pub attempts: usize,
}

impl ConeRadialProfile {
    pub fn t_max(&self) -> f64 {
        self.t_min + (self.values.len() - 1) as f64 * self.dt
    }

    /// Linear interpolation, clamped to the tabulated range.
    pub fn at(&self, t: f64) -> f64 {
        let pos = ((t - self.t_min) / self.dt).clamp(0.0, (self.values.len() - 1) as f64);
        let k = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - k as f64;
        self.values[k] * (1.0 - frac) + self.values[k + 1] * frac
    }

    /// `B̂_s + (Q−γ)s` at every tabulated `s > 0`, i.e. `A_{−s} + Q·s`.
    pub fn negative_side_margins(&self) -> Vec<f64> {
        let q = q_of(self.gamma);
        (1..=self.zero_index)
            .map(|k| {
                let s = k as f64 * self.dt;
                self.values[self.zero_index - k] + q * s
            })
            .collect()
    }
}

/// Samples the radial profile on `[−s_max, t_max]`.
pub fn sample_cone_profile(
    gamma: f64,
    s_max: f64,
    t_max: f64,
    dt: f64,
    seed: u64,
) -> Result<ConeRadialProfile> {
    check_gamma(gamma)?;
    if !(dt > 0.0 && s_max >= 0.0 && t_max >= 0.0) {
        return Err(LqgError::InvalidParameter(
            "profile needs dt > 0 and a nonnegative horizon".into(),
        ));
    }
    let q = q_of(gamma);
    let sd = dt.sqrt();
    let neg_steps = (s_max / dt).ceil() as usize;
    let pos_steps = (t_max / dt).ceil().max(1.0) as usize;

    let mut rng = stream_rng(seed, streams::CONE_NEGATIVE);
    let mut negative = vec![0.0; neg_steps + 1];
    let mut attempts = 0;
    loop {
        if attempts == CONDITIONING_BUDGET {
            return Err(LqgError::ConditioningExhausted {
                attempts,
                accepted: 0,
            });
        }
        attempts += 1;
        let mut b = 0.0;
        let mut ok = true;
        for (k, slot) in negative.iter_mut().enumerate().skip(1) {
            let z: f64 = rng.sample(StandardNormal);
            b += sd * z;
            if b + (q - gamma) * k as f64 * dt <= 0.0 {
                ok = false;
                break;
            }
            *slot = b;
        }
        if ok {
            break;
        }
    }

    let mut rng = stream_rng(seed, streams::CONE_POSITIVE);
    let mut values = Vec::with_capacity(neg_steps + pos_steps + 1);
    // t = −s_k for k = neg_steps..1, then t = 0.
    for k in (1..=neg_steps).rev() {
        values.push(negative[k] - gamma * k as f64 * dt);
    }
    values.push(0.0);
    let mut b = 0.0;
    for k in 1..=pos_steps {
        let z: f64 = rng.sample(StandardNormal);
        b += sd * z;
        values.push(b + gamma * k as f64 * dt);
    }
    Ok(ConeRadialProfile {
        gamma,
        dt,
        t_min: -(neg_steps as f64) * dt,
        values,
        zero_index: neg_steps,
        attempts,
    })
}

/// Samples `h^γ` on a grid containing the unit circle about 0.
pub fn sample_quantum_cone(spec: GridSpec, gamma: f64, seed: u64) -> Result<GridField> {
    check_gamma(gamma)?;
    check_cone_grid(&spec)?;
    quantum_cone_from_gff(&whole_plane_sample(spec, seed)?, gamma, seed)
}

fn check_cone_grid(spec: &GridSpec) -> Result<()> {
    if spec.interior_margin(Complex64::new(0.0, 0.0)) < 1.0 {
        return Err(LqgError::OutOfDomain(
            "quantum-cone grid must contain the unit circle".into(),
        ));
    }
    Ok(())
}

/// Replaces the radial part of a whole-plane GFF sample by a cone profile
/// drawn from `seed`'s profile streams.
pub fn quantum_cone_from_gff(gff: &GridField, gamma: f64, seed: u64) -> Result<GridField> {
    check_gamma(gamma)?;
    let spec = gff.spec;
    check_cone_grid(&spec)?;
    let zero = Complex64::new(0.0, 0.0);
    let parts = decompose_about(gff, zero)?;

    let r_near = spec.delta() / 2.0;
    let r_far = spec.centers().map(|z| z.norm()).fold(0.0, f64::max);
    let profile = sample_cone_profile(gamma, r_far.ln().max(0.0), -r_near.ln(), PROFILE_DT, seed)?;

    let values = spec
        .centers()
        .zip(&parts.lateral.values)
        .map(|(z, lateral)| profile.at(-z.norm().max(r_near).ln()) + lateral)
        .collect();
    Ok(GridField {
        spec,
        values,
        kind: FieldKind::QuantumCone,
        gamma,
        seed,
        normalization_note: format!(
            "quantum cone, circle-average embedding; negative side accepted after {} attempts",
            profile.attempts
        ),
    })
}

/// Whole-plane GFF with whichever sampler fits the grid.
pub fn whole_plane_sample(spec: GridSpec, seed: u64) -> Result<GridField> {
    let n = spec.n();
    if n.is_power_of_two() && n >= SPECTRAL_MIN_N {
        Ok(SpectralGffSampler::new(spec)?.sample(seed))
    } else if n <= EXACT_MAX_N {
        Ok(ExactGffSampler::new(spec)?.sample(seed))
    } else {
        Err(LqgError::InvalidParameter(format!(
            "n={n} is neither small enough for the dense sampler nor a power of two"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::circle::circle_average;

    #[test]
    fn rejects_gamma_out_of_range() {
        let spec = GridSpec::centered(64, 2.0).unwrap();
        assert!(sample_quantum_cone(spec, 2.0, 1).is_err());
        assert!(sample_quantum_cone(spec, 0.0, 1).is_err());
    }

    #[test]
    fn requires_unit_circle() {
        let spec = GridSpec::centered(64, 0.9).unwrap();
        assert!(matches!(
            sample_quantum_cone(spec, 1.0, 1),
            Err(LqgError::OutOfDomain(_))
        ));
    }

    #[test]
    fn accepted_profiles_satisfy_the_conditioning() {
        let g = (8.0f64 / 3.0).sqrt();
        for seed in 0..50 {
            let p = sample_cone_profile(g, 0.7, 1.0, PROFILE_DT, seed).unwrap();
            assert!(p.negative_side_margins().iter().all(|&m| m > 0.0));
            assert_eq!(p.values[p.zero_index], 0.0);
            assert!((p.at(0.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn cone_is_circle_average_embedded() {
        let g = (8.0f64 / 3.0).sqrt();
        let (q, _) = crate::field::covariance::constants_q_xi(g, 4.0).unwrap();
        let spec = GridSpec::centered(128, 2.0).unwrap();
        // The radial profile is Brownian at the lattice scale, so the unit
        // circle average carries noise of order sqrt(delta).
        let tol = 3.0 * spec.delta().sqrt();
        let mut sum = 0.0;
        for seed in 0..8 {
            let h = sample_quantum_cone(spec, g, seed).unwrap();
            assert_eq!(h.kind, FieldKind::QuantumCone);
            let avg = circle_average(&h, Complex64::new(0.0, 0.0), 1.0).unwrap() + q * 1f64.ln();
            assert!(avg.abs() < tol, "seed {seed}: h_1(0) = {avg}");
            sum += avg;
        }
        assert!((sum / 8.0).abs() < tol / 8f64.sqrt());
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = GridSpec::centered(64, 1.5).unwrap();
        let a = sample_quantum_cone(spec, 1.0, 5).unwrap();
        let b = sample_quantum_cone(spec, 1.0, 5).unwrap();
        assert_eq!(a.values, b.values);
    }
}
