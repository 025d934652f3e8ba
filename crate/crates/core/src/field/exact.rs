//! Dense Cholesky sampler for small lattices.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::covariance::{smoothed_log_kernel, smoothed_radial_term};
use crate::error::{LqgError, Result};
use crate::grid::{FieldKind, GridField, GridSpec};
use crate::rng::{stream_rng, streams};

/// Largest side length accepted by the dense sampler.
pub const EXACT_MAX_N: usize = 64;

/// Reusable Cholesky factor of the lattice GFF covariance.
pub struct ExactGffSampler {
    spec: GridSpec,
    lower: DMatrix<f64>,
}

impl ExactGffSampler {
    pub fn new(spec: GridSpec) -> Result<Self> {
        if spec.n() > EXACT_MAX_N {
            return Err(LqgError::TooLarge {
                n: spec.n(),
                limit: EXACT_MAX_N,
            });
        }
        let cov = covariance_matrix(&spec);
        match cov.clone().cholesky() {
            Some(chol) => Ok(Self {
                spec,
                lower: chol.l(),
            }),
            None => {
                let min_eigenvalue = cov
                    .symmetric_eigenvalues()
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                Err(LqgError::Factorization { min_eigenvalue })
            }
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn sample(&self, seed: u64) -> GridField {
        let mut rng = stream_rng(seed, streams::FIELD);
        let len = self.spec.len();
        let noise = DVector::from_fn(len, |_, _| StandardNormal.sample(&mut rng));
        let values = (&self.lower * noise).as_slice().to_vec();
        GridField {
            spec: self.spec,
            values,
            kind: FieldKind::WholePlaneGff,
            gamma: 0.0,
            seed,
            normalization_note:
                "exact lattice sampler; h_1(0)=0; diagonal = circle average at spacing delta".into(),
        }
    }
}

/// Covariance of the circle-average field at spacing `delta`, evaluated at
/// all pairs of cell centers.
pub fn covariance_matrix(spec: &GridSpec) -> DMatrix<f64> {
    let len = spec.len();
    let delta = spec.delta();
    let centers: Vec<_> = spec.centers().collect();
    let radial: Vec<f64> = centers
        .iter()
        .map(|&z| smoothed_radial_term(z, delta))
        .collect();
    // Separations below 2·delta are the only ones needing quadrature.
    let near: Vec<f64> = (0..4)
        .map(|k| smoothed_log_kernel(delta * (k as f64).sqrt(), delta))
        .collect();
    let rows: Vec<Vec<f64>> = (0..len)
        .into_par_iter()
        .map(|i| {
            let (ci, ri) = spec.col_row(i);
            (0..len)
                .map(|j| {
                    let (cj, rj) = spec.col_row(j);
                    let k2 = ci.abs_diff(cj).pow(2) + ri.abs_diff(rj).pow(2);
                    let kernel = if k2 < 4 {
                        near[k2]
                    } else {
                        -(centers[i] - centers[j]).norm().ln()
                    };
                    kernel + radial[i] + radial[j]
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(len, len, |i, j| rows[i][j])
}

/// One draw of the lattice whole-plane GFF by dense factorization.
pub fn sample_gff_exact(spec: GridSpec, seed: u64) -> Result<GridField> {
    Ok(ExactGffSampler::new(spec)?.sample(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::covariance::lattice_covariance;

    #[test]
    fn matrix_matches_pointwise_covariance() {
        let spec = GridSpec::centered(12, 1.2).unwrap();
        let cov = covariance_matrix(&spec);
        for i in 0..spec.len() {
            for j in (0..spec.len()).step_by(7) {
                let want = lattice_covariance(spec.center(i), spec.center(j), spec.delta());
                assert!((cov[(i, j)] - want).abs() < 1e-12);
            }
        }
    }
    use crate::field::covariance::covariance_g;

    #[test]
    fn refuses_large_grids() {
        let spec = GridSpec::centered(128, 1.0).unwrap();
        assert!(matches!(
            ExactGffSampler::new(spec),
            Err(LqgError::TooLarge { .. })
        ));
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = GridSpec::centered(12, 1.0).unwrap();
        let s = ExactGffSampler::new(spec).unwrap();
        assert_eq!(s.sample(7).values, s.sample(7).values);
        assert_ne!(s.sample(7).values, s.sample(8).values);
    }

    #[test]
    fn off_diagonal_matches_g_for_separated_cells() {
        let spec = GridSpec::centered(16, 0.6).unwrap();
        let cov = covariance_matrix(&spec);
        for i in (0..spec.len()).step_by(7) {
            for j in (0..spec.len()).step_by(5) {
                let (z, w) = (spec.center(i), spec.center(j));
                if (z - w).norm() >= 2.0 * spec.delta() {
                    let g = covariance_g(z, w).unwrap();
                    assert!((cov[(i, j)] - g).abs() < 1e-12);
                }
            }
        }
    }
}
