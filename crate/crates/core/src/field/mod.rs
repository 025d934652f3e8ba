//! Lattice Gaussian free fields: samplers, circle averages, mollification
//! and the radial/lateral split.

mod circle;
mod cone;
mod covariance;
mod decompose;
mod exact;
mod mollify;
mod spectral;

pub use circle::{circle_average, circle_average_process, quadrature_angles, CircleAverageProcess};
pub use cone::{
    quantum_cone_from_gff, sample_cone_profile, sample_quantum_cone, whole_plane_sample,
    ConeRadialProfile, CONDITIONING_BUDGET, PROFILE_DT,
};
pub use covariance::{
    constants_q_xi, covariance_g, lattice_covariance, smoothed_log_kernel, smoothed_radial_term,
};
pub use decompose::{decompose_about, radial_lateral_decompose, RadialLateralParts, RADIAL_STEP};
pub use exact::{covariance_matrix, sample_gff_exact, ExactGffSampler, EXACT_MAX_N};
pub use mollify::{heat_kernel_mollify, TRUNCATION_RADII};
pub use spectral::{sample_gff_spectral, SpectralGffSampler, SPECTRAL_MIN_N};

pub(crate) use covariance::check_gamma;
