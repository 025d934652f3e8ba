//! On-disk cache of sampled fields, keyed by a hash of what determines them.

use std::path::{Path, PathBuf};

use lqg_core::field::{
    quantum_cone_from_gff, ExactGffSampler, SpectralGffSampler, EXACT_MAX_N, SPECTRAL_MIN_N,
};
use lqg_core::io::{load_field, save_field};
use lqg_core::{GridField, GridSpec, LqgError};
use sha2::{Digest, Sha256};

use crate::config::FieldSource;
use crate::error::LabError;

/// Whole-plane GFF sampler for one grid, built once per run.
pub enum GffSampler {
    Spectral(SpectralGffSampler),
    Exact(ExactGffSampler),
}

impl GffSampler {
    /// Spectral on power-of-two grids of at least 64 cells a side, dense
    /// Cholesky on small grids.
    pub fn new(spec: GridSpec) -> Result<Self, LabError> {
        let n = spec.n();
        if n.is_power_of_two() && n >= SPECTRAL_MIN_N {
            Ok(GffSampler::Spectral(SpectralGffSampler::new(spec)?))
        } else if n <= EXACT_MAX_N {
            Ok(GffSampler::Exact(ExactGffSampler::new(spec)?))
        } else {
            Err(LqgError::InvalidParameter(format!(
                "n={n} is neither small enough for the dense sampler nor a power of two"
            ))
            .into())
        }
    }

    pub fn spec(&self) -> &GridSpec {
        match self {
            GffSampler::Spectral(s) => s.spec(),
            GffSampler::Exact(s) => s.spec(),
        }
    }

    pub fn sample(&self, seed: u64) -> GridField {
        match self {
            GffSampler::Spectral(s) => s.sample(seed),
            GffSampler::Exact(s) => s.sample(seed),
        }
    }
}

/// Without a directory every request samples afresh.
#[derive(Debug, Clone, Default)]
pub struct FieldCache {
    dir: Option<PathBuf>,
}

impl FieldCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir }
    }

    pub fn disabled() -> Self {
        Self { dir: None }
    }

    /// Hex SHA-256 of `(kind, n, delta, origin, gamma, seed)`. The cone
    /// depends on `gamma`; the GFF does not, so it hashes as zero there.
    pub fn key(source: FieldSource, spec: &GridSpec, gamma: f64, seed: u64) -> String {
        let gamma = match source {
            FieldSource::Gff | FieldSource::Flat => 0.0,
            FieldSource::Cone => gamma,
        };
        let mut h = Sha256::new();
        h.update(source.to_string().as_bytes());
        h.update((spec.n() as u64).to_le_bytes());
        for x in [spec.delta(), spec.origin().re, spec.origin().im, gamma] {
            h.update(x.to_bits().to_le_bytes());
        }
        h.update(seed.to_le_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn path_for(
        &self,
        source: FieldSource,
        spec: &GridSpec,
        gamma: f64,
        seed: u64,
    ) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("{}.lqgf", Self::key(source, spec, gamma, seed))))
    }

    /// Loads the cached field, or samples and stores it. An unreadable or
    /// mismatching cache file is replaced with a fresh sample.
    pub fn field(
        &self,
        sampler: &GffSampler,
        source: FieldSource,
        gamma: f64,
        seed: u64,
    ) -> Result<GridField, LabError> {
        let spec = sampler.spec();
        if source == FieldSource::Flat {
            return Ok(GridField::constant(*spec, 0.0));
        }
        let Some(path) = self.path_for(source, spec, gamma, seed) else {
            return sample(sampler, source, gamma, seed);
        };
        if path.exists() {
            match load_field(&path) {
                Ok(f) if f.spec == *spec && f.seed == seed => return Ok(f),
                Ok(_) => log::warn!(
                    "cache file {} does not match its key; recomputing",
                    path.display()
                ),
                Err(e) => log::warn!(
                    "cache file {} is unreadable ({e}); recomputing",
                    path.display()
                ),
            }
        }
        let field = sample(sampler, source, gamma, seed)?;
        store(&path, &field)?;
        Ok(field)
    }
}

fn sample(
    sampler: &GffSampler,
    source: FieldSource,
    gamma: f64,
    seed: u64,
) -> Result<GridField, LabError> {
    let gff = sampler.sample(seed);
    let mut f = match source {
        FieldSource::Gff | FieldSource::Flat => gff,
        FieldSource::Cone => quantum_cone_from_gff(&gff, gamma, seed)?,
    };
    f.seed = seed;
    Ok(f)
}

fn store(path: &Path, field: &GridField) -> Result<(), LabError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    // Write then rename so a crash never leaves a truncated file under the key.
    let tmp = path.with_extension("tmp");
    save_field(&tmp, field)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
