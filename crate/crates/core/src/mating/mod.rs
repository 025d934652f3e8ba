//! Boundary-length Brownian motions, mated-CRT maps and two Brownian
//! functionals used as checks on the encoding.

mod crt;

pub use crt::{graph_ball_growth, mated_crt_graph, BallGrowthReport, MatedCrtGraph, MIN_CELLS};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{LqgError, Result};
use crate::rng::{stream_rng, streams};

/// Correlated pair `(L, R)` sampled at times `k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLengthProcess {
    pub kappa_prime: f64,
    pub a: f64,
    pub dt: f64,
    pub l: Vec<f64>,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    L,
    R,
}

/// `−cos(4π/κ′)`, the correlation of the increments of `L` and `R`.
pub fn lr_correlation(kappa_prime: f64) -> Result<f64> {
    if !(kappa_prime > 4.0 && kappa_prime.is_finite()) {
        return Err(LqgError::InvalidParameter(format!(
            "kappa' must exceed 4, got {kappa_prime}"
        )));
    }
    Ok(-(4.0 * std::f64::consts::PI / kappa_prime).cos())
}

impl BoundaryLengthProcess {
    /// Wraps given paths, which must start at the origin and share a length.
    pub fn from_paths(kappa_prime: f64, a: f64, dt: f64, l: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        lr_correlation(kappa_prime)?;
        if !(a > 0.0 && dt > 0.0) {
            return Err(LqgError::InvalidParameter(format!(
                "need a > 0 and dt > 0, got a={a}, dt={dt}"
            )));
        }
        if l.len() != r.len() || l.len() < 2 {
            return Err(LqgError::InvalidParameter(
                "L and R need equal lengths of at least 2".into(),
            ));
        }
        if l[0] != 0.0 || r[0] != 0.0 {
            return Err(LqgError::InvalidParameter("paths must start at 0".into()));
        }
        Ok(Self {
            kappa_prime,
            a,
            dt,
            l,
            r,
        })
    }

    pub fn steps(&self) -> usize {
        self.l.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn component(&self, c: Component) -> &[f64] {
        match c {
            Component::L => &self.l,
            Component::R => &self.r,
        }
    }

    /// Multiplies both paths by `√c`, i.e. changes the variance rate to `c·a`.
    pub fn rescaled(&self, c: f64) -> Self {
        let s = c.sqrt();
        Self {
            a: self.a * c,
            l: self.l.iter().map(|x| x * s).collect(),
            r: self.r.iter().map(|x| x * s).collect(),
            ..*self
        }
    }
}

/// Samples `(L, R)` on `[0, T]` with `Var L_t = Var R_t = a·t` and
/// `Cov(L_t, R_t) = −a·cos(4π/κ′)·t`.
pub fn sample_lr(
    kappa_prime: f64,
    a: f64,
    t: f64,
    dt: f64,
    seed: u64,
) -> Result<BoundaryLengthProcess> {
    let rho = lr_correlation(kappa_prime)?;
    if !(a > 0.0 && t > 0.0 && dt > 0.0) {
        return Err(LqgError::InvalidParameter(format!(
            "need a, T, dt > 0, got a={a}, T={t}, dt={dt}"
        )));
    }
    if dt > 1e-3 * t * (1.0 + 1e-12) {
        return Err(LqgError::InvalidParameter(format!(
            "dt={dt} exceeds T/1000"
        )));
    }
    let steps = (t / dt).round() as usize;
    let sd = (a * dt).sqrt();
    let lateral = (1.0 - rho * rho).sqrt();
    let mut rng = stream_rng(seed, streams::BOUNDARY_LENGTH);
    let (mut l, mut r) = (Vec::with_capacity(steps + 1), Vec::with_capacity(steps + 1));
    let (mut x, mut y) = (0.0, 0.0);
    l.push(x);
    r.push(y);
    for _ in 0..steps {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        x += sd * z1;
        y += sd * (rho * z1 + lateral * z2);
        l.push(x);
        r.push(y);
    }
    Ok(BoundaryLengthProcess {
        kappa_prime,
        a,
        dt,
        l,
        r,
    })
}

/// Per-unit-time covariance of `(L, R)` increments with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementCovariance {
    pub matrix: [[f64; 2]; 2],
    pub stderr: [[f64; 2]; 2],
    pub increments: usize,
}

impl IncrementCovariance {
    /// Largest `|empirical − expected|/stderr` over the three distinct entries.
    pub fn max_z_score(&self, a: f64, kappa_prime: f64) -> Result<f64> {
        let rho = lr_correlation(kappa_prime)?;
        let expected = [[a, a * rho], [a * rho, a]];
        Ok([(0, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(i, j)| (self.matrix[i][j] - expected[i][j]).abs() / self.stderr[i][j])
            .fold(0.0, f64::max))
    }
}

/// Covariance of non-overlapping increments over `lag` steps, pooled over
/// the given paths. The paths are centered, so the mean increment is not
/// estimated.
pub fn increment_covariance(
    paths: &[BoundaryLengthProcess],
    lag: usize,
) -> Result<IncrementCovariance> {
    if lag == 0 || paths.is_empty() {
        return Err(LqgError::InvalidParameter(
            "need at least one path and a positive lag".into(),
        ));
    }
    let mut products: [Vec<f64>; 3] = Default::default();
    for p in paths {
        let h = lag as f64 * p.dt;
        for k in (lag..=p.steps()).step_by(lag) {
            let dl = p.l[k] - p.l[k - lag];
            let dr = p.r[k] - p.r[k - lag];
            products[0].push(dl * dl / h);
            products[1].push(dl * dr / h);
            products[2].push(dr * dr / h);
        }
    }
    let n = products[0].len();
    if n < 2 {
        return Err(LqgError::InvalidParameter(
            "fewer than 2 increments at this lag".into(),
        ));
    }
    let m: Vec<f64> = products.iter().map(|p| crate::stats::mean(p)).collect();
    let s: Vec<f64> = products
        .iter()
        .map(|p| crate::stats::std_error(p))
        .collect();
    Ok(IncrementCovariance {
        matrix: [[m[0], m[1]], [m[1], m[2]]],
        stderr: [[s[0], s[1]], [s[1], s[2]]],
        increments: n,
    })
}

/// Splits the time window into `k_count` equal intervals and flags those in
/// which the chosen component drops below its minimum over all earlier time.
pub fn boundary_contact_cells(
    process: &BoundaryLengthProcess,
    component: Component,
    k_count: usize,
) -> Result<Vec<bool>> {
    if k_count < 16 {
        return Err(LqgError::InvalidParameter(format!(
            "need at least 16 intervals, got {k_count}"
        )));
    }
    let z = process.component(component);
    let steps = process.steps();
    if steps < k_count {
        return Err(LqgError::InvalidParameter(format!(
            "{steps} steps cannot fill {k_count} intervals"
        )));
    }
    let mut flags = Vec::with_capacity(k_count);
    let mut running = z[0];
    let mut start = 0;
    for k in 0..k_count {
        let end = (k + 1) * steps / k_count;
        let low = z[start + 1..=end]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        flags.push(low < running);
        running = running.min(low);
        start = end;
    }
    Ok(flags)
}

/// `1 − (2/π)·arctan √k`, the chance that a Brownian motion reaches a new
/// minimum during `[k, k+1]`.
pub fn contact_probability(k: usize) -> f64 {
    1.0 - 2.0 / std::f64::consts::PI * (k as f64).sqrt().atan()
}

/// Fraction of paths flagged in each interval.
pub fn contact_frequencies(flags: &[Vec<bool>]) -> Result<Vec<f64>> {
    let k_count = flags.first().map_or(0, Vec::len);
    if k_count == 0 || flags.iter().any(|f| f.len() != k_count) {
        return Err(LqgError::InvalidParameter(
            "flag rows must be nonempty and of equal length".into(),
        ));
    }
    Ok((0..k_count)
        .map(|k| flags.iter().filter(|f| f[k]).count() as f64 / flags.len() as f64)
        .collect())
}

/// `1/(ξQ − ξ²/2)`, the mean of `∫₀^∞ e^{ξB_s − ξQs} ds`.
pub fn exponential_functional_mean(xi: f64, q: f64) -> Result<f64> {
    let rate = xi * q - xi * xi / 2.0;
    if !(rate > 0.0) {
        return Err(LqgError::InvalidParameter(format!(
            "xi*Q = {} must exceed xi^2/2 = {}",
            xi * q,
            xi * xi / 2.0
        )));
    }
    Ok(1.0 / rate)
}

/// One sample of `∫₀ᵀ e^{ξB_s − ξQs} ds` by the trapezoid rule on an exact
/// Brownian path sampled every `dt`.
pub fn exponential_functional(xi: f64, q: f64, t: f64, dt: f64, seed: u64) -> Result<f64> {
    let mean = exponential_functional_mean(xi, q)?;
    if t < 50.0 * mean {
        return Err(LqgError::InvalidParameter(format!(
            "T={t} is below 50/(xi*Q - xi^2/2) = {}",
            50.0 * mean
        )));
    }
    if !(dt > 0.0 && dt < t) {
        return Err(LqgError::InvalidParameter(format!(
            "dt={dt} must lie in (0, T)"
        )));
    }
    let steps = (t / dt).round() as usize;
    let sd = dt.sqrt();
    let mut rng = stream_rng(seed, streams::EXP_FUNCTIONAL);
    let (mut b, mut prev, mut sum) = (0.0, 1.0, 0.0);
    for k in 1..=steps {
        let z: f64 = rng.sample(StandardNormal);
        b += sd * z;
        let cur = (xi * b - xi * q * k as f64 * dt).exp();
        sum += prev + cur;
        prev = cur;
    }
    Ok(sum * dt / 2.0)
}
