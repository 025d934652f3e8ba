//! Heat-kernel mollification `h*_ε = h ∗ p_{ε²/2}`.

use rayon::prelude::*;

use crate::error::{LqgError, Result};
use crate::grid::GridField;

/// Kernel support radius in units of `eps`.
pub const TRUNCATION_RADII: f64 = 4.0;

/// Discrete heat-kernel stencil: offsets within `4·eps` and their weights
/// `exp(−|z|²/ε²)` (the `1/(πε²)` factor cancels on renormalization).
struct Stencil {
    offsets: Vec<(isize, isize, f64)>,
}

impl Stencil {
    fn new(eps: f64, delta: f64) -> Self {
        let reach = TRUNCATION_RADII * eps / delta;
        let r = reach.floor() as isize;
        let mut offsets = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let d2 = ((dx * dx + dy * dy) as f64) * delta * delta;
                if d2 <= (TRUNCATION_RADII * eps).powi(2) {
                    offsets.push((dx, dy, (-d2 / (eps * eps)).exp()));
                }
            }
        }
        Self { offsets }
    }
}

/// Convolves the field with the heat kernel at time `eps²/2`, truncated at
/// radius `4·eps` and renormalized to unit mass over the in-grid stencil.
pub fn heat_kernel_mollify(field: &GridField, eps: f64) -> Result<GridField> {
    let delta = field.spec.delta();
    if !(eps >= delta * (1.0 - 1e-12)) || !eps.is_finite() {
        return Err(LqgError::InvalidParameter(format!(
            "mollification scale {eps} below the lattice spacing {delta}"
        )));
    }
    let stencil = Stencil::new(eps, delta);
    let n = field.spec.n() as isize;
    let src = &field.values;
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(n as usize)
        .enumerate()
        .for_each(|(row, line)| {
            let row = row as isize;
            for (col, slot) in line.iter_mut().enumerate() {
                let col = col as isize;
                let (mut acc, mut mass) = (0.0, 0.0);
                for &(dx, dy, w) in &stencil.offsets {
                    let (c, r) = (col + dx, row + dy);
                    if c >= 0 && r >= 0 && c < n && r < n {
                        acc += w * src[(r * n + c) as usize];
                        mass += w;
                    }
                }
                *slot = acc / mass;
            }
        });
    Ok(field.derived(out, format!("heat-kernel mollified at eps={eps}")))
}
