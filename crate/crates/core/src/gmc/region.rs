//! Measurable regions on the lattice.

use num_complex::Complex64;

use crate::error::{LqgError, Result};
use crate::grid::GridSpec;

/// Analytic region, rasterized on demand by cell-center membership.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disk {
        center: Complex64,
        radius: f64,
    },
    /// Axis-aligned square `|Re(z−c)| ≤ h, |Im(z−c)| ≤ h`, half-open on the
    /// upper edges so adjacent squares tile without overlap.
    Square {
        center: Complex64,
        half_side: f64,
    },
    Annulus {
        center: Complex64,
        inner: f64,
        outer: f64,
    },
}

impl Shape {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Shape::Disk { center, radius } => (z - center).norm() < radius,
            Shape::Square { center, half_side } => {
                let w = z - center;
                w.re >= -half_side && w.re < half_side && w.im >= -half_side && w.im < half_side
            }
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = (z - center).norm();
                r >= inner && r < outer
            }
        }
    }

    /// Half-width of the axis-aligned bounding box and its center.
    pub fn bounding_box(&self) -> (Complex64, f64) {
        match *self {
            Shape::Disk { center, radius } => (center, radius),
            Shape::Square { center, half_side } => (center, half_side),
            Shape::Annulus { center, outer, .. } => (center, outer),
        }
    }

    /// Lebesgue area.
    pub fn area(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Shape::Disk { radius, .. } => PI * radius * radius,
            Shape::Square { half_side, .. } => 4.0 * half_side * half_side,
            Shape::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
        }
    }

    /// Image under `z ↦ a·z + b` for real `a > 0`.
    pub fn affine_image(&self, a: f64, b: Complex64) -> Shape {
        match *self {
            Shape::Disk { center, radius } => Shape::Disk {
                center: center * a + b,
                radius: radius * a,
            },
            Shape::Square { center, half_side } => Shape::Square {
                center: center * a + b,
                half_side: half_side * a,
            },
            Shape::Annulus {
                center,
                inner,
                outer,
            } => Shape::Annulus {
                center: center * a + b,
                inner: inner * a,
                outer: outer * a,
            },
        }
    }

    pub fn rasterize(&self, spec: &GridSpec) -> Region {
        Region::from_mask(*spec, spec.centers().map(|z| self.contains(z)).collect())
    }
}

/// A set of cells together with the cells straddling its boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub spec: GridSpec,
    pub mask: Vec<bool>,
    /// Cells whose 4-neighborhood contains both members and non-members.
    pub boundary_mask: Vec<bool>,
}

impl Region {
    pub fn from_mask(spec: GridSpec, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), spec.len(), "mask length must match the grid");
        let n = spec.n();
        let mut boundary_mask = vec![false; mask.len()];
        for row in 0..n {
            for col in 0..n {
                let i = spec.index(col, row);
                let mut straddles = false;
                if col > 0 {
                    straddles |= mask[i - 1] != mask[i];
                }
                if col + 1 < n {
                    straddles |= mask[i + 1] != mask[i];
                }
                if row > 0 {
                    straddles |= mask[i - n] != mask[i];
                }
                if row + 1 < n {
                    straddles |= mask[i + n] != mask[i];
                }
                boundary_mask[i] = straddles;
            }
        }
        Self {
            spec,
            mask,
            boundary_mask,
        }
    }

    pub fn full(spec: GridSpec) -> Self {
        Self::from_mask(spec, vec![true; spec.len()])
    }

    pub fn cell_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
    }

    pub fn complement(&self) -> Region {
        Region::from_mask(self.spec, self.mask.iter().map(|m| !m).collect())
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.mask.iter().zip(&other.mask).any(|(a, b)| *a && *b)
    }
}

/// Checks that a shape's bounding box keeps `margin` away from the edge of
/// the interpolation hull.
pub(crate) fn check_inside(shape: &Shape, spec: &GridSpec, margin: f64) -> Result<()> {
    let (c, h) = shape.bounding_box();
    for corner in [
        Complex64::new(c.re - h, c.im - h),
        Complex64::new(c.re + h, c.im + h),
        Complex64::new(c.re - h, c.im + h),
        Complex64::new(c.re + h, c.im - h),
    ] {
        if spec.interior_margin(corner) < margin {
            return Err(LqgError::OutOfDomain(format!(
                "region {shape:?} escapes the grid"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_lies_between_erosion_and_dilation() {
        let spec = GridSpec::centered(32, 1.0).unwrap();
        let disk = Shape::Disk {
            center: Complex64::new(0.1, -0.05),
            radius: 0.5,
        }
        .rasterize(&spec);
        let n = spec.n();
        for i in 0..spec.len() {
            if !disk.boundary_mask[i] {
                continue;
            }
            let (c, r) = spec.col_row(i);
            let nbrs: Vec<usize> = [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)]
                .iter()
                .filter_map(|(dc, dr)| {
                    let (cc, rr) = (c as i64 + dc, r as i64 + dr);
                    (cc >= 0 && rr >= 0 && cc < n as i64 && rr < n as i64)
                        .then(|| spec.index(cc as usize, rr as usize))
                })
                .collect();
            let dilated = disk.mask[i] || nbrs.iter().any(|&j| disk.mask[j]);
            let eroded = disk.mask[i] && nbrs.iter().all(|&j| disk.mask[j]);
            assert!(dilated && !eroded);
        }
    }

    #[test]
    fn adjacent_squares_tile() {
        let spec = GridSpec::centered(16, 1.0).unwrap();
        let h = 0.5;
        let quads: Vec<Region> = [(-h, -h), (h, -h), (-h, h), (h, h)]
            .iter()
            .map(|&(x, y)| {
                Shape::Square {
                    center: Complex64::new(x, y),
                    half_side: h,
                }
                .rasterize(&spec)
            })
            .collect();
        for i in 0..spec.len() {
            assert_eq!(quads.iter().filter(|q| q.mask[i]).count(), 1);
        }
    }

    #[test]
    fn annulus_excludes_hole() {
        let spec = GridSpec::centered(32, 1.0).unwrap();
        let a = Shape::Annulus {
            center: Complex64::new(0.0, 0.0),
            inner: 0.3,
            outer: 0.8,
        };
        let r = a.rasterize(&spec);
        assert!(!r.mask[spec.nearest_cell(Complex64::new(0.0, 0.0))]);
        assert!(r.mask[spec.nearest_cell(Complex64::new(0.5, 0.0))]);
    }
}
