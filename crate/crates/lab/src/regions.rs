//! Region lists in JSON: `[{"shape": "disk", "center": [x, y], "radius": r}, ...]`.

use std::path::Path;

use lqg_core::gmc::Shape;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum RegionSpec {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Square {
        center: [f64; 2],
        half_side: f64,
    },
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
}

impl RegionSpec {
    pub fn to_shape(self) -> Result<Shape, LabError> {
        let c = |p: [f64; 2]| Complex64::new(p[0], p[1]);
        let positive = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(LabError::Config(format!(
                    "region {what} must be positive, got {x}"
                )))
            }
        };
        Ok(match self {
            RegionSpec::Disk { center, radius } => Shape::Disk {
                center: c(center),
                radius: positive(radius, "radius")?,
            },
            RegionSpec::Square { center, half_side } => Shape::Square {
                center: c(center),
                half_side: positive(half_side, "half_side")?,
            },
            RegionSpec::Annulus {
                center,
                inner,
                outer,
            } => {
                if !(inner >= 0.0 && outer > inner) {
                    return Err(LabError::Config(format!(
                        "annulus needs 0 <= inner < outer, got {inner}, {outer}"
                    )));
                }
                Shape::Annulus {
                    center: c(center),
                    inner,
                    outer,
                }
            }
        })
    }
}

pub fn parse_regions(json: &str) -> Result<Vec<Shape>, LabError> {
    let specs: Vec<RegionSpec> = serde_json::from_str(json)?;
    specs.into_iter().map(RegionSpec::to_shape).collect()
}

pub fn load_regions(path: &Path) -> Result<Vec<Shape>, LabError> {
    parse_regions(&std::fs::read_to_string(path)?)
}

/// Four congruent squares, one per quadrant of the inner half of a grid
/// centered at the origin with half-width `extent`.
pub fn quadrant_squares(extent: f64) -> Vec<Shape> {
    let q = extent / 4.0;
    [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        .iter()
        .map(|&(sx, sy)| Shape::Square {
            center: Complex64::new(sx * q, sy * q),
            half_side: 0.96 * q,
        })
        .collect()
}
