//! Desk-scale simulation of γ-Liouville quantum gravity.
//!
//! * [`field`]: whole-plane GFF and quantum-cone samplers on square lattices.
//! * [`gmc`]: the discrete LQG area measure and region masses.
//! * [`lfpp`]: Liouville first passage percolation distances, balls and
//!   internal metrics on weighted 8-neighbor lattices.
//! * [`fractal`]: covering and packing numbers, scaling fits and the
//!   Minkowski-content ratio experiment.
//! * [`mating`]: boundary-length Brownian motions and mated-CRT maps.
//! * [`io`]: binary files for fields, measures, cell sets and paths.

pub mod error;
pub mod field;
pub mod fractal;
pub mod gmc;
pub mod grid;
pub mod io;
pub mod lfpp;
pub mod mating;
pub mod rng;
pub mod stats;

mod fft2;

pub use error::{LqgError, Result};
pub use grid::{FieldKind, GridField, GridSpec};
