//! Square lattice carrier shared by fields, measures and metric graphs.
//!
//! Cells are stored row-major: `index = row * n + col`, where `col` runs
//! along the real axis and `row` along the imaginary axis. The center of
//! cell `(col, row)` is
//! `origin + ((col + 1/2)·delta − extent) + i((row + 1/2)·delta − extent)`.

use num_complex::Complex64;

use crate::error::{LqgError, Result};

/// Discretization of a square window of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    delta: f64,
    origin: Complex64,
}

impl GridSpec {
    pub fn new(n: usize, delta: f64, origin: Complex64) -> Result<Self> {
        if n < 2 {
            return Err(LqgError::InvalidParameter(format!(
                "grid needs n >= 2, got {n}"
            )));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(LqgError::InvalidParameter(format!(
                "spacing must be positive, got {delta}"
            )));
        }
        if !(origin.re.is_finite() && origin.im.is_finite()) {
            return Err(LqgError::InvalidParameter("origin must be finite".into()));
        }
        Ok(Self { n, delta, origin })
    }

    /// Grid centered at zero with the given half-width.
    pub fn centered(n: usize, extent: f64) -> Result<Self> {
        Self::new(n, 2.0 * extent / n as f64, Complex64::new(0.0, 0.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn origin(&self) -> Complex64 {
        self.origin
    }

    /// Half-width `n·delta/2`.
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.delta / 2.0
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.n + col
    }

    #[inline]
    pub fn col_row(&self, index: usize) -> (usize, usize) {
        (index % self.n, index / self.n)
    }

    #[inline]
    pub fn center(&self, index: usize) -> Complex64 {
        let (col, row) = self.col_row(index);
        self.center_of(col, row)
    }

    #[inline]
    pub fn center_of(&self, col: usize, row: usize) -> Complex64 {
        let e = self.extent();
        self.origin
            + Complex64::new(
                (col as f64 + 0.5) * self.delta - e,
                (row as f64 + 0.5) * self.delta - e,
            )
    }

    pub fn centers(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(move |i| self.center(i))
    }

    /// Continuous lattice coordinates of `z` (cell centers sit at integers).
    #[inline]
    pub fn lattice_coords(&self, z: Complex64) -> (f64, f64) {
        let e = self.extent();
        let w = z - self.origin;
        ((w.re + e) / self.delta - 0.5, (w.im + e) / self.delta - 0.5)
    }

    /// Cell whose square contains `z`, if any.
    pub fn cell_containing(&self, z: Complex64) -> Option<usize> {
        let (u, v) = self.lattice_coords(z);
        let (c, r) = ((u + 0.5).floor(), (v + 0.5).floor());
        let n = self.n as f64;
        if c < 0.0 || r < 0.0 || c >= n || r >= n {
            return None;
        }
        Some(self.index(c as usize, r as usize))
    }

    /// Cell with the nearest center, clamped into the grid.
    pub fn nearest_cell(&self, z: Complex64) -> usize {
        let (u, v) = self.lattice_coords(z);
        let max = (self.n - 1) as f64;
        let c = u.round().clamp(0.0, max) as usize;
        let r = v.round().clamp(0.0, max) as usize;
        self.index(c, r)
    }

    /// True when `z` lies inside the hull of cell centers, where bilinear
    /// interpolation is defined.
    pub fn interpolable(&self, z: Complex64) -> bool {
        let (u, v) = self.lattice_coords(z);
        let max = (self.n - 1) as f64;
        (0.0..=max).contains(&u) && (0.0..=max).contains(&v)
    }

    /// Euclidean distance from `z` to the nearest cell-center hull edge.
    pub fn interior_margin(&self, z: Complex64) -> f64 {
        let (u, v) = self.lattice_coords(z);
        let max = (self.n - 1) as f64;
        let m = u.min(max - u).min(v).min(max - v);
        m * self.delta
    }

    /// Same lattice up to floating-point noise.
    pub fn compatible(&self, other: &GridSpec) -> bool {
        self.n == other.n
            && (self.delta - other.delta).abs() <= 1e-12 * self.delta
            && (self.origin - other.origin).norm() <= 1e-12 * self.delta.max(1.0)
    }

    pub(crate) fn check_compatible(&self, other: &GridSpec) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(LqgError::SpecMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Provenance of a sampled field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    WholePlaneGff,
    QuantumCone,
    Derived,
}

impl FieldKind {
    pub fn code(self) -> u8 {
        match self {
            FieldKind::WholePlaneGff => 0,
            FieldKind::QuantumCone => 1,
            FieldKind::Derived => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(FieldKind::WholePlaneGff),
            1 => Some(FieldKind::QuantumCone),
            2 => Some(FieldKind::Derived),
            _ => None,
        }
    }
}

/// A real field sampled at the cell centers of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub kind: FieldKind,
    /// Only meaningful for quantum-cone fields; zero otherwise.
    pub gamma: f64,
    pub seed: u64,
    pub normalization_note: String,
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<f64>, kind: FieldKind) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(LqgError::InvalidParameter(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(LqgError::InvalidParameter(format!(
                "non-finite value at cell {bad}"
            )));
        }
        Ok(Self {
            spec,
            values,
            kind,
            gamma: 0.0,
            seed: 0,
            normalization_note: String::new(),
        })
    }

    pub fn constant(spec: GridSpec, c: f64) -> Self {
        Self {
            spec,
            values: vec![c; spec.len()],
            kind: FieldKind::Derived,
            gamma: 0.0,
            seed: 0,
            normalization_note: "constant".into(),
        }
    }

    /// Tabulates `f` at every cell center.
    pub fn from_fn(spec: GridSpec, f: impl Fn(Complex64) -> f64) -> Self {
        Self {
            spec,
            values: spec.centers().map(f).collect(),
            kind: FieldKind::Derived,
            gamma: 0.0,
            seed: 0,
            normalization_note: "tabulated function".into(),
        }
    }

    pub(crate) fn derived(&self, values: Vec<f64>, note: impl Into<String>) -> Self {
        Self {
            spec: self.spec,
            values,
            kind: FieldKind::Derived,
            gamma: self.gamma,
            seed: self.seed,
            normalization_note: note.into(),
        }
    }

    #[inline]
    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.values[self.spec.index(col, row)]
    }

    /// Field plus a constant.
    pub fn shifted(&self, c: f64) -> Self {
        self.derived(
            self.values.iter().map(|v| v + c).collect(),
            "shifted by constant",
        )
    }

    /// Cell-wise sum of two fields on the same lattice.
    pub fn add(&self, other: &GridField) -> Result<Self> {
        self.spec.check_compatible(&other.spec)?;
        Ok(self.derived(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            "sum of fields",
        ))
    }

    /// Bilinear interpolation of the cell-center values.
    pub fn interpolate(&self, z: Complex64) -> Result<f64> {
        if !self.spec.interpolable(z) {
            return Err(LqgError::OutOfDomain(format!(
                "point {z} outside the interpolation hull"
            )));
        }
        Ok(self.interpolate_unchecked(z))
    }

    #[inline]
    pub(crate) fn interpolate_unchecked(&self, z: Complex64) -> f64 {
        let (u, v) = self.spec.lattice_coords(z);
        bilinear(&self.values, self.spec.n(), u, v)
    }
}

/// Bilinear interpolation on an `n × n` row-major array at lattice
/// coordinates `(u, v)`, which must lie in `[0, n-1]²`.
#[inline]
pub(crate) fn bilinear(values: &[f64], n: usize, u: f64, v: f64) -> f64 {
    let max = n - 1;
    let c0 = (u.floor() as usize).min(max.saturating_sub(1));
    let r0 = (v.floor() as usize).min(max.saturating_sub(1));
    let fu = u - c0 as f64;
    let fv = v - r0 as f64;
    let v00 = values[r0 * n + c0];
    let v10 = values[r0 * n + c0 + 1];
    let v01 = values[(r0 + 1) * n + c0];
    let v11 = values[(r0 + 1) * n + c0 + 1];
    (1.0 - fv) * ((1.0 - fu) * v00 + fu * v10) + fv * ((1.0 - fu) * v01 + fu * v11)
}
