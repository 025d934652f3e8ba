//! Little-endian binary files for fields, measures, cell sets and
//! boundary-length paths.
//!
//! Every file opens with a 4-byte magic and a `u16` format version. Lattice
//! files continue with `n: u32, delta: f64, origin: (f64, f64)`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{LqgError, Result};
use crate::gmc::{GridMeasure, Region};
use crate::grid::{FieldKind, GridField, GridSpec};
use crate::mating::BoundaryLengthProcess;

pub const VERSION: u16 = 1;
pub const FIELD_MAGIC: &[u8; 4] = b"LQGF";
pub const MEASURE_MAGIC: &[u8; 4] = b"LQGM";
pub const CELLSET_MAGIC: &[u8; 4] = b"LQGS";
pub const PATHS_MAGIC: &[u8; 4] = b"LQGB";

struct Out<W: Write>(W);

impl<W: Write> Out<W> {
    fn bytes(&mut self, b: &[u8]) -> Result<()> {
        Ok(self.0.write_all(b)?)
    }
    fn u8(&mut self, v: u8) -> Result<()> {
        self.bytes(&[v])
    }
    fn u16(&mut self, v: u16) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn u32(&mut self, v: u32) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn f64s(&mut self, vs: &[f64]) -> Result<()> {
        vs.iter().try_for_each(|&v| self.f64(v))
    }
    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        self.bytes(magic)?;
        self.u16(VERSION)
    }
    fn spec(&mut self, spec: &GridSpec) -> Result<()> {
        let n = u32::try_from(spec.n())
            .map_err(|_| LqgError::Format("grid too large for a u32 side".into()))?;
        self.u32(n)?;
        self.f64(spec.delta())?;
        self.f64(spec.origin().re)?;
        self.f64(spec.origin().im)
    }
}

struct In<R: Read>(R);

impl<R: Read> In<R> {
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => LqgError::Format("file ends early".into()),
            _ => LqgError::Io(e),
        })?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        let got = self.array::<4>()?;
        if &got != magic {
            return Err(LqgError::Format(format!(
                "expected magic {:?}, found {:?}",
                String::from_utf8_lossy(magic),
                String::from_utf8_lossy(&got)
            )));
        }
        match self.u16()? {
            VERSION => Ok(()),
            v => Err(LqgError::Format(format!("unsupported format version {v}"))),
        }
    }
    fn spec(&mut self) -> Result<GridSpec> {
        let n = self.u32()? as usize;
        let delta = self.f64()?;
        let origin = Complex64::new(self.f64()?, self.f64()?);
        GridSpec::new(n, delta, origin).map_err(|e| LqgError::Format(e.to_string()))
    }
    fn finish(&mut self) -> Result<()> {
        let mut rest = [0u8; 1];
        match self.0.read(&mut rest)? {
            0 => Ok(()),
            _ => Err(LqgError::Format("trailing bytes after payload".into())),
        }
    }
}

pub fn write_field<W: Write>(w: W, field: &GridField) -> Result<()> {
    let mut o = Out(w);
    o.header(FIELD_MAGIC)?;
    o.u8(field.kind.code())?;
    o.spec(&field.spec)?;
    o.f64(field.gamma)?;
    o.u64(field.seed)?;
    o.f64s(&field.values)?;
    Ok(o.0.flush()?)
}

pub fn read_field<R: Read>(r: R) -> Result<GridField> {
    let mut i = In(r);
    i.header(FIELD_MAGIC)?;
    let code = i.u8()?;
    let kind = FieldKind::from_code(code)
        .ok_or_else(|| LqgError::Format(format!("unknown field kind {code}")))?;
    let spec = i.spec()?;
    let gamma = i.f64()?;
    let seed = i.u64()?;
    let values = i.f64s(spec.len())?;
    i.finish()?;
    let mut field =
        GridField::new(spec, values, kind).map_err(|e| LqgError::Format(e.to_string()))?;
    field.gamma = gamma;
    field.seed = seed;
    field.normalization_note = "loaded from file".into();
    Ok(field)
}

pub fn write_measure<W: Write>(w: W, measure: &GridMeasure) -> Result<()> {
    let mut o = Out(w);
    o.header(MEASURE_MAGIC)?;
    o.spec(&measure.spec)?;
    o.f64(measure.gamma)?;
    o.f64(measure.eps)?;
    o.f64s(&measure.masses)?;
    Ok(o.0.flush()?)
}

pub fn read_measure<R: Read>(r: R) -> Result<GridMeasure> {
    let mut i = In(r);
    i.header(MEASURE_MAGIC)?;
    let spec = i.spec()?;
    let gamma = i.f64()?;
    let eps = i.f64()?;
    let masses = i.f64s(spec.len())?;
    i.finish()?;
    Ok(GridMeasure {
        spec,
        masses,
        gamma,
        eps,
    })
}

/// Run lengths over the row-major mask, alternating and starting with a
/// (possibly empty) run of non-members.
pub fn write_cell_set<W: Write>(w: W, set: &Region) -> Result<()> {
    let mut runs = vec![];
    let (mut current, mut len) = (false, 0u64);
    for &m in &set.mask {
        if m == current {
            len += 1;
        } else {
            runs.push(len);
            current = m;
            len = 1;
        }
    }
    runs.push(len);
    let mut o = Out(w);
    o.header(CELLSET_MAGIC)?;
    o.spec(&set.spec)?;
    o.u64(runs.len() as u64)?;
    runs.iter().try_for_each(|&r| o.u64(r))?;
    Ok(o.0.flush()?)
}

pub fn read_cell_set<R: Read>(r: R) -> Result<Region> {
    let mut i = In(r);
    i.header(CELLSET_MAGIC)?;
    let spec = i.spec()?;
    let count = i.u64()?;
    let mut mask = Vec::with_capacity(spec.len());
    let mut member = false;
    for _ in 0..count {
        let run = i.u64()?;
        if mask.len() as u64 + run > spec.len() as u64 {
            return Err(LqgError::Format("runs overflow the grid".into()));
        }
        mask.extend(std::iter::repeat_n(member, run as usize));
        member = !member;
    }
    i.finish()?;
    if mask.len() != spec.len() {
        return Err(LqgError::Format(format!(
            "runs cover {} of {} cells",
            mask.len(),
            spec.len()
        )));
    }
    Ok(Region::from_mask(spec, mask))
}

/// Header `κ′, a, dt, len: u64`, then `len` interleaved `(L, R)` pairs.
pub fn write_paths<W: Write>(w: W, p: &BoundaryLengthProcess) -> Result<()> {
    let mut o = Out(w);
    o.header(PATHS_MAGIC)?;
    o.f64(p.kappa_prime)?;
    o.f64(p.a)?;
    o.f64(p.dt)?;
    o.u64(p.l.len() as u64)?;
    for (l, r) in p.l.iter().zip(&p.r) {
        o.f64(*l)?;
        o.f64(*r)?;
    }
    Ok(o.0.flush()?)
}

pub fn read_paths<R: Read>(r: R) -> Result<BoundaryLengthProcess> {
    let mut i = In(r);
    i.header(PATHS_MAGIC)?;
    let (kappa_prime, a, dt) = (i.f64()?, i.f64()?, i.f64()?);
    let len = i.u64()? as usize;
    let (mut l, mut r) = (Vec::with_capacity(len), Vec::with_capacity(len));
    for _ in 0..len {
        l.push(i.f64()?);
        r.push(i.f64()?);
    }
    i.finish()?;
    BoundaryLengthProcess::from_paths(kappa_prime, a, dt, l, r)
        .map_err(|e| LqgError::Format(e.to_string()))
}

fn save(path: &Path, write: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<()> {
    write(BufWriter::new(File::create(path)?))
}

fn load<T>(path: &Path, read: impl FnOnce(BufReader<File>) -> Result<T>) -> Result<T> {
    read(BufReader::new(File::open(path)?))
}

pub fn save_field(path: &Path, field: &GridField) -> Result<()> {
    save(path, |w| write_field(w, field))
}

pub fn load_field(path: &Path) -> Result<GridField> {
    load(path, read_field)
}

pub fn save_measure(path: &Path, measure: &GridMeasure) -> Result<()> {
    save(path, |w| write_measure(w, measure))
}

pub fn load_measure(path: &Path) -> Result<GridMeasure> {
    load(path, read_measure)
}

pub fn save_cell_set(path: &Path, set: &Region) -> Result<()> {
    save(path, |w| write_cell_set(w, set))
}

pub fn load_cell_set(path: &Path) -> Result<Region> {
    load(path, read_cell_set)
}

pub fn save_paths(path: &Path, p: &BoundaryLengthProcess) -> Result<()> {
    save(path, |w| write_paths(w, p))
}

pub fn load_paths(path: &Path) -> Result<BoundaryLengthProcess> {
    load(path, read_paths)
}
