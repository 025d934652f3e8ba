//! Experiment configuration: a flat `key = value` file plus overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentKind {
    Covariance,
    Dimension,
    BallVolume,
    ContentRatio,
    Weyl,
    CoordChange,
    CrtDimension,
    Arcsine,
    ExpFunctional,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Covariance,
        ExperimentKind::Dimension,
        ExperimentKind::BallVolume,
        ExperimentKind::ContentRatio,
        ExperimentKind::Weyl,
        ExperimentKind::CoordChange,
        ExperimentKind::CrtDimension,
        ExperimentKind::Arcsine,
        ExperimentKind::ExpFunctional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Covariance => "covariance",
            ExperimentKind::Dimension => "dimension",
            ExperimentKind::BallVolume => "ball-volume",
            ExperimentKind::ContentRatio => "content-ratio",
            ExperimentKind::Weyl => "weyl",
            ExperimentKind::CoordChange => "coord-change",
            ExperimentKind::CrtDimension => "crt-dimension",
            ExperimentKind::Arcsine => "arcsine",
            ExperimentKind::ExpFunctional => "exp-functional",
        }
    }

    /// Experiments that build an LFPP metric and so need `ξ`.
    pub fn needs_xi(self) -> bool {
        matches!(
            self,
            ExperimentKind::Dimension
                | ExperimentKind::BallVolume
                | ExperimentKind::ContentRatio
                | ExperimentKind::Weyl
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self, LabError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                LabError::Config(format!(
                    "unknown experiment '{s}'; expected one of: {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSource {
    Gff,
    Cone,
    /// The zero field, for checks against flat geometry.
    Flat,
}

impl FromStr for FieldSource {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self, LabError> {
        match s {
            "gff" => Ok(FieldSource::Gff),
            "cone" => Ok(FieldSource::Cone),
            "flat" => Ok(FieldSource::Flat),
            _ => Err(LabError::Config(format!(
                "unknown field kind '{s}'; expected gff, cone or flat"
            ))),
        }
    }
}

impl fmt::Display for FieldSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldSource::Gff => "gff",
            FieldSource::Cone => "cone",
            FieldSource::Flat => "flat",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub gamma: f64,
    pub d_gamma: Option<f64>,
    pub xi: Option<f64>,
    pub n: usize,
    pub delta: f64,
    pub eps_list: Vec<f64>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub parallelism: usize,
    pub field: FieldSource,
    /// Mollification scale for measure and metric; defaults to `2·delta`.
    pub mollify_eps: Option<f64>,
    /// Ball radii: LFPP units for `ball-volume`, graph steps for
    /// `crt-dimension`.
    pub radii: Vec<f64>,
    /// Ball centers per side of the square lattice of centers.
    pub centers_per_side: usize,
    /// Regions file (JSON); the four quadrant squares when absent.
    pub regions: Option<PathBuf>,
    /// Probe pairs for `covariance`.
    pub pairs: usize,
    /// Constant added to the field in `weyl`.
    pub shift: f64,
    /// Scale factor for `coord-change`.
    pub scale: f64,
    pub kappa_prime: f64,
    pub a: f64,
    /// Time horizon for path experiments.
    pub horizon: f64,
    pub dt: f64,
    /// Cell size for `crt-dimension`.
    pub crt_eps: f64,
    /// Interval count for `arcsine`.
    pub intervals: usize,
}

impl ExperimentConfig {
    /// Defaults for everything but the experiment name.
    pub fn new(experiment: ExperimentKind) -> Self {
        let n = 256;
        Self {
            experiment,
            gamma: (8.0f64 / 3.0).sqrt(),
            d_gamma: None,
            xi: None,
            n,
            delta: 2.0 / n as f64,
            eps_list: vec![],
            seeds: (0..10).collect(),
            output_dir: PathBuf::from("results"),
            parallelism: 1,
            field: FieldSource::Gff,
            mollify_eps: None,
            radii: vec![],
            centers_per_side: 5,
            regions: None,
            pairs: 64,
            shift: 0.7,
            scale: 2.0,
            kappa_prime: 6.0,
            a: 1.0,
            horizon: 1.0,
            dt: 1e-5,
            crt_eps: 1e-4,
            intervals: 33,
        }
    }

    /// Reads a config file. Blank lines and `#` comments are skipped.
    pub fn from_file(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &[])
    }

    /// Parses `key = value` lines, then applies `overrides` of the same form.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, LabError> {
        let mut pairs = BTreeMap::new();
        let lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        for (k, v) in lines
            .chain(overrides.iter().map(|s| s.trim()))
            .map(split_pair)
        {
            let (k, v) = (k?, v);
            pairs.insert(k, v);
        }
        let name = pairs
            .remove("experiment")
            .ok_or_else(|| LabError::Config("missing key 'experiment'".into()))?;
        let mut cfg = Self::new(name.parse()?);
        let mut delta_given = false;
        for (key, value) in &pairs {
            cfg.set(key, value)?;
            delta_given |= key == "delta";
        }
        if !delta_given {
            cfg.delta = 2.0 / cfg.n as f64;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), LabError> {
        match key {
            "gamma" => self.gamma = num(key, value)?,
            "d_gamma" => self.d_gamma = Some(num(key, value)?),
            "xi" => self.xi = Some(num(key, value)?),
            "n" => self.n = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "eps_list" => self.eps_list = list(key, value)?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "parallelism" => self.parallelism = num(key, value)?,
            "field" => self.field = value.parse()?,
            "mollify_eps" => self.mollify_eps = Some(num(key, value)?),
            "radii" => self.radii = list(key, value)?,
            "centers_per_side" => self.centers_per_side = num(key, value)?,
            "regions" => self.regions = Some(PathBuf::from(value)),
            "pairs" => self.pairs = num(key, value)?,
            "shift" => self.shift = num(key, value)?,
            "scale" => self.scale = num(key, value)?,
            "kappa_prime" => self.kappa_prime = num(key, value)?,
            "a" => self.a = num(key, value)?,
            "horizon" => self.horizon = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "crt_eps" => self.crt_eps = num(key, value)?,
            "intervals" => self.intervals = num(key, value)?,
            _ => return Err(LabError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |msg: String| Err(LabError::Config(msg));
        if self.seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad("seeds must be distinct".into());
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if self.experiment.needs_xi() && self.d_gamma.is_some() == self.xi.is_some() {
            return bad(format!(
                "experiment {} needs exactly one of d_gamma and xi",
                self.experiment
            ));
        }
        if !(self.n >= 2 && self.delta > 0.0) {
            return bad(format!("bad grid n={} delta={}", self.n, self.delta));
        }
        Ok(())
    }

    /// `(d_γ, ξ)`; `d_γ = γ/ξ` when only `ξ` is given.
    pub fn dimension_and_xi(&self) -> Result<(f64, f64), LabError> {
        match (self.d_gamma, self.xi) {
            (Some(d), None) => Ok((d, self.gamma / d)),
            (None, Some(xi)) => Ok((self.gamma / xi, xi)),
            _ => Err(LabError::Config(
                "exactly one of d_gamma and xi is required".into(),
            )),
        }
    }

    pub fn mollify_eps(&self) -> f64 {
        self.mollify_eps.unwrap_or(2.0 * self.delta)
    }

    /// Every setting as text, in key order.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("experiment", self.experiment.to_string());
        put("gamma", self.gamma.to_string());
        if let Some(d) = self.d_gamma {
            put("d_gamma", d.to_string());
        }
        if let Some(x) = self.xi {
            put("xi", x.to_string());
        }
        put("n", self.n.to_string());
        put("delta", self.delta.to_string());
        put("eps_list", join(&self.eps_list));
        put(
            "seeds",
            self.seeds
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        put("output_dir", self.output_dir.display().to_string());
        put("parallelism", self.parallelism.to_string());
        put("field", self.field.to_string());
        put("mollify_eps", self.mollify_eps().to_string());
        put("radii", join(&self.radii));
        put("centers_per_side", self.centers_per_side.to_string());
        if let Some(r) = &self.regions {
            put("regions", r.display().to_string());
        }
        put("pairs", self.pairs.to_string());
        put("shift", self.shift.to_string());
        put("scale", self.scale.to_string());
        put("kappa_prime", self.kappa_prime.to_string());
        put("a", self.a.to_string());
        put("horizon", self.horizon.to_string());
        put("dt", self.dt.to_string());
        put("crt_eps", self.crt_eps.to_string());
        put("intervals", self.intervals.to_string());
        m
    }

    /// Key-value text that parses back to this config.
    pub fn to_text(&self) -> String {
        let mut echo = self.echo();
        if self.mollify_eps.is_none() {
            echo.remove("mollify_eps");
        }
        for key in ["eps_list", "radii"] {
            if echo[key].is_empty() {
                echo.remove(key);
            }
        }
        echo.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn split_pair(line: &str) -> (Result<String, LabError>, String) {
    match line.split_once('=') {
        Some((k, v)) => (Ok(k.trim().to_string()), v.trim().to_string()),
        None => (
            Err(LabError::Config(format!(
                "expected key = value, got '{line}'"
            ))),
            String::new(),
        ),
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, LabError> {
    value
        .parse()
        .map_err(|_| LabError::Config(format!("cannot parse {key} = '{value}'")))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, LabError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

/// Comma-separated seeds and half-open ranges `a..b`.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>, LabError> {
    let mut out = vec![];
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (num("seeds", a)?, num("seeds", b)?);
                out.extend(a..b);
            }
            None => out.push(num("seeds", part)?),
        }
    }
    Ok(out)
}
