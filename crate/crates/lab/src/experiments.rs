//! Ensemble runs. Each experiment maps one seed to rows of the samples
//! table; every aggregate is then computed from those rows alone, so a
//! saved samples file reproduces the aggregate exactly.

use std::collections::BTreeMap;
use std::time::Instant;

use lqg_core::field::{heat_kernel_mollify, lattice_covariance};
use lqg_core::fractal::{
    ball_volume_scaling, content_ratio_experiment, dimension_fit, estimate_rescaling_coefficients,
    greedy_cover_levels, inner_half, GridSet, ScalingFit, MIN_RESCALING_SAMPLES,
};
use lqg_core::gmc::{
    coordinate_change_check, default_battery, gmc_from_mollified, measure_of, GridMeasure, Shape,
};
use lqg_core::lfpp::{build_lfpp_graph_from_mollified, distance_between, xi_from, WeightedGrid};
use lqg_core::mating::{
    boundary_contact_cells, contact_probability, exponential_functional,
    exponential_functional_mean, graph_ball_growth, mated_crt_graph, sample_lr, Component,
};
use lqg_core::rng::derive_seed;
use lqg_core::stats::{coefficient_of_variation, mean, median, quantile, std_error};
use lqg_core::{GridField, GridSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cache::{FieldCache, GffSampler};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::LabError;
use crate::record::{ResultRecord, Table};
use crate::regions::{load_regions, quadrant_squares};

pub const DEFAULT_CRT_RADII: [usize; 4] = [8, 11, 16, 22];

/// Base seed for probe points, shared by every run.
const PROBE_SEED: u64 = 0x70_726f_6265;

pub type Aggregate = BTreeMap<String, Value>;
pub type Panels = BTreeMap<String, Table>;

/// Runs every seed of `config` on a pool of `config.parallelism` threads.
/// Rows are kept in seed order, so the result does not depend on the
/// thread count.
pub fn run_experiment(
    config: &ExperimentConfig,
    cache: &FieldCache,
) -> Result<ResultRecord, LabError> {
    config.validate()?;
    let start = Instant::now();
    let ctx = Context::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| LabError::Config(format!("cannot start thread pool: {e}")))?;
    let per_seed: Vec<Vec<Vec<f64>>> = pool.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| ctx.rows(cache, seed))
            .collect::<Result<_, LabError>>()
    })?;
    let mut samples = Table::new(
        &columns(config)
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>(),
    );
    for rows in per_seed {
        for row in rows {
            samples.push(row);
        }
    }
    let (aggregate, panels) = summarize(config, &samples)?;
    Ok(ResultRecord {
        experiment: config.experiment.name().to_string(),
        parameters: config.echo(),
        seeds: config.seeds.clone(),
        samples,
        aggregate,
        panels,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Column names of the samples table.
pub fn columns(config: &ExperimentConfig) -> Vec<String> {
    let fixed: &[&str] = match config.experiment {
        ExperimentKind::Covariance => &["seed", "pair", "h_u", "h_v"],
        ExperimentKind::Dimension => &["seed", "eps", "count"],
        ExperimentKind::BallVolume => &["seed", "center", "radius", "mass"],
        ExperimentKind::ContentRatio => &["seed", "eps", "region", "count", "mass", "ratio"],
        ExperimentKind::Weyl => &[
            "seed",
            "pair",
            "dist",
            "dist_shifted",
            "mass",
            "mass_shifted",
        ],
        ExperimentKind::CoordChange => &[
            "seed",
            "eps",
            "region",
            "mass",
            "mass_transformed",
            "relative",
        ],
        ExperimentKind::CrtDimension => &["seed", "center", "radius", "size"],
        ExperimentKind::ExpFunctional => &["seed", "value"],
        ExperimentKind::Arcsine => {
            let mut c = vec!["seed".to_string()];
            c.extend((0..config.intervals).map(|k| format!("contact_{k}")));
            return c;
        }
    };
    fixed.iter().map(|s| s.to_string()).collect()
}

/// Per-run state shared by all seeds.
struct Context<'a> {
    cfg: &'a ExperimentConfig,
    sampler: Option<GffSampler>,
    regions: Vec<Shape>,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self, LabError> {
        use ExperimentKind::*;
        let needs_field = !matches!(cfg.experiment, CrtDimension | Arcsine | ExpFunctional);
        let sampler = if needs_field {
            Some(GffSampler::new(grid_spec(cfg)?)?)
        } else {
            None
        };
        let regions = match (cfg.experiment, &cfg.regions) {
            (ContentRatio, Some(path)) => load_regions(path)?,
            (ContentRatio, None) => quadrant_squares(grid_spec(cfg)?.extent()),
            _ => vec![],
        };
        match cfg.experiment {
            Dimension | ContentRatio if cfg.eps_list.is_empty() => {
                return Err(LabError::Config(format!(
                    "experiment {} needs eps_list",
                    cfg.experiment
                )));
            }
            BallVolume if cfg.radii.is_empty() => {
                return Err(LabError::Config(
                    "experiment ball-volume needs radii".into(),
                ));
            }
            CrtDimension => {
                crt_radii(cfg)?;
            }
            _ => {}
        }
        Ok(Self {
            cfg,
            sampler,
            regions,
        })
    }

    fn field(&self, cache: &FieldCache, seed: u64) -> Result<GridField, LabError> {
        let sampler = self
            .sampler
            .as_ref()
            .expect("field experiments build a sampler");
        cache.field(sampler, self.cfg.field, self.cfg.gamma, seed)
    }

    /// Mollified field, its measure and its LFPP graph.
    fn lattice(&self, field: &GridField) -> Result<(GridMeasure, WeightedGrid), LabError> {
        let eps = self.cfg.mollify_eps();
        let (_, xi) = self.cfg.dimension_and_xi()?;
        let mollified = heat_kernel_mollify(field, eps)?;
        Ok((
            gmc_from_mollified(&mollified, self.cfg.gamma, eps),
            build_lfpp_graph_from_mollified(&mollified, xi, eps),
        ))
    }

    fn rows(&self, cache: &FieldCache, seed: u64) -> Result<Vec<Vec<f64>>, LabError> {
        let cfg = self.cfg;
        let s = seed as f64;
        let mut rows = vec![];
        match cfg.experiment {
            ExperimentKind::Covariance => {
                let field = self.field(cache, seed)?;
                for (i, (u, v)) in probe_pairs(&field.spec, cfg.pairs).into_iter().enumerate() {
                    rows.push(vec![s, i as f64, field.values[u], field.values[v]]);
                }
            }
            ExperimentKind::Dimension => {
                let field = self.field(cache, seed)?;
                let (_, graph) = self.lattice(&field)?;
                let set = GridSet::new(&graph, &inner_half(&field.spec))?;
                for cover in greedy_cover_levels(&set, &cfg.eps_list)? {
                    rows.push(vec![s, cover.eps, cover.count as f64]);
                }
            }
            ExperimentKind::BallVolume => {
                let field = self.field(cache, seed)?;
                let (measure, graph) = self.lattice(&field)?;
                let centers = ball_centers(&field.spec, cfg.centers_per_side);
                let report = ball_volume_scaling(&measure, &graph, &centers, &cfg.radii)?;
                for (c, volumes) in report.kept.iter().zip(&report.volumes) {
                    let label = centers.iter().position(|x| x == c).unwrap_or(0);
                    for (r, m) in cfg.radii.iter().zip(volumes) {
                        rows.push(vec![s, label as f64, *r, *m]);
                    }
                }
            }
            ExperimentKind::ContentRatio => {
                let field = self.field(cache, seed)?;
                let (d, _) = cfg.dimension_and_xi()?;
                let table = content_ratio_experiment(
                    &field,
                    cfg.gamma,
                    d,
                    &self.regions,
                    &cfg.eps_list,
                    cfg.mollify_eps(),
                )?;
                for r in table.rows {
                    rows.push(vec![
                        s,
                        r.eps,
                        r.region as f64,
                        r.count as f64,
                        r.mass,
                        r.ratio,
                    ]);
                }
            }
            ExperimentKind::Weyl => {
                let field = self.field(cache, seed)?;
                let (measure, graph) = self.lattice(&field)?;
                let (measure_s, graph_s) = self.lattice(&field.shifted(cfg.shift))?;
                let spec = field.spec;
                for (i, (u, v)) in probe_pairs(&spec, cfg.pairs).into_iter().enumerate() {
                    let disk = Shape::Disk {
                        center: spec.center(u),
                        radius: 0.1 * spec.extent(),
                    }
                    .rasterize(&spec);
                    rows.push(vec![
                        s,
                        i as f64,
                        distance_between(&graph, u, v)?,
                        distance_between(&graph_s, u, v)?,
                        measure_of(&measure, &disk)?,
                        measure_of(&measure_s, &disk)?,
                    ]);
                }
            }
            ExperimentKind::CoordChange => {
                let field = self.field(cache, seed)?;
                let battery = default_battery(&field.spec);
                for eps in coord_change_eps(cfg) {
                    let report = coordinate_change_check(
                        &field,
                        cfg.scale,
                        Complex64::new(0.0, 0.0),
                        cfg.gamma,
                        eps,
                        &battery,
                    )?;
                    for (k, (m, mt, rel)) in report.rows.iter().enumerate() {
                        rows.push(vec![s, eps, k as f64, *m, *mt, *rel]);
                    }
                }
            }
            ExperimentKind::CrtDimension => {
                let process = sample_lr(cfg.kappa_prime, cfg.a, cfg.horizon, cfg.dt, seed)?;
                let graph = mated_crt_graph(&process, cfg.crt_eps)?;
                let m = cfg.centers_per_side * cfg.centers_per_side;
                let centers: Vec<usize> = (0..m)
                    .map(|i| (i + 1) * graph.num_cells / (m + 1))
                    .collect();
                let radii = crt_radii(cfg)?;
                let report = graph_ball_growth(&graph, &centers, &radii)?;
                for (c, sizes) in report.kept.iter().zip(&report.sizes) {
                    for (r, n) in radii.iter().zip(sizes) {
                        rows.push(vec![s, *c as f64, *r as f64, *n as f64]);
                    }
                }
            }
            ExperimentKind::Arcsine => {
                let process = sample_lr(cfg.kappa_prime, cfg.a, cfg.horizon, cfg.dt, seed)?;
                let flags = boundary_contact_cells(&process, Component::L, cfg.intervals)?;
                let mut row = vec![s];
                row.extend(flags.iter().map(|&f| if f { 1.0 } else { 0.0 }));
                rows.push(row);
            }
            ExperimentKind::ExpFunctional => {
                let (xi, q) = exp_functional_constants(cfg)?;
                rows.push(vec![
                    s,
                    exponential_functional(xi, q, cfg.horizon, cfg.dt, seed)?,
                ]);
            }
        }
        Ok(rows)
    }
}

/// Grid of side `n` and spacing `delta` centered at the origin.
pub fn grid_spec(cfg: &ExperimentConfig) -> Result<GridSpec, LabError> {
    Ok(GridSpec::new(cfg.n, cfg.delta, Complex64::new(0.0, 0.0))?)
}

/// Deterministic pairs of distinct cells, the same for every seed.
pub fn probe_pairs(spec: &GridSpec, count: usize) -> Vec<(usize, usize)> {
    let len = spec.len() as u64;
    (0..)
        .map(|i: u64| {
            let u = derive_seed(PROBE_SEED, 2 * i) % len;
            let v = derive_seed(PROBE_SEED, 2 * i + 1) % len;
            (u as usize, v as usize)
        })
        .filter(|(u, v)| u != v)
        .take(count)
        .collect()
}

/// `side × side` cells spread over `[−0.3, 0.3]·extent` about the origin.
pub fn ball_centers(spec: &GridSpec, side: usize) -> Vec<usize> {
    let o = spec.origin();
    let span = 0.3 * spec.extent();
    let coord = |i: usize| {
        if side == 1 {
            0.0
        } else {
            -span + 2.0 * span * i as f64 / (side - 1) as f64
        }
    };
    (0..side)
        .flat_map(|j| (0..side).map(move |i| (i, j)))
        .map(|(i, j)| spec.nearest_cell(o + Complex64::new(coord(i), coord(j))))
        .collect()
}

fn coord_change_eps(cfg: &ExperimentConfig) -> Vec<f64> {
    if cfg.eps_list.is_empty() {
        [16.0, 8.0, 4.0].iter().map(|k| k * cfg.delta).collect()
    } else {
        cfg.eps_list.clone()
    }
}

fn crt_radii(cfg: &ExperimentConfig) -> Result<Vec<usize>, LabError> {
    if cfg.radii.is_empty() {
        return Ok(DEFAULT_CRT_RADII.to_vec());
    }
    cfg.radii
        .iter()
        .map(|&r| {
            if r >= 1.0 && r.fract() == 0.0 {
                Ok(r as usize)
            } else {
                Err(LabError::Config(format!(
                    "graph radii must be positive integers, got {r}"
                )))
            }
        })
        .collect()
}

/// `(ξ, Q)` for the exponential functional.
fn exp_functional_constants(cfg: &ExperimentConfig) -> Result<(f64, f64), LabError> {
    let xi = match cfg.xi {
        Some(xi) => xi,
        None => xi_from(cfg.gamma, cfg.d_gamma)?,
    };
    let q = cfg.gamma / 2.0 + 2.0 / cfg.gamma;
    Ok((xi, q))
}

/// Aggregates and plot panels computed from the samples table only.
pub fn summarize(
    config: &ExperimentConfig,
    samples: &Table,
) -> Result<(Aggregate, Panels), LabError> {
    let expected = columns(config);
    if samples.columns != expected {
        return Err(LabError::Config(format!(
            "samples have columns {:?}, expected {:?}",
            samples.columns, expected
        )));
    }
    let mut agg = Aggregate::new();
    let mut panels = Panels::new();
    let rows = &samples.rows;
    agg.insert("rows".into(), json!(rows.len()));
    if rows.is_empty() {
        return Err(LabError::Config("no sample rows".into()));
    }
    match config.experiment {
        ExperimentKind::Covariance => summarize_covariance(config, rows, &mut agg, &mut panels)?,
        ExperimentKind::Dimension => {
            let levels = distinct(rows, 1);
            let counts = by_seed_and_key(rows, 1, 2);
            let means: Vec<f64> = levels
                .iter()
                .map(|&e| mean(&column_where(rows, 1, e, 2)))
                .collect();
            let fit = dimension_fit(
                &levels
                    .iter()
                    .copied()
                    .zip(means.iter().copied())
                    .collect::<Vec<_>>(),
            )?;
            agg.insert("dimension".into(), json!(fit.slope));
            agg.insert("dimension_stderr".into(), json!(fit.stderr));
            let per_seed: Vec<f64> = counts
                .iter()
                .filter_map(|c| {
                    dimension_fit(
                        &levels
                            .iter()
                            .copied()
                            .zip(c.iter().copied())
                            .collect::<Vec<_>>(),
                    )
                    .ok()
                })
                .map(|f| f.slope)
                .collect();
            agg.insert("dimension_per_seed_median".into(), json!(median(&per_seed)));
            agg.insert("mean_counts".into(), json!(means));
            agg.insert("eps".into(), json!(levels));
            rescaling(&levels, &counts, &mut agg)?;
            let mut t = Table::new(&["log_inv_eps", "log_count", "stderr"]);
            for (k, &e) in levels.iter().enumerate() {
                let logs: Vec<f64> = counts.iter().map(|c| c[k].ln()).collect();
                t.push(vec![-e.ln(), mean(&logs), std_error(&logs)]);
            }
            panels.insert("counts".into(), t);
        }
        ExperimentKind::BallVolume => {
            let fit = pooled_fit(rows, 2, 3)?;
            agg.insert("exponent".into(), json!(fit.slope));
            agg.insert("exponent_stderr".into(), json!(fit.stderr));
            agg.insert("balls".into(), json!(rows.len() / distinct(rows, 2).len()));
            let per_seed: Vec<f64> = distinct(rows, 0)
                .into_iter()
                .filter_map(|seed| {
                    let sub: Vec<Vec<f64>> =
                        rows.iter().filter(|r| r[0] == seed).cloned().collect();
                    pooled_fit(&sub, 2, 3).ok().map(|f| f.slope)
                })
                .collect();
            agg.insert("exponent_per_seed_median".into(), json!(median(&per_seed)));
            panels.insert(
                "log_volume".into(),
                log_mean_panel(rows, 2, 3, "radius", "log_mass"),
            );
        }
        ExperimentKind::ContentRatio => summarize_content(rows, &mut agg, &mut panels)?,
        ExperimentKind::Weyl => {
            let (_, xi) = config.dimension_and_xi()?;
            let dist_factor = (xi * config.shift).exp();
            let mass_factor = (config.gamma * config.shift).exp();
            let worst = |num: usize, den: usize, f: f64| {
                rows.iter()
                    .map(|r| (r[num] / r[den] / f - 1.0).abs())
                    .fold(0.0, f64::max)
            };
            agg.insert("distance_factor".into(), json!(dist_factor));
            agg.insert("mass_factor".into(), json!(mass_factor));
            agg.insert(
                "distance_max_relative_error".into(),
                json!(worst(3, 2, dist_factor)),
            );
            agg.insert(
                "mass_max_relative_error".into(),
                json!(worst(5, 4, mass_factor)),
            );
        }
        ExperimentKind::CoordChange => {
            let levels = distinct(rows, 1);
            let medians: Vec<f64> = levels
                .iter()
                .map(|&e| median(&column_where(rows, 1, e, 5)))
                .collect();
            let maxima: Vec<f64> = levels
                .iter()
                .map(|&e| column_where(rows, 1, e, 5).into_iter().fold(0.0, f64::max))
                .collect();
            agg.insert("eps".into(), json!(levels));
            agg.insert("median_relative".into(), json!(medians));
            agg.insert("max_relative".into(), json!(maxima));
            let mut t = Table::new(&["eps", "median_relative", "max_relative"]);
            for k in 0..levels.len() {
                t.push(vec![levels[k], medians[k], maxima[k]]);
            }
            panels.insert("discrepancy".into(), t);
        }
        ExperimentKind::CrtDimension => {
            let fit = pooled_fit(rows, 2, 3)?;
            agg.insert("dimension".into(), json!(fit.slope));
            agg.insert("dimension_stderr".into(), json!(fit.stderr));
            let per_seed: Vec<f64> = distinct(rows, 0)
                .into_iter()
                .filter_map(|seed| {
                    let sub: Vec<Vec<f64>> =
                        rows.iter().filter(|r| r[0] == seed).cloned().collect();
                    pooled_fit(&sub, 2, 3).ok().map(|f| f.slope)
                })
                .collect();
            agg.insert("dimension_per_seed_median".into(), json!(median(&per_seed)));
            agg.insert("balls".into(), json!(rows.len() / distinct(rows, 2).len()));
            panels.insert(
                "log_size".into(),
                log_mean_panel(rows, 2, 3, "radius", "log_size"),
            );
        }
        ExperimentKind::Arcsine => {
            let paths = rows.len() as f64;
            let k_count = samples.columns.len() - 1;
            let freq: Vec<f64> = (0..k_count)
                .map(|k| rows.iter().map(|r| r[k + 1]).sum::<f64>() / paths)
                .collect();
            let predicted: Vec<f64> = (0..k_count).map(contact_probability).collect();
            let dev = freq
                .iter()
                .zip(&predicted)
                .map(|(f, p)| (f - p).abs())
                .fold(0.0, f64::max);
            agg.insert("paths".into(), json!(rows.len()));
            agg.insert("frequencies".into(), json!(freq));
            agg.insert("predicted".into(), json!(predicted));
            agg.insert("max_abs_deviation".into(), json!(dev));
            let mut t = Table::new(&["k", "empirical_p", "stderr", "predicted"]);
            for k in 0..k_count {
                t.push(vec![
                    k as f64,
                    freq[k],
                    (freq[k] * (1.0 - freq[k]) / paths).sqrt(),
                    predicted[k],
                ]);
            }
            panels.insert("contact".into(), t);
        }
        ExperimentKind::ExpFunctional => {
            let (xi, q) = exp_functional_constants(config)?;
            let values: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            let predicted = exponential_functional_mean(xi, q)?;
            let (m, se) = (mean(&values), std_error(&values));
            agg.insert("mean".into(), json!(m));
            agg.insert("stderr".into(), json!(se));
            agg.insert("predicted_mean".into(), json!(predicted));
            agg.insert("z_score".into(), json!((m - predicted) / se));
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            let mut t = Table::new(&["value", "survival"]);
            let points = sorted.len().min(200);
            for i in 0..points {
                let k = i * sorted.len() / points;
                t.push(vec![sorted[k], 1.0 - k as f64 / sorted.len() as f64]);
            }
            panels.insert("survival".into(), t);
        }
    }
    Ok((agg, panels))
}

fn summarize_covariance(
    cfg: &ExperimentConfig,
    rows: &[Vec<f64>],
    agg: &mut Aggregate,
    panels: &mut Panels,
) -> Result<(), LabError> {
    let spec = grid_spec(cfg)?;
    let pairs = probe_pairs(&spec, cfg.pairs);
    let mut t = Table::new(&["predicted", "empirical", "stderr"]);
    let mut worst_z: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    for (i, &(u, v)) in pairs.iter().enumerate() {
        let sub: Vec<&Vec<f64>> = rows.iter().filter(|r| r[1] == i as f64).collect();
        if sub.len() < 2 {
            continue;
        }
        let hu: Vec<f64> = sub.iter().map(|r| r[2]).collect();
        let hv: Vec<f64> = sub.iter().map(|r| r[3]).collect();
        let (mu, mv) = (mean(&hu), mean(&hv));
        let prods: Vec<f64> = hu
            .iter()
            .zip(&hv)
            .map(|(a, b)| (a - mu) * (b - mv))
            .collect();
        let cov = prods.iter().sum::<f64>() / (prods.len() - 1) as f64;
        let se = std_error(&prods);
        let predicted = lattice_covariance(spec.center(u), spec.center(v), spec.delta());
        worst_abs = worst_abs.max((cov - predicted).abs());
        worst_z = worst_z.max((cov - predicted).abs() / se);
        t.push(vec![predicted, cov, se]);
    }
    agg.insert("pairs".into(), json!(t.rows.len()));
    agg.insert("max_abs_error".into(), json!(worst_abs));
    agg.insert("max_z_score".into(), json!(worst_z));
    panels.insert("covariance".into(), t);
    Ok(())
}

fn summarize_content(
    rows: &[Vec<f64>],
    agg: &mut Aggregate,
    panels: &mut Panels,
) -> Result<(), LabError> {
    let levels = distinct(rows, 1);
    let seeds = distinct(rows, 0);
    let mut cv_median = vec![];
    let mut t = Table::new(&["eps", "median_cv", "iqr"]);
    for &e in &levels {
        let cvs: Vec<f64> = seeds
            .iter()
            .map(|&s| {
                let ratios: Vec<f64> = rows
                    .iter()
                    .filter(|r| r[0] == s && r[1] == e)
                    .map(|r| r[5])
                    .collect();
                coefficient_of_variation(&ratios)
            })
            .collect();
        let m = median(&cvs);
        cv_median.push(m);
        t.push(vec![e, m, quantile(&cvs, 0.75) - quantile(&cvs, 0.25)]);
    }
    agg.insert("eps".into(), json!(levels));
    agg.insert("cv_median".into(), json!(cv_median));
    panels.insert("cv".into(), t);
    // b_ε per sample: the mean cover count over regions.
    let counts: Vec<Vec<f64>> = seeds
        .iter()
        .map(|&s| {
            levels
                .iter()
                .map(|&e| {
                    mean(
                        &rows
                            .iter()
                            .filter(|r| r[0] == s && r[1] == e)
                            .map(|r| r[3])
                            .collect::<Vec<_>>(),
                    )
                })
                .collect()
        })
        .collect();
    rescaling(&levels, &counts, agg)?;
    let mut b = Table::new(&["eps", "b", "stderr"]);
    for (k, &e) in levels.iter().enumerate() {
        let col: Vec<f64> = counts.iter().map(|c| c[k]).collect();
        b.push(vec![e, mean(&col), std_error(&col)]);
    }
    panels.insert("rescaling".into(), b);
    Ok(())
}

/// Rescaling coefficients, when the ensemble and eps grid are large enough.
fn rescaling(levels: &[f64], counts: &[Vec<f64>], agg: &mut Aggregate) -> Result<(), LabError> {
    if counts.len() < MIN_RESCALING_SAMPLES || levels.len() < 4 {
        return Ok(());
    }
    let rc = estimate_rescaling_coefficients(levels, counts)?;
    agg.insert("b_values".into(), json!(rc.b_values));
    agg.insert("b_index".into(), json!(rc.delta_dim));
    agg.insert("b_index_stderr".into(), json!(rc.delta_stderr));
    agg.insert("c1".into(), json!(rc.c1));
    agg.insert("c2".into(), json!(rc.c2));
    let tests: Vec<Value> = rc
        .ratio_tests
        .iter()
        .map(|t| json!({"r": t.r, "eps": t.eps, "observed": t.observed, "predicted": t.predicted}))
        .collect();
    agg.insert("ratio_tests".into(), Value::Array(tests));
    Ok(())
}

/// Distinct values of a column in order of first appearance.
fn distinct(rows: &[Vec<f64>], col: usize) -> Vec<f64> {
    let mut out: Vec<f64> = vec![];
    for r in rows {
        if !out.contains(&r[col]) {
            out.push(r[col]);
        }
    }
    out
}

fn column_where(rows: &[Vec<f64>], key: usize, value: f64, col: usize) -> Vec<f64> {
    rows.iter()
        .filter(|r| r[key] == value)
        .map(|r| r[col])
        .collect()
}

/// `out[s][k]`: the value column for seed `s` at the `k`-th distinct key.
fn by_seed_and_key(rows: &[Vec<f64>], key: usize, col: usize) -> Vec<Vec<f64>> {
    let keys = distinct(rows, key);
    distinct(rows, 0)
        .into_iter()
        .map(|s| {
            keys.iter()
                .map(|&k| {
                    rows.iter()
                        .find(|r| r[0] == s && r[key] == k)
                        .map_or(f64::NAN, |r| r[col])
                })
                .collect()
        })
        .collect()
}

/// Fit of `log y` against `log x` over all rows.
fn pooled_fit(rows: &[Vec<f64>], x: usize, y: usize) -> Result<ScalingFit, LabError> {
    Ok(ScalingFit::fit(
        rows.iter().map(|r| r[x].ln()).collect(),
        rows.iter().map(|r| r[y].ln()).collect(),
    )?)
}

fn log_mean_panel(rows: &[Vec<f64>], x: usize, y: usize, xname: &str, yname: &str) -> Table {
    let mut t = Table::new(&[xname, yname, "stderr"]);
    for v in distinct(rows, x) {
        let ys: Vec<f64> = column_where(rows, x, v, y).iter().map(|m| m.ln()).collect();
        t.push(vec![v, mean(&ys), std_error(&ys)]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_pairs_are_fixed_and_distinct() {
        let spec = GridSpec::new(16, 0.1, Complex64::new(0.0, 0.0)).unwrap();
        let a = probe_pairs(&spec, 20);
        assert_eq!(a, probe_pairs(&spec, 20));
        assert_eq!(a.len(), 20);
        assert!(a.iter().all(|(u, v)| u != v && *u < 256 && *v < 256));
    }

    #[test]
    fn ball_centers_form_a_symmetric_lattice() {
        let spec = GridSpec::centered(64, 1.0).unwrap();
        let c = ball_centers(&spec, 3);
        assert_eq!(c.len(), 9);
        assert_eq!(c[4], spec.nearest_cell(Complex64::new(0.0, 0.0)));
        assert_eq!(ball_centers(&spec, 1), vec![c[4]]);
    }

    #[test]
    fn summarize_rejects_foreign_tables() {
        let cfg = ExperimentConfig::new(ExperimentKind::ExpFunctional);
        let t = Table::new(&["seed", "count"]);
        assert!(summarize(&cfg, &t).is_err());
    }
}
