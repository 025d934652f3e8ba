use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lqg_core::field::heat_kernel_mollify;
use lqg_core::fractal::{dimension_fit, greedy_cover_levels, inner_half, maximal_packing, GridSet};
use lqg_core::gmc::{gmc_from_field, gmc_from_mollified, measure_of, GridMeasure, Region};
use lqg_core::io::{load_field, load_paths, save_cell_set, save_field, save_measure, save_paths};
use lqg_core::lfpp::{
    build_lfpp_graph_from_mollified, distance_between, filled_metric_ball, metric_ball,
    shortest_distances, xi_from, WeightedGrid,
};
use lqg_core::mating::{graph_ball_growth, mated_crt_graph, sample_lr};
use lqg_core::{GridField, GridSpec};
use lqglab::config::{ExperimentConfig, FieldSource};
use lqglab::experiments::DEFAULT_CRT_RADII;
use lqglab::regions::{load_regions, quadrant_squares};
use lqglab::{emit_plot_data, run_experiment, FieldCache, GffSampler, LabError, Table};
use num_complex::Complex64;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "lqglab",
    version,
    about = "Lattice Liouville quantum gravity experiments"
)]
struct Cli {
    /// Experiment config file for `run`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; overrides the config's parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory of cached field samples.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a whole-plane GFF or quantum cone and save it.
    SampleField {
        #[arg(long, default_value = "gff")]
        kind: String,
        #[arg(long)]
        n: usize,
        /// Lattice spacing; defaults to 2/n.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = default_gamma())]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mollify a saved field and save its LQG area measure.
    Gmc {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = default_gamma())]
        gamma: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// LFPP distances from a point.
    LfppDist {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, value_parser = parse_point)]
        src: Complex64,
        #[arg(long, value_parser = parse_point, conflicts_with = "all")]
        dst: Option<Complex64>,
        /// Distances to every cell.
        #[arg(long)]
        all: bool,
    },
    /// LFPP metric ball, saved as a cell set.
    Ball {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, value_parser = parse_point)]
        center: Complex64,
        #[arg(long)]
        r: f64,
        /// Add the complement components cut off from the grid edge.
        #[arg(long)]
        filled: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy cover counts of each region.
    Cover(SetArgs),
    /// Maximal packing counts of each region.
    Pack(SetArgs),
    /// Cover counts and the fitted box dimension of each region.
    Dimension(SetArgs),
    /// `ε^d·N_ε/μ` for each region; the quadrant squares by default.
    ContentRatio(SetArgs),
    /// Sample correlated boundary-length Brownian motions.
    LrSample {
        #[arg(long, default_value_t = 6.0)]
        kappa_prime: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mated-CRT map edges of saved paths.
    MatedCrt {
        #[arg(long)]
        paths: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Graph ball sizes in the mated-CRT map of saved paths.
    CrtBalls {
        #[arg(long)]
        paths: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_delimiter = ',')]
        radii: Vec<usize>,
        /// Number of evenly spaced ball centers.
        #[arg(long, default_value_t = 25)]
        centers: usize,
    },
    /// Run the experiment described by `--config`.
    Run {
        /// `key=value` overrides applied after the config file.
        #[arg(long = "set")]
        overrides: Vec<String>,
    },
}

#[derive(Args)]
struct MetricArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, default_value_t = default_gamma())]
    gamma: f64,
    #[arg(long, conflicts_with = "d_gamma")]
    xi: Option<f64>,
    #[arg(long)]
    d_gamma: Option<f64>,
    /// Mollification scale; defaults to twice the spacing.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct SetArgs {
    #[command(flatten)]
    metric: MetricArgs,
    /// Regions file; the inner half of the grid by default.
    #[arg(long)]
    regions: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    eps_list: Vec<f64>,
}

fn default_gamma() -> f64 {
    (8.0f64 / 3.0).sqrt()
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got '{s}'"))?;
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad coordinate '{v}'"))
    };
    Ok(Complex64::new(num(x)?, num(y)?))
}

/// A loaded field with its mollified measure and LFPP graph.
struct Lattice {
    field: GridField,
    measure: GridMeasure,
    graph: WeightedGrid,
    d: f64,
}

impl MetricArgs {
    fn load(&self) -> Result<Lattice, LabError> {
        let field = load_field(&self.field)?;
        let xi = match self.xi {
            Some(xi) => xi,
            None => xi_from(self.gamma, self.d_gamma)?,
        };
        let eps = self.eps.unwrap_or(2.0 * field.spec.delta());
        let mollified = heat_kernel_mollify(&field, eps)?;
        Ok(Lattice {
            measure: gmc_from_mollified(&mollified, self.gamma, eps),
            graph: build_lfpp_graph_from_mollified(&mollified, xi, eps),
            field,
            d: self.gamma / xi,
        })
    }
}

fn cell_of(spec: &GridSpec, z: Complex64) -> Result<usize, LabError> {
    spec.cell_containing(z)
        .ok_or_else(|| LabError::Config(format!("point {},{} is outside the grid", z.re, z.im)))
}

fn emit(table: &Table, format: Format) -> Result<(), LabError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(|x| x.to_string()))?;
            }
            w.flush()?;
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(
                    &json!({"columns": table.columns, "rows": table.rows})
                )?
            );
        }
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum SetVerb {
    Cover,
    Pack,
    Dimension,
    Content,
}

fn set_counts(args: &SetArgs, verb: SetVerb, format: Format) -> Result<(), LabError> {
    let lat = args.metric.load()?;
    let spec = lat.field.spec;
    let regions: Vec<Region> = match (&args.regions, verb) {
        (Some(path), _) => load_regions(path)?
            .iter()
            .map(|s| s.rasterize(&spec))
            .collect(),
        (None, SetVerb::Content) => quadrant_squares(spec.extent())
            .iter()
            .map(|s| s.rasterize(&spec))
            .collect(),
        (None, _) => vec![inner_half(&spec)],
    };
    let mut table = Table::new(&["eps", "region", "count", "mass", "ratio"]);
    for (i, region) in regions.iter().enumerate() {
        if region.is_empty() {
            return Err(LabError::Config(format!("region {i} contains no cells")));
        }
        let mass = measure_of(&lat.measure, region)?;
        let set = GridSet::new(&lat.graph, region)?;
        let counts: Vec<(f64, usize)> = if verb == SetVerb::Pack {
            args.eps_list
                .iter()
                .map(|&e| maximal_packing(&set, e).map(|c| (e, c.count)))
                .collect::<Result<_, _>>()?
        } else {
            greedy_cover_levels(&set, &args.eps_list)?
                .iter()
                .map(|c| (c.eps, c.count))
                .collect()
        };
        for &(e, n) in &counts {
            table.push(vec![
                e,
                i as f64,
                n as f64,
                mass,
                n as f64 * e.powf(lat.d) / mass,
            ]);
        }
        if verb == SetVerb::Dimension {
            let fit = dimension_fit(
                &counts
                    .iter()
                    .map(|&(e, n)| (e, n as f64))
                    .collect::<Vec<_>>(),
            )?;
            eprintln!("region {i}: dimension {:.4} ± {:.4}", fit.slope, fit.stderr);
        }
    }
    emit(&table, format)
}

fn run(cli: Cli) -> Result<(), LabError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(LabError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| LabError::Config(format!("cannot start thread pool: {e}")))?;
    }
    let cache = FieldCache::new(cli.cache_dir.clone());
    match cli.command {
        Command::SampleField {
            kind,
            n,
            delta,
            gamma,
            seed,
            out,
        } => {
            let source: FieldSource = kind.parse()?;
            let spec = GridSpec::new(n, delta.unwrap_or(2.0 / n as f64), Complex64::new(0.0, 0.0))?;
            let field = cache.field(&GffSampler::new(spec)?, source, gamma, seed)?;
            save_field(&out, &field)?;
            let mut t = Table::new(&["n", "delta", "seed", "mean", "min", "max"]);
            let v = &field.values;
            t.push(vec![
                n as f64,
                spec.delta(),
                seed as f64,
                v.iter().sum::<f64>() / v.len() as f64,
                v.iter().copied().fold(f64::INFINITY, f64::min),
                v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ]);
            emit(&t, cli.format)
        }
        Command::Gmc {
            field,
            gamma,
            eps,
            out,
        } => {
            let measure = gmc_from_field(&load_field(&field)?, gamma, eps)?;
            save_measure(&out, &measure)?;
            let mut t = Table::new(&["gamma", "eps", "total_mass"]);
            t.push(vec![gamma, eps, measure.total()]);
            emit(&t, cli.format)
        }
        Command::LfppDist {
            metric,
            src,
            dst,
            all,
        } => {
            let lat = metric.load()?;
            let spec = lat.graph.spec;
            let s = cell_of(&spec, src)?;
            match (dst, all) {
                (Some(z), _) => {
                    let mut t = Table::new(&["distance"]);
                    t.push(vec![distance_between(&lat.graph, s, cell_of(&spec, z)?)?]);
                    emit(&t, cli.format)
                }
                (None, true) => {
                    let dist = shortest_distances(&lat.graph, s)?.dist;
                    let mut t = Table::new(&["x", "y", "distance"]);
                    for (i, d) in dist.iter().enumerate() {
                        let z = spec.center(i);
                        t.push(vec![z.re, z.im, *d]);
                    }
                    emit(&t, cli.format)
                }
                (None, false) => Err(LabError::Config("give --dst or --all".into())),
            }
        }
        Command::Ball {
            metric,
            center,
            r,
            filled,
            out,
        } => {
            let lat = metric.load()?;
            let c = cell_of(&lat.graph.spec, center)?;
            let ball = if filled {
                filled_metric_ball(&lat.graph, c, r)?
            } else {
                metric_ball(&lat.graph, c, r)?
            };
            if let Some(out) = out {
                save_cell_set(&out, &ball)?;
            }
            let mut t = Table::new(&["r", "cells", "mass"]);
            t.push(vec![
                r,
                ball.cell_count() as f64,
                measure_of(&lat.measure, &ball)?,
            ]);
            emit(&t, cli.format)
        }
        Command::Cover(args) => set_counts(&args, SetVerb::Cover, cli.format),
        Command::Pack(args) => set_counts(&args, SetVerb::Pack, cli.format),
        Command::Dimension(args) => set_counts(&args, SetVerb::Dimension, cli.format),
        Command::ContentRatio(args) => set_counts(&args, SetVerb::Content, cli.format),
        Command::LrSample {
            kappa_prime,
            a,
            t,
            dt,
            seed,
            out,
        } => {
            let p = sample_lr(kappa_prime, a, t, dt, seed)?;
            save_paths(&out, &p)?;
            let mut table = Table::new(&["steps", "l_end", "r_end"]);
            table.push(vec![p.steps() as f64, p.l[p.steps()], p.r[p.steps()]]);
            emit(&table, cli.format)
        }
        Command::MatedCrt { paths, eps, out } => {
            let graph = mated_crt_graph(&load_paths(&paths)?, eps)?;
            let mut w = csv::Writer::from_path(&out)?;
            w.write_record(["i", "j"])?;
            for (i, j) in &graph.edges {
                w.write_record([i.to_string(), j.to_string()])?;
            }
            w.flush()?;
            let mut t = Table::new(&["cells", "edges", "mean_degree"]);
            t.push(vec![
                graph.num_cells as f64,
                graph.edges.len() as f64,
                graph.mean_degree(),
            ]);
            emit(&t, cli.format)
        }
        Command::CrtBalls {
            paths,
            eps,
            radii,
            centers,
        } => {
            let graph = mated_crt_graph(&load_paths(&paths)?, eps)?;
            let radii = if radii.is_empty() {
                DEFAULT_CRT_RADII.to_vec()
            } else {
                radii
            };
            let list: Vec<usize> = (0..centers)
                .map(|i| (i + 1) * graph.num_cells / (centers + 1))
                .collect();
            let report = graph_ball_growth(&graph, &list, &radii)?;
            eprintln!(
                "growth exponent {:.4} ± {:.4}",
                report.fit.slope, report.fit.stderr
            );
            let mut t = Table::new(&["center", "radius", "size"]);
            for (c, sizes) in report.kept.iter().zip(&report.sizes) {
                for (r, n) in radii.iter().zip(sizes) {
                    t.push(vec![*c as f64, *r as f64, *n as f64]);
                }
            }
            emit(&t, cli.format)
        }
        Command::Run { overrides } => {
            let path = cli
                .config
                .ok_or_else(|| LabError::Config("run needs --config".into()))?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
            let mut overrides = overrides;
            if let Some(j) = cli.jobs {
                overrides.push(format!("parallelism={j}"));
            }
            let config = ExperimentConfig::parse(&text, &overrides)?;
            let record = run_experiment(&config, &cache)?;
            record.persist(&config.output_dir)?;
            emit_plot_data(&record, &config.output_dir)?;
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&record.aggregate)?),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(std::io::stdout());
                    w.write_record(["key", "value"])?;
                    for (k, v) in &record.aggregate {
                        w.write_record([k.as_str(), &v.to_string()])?;
                    }
                    w.flush()?;
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
