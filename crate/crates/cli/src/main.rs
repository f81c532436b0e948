//! `csl`: surface tensors, CSL rates and oracle cross-checks from the
//! command line.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 validation tolerance
//! exceeded, 3 resource cap hit.

mod commands;
mod config;
mod error;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use csl_core::oracle::RasterMethod;
use csl_core::units::{parse_quantity, Dimension};
use csl_core::{InertiaConvention, ShapeSpec};

use commands::CommandKind;
use config::{parse_length_vec, Format, RunConfig, SweepConfig, SweepVariable};
use error::CliError;
use report::Report;

#[derive(Parser, Debug)]
#[command(name = "csl", version, about = "Surface-tensor invariants and CSL decoherence rates of rigid bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Surface tensors, area, volume and mass properties.
    Tensors(Common),
    /// Dephasing matrix, angular coefficients and heating rates.
    Rates(Common),
    /// Surface formula against the gradient and k-space oracles.
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Largest accepted pairwise relative difference.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Tensors and rates over a range of one shape parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary.
        #[arg(long = "var", value_enum)]
        variable: Option<SweepVariable>,
        /// Comma-separated values, with units where the parameter has them.
        #[arg(long, conflicts_with_all = ["from", "to", "steps"])]
        values: Option<String>,
        #[arg(long, requires_all = ["to", "steps"])]
        from: Option<String>,
        #[arg(long, requires_all = ["from", "steps"])]
        to: Option<String>,
        #[arg(long, requires_all = ["from", "to"])]
        steps: Option<usize>,
    },
    /// Dephasing rate of a translational and/or angular superposition.
    Dephasing {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Superposition displacement `x,y,z`, e.g. `10nm,0,0`.
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        /// Superposition angle, e.g. `1e-3 rad` or `0.1 deg`.
        #[arg(long, allow_hyphen_values = true)]
        angle: Option<String>,
        /// Rotation axis `x,y,z` (default z).
        #[arg(long, allow_hyphen_values = true)]
        axis: Option<String>,
        /// Also evaluate the decoherence function on a voxel grid.
        #[arg(long)]
        oracle: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline JSON shape, e.g. '{"type":"sphere","radius":"1 um"}'.
    #[arg(long)]
    shape: Option<String>,
    /// STL or OBJ mesh file.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Length of one mesh file unit, e.g. `1 mm` (default 1 m).
    #[arg(long)]
    mesh_scale: Option<String>,
    /// Mass density, e.g. `2 g/cm^3`.
    #[arg(long)]
    density: Option<String>,
    /// Collapse rate λ, 1/s.
    #[arg(long)]
    lambda: Option<String>,
    /// Localization length σ, e.g. `100 nm`.
    #[arg(long)]
    sigma: Option<String>,
    /// Boundary quadrature resolution.
    #[arg(long)]
    resolution: Option<usize>,
    /// Inertia tensor used by the rotational heating rate.
    #[arg(long, value_enum)]
    inertia: Option<Inertia>,
    /// Reference point `x,y,z` of S_rot (default: centroid).
    #[arg(long, allow_hyphen_values = true)]
    origin: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Voxel spacing (default σ/2, at most σ/2).
    #[arg(long)]
    spacing: Option<String>,
    /// Clearance around the body (default 6σ).
    #[arg(long)]
    padding: Option<String>,
    /// Largest grid, in nodes.
    #[arg(long)]
    max_cells: Option<usize>,
    /// Sample lines per cell and axis of the convolved route.
    #[arg(long)]
    supersample: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<Method>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Inertia {
    Standard,
    SecondMoment,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Method {
    Auto,
    Exact,
    Convolved,
    NormalProfile,
}

impl Common {
    fn apply(&self, mut cfg: RunConfig) -> Result<RunConfig, CliError> {
        if let Some(text) = &self.shape {
            let spec: ShapeSpec = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("--shape: {e}")))?;
            cfg.shape = Some(spec);
            cfg.mesh = None;
        }
        if let Some(path) = &self.mesh {
            if self.shape.is_some() {
                return Err(CliError::Usage("--shape and --mesh are exclusive".into()));
            }
            cfg.mesh = Some(path.clone());
            cfg.shape = None;
        }
        if let Some(s) = &self.mesh_scale {
            cfg.mesh_scale = Some(parse_quantity(s, Dimension::Length)?);
        }
        if let Some(s) = &self.density {
            cfg.density = Some(parse_quantity(s, Dimension::Density)?);
        }
        if let Some(s) = &self.lambda {
            cfg.csl.lambda = parse_quantity(s, Dimension::Rate)?;
        }
        if let Some(s) = &self.sigma {
            cfg.csl.sigma = parse_quantity(s, Dimension::Length)?;
        }
        if let Some(r) = self.resolution {
            cfg.resolution = Some(r);
        }
        if let Some(i) = self.inertia {
            cfg.inertia = match i {
                Inertia::Standard => InertiaConvention::Standard,
                Inertia::SecondMoment => InertiaConvention::SecondMoment,
            };
        }
        if let Some(s) = &self.origin {
            cfg.origin = Some(parse_length_vec(s)?);
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        Ok(cfg)
    }
}

impl GridArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(s) = &self.spacing {
            cfg.grid.spacing = Some(parse_quantity(s, Dimension::Length)?);
        }
        if let Some(s) = &self.padding {
            cfg.grid.padding = Some(parse_quantity(s, Dimension::Length)?);
        }
        if let Some(n) = self.max_cells {
            cfg.grid.max_cells = Some(n);
        }
        if let Some(n) = self.supersample {
            cfg.grid.supersample = Some(n);
        }
        if let Some(m) = self.method {
            cfg.grid.method = Some(match m {
                Method::Auto => RasterMethod::Auto,
                Method::Exact => RasterMethod::Exact,
                Method::Convolved => RasterMethod::Convolved,
                Method::NormalProfile => RasterMethod::NormalProfile,
            });
        }
        Ok(())
    }
}

/// Builds the resolved configuration and the output path for a command.
fn configure(command: &Command) -> Result<(CommandKind, RunConfig, Option<PathBuf>), CliError> {
    let common = match command {
        Command::Tensors(c) | Command::Rates(c) => c,
        Command::Validate { common, .. } | Command::Sweep { common, .. } | Command::Dephasing { common, .. } => common,
    };
    let base = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = common.apply(base)?;
    let kind = match command {
        Command::Tensors(_) => CommandKind::Tensors,
        Command::Rates(_) => CommandKind::Rates,
        Command::Validate { grid, tolerance, .. } => {
            grid.apply(&mut cfg)?;
            if tolerance.is_some() {
                cfg.tolerance = *tolerance;
            }
            CommandKind::Validate
        }
        Command::Sweep {
            variable,
            values,
            from,
            to,
            steps,
            ..
        } => {
            let var = variable.or(cfg.sweep.as_ref().map(|s| s.variable));
            match (var, values, from, to, steps) {
                (Some(v), Some(list), ..) => {
                    let values = list.split(',').map(|t| v.parse_value(t)).collect::<Result<_, _>>()?;
                    cfg.sweep = Some(SweepConfig { variable: v, values });
                }
                (Some(v), None, Some(a), Some(b), Some(n)) => {
                    cfg.sweep = Some(SweepConfig::range(v, v.parse_value(a)?, v.parse_value(b)?, *n)?);
                }
                (Some(v), None, None, None, None) => match &mut cfg.sweep {
                    Some(s) if s.variable == v => {}
                    _ => return Err(CliError::Usage("--var needs --values or --from/--to/--steps".into())),
                },
                (None, ..) => return Err(CliError::Usage("sweep needs --var or a sweep section in the config".into())),
                _ => unreachable!("clap enforces the range flags together"),
            }
            CommandKind::Sweep
        }
        Command::Dephasing {
            grid,
            delta,
            angle,
            axis,
            oracle,
            ..
        } => {
            grid.apply(&mut cfg)?;
            if let Some(d) = delta {
                cfg.delta = Some(parse_length_vec(d)?);
            }
            if let Some(a) = angle {
                cfg.angle = Some(parse_quantity(a, Dimension::Angle)?);
            }
            if let Some(a) = axis {
                let v: Vec<f64> = a
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| CliError::Usage(format!("--axis: cannot parse {a:?}")))?;
                if v.len() != 3 {
                    return Err(CliError::Usage("--axis needs three components".into()));
                }
                cfg.axis = Some(csl_core::Vec3::new(v[0], v[1], v[2]));
            }
            cfg.oracle |= oracle;
            CommandKind::Dephasing
        }
    };
    Ok((kind, cfg.resolve(kind.needs_density())?, common.out.clone()))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (kind, cfg, out) = configure(&cli.command)?;
    let outcome = commands::run(kind, &cfg)?;
    let format = cfg.format;
    let report = Report::new(cfg, outcome.output);
    match &out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            report.write(format, &mut w)?;
            w.flush().map_err(|e| CliError::io(path, e))?;
        }
        None => report.write(format, io::stdout().lock())?,
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
