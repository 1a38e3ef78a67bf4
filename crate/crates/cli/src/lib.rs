//! `idplim` command line: projections, limiter solves, dataset generation,
//! convergence studies and benchmark runs. Every run writes `report.json`
//! into its output directory.

mod commands;
mod error;
mod selftest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use idplim_core::limiters::{LimiterOptions, Norm};
use idplim_gasdyn::SimConfig;
use serde::Serialize;
use serde_json::{json, Value};

pub use error::{CliError, Result, EXIT_CONFIG, EXIT_FAILURE, EXIT_INFEASIBLE, EXIT_NOT_CONVERGED, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "idplim", version, about = "Invariant-domain-preserving cell average limiters")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CommonArgs {
    /// Output directory; nothing is written outside it.
    #[arg(long, global = true, default_value = "idplim-out")]
    pub out: PathBuf,

    /// Worker threads (default: all hardware threads).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Format of the summary printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Limiter and solver flags, mirroring `LimiterOptions` and `SolverConfig`.
#[derive(Clone, Debug, Default, Args, Serialize)]
pub struct SolverArgs {
    /// DRS/DYS step size.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Relaxation parameter in (0, 2).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Fidelity weight of the l2 model.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub norm: Option<Norm>,
    /// Floor of the admissible set.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Limit only near inadmissible cells (`--restrict-region` or `--restrict-region false`).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub restrict_region: Option<bool>,
    #[arg(long)]
    pub region_threshold: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub inner_max_iter: Option<usize>,
}

impl SolverArgs {
    pub fn apply(&self, opts: &mut LimiterOptions) {
        let c = &mut opts.solver_cfg;
        if let Some(v) = self.gamma {
            c.gamma_step = v;
        }
        if let Some(v) = self.lambda {
            c.lambda_relax = v;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.max_iter {
            c.max_iter = v;
        }
        if let Some(v) = self.inner_max_iter {
            c.inner_max_iter = v;
        }
        if let Some(v) = self.alpha {
            opts.alpha = v;
        }
        if let Some(v) = self.norm {
            opts.norm = v;
        }
        if let Some(v) = self.epsilon {
            opts.epsilon = v;
        }
        if let Some(v) = self.restrict_region {
            opts.restrict_region = v;
        }
        if let Some(v) = self.region_threshold {
            opts.region_threshold = v;
        }
    }
}

/// Time-stepping flags shared by the 2D runs; applied after `--config`.
#[derive(Clone, Debug, Default, Args, Serialize)]
pub struct SimArgs {
    /// Flat `key = value` run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Cells per direction.
    #[arg(long)]
    pub mesh: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Fixed time step instead of the CFL rule.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub snapshots: Option<usize>,
    /// Run without the cell average limiter (Zhang-Shu scaling stays on).
    #[arg(long)]
    pub no_limiter: bool,
}

impl SimArgs {
    /// `preset`, then the config file, then the flags.
    pub fn resolve(&self, preset: SimConfig, solver: &SolverArgs) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(p) => preset.apply_file(p)?,
            None => preset,
        };
        if let Some(v) = self.mesh {
            cfg.mesh_n = v;
        }
        if let Some(v) = self.degree {
            cfg.degree = v;
        }
        if let Some(v) = self.cfl {
            cfg.cfl = v;
        }
        if let Some(v) = self.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.rng_seed = v;
        }
        if let Some(v) = self.snapshots {
            cfg.snapshots = v;
        }
        if self.no_limiter {
            cfg.limiter_enabled = false;
        }
        solver.apply(&mut cfg.limiter);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project one state (or every row of a field) onto the admissible set.
    Project {
        /// 1 or 2; inferred from the point when omitted.
        #[arg(long)]
        dim: Option<usize>,
        /// Comma-separated `rho,m..,E`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Option<Vec<f64>>,
        /// Cell average CSV (with its `.json` sidecar) to project row by row.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-13)]
        epsilon: f64,
    },
    /// Limit a cell average field onto the admissible set, conserving column sums.
    Limit {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Unlimited RK4 DG advection of the triangle/square profile.
    SynthAdvect {
        #[arg(long, default_value_t = 300)]
        mesh: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Number of steps; `--t-end` overrides it.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Conservatively perturbed Lax shock tube averages.
    SynthLax {
        #[arg(long, default_value_t = 400)]
        mesh: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 1e-13)]
        epsilon: f64,
    },
    /// Manufactured-solution convergence study; writes errors.csv.
    Convergence {
        #[arg(long, value_delimiter = ',', default_value = "25,50,100")]
        meshes: Vec<usize>,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Sedov blast wave.
    Sedov {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Mach 2000 jet.
    Jet {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Pick the step size with the fewest iterations over sample fields.
    TuneGamma {
        /// Sample fields; perturbed Lax data when omitted.
        #[arg(long = "in")]
        inputs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1e-10,1e-8,1e-6,1e-4,1e-2,1")]
        grid: Vec<f64>,
        /// Generated samples when no input is given.
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Fast property checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Project { .. } => "project",
            Command::Limit { .. } => "limit",
            Command::SynthAdvect { .. } => "synth-advect",
            Command::SynthLax { .. } => "synth-lax",
            Command::Convergence { .. } => "convergence",
            Command::Sedov { .. } => "sedov",
            Command::Jet { .. } => "jet",
            Command::TuneGamma { .. } => "tune-gamma",
            Command::Selftest { .. } => "selftest",
        }
    }
}

/// What a command leaves behind for `report.json`.
#[derive(Debug, Default)]
pub struct Report {
    /// Name of the built-in default set the parameters started from.
    pub defaults: String,
    pub parameters: Value,
    pub result: Value,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}

/// Parses `argv` and runs the command. Returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    run_cli(cli)
}

pub fn run_cli(cli: Cli) -> i32 {
    let out = cli.common.out.clone();
    if let Err(e) = fs::create_dir_all(&out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    let threads = configure_threads(cli.common.threads);
    let mut report = Report::default();
    let res = threads.and_then(|_| commands::execute(&cli.command, &out, &mut report));
    let (code, status, message) = match &res {
        Ok(()) => (EXIT_OK, "ok", None),
        Err(e) => (e.exit_code(), "error", Some(e.to_string())),
    };
    if let Some(m) = &message {
        eprintln!("error: {m}");
    } else if let Err(e) = print_summary(&report.result, cli.common.format) {
        eprintln!("error: {e}");
    }
    let doc = json!({
        "command": cli.command.name(),
        "status": status,
        "exit_code": code,
        "error": message,
        "version": env!("CARGO_PKG_VERSION"),
        "defaults": report.defaults,
        "common": cli.common,
        "threads": rayon::current_num_threads(),
        "parameters": report.parameters,
        "outputs": report.outputs,
        "result": report.result,
    });
    match write_report(&out.join("report.json"), &doc) {
        Ok(()) => code,
        Err(e) => {
            eprintln!("error: cannot write report.json: {e}");
            if code == EXIT_OK {
                EXIT_CONFIG
            } else {
                code
            }
        }
    }
}

fn configure_threads(n: Option<usize>) -> Result<()> {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    // The global pool can be set once per process; later calls keep it.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn write_report(path: &Path, doc: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// JSON prints the result object; CSV prints `key,value` lines for its
/// top-level entries (nested values as compact JSON).
fn print_summary(result: &Value, format: Format) -> Result<()> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(result)?),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["key", "value"])?;
            if let Value::Object(map) = result {
                for (k, v) in map {
                    let s = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    w.write_record([k.as_str(), s.as_str()])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}
