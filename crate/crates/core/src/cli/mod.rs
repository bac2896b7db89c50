//! Command-line front end of the `qmdisc` binary.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or configuration,
//! 3 optimizer did not converge, 4 numerical threshold breached or replay
//! mismatch.

pub mod commands;
pub mod format;

use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use crate::manifest::{sha256_hex, RunManifest};
use crate::oracle::{Method, OptimizeOptions};
use crate::Error;
use commands::*;

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn write_stdout(body: &str) -> std::io::Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(body.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NONCONVERGENCE: u8 = 3;
pub const EXIT_THRESHOLD: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "qmdisc", version, about = "Discrimination of two projective qubit measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Success-probability curves over a grid of inconclusive rates.
    Curves(CurvesArgs),
    /// Numerical convex-hull check of single-probe strategies.
    Hull(HullArgs),
    /// Analytic against finite-difference second derivatives.
    Convexity(ConvexityArgs),
    /// Numerical optimum over all sequential strategies.
    Oracle(OracleArgs),
    /// Monte-Carlo simulation of the optical experiment.
    Simulate(SimulateArgs),
    /// Re-run a manifest and compare output checksums.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write output here (and `<out>.manifest.json` next to it) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    /// `start:stop:step` or a single value.
    #[arg(long, default_value = "0:1:0.01")]
    pub pi_grid: String,
    /// Read `--theta` in degrees.
    #[arg(long)]
    pub degrees: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct HullArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ConvexityArgs {
    #[arg(long, default_value = "0.05:0.95:0.05")]
    pub c_grid: String,
    /// Overrides the default per-`c` grid.
    #[arg(long)]
    pub pi_grid: Option<String>,
    /// Convex-branch points of the default grid.
    #[arg(long, default_value_t = 30)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    /// Which second-derivative formula to evaluate.
    #[arg(long, value_enum, default_value_t = BranchChoice::Auto)]
    pub branch: BranchChoice,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long = "pi")]
    pub pi: f64,
    #[arg(long, default_value = "ascent")]
    pub method: Method,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = OptimizeOptions::default().restarts)]
    pub restarts: usize,
    #[arg(long, default_value_t = OptimizeOptions::default().grid_resolution)]
    pub grid_resolution: usize,
    /// Also optimize over the probe state.
    #[arg(long)]
    pub free_rho: bool,
    #[arg(long)]
    pub degrees: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Mode::Intermediate)]
    pub mode: Mode,
    /// Comma-separated angles; defaults to jπ/30, j = 1..7.
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
    /// Defaults to 1, 0.9, …, 0.1 (intermediate) or 0, 0.1, …, 1 (unambiguous).
    #[arg(long)]
    pub t_grid: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `ideal`, `preset_paperlike`, or a path to a TOML preset.
    #[arg(long, default_value = "ideal")]
    pub noise: String,
    /// Skip the σ_X correction on the second photon.
    #[arg(long)]
    pub no_feed_forward: bool,
    #[arg(long)]
    pub degrees: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write the replayed output here; defaults to a temporary buffer.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Turns parsed arguments into a canonical job plus its output settings.
pub fn build_job(cmd: Command) -> crate::Result<(Job, Option<PathBuf>)> {
    Ok(match cmd {
        Command::Curves(a) => {
            let job = Job::Curves(CurvesParams {
                theta: normalize_theta(a.theta, a.degrees)?,
                pi_grid: parse_grid(&a.pi_grid)?,
                format: a.common.format.unwrap_or(Format::Csv),
            });
            (job, a.common.out)
        }
        Command::Hull(a) => {
            let job = Job::Hull(HullParams {
                c: a.c,
                samples: a.samples,
                seed: a.seed,
                format: a.common.format.unwrap_or(Format::Csv),
            });
            (job, a.common.out)
        }
        Command::Convexity(a) => {
            let job = Job::Convexity(ConvexityParams {
                c_grid: parse_grid(&a.c_grid)?,
                pi_grid: a.pi_grid.as_deref().map(parse_grid).transpose()?,
                points: a.points,
                h: a.h,
                branch: a.branch,
                format: a.common.format.unwrap_or(Format::Csv),
            });
            (job, a.common.out)
        }
        Command::Oracle(a) => {
            let job = Job::Oracle(OracleParams {
                theta: normalize_theta(a.theta, a.degrees)?,
                pi: a.pi,
                method: a.method,
                tol: a.tol,
                seed: a.seed,
                restarts: a.restarts,
                grid_resolution: a.grid_resolution,
                free_rho: a.free_rho,
                format: a.common.format.unwrap_or(Format::Json),
            });
            (job, a.common.out)
        }
        Command::Simulate(a) => {
            let thetas = match (a.mode, a.theta.is_empty()) {
                (Mode::Unambiguous, _) => Vec::new(),
                (Mode::Intermediate, true) => crate::simulator::default_thetas(),
                (Mode::Intermediate, false) => {
                    a.theta.iter().map(|&t| normalize_theta(t, a.degrees)).collect::<crate::Result<_>>()?
                }
            };
            let transmittances = match (&a.t_grid, a.mode) {
                (Some(g), _) => parse_grid(g)?,
                (None, Mode::Intermediate) => crate::simulator::DEFAULT_TRANSMITTANCES.to_vec(),
                (None, Mode::Unambiguous) => crate::simulator::unambiguous_transmittances(),
            };
            if a.trials == 0 {
                return Err(Error::Domain("trials must be positive".into()));
            }
            let job = Job::Simulate(SimulateParams {
                mode: a.mode,
                thetas,
                transmittances,
                trials: a.trials,
                seed: a.seed,
                noise: resolve_noise(&a.noise)?,
                feed_forward: !a.no_feed_forward,
                format: a.common.format.unwrap_or(Format::Csv),
            });
            (job, a.common.out)
        }
        Command::Replay(_) => unreachable!("replay has no job of its own"),
    })
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INPUT,
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> crate::Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Runs a job, writes its output (and manifest if `out` is set) and returns
/// the exit code.
pub fn execute(job: &Job, out: Option<&Path>) -> u8 {
    let mut manifest = job.manifest();
    let output = match job.run(&manifest) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("qmdisc {}: {e}", job.name());
            return exit_code_for(&e);
        }
    };
    match out {
        Some(path) => {
            manifest.record_output(path, output.body.as_bytes());
            let written =
                write_file(path, output.body.as_bytes()).and_then(|_| manifest.write(&RunManifest::path_for(path)));
            if let Err(e) = written {
                eprintln!("qmdisc {}: {e}", job.name());
                return EXIT_IO;
            }
        }
        None => {
            if let Err(e) = write_stdout(&output.body) {
                eprintln!("qmdisc {}: {e}", job.name());
                return EXIT_IO;
            }
        }
    }
    match output.status {
        Status::Ok => EXIT_OK,
        Status::Breach(msg) => {
            eprintln!("qmdisc {}: threshold exceeded: {msg}", job.name());
            EXIT_THRESHOLD
        }
        Status::NonConvergence(msg) => {
            eprintln!("qmdisc {}: not converged: {msg}", job.name());
            EXIT_NONCONVERGENCE
        }
    }
}

/// Re-runs the job stored in a manifest and compares the output bytes with
/// the recorded checksum.
pub fn replay(manifest_path: &Path, out: Option<&Path>) -> u8 {
    let recorded = match RunManifest::load(manifest_path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("qmdisc replay: {e}");
            return exit_code_for(&e);
        }
    };
    let Some(expected) = recorded.outputs.first() else {
        eprintln!("qmdisc replay: manifest records no output");
        return EXIT_INPUT;
    };
    let job = match Job::from_manifest(&recorded) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("qmdisc replay: {e}");
            return exit_code_for(&e);
        }
    };
    let manifest = job.manifest();
    if manifest.manifest_checksum != recorded.manifest_checksum {
        eprintln!("qmdisc replay: manifest was written by version {}, this is {}", recorded.version, manifest.version);
        return EXIT_THRESHOLD;
    }
    let body = match job.run(&manifest) {
        Ok(o) => o.body,
        Err(e) => {
            eprintln!("qmdisc replay: {e}");
            return exit_code_for(&e);
        }
    };
    if let Some(path) = out {
        if let Err(e) = write_file(path, body.as_bytes()) {
            eprintln!("qmdisc replay: {e}");
            return EXIT_IO;
        }
    }
    let got = sha256_hex(body.as_bytes());
    if got == expected.sha256 {
        println!("replay ok: {} {}", recorded.command, got);
        EXIT_OK
    } else {
        eprintln!("qmdisc replay: output checksum {got} differs from recorded {}", expected.sha256);
        EXIT_THRESHOLD
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::Replay(a) => replay(&a.manifest, a.out.as_deref()),
        cmd => match build_job(cmd) {
            Ok((job, out)) => execute(&job, out.as_deref()),
            Err(e) => {
                eprintln!("qmdisc: {e}");
                exit_code_for(&e)
            }
        },
    };
    ExitCode::from(code)
}
