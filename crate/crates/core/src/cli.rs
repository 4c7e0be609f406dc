//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 numerical
//! failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};
use crate::design::switching_table;
use crate::detection::{power_sweep, routing_at, sweep_experiment};
use crate::io::{write_power_sweep, write_sweep_curve, write_switching_table, CsvError};
use crate::spectral::{analytic_sweep, fit_fringe, FringeParams};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_INPUT: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "spfl", version, about = "Photon-pair routing in a dispersive fiber loop")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coincidence rates of both branches over a detuning grid.
    Sweep(SweepArgs),
    /// Fit the two-branch fringe to a sweep CSV.
    Fit(FitArgs),
    /// Switching detunings for each fringe order.
    Design(DesignArgs),
    /// Simulated coincidence rates over pump powers.
    Power(PowerArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["analytic", "montecarlo"])))]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Passband-averaged fringe model.
    #[arg(long)]
    analytic: bool,
    /// Simulated counting experiment.
    #[arg(long)]
    montecarlo: bool,
    /// start:stop:step in nm, stop inclusive. Defaults to the config grid.
    #[arg(long)]
    grid: Option<String>,
    /// Output CSV; defaults to the config output path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_gates: Option<u64>,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Sweep CSV.
    #[arg(long)]
    data: PathBuf,
    /// Starting point xi_same,xi_diff,alpha (1/s, 1/s, ps²).
    #[arg(long, allow_hyphen_values = true)]
    init: String,
    /// Pump center wavelength, nm.
    #[arg(long, default_value_t = 1547.5)]
    lambda_p0: f64,
    /// JSON report; defaults to the data path with `.fit.json` appended.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DesignArgs {
    #[arg(long)]
    config: PathBuf,
    /// Highest fringe order.
    #[arg(long, allow_negative_numbers = true)]
    n_max: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PowerArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated pump powers, mW, ascending.
    #[arg(long)]
    powers: String,
    /// Detuning, nm. Defaults to the config value.
    #[arg(long)]
    delta_lambda: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_gates: Option<u64>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID_INPUT,
            message: message.into(),
        }
    }

    fn io(path: &Path, err: io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_)
            | Error::InvalidState(_)
            | Error::InvalidConfig(_)
            | Error::NoSwitching(_) => EXIT_INVALID_INPUT,
            Error::NoSolution(_)
            | Error::RootNotBracketed { .. }
            | Error::FitDegenerate(_)
            | Error::MaxIterations { .. } => EXIT_NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Io { .. } => EXIT_IO,
            ConfigError::Parse(_) | ConfigError::Invalid(_) => EXIT_INVALID_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CsvError> for Failure {
    fn from(e: CsvError) -> Self {
        let code = match e {
            CsvError::Io { .. } => EXIT_IO,
            CsvError::Parse { .. } => EXIT_INVALID_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `start:stop:step` into an inclusive grid. Values are rounded to
/// 1e-9 nm so `4:20:0.2` yields `4.2`, not `4.200000000000001`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("grid {spec:?}: expected start:stop:step"));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("grid {spec:?}: {s:?} is not a finite number"))
    };
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if step <= 0.0 {
        return Err(format!("grid {spec:?}: step must be > 0"));
    }
    if stop < start {
        return Err(format!("grid {spec:?} is empty"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as u64 + 1;
    Ok((0..n)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

fn parse_list(spec: &str, what: &str) -> Result<Vec<f64>, Failure> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::invalid(format!("{what}: {s:?} is not a finite number")))
        })
        .collect()
}

/// Writes to `path`, or to `stdout` when there is none.
fn emit(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure::io(p, e))?;
            let mut w = BufWriter::new(file);
            body(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Failure::io(p, e))
        }
        None => body(stdout).map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

fn out_path<'a>(cli: &'a Option<PathBuf>, cfg: &'a RunConfig) -> Option<&'a Path> {
    cli.as_deref()
        .or(cfg.run.output_path.as_deref().map(Path::new))
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let cfg = RunConfig::load(&args.config)?;
    let grid = match &args.grid {
        Some(g) => parse_grid(g),
        None => parse_grid(&format!(
            "{}:{}:{}",
            cfg.run.grid_start_nm, cfg.run.grid_stop_nm, cfg.run.grid_step_nm
        )),
    }
    .map_err(Failure::invalid)?;
    let spectral = cfg.spectral_config()?;
    let curve = if args.analytic {
        analytic_sweep(&spectral, &grid, true)?
    } else {
        sweep_experiment(
            &spectral,
            &cfg.source_spec()?,
            &cfg.detectors()?,
            &grid,
            args.n_gates.unwrap_or(cfg.run.n_gates),
            args.seed.unwrap_or(cfg.run.seed),
            cfg.run.averaged_routing,
        )?
    };
    emit(out_path(&args.out, &cfg), stdout, |w| write_sweep_curve(w, &curve))
}

#[derive(Serialize)]
struct FitReport<'a> {
    data: &'a str,
    points: usize,
    lambda_p0_nm: f64,
    xi_same_per_s: f64,
    xi_diff_per_s: f64,
    alpha_ps2: f64,
    residual: f64,
    iterations: usize,
}

fn cmd_fit(args: &FitArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let init = parse_list(&args.init, "--init")?;
    let [xi_same, xi_diff, alpha] = init[..] else {
        return Err(Failure::invalid(format!(
            "--init expects xi_same,xi_diff,alpha, got {} values",
            init.len()
        )));
    };
    let points = crate::io::read_sweep_file(&args.data)?;
    let fit = fit_fringe(
        &points,
        args.lambda_p0,
        FringeParams {
            xi_same,
            xi_diff,
            alpha,
        },
    )?;
    let p = fit.params;
    let report_path = args.report.clone().unwrap_or_else(|| {
        let mut s = args.data.clone().into_os_string();
        s.push(".fit.json");
        PathBuf::from(s)
    });
    let data = args.data.display().to_string();
    let report = FitReport {
        data: &data,
        points: points.len(),
        lambda_p0_nm: args.lambda_p0,
        xi_same_per_s: p.xi_same,
        xi_diff_per_s: p.xi_diff,
        alpha_ps2: p.alpha,
        residual: fit.residual,
        iterations: fit.iterations,
    };
    emit(Some(&report_path), stdout, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)
    })?;
    let text = format!(
        "xi_same_per_s = {}\nxi_diff_per_s = {}\nalpha_ps2 = {}\nresidual = {}\niterations = {}\n",
        p.xi_same, p.xi_diff, p.alpha, fit.residual, fit.iterations
    );
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Failure::io(Path::new("<stdout>"), e))
}

fn cmd_design(args: &DesignArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let n_max = u32::try_from(args.n_max)
        .map_err(|_| Failure::invalid(format!("--n-max must be >= 0, got {}", args.n_max)))?;
    let cfg = RunConfig::load(&args.config)?;
    let lp = cfg.loop_config()?;
    let (l1, l2) = (lp.smf1.length, lp.smf2.length);
    // pigtails with different beta2 are represented by the beta2 giving the
    // same total imbalance
    let beta2 = if l1 != l2 {
        lp.effective_alpha() / (l2 - l1)
    } else {
        lp.smf1.beta2
    };
    let table = switching_table(beta2, l1, l2, cfg.spectral.lambda_p0_nm, n_max)?;
    emit(args.out.as_deref(), stdout, |w| write_switching_table(w, &table))
}

fn cmd_power(args: &PowerArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let powers = parse_list(&args.powers, "--powers")?;
    let cfg = RunConfig::load(&args.config)?;
    let spectral = cfg.spectral_config()?;
    let source = cfg.source_spec()?;
    let dl = args.delta_lambda.unwrap_or(cfg.run.delta_lambda_nm);
    let routing = routing_at(&spectral, dl, cfg.run.averaged_routing)?;
    let points = power_sweep(
        &source,
        &cfg.detectors()?,
        &routing,
        &powers,
        args.n_gates.unwrap_or(cfg.run.n_gates),
        args.seed.unwrap_or(cfg.run.seed),
    )?;
    emit(args.out.as_deref(), stdout, |w| {
        write_power_sweep(w, &points, source.gate_rate_hz)
    })
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_INVALID_INPUT
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Fit(a) => cmd_fit(a, stdout),
        Command::Design(a) => cmd_design(a, stdout),
        Command::Power(a) => cmd_power(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("4:20:0.2").unwrap();
        assert_eq!(g.len(), 81);
        assert_eq!(g[1], 4.2);
        assert_eq!(*g.last().unwrap(), 20.0);
        assert_eq!(parse_grid("5:5:1").unwrap(), vec![5.0]);
        assert!(parse_grid("20:4:0.2").is_err());
        assert!(parse_grid("4:20:0").is_err());
        assert!(parse_grid("4:20").is_err());
        assert!(parse_grid("a:20:1").is_err());
    }

    #[test]
    fn error_codes_are_disjoint() {
        let cases = [
            (Error::InvalidArgument(String::new()), EXIT_INVALID_INPUT),
            (Error::NoSwitching(String::new()), EXIT_INVALID_INPUT),
            (Error::FitDegenerate(String::new()), EXIT_NUMERICAL),
            (Error::RootNotBracketed { lo: 0.0, hi: 1.0 }, EXIT_NUMERICAL),
        ];
        for (e, code) in cases {
            assert_eq!(Failure::from(e).code, code);
        }
    }

    #[test]
    fn help_and_usage_errors() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["spfl", "--help"], &mut out, &mut err), EXIT_OK);
        assert!(String::from_utf8_lossy(&out).contains("sweep"));
        assert_eq!(run(["spfl", "bogus"], &mut out, &mut err), EXIT_INVALID_INPUT);
        assert_eq!(
            run(["spfl", "sweep", "--config", "x.toml"], &mut out, &mut err),
            EXIT_INVALID_INPUT
        );
    }
}
