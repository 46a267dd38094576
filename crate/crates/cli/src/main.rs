//! `dfrc` command-line tool.
//!
//! Exit codes: 0 success, 1 validation failure, 2 config or usage error,
//! 3 runtime error.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use dfrc::driver::{run_convergence_experiment, run_power_sweep, ExperimentResult};
use dfrc::report::{emit_results, RunInfo};
use dfrc::validate::{gradient_suite, solver_suite, Fault, Suite};
use dfrc::{parse_config, parse_config_str, print_config, RunConfig};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "dfrc",
    version,
    about = "Joint radar precoder and IRS phase design experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (`key = value` lines). Defaults to the `table1` preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV files and manifest.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override a config key, e.g. `--set alpha=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[arg(long, hide = true, global = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Convergence traces for every alpha in `alphas`.
    Converge,
    /// Converged weighted SNR versus power budget, radar size and IRS size.
    Sweep,
    /// Finite-difference check of the phase gradient.
    ValidateGradient {
        /// Number of random instances.
        #[arg(long, default_value_t = 50)]
        instances: usize,
    },
    /// Covariance solver against sampling and closed-form bounds.
    ValidateSolver {
        /// Random feasible samples per instance.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Print the resolved configuration in canonical form.
    PrintConfig,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Converge => "converge",
            Command::Sweep => "sweep",
            Command::ValidateGradient { .. } => "validate-gradient",
            Command::ValidateSolver { .. } => "validate-solver",
            Command::PrintConfig => "print-config",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FaultArg {
    FlippedConjugate,
}

fn load_config(cli: &Cli) -> Result<RunConfig, String> {
    let parsed = match &cli.config {
        Some(path) => parse_config(path, &cli.overrides),
        None => parse_config_str("preset = table1\n", &cli.overrides),
    };
    parsed.map_err(|e| match &cli.config {
        Some(path) => format!("{}: {e}", path.display()),
        None => e.to_string(),
    })
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("DFRC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("DFRC_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn print_suite(suite: &Suite) -> ExitCode {
    print!("{suite}");
    match suite.first_failure() {
        None => {
            println!(
                "{} suite: all {} checks passed",
                suite.name,
                suite.checks.len()
            );
            ExitCode::SUCCESS
        }
        Some(check) => {
            println!("{} suite: FAILED at `{}`", suite.name, check.name);
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn run_experiment(cli: &Cli, cfg: &RunConfig, out: &Path) -> Result<(), String> {
    let started_unix_secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let clock = Instant::now();
    let plan = &cfg.plan;
    let result: ExperimentResult = match cli.command {
        Command::Converge => run_convergence_experiment(cfg, plan.num_realizations),
        Command::Sweep => run_power_sweep(
            cfg,
            &plan.sweep_p0,
            &plan.sweep_radar_antennas,
            &plan.sweep_irs,
            plan.num_realizations,
        ),
        _ => unreachable!("not an experiment command"),
    }
    .map_err(|e| e.to_string())?;
    let info = RunInfo {
        command: cli.command.name().to_string(),
        git_describe: env!("DFRC_GIT_DESCRIBE").to_string(),
        started_unix_secs,
        wall_clock_secs: clock.elapsed().as_secs_f64(),
    };
    let written = emit_results(Some(&result), cfg, &info, out).map_err(|e| e.to_string())?;
    for curve in &result.curves {
        let last = curve.points.last();
        eprintln!(
            "{:<12} rows {:>4}  last mean {:.6e}  std {:.3e}",
            curve.name,
            curve.points.len(),
            last.map_or(f64::NAN, |p| p.mean),
            last.map_or(f64::NAN, |p| p.std),
        );
    }
    eprintln!(
        "wrote {} files to {} in {:.1} s",
        written.len(),
        out.display(),
        info.wall_clock_secs
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("config error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let seed = cfg.seed.0;
    match cli.command {
        Command::PrintConfig => {
            print!("{}", print_config(&cfg));
            ExitCode::SUCCESS
        }
        Command::ValidateGradient { instances } => {
            let fault = cli
                .inject_fault
                .map(|FaultArg::FlippedConjugate| Fault::FlippedConjugate);
            match gradient_suite(instances, seed, fault) {
                Ok(suite) => print_suite(&suite),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
        Command::ValidateSolver { samples } => match solver_suite(samples, seed) {
            Ok(suite) => print_suite(&suite),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_RUNTIME)
            }
        },
        Command::Converge | Command::Sweep => {
            let Some(out) = cli.out.clone() else {
                eprintln!("config error: `{}` needs --out <dir>", cli.command.name());
                return ExitCode::from(EXIT_CONFIG);
            };
            match run_experiment(&cli, &cfg, &out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
    }
}
