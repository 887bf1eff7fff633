use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nk_elb::analytics::Scenario;
use nk_elb::datasets::{decomposition_figure, figure1, DEFAULT_L_RANGE, FIG1_G1};
use nk_elb::model::{derive_composites, load_config, steady_state, ParamSet};
use nk_elb::output::{decomposition_csv, figure1_csv, irf_csv, reports_csv, solution_csv};
use nk_elb::solver::{calibrate_xi_at, solve_elb, ExitMode};
use nk_elb::{irf, multiplier_report, selftest, sweep_l, Error, Params};

const DEFAULT_HORIZON: usize = 60;
const DEFAULT_G1: f64 = 0.01;

#[derive(Parser, Debug)]
#[command(
    name = "nk-elb",
    version,
    about = "New Keynesian public-investment model at the lower bound"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Parameter file (key=value lines). Defaults to the built-in baseline.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Perfect-foresight countdown length.
    #[arg(long = "L", global = true)]
    l: Option<usize>,

    #[arg(long = "L-min", global = true)]
    l_min: Option<usize>,

    #[arg(long = "L-max", global = true)]
    l_max: Option<usize>,

    /// stochastic | deterministic
    #[arg(long, global = true)]
    exit: Option<ExitMode>,

    /// normal | short-trap | long-trap | finite-L
    #[arg(long, global = true)]
    scenario: Option<Scenario>,

    /// Government investment impulse.
    #[arg(long, global = true)]
    g1: Option<f64>,

    /// Demand shock; overrides the calibrated value.
    #[arg(long, global = true)]
    xi1: Option<f64>,

    #[arg(long, global = true)]
    horizon: Option<usize>,

    /// Output file, or directory for `figure`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write the per-state solution table (irf only).
    #[arg(long, global = true)]
    states: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the steady state and check its identities.
    Steady,
    /// Expected paths after the shocks.
    Irf,
    /// Impact multipliers, thresholds and diagnostics for one scenario.
    Multiplier,
    /// Finite-L multiplier reports over a range of L.
    Sweep,
    /// Dataset for one of the five standard figures.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        which: u8,
    },
    /// Run the oracle suites and print a JSON summary.
    Selftest,
}

enum Failure {
    Config(String),
    Solver(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() || matches!(e, Error::Io(_)) {
            Failure::Config(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

fn load_params(cli: &Cli) -> Result<Params, Failure> {
    match &cli.config {
        Some(path) => load_config(path).map_err(|e| match e {
            Error::Io(io) => Failure::Config(format!("cannot read {}: {io}", path.display())),
            other => other.into(),
        }),
        None => Ok(derive_composites(&ParamSet::baseline())?),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Config(format!("cannot write stdout: {e}"))),
    }
}

fn l_range(cli: &Cli) -> Result<std::ops::RangeInclusive<usize>, Failure> {
    let lo = cli.l_min.unwrap_or(*DEFAULT_L_RANGE.start());
    let hi = cli.l_max.unwrap_or(*DEFAULT_L_RANGE.end());
    if hi < lo {
        return Err(Failure::Config(format!(
            "--L-max ({hi}) must be >= --L-min ({lo})"
        )));
    }
    Ok(lo..=hi)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let params = load_params(cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Steady => {
            let ss = steady_state(&params)?;
            let mut s = format!("# {}\n", params.provenance());
            for (k, v) in [
                ("N", ss.n),
                ("C", ss.c),
                ("Y", ss.y),
                ("K", ss.k),
                ("G", ss.g),
                ("R", ss.r),
                ("W", ss.w),
                ("K_over_Y", ss.k_over_y),
                ("chi", params.chi),
            ] {
                s.push_str(&format!("{k}={v}\n"));
            }
            for (name, err) in ss.identity_errors(&params) {
                let verdict = if err <= 1e-12 { "ok" } else { "FAIL" };
                s.push_str(&format!("check {name}: rel_err={err:e} {verdict}\n"));
            }
            emit(out, s.as_bytes())
        }
        Command::Irf => {
            let scenario = cli.scenario.unwrap_or(if cli.l.is_some() {
                Scenario::FiniteL
            } else {
                Scenario::Normal
            });
            let g1 = cli.g1.unwrap_or(DEFAULT_G1);
            let (l, exit) = match scenario {
                Scenario::Normal => (0, ExitMode::Deterministic),
                Scenario::ShortTrap => (0, ExitMode::Stochastic),
                Scenario::FiniteL => (cli.l.unwrap_or(0), cli.exit.unwrap_or(ExitMode::Stochastic)),
                Scenario::LongTrap => {
                    return Err(Failure::Config(
                        "irf: long-trap is a limit without a finite path; use --scenario finite-L with a large --L".into(),
                    ))
                }
            };
            let xi1 = match cli.xi1 {
                Some(x) => x,
                None => calibrate_xi_at(&params, l, exit, g1)?,
            };
            let sol = solve_elb(&params, l, g1, xi1, exit)?;
            let path = irf(&sol, cli.horizon.unwrap_or(DEFAULT_HORIZON));
            let extra = format!(
                "scenario={} L={l} exit={} g1={g1} xi1={xi1}",
                scenario.name(),
                exit.name()
            );
            let bytes = irf_csv(&params, &path, &extra)?;
            if let Some(states) = &cli.states {
                emit(Some(states), &solution_csv(&sol)?)?;
            }
            emit(out, &bytes)
        }
        Command::Multiplier => {
            let scenario = cli.scenario.unwrap_or(Scenario::Normal);
            let report = multiplier_report(
                &params,
                scenario,
                cli.l.unwrap_or(0),
                cli.exit.unwrap_or(ExitMode::Stochastic),
            )?;
            emit(out, &reports_csv(&params, &[report])?)
        }
        Command::Sweep => {
            let reports = sweep_l(
                &params,
                l_range(cli)?,
                cli.exit.unwrap_or(ExitMode::Stochastic),
            )?;
            emit(out, &reports_csv(&params, &reports)?)
        }
        Command::Figure { which } => {
            let bytes = if *which == 1 {
                figure1_csv(&figure1(&params, cli.g1.unwrap_or(FIG1_G1))?)?
            } else {
                decomposition_csv(&decomposition_figure(&params.raw(), *which, l_range(cli)?)?)?
            };
            let target = out.map(|p| {
                if p.is_dir() {
                    p.join(format!("fig{which}.csv"))
                } else {
                    p.to_path_buf()
                }
            });
            emit(target.as_deref(), &bytes)
        }
        Command::Selftest => {
            let report = selftest::run(&params, cli.seed)?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Failure::Solver(format!("cannot serialize report: {e}")))?;
            emit(out, format!("{json}\n").as_bytes())?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Checks) => {
            eprintln!("selftest: one or more suites failed");
            ExitCode::from(1)
        }
    }
}
