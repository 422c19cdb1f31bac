use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use globalcoin::harness::{self, aggregate, emit_csv, emit_svg, write_csv, CsvRow, Series};
use globalcoin::{
    AdversaryKind, Direction, Error, EtaSetting, HiddenPolicy, SimConfig, SolverBackend,
    SolverConfig,
};

#[derive(Parser)]
#[command(name = "globalcoin", version, about = "Global-coin MWU simulations against corrupting adversaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials of one configuration and write one row per trial.
    Run(Common),
    /// Mean rounds across a list of expert counts.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Expert counts to sweep; defaults to `--n` alone.
        #[arg(long, value_delimiter = ',')]
        ns: Vec<usize>,
    },
    /// Per-round mean corrupted and good weight under the non-adaptive adversary.
    Trajectory(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    None,
    Nonadaptive,
    Adaptive,
}

#[derive(Clone, Copy, ValueEnum)]
enum HiddenArg {
    Uniform,
    Plus,
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Auto,
    Bruteforce,
    Dp,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    tau_frac: f64,
    /// Absolute number of corrupted experts, overriding `--tau-frac`.
    #[arg(long)]
    tau: Option<usize>,
    /// Learning rate, or `auto` for sqrt(log(n) / n).
    #[arg(long, default_value = "auto", value_parser = parse_eta)]
    eta: EtaArg,
    /// Logarithm base used by `--eta auto`.
    #[arg(long, default_value_t = std::f64::consts::E)]
    eta_log_base: f64,
    #[arg(long, value_enum, default_value_t = AdversaryArg::None)]
    adversary: AdversaryArg,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = globalcoin::MwuParams::DEFAULT_MAX_ROUNDS)]
    max_rounds: usize,
    #[arg(long, value_enum, default_value_t = HiddenArg::Uniform)]
    hidden: HiddenArg,
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    solver: SolverArg,
    /// Grid resolution of the DP solver; chosen per instance when absent.
    #[arg(long)]
    dp_resolution: Option<f64>,
    /// Oracle calls the adaptive adversary may spend per round.
    #[arg(long, default_value_t = globalcoin::AdversaryPolicy::DEFAULT_ENUM_BUDGET)]
    enum_budget: u64,
    /// Permit adaptive runs above the default expert cap.
    #[arg(long)]
    allow_large_adaptive: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional SVG plot destination.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy)]
enum EtaArg {
    Auto,
    Value(f64),
}

fn parse_eta(s: &str) -> Result<EtaArg, String> {
    if s == "auto" {
        return Ok(EtaArg::Auto);
    }
    s.parse::<f64>()
        .map(EtaArg::Value)
        .map_err(|_| format!("expected `auto` or a number, got {s:?}"))
}

impl Common {
    fn config(&self, n: usize) -> SimConfig {
        SimConfig {
            n,
            tau_fraction: self.tau_frac,
            tau: self.tau,
            eta: match self.eta {
                EtaArg::Value(eta) => EtaSetting::Fixed(eta),
                EtaArg::Auto => EtaSetting::Auto {
                    log_base: self.eta_log_base,
                },
            },
            adversary: match self.adversary {
                AdversaryArg::None => AdversaryKind::None,
                AdversaryArg::Nonadaptive => AdversaryKind::NonAdaptive,
                AdversaryArg::Adaptive => AdversaryKind::Adaptive,
            },
            trials: self.trials,
            seed: self.seed,
            max_rounds: self.max_rounds,
            hidden: match self.hidden {
                HiddenArg::Uniform => HiddenPolicy::Uniform,
                HiddenArg::Plus => HiddenPolicy::Fixed(Direction::Plus),
                HiddenArg::Minus => HiddenPolicy::Fixed(Direction::Minus),
            },
            solver: SolverConfig {
                backend: match self.solver {
                    SolverArg::Auto => SolverBackend::Auto,
                    SolverArg::Bruteforce => SolverBackend::BruteForce,
                    SolverArg::Dp => SolverBackend::Dp,
                },
                resolution: self.dp_resolution,
                ..SolverConfig::default()
            },
            enum_budget: self.enum_budget,
            allow_large_adaptive: self.allow_large_adaptive,
        }
    }

    fn write<T: CsvRow>(&self, rows: &[T]) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => emit_csv(rows, path).with_context(|| format!("writing {}", path.display())),
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                write_csv(rows, &mut lock)?;
                lock.flush()?;
                Ok(())
            }
        }
    }

    fn plot(&self, series: &[Series], x: &str, y: &str) -> anyhow::Result<()> {
        if let Some(path) = &self.svg {
            emit_svg(series, path, x, y).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// Whether the run finished cleanly or some trial ran out of search budget.
enum Status {
    Clean,
    BudgetExceeded,
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Command::Run(common) => {
            let config = common.config(common.n);
            let outcomes = harness::run_trials(&config)?;
            let row = aggregate(&config, &outcomes);
            let records: Vec<_> = outcomes.into_iter().filter_map(|o| o.ok()).collect();
            for (t, e) in &row.errors {
                eprintln!("trial {t} errored: {e}");
            }
            common.write(&records)?;
            let points = records
                .iter()
                .map(|r| (r.trial_id as f64, r.rounds as f64))
                .collect();
            if !records.is_empty() {
                common.plot(&[Series::new(config.adversary.name(), points)], "trial", "rounds")?;
            }
            eprintln!(
                "n={} tau={} adversary={} mean_rounds={} std_rounds={} errored={}",
                row.n,
                row.tau,
                row.adversary.name(),
                harness::format_float(row.mean_rounds),
                harness::format_float(row.std_rounds),
                row.errored_trials
            );
            Ok(status(row.budget_exceeded))
        }
        Command::Sweep { common, ns } => {
            let ns = if ns.is_empty() { vec![common.n] } else { ns };
            let configs: Vec<SimConfig> = ns.iter().map(|&n| common.config(n)).collect();
            for c in &configs {
                c.validate()?;
            }
            let rows = harness::run_sweep(&configs)?;
            for row in &rows {
                for (t, e) in &row.errors {
                    eprintln!("n={} trial {t} errored: {e}", row.n);
                }
            }
            common.write(&rows)?;
            let points: Vec<_> = rows
                .iter()
                .filter(|r| r.mean_rounds.is_finite())
                .map(|r| (r.n as f64, r.mean_rounds))
                .collect();
            if !points.is_empty() {
                common.plot(
                    &[Series::new(configs[0].adversary.name(), points)],
                    "experts (n)",
                    "mean rounds",
                )?;
            }
            Ok(status(rows.iter().any(|r| r.budget_exceeded)))
        }
        Command::Trajectory(common) => {
            let config = common.config(common.n);
            let rows = harness::run_trajectory(&config)?;
            common.write(&rows)?;
            let corrupted = rows
                .iter()
                .map(|r| (r.round as f64, r.mean_corrupted_weight))
                .collect();
            let good = rows
                .iter()
                .map(|r| (r.round as f64, r.mean_good_weight))
                .collect();
            if !rows.is_empty() {
                common.plot(
                    &[
                        Series::new("corrupted weight", corrupted),
                        Series::new("good weight", good),
                    ],
                    "round",
                    "mean total weight",
                )?;
            }
            Ok(Status::Clean)
        }
    }
}

fn status(budget_exceeded: bool) -> Status {
    if budget_exceeded {
        Status::BudgetExceeded
    } else {
        Status::Clean
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. }) => 3,
        Some(Error::Io(_) | Error::Csv(_)) | None => 1,
        Some(_) => 2,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Clean) => ExitCode::SUCCESS,
        Ok(Status::BudgetExceeded) => {
            eprintln!("error: adaptive enumeration budget exceeded");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
