//! `locc`: spectral entropy rates, conversion experiments and verification suites.
//!
//! Exit codes: 0 success, 1 suite violation, 2 usage or parse error, 3 budget exceeded.

mod model;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use locc_core::convert::{
    concentration_experiment, dilution_experiment, direct_convert, RateVerdict,
};
use locc_core::infospec::entropy_proxies;
use locc_core::spectra::{schmidt_from_amplitudes, AmplitudeMatrix};
use locc_core::suites::{resolve_names, run_suites, SuiteConfig};
use locc_core::{Budgets, Error, SequenceModel};

use model::parse_model;

#[derive(Parser)]
#[command(
    name = "locc",
    version,
    about = "Finite-n information-spectrum analysis of pure-state conversion"
)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Units {
    Nats,
    Bits,
}

#[derive(Args)]
struct RunArgs {
    /// Master seed for randomized suites.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Output format. Defaults to CSV, except `verify` which defaults to JSON.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Units for reported rates.
    #[arg(long, global = true, value_enum, default_value = "nats")]
    units: Units,
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget_type_classes: u64,
    #[arg(long, global = true, default_value_t = 1 << 20)]
    budget_expanded_dim: u64,
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget_brute_force: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Schmidt spectrum of an amplitude matrix (JSON nested rows of numbers or [re, im] pairs).
    Schmidt { input: PathBuf },
    /// Entropy-rate proxies of a source model over grids of n and epsilon.
    Rates {
        model: String,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n_grid: Vec<u32>,
        #[arg(long = "eps", value_delimiter = ',', default_value = "0.1")]
        eps_grid: Vec<f64>,
    },
    /// Convert one source block into an approximation of one target block.
    Convert {
        source: String,
        target: String,
        #[arg(long = "n", default_value_t = 1)]
        n: u32,
    },
    /// Concentration into maximally entangled states of rank ceil(e^{nR}).
    Concentrate {
        source: String,
        /// Rate in nats per copy.
        #[arg(long)]
        rate: f64,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n_grid: Vec<u32>,
    },
    /// Dilution from maximally entangled states of rank ceil(e^{nR}).
    Dilute {
        target: String,
        #[arg(long)]
        rate: f64,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n_grid: Vec<u32>,
    },
    /// Run named verification suites (`all` for every suite).
    Verify {
        #[arg(required = true)]
        suites: Vec<String>,
        /// Instances per suite (default depends on the suite).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
    },
}

/// Validated run configuration shared by the subcommands.
struct RunConfig {
    seed: u64,
    budgets: Budgets,
    format: Option<Format>,
    units: Units,
    out: Option<PathBuf>,
}

impl RunConfig {
    fn from_args(args: &RunArgs) -> Result<Self, Error> {
        if args.budget_type_classes == 0
            || args.budget_expanded_dim == 0
            || args.budget_brute_force == 0
        {
            return Err(Error::InvalidArgument("budgets must be positive".into()));
        }
        Ok(Self {
            seed: args.seed,
            budgets: Budgets {
                max_type_classes: args.budget_type_classes,
                max_expanded_dim: args.budget_expanded_dim,
                brute_force_cap: args.budget_brute_force,
            },
            format: args.format,
            units: args.units,
            out: args.out.clone(),
        })
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    fn scale(&self, nats: f64) -> f64 {
        match self.units {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    fn emit(&self, text: &str) -> Result<(), Error> {
        match &self.out {
            Some(path) => fs::write(path, text)?,
            None => io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn check_grid<T: PartialOrd + Copy>(grid: &[T], name: &str) -> Result<Vec<T>, Error> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("grid values are comparable"));
    sorted.dedup_by(|a, b| a == b);
    Ok(sorted)
}

fn json_string<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization is infallible");
    text.push('\n');
    text
}

/// What a command produced: output already written, plus an optional budget failure that
/// cut it short.
enum Outcome {
    Done,
    Violations,
    Partial(Error),
}

#[derive(Serialize)]
struct RateRow {
    n: u32,
    epsilon: f64,
    underline_h: f64,
    overline_h: f64,
}

#[derive(Serialize)]
struct RatesOutput<'a> {
    model: &'a SequenceModel,
    units: &'static str,
    rows: Vec<RateRow>,
}

fn cmd_rates(
    cfg: &RunConfig,
    model: &str,
    n_grid: &[u32],
    eps_grid: &[f64],
) -> Result<Outcome, Error> {
    let model = parse_model(model)?;
    let n_grid = check_grid(n_grid, "n")?;
    let eps_grid = check_grid(eps_grid, "epsilon")?;
    if n_grid[0] == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut rows = Vec::new();
    let mut failure = None;
    for &n in &n_grid {
        let spectrum = match model.generate(n, &cfg.budgets) {
            Ok(s) => s,
            Err(e) if e.is_budget() => {
                failure = Some(e);
                break;
            }
            Err(e) => return Err(e),
        };
        for &eps in &eps_grid {
            let (under, over) = entropy_proxies(&spectrum, n, eps)?;
            rows.push(RateRow {
                n,
                epsilon: eps,
                underline_h: cfg.scale(under),
                overline_h: cfg.scale(over),
            });
        }
    }
    let text = match cfg.format() {
        Format::Csv => {
            let mut out = String::from("n,epsilon,underline_H,overline_H\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.n, r.epsilon, r.underline_h, r.overline_h
                ));
            }
            out
        }
        Format::Json => json_string(&RatesOutput {
            model: &model,
            units: match cfg.units {
                Units::Nats => "nats",
                Units::Bits => "bits",
            },
            rows,
        }),
    };
    cfg.emit(&text)?;
    Ok(failure.map_or(Outcome::Done, Outcome::Partial))
}

fn cmd_schmidt(cfg: &RunConfig, input: &PathBuf) -> Result<Outcome, Error> {
    let amplitudes = AmplitudeMatrix::from_json(&fs::read_to_string(input)?)?;
    let spectrum = schmidt_from_amplitudes(&amplitudes)?;
    let mut text = spectrum.to_json();
    text.push('\n');
    cfg.emit(&text)?;
    let line = format!("entropy {:.6}\n", cfg.scale(spectrum.entropy()));
    if cfg.out.is_some() {
        io::stdout().write_all(line.as_bytes())?;
    } else {
        io::stderr().write_all(line.as_bytes())?;
    }
    Ok(Outcome::Done)
}

fn cmd_convert(cfg: &RunConfig, source: &str, target: &str, n: u32) -> Result<Outcome, Error> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let p = parse_model(source)?.generate(n, &cfg.budgets)?;
    let q = parse_model(target)?.generate(n, &cfg.budgets)?;
    let report = direct_convert(&p, &q, n)?;
    let text = match cfg.format() {
        Format::Csv => format!(
            "n,error,fidelity,nielsen_ok\n{},{},{},{}\n",
            report.n,
            report.error(),
            report.fidelity,
            report.nielsen_ok
        ),
        Format::Json => json_string(&report),
    };
    cfg.emit(&text)?;
    Ok(Outcome::Done)
}

type Experiment = fn(&SequenceModel, f64, &[u32], &Budgets) -> locc_core::Result<RateVerdict>;

fn cmd_experiment(
    cfg: &RunConfig,
    experiment: Experiment,
    model: &str,
    rate: f64,
    n_grid: &[u32],
) -> Result<Outcome, Error> {
    let model = parse_model(model)?;
    let n_grid = check_grid(n_grid, "n")?;
    if n_grid[0] == 0 || !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidArgument(
            "n must be positive and the rate finite and nonnegative".into(),
        ));
    }
    let mut verdict: Option<RateVerdict> = None;
    let mut failure = None;
    // One grid point at a time so a budget overrun keeps the points before it.
    for &n in &n_grid {
        match experiment(&model, rate, &[n], &cfg.budgets) {
            Ok(v) => match verdict.as_mut() {
                Some(acc) => acc.series.extend(v.series),
                None => verdict = Some(v),
            },
            Err(e) if e.is_budget() => {
                failure = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(v) = &verdict {
        let text = match cfg.format() {
            Format::Csv => v.to_csv(),
            Format::Json => {
                let mut t = v.to_json();
                t.push('\n');
                t
            }
        };
        cfg.emit(&text)?;
    } else if cfg.format() == Format::Csv {
        cfg.emit("n,error,fidelity,nielsen_ok\n")?;
    }
    Ok(failure.map_or(Outcome::Done, Outcome::Partial))
}

#[derive(Serialize)]
struct VerifyOutput {
    seed: u64,
    passed: bool,
    suites: Vec<locc_core::suites::SuiteReport>,
}

fn cmd_verify(
    cfg: &RunConfig,
    names: &[String],
    trials: Option<usize>,
    max_dim: usize,
) -> Result<Outcome, Error> {
    let names = resolve_names(names)?;
    if trials == Some(0) || max_dim == 0 {
        return Err(Error::InvalidArgument(
            "trials and max-dim must be positive".into(),
        ));
    }
    let config = SuiteConfig {
        seed: cfg.seed,
        instances: trials,
        max_dim,
    };
    let suites = run_suites(&names, &config)?;
    let passed = suites.iter().all(|s| s.passed());
    let text = match cfg.format.unwrap_or(Format::Json) {
        // Suite reports carry nested instances; CSV gets the per-suite summary.
        Format::Csv => {
            let mut out = String::from("suite,instances,checks,violations,worst_slack\n");
            for s in &suites {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.name, s.instances, s.checks, s.violations, s.worst_slack
                ));
            }
            out
        }
        Format::Json => json_string(&VerifyOutput {
            seed: cfg.seed,
            passed,
            suites,
        }),
    };
    cfg.emit(&text)?;
    Ok(if passed {
        Outcome::Done
    } else {
        Outcome::Violations
    })
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let cfg = RunConfig::from_args(&cli.run)?;
    match &cli.command {
        Command::Schmidt { input } => cmd_schmidt(&cfg, input),
        Command::Rates {
            model,
            n_grid,
            eps_grid,
        } => cmd_rates(&cfg, model, n_grid, eps_grid),
        Command::Convert { source, target, n } => cmd_convert(&cfg, source, target, *n),
        Command::Concentrate {
            source,
            rate,
            n_grid,
        } => cmd_experiment(&cfg, concentration_experiment, source, *rate, n_grid),
        Command::Dilute {
            target,
            rate,
            n_grid,
        } => cmd_experiment(&cfg, dilution_experiment, target, *rate, n_grid),
        Command::Verify {
            suites,
            trials,
            max_dim,
        } => cmd_verify(&cfg, suites, *trials, *max_dim),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Violations) => {
            eprintln!("locc: verification found violations");
            ExitCode::from(1)
        }
        Ok(Outcome::Partial(e)) => {
            eprintln!("locc: warning: output is partial: {e}");
            ExitCode::from(3)
        }
        Err(e) if e.is_budget() => {
            eprintln!("locc: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("locc: {e}");
            ExitCode::from(2)
        }
    }
}
