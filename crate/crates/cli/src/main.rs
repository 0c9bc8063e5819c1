use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use mmrisk::bounds::divergences;
use mmrisk::harness::{
    fit_rate_csv, run_scenario, verify_suite, write_outputs, ExperimentConfig, Suite,
};
use mmrisk::optimizer::batch_schedule;
use mmrisk::problems::DistributionSpec;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "mmrisk",
    version,
    about = "Minimax excess-risk experiments with data-dependent oracles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured scenario and write results.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output directory in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the log-log rate of a results CSV.
    FitRate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run a named verification suite and print its JSON report.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Print the exponential batch schedule for a budget.
    Schedule {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kappa: f64,
    },
    /// Print TV, KL and Le Cam distance between two discrete laws.
    Divergence {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("expected one of: {}", names.join(", "))
    })
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn load_discrete(path: &PathBuf) -> Result<mmrisk::DiscreteDistribution> {
    let spec =
        DistributionSpec::load(path).with_context(|| format!("reading {}", path.display()))?;
    let dist: mmrisk::DataDistribution = spec.build()?;
    dist.as_discrete().cloned().ok_or_else(|| {
        anyhow!(
            "{}: divergences need a discrete distribution",
            path.display()
        )
    })
}

/// `Ok(true)` when everything checked passed.
fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run { config, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| anyhow!("no output directory: pass --out or set `output`"))?;
            let result = run_scenario(&cfg)?;
            let (csv, json) = write_outputs(&result, &dir)?;
            for p in &result.points {
                let fmt =
                    |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
                let b = p.bounds.as_ref();
                println!(
                    "n={:<6} mean={:.6e} se={:.2e} lower={} upper={}",
                    p.n,
                    p.mean,
                    p.std_err,
                    fmt(b.and_then(|b| b.lower)),
                    fmt(b.and_then(|b| b.upper))
                );
            }
            if let Some(r) = result.rate {
                println!(
                    "slope={:.4} intercept={:.4} r2={:.4}",
                    r.slope, r.intercept, r.r_squared
                );
            }
            println!("wrote {} and {}", csv.display(), json.display());
            println!("{}", if result.passed { "PASS" } else { "FAIL" });
            Ok(result.passed)
        }
        Command::FitRate { input } => {
            print_json(&fit_rate_csv(&input)?)?;
            Ok(true)
        }
        Command::Verify { suite, seed } => {
            let report = verify_suite(suite.name(), seed)?;
            print_json(&report)?;
            Ok(report.passed)
        }
        Command::Schedule { n, kappa } => {
            let batches = batch_schedule(n, kappa)?;
            let total: usize = batches.iter().sum();
            print_json(&serde_json::json!({
                "n": n,
                "kappa": kappa,
                "steps": batches.len(),
                "total": total,
                "batches": batches,
            }))?;
            Ok(true)
        }
        Command::Divergence { p, q } => {
            let (p, q) = (load_discrete(&p)?, load_discrete(&q)?);
            print_json(&divergences(&p, &q))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
