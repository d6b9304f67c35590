use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::Parser;
use permax_cli::config::{Experiment, ExperimentConfig, Overrides};
use permax_cli::experiments;
use permax_cli::report;

/// Simulation experiments for maxima of randomly perturbed walks.
#[derive(Parser, Debug)]
#[command(name = "permax", version, about)]
struct Cli {
    /// Experiment to run; may also come from the config file.
    #[arg(value_enum)]
    experiment: Option<Experiment>,

    /// TOML config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Base seed for every rng stream of the run.
    #[arg(long)]
    seed: Option<u64>,

    /// Replicas per Monte Carlo estimate.
    #[arg(long)]
    replicas: Option<u64>,

    /// Comma-separated step counts, e.g. --n 100,1000,10000.
    #[arg(long = "n", value_delimiter = ',')]
    n_grid: Option<Vec<u64>>,

    /// Mark truncation level for limit-process samples.
    #[arg(long)]
    delta: Option<f64>,

    /// Tail scale c of the perturbation law.
    #[arg(long)]
    c: Option<f64>,

    /// Tail index a of the perturbation law.
    #[arg(long)]
    a: Option<f64>,

    /// Step scale of the walk and diffusion coefficient of the limit.
    #[arg(long)]
    v: Option<f64>,

    /// Time horizon T.
    #[arg(long)]
    horizon: Option<f64>,

    /// Comma-separated probe times in (0, T].
    #[arg(long, value_delimiter = ',')]
    probe_times: Option<Vec<f64>>,

    /// Output directory for report.json, CSV tables, and timing.json.
    #[arg(long, default_value = "permax-out")]
    out: PathBuf,

    /// Worker threads (0 = one per core). Does not affect report bytes.
    #[arg(long)]
    workers: Option<usize>,
}

fn execute(cli: &Cli) -> Result<bool> {
    if cli.experiment.is_none() && cli.config.is_none() {
        anyhow::bail!("no experiment given: name one as the first argument or point --config at a file");
    }
    let mut cfg = ExperimentConfig::load(cli.config.as_deref())?;
    cfg.apply(&Overrides {
        experiment: cli.experiment,
        seed: cli.seed,
        replicas: cli.replicas,
        n_grid: cli.n_grid.clone(),
        delta: cli.delta,
        c: cli.c,
        a: cli.a,
        v: cli.v,
        horizon: cli.horizon,
        probe_times: cli.probe_times.clone(),
        workers: cli.workers,
    });

    let started = Instant::now();
    let report = experiments::run_with_workers(&cfg, cfg.workers)?;
    let elapsed = started.elapsed().as_secs_f64();

    report.write(&cli.out)?;
    report::write_timing(&cli.out, &report.experiment, elapsed)?;

    for assertion in &report.assertions {
        let tag = if assertion.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", assertion.name, assertion.detail);
    }
    println!(
        "{}: {} in {elapsed:.2}s, report in {}",
        report.experiment,
        if report.pass { "pass" } else { "FAIL" },
        cli.out.display()
    );
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
