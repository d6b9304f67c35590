//! Experiment implementations. Every experiment follows the same recipe:
//! replicas are mapped in parallel, each drawing from its own rng stream
//! addressed by `(block << 32) | replica`, and the results are folded
//! sequentially in replica order. That makes report bytes independent of
//! the worker count.

mod convergence;
mod coupling;
mod demo;
mod disprove;
mod marginals;

use anyhow::Result;
use permax_core::rng::RngStream;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::report::{Report, RngInfo, StreamBlock};

/// Stream address layout: high bits pick a purpose block within the
/// experiment, low bits the replica.
pub fn stream(seed: u64, block: u64, replica: u64) -> RngStream {
    debug_assert!(replica <= u64::from(u32::MAX));
    RngStream::new(seed, (block << 32) | replica)
}

/// Map replicas 0..count in parallel, collecting in replica order.
pub fn par_map_replicas<T, F>(seed: u64, block: u64, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&RngStream) -> T + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .map(|replica| f(&stream(seed, block, replica)))
        .collect()
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn base_report(
    cfg: &ExperimentConfig,
    blocks: &[(&str, u64)],
) -> Result<Report> {
    let rng = RngInfo {
        scheme: "chacha12 counter streams; index = (block << 32) | replica, 16 lanes per stream"
            .to_owned(),
        seed: cfg.seed,
        stream_blocks: blocks
            .iter()
            .map(|&(purpose, block)| StreamBlock { purpose: purpose.to_owned(), block })
            .collect(),
    };
    Ok(Report::new(cfg.experiment.name(), cfg.echo()?, rng))
}

/// Run the experiment named by `cfg.experiment` on the current thread pool.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let mut cfg = cfg.clone();
    cfg.normalize()?;
    match cfg.experiment {
        Experiment::Convergence => convergence::run(&cfg),
        Experiment::Disprove => disprove::run(&cfg),
        Experiment::FrechetCheck => marginals::frechet(&cfg),
        Experiment::DonskerCheck => marginals::donsker(&cfg),
        Experiment::PrmCheck => marginals::prm(&cfg),
        Experiment::ContinuityDemo => demo::run(&cfg),
        Experiment::CouplingIdentity => coupling::run(&cfg),
    }
}

/// Run on a dedicated pool with the given worker count (0 = one per core).
/// The report bytes do not depend on the count.
pub fn run_with_workers(cfg: &ExperimentConfig, workers: usize) -> Result<Report> {
    if workers == 0 {
        return run(cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    pool.install(|| run(cfg))
}
