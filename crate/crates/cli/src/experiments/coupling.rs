//! Bitwise identity between the direct perturbed-maximum path and the
//! supremum functional replayed on the scaled walk path and the empirical
//! point measure built from the same draws. Stream blocks: the n index;
//! replica ids are the seeds of the sweep.

use anyhow::Result;
use permax_core::functional;
use permax_core::walk::{
    draw_etas, draw_steps, empirical_point_measure, perturbed_max_path,
    scaled_walk_path_from_draws, RETAIN_ALL,
};

use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

use super::{base_report, par_map_replicas};

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let blocks: Vec<(String, u64)> = cfg
        .n_grid
        .iter()
        .enumerate()
        .map(|(ni, n)| (format!("draw seeds, n = {n}"), ni as u64))
        .collect();
    let borrowed: Vec<(&str, u64)> = blocks.iter().map(|(p, b)| (p.as_str(), *b)).collect();
    let mut report = base_report(cfg, &borrowed)?;
    let tail = cfg.tail()?;
    let xi = cfg.xi_law()?;

    let mut col_n = Vec::new();
    let mut col_seeds = Vec::new();
    let mut col_matches = Vec::new();
    let mut all_match = true;
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let wcfg = cfg.walk_config(n)?;
        let steps = wcfg.steps() as usize;
        let horizon = cfg.horizon;
        let a = tail.a();
        let outcomes = par_map_replicas(cfg.seed, ni as u64, cfg.coupling_seeds, |rng| {
            let direct = perturbed_max_path(rng, &wcfg);
            let xis = draw_steps(rng, &xi, steps);
            let etas = draw_etas(rng, &tail, steps + 1);
            let walk = scaled_walk_path_from_draws(&xis, n, horizon);
            let points = empirical_point_measure(&etas, n, a, RETAIN_ALL, horizon)
                .expect("draw count matches the step count");
            let replayed = functional::path(&walk, &points)
                .expect("measure and path share the horizon");
            direct == replayed
        });
        let matches = outcomes.iter().filter(|&&ok| ok).count() as u64;
        all_match &= matches == cfg.coupling_seeds;
        col_n.push(n as i64);
        col_seeds.push(cfg.coupling_seeds as i64);
        col_matches.push(matches as i64);
    }
    report.table(
        Table::new("coupling")
            .int("n", col_n)
            .int("seeds", col_seeds)
            .int("exact_matches", col_matches.clone()),
    );
    report.assert_that(
        "paths-identical-bitwise",
        all_match,
        format!("exact matches per n: {col_matches:?}"),
    );
    Ok(report)
}
