//! Distribution of the rescaled perturbed maximum against the limit
//! supremum: a two-sample distance per (step count, probe time), and mean
//! bracket widths per truncation level.
//!
//! Stream blocks: `n` index for the pre-limit replicas, `32 + delta` index
//! for limit-process replicas.

use anyhow::Result;
use permax_core::limit::sample_limit;
use permax_core::stats::ks_two_sample;
use permax_core::walk::perturbed_max_path;

use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

use super::{base_report, mean, par_map_replicas};

const LIMIT_BLOCK: u64 = 32;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let probes = cfg.probe_times.clone().expect("normalized config");
    let deltas = cfg.delta_grid.clone();

    let mut blocks: Vec<(String, u64)> = cfg
        .n_grid
        .iter()
        .enumerate()
        .map(|(ni, n)| (format!("pre-limit paths, n = {n}"), ni as u64))
        .collect();
    for (di, d) in deltas.iter().enumerate() {
        blocks.push((format!("limit samples, delta = {d}"), LIMIT_BLOCK + di as u64));
    }
    let borrowed: Vec<(&str, u64)> = blocks.iter().map(|(p, b)| (p.as_str(), *b)).collect();
    let mut report = base_report(cfg, &borrowed)?;

    // Limit samples once per truncation level: the restricted supremum at
    // each probe time plus the bracket width.
    let mut widths = Vec::new();
    let mut limit_at_probe: Vec<Vec<f64>> = vec![Vec::new(); probes.len()];
    for (di, &delta) in deltas.iter().enumerate() {
        let lcfg = cfg.limit_config(delta)?;
        let drawn = par_map_replicas(
            cfg.seed,
            LIMIT_BLOCK + di as u64,
            cfg.replicas,
            |rng| {
                let s = sample_limit(rng, &lcfg);
                let at_probe: Vec<f64> = probes.iter().map(|&t| s.restricted(t)).collect();
                (at_probe, s.upper - s.lower)
            },
        );
        widths.push(mean(&drawn.iter().map(|(_, w)| *w).collect::<Vec<f64>>()));
        if delta == cfg.delta {
            for (pi, slot) in limit_at_probe.iter_mut().enumerate() {
                *slot = drawn.iter().map(|(at, _)| at[pi]).collect();
            }
        }
    }
    let width_at_delta = widths[deltas.iter().position(|&d| d == cfg.delta).unwrap()];

    let mut row_n = Vec::new();
    let mut row_t = Vec::new();
    let mut row_ks = Vec::new();
    let mut row_p = Vec::new();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let wcfg = cfg.walk_config(n)?;
        let at_probes = par_map_replicas(cfg.seed, ni as u64, cfg.replicas, |rng| {
            let path = perturbed_max_path(rng, &wcfg);
            probes
                .iter()
                .map(|&t| path.eval(t).expect("probe inside horizon"))
                .collect::<Vec<f64>>()
        });
        for (pi, &t) in probes.iter().enumerate() {
            let xs: Vec<f64> = at_probes.iter().map(|at| at[pi]).collect();
            let ks = ks_two_sample(&xs, &limit_at_probe[pi])?;
            row_n.push(n as i64);
            row_t.push(t);
            row_ks.push(ks.statistic);
            row_p.push(ks.p_value);
        }
    }

    let rows = row_n.len();
    report.table(
        Table::new("ks_trend")
            .int("n", row_n)
            .num("t", row_t)
            .num("ks_statistic", row_ks.clone())
            .num("p_value", row_p)
            .num("mean_bracket_width", vec![width_at_delta; rows]),
    );
    report.table(
        Table::new("bracket_widths")
            .num("delta", deltas.clone())
            .num("mean_width", widths.clone()),
    );

    // The trend assertion runs at the last probe time (the horizon), where
    // the limit law uses every point of the measure.
    let last = probes.len() - 1;
    let ks_first = row_ks[last];
    let ks_last = row_ks[row_ks.len() - 1];
    report.assert_that(
        "ks-shrinks-with-n",
        cfg.n_grid.len() < 2 || ks_last < ks_first,
        format!(
            "at t = {}: ks(n = {}) = {ks_last:.5}, ks(n = {}) = {ks_first:.5}",
            probes[last],
            cfg.n_grid[cfg.n_grid.len() - 1],
            cfg.n_grid[0],
        ),
    );
    let finest = widths[widths.len() - 1];
    let coarsest = widths[0];
    report.assert_that(
        "bracket-width-shrinks-with-delta",
        deltas.len() < 2 || finest < coarsest,
        format!(
            "mean width {finest:.5} at delta = {} vs {coarsest:.5} at delta = {}",
            deltas[deltas.len() - 1],
            deltas[0],
        ),
    );
    Ok(report)
}
