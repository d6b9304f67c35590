//! Sign checks separating the limit supremum from the additive candidate
//! θ + v·B(1): the upper bracket never goes negative while the candidate has
//! positive mass below zero, the candidate's sign probability cross-checked
//! by quadrature and Monte Carlo, a two-sample comparison of the laws, and a
//! coupled strict-inequality count.
//!
//! Stream blocks: `delta` index for the sign sweeps, then 8 = additive
//! samples, 9 = Monte Carlo sign draws, 10 = coupled comparisons.

use anyhow::Result;
use permax_core::limit::{coupled_comparison, sample_additive, sample_limit};
use permax_core::stats::{ks_two_sample, prob_additive_negative};

use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

use super::{base_report, par_map_replicas};

const ADDITIVE_BLOCK: u64 = 8;
const MC_BLOCK: u64 = 9;
const COUPLED_BLOCK: u64 = 10;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let deltas = cfg.delta_grid.clone();
    let mut blocks: Vec<(String, u64)> = deltas
        .iter()
        .enumerate()
        .map(|(di, d)| (format!("limit sign sweep, delta = {d}"), di as u64))
        .collect();
    blocks.push(("additive candidate samples".to_owned(), ADDITIVE_BLOCK));
    blocks.push(("additive sign Monte Carlo".to_owned(), MC_BLOCK));
    blocks.push(("coupled comparisons".to_owned(), COUPLED_BLOCK));
    let borrowed: Vec<(&str, u64)> = blocks.iter().map(|(p, b)| (p.as_str(), *b)).collect();
    let mut report = base_report(cfg, &borrowed)?;
    let tail = cfg.tail()?;

    // (i) Sign fractions per truncation level. The coarsest level is cheap
    // (few points per sample), so it carries the large sample count.
    let mut col_delta = Vec::new();
    let mut col_samples = Vec::new();
    let mut col_upper_neg = Vec::new();
    let mut col_lower_neg = Vec::new();
    let mut lower_at_delta: Vec<f64> = Vec::new();
    for (di, &delta) in deltas.iter().enumerate() {
        let samples = if di == 0 { cfg.u_samples } else { cfg.replicas };
        let lcfg = cfg.limit_config(delta)?;
        let brackets = par_map_replicas(cfg.seed, di as u64, samples, |rng| {
            let s = sample_limit(rng, &lcfg);
            (s.lower, s.upper)
        });
        let upper_neg = brackets.iter().filter(|(_, u)| *u < 0.0).count();
        let lower_neg = brackets.iter().filter(|(l, _)| *l < 0.0).count();
        if delta == cfg.delta {
            lower_at_delta = brackets.iter().map(|(l, _)| *l).collect();
        }
        col_delta.push(delta);
        col_samples.push(samples as i64);
        col_upper_neg.push(upper_neg as f64 / samples as f64);
        col_lower_neg.push(lower_neg as f64 / samples as f64);
    }
    report.table(
        Table::new("sign_fractions")
            .num("delta", col_delta)
            .int("samples", col_samples)
            .num("frac_upper_negative", col_upper_neg.clone())
            .num("frac_lower_negative", col_lower_neg),
    );
    report.assert_that(
        "upper-bracket-never-negative",
        col_upper_neg.iter().all(|&f| f == 0.0),
        format!("negative upper-bracket fractions per delta: {col_upper_neg:?}"),
    );

    // (ii) P{θ + v·B(1) < 0} by quadrature, cross-checked by Monte Carlo.
    let quad = prob_additive_negative(cfg.c, cfg.v)?;
    let neg = par_map_replicas(cfg.seed, MC_BLOCK, cfg.mc_draws, |rng| {
        sample_additive(rng, &tail, cfg.v) < 0.0
    });
    let mc = neg.iter().filter(|&&b| b).count() as f64 / cfg.mc_draws as f64;
    let three_sigma = 3.0 * (quad * (1.0 - quad) / cfg.mc_draws as f64).sqrt();
    report.table(
        Table::new("additive_sign_probability")
            .num("quadrature", vec![quad])
            .num("monte_carlo", vec![mc])
            .int("mc_draws", vec![cfg.mc_draws as i64])
            .num("three_sigma", vec![three_sigma]),
    );
    report.assert_that(
        "additive-negative-probability-positive",
        quad > 0.0 && (cfg.c != 1.0 || cfg.v != 1.0 || quad > 0.01),
        format!("quadrature gives {quad:.6}"),
    );
    report.assert_that(
        "quadrature-matches-monte-carlo",
        (quad - mc).abs() < three_sigma,
        format!("|{quad:.6} - {mc:.6}| vs 3 sigma = {three_sigma:.6}"),
    );

    // (iii) The supremum law against the additive candidate's law.
    let additive = par_map_replicas(cfg.seed, ADDITIVE_BLOCK, cfg.replicas, |rng| {
        sample_additive(rng, &tail, cfg.v)
    });
    let ks = ks_two_sample(&lower_at_delta, &additive)?;
    report.table(
        Table::new("law_comparison")
            .num("ks_statistic", vec![ks.statistic])
            .num("p_value", vec![ks.p_value])
            .int("n_limit", vec![ks.n1 as i64])
            .int("n_additive", vec![ks.n2 as i64]),
    );
    report.assert_that(
        "laws-differ",
        ks.p_value < 1e-3,
        format!("two-sample ks = {:.5}, p = {:.3e}", ks.statistic, ks.p_value),
    );

    // (iv) Coupled on one probability space: the supremum is strictly below
    // the additive combination of the same max mark and diffusion supremum.
    let lcfg = cfg.limit_config(cfg.delta)?;
    let coupled = par_map_replicas(cfg.seed, COUPLED_BLOCK, cfg.replicas, |rng| {
        coupled_comparison(rng, &lcfg)
    });
    let strict = coupled.iter().filter(|c| c.lower < c.rhs).count();
    let resamples: u32 = coupled.iter().map(|c| c.resamples).sum();
    report.table(
        Table::new("coupled_strict")
            .int("draws", vec![cfg.replicas as i64])
            .int("strict", vec![strict as i64])
            .int("resamples", vec![i64::from(resamples)]),
    );
    report.assert_that(
        "coupled-strictly-below",
        strict as u64 == cfg.replicas,
        format!("{strict} of {} draws strict", cfg.replicas),
    );
    Ok(report)
}
