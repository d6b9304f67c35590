//! Convergence-rate demo for the supremum functional: a built family of
//! step functions and point measures approaching a reference pair, with the
//! metric bound between the composed paths checked against its majorant at
//! every step count. Fully deterministic, so no rng blocks.

use anyhow::Result;
use permax_core::functional::{
    build_time_change, check_demo_hypotheses, continuity_demo_instance, continuity_majorant,
    path, skorokhod_upper_bound,
};
use permax_core::StepFunction;

use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

use super::base_report;

fn sup_norm(f: &StepFunction) -> f64 {
    f.jumps()
        .iter()
        .map(|j| j.value.abs())
        .fold(f.initial_value().abs(), f64::max)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = base_report(cfg, &[])?;
    let params = &cfg.demo;
    let mut ns = cfg.n_grid.clone();
    ns.sort_unstable();
    ns.dedup();

    let mut rows = Vec::new();
    for &n in &ns {
        let instance = continuity_demo_instance(n, params)?;
        let check = check_demo_hypotheses(&instance);
        if !check.pass {
            anyhow::bail!("demo hypotheses fail at n = {n}: {check:?}");
        }
        rows.push(continuity_majorant(&instance)?);
    }
    report.table(
        Table::new("bound_trace")
            .int("n", rows.iter().map(|r| r.n as i64).collect())
            .num("path_error", rows.iter().map(|r| r.path_error).collect())
            .num(
                "matched_point_error",
                rows.iter().map(|r| r.matched_point_error).collect(),
            )
            .num("modulus_term", rows.iter().map(|r| r.modulus_term).collect())
            .num("mesh", rows.iter().map(|r| r.mesh).collect())
            .num("gamma", rows.iter().map(|r| r.gamma).collect())
            .num(
                "lambda_deviation",
                rows.iter().map(|r| r.lambda_deviation).collect(),
            )
            .num("bound", rows.iter().map(|r| r.bound).collect())
            .num("majorant", rows.iter().map(|r| r.majorant).collect()),
    );

    let below = rows.iter().all(|r| r.bound <= r.majorant);
    report.assert_that(
        "bound-below-majorant",
        below,
        format!("checked at n = {ns:?}"),
    );

    let first = rows.first().expect("n_grid is non-empty");
    let last = rows.last().expect("n_grid is non-empty");
    report.assert_that(
        "bound-halves-over-grid",
        ns.len() < 2 || last.bound < first.bound / 2.0,
        format!(
            "bound(n = {}) = {:.3e} vs bound(n = {}) / 2 = {:.3e}",
            last.n,
            last.bound,
            first.n,
            first.bound / 2.0
        ),
    );

    // The identity pair must come out at exactly zero: the matching time
    // change is the diagonal and the paths coincide.
    let reference = continuity_demo_instance(last.n, params)?;
    let g0 = path(&reference.f_0, &reference.nu_0)?;
    let diagonal =
        build_time_change(&reference.nu_0, &reference.nu_0, params.gamma, params.horizon)?;
    let identity_bound = skorokhod_upper_bound(&g0, &g0, &diagonal)?;
    report.assert_that(
        "identity-pair-bound-zero",
        identity_bound == 0.0,
        format!("identity pair gives {identity_bound:e}"),
    );

    // At n = 10^4 the bound has dropped below 1% of the reference scale.
    let scale = sup_norm(&reference.f_0);
    if last.n >= 10_000 {
        report.assert_that(
            "bound-vanishes-at-scale",
            last.bound < 0.01 * scale,
            format!(
                "bound(n = {}) = {:.3e} vs 0.01·sup|f_0| = {:.3e}",
                last.n,
                last.bound,
                0.01 * scale
            ),
        );
    }
    Ok(report)
}
