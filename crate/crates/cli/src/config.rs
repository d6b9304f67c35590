//! Experiment selection and configuration. A config comes from defaults, an
//! optional TOML file, and command-line overrides, in that precedence order.
//! Every run echoes its fully resolved config into the report so results can
//! be reproduced from the report alone.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use permax_core::functional::DemoParams;
use permax_core::limit::LimitConfig;
use permax_core::samplers::StepKind;
use permax_core::walk::WalkConfig;
use permax_core::{TailLaw, XiLaw};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Two-sample distance between the rescaled perturbed maximum and the
    /// limit supremum, per step count and probe time, plus bracket widths.
    Convergence,
    /// Sign checks and law comparison for the limit supremum against the
    /// additive candidate θ + v·B(1).
    Disprove,
    /// Marginal law of the rescaled perturbation maximum against Fréchet.
    FrechetCheck,
    /// Marginal law of the rescaled walk endpoint against a centered normal.
    DonskerCheck,
    /// Box counts of the simulated point measure against their means.
    PrmCheck,
    /// Convergence-rate demo for the supremum functional on a built family.
    ContinuityDemo,
    /// Bitwise agreement of the direct perturbed maximum and the functional
    /// replayed on the walk path and empirical point measure.
    CouplingIdentity,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::Disprove => "disprove",
            Experiment::FrechetCheck => "frechet-check",
            Experiment::DonskerCheck => "donsker-check",
            Experiment::PrmCheck => "prm-check",
            Experiment::ContinuityDemo => "continuity-demo",
            Experiment::CouplingIdentity => "coupling-identity",
        }
    }
}

/// Full experiment configuration. Field defaults match the stress scales the
/// acceptance checks run at; smoke runs override `replicas` and the grids.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Tail scale of the perturbation law: P{η > x} = c·x^(−a) above the
    /// lower support point.
    pub c: f64,
    /// Tail index a > 0.
    pub a: f64,
    /// Step scale of the walk; also the diffusion coefficient of the limit.
    pub v: f64,
    /// Shape of the centered step law.
    pub xi: StepKind,
    pub horizon: f64,
    /// Step counts for experiments that sweep over n.
    pub n_grid: Vec<u64>,
    /// Replicas per Monte Carlo estimate.
    pub replicas: u64,
    /// Mark truncation level for limit-process samples.
    pub delta: f64,
    /// Truncation levels for bracket-width and sign-fraction sweeps,
    /// coarsest first. `delta` is appended if missing.
    pub delta_grid: Vec<f64>,
    pub seed: u64,
    /// Times at which path laws are probed; defaults to {T/4, T/2, T}.
    pub probe_times: Option<Vec<f64>>,
    /// Step count for marginal checks (frechet-check, donsker-check).
    pub marginal_n: u64,
    /// Step count for empirical point-measure box counts.
    pub empirical_n: u64,
    /// Samples for the upper-bracket sign check at the coarsest truncation.
    pub u_samples: u64,
    /// Draws for the Monte Carlo cross-check of the additive sign
    /// probability.
    pub mc_draws: u64,
    /// Seeds per step count for the coupling identity check.
    pub coupling_seeds: u64,
    /// Boxes (time_le, mark_gt) whose point counts are compared to their
    /// means in prm-check.
    pub prm_boxes: Vec<[f64; 2]>,
    /// Boxes for the empirical point measure rows of prm-check.
    pub empirical_boxes: Vec<[f64; 2]>,
    pub demo: DemoParams,
    /// Worker threads; 0 means one per core. Runtime-only: never read from
    /// or echoed into reports, which stay byte-identical across counts.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Convergence,
            c: 1.0,
            a: 2.0,
            v: 1.0,
            xi: StepKind::Rademacher,
            horizon: 1.0,
            n_grid: vec![100, 1_000, 10_000],
            replicas: 10_000,
            delta: 0.01,
            delta_grid: vec![0.1, 0.01],
            seed: 42,
            probe_times: None,
            marginal_n: 100_000,
            empirical_n: 100_000,
            u_samples: 100_000,
            mc_draws: 10_000_000,
            coupling_seeds: 1_000,
            prm_boxes: vec![[1.0, 0.1], [0.5, 0.2], [1.0, 1.0]],
            empirical_boxes: vec![[1.0, 1.0]],
            demo: DemoParams::default(),
            workers: 0,
        }
    }
}

/// Command-line overrides; `None` keeps the file or default value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub replicas: Option<u64>,
    pub n_grid: Option<Vec<u64>>,
    pub delta: Option<f64>,
    pub c: Option<f64>,
    pub a: Option<f64>,
    pub v: Option<f64>,
    pub horizon: Option<f64>,
    pub probe_times: Option<Vec<f64>>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(ExperimentConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(e) = ov.experiment {
            self.experiment = e;
        }
        if let Some(s) = ov.seed {
            self.seed = s;
        }
        if let Some(r) = ov.replicas {
            self.replicas = r;
        }
        if let Some(ref ns) = ov.n_grid {
            self.n_grid = ns.clone();
        }
        if let Some(d) = ov.delta {
            self.delta = d;
        }
        if let Some(x) = ov.c {
            self.c = x;
        }
        if let Some(x) = ov.a {
            self.a = x;
        }
        if let Some(x) = ov.v {
            self.v = x;
        }
        if let Some(x) = ov.horizon {
            self.horizon = x;
        }
        if let Some(ref ts) = ov.probe_times {
            self.probe_times = Some(ts.clone());
        }
        if let Some(w) = ov.workers {
            self.workers = w;
        }
    }

    /// Resolve derived fields so the echoed config is self-contained: probe
    /// times become explicit and `delta` is folded into `delta_grid`.
    pub fn normalize(&mut self) -> Result<()> {
        self.validate()?;
        self.probe_times = Some(self.resolved_probe_times());
        self.delta_grid = self.resolved_delta_grid();
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("c", self.c),
            ("a", self.a),
            ("v", self.v),
            ("horizon", self.horizon),
            ("delta", self.delta),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                bail!("{name} must be finite and positive, got {value}");
            }
        }
        if self.n_grid.is_empty() {
            bail!("n_grid must not be empty");
        }
        if self.n_grid.iter().any(|&n| n == 0) {
            bail!("n_grid entries must be at least 1");
        }
        let counts = [
            ("replicas", self.replicas),
            ("marginal_n", self.marginal_n),
            ("empirical_n", self.empirical_n),
            ("u_samples", self.u_samples),
            ("mc_draws", self.mc_draws),
            ("coupling_seeds", self.coupling_seeds),
        ];
        for (name, value) in counts {
            if value == 0 {
                bail!("{name} must be at least 1");
            }
            // Replica ids share the stream index with a block tag in the
            // high bits, so each must fit in 32 bits.
            if value > u64::from(u32::MAX) {
                bail!("{name} must fit in 32 bits, got {value}");
            }
        }
        for &d in &self.delta_grid {
            if !d.is_finite() || d <= 0.0 {
                bail!("delta_grid entries must be finite and positive, got {d}");
            }
        }
        if let Some(ref ts) = self.probe_times {
            if ts.is_empty() {
                bail!("probe_times must not be empty when given");
            }
            for &t in ts {
                if !t.is_finite() || t <= 0.0 || t > self.horizon {
                    bail!(
                        "probe times must lie in (0, horizon = {}], got {t}",
                        self.horizon
                    );
                }
            }
        }
        for (name, boxes) in [("prm_boxes", &self.prm_boxes), ("empirical_boxes", &self.empirical_boxes)] {
            for &[s, x] in boxes {
                if !(s > 0.0 && s <= self.horizon) || !(x > 0.0 && x.is_finite()) {
                    bail!("{name} entries need time in (0, horizon] and a positive mark threshold, got ({s}, {x})");
                }
            }
        }
        Ok(())
    }

    fn resolved_probe_times(&self) -> Vec<f64> {
        let mut ts = self.probe_times.clone().unwrap_or_else(|| {
            vec![0.25 * self.horizon, 0.5 * self.horizon, self.horizon]
        });
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    fn resolved_delta_grid(&self) -> Vec<f64> {
        let mut grid = self.delta_grid.clone();
        if !grid.contains(&self.delta) {
            grid.push(self.delta);
        }
        // Coarsest first: sign-fraction sweeps give the cheap coarse level
        // the large sample count.
        grid.sort_by(|x, y| f64::total_cmp(y, x));
        grid.dedup();
        grid
    }

    pub fn tail(&self) -> Result<TailLaw> {
        Ok(TailLaw::new(self.c, self.a)?)
    }

    pub fn xi_law(&self) -> Result<XiLaw> {
        Ok(XiLaw::new(self.xi, self.v)?)
    }

    pub fn limit_config(&self, delta: f64) -> Result<LimitConfig> {
        Ok(LimitConfig::new(self.tail()?, self.v, self.horizon, delta)?)
    }

    pub fn walk_config(&self, n: u64) -> Result<WalkConfig> {
        Ok(WalkConfig::new(self.xi_law()?, self.tail()?, n, self.horizon)?)
    }

    /// Config echo for the report. `workers` is marked `serde(skip)`, so the
    /// echo is independent of the worker count by construction.
    pub fn echo(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_resolve() {
        let mut cfg = ExperimentConfig::default();
        cfg.normalize().unwrap();
        assert_eq!(cfg.probe_times.as_deref(), Some(&[0.25, 0.5, 1.0][..]));
        assert_eq!(cfg.delta_grid, vec![0.1, 0.01]);
        assert_eq!(cfg.experiment.name(), "convergence");
    }

    #[test]
    fn toml_round_trip_with_nested_demo() {
        let text = r#"
            experiment = "continuity-demo"
            seed = 7
            n_grid = [10, 100]
            delta_grid = [0.2]
            xi = "uniform-centered"

            [demo]
            levels = 4
            grid = 256
        "#;
        let mut cfg: ExperimentConfig = toml::from_str(text).unwrap();
        cfg.normalize().unwrap();
        assert_eq!(cfg.experiment, Experiment::ContinuityDemo);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.demo.levels, 4);
        assert_eq!(cfg.demo.grid, 256);
        // Unlisted fields keep their defaults; delta joins the grid.
        assert_eq!(cfg.replicas, 10_000);
        assert_eq!(cfg.delta_grid, vec![0.2, 0.01]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<ExperimentConfig>("replcias = 10").unwrap_err();
        assert!(err.to_string().contains("replcias"));
    }

    #[test]
    fn overrides_beat_file_values() {
        let mut cfg: ExperimentConfig = toml::from_str("seed = 1\ndelta = 0.5").unwrap();
        cfg.apply(&Overrides {
            seed: Some(9),
            n_grid: Some(vec![50]),
            workers: Some(2),
            ..Overrides::default()
        });
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.delta, 0.5);
        assert_eq!(cfg.n_grid, vec![50]);
        assert_eq!(cfg.workers, 2);
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let cases: Vec<(&str, Box<dyn Fn(&mut ExperimentConfig)>)> = vec![
            ("c", Box::new(|c| c.c = 0.0)),
            ("horizon", Box::new(|c| c.horizon = f64::INFINITY)),
            ("n_grid", Box::new(|c| c.n_grid.clear())),
            ("n_grid", Box::new(|c| c.n_grid = vec![0])),
            ("replicas", Box::new(|c| c.replicas = 0)),
            ("replicas", Box::new(|c| c.replicas = 1 << 33)),
            ("probe", Box::new(|c| c.probe_times = Some(vec![2.0]))),
            ("delta_grid", Box::new(|c| c.delta_grid = vec![-0.1])),
            ("prm_boxes", Box::new(|c| c.prm_boxes = vec![[0.0, 1.0]])),
        ];
        for (label, mutate) in cases {
            let mut cfg = ExperimentConfig::default();
            mutate(&mut cfg);
            assert!(cfg.normalize().is_err(), "expected {label} to fail");
        }
    }

    #[test]
    fn echo_excludes_workers_and_resolves_probes() {
        let mut cfg = ExperimentConfig::default();
        cfg.workers = 7;
        cfg.normalize().unwrap();
        let echo = cfg.echo().unwrap();
        assert!(echo.get("workers").is_none());
        assert_eq!(echo["probe_times"][2], serde_json::json!(1.0));
        assert_eq!(echo["xi"], serde_json::json!("rademacher"));
    }

    #[test]
    fn probe_times_are_sorted_and_deduped() {
        let mut cfg = ExperimentConfig {
            probe_times: Some(vec![1.0, 0.5, 0.5]),
            ..ExperimentConfig::default()
        };
        cfg.normalize().unwrap();
        assert_eq!(cfg.probe_times.as_deref(), Some(&[0.5, 1.0][..]));
    }
}
