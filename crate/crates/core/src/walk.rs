//! The pre-limit objects: a zero-delayed random walk, its perturbed
//! running-maximum path, and the empirical point measure of scaled
//! perturbations.
//!
//! All three are driven by lanes of one replica stream: increments ξ come
//! from one lane and perturbations η from another, so the walk path, the
//! perturbed-maximum path, and the point measure built from the same
//! [`RngStream`] are coupled draw-for-draw. That coupling is load-bearing:
//! the perturbed maximum must equal the running-supremum functional applied
//! to (scaled walk, empirical measure) bit for bit, which pins the exact
//! order of every floating-point operation here. Terms are formed as
//! `walk_scale(n)·S_k + mark_scale(n, a)·η_{k+1}`, summed left to right, and
//! maximized in ascending k.

use crate::error::{Error, Result};
use crate::measure::{MarkedPoint, PointMeasure};
use crate::rng::RngStream;
use crate::samplers::{TailLaw, XiLaw};
use crate::step_fn::{Jump, StepFunction};

/// Truncation sentinel for [`empirical_point_measure`]: retain every index,
/// whatever the sign of its mark. Needed to reproduce the perturbed maximum
/// exactly, since that maximum ranges over all k, not only positive marks.
pub const RETAIN_ALL: f64 = f64::NEG_INFINITY;

const XI_LANE: u64 = 1;
const ETA_LANE: u64 = 2;

/// Parameters of one pre-limit simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkConfig {
    xi: XiLaw,
    tail: TailLaw,
    n: u64,
    horizon: f64,
}

impl WalkConfig {
    pub fn new(xi: XiLaw, tail: TailLaw, n: u64, horizon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                requirement: "at least 1",
            });
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: horizon,
                requirement: "finite and positive",
            });
        }
        Ok(Self {
            xi,
            tail,
            n,
            horizon,
        })
    }

    pub fn xi(&self) -> &XiLaw {
        &self.xi
    }

    pub fn tail(&self) -> &TailLaw {
        &self.tail
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of walk steps on the horizon: the largest m with m/n ≤ T,
    /// computed so that the jump time m/n never lands beyond T in floats.
    pub fn steps(&self) -> u64 {
        steps_for(self.n, self.horizon)
    }
}

fn steps_for(n: u64, horizon: f64) -> u64 {
    let nf = n as f64;
    let mut m = (nf * horizon).floor() as u64;
    while m > 0 && m as f64 / nf > horizon {
        m -= 1;
    }
    m
}

/// `n^{-1/2}`, the walk normalization.
pub fn walk_scale(n: u64) -> f64 {
    1.0 / (n as f64).sqrt()
}

/// `n^{-1/a}`, the perturbation normalization; reuses the walk scale bit for
/// bit when a = 2 so the two scalings never drift apart in the main case.
pub fn mark_scale(n: u64, a: f64) -> f64 {
    if a == 2.0 {
        walk_scale(n)
    } else {
        (n as f64).powf(-1.0 / a)
    }
}

/// `count` increment draws from the ξ lane of `rng`.
pub fn draw_steps(rng: &RngStream, xi: &XiLaw, count: usize) -> Vec<f64> {
    let mut lane = rng.substream(XI_LANE);
    (0..count).map(|_| xi.sample(&mut lane)).collect()
}

/// `count` perturbation draws from the η lane of `rng`.
pub fn draw_etas(rng: &RngStream, tail: &TailLaw, count: usize) -> Vec<f64> {
    let mut lane = rng.substream(ETA_LANE);
    (0..count).map(|_| tail.sample_eta(&mut lane)).collect()
}

/// The path t ↦ max_{0≤k≤[nt]} (walk_scale·S_k + mark_scale·η_{k+1}) on
/// [0, T], with jumps only at times k/n. Non-decreasing by construction;
/// its value at 0 is mark_scale·η₁ since S₀ = 0.
pub fn perturbed_max_path(rng: &RngStream, cfg: &WalkConfig) -> StepFunction {
    let m = cfg.steps() as usize;
    let xis = draw_steps(rng, &cfg.xi, m);
    let etas = draw_etas(rng, &cfg.tail, m + 1);
    perturbed_max_path_from_draws(&xis, &etas, cfg.n, cfg.tail.a(), cfg.horizon)
}

/// [`perturbed_max_path`] from caller-supplied draws: the hook for jointly
/// sampled (ξ, η) laws. Requires at least [nT] increments and [nT]+1
/// perturbations; panics otherwise.
pub fn perturbed_max_path_from_draws(
    xis: &[f64],
    etas: &[f64],
    n: u64,
    a: f64,
    horizon: f64,
) -> StepFunction {
    let m = steps_for(n, horizon) as usize;
    assert!(xis.len() >= m, "need {m} increments, got {}", xis.len());
    assert!(
        etas.len() > m,
        "need {} perturbations, got {}",
        m + 1,
        etas.len()
    );
    let nf = n as f64;
    let ws = walk_scale(n);
    let ms = mark_scale(n, a);
    let mut s = 0.0;
    let mut best = ws * s + ms * etas[0];
    let initial = best;
    let mut jumps = Vec::new();
    for k in 1..=m {
        s += xis[k - 1];
        let term = ws * s + ms * etas[k];
        if term > best {
            best = term;
            jumps.push(Jump {
                time: k as f64 / nf,
                value: best,
            });
        }
    }
    StepFunction::new(initial, jumps, horizon).expect("jump times ascend within the horizon")
}

/// The scaled walk t ↦ walk_scale·S_[nt] on [0, T], coupled to
/// [`perturbed_max_path`] through the shared ξ lane.
pub fn scaled_walk_path(rng: &RngStream, cfg: &WalkConfig) -> StepFunction {
    let m = cfg.steps() as usize;
    let xis = draw_steps(rng, &cfg.xi, m);
    scaled_walk_path_from_draws(&xis, cfg.n, cfg.horizon)
}

/// [`scaled_walk_path`] from caller-supplied increments.
pub fn scaled_walk_path_from_draws(xis: &[f64], n: u64, horizon: f64) -> StepFunction {
    let m = steps_for(n, horizon) as usize;
    assert!(xis.len() >= m, "need {m} increments, got {}", xis.len());
    let nf = n as f64;
    let ws = walk_scale(n);
    let mut s = 0.0;
    let mut cur = 0.0;
    let mut jumps = Vec::new();
    for (k, xi) in xis.iter().take(m).enumerate() {
        s += xi;
        let value = ws * s;
        if value != cur {
            cur = value;
            jumps.push(Jump {
                time: (k + 1) as f64 / nf,
                value,
            });
        }
    }
    StepFunction::new(0.0, jumps, horizon).expect("jump times ascend within the horizon")
}

/// Terminal marginal of the scaled walk at t = 1: `n^{-1/2}·S_n`.
pub fn scaled_walk_terminal(rng: &RngStream, xi: &XiLaw, n: u64) -> f64 {
    let mut lane = rng.substream(XI_LANE);
    let mut s = 0.0;
    for _ in 0..n {
        s += xi.sample(&mut lane);
    }
    walk_scale(n) * s
}

/// Scaled maximum of n perturbations: `mark_scale·max_{1≤k≤n} η_k`.
pub fn scaled_eta_max(rng: &RngStream, tail: &TailLaw, n: u64) -> f64 {
    let mut lane = rng.substream(ETA_LANE);
    let mut max = f64::NEG_INFINITY;
    for _ in 0..n {
        max = max.max(tail.sample_eta(&mut lane));
    }
    mark_scale(n, tail.a()) * max
}

/// The empirical point measure of scaled perturbations: one point
/// (k/n, mark_scale·η_{k+1}) per index 0 ≤ k ≤ [nT], retaining marks above
/// `delta` (any negative `delta`, canonically [`RETAIN_ALL`], keeps every
/// index; `delta = 0` keeps exactly the positive marks).
pub fn empirical_point_measure(
    etas: &[f64],
    n: u64,
    a: f64,
    delta: f64,
    horizon: f64,
) -> Result<PointMeasure> {
    if delta.is_nan() {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            requirement: "a number or a negative retain-all sentinel",
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    let m = steps_for(n, horizon) as usize;
    if etas.len() <= m {
        return Err(Error::TooFewPerturbations {
            needed: m + 1,
            got: etas.len(),
        });
    }
    let nf = n as f64;
    let ms = mark_scale(n, a);
    let retain_all = delta < 0.0;
    let mut points = Vec::new();
    for (k, eta) in etas.iter().take(m + 1).enumerate() {
        let mark = ms * eta;
        if retain_all || mark > delta {
            points.push(MarkedPoint {
                time: k as f64 / nf,
                mark,
            });
        }
    }
    PointMeasure::new(points, horizon, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(n: u64) -> WalkConfig {
        WalkConfig::new(XiLaw::default(), TailLaw::default(), n, 1.0).unwrap()
    }

    #[test]
    fn config_validates_inputs() {
        assert!(WalkConfig::new(XiLaw::default(), TailLaw::default(), 0, 1.0).is_err());
        assert!(WalkConfig::new(XiLaw::default(), TailLaw::default(), 5, 0.0).is_err());
        assert!(WalkConfig::new(XiLaw::default(), TailLaw::default(), 5, f64::NAN).is_err());
        assert_eq!(cfg(10).steps(), 10);
        let half = WalkConfig::new(XiLaw::default(), TailLaw::default(), 10, 0.55).unwrap();
        assert_eq!(half.steps(), 5);
    }

    #[test]
    fn path_starts_at_scaled_first_perturbation() {
        let rng = RngStream::new(7, 0);
        let c = cfg(100);
        let path = perturbed_max_path(&rng, &c);
        let eta1 = draw_etas(&rng, c.tail(), 1)[0];
        assert_eq!(path.initial_value(), mark_scale(100, 2.0) * eta1);
        assert_eq!(path.eval(0.0).unwrap(), path.initial_value());
    }

    #[test]
    fn perturbed_path_is_non_decreasing_with_jumps_on_the_grid() {
        let rng = RngStream::new(8, 3);
        let c = cfg(250);
        let path = perturbed_max_path(&rng, &c);
        let mut prev = path.initial_value();
        for j in path.jumps() {
            assert!(j.value > prev);
            prev = j.value;
            let scaled = j.time * 250.0;
            assert_relative_eq!(scaled, scaled.round(), epsilon = 1e-9);
        }
        assert!(path.eval(1.0).unwrap() >= path.initial_value());
    }

    #[test]
    fn degenerate_steps_reduce_to_running_eta_max() {
        let rng = RngStream::new(9, 1);
        let xi = XiLaw::gaussian(0.0).unwrap();
        let c = WalkConfig::new(xi, TailLaw::default(), 50, 1.0).unwrap();
        let path = perturbed_max_path(&rng, &c);
        let etas = draw_etas(&rng, c.tail(), 51);
        let ms = mark_scale(50, 2.0);
        let mut running = f64::NEG_INFINITY;
        for (k, eta) in etas.iter().enumerate() {
            running = running.max(ms * eta);
            let t = k as f64 / 50.0;
            assert_eq!(path.eval(t).unwrap(), running, "mismatch at k={k}");
        }
    }

    #[test]
    fn rademacher_walk_hits_the_known_terminal_value() {
        // find a seed whose first four Rademacher draws are +1, +1, -1, +1;
        // the scaled terminal value is then 2·4^{-1/2} = 1 exactly
        let xi = XiLaw::default();
        let want = [1.0, 1.0, -1.0, 1.0];
        let seed = (0..10_000u64)
            .find(|&s| draw_steps(&RngStream::new(s, 0), &xi, 4) == want)
            .expect("a matching seed exists in range");
        let c = WalkConfig::new(xi, TailLaw::default(), 4, 1.0).unwrap();
        let path = scaled_walk_path(&RngStream::new(seed, 0), &c);
        assert_eq!(path.eval(1.0).unwrap(), 1.0);
        assert_eq!(path.eval(0.0).unwrap(), 0.0);
        assert_eq!(path.eval(0.2).unwrap(), 0.0);
    }

    #[test]
    fn scaled_walk_is_zero_before_the_first_step() {
        let rng = RngStream::new(10, 0);
        let c = cfg(8);
        let path = scaled_walk_path(&rng, &c);
        assert_eq!(path.eval(0.124).unwrap(), 0.0);
    }

    #[test]
    fn empirical_measure_scales_and_sorts_the_known_example() {
        let etas = [8.0, 2.0, 2.0];
        let nu = empirical_point_measure(&etas, 2, 2.0, 0.0, 1.0).unwrap();
        let times: Vec<f64> = nu.points().iter().map(|p| p.time).collect();
        assert_eq!(times, vec![0.0, 0.5, 1.0]);
        let ms = mark_scale(2, 2.0);
        let marks: Vec<f64> = nu.points().iter().map(|p| p.mark).collect();
        assert_eq!(marks, vec![8.0 * ms, 2.0 * ms, 2.0 * ms]);
        assert_relative_eq!(marks[0], 8.0 / 2.0f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(marks[1], 2.0f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn non_positive_marks_drop_at_zero_truncation() {
        let etas = [-1.0, 0.0, -0.5];
        let nu = empirical_point_measure(&etas, 2, 2.0, 0.0, 1.0).unwrap();
        assert!(nu.is_empty());
    }

    #[test]
    fn retain_all_keeps_every_index() {
        let etas = [-1.0, 0.0, 3.0];
        let nu = empirical_point_measure(&etas, 2, 2.0, RETAIN_ALL, 1.0).unwrap();
        assert_eq!(nu.len(), 3);
        assert!(nu.points()[0].mark < 0.0);
    }

    #[test]
    fn short_eta_slice_is_a_length_error() {
        let etas = [1.0, 1.0];
        let err = empirical_point_measure(&etas, 2, 2.0, 0.0, 1.0).unwrap_err();
        assert_eq!(
            err,
            Error::TooFewPerturbations {
                needed: 3,
                got: 2
            }
        );
    }

    #[test]
    fn box_counts_match_the_limiting_intensity() {
        // counts in [0, s]×(x, ∞] approach s·c·x^{-2}; at n = 10^4 the
        // Poisson approximation is already good to well under 3 sigma
        let tail = TailLaw::default();
        let n = 10_000u64;
        let reps = 2_000;
        let mut total = 0usize;
        for r in 0..reps {
            let rng = RngStream::new(77, r);
            let etas = draw_etas(&rng, &tail, n as usize + 1);
            let nu = empirical_point_measure(&etas, n, 2.0, 0.0, 1.0).unwrap();
            total += nu.count_box(1.0, 1.0);
        }
        let mean = total as f64 / reps as f64;
        let band = 3.0 * (1.0f64 / reps as f64).sqrt();
        assert!((mean - 1.0).abs() < band + 0.01, "mean {mean}");
    }

    #[test]
    fn eta_max_matches_measure_max_mark() {
        let tail = TailLaw::default();
        let rng = RngStream::new(123, 5);
        let n = 500u64;
        let max = scaled_eta_max(&rng, &tail, n);
        let etas = draw_etas(&rng, &tail, n as usize);
        let nu = empirical_point_measure(&etas[..], n, 2.0, 0.0, 0.998).unwrap();
        // measure covers k = 0..=499 i.e. the same 500 draws
        assert_eq!(nu.len(), 500);
        assert_eq!(nu.max_mark().unwrap(), max);
    }

    #[test]
    fn terminal_marginal_is_centered() {
        let xi = XiLaw::default();
        let reps = 4_000u64;
        let mut sum = 0.0;
        for r in 0..reps {
            sum += scaled_walk_terminal(&RngStream::new(200, r), &xi, 400);
        }
        let mean = sum / reps as f64;
        // var = 1, 3 sigma band
        assert!(mean.abs() < 3.0 / (reps as f64).sqrt() + 0.01, "mean {mean}");
    }
}
