//! Exact inverse-transform samplers: walk increments, heavy-tailed
//! perturbations, Fréchet draws, and Brownian-bridge segment maxima.
//!
//! Every law here is sampled exactly (no asymptotic approximation), so
//! distributional tests downstream can use sharp tolerances.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use rand::RngCore;
use serde::{Deserialize, Serialize};

/// `x^{1/a}` with an exact square-root fast path for the main case `a = 2`.
///
/// Used by every power-law inversion in the crate so that identical inputs
/// produce identical bits no matter which module did the computation.
pub(crate) fn root_a(x: f64, a: f64) -> f64 {
    if a == 2.0 {
        x.sqrt()
    } else {
        x.powf(1.0 / a)
    }
}

/// Which zero-mean increment law drives the walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    /// ±v with equal probability.
    Rademacher,
    /// Uniform on `[-√3·v, √3·v]`.
    UniformCentered,
    /// Normal with standard deviation v.
    Gaussian,
}

/// Law of a single walk increment ξ: mean exactly 0, variance exactly v².
///
/// `v = 0` is allowed and degenerates every variant to the constant 0, which
/// is handy for isolating the perturbation part of the walk in tests.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiLaw {
    kind: StepKind,
    v: f64,
}

impl XiLaw {
    pub fn new(kind: StepKind, v: f64) -> Result<Self> {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter {
                name: "v",
                value: v,
                requirement: "finite and non-negative",
            });
        }
        Ok(Self { kind, v })
    }

    pub fn rademacher(v: f64) -> Result<Self> {
        Self::new(StepKind::Rademacher, v)
    }

    pub fn uniform_centered(v: f64) -> Result<Self> {
        Self::new(StepKind::UniformCentered, v)
    }

    pub fn gaussian(v: f64) -> Result<Self> {
        Self::new(StepKind::Gaussian, v)
    }

    pub fn kind(&self) -> StepKind {
        self.kind
    }

    /// Standard deviation of one increment.
    pub fn v(&self) -> f64 {
        self.v
    }

    /// One increment draw.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self.kind {
            StepKind::Rademacher => {
                if rng.next_u64() >> 63 == 0 {
                    self.v
                } else {
                    -self.v
                }
            }
            StepKind::UniformCentered => {
                let u = rng.uniform_oc();
                (2.0 * u - 1.0) * SQRT_3 * self.v
            }
            StepKind::Gaussian => self.v * rng.standard_normal(),
        }
    }
}

impl Default for XiLaw {
    /// Rademacher with v = 1: the cheapest law with the exact moments.
    fn default() -> Self {
        Self {
            kind: StepKind::Rademacher,
            v: 1.0,
        }
    }
}

const SQRT_3: f64 = 1.7320508075688772;

/// Power-law tail `P{η > x} = min(1, c·x^{-a})`.
///
/// The law is exact, not merely tail-equivalent: the support is
/// `[c^{1/a}, ∞)` and the survival function equals `c·x^{-a}` everywhere it
/// is below 1. The same pair (c, a) also parameterizes the mean measure of
/// the Poisson limit, `μ((x, ∞]) = c·x^{-a}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailLaw {
    c: f64,
    a: f64,
}

impl TailLaw {
    pub fn new(c: f64, a: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter {
                name: "c",
                value: c,
                requirement: "finite and positive",
            });
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
                requirement: "finite and positive",
            });
        }
        Ok(Self { c, a })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `c·x^{-a}` for x > 0, without the cap at 1.
    pub fn tail_mass(&self, x: f64) -> f64 {
        if self.a == 2.0 {
            self.c / (x * x)
        } else {
            self.c * x.powf(-self.a)
        }
    }

    /// `P{η > x}`; equals 1 for every x at or below the support minimum.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            self.tail_mass(x).min(1.0)
        }
    }

    /// Smallest value η can take, `c^{1/a}`.
    pub fn lower_support(&self) -> f64 {
        root_a(self.c, self.a)
    }

    /// Inverse transform at a uniform `u ∈ (0, 1]`: `η = (c/u)^{1/a}`.
    pub fn eta_from_uniform(&self, u: f64) -> f64 {
        root_a(self.c / u, self.a)
    }

    /// One perturbation draw.
    pub fn sample_eta(&self, rng: &mut RngStream) -> f64 {
        self.eta_from_uniform(rng.uniform_oc())
    }

    /// Fréchet inverse transform at a standard exponential e: `(c/e)^{1/a}`.
    ///
    /// The Fréchet CDF `exp(-c·x^{-a})` is the void probability of the
    /// Poisson measure above level x on a unit time window, which is where
    /// this law enters the limit analysis.
    pub fn frechet_from_exponential(&self, e: f64) -> f64 {
        root_a(self.c / e, self.a)
    }

    /// One Fréchet draw.
    pub fn sample_frechet(&self, rng: &mut RngStream) -> f64 {
        self.frechet_from_exponential(rng.standard_exponential())
    }
}

impl Default for TailLaw {
    /// The main case: c = 1, a = 2.
    fn default() -> Self {
        Self { c: 1.0, a: 2.0 }
    }
}

/// Maximum of a Brownian motion with variance parameter v² on a segment of
/// length `dt`, conditioned on endpoint values, from one uniform draw.
///
/// Reflection principle: for m ≥ max(left, right),
/// `P{M > m} = exp(-2(m-left)(m-right)/(v²·dt))`; inverting at tail
/// probability `u` solves the quadratic `(m-left)(m-right) = q` with
/// `q = -(v²·dt/2)·ln u`. The result is clamped to the endpoint maximum so
/// the support constraint `M ≥ max(left, right)` holds exactly; `dt = 0` or
/// `u = 1` therefore collapse to `max(left, right)`.
pub fn bridge_max_from_uniform(left: f64, right: f64, dt: f64, v: f64, u: f64) -> f64 {
    let q = -(v * v * dt * 0.5) * u.ln();
    let d = left - right;
    let m = 0.5 * ((left + right) + (d * d + 4.0 * q).sqrt());
    m.max(left).max(right)
}

/// Exact draw of the conditioned segment maximum; see
/// [`bridge_max_from_uniform`] for the law.
pub fn bridge_max_sample(
    rng: &mut RngStream,
    left: f64,
    right: f64,
    dt: f64,
    v: f64,
) -> Result<f64> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            requirement: "finite and positive",
        });
    }
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter {
            name: "v",
            value: v,
            requirement: "finite and positive",
        });
    }
    Ok(bridge_max_from_uniform(left, right, dt, v, rng.uniform_oc()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rademacher_is_a_two_point_law() {
        let law = XiLaw::rademacher(1.0).unwrap();
        let mut rng = RngStream::new(11, 0);
        let mut seen_pos = false;
        let mut seen_neg = false;
        for _ in 0..1000 {
            let x = law.sample(&mut rng);
            assert!(x == 1.0 || x == -1.0, "unexpected value {x}");
            seen_pos |= x == 1.0;
            seen_neg |= x == -1.0;
        }
        assert!(seen_pos && seen_neg);
    }

    #[test]
    fn increment_laws_have_the_declared_moments() {
        let laws = [
            XiLaw::rademacher(2.0).unwrap(),
            XiLaw::uniform_centered(1.5).unwrap(),
            XiLaw::gaussian(1.0).unwrap(),
        ];
        let n = 1_000_000;
        for (i, law) in laws.iter().enumerate() {
            let mut rng = RngStream::new(21, i as u64);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let x = law.sample(&mut rng);
                sum += x;
                sum_sq += x * x;
            }
            let mean = sum / n as f64;
            let var = sum_sq / n as f64 - mean * mean;
            // CLT 3 sigma: 3·v/√n ≤ 0.006 for v ≤ 2
            assert!(mean.abs() < 0.01, "{:?}: mean {mean}", law.kind());
            let v2 = law.v() * law.v();
            // sample-variance 3 sigma is below 0.05 for all three laws
            assert!((var - v2).abs() < 0.05, "{:?}: var {var} vs {v2}", law.kind());
        }
    }

    #[test]
    fn zero_v_degenerates_to_constant_zero() {
        let law = XiLaw::gaussian(0.0).unwrap();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..100 {
            assert_eq!(law.sample(&mut rng), 0.0);
        }
    }

    #[test]
    fn xi_law_rejects_bad_scale() {
        assert!(XiLaw::rademacher(-1.0).is_err());
        assert!(XiLaw::gaussian(f64::NAN).is_err());
        assert!(XiLaw::uniform_centered(f64::INFINITY).is_err());
    }

    #[test]
    fn eta_inverse_transform_known_points() {
        let law = TailLaw::new(1.0, 2.0).unwrap();
        assert_eq!(law.eta_from_uniform(1.0), 1.0);
        assert_eq!(law.eta_from_uniform(0.25), 2.0);
        assert_eq!(law.lower_support(), 1.0);
    }

    #[test]
    fn tail_law_rejects_bad_parameters() {
        assert!(TailLaw::new(0.0, 2.0).is_err());
        assert!(TailLaw::new(1.0, 0.0).is_err());
        assert!(TailLaw::new(f64::NAN, 2.0).is_err());
        assert!(TailLaw::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn eta_empirical_tail_matches_survival() {
        let law = TailLaw::new(1.0, 2.0).unwrap();
        let mut rng = RngStream::new(31, 0);
        let n = 1_000_000;
        let mut exceed = [0u32; 3];
        let thresholds = [2.0, 5.0, 10.0];
        let mut min_seen = f64::INFINITY;
        for _ in 0..n {
            let x = law.sample_eta(&mut rng);
            min_seen = min_seen.min(x);
            for (cnt, &thr) in exceed.iter_mut().zip(&thresholds) {
                if x > thr {
                    *cnt += 1;
                }
            }
        }
        assert!(min_seen >= law.lower_support());
        for (&cnt, &thr) in exceed.iter().zip(&thresholds) {
            let p = law.survival(thr);
            let frac = cnt as f64 / n as f64;
            let band = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (frac - p).abs() < band,
                "tail at {thr}: {frac} vs {p} (band {band})"
            );
        }
    }

    #[test]
    fn frechet_known_points_median_and_cdf() {
        let law = TailLaw::new(1.0, 2.0).unwrap();
        assert_eq!(law.frechet_from_exponential(1.0), 1.0);

        let mut rng = RngStream::new(41, 0);
        let n = 1_000_000;
        let mut draws = Vec::with_capacity(n);
        let mut at_most_2 = 0u32;
        for _ in 0..n {
            let x = law.sample_frechet(&mut rng);
            if x <= 2.0 {
                at_most_2 += 1;
            }
            draws.push(x);
        }
        // median solves exp(-x^{-2}) = 1/2
        let median = stats::quantiles(&draws, &[0.5]).unwrap()[0];
        let expected = (1.0 / std::f64::consts::LN_2).sqrt();
        assert!((median - expected).abs() < 0.01, "median {median}");
        // CDF at 2 is exp(-1/4); binomial 3 sigma at 10^6 is 0.00125
        let cdf2 = at_most_2 as f64 / n as f64;
        assert!((cdf2 - (-0.25f64).exp()).abs() < 0.002, "cdf(2) {cdf2}");
    }

    #[test]
    fn frechet_passes_one_sample_ks_at_the_one_percent_level() {
        let law = TailLaw::new(1.0, 2.0).unwrap();
        let mut rng = RngStream::new(43, 0);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| law.sample_frechet(&mut rng)).collect();
        let report = stats::ks_one_sample(&draws, |x| stats::frechet_cdf(x, &law)).unwrap();
        let bound = 1.63 / (n as f64).sqrt();
        assert!(
            report.statistic < bound,
            "ks {} vs {bound}",
            report.statistic
        );
    }

    #[test]
    fn bridge_max_tail_matches_reflection_formula() {
        // endpoints 0, dt = 1, v = 1: P{M > 1} = exp(-2)
        let mut rng = RngStream::new(53, 0);
        let n = 1_000_000;
        let mut exceed = 0u32;
        for _ in 0..n {
            let m = bridge_max_sample(&mut rng, 0.0, 0.0, 1.0, 1.0).unwrap();
            assert!(m >= 0.0);
            if m > 1.0 {
                exceed += 1;
            }
        }
        let frac = exceed as f64 / n as f64;
        let target = (-2.0f64).exp();
        assert!((frac - target).abs() < 0.001, "P(M>1) {frac} vs {target}");
    }

    #[test]
    fn bridge_max_agrees_with_discrete_grid_oracle() {
        // Independent oracle: a 2048-step discrete bridge built from a plain
        // random-walk construction. Discrete monitoring can only miss the
        // continuous maximum, so the empirical exceedance probability must sit
        // slightly below exp(-2); the expected deficit at this grid is about
        // 0.007 (barrier-shift correction 0.5826·√dt).
        let steps = 2048;
        let reps = 30_000;
        let dt = 1.0 / steps as f64;
        let sqrt_dt = dt.sqrt();
        let mut rng = RngStream::new(57, 0);
        let mut exceed = 0u32;
        let mut w = vec![0.0f64; steps + 1];
        for _ in 0..reps {
            let mut acc = 0.0;
            for slot in w.iter_mut().skip(1) {
                acc += sqrt_dt * rng.standard_normal();
                *slot = acc;
            }
            let w_end = w[steps];
            let mut max = 0.0f64;
            for (i, &wi) in w.iter().enumerate() {
                let b = wi - (i as f64 / steps as f64) * w_end;
                max = max.max(b);
            }
            if max > 1.0 {
                exceed += 1;
            }
        }
        let frac = exceed as f64 / reps as f64;
        let target = (-2.0f64).exp();
        // one-sided deficit up to 0.012 plus 3 sigma sampling noise 0.006
        assert!(
            frac > target - 0.018 && frac < target + 0.006,
            "grid oracle P(M>1) {frac} vs {target}"
        );
    }

    #[test]
    fn bridge_max_sample_rejects_bad_segment() {
        let mut rng = RngStream::new(5, 0);
        assert!(bridge_max_sample(&mut rng, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(bridge_max_sample(&mut rng, 0.0, 1.0, -0.5, 1.0).is_err());
        assert!(bridge_max_sample(&mut rng, 0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bridge_max_collapses_without_wiggle_room() {
        assert_eq!(bridge_max_from_uniform(1.0, 3.0, 0.0, 1.0, 0.5), 3.0);
        assert_eq!(bridge_max_from_uniform(-2.0, -1.0, 1.0, 1.0, 1.0), -1.0);
    }

    #[test]
    fn frechet_median_formula_matches_quantile_estimate() {
        // quadrature-free sanity anchor for the median constant used above
        let expected = (1.0 / std::f64::consts::LN_2).sqrt();
        assert_relative_eq!((-expected.powi(-2)).exp(), 0.5, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn bridge_max_dominates_endpoints(
            left in -5.0f64..5.0,
            right in -5.0f64..5.0,
            dt in 0.0f64..4.0,
            v in 0.1f64..3.0,
            u in 1e-9f64..=1.0,
        ) {
            let m = bridge_max_from_uniform(left, right, dt, v, u);
            prop_assert!(m >= left.max(right));
            prop_assert!(m.is_finite());
        }

        #[test]
        fn bridge_max_is_symmetric_in_endpoints(
            left in -5.0f64..5.0,
            right in -5.0f64..5.0,
            dt in 0.0f64..4.0,
            v in 0.1f64..3.0,
            u in 1e-9f64..=1.0,
        ) {
            let a = bridge_max_from_uniform(left, right, dt, v, u);
            let b = bridge_max_from_uniform(right, left, dt, v, u);
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn eta_draws_stay_on_support(c in 0.1f64..10.0, a in 0.5f64..4.0, u in 1e-12f64..=1.0) {
            let law = TailLaw::new(c, a).unwrap();
            let x = law.eta_from_uniform(u);
            prop_assert!(x >= law.lower_support() * (1.0 - 1e-12));
            // round trip: survival at the draw recovers u where the tail is below 1
            if u < 1.0 {
                prop_assert!((law.survival(x) - u).abs() < 1e-9 * u.max(1e-3));
            }
        }
    }
}
