//! The path functional F(f, ν)(t) = sup of f(τ) + y over points (τ, y) of ν
//! with τ ≤ t (and f(0) before the first point), together with the machinery
//! used to show it converges: piecewise-linear time changes pinned at matched
//! big points, an explicit Skorokhod-distance upper bound, the modulus of
//! continuity, and a deterministic demo family whose bound comes with a
//! computable majorant.
//!
//! Everything here is exact, deterministic arithmetic on step functions and
//! point measures. Suprema are computed over the finite set of jump and knot
//! times, never by grid probing: a piecewise-constant function composed with
//! a piecewise-linear time change is again piecewise constant, so evaluating
//! at the piece left endpoints attains the supremum.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{MarkedPoint, PointMeasure};
use crate::step_fn::{Jump, StepFunction};

fn check_horizons(left: f64, right: f64) -> Result<()> {
    if left != right {
        return Err(Error::HorizonMismatch { left, right });
    }
    Ok(())
}

/// F(f, ν) at a single time: the supremum of f(τ) + y over points with
/// τ ≤ t, and f(0) when no point is that early.
///
/// Marks enter through the measure, so a +∞ mark propagates to a +∞ value.
pub fn eval(f: &StepFunction, nu: &PointMeasure, t: f64) -> Result<f64> {
    check_horizons(f.horizon(), nu.horizon())?;
    if !(0.0..=f.horizon()).contains(&t) {
        return Err(Error::TimeOutOfDomain {
            time: t,
            horizon: f.horizon(),
        });
    }
    let pts = nu.points_up_to(t);
    if pts.is_empty() {
        return Ok(f.initial_value());
    }
    let mut best = f64::NEG_INFINITY;
    for p in pts {
        let term = f.eval(p.time)? + p.mark;
        if term > best {
            best = term;
        }
    }
    Ok(best)
}

/// The full càdlàg path t ↦ [`eval`]`(f, nu, t)` as a step function.
///
/// Jumps sit only at point times of ν; the path is non-decreasing from the
/// first point time on. Before the first point it is constant at f(0), per
/// the same convention as [`eval`].
pub fn path(f: &StepFunction, nu: &PointMeasure) -> Result<StepFunction> {
    check_horizons(f.horizon(), nu.horizon())?;
    let pts = nu.points();
    let mut initial = f.initial_value();
    let mut jumps: Vec<Jump> = Vec::new();
    let mut running = f64::NEG_INFINITY;
    let mut i = 0;
    while i < pts.len() {
        let t0 = pts[i].time;
        let ft = f.eval(t0)?;
        while i < pts.len() && pts[i].time == t0 {
            let term = ft + pts[i].mark;
            if term > running {
                running = term;
            }
            i += 1;
        }
        if t0 == 0.0 {
            initial = running;
        } else {
            let cur = jumps.last().map_or(initial, |j| j.value);
            if running != cur {
                jumps.push(Jump {
                    time: t0,
                    value: running,
                });
            }
        }
    }
    StepFunction::new(initial, jumps, f.horizon())
}

/// A strictly increasing piecewise-linear reparameterization of [0, T] with
/// λ(0) = 0 and λ(T) = T, stored by its knots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeChange {
    knots: Vec<(f64, f64)>,
    horizon: f64,
}

impl TimeChange {
    /// Knots as (s, λ(s)) pairs. The first must be (0, 0), the last (T, T),
    /// and both coordinates must increase strictly.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 || knots[0] != (0.0, 0.0) {
            return Err(Error::NonMonotoneKnots);
        }
        let last = knots[knots.len() - 1];
        if last.0 != last.1 || !last.0.is_finite() || !(last.0 > 0.0) {
            return Err(Error::NonMonotoneKnots);
        }
        for w in knots.windows(2) {
            let ok = w[1].0.is_finite()
                && w[1].1.is_finite()
                && w[1].0 > w[0].0
                && w[1].1 > w[0].1;
            if !ok {
                return Err(Error::NonMonotoneKnots);
            }
        }
        let horizon = last.0;
        Ok(Self { knots, horizon })
    }

    pub fn identity(horizon: f64) -> Result<Self> {
        Self::new(vec![(0.0, 0.0), (horizon, horizon)])
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// λ(s). Exact at knots; on a segment whose endpoints both lie on the
    /// diagonal the map is the identity and returns `s` itself, so identity
    /// segments introduce no rounding at all.
    pub fn eval(&self, s: f64) -> Result<f64> {
        self.map(s, false)
    }

    /// λ⁻¹(y), by the mirrored interpolation on the second coordinate.
    pub fn inverse_eval(&self, y: f64) -> Result<f64> {
        self.map(y, true)
    }

    fn map(&self, s: f64, inverse: bool) -> Result<f64> {
        let coord = |k: (f64, f64)| if inverse { (k.1, k.0) } else { k };
        if !(0.0..=self.horizon).contains(&s) {
            return Err(Error::TimeOutOfDomain {
                time: s,
                horizon: self.horizon,
            });
        }
        let idx = self.knots.partition_point(|&k| coord(k).0 < s);
        let (x1, y1) = coord(self.knots[idx]);
        if x1 == s {
            return Ok(y1);
        }
        let (x0, y0) = coord(self.knots[idx - 1]);
        if x0 == y0 && x1 == y1 {
            return Ok(s);
        }
        let y = y0 + ((s - x0) * (y1 - y0)) / (x1 - x0);
        Ok(y.max(y0).min(y1))
    }

    /// sup over [0, T] of |λ(t) − t|; attained at a knot because the
    /// difference is piecewise linear.
    pub fn max_deviation(&self) -> f64 {
        self.knots
            .iter()
            .map(|k| (k.1 - k.0).abs())
            .fold(0.0, f64::max)
    }
}

/// The time change that pins the i-th big point of `nu_n` to the i-th big
/// point of `nu_0` (marks strictly above `gamma`, in time order) and
/// interpolates linearly elsewhere.
///
/// Fails with [`Error::UnmatchedBigPoints`] while the two measures hold
/// different numbers of big points (the perturbation is still too large for
/// a matched enumeration), and with [`Error::NonMonotoneKnots`] when the
/// pairing cannot be strictly increasing (for example tied big times).
pub fn build_time_change(
    nu_n: &PointMeasure,
    nu_0: &PointMeasure,
    gamma: f64,
    horizon: f64,
) -> Result<TimeChange> {
    check_horizons(nu_n.horizon(), nu_0.horizon())?;
    check_horizons(nu_n.horizon(), horizon)?;
    if !gamma.is_finite() || !(gamma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            requirement: "finite and positive",
        });
    }
    let big_times = |nu: &PointMeasure| -> Vec<f64> {
        nu.points()
            .iter()
            .filter(|p| p.mark > gamma)
            .map(|p| p.time)
            .collect()
    };
    let from = big_times(nu_n);
    let to = big_times(nu_0);
    if from.len() != to.len() {
        return Err(Error::UnmatchedBigPoints {
            gamma,
            left: from.len(),
            right: to.len(),
        });
    }
    let mut knots = Vec::with_capacity(from.len() + 2);
    knots.push((0.0, 0.0));
    for (&x, &y) in from.iter().zip(&to) {
        if (x, y) == (0.0, 0.0) || (x, y) == (horizon, horizon) {
            continue; // already pinned by the boundary knots
        }
        knots.push((x, y));
    }
    knots.push((horizon, horizon));
    TimeChange::new(knots)
}

/// max( sup |λ(t) − t| , sup |g1(t) − g2(λ(t))| ): the variational upper
/// bound on the Skorokhod distance witnessed by this particular λ, where λ
/// carries g1's time axis onto g2's.
///
/// Both suprema are exact: the first over knots, the second over the left
/// endpoints of the pieces of t ↦ g1(t) − g2(λ(t)), namely 0, T, the jump
/// times of g1 and the λ-preimages of the jump times of g2. Jump times of
/// g2 are compared at their exact location to avoid round-tripping through
/// the interpolation.
pub fn skorokhod_upper_bound(
    g1: &StepFunction,
    g2: &StepFunction,
    lambda: &TimeChange,
) -> Result<f64> {
    check_horizons(g1.horizon(), g2.horizon())?;
    check_horizons(g1.horizon(), lambda.horizon())?;
    let horizon = g1.horizon();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(g1.jumps().len() + g2.jumps().len() + 2);
    pairs.push((0.0, 0.0));
    pairs.push((horizon, horizon));
    for j in g1.jumps() {
        pairs.push((j.time, lambda.eval(j.time)?));
    }
    for j in g2.jumps() {
        pairs.push((lambda.inverse_eval(j.time)?, j.time));
    }
    let mut best = lambda.max_deviation();
    for (t, s) in pairs {
        let d = (g1.eval(t)? - g2.eval(s)?).abs();
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

/// ω_f(ε) = sup |f(u) − f(v)| over |u − v| < ε, exact for the step
/// representation.
///
/// Two constancy segments can trade values iff the gap between them is
/// under ε, so the modulus is a sliding-window range over segment values,
/// maintained with monotone deques in linear time.
pub fn modulus_of_continuity(f: &StepFunction, eps: f64) -> Result<f64> {
    if !eps.is_finite() || !(eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            requirement: "finite and positive",
        });
    }
    let jumps = f.jumps();
    let m = jumps.len() + 1;
    let start = |k: usize| if k == 0 { 0.0 } else { jumps[k - 1].time };
    let end = |k: usize| {
        if k + 1 < m {
            jumps[k].time
        } else {
            f.horizon()
        }
    };
    let value = |k: usize| {
        if k == 0 {
            f.initial_value()
        } else {
            jumps[k - 1].value
        }
    };
    let mut window_start = 0usize;
    let mut max_q: VecDeque<usize> = VecDeque::new();
    let mut min_q: VecDeque<usize> = VecDeque::new();
    let mut omega = 0.0f64;
    for j in 0..m {
        while max_q.back().is_some_and(|&b| value(b) <= value(j)) {
            max_q.pop_back();
        }
        max_q.push_back(j);
        while min_q.back().is_some_and(|&b| value(b) >= value(j)) {
            min_q.pop_back();
        }
        min_q.push_back(j);
        // segment i stays comparable to j while end(i) > start(j) - eps
        while end(window_start) <= start(j) - eps {
            window_start += 1;
        }
        while max_q.front().is_some_and(|&fr| fr < window_start) {
            max_q.pop_front();
        }
        while min_q.front().is_some_and(|&fr| fr < window_start) {
            min_q.pop_front();
        }
        let range = value(*max_q.front().unwrap()) - value(*min_q.front().unwrap());
        if range > omega {
            omega = range;
        }
    }
    Ok(omega)
}

// Fractional parts of multiples of these fill (0,1) evenly, giving the demo
// deterministic sign patterns with no resonance against the dyadic grid.
const TIME_STRIDE: f64 = 0.618_033_988_749_894_9;
const MARK_STRIDE: f64 = 0.754_877_666_246_692_7;
// sqrt(2)/4: an irrational offset keeps partition knots off the dyadic
// point times, which the majorant construction needs.
const KNOT_OFFSET: f64 = 0.353_553_390_593_273_73;

const PIECE_FRACS: [f64; 6] = [0.0, 0.2, 0.45, 0.7, 0.85, 1.0];
const PIECE_VALS: [f64; 6] = [0.1, 0.9, -0.4, 0.6, -0.2, 0.3];

/// Shape of the deterministic convergence demo.
///
/// The reference pair is a fixed polygon sampled on a fine grid and a dyadic
/// point measure with summable positive marks; the n-th instance rounds the
/// polygon values to a 1/n staircase and jitters the point times and marks
/// by O(1/n). With the default jitters the construction keeps times sorted
/// and every mark above `gamma` for every n ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemoParams {
    pub horizon: f64,
    /// Vertical scale of the polygon.
    pub amplitude: f64,
    /// Sampling resolution of the polygon (number of grid cells).
    pub grid: u32,
    /// Dyadic depth of the reference measure: 2^levels − 1 points.
    pub levels: u32,
    /// Mark of the top-level point; level ℓ marks are this over 2^ℓ.
    pub mark_scale: f64,
    /// Time jitter amplitude at n = 1, in units of a quarter dyadic gap.
    pub time_jitter: f64,
    /// Relative mark jitter at n = 1.
    pub mark_jitter: f64,
    /// Threshold separating matched big points from the small remainder.
    pub gamma: f64,
}

impl Default for DemoParams {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            amplitude: 1.0,
            grid: 2048,
            levels: 6,
            mark_scale: 1.0,
            time_jitter: 1.0,
            mark_jitter: 0.05,
            gamma: 0.01,
        }
    }
}

impl DemoParams {
    fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool, &'static str); 8] = [
            (
                "horizon",
                self.horizon,
                self.horizon.is_finite() && self.horizon > 0.0,
                "finite and positive",
            ),
            (
                "amplitude",
                self.amplitude,
                self.amplitude.is_finite() && self.amplitude >= 0.0,
                "finite and non-negative",
            ),
            ("grid", f64::from(self.grid), self.grid >= 2, "at least 2"),
            (
                "levels",
                f64::from(self.levels),
                (1..=30).contains(&self.levels),
                "between 1 and 30",
            ),
            (
                "mark_scale",
                self.mark_scale,
                self.mark_scale.is_finite() && self.mark_scale > 0.0,
                "finite and positive",
            ),
            (
                "time_jitter",
                self.time_jitter,
                (0.0..=1.0).contains(&self.time_jitter),
                "in [0, 1] so jittered times stay sorted",
            ),
            (
                "mark_jitter",
                self.mark_jitter,
                (0.0..1.0).contains(&self.mark_jitter),
                "in [0, 1) so marks stay positive",
            ),
            (
                "gamma",
                self.gamma,
                self.gamma.is_finite() && self.gamma > 0.0,
                "finite and positive",
            ),
        ];
        for (name, value, ok, requirement) in checks {
            if !ok {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    requirement,
                });
            }
        }
        Ok(())
    }

    fn polygon(&self, t: f64) -> f64 {
        let x = (t / self.horizon).clamp(0.0, 1.0);
        let mut k = PIECE_FRACS.len() - 2;
        for i in 0..PIECE_FRACS.len() - 1 {
            if x <= PIECE_FRACS[i + 1] {
                k = i;
                break;
            }
        }
        let u = (x - PIECE_FRACS[k]) / (PIECE_FRACS[k + 1] - PIECE_FRACS[k]);
        self.amplitude * (PIECE_VALS[k] + u * (PIECE_VALS[k + 1] - PIECE_VALS[k]))
    }
}

/// One step of the demo family: the reference pair and its n-th perturbation.
#[derive(Clone, Debug, PartialEq)]
pub struct DemoInstance {
    pub n: u64,
    pub params: DemoParams,
    pub f_0: StepFunction,
    pub f_n: StepFunction,
    pub nu_0: PointMeasure,
    pub nu_n: PointMeasure,
}

/// Build the demo instance at step n; fully deterministic in (n, params).
pub fn continuity_demo_instance(n: u64, params: &DemoParams) -> Result<DemoInstance> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    let nf = n as f64;
    let grid = f64::from(params.grid);
    let round_n = |v: f64| (v * nf).round() / nf;

    let init_0 = params.polygon(0.0);
    let init_n = round_n(init_0);
    let mut jumps_0 = Vec::new();
    let mut jumps_n = Vec::new();
    let mut prev_0 = init_0;
    let mut prev_n = init_n;
    for g in 1..=params.grid {
        let time = params.horizon * (f64::from(g) / grid);
        let v0 = params.polygon(time);
        if v0 != prev_0 {
            jumps_0.push(Jump { time, value: v0 });
            prev_0 = v0;
        }
        let vn = round_n(v0);
        if vn != prev_n {
            jumps_n.push(Jump { time, value: vn });
            prev_n = vn;
        }
    }
    let f_0 = StepFunction::new(init_0, jumps_0, params.horizon)?;
    let f_n = StepFunction::new(init_n, jumps_n, params.horizon)?;

    let mut pts_0: Vec<MarkedPoint> = Vec::new();
    for level in 1..=params.levels {
        let denom = (1u64 << level) as f64;
        let mark = params.mark_scale / denom;
        for i in 1..=(1u64 << (level - 1)) {
            pts_0.push(MarkedPoint {
                time: params.horizon * ((2 * i - 1) as f64 / denom),
                mark,
            });
        }
    }
    pts_0.sort_by(|a, b| a.time.total_cmp(&b.time));

    // Times move rightward only, by under a quarter of the deepest dyadic
    // gap, so order is preserved. One-sided jitter matters: the dyadic times
    // sit on sampling-cell boundaries of f_0, and a leftward nudge would
    // cross into the previous cell and pick up a fixed resolution error
    // instead of one that vanishes with n.
    let time_amp = params.time_jitter * params.horizon / (1u64 << (params.levels + 2)) as f64;
    let pts_n: Vec<MarkedPoint> = pts_0
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let dir = (((idx + 1) as f64) * TIME_STRIDE).fract();
            let frac = 2.0 * (((idx + 1) as f64) * MARK_STRIDE).fract() - 1.0;
            MarkedPoint {
                time: p.time + (time_amp / nf) * dir,
                mark: p.mark * (1.0 + (params.mark_jitter / nf) * frac),
            }
        })
        .collect();

    let nu_0 = PointMeasure::new(pts_0, params.horizon, 0.0)?;
    let nu_n = PointMeasure::new(pts_n, params.horizon, 0.0)?;
    Ok(DemoInstance {
        n,
        params: *params,
        f_0,
        f_n,
        nu_0,
        nu_n,
    })
}

/// Partition of [0, T] used by the majorant: cell width about 3.5 dyadic
/// gaps (so every open cell must contain a big point), interior knots at an
/// irrational offset (so no knot collides with a point time).
fn demo_partition(params: &DemoParams) -> Vec<f64> {
    let gap = params.horizon / (1u64 << params.levels) as f64;
    let cells = ((params.horizon / (3.5 * gap)).floor() as usize).max(1);
    let base = params.horizon / cells as f64;
    let mut knots = Vec::with_capacity(cells + 1);
    knots.push(0.0);
    for k in 1..cells {
        knots.push((k as f64 + KNOT_OFFSET) * base);
    }
    knots.push(params.horizon);
    knots
}

/// Verdict of the hypotheses the majorant construction relies on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DemoCheck {
    /// Every reference mark is strictly positive.
    pub marks_positive: bool,
    /// The reference measure has no atom at time 0.
    pub no_atom_at_zero: bool,
    /// Every open partition cell contains a mark-above-gamma point.
    pub cells_occupied: bool,
    /// No interior partition knot sits exactly on a point time.
    pub knots_clear: bool,
    /// Largest consecutive value change of the sampled polygon, the
    /// resolution proxy for its continuity.
    pub max_f0_increment: f64,
    /// `max_f0_increment` is within the expected slope-over-grid budget.
    pub f0_fine: bool,
    pub pass: bool,
}

pub fn check_demo_hypotheses(inst: &DemoInstance) -> DemoCheck {
    let marks_positive = inst.nu_0.points().iter().all(|p| p.mark > 0.0);
    let no_atom_at_zero = inst.nu_0.points().iter().all(|p| p.time > 0.0);
    let knots = demo_partition(&inst.params);
    let big_times: Vec<f64> = inst
        .nu_0
        .points()
        .iter()
        .filter(|p| p.mark > inst.params.gamma)
        .map(|p| p.time)
        .collect();
    let cells_occupied = knots
        .windows(2)
        .all(|w| big_times.iter().any(|&t| t > w[0] && t < w[1]));
    let knots_clear = knots[1..knots.len() - 1]
        .iter()
        .all(|s| inst.nu_0.points().iter().all(|p| p.time != *s));
    let mut max_f0_increment = 0.0f64;
    let mut prev = inst.f_0.initial_value();
    for j in inst.f_0.jumps() {
        max_f0_increment = max_f0_increment.max((j.value - prev).abs());
        prev = j.value;
    }
    let f0_fine = max_f0_increment <= 8.0 * inst.params.amplitude / f64::from(inst.params.grid);
    let pass = marks_positive && no_atom_at_zero && cells_occupied && knots_clear && f0_fine;
    DemoCheck {
        marks_positive,
        no_atom_at_zero,
        cells_occupied,
        knots_clear,
        max_f0_increment,
        f0_fine,
        pass,
    }
}

/// The computed Skorokhod bound of a demo instance next to the analytic
/// majorant that must dominate it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MajorantBreakdown {
    pub n: u64,
    /// Largest partition cell width |α|.
    pub mesh: f64,
    pub gamma: f64,
    /// sup |f_n − f_0|.
    pub path_error: f64,
    /// Σ over matched big points of |f_0(τ̄ᵢ') − f_0(τ̄ᵢ)| + |ȳᵢ' − ȳᵢ|.
    pub matched_point_error: f64,
    /// ω_{f_0}(3·mesh).
    pub modulus_term: f64,
    /// sup |λ(t) − t| of the matching time change.
    pub lambda_deviation: f64,
    /// skorokhod_upper_bound(F(f_n, ν_n), F(f_0, ν_0), λ).
    pub bound: f64,
    /// path_error + matched_point_error + 2(modulus_term + gamma)
    /// + lambda_deviation.
    pub majorant: f64,
}

/// Evaluate the bound and its majorant on one demo instance.
///
/// Refuses instances whose reference pair fails [`check_demo_hypotheses`],
/// since the majorant argument does not apply there.
pub fn continuity_majorant(inst: &DemoInstance) -> Result<MajorantBreakdown> {
    let check = check_demo_hypotheses(inst);
    if !check.pass {
        return Err(Error::HypothesesViolated(format!(
            "marks_positive={} no_atom_at_zero={} cells_occupied={} knots_clear={} f0_fine={}",
            check.marks_positive,
            check.no_atom_at_zero,
            check.cells_occupied,
            check.knots_clear,
            check.f0_fine
        )));
    }
    let gamma = inst.params.gamma;
    let horizon = inst.params.horizon;
    let lambda = build_time_change(&inst.nu_n, &inst.nu_0, gamma, horizon)?;
    let g_n = path(&inst.f_n, &inst.nu_n)?;
    let g_0 = path(&inst.f_0, &inst.nu_0)?;
    let bound = skorokhod_upper_bound(&g_n, &g_0, &lambda)?;
    let path_error = inst.f_n.uniform_distance(&inst.f_0)?;

    let big = |nu: &PointMeasure| -> Vec<MarkedPoint> {
        nu.points()
            .iter()
            .copied()
            .filter(|p| p.mark > gamma)
            .collect()
    };
    let mut matched_point_error = 0.0;
    for (pn, p0) in big(&inst.nu_n).iter().zip(&big(&inst.nu_0)) {
        matched_point_error += (inst.f_0.eval(pn.time)? - inst.f_0.eval(p0.time)?).abs()
            + (pn.mark - p0.mark).abs();
    }

    let knots = demo_partition(&inst.params);
    let mesh = knots.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let modulus_term = modulus_of_continuity(&inst.f_0, 3.0 * mesh)?;
    let lambda_deviation = lambda.max_deviation();
    let majorant =
        path_error + matched_point_error + 2.0 * (modulus_term + gamma) + lambda_deviation;
    Ok(MajorantBreakdown {
        n: inst.n,
        mesh,
        gamma,
        path_error,
        matched_point_error,
        modulus_term,
        lambda_deviation,
        bound,
        majorant,
    })
}
