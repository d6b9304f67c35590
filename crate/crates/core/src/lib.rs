//! Simulation library for maxima of perturbed random walks and their limit:
//! heavy-tailed samplers, the scaled walk with running perturbed maximum,
//! exact truncated sampling of the limit pair (Poisson random measure plus
//! an independent Brownian motion with closed-form segment suprema), the
//! path functional F(f, ν) with its time-change machinery, and the
//! statistical tooling needed to verify all of it.
//!
//! Randomness flows through [`rng::RngStream`], a counter-addressed
//! generator: one (seed, index) pair names a replica, lanes within it keep
//! independent consumers (walk steps, perturbations, Poisson points,
//! Brownian increments) from stealing each other's draws. Every sampler is
//! deterministic in its stream address, which makes whole experiments
//! reproducible bit for bit, independent of scheduling.

pub mod error;
pub mod functional;
pub mod limit;
pub mod measure;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod step_fn;
pub mod walk;

pub use error::{Error, Result};
pub use measure::{MarkedPoint, MeasureViolation, PointMeasure};
pub use samplers::{TailLaw, XiLaw};
pub use step_fn::{Jump, StepFunction};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
