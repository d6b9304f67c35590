//! Right-continuous piecewise-constant functions on `[0, horizon]`.
//!
//! Paths produced by the simulators (running maxima, scaled walks, limit
//! paths) are all of this shape: a starting value plus finitely many jumps.
//! Only change points are stored, never a dense grid.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single change point: the function takes `value` at `time` and holds it
/// until the next jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub value: f64,
}

/// A cadlag step function on `[0, horizon]`.
///
/// The function equals `initial_value` on `[0, t_1)` and the most recent jump
/// value afterwards; jump times are strictly increasing and lie in
/// `(0, horizon]`. All values are finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    initial_value: f64,
    jumps: Vec<Jump>,
    horizon: f64,
}

impl StepFunction {
    pub fn new(initial_value: f64, jumps: Vec<Jump>, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: horizon,
                requirement: "finite and > 0",
            });
        }
        if !initial_value.is_finite() {
            return Err(Error::Step("initial value must be finite"));
        }
        let mut prev = 0.0_f64;
        for j in &jumps {
            if !j.time.is_finite() || !j.value.is_finite() {
                return Err(Error::Step("jump times and values must be finite"));
            }
            if j.time <= prev {
                return Err(Error::Step("jump times must be strictly increasing and > 0"));
            }
            if j.time > horizon {
                return Err(Error::Step("jump time beyond horizon"));
            }
            prev = j.time;
        }
        Ok(Self {
            initial_value,
            jumps,
            horizon,
        })
    }

    /// The constant function `t -> value`.
    pub fn constant(value: f64, horizon: f64) -> Result<Self> {
        Self::new(value, Vec::new(), horizon)
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Value at time `t`; the jump at exactly `t`, if any, is included.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::TimeOutOfDomain {
                time: t,
                horizon: self.horizon,
            });
        }
        let idx = self.jumps.partition_point(|j| j.time <= t);
        Ok(if idx == 0 {
            self.initial_value
        } else {
            self.jumps[idx - 1].value
        })
    }

    /// Value at the horizon.
    pub fn terminal(&self) -> f64 {
        self.jumps.last().map_or(self.initial_value, |j| j.value)
    }

    /// Largest absolute difference to `other` over the shared domain.
    ///
    /// Exact: both functions are constant between the merged jump times.
    pub fn uniform_distance(&self, other: &StepFunction) -> Result<f64> {
        if self.horizon != other.horizon {
            return Err(Error::HorizonMismatch {
                left: self.horizon,
                right: other.horizon,
            });
        }
        let mut a = self.initial_value;
        let mut b = other.initial_value;
        let mut best = (a - b).abs();
        let (mut i, mut j) = (0, 0);
        while i < self.jumps.len() || j < other.jumps.len() {
            let ta = self.jumps.get(i).map_or(f64::INFINITY, |x| x.time);
            let tb = other.jumps.get(j).map_or(f64::INFINITY, |x| x.time);
            let t = ta.min(tb);
            while i < self.jumps.len() && self.jumps[i].time == t {
                a = self.jumps[i].value;
                i += 1;
            }
            while j < other.jumps.len() && other.jumps[j].time == t {
                b = other.jumps[j].value;
                j += 1;
            }
            best = best.max((a - b).abs());
        }
        Ok(best)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("step function serializes")
    }

    /// Two-column CSV: a `t=0` row with the initial value, then one row per
    /// jump.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,value")?;
        writeln!(w, "0,{}", self.initial_value)?;
        for j in &self.jumps {
            writeln!(w, "{},{}", j.time, j.value)?;
        }
        Ok(())
    }
}
