//! Finite marked point measures on `[0, horizon]`.
//!
//! A measure is a time-sorted list of `(time, mark)` atoms together with the
//! truncation level it was generated at: marks at or below `truncation` may
//! have been discarded by the generator. `truncation = 0` means the listing
//! is exhaustive over positive marks; a negative truncation (canonically
//! `f64::NEG_INFINITY`) means every atom was retained, whatever its sign.
//! Marks may be `+inf`; maxima over marks then follow extended-real rules.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

/// One atom of a point measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub time: f64,
    pub mark: f64,
}

/// Why a point list fails to be a valid measure.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum MeasureViolation {
    #[error("horizon {horizon} must be finite and > 0")]
    BadHorizon { horizon: f64 },
    #[error("truncation must not be NaN")]
    NanTruncation,
    #[error("point {index} has non-finite time {time}")]
    NonFiniteTime { index: usize, time: f64 },
    #[error("point {index} time {time} outside [0, {horizon}]")]
    TimeOutOfRange { index: usize, time: f64, horizon: f64 },
    #[error("points out of order at index {index}")]
    UnsortedTimes { index: usize },
    #[error("point {index} has invalid mark {mark} (NaN or -inf)")]
    BadMark { index: usize, mark: f64 },
}

/// A finite, time-sorted marked point measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMeasure {
    points: Vec<MarkedPoint>,
    horizon: f64,
    truncation: f64,
}

/// Checks the invariants a `PointMeasure` maintains: valid horizon and
/// truncation, times finite, sorted (ties allowed, order stable) and inside
/// `[0, horizon]`, marks anything but NaN or `-inf`.
pub fn validate_measure(
    points: &[MarkedPoint],
    horizon: f64,
    truncation: f64,
) -> std::result::Result<(), MeasureViolation> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(MeasureViolation::BadHorizon { horizon });
    }
    if truncation.is_nan() {
        return Err(MeasureViolation::NanTruncation);
    }
    let mut prev = 0.0_f64;
    for (index, p) in points.iter().enumerate() {
        if !p.time.is_finite() {
            return Err(MeasureViolation::NonFiniteTime {
                index,
                time: p.time,
            });
        }
        if p.time < 0.0 || p.time > horizon {
            return Err(MeasureViolation::TimeOutOfRange {
                index,
                time: p.time,
                horizon,
            });
        }
        if p.time < prev {
            return Err(MeasureViolation::UnsortedTimes { index });
        }
        if p.mark.is_nan() || p.mark == f64::NEG_INFINITY {
            return Err(MeasureViolation::BadMark {
                index,
                mark: p.mark,
            });
        }
        prev = p.time;
    }
    Ok(())
}

impl PointMeasure {
    pub fn new(points: Vec<MarkedPoint>, horizon: f64, truncation: f64) -> Result<Self> {
        validate_measure(&points, horizon, truncation).map_err(Error::Measure)?;
        Ok(Self {
            points,
            horizon,
            truncation,
        })
    }

    pub fn empty(horizon: f64, truncation: f64) -> Result<Self> {
        Self::new(Vec::new(), horizon, truncation)
    }

    pub fn points(&self) -> &[MarkedPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// Points with `time <= t`, as a prefix slice.
    pub fn points_up_to(&self, t: f64) -> &[MarkedPoint] {
        let idx = self.points.partition_point(|p| p.time <= t);
        &self.points[..idx]
    }

    /// Number of atoms in the box `[0, time_le] x (mark_gt, +inf]`.
    pub fn count_box(&self, time_le: f64, mark_gt: f64) -> usize {
        self.points_up_to(time_le)
            .iter()
            .filter(|p| p.mark > mark_gt)
            .count()
    }

    /// Largest mark, `None` on an empty measure.
    pub fn max_mark(&self) -> Option<f64> {
        self.points
            .iter()
            .map(|p| p.mark)
            .fold(None, |acc: Option<f64>, m| {
                Some(acc.map_or(m, |a| a.max(m)))
            })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("point measure serializes")
    }

    /// Two-column CSV, one row per atom in time order.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time,mark")?;
        for p in &self.points {
            writeln!(w, "{},{}", p.time, p.mark)?;
        }
        Ok(())
    }
}
