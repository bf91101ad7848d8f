//! Parameter domains (products of intervals) and segment interpolation.

use std::fmt;

use crate::error::{Error, Result};

/// One end of an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Unbounded,
    Open(f64),
    Closed(f64),
}

impl Bound {
    fn value(&self) -> Option<f64> {
        match *self {
            Bound::Unbounded => None,
            Bound::Open(v) | Bound::Closed(v) => Some(v),
        }
    }
}

/// A real interval, possibly unbounded on either side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: Bound,
    pub upper: Bound,
}

impl Interval {
    pub const REALS: Interval = Interval {
        lower: Bound::Unbounded,
        upper: Bound::Unbounded,
    };

    pub fn new(lower: Bound, upper: Bound) -> Result<Self> {
        if let (Some(lo), Some(hi)) = (lower.value(), upper.value()) {
            if !(lo < hi) {
                return Err(Error::DegenerateBox(format!(
                    "lower bound {lo} is not below upper bound {hi}"
                )));
            }
        }
        for v in [lower.value(), upper.value()].into_iter().flatten() {
            if !v.is_finite() {
                return Err(Error::DegenerateBox(format!("non-finite bound {v}")));
            }
        }
        Ok(Interval { lower, upper })
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Interval::new(Bound::Closed(lo), Bound::Closed(hi))
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Interval::new(Bound::Open(lo), Bound::Open(hi))
    }

    /// `(lo, ∞)`.
    pub fn open_above(lo: f64) -> Self {
        Interval {
            lower: Bound::Open(lo),
            upper: Bound::Unbounded,
        }
    }

    /// `(-∞, hi)`.
    pub fn open_below(hi: f64) -> Self {
        Interval {
            lower: Bound::Unbounded,
            upper: Bound::Open(hi),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = match self.lower {
            Bound::Unbounded => true,
            Bound::Open(lo) => x > lo,
            Bound::Closed(lo) => x >= lo,
        };
        let below = match self.upper {
            Bound::Unbounded => true,
            Bound::Open(hi) => x < hi,
            Bound::Closed(hi) => x <= hi,
        };
        above && below
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        let above = self.lower.value().is_none_or(|lo| x > lo);
        let below = self.upper.value().is_none_or(|hi| x < hi);
        above && below
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.value().is_some() && self.upper.value().is_some()
    }

    /// Finite endpoints, if both exist.
    pub fn endpoints(&self) -> Option<(f64, f64)> {
        Some((self.lower.value()?, self.upper.value()?))
    }

    /// Whether every point of `other` lies in `self`.
    pub fn contains_interval(&self, other: &Interval) -> bool {
        let lower_ok = match (self.lower, other.lower) {
            (Bound::Unbounded, _) => true,
            (_, Bound::Unbounded) => false,
            (Bound::Closed(a), Bound::Closed(b) | Bound::Open(b)) => b >= a,
            (Bound::Open(a), Bound::Open(b)) => b >= a,
            (Bound::Open(a), Bound::Closed(b)) => b > a,
        };
        let upper_ok = match (self.upper, other.upper) {
            (Bound::Unbounded, _) => true,
            (_, Bound::Unbounded) => false,
            (Bound::Closed(a), Bound::Closed(b) | Bound::Open(b)) => b <= a,
            (Bound::Open(a), Bound::Open(b)) => b <= a,
            (Bound::Open(a), Bound::Closed(b)) => b < a,
        };
        lower_ok && upper_ok
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lower {
            Bound::Unbounded => f.write_str("(-inf")?,
            Bound::Open(v) => write!(f, "({v}")?,
            Bound::Closed(v) => write!(f, "[{v}")?,
        }
        match self.upper {
            Bound::Unbounded => f.write_str(", inf)"),
            Bound::Open(v) => write!(f, ", {v})"),
            Bound::Closed(v) => write!(f, ", {v}]"),
        }
    }
}

/// A product of intervals. Always convex.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    intervals: Vec<Interval>,
}

impl BoxDomain {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::DegenerateBox("box has no dimensions".into()));
        }
        Ok(BoxDomain { intervals })
    }

    pub fn reals(dim: usize) -> Self {
        BoxDomain {
            intervals: vec![Interval::REALS; dim.max(1)],
        }
    }

    pub fn uniform(interval: Interval, dim: usize) -> Self {
        BoxDomain {
            intervals: vec![interval; dim.max(1)],
        }
    }

    /// Closed box `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Ok(BoxDomain::uniform(Interval::closed(lo, hi)?, dim))
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Checks membership, reporting the first offending coordinate.
    pub fn check(&self, theta: &[f64]) -> Result<()> {
        check_dims(self.dim(), theta.len())?;
        for (coord, (&x, iv)) in theta.iter().zip(&self.intervals).enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteCoordinate { coord, value: x });
            }
            if !iv.contains(x) {
                return Err(Error::OutOfDomain {
                    coord,
                    value: x,
                    interval: iv.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        self.check(theta).is_ok()
    }

    pub fn check_interior(&self, theta: &[f64]) -> Result<()> {
        self.check(theta)?;
        for (coord, (&x, iv)) in theta.iter().zip(&self.intervals).enumerate() {
            if !iv.contains_interior(x) {
                return Err(Error::NotInterior {
                    coord,
                    value: x,
                    interval: iv.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn contains_box(&self, other: &BoxDomain) -> bool {
        self.dim() == other.dim()
            && self
                .intervals
                .iter()
                .zip(&other.intervals)
                .all(|(a, b)| a.contains_interval(b))
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_bounded)
    }

    /// Product of two boxes (used by separable generators).
    pub fn product(boxes: impl IntoIterator<Item = BoxDomain>) -> Result<Self> {
        BoxDomain::new(boxes.into_iter().flat_map(|b| b.intervals).collect())
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// The point `(1-α)θ + αθ′` on the segment from `θ` to `θ′`.
///
/// `α = 0` returns `θ` and `α = 1` returns `θ′` exactly. Each coordinate is
/// clamped to the range spanned by its endpoints so rounding cannot step
/// outside a box that contains both.
pub fn interpolate(theta: &[f64], theta_p: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_dims(theta.len(), theta_p.len())?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(theta
        .iter()
        .zip(theta_p)
        .map(|(&a, &b)| ((1.0 - alpha) * a + alpha * b).clamp(a.min(b), a.max(b)))
        .collect())
}
