//! Jensen-type difference distances for quasiconvex and quasiconcave generators.
//!
//! For a skew `α ∈ (0,1)` and `(θθ′)_α = (1-α)θ + αθ′`:
//!
//! | distance | value |
//! |---|---|
//! | quasiconvex | `max{Q(θ), Q(θ′)} - Q((θθ′)_α)` |
//! | quasiconcave | `H((θθ′)_α) - min{H(θ), H(θ′)}` |
//! | log-ratio gap | `-log(Q((θθ′)_α) / max{Q(θ), Q(θ′)})` |
//! | extended Jensen | `(1-α)Q(θ) + αQ(θ′) - Q((θθ′)_α)` |
//!
//! The formulas are evaluated for any generator; only the sign guarantees
//! depend on the convexity class, so a mismatched class logs a warning.

use crate::domain::{check_dims, interpolate};
use crate::error::{Error, Result};
use crate::generator::{ConvexityClass, Generator};

/// Skew parameter `α`, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SkewParam(f64);

impl SkewParam {
    pub const HALF: SkewParam = SkewParam(0.5);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(SkewParam(alpha))
        } else {
            Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "skew must lie in (0, 1)",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SkewParam {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        SkewParam::new(alpha)
    }
}

/// `(Q(θ), Q(θ′), Q((θθ′)_α))`.
pub(crate) fn endpoint_values(
    q: &Generator,
    theta: &[f64],
    theta_p: &[f64],
    alpha: f64,
) -> Result<(f64, f64, f64)> {
    check_dims(q.dim(), theta.len())?;
    check_dims(q.dim(), theta_p.len())?;
    let mid = interpolate(theta, theta_p, alpha)?;
    Ok((q.eval(theta)?, q.eval(theta_p)?, q.eval(&mid)?))
}

/// `max{Q(θ), Q(θ′)} - Q((θθ′)_α)`.
///
/// Nonnegative for quasiconvex `Q`, and zero only at `θ = θ′` when `Q` is
/// strictly quasiconvex.
pub fn qcvx_jensen(q: &Generator, theta: &[f64], theta_p: &[f64], alpha: SkewParam) -> Result<f64> {
    if q.class() == ConvexityClass::Quasiconcave {
        log::warn!(
            "qcvx_jensen: generator `{}` is declared quasiconcave; nonnegativity is not guaranteed",
            q.label()
        );
    }
    let (a, b, m) = endpoint_values(q, theta, theta_p, alpha.get())?;
    Ok(a.max(b) - m)
}

/// `H((θθ′)_α) - min{H(θ), H(θ′)}`; equals `qcvx_jensen` of `-H`.
pub fn qccv_jensen(h: &Generator, theta: &[f64], theta_p: &[f64], alpha: SkewParam) -> Result<f64> {
    if h.class().is_quasiconvex() && !h.class().is_quasiconcave() {
        log::warn!(
            "qccv_jensen: generator `{}` is declared {:?}",
            h.label(),
            h.class()
        );
    }
    let (a, b, m) = endpoint_values(h, theta, theta_p, alpha.get())?;
    Ok(m - a.min(b))
}

/// `-log(Q((θθ′)_α) / max{Q(θ), Q(θ′)})` for positive generators.
///
/// A non-positive generator value at either endpoint or the interpolated point
/// is an error.
pub fn log_ratio_gap(
    q: &Generator,
    theta: &[f64],
    theta_p: &[f64],
    alpha: SkewParam,
) -> Result<f64> {
    let (a, b, m) = endpoint_values(q, theta, theta_p, alpha.get())?;
    for (value, location) in [(a, "theta"), (b, "theta_prime"), (m, "midpoint")] {
        if !(value > 0.0) {
            return Err(Error::NonPositiveValue { value, location });
        }
    }
    Ok(-(m / a.max(b)).ln())
}

/// `(1-α)Q(θ) + αQ(θ′) - Q((θθ′)_α)`. May be negative for non-convex `Q`.
pub fn extended_jensen(
    q: &Generator,
    theta: &[f64],
    theta_p: &[f64],
    alpha: SkewParam,
) -> Result<f64> {
    let alpha = alpha.get();
    let (a, b, m) = endpoint_values(q, theta, theta_p, alpha)?;
    Ok((1.0 - alpha) * a + alpha * b - m)
}
