//! Kullback–Leibler divergences for families with nested supports, and the
//! exponential-family identities linking KL to (quasiconvex) Bregman
//! divergences of the cumulant function.
//!
//! For nested supports, `KL[p_θ : p_θ′]` is finite exactly when
//! `supp(p_θ) ⊆ supp(p_θ′)`, i.e. `θ ≤ θ′`, and then equals the quasiconvex
//! Bregman divergence of the linear generator (times `α` for the power family).
//!
//! Entropies of exponential families are relative to the carrier measure, so
//! negative values are expected.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bregman::{bregman, qcvx_bregman};
use crate::domain::{check_dims, Bound, BoxDomain, Interval};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::generator::{ConvexityClass, Generator, GeneratorSpec};

/// A density on `(0, upper)` with respect to Lebesgue measure.
pub trait NestedDensity {
    fn support_upper(&self) -> f64;

    /// Density at `x`; zero outside the support.
    fn density(&self, x: f64) -> f64;
}

fn positive_param(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v,
            reason: "must be finite and positive",
        })
    }
}

/// Uniform density `e^{-θ}` on `(0, e^θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedUniform {
    theta: f64,
}

impl NestedUniform {
    pub fn new(theta: f64) -> Result<Self> {
        positive_param("theta", theta)?;
        Ok(NestedUniform { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl NestedDensity for NestedUniform {
    fn support_upper(&self) -> f64 {
        self.theta.exp()
    }

    fn density(&self, x: f64) -> f64 {
        if x > 0.0 && x < self.support_upper() {
            (-self.theta).exp()
        } else {
            0.0
        }
    }
}

/// Power density `α x^{α-1} e^{-θα}` on `(0, e^θ)`, `α > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerNested {
    alpha: f64,
    theta: f64,
}

impl PowerNested {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        check_exponent(alpha)?;
        positive_param("theta", theta)?;
        Ok(PowerNested { alpha, theta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl NestedDensity for PowerNested {
    fn support_upper(&self) -> f64 {
        self.theta.exp()
    }

    fn density(&self, x: f64) -> f64 {
        if x > 0.0 && x < self.support_upper() {
            self.alpha * x.powf(self.alpha - 1.0) * (-self.theta * self.alpha).exp()
        } else {
            0.0
        }
    }
}

fn check_exponent(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "power-family exponent must exceed 1",
        })
    }
}

/// `KL[p_θ : p_θ′] = θ′ - θ` for `θ ≤ θ′`, `+∞` otherwise.
pub fn kl_nested_uniform(theta: f64, theta_p: f64) -> Result<ExtReal> {
    positive_param("theta", theta)?;
    positive_param("theta_prime", theta_p)?;
    Ok(if theta <= theta_p {
        ExtReal::Finite(theta_p - theta)
    } else {
        ExtReal::PosInf
    })
}

/// `KL[q_θ : q_θ′] = α(θ′ - θ)` for `θ ≤ θ′`, `+∞` otherwise.
pub fn kl_power_nested(alpha: f64, theta: f64, theta_p: f64) -> Result<ExtReal> {
    check_exponent(alpha)?;
    positive_param("theta", theta)?;
    positive_param("theta_prime", theta_p)?;
    Ok(if theta <= theta_p {
        ExtReal::Finite(alpha * (theta_p - theta))
    } else {
        ExtReal::PosInf
    })
}

/// Exponential family given by its cumulant (log-partition) function `F`.
#[derive(Debug, Clone)]
pub struct ExpFamily {
    cumulant: Generator,
}

const CONVEXITY_LINES: usize = 16;
const CONVEXITY_POINTS: usize = 33;
const CONVEXITY_SEED: u64 = 0x5eed;

impl ExpFamily {
    /// Wraps `F` after checking strict convexity: second differences along
    /// random lines inside `domain ∩ [-10, 10]^D` must be positive.
    pub fn new(cumulant: Generator) -> Result<Self> {
        check_strict_convexity(&cumulant)?;
        Ok(ExpFamily { cumulant })
    }

    pub fn cumulant(&self) -> &Generator {
        &self.cumulant
    }
}

/// A named exponential family with a bounded box of natural parameters for
/// randomized checks.
#[derive(Debug, Clone)]
pub struct FamilyEntry {
    pub name: &'static str,
    pub family: ExpFamily,
    pub sample_box: BoxDomain,
}

/// Gaussian (unit variance, 1-D and 2-D), Poisson and exponential families.
pub fn expfam_catalog() -> Vec<FamilyEntry> {
    let half_sq = |dim| {
        GeneratorSpec::affine(0.5, 0.0, GeneratorSpec::named_dim("quadratic", dim))
            .build()
            .expect("gaussian cumulant")
    };
    let poisson = Generator::from_fn(
        "poisson",
        BoxDomain::reals(1),
        ConvexityClass::Convex,
        |t| t[0].exp(),
        Some(Arc::new(|t: &[f64]| vec![t[0].exp()])),
    );
    let exponential = Generator::from_fn(
        "exponential",
        BoxDomain::uniform(Interval::open_below(0.0), 1),
        ConvexityClass::Convex,
        |t| -(-t[0]).ln(),
        Some(Arc::new(|t: &[f64]| vec![-1.0 / t[0]])),
    );
    let entry = |name, f, lo, hi, dim| FamilyEntry {
        name,
        family: ExpFamily::new(f).expect("catalog cumulant is strictly convex"),
        sample_box: BoxDomain::cube(lo, hi, dim).expect("catalog box"),
    };
    vec![
        entry("gaussian", half_sq(1), -5.0, 5.0, 1),
        entry("gaussian-2d", half_sq(2), -3.0, 3.0, 2),
        entry("poisson", poisson, -3.0, 3.0, 1),
        entry("exponential", exponential, -5.0, -0.1, 1),
    ]
}

fn sampling_range(lower: Bound, upper: Bound) -> (f64, f64) {
    const CLIP: f64 = 10.0;
    let inset = |v: f64| 1e-6 * v.abs().max(1.0);
    let lo = match lower {
        Bound::Unbounded => -CLIP,
        Bound::Open(v) | Bound::Closed(v) => (v + inset(v)).max(-CLIP),
    };
    let hi = match upper {
        Bound::Unbounded => CLIP,
        Bound::Open(v) | Bound::Closed(v) => (v - inset(v)).min(CLIP),
    };
    if lo < hi {
        (lo, hi)
    } else {
        // domain lies entirely outside the clip window
        match (lower, upper) {
            (Bound::Open(v) | Bound::Closed(v), _) => (v + inset(v), v + 2.0 * CLIP),
            (_, Bound::Open(v) | Bound::Closed(v)) => (v - 2.0 * CLIP, v - inset(v)),
            _ => (-CLIP, CLIP),
        }
    }
}

fn check_strict_convexity(f: &Generator) -> Result<()> {
    let ranges: Vec<(f64, f64)> = f
        .domain()
        .intervals()
        .iter()
        .map(|iv| sampling_range(iv.lower, iv.upper))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(CONVEXITY_SEED);
    for _ in 0..CONVEXITY_LINES {
        let a: Vec<f64> = ranges
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..hi))
            .collect();
        let b: Vec<f64> = ranges
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..hi))
            .collect();
        let at = |t: f64| -> Vec<f64> { a.iter().zip(&b).map(|(x, y)| x + t * (y - x)).collect() };
        let values = (0..CONVEXITY_POINTS)
            .map(|j| f.eval(&at(j as f64 / (CONVEXITY_POINTS - 1) as f64)))
            .collect::<Result<Vec<_>>>()?;
        for w in values.windows(3) {
            if !(w[0] + w[2] - 2.0 * w[1] > 0.0) {
                return Err(Error::Precondition(format!(
                    "cumulant `{}` is not strictly convex along a sampled line",
                    f.label()
                )));
            }
        }
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_pair(fam: &ExpFamily, theta: &[f64], theta_p: &[f64]) -> Result<()> {
    check_dims(fam.cumulant.dim(), theta.len())?;
    check_dims(fam.cumulant.dim(), theta_p.len())
}

/// Cross-entropy `h(p_θ : p_θ′) = F(θ′) - θ′ᵀ∇F(θ)`.
pub fn expfam_cross_entropy(fam: &ExpFamily, theta: &[f64], theta_p: &[f64]) -> Result<f64> {
    check_pair(fam, theta, theta_p)?;
    let grad = fam.cumulant.gradient(theta)?;
    Ok(fam.cumulant.eval(theta_p)? - dot(theta_p, &grad))
}

/// Entropy `h(p_θ) = F(θ) - θᵀ∇F(θ)`.
pub fn expfam_entropy(fam: &ExpFamily, theta: &[f64]) -> Result<f64> {
    check_dims(fam.cumulant.dim(), theta.len())?;
    let grad = fam.cumulant.gradient(theta)?;
    Ok(fam.cumulant.eval(theta)? - dot(theta, &grad))
}

/// `KL[p_θ : p_θ′] = B_F(θ′ : θ)`, a reverse Bregman divergence.
pub fn expfam_kl(fam: &ExpFamily, theta: &[f64], theta_p: &[f64]) -> Result<f64> {
    check_pair(fam, theta, theta_p)?;
    bregman(&fam.cumulant, theta_p, theta)
}

/// `qcvxB_F(θ′ : θ) = KL[p_θ : p_θ′] + F(θ) - F(θ′)`, valid when
/// `F(θ′) ≤ F(θ)`. The other orientation is a precondition error; query
/// with swapped arguments instead.
pub fn qcvx_bregman_from_kl(fam: &ExpFamily, theta: &[f64], theta_p: &[f64]) -> Result<ExtReal> {
    check_pair(fam, theta, theta_p)?;
    let (a, b) = (fam.cumulant.eval(theta)?, fam.cumulant.eval(theta_p)?);
    if b > a {
        return Err(Error::Precondition(format!(
            "F(theta_prime) = {b} exceeds F(theta) = {a}"
        )));
    }
    Ok(ExtReal::Finite(expfam_kl(fam, theta, theta_p)? + a - b))
}

/// Same quantity routed through the Bregman module, for cross-checks.
pub fn qcvx_bregman_reverse(fam: &ExpFamily, theta: &[f64], theta_p: &[f64]) -> Result<ExtReal> {
    qcvx_bregman(&fam.cumulant, theta_p, theta)
}
