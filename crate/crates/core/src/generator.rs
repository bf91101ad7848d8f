//! Generators: real-valued functions on a box with an optional analytic
//! gradient and a declared convexity class.
//!
//! Built-in generators are described by a [`GeneratorSpec`], which has a JSON
//! form:
//!
//! ```json
//! {"name": "log"}
//! {"name": "quadratic", "dim": 2}
//! {"name": "linear-fractional(1,0,1,1)"}
//! {"affine": {"a": 2, "b": 3, "inner": {"name": "linear"}}}
//! {"separable": [{"name": "quadratic"}, {"name": "quadratic"}]}
//! {"negate": {"name": "log"}}
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{check_dims, BoxDomain, Interval};
use crate::error::{Error, Result};

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Declared shape of a generator. A claim, not a certificate; see
/// [`check_quasiconvex`](crate::quasiconvex::check_quasiconvex).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityClass {
    Convex,
    Quasiconvex,
    Quasiconcave,
    /// Both quasiconvex and quasiconcave (monotone in 1-D).
    Quasilinear,
    Unknown,
}

impl ConvexityClass {
    pub fn is_quasiconvex(self) -> bool {
        matches!(
            self,
            ConvexityClass::Convex | ConvexityClass::Quasiconvex | ConvexityClass::Quasilinear
        )
    }

    pub fn is_quasiconcave(self) -> bool {
        matches!(
            self,
            ConvexityClass::Quasiconcave | ConvexityClass::Quasilinear
        )
    }

    fn negated(self) -> Self {
        match self {
            ConvexityClass::Convex | ConvexityClass::Quasiconvex => ConvexityClass::Quasiconcave,
            ConvexityClass::Quasiconcave => ConvexityClass::Quasiconvex,
            ConvexityClass::Quasilinear => ConvexityClass::Quasilinear,
            ConvexityClass::Unknown => ConvexityClass::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positivity {
    PositiveOnDomain,
    MayBeNonpositive,
}

/// Known infimum of a generator over its domain.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LowerBound {
    value: f64,
    /// The infimum is not attained.
    strict: bool,
}

/// A real-valued function on a box domain.
#[derive(Clone)]
pub struct Generator {
    label: String,
    dim: usize,
    domain: BoxDomain,
    class: ConvexityClass,
    lower_bound: Option<LowerBound>,
    eval: EvalFn,
    grad: Option<GradFn>,
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("class", &self.class)
            .field("analytic_grad", &self.grad.is_some())
            .finish()
    }
}

impl Generator {
    /// A generator from closures. Without `grad`, gradients fall back to
    /// central finite differences.
    pub fn from_fn(
        label: impl Into<String>,
        domain: BoxDomain,
        class: ConvexityClass,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: Option<GradFn>,
    ) -> Self {
        Generator {
            label: label.into(),
            dim: domain.dim(),
            domain,
            class,
            lower_bound: None,
            eval: Arc::new(eval),
            grad,
        }
    }

    /// Declares `inf Q` over the domain; positivity is derived from it.
    pub fn with_lower_bound(mut self, value: f64, strict: bool) -> Self {
        self.lower_bound = Some(LowerBound { value, strict });
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn class(&self) -> ConvexityClass {
        self.class
    }

    pub fn has_analytic_grad(&self) -> bool {
        self.grad.is_some()
    }

    pub fn positivity(&self) -> Positivity {
        match self.lower_bound {
            Some(lb) if lb.value > 0.0 || (lb.value == 0.0 && lb.strict) => {
                Positivity::PositiveOnDomain
            }
            _ => Positivity::MayBeNonpositive,
        }
    }

    /// `Q(θ)`, after checking that `θ` lies in the domain.
    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        self.domain.check(theta)?;
        let v = (self.eval)(theta);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                generator: self.label.clone(),
                value: v,
            });
        }
        Ok(v)
    }

    /// Scalar convenience for 1-D generators.
    pub fn eval1(&self, x: f64) -> Result<f64> {
        self.eval(&[x])
    }

    /// `∇Q(θ)`; see [`gradient`].
    pub fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        gradient(self, theta)
    }

    pub fn derivative1(&self, x: f64) -> Result<f64> {
        check_dims(1, self.dim)?;
        Ok(gradient(self, &[x])?[0])
    }

    /// `-Q`, with the convexity class flipped.
    pub fn negate(&self) -> Generator {
        let inner = self.eval.clone();
        let grad = self.grad.clone().map(|g| -> GradFn {
            Arc::new(move |t: &[f64]| g(t).into_iter().map(|d| -d).collect())
        });
        Generator {
            label: format!("-({})", self.label),
            dim: self.dim,
            domain: self.domain.clone(),
            class: self.class.negated(),
            lower_bound: None,
            eval: Arc::new(move |t: &[f64]| -inner(t)),
            grad,
        }
    }

    /// `aQ + b` for `a > 0`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Generator> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
                reason: "affine wrap requires a finite a > 0",
            });
        }
        if !b.is_finite() {
            return Err(Error::InvalidParameter {
                name: "b",
                value: b,
                reason: "affine wrap requires a finite b",
            });
        }
        let inner = self.eval.clone();
        let grad = self.grad.clone().map(|g| -> GradFn {
            Arc::new(move |t: &[f64]| g(t).into_iter().map(|d| a * d).collect())
        });
        Ok(Generator {
            label: format!("{a}*({})+{b}", self.label),
            dim: self.dim,
            domain: self.domain.clone(),
            class: self.class,
            lower_bound: self.lower_bound.map(|lb| LowerBound {
                value: a * lb.value + b,
                strict: lb.strict,
            }),
            eval: Arc::new(move |t: &[f64]| a * inner(t) + b),
            grad,
        })
    }

    /// `Σ Q_i(θ_i)` over 1-D components.
    pub fn separable(components: Vec<Generator>) -> Result<Generator> {
        if components.is_empty() {
            return Err(Error::InvalidSpec("separable sum needs components".into()));
        }
        if let Some(bad) = components.iter().find(|c| c.dim != 1) {
            return Err(Error::InvalidSpec(format!(
                "separable component `{}` has dim {}, expected 1",
                bad.label, bad.dim
            )));
        }
        let domain = BoxDomain::product(components.iter().map(|c| c.domain.clone()))?;
        let class = if components.iter().all(|c| c.class == ConvexityClass::Convex) {
            ConvexityClass::Convex
        } else {
            ConvexityClass::Unknown
        };
        let lower_bound = components.iter().map(|c| c.lower_bound).try_fold(
            LowerBound {
                value: 0.0,
                strict: false,
            },
            |acc, lb| {
                lb.map(|lb| LowerBound {
                    value: acc.value + lb.value,
                    strict: acc.strict || lb.strict,
                })
            },
        );
        let label = components
            .iter()
            .map(|c| c.label.as_str())
            .collect::<Vec<_>>()
            .join(" + ");
        let evals: Vec<EvalFn> = components.iter().map(|c| c.eval.clone()).collect();
        let grad = if components.iter().all(|c| c.grad.is_some()) {
            let grads: Vec<GradFn> = components.iter().filter_map(|c| c.grad.clone()).collect();
            Some(Arc::new(move |t: &[f64]| {
                grads
                    .iter()
                    .zip(t)
                    .map(|(g, &x)| g(std::slice::from_ref(&x))[0])
                    .collect()
            }) as GradFn)
        } else {
            None
        };
        Ok(Generator {
            label: format!("sep[{label}]"),
            dim: components.len(),
            domain,
            class,
            lower_bound,
            eval: Arc::new(move |t: &[f64]| {
                evals
                    .iter()
                    .zip(t)
                    .map(|(e, &x)| e(std::slice::from_ref(&x)))
                    .sum()
            }),
            grad,
        })
    }
}

/// Central finite-difference gradient with step `h = cbrt(ε)·max(1, |θ_i|)`.
///
/// Fails when a stencil point leaves the domain.
pub fn finite_difference_gradient(g: &Generator, theta: &[f64]) -> Result<Vec<f64>> {
    g.domain.check_interior(theta)?;
    let step = f64::EPSILON.cbrt();
    let mut probe = theta.to_vec();
    let mut out = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let x = theta[i];
        let h = step * x.abs().max(1.0);
        probe[i] = x + h;
        let up_x = probe[i];
        let up = g.eval(&probe).map_err(|_| not_interior(g, i, x))?;
        probe[i] = x - h;
        let down_x = probe[i];
        let down = g.eval(&probe).map_err(|_| not_interior(g, i, x))?;
        probe[i] = x;
        out.push((up - down) / (up_x - down_x));
    }
    Ok(out)
}

fn not_interior(g: &Generator, coord: usize, value: f64) -> Error {
    Error::NotInterior {
        coord,
        value,
        interval: g.domain.intervals()[coord].to_string(),
    }
}

/// `∇Q(θ)`: analytic when available, else central finite differences.
///
/// `θ` must be interior to the domain; boundary points are an error.
pub fn gradient(g: &Generator, theta: &[f64]) -> Result<Vec<f64>> {
    g.domain.check_interior(theta)?;
    match &g.grad {
        Some(grad) => {
            let d = grad(theta);
            if let Some((coord, &value)) = d.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFiniteCoordinate { coord, value });
            }
            Ok(d)
        }
        None => finite_difference_gradient(g, theta),
    }
}

/// `Q(θ)`; errors name the offending coordinate.
pub fn eval_generator(g: &Generator, theta: &[f64]) -> Result<f64> {
    g.eval(theta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSpec {
    pub a: f64,
    pub b: f64,
    pub inner: Box<GeneratorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineWrap {
    pub affine: AffineSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableSum {
    pub separable: Vec<GeneratorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Negation {
    pub negate: Box<GeneratorSpec>,
}

/// Declarative description of a generator; see the module docs for the JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    Named(NamedSpec),
    Affine(AffineWrap),
    Separable(SeparableSum),
    Negate(Negation),
}

impl GeneratorSpec {
    pub fn named(name: &str) -> Self {
        GeneratorSpec::Named(NamedSpec {
            name: name.to_string(),
            dim: None,
        })
    }

    pub fn named_dim(name: &str, dim: usize) -> Self {
        GeneratorSpec::Named(NamedSpec {
            name: name.to_string(),
            dim: Some(dim),
        })
    }

    pub fn affine(a: f64, b: f64, inner: GeneratorSpec) -> Self {
        GeneratorSpec::Affine(AffineWrap {
            affine: AffineSpec {
                a,
                b,
                inner: Box::new(inner),
            },
        })
    }

    pub fn separable(components: Vec<GeneratorSpec>) -> Self {
        GeneratorSpec::Separable(SeparableSum {
            separable: components,
        })
    }

    pub fn negate(inner: GeneratorSpec) -> Self {
        GeneratorSpec::Negate(Negation {
            negate: Box::new(inner),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn build(&self) -> Result<Generator> {
        build_generator(self)
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))
    }
}

/// Builds a generator from its spec. Every built-in carries an analytic gradient.
pub fn build_generator(spec: &GeneratorSpec) -> Result<Generator> {
    match spec {
        GeneratorSpec::Named(n) => builtin(&n.name, n.dim.unwrap_or(1)),
        GeneratorSpec::Affine(w) => {
            build_generator(&w.affine.inner)?.affine(w.affine.a, w.affine.b)
        }
        GeneratorSpec::Separable(s) => Generator::separable(
            s.separable
                .iter()
                .map(build_generator)
                .collect::<Result<Vec<_>>>()?,
        ),
        GeneratorSpec::Negate(n) => Ok(build_generator(&n.negate)?.negate()),
    }
}

fn grad_fn(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Option<GradFn> {
    Some(Arc::new(f))
}

fn builtin(name: &str, dim: usize) -> Result<Generator> {
    use ConvexityClass::*;

    if dim == 0 {
        return Err(Error::InvalidSpec("dim must be at least 1".into()));
    }
    let scalar_only = |g: Generator| -> Result<Generator> {
        if dim != 1 {
            return Err(Error::InvalidSpec(format!(
                "`{name}` is defined for dim 1 only"
            )));
        }
        Ok(g)
    };
    let positive = BoxDomain::uniform(Interval::open_above(0.0), dim);
    let reals = BoxDomain::reals(dim);

    if let Some(args) = name
        .strip_prefix("linear-fractional(")
        .and_then(|r| r.strip_suffix(')'))
    {
        let p = args
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidSpec(format!("linear-fractional arguments: {e}")))?;
        if p.len() != 4 || p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(
                "linear-fractional takes four finite numbers (a,b,c,d)".into(),
            ));
        }
        return scalar_only(linear_fractional(p[0], p[1], p[2], p[3])?);
    }

    let g = match name {
        "linear" => Generator::from_fn(
            "linear",
            reals,
            Quasilinear,
            |t| t.iter().sum(),
            grad_fn(|t| vec![1.0; t.len()]),
        ),
        "quadratic" => Generator::from_fn(
            "quadratic",
            reals,
            Convex,
            |t| t.iter().map(|x| x * x).sum(),
            grad_fn(|t| t.iter().map(|x| 2.0 * x).collect()),
        )
        .with_lower_bound(0.0, false),
        "cubic" => scalar_only(Generator::from_fn(
            "cubic",
            reals,
            Quasilinear,
            |t| t[0] * t[0] * t[0],
            grad_fn(|t| vec![3.0 * t[0] * t[0]]),
        ))?,
        "sqrt" => scalar_only(
            Generator::from_fn(
                "sqrt",
                positive,
                Quasilinear,
                |t| t[0].sqrt(),
                grad_fn(|t| vec![0.5 / t[0].sqrt()]),
            )
            .with_lower_bound(0.0, true),
        )?,
        "log" => scalar_only(Generator::from_fn(
            "log",
            positive,
            Quasilinear,
            |t| t[0].ln(),
            grad_fn(|t| vec![1.0 / t[0]]),
        ))?,
        "abs" => Generator::from_fn(
            "abs",
            reals,
            Convex,
            |t| t.iter().map(|x| x.abs()).sum(),
            // subgradient 0 at the kink
            grad_fn(|t| {
                t.iter()
                    .map(|&x| if x == 0.0 { 0.0 } else { x.signum() })
                    .collect()
            }),
        )
        .with_lower_bound(0.0, false),
        "neg-gauss" => Generator::from_fn(
            "neg-gauss",
            reals,
            Quasiconvex,
            |t| -(-norm_sq(t)).exp(),
            grad_fn(|t| {
                let e = (-norm_sq(t)).exp();
                t.iter().map(|x| 2.0 * x * e).collect()
            }),
        )
        .with_lower_bound(-1.0, false),
        "log-norm-sq" => Generator::from_fn(
            "log-norm-sq",
            positive,
            Quasiconvex,
            |t| norm_sq(t).ln(),
            grad_fn(|t| {
                let n = norm_sq(t);
                t.iter().map(|x| 2.0 * x / n).collect()
            }),
        ),
        "sine" => scalar_only(
            Generator::from_fn(
                "sine",
                reals,
                Unknown,
                |t| t[0].sin(),
                grad_fn(|t| vec![t[0].cos()]),
            )
            .with_lower_bound(-1.0, false),
        )?,
        other => return Err(Error::UnknownGenerator(other.to_string())),
    };
    Ok(g)
}

fn norm_sq(t: &[f64]) -> f64 {
    t.iter().map(|x| x * x).sum()
}

/// `(aθ + b) / (cθ + d)` on the half-line where `cθ + d > 0`.
fn linear_fractional(a: f64, b: f64, c: f64, d: f64) -> Result<Generator> {
    let interval = if c > 0.0 {
        Interval::open_above(-d / c)
    } else if c < 0.0 {
        Interval::open_below(-d / c)
    } else if d > 0.0 {
        Interval::REALS
    } else {
        return Err(Error::InvalidSpec(
            "linear-fractional with c = 0 needs d > 0".into(),
        ));
    };
    let det = a * d - b * c;
    Ok(Generator::from_fn(
        format!("linear-fractional({a},{b},{c},{d})"),
        BoxDomain::uniform(interval, 1),
        ConvexityClass::Quasilinear,
        move |t| (a * t[0] + b) / (c * t[0] + d),
        grad_fn(move |t| {
            let den = c * t[0] + d;
            vec![det / (den * den)]
        }),
    ))
}

/// A built-in generator together with a bounded sampling box inside its
/// domain, for randomized property suites.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub spec: GeneratorSpec,
    pub sample_box: BoxDomain,
}

impl CatalogEntry {
    fn new(spec: GeneratorSpec, lo: f64, hi: f64, dim: usize) -> Self {
        CatalogEntry {
            spec,
            sample_box: BoxDomain::cube(lo, hi, dim).expect("catalog box"),
        }
    }

    pub fn build(&self) -> Generator {
        build_generator(&self.spec).expect("catalog generator builds")
    }
}

/// Built-ins declared quasiconvex, with sampling boxes.
pub fn quasiconvex_catalog() -> Vec<CatalogEntry> {
    let n = GeneratorSpec::named;
    let nd = GeneratorSpec::named_dim;
    vec![
        CatalogEntry::new(n("linear"), -5.0, 5.0, 1),
        CatalogEntry::new(nd("linear", 2), -5.0, 5.0, 2),
        CatalogEntry::new(n("quadratic"), -5.0, 5.0, 1),
        CatalogEntry::new(nd("quadratic", 2), -5.0, 5.0, 2),
        CatalogEntry::new(n("cubic"), -3.0, 3.0, 1),
        CatalogEntry::new(n("sqrt"), 0.01, 10.0, 1),
        CatalogEntry::new(n("log"), 0.01, 10.0, 1),
        CatalogEntry::new(n("abs"), -5.0, 5.0, 1),
        CatalogEntry::new(nd("abs", 2), -5.0, 5.0, 2),
        CatalogEntry::new(n("neg-gauss"), -3.0, 3.0, 1),
        CatalogEntry::new(nd("neg-gauss", 2), -2.0, 2.0, 2),
        CatalogEntry::new(n("log-norm-sq"), 0.05, 5.0, 1),
        CatalogEntry::new(nd("log-norm-sq", 2), 0.05, 5.0, 2),
        CatalogEntry::new(n("linear-fractional(2,1,1,1)"), -0.9, 10.0, 1),
    ]
}
