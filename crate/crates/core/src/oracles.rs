//! Independent numeric checks of the closed forms: limit studies along dyadic
//! schedules, quadrature of the δ-average integral, and quadrature of KL
//! integrals for nested densities.
//!
//! Schedules are `α_k = 1 - 2^{-k}` for the scaled Jensen limit and
//! `δ_k = r_k = 2^k` for the power-mean limits. There is deliberately no
//! extrapolation: the closed forms are the targets.

use crate::bregman::qcvx_bregman;
use crate::domain::check_dims;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::generator::Generator;
use crate::jensen::{qcvx_jensen, SkewParam};
use crate::means::{power_mean_jensen, r_power_bregman};
use crate::quadrature::{integrate, try_integrate, QuadResult, DEFAULT_ABS_TOL};
use crate::statdiv::NestedDensity;

/// A finite run "witnesses" divergence once the last value exceeds this
/// multiple of `|Q(θ) - Q(θ′)|`.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Relative tolerance `1e-3·(1+|target|)` for the power-mean limits.
pub const POWER_LIMIT_TOL: f64 = 1e-3;

/// First schedule index of the scaled-Jensen study.
pub const SCALED_JENSEN_K_MIN: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    ScaledJensen,
    PowerJensen,
    RPowerBregman,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::ScaledJensen => "scaled-jensen",
            StudyKind::PowerJensen => "power-jensen",
            StudyKind::RPowerBregman => "r-power-bregman",
        }
    }
}

/// Values of a parametrized divergence along a schedule that approaches a
/// limit, with their distance to the limit.
///
/// `errors[i]` is `|values[i] - target|` when the target is finite. When the
/// target is `+∞` it is the reciprocal `1/values[i]` (0 once a value is
/// itself `+∞`), so in both cases it shrinks as the study converges.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitStudy {
    pub kind: StudyKind,
    pub ks: Vec<u32>,
    /// `α_k`, `δ_k` or `r_k`.
    pub schedule: Vec<f64>,
    pub values: Vec<ExtReal>,
    pub target: ExtReal,
    pub errors: Vec<f64>,
    /// `|Q(θ) - Q(θ′)|`, the scale for divergence detection.
    pub value_gap: f64,
    pub converged: bool,
}

impl LimitStudy {
    fn new(
        kind: StudyKind,
        ks: Vec<u32>,
        schedule: Vec<f64>,
        values: Vec<ExtReal>,
        target: ExtReal,
        value_gap: f64,
    ) -> Self {
        let errors = values
            .iter()
            .map(|v| match (target, v) {
                (ExtReal::Finite(t), ExtReal::Finite(v)) => (v - t).abs(),
                (ExtReal::Finite(_), ExtReal::PosInf) => f64::INFINITY,
                (ExtReal::PosInf, ExtReal::PosInf) => 0.0,
                (ExtReal::PosInf, ExtReal::Finite(v)) if *v > 0.0 => 1.0 / v,
                (ExtReal::PosInf, ExtReal::Finite(_)) => f64::INFINITY,
            })
            .collect();
        let mut study = LimitStudy {
            kind,
            ks,
            schedule,
            values,
            target,
            errors,
            value_gap,
            converged: false,
        };
        study.converged = study.criterion_met();
        study
    }

    pub fn final_value(&self) -> ExtReal {
        *self.values.last().expect("non-empty schedule")
    }

    pub fn final_error(&self) -> f64 {
        *self.errors.last().expect("non-empty schedule")
    }

    /// Errors never increase from schedule index `k0` on.
    pub fn errors_non_increasing_from(&self, k0: u32) -> bool {
        let tail: Vec<f64> = self
            .ks
            .iter()
            .zip(&self.errors)
            .filter(|(k, _)| **k >= k0)
            .map(|(_, e)| *e)
            .collect();
        tail.windows(2).all(|w| w[1] <= w[0])
    }

    fn values_strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|w| match (w[0], w[1]) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => b > a,
            (ExtReal::Finite(_), ExtReal::PosInf) => true,
            // saturated at +∞
            (ExtReal::PosInf, ExtReal::PosInf) => true,
            (ExtReal::PosInf, ExtReal::Finite(_)) => false,
        })
    }

    /// The last value is `+∞` or exceeds [`DIVERGENCE_FACTOR`]·`|ΔQ|`.
    pub fn diverges(&self) -> bool {
        match self.final_value() {
            ExtReal::PosInf => true,
            ExtReal::Finite(v) => v > DIVERGENCE_FACTOR * self.value_gap,
        }
    }

    fn criterion_met(&self) -> bool {
        match (self.kind, self.target) {
            (StudyKind::ScaledJensen, ExtReal::Finite(_)) => {
                let last = self.final_error();
                last.is_finite() && self.errors.iter().all(|&e| last <= e)
            }
            (StudyKind::ScaledJensen, ExtReal::PosInf) => {
                self.values_strictly_increasing() && self.diverges()
            }
            (StudyKind::PowerJensen | StudyKind::RPowerBregman, ExtReal::Finite(t)) => {
                self.final_error() <= POWER_LIMIT_TOL * (1.0 + t.abs())
            }
            (StudyKind::PowerJensen | StudyKind::RPowerBregman, ExtReal::PosInf) => self.diverges(),
        }
    }
}

fn check_k_max(k_max: u32, min: u32) -> Result<()> {
    if k_max < min || k_max > 52 {
        return Err(Error::InvalidParameter {
            name: "k_max",
            value: k_max as f64,
            reason: "schedule length out of range",
        });
    }
    Ok(())
}

/// `qcvx_jensen / (α(1-α))` at `α_k = 1 - 2^{-k}`, `k = 4..=k_max`, against
/// `qcvx_bregman(Q, θ, θ′)`.
pub fn limit_scaled_jensen(
    q: &Generator,
    theta: &[f64],
    theta_p: &[f64],
    k_max: u32,
) -> Result<LimitStudy> {
    check_k_max(k_max, SCALED_JENSEN_K_MIN)?;
    let target = qcvx_bregman(q, theta, theta_p)?;
    let ks: Vec<u32> = (SCALED_JENSEN_K_MIN..=k_max).collect();
    let mut schedule = Vec::with_capacity(ks.len());
    let mut values = Vec::with_capacity(ks.len());
    for &k in &ks {
        let eps = (-(k as f64)).exp2();
        let alpha = 1.0 - eps;
        let j = qcvx_jensen(q, theta, theta_p, SkewParam::new(alpha)?)?;
        schedule.push(alpha);
        values.push(ExtReal::Finite(j / (alpha * eps)));
    }
    let gap = (q.eval(theta)? - q.eval(theta_p)?).abs();
    Ok(LimitStudy::new(
        StudyKind::ScaledJensen,
        ks,
        schedule,
        values,
        target,
        gap,
    ))
}

/// Power-mean Jensen at `δ_k = 2^k`, `k = 0..=k_max`, `α = ½`, against
/// `qcvx_jensen(F, θ, θ′, ½)`.
pub fn limit_power_jensen(
    f: &Generator,
    theta: &[f64],
    theta_p: &[f64],
    k_max: u32,
) -> Result<LimitStudy> {
    check_k_max(k_max, 1)?;
    let target = ExtReal::Finite(qcvx_jensen(f, theta, theta_p, SkewParam::HALF)?);
    let ks: Vec<u32> = (0..=k_max).collect();
    let schedule: Vec<f64> = ks.iter().map(|&k| (k as f64).exp2()).collect();
    let values = schedule
        .iter()
        .map(|&d| power_mean_jensen(f, d, 0.5, theta, theta_p).map(ExtReal::Finite))
        .collect::<Result<Vec<_>>>()?;
    let gap = (f.eval(theta)? - f.eval(theta_p)?).abs();
    Ok(LimitStudy::new(
        StudyKind::PowerJensen,
        ks,
        schedule,
        values,
        target,
        gap,
    ))
}

/// r-power Bregman at `r_k = 2^k`, `k = 0..=k_max`, against
/// `qcvx_bregman(F, θ, θ′)`.
pub fn limit_r_power_bregman(
    f: &Generator,
    theta: f64,
    theta_p: f64,
    k_max: u32,
) -> Result<LimitStudy> {
    check_k_max(k_max, 1)?;
    check_dims(1, f.dim())?;
    let target = qcvx_bregman(f, &[theta], &[theta_p])?;
    let ks: Vec<u32> = (0..=k_max).collect();
    let schedule: Vec<f64> = ks.iter().map(|&k| (k as f64).exp2()).collect();
    let values = schedule
        .iter()
        .map(|&r| r_power_bregman(f, r, theta, theta_p))
        .collect::<Result<Vec<_>>>()?;
    let gap = (f.eval1(theta)? - f.eval1(theta_p)?).abs();
    Ok(LimitStudy::new(
        StudyKind::RPowerBregman,
        ks,
        schedule,
        values,
        target,
        gap,
    ))
}

/// `(1/Δ) ∫₀^Δ qcvxB_Q(θ+u : θ′+u) du` with `Δ = δ(θ′ - θ)`, by adaptive
/// quadrature of the gradient-based pseudo-divergence.
///
/// Every quadrature node must land on the finite branch
/// (`Q(θ+u) ≤ Q(θ′+u)`); a node on the infinite branch is a hard
/// [`Error::InfiniteBranch`] failure.
pub fn integrate_delta_average(
    q: &Generator,
    theta: f64,
    theta_p: f64,
    delta: f64,
) -> Result<QuadResult> {
    integrate_delta_average_with_tol(q, theta, theta_p, delta, DEFAULT_ABS_TOL)
}

/// [`integrate_delta_average`] with an explicit absolute tolerance on the
/// integral.
pub fn integrate_delta_average_with_tol(
    q: &Generator,
    theta: f64,
    theta_p: f64,
    delta: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    check_dims(1, q.dim())?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "averaging ratio must be finite and positive",
        });
    }
    if q.eval1(theta_p)? < q.eval1(theta)? {
        return Err(Error::Precondition("Q(theta_prime) < Q(theta)".into()));
    }
    let width = delta * (theta_p - theta);
    for end in [theta + width, theta_p + width] {
        if !q.domain().contains(&[end]) {
            return Err(Error::DomainExtension { point: vec![end] });
        }
    }
    if width == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            depth_limited: false,
        });
    }
    let integral = try_integrate(
        |u| match qcvx_bregman(q, &[theta + u], &[theta_p + u])? {
            ExtReal::Finite(v) => Ok(v),
            ExtReal::PosInf => Err(Error::InfiniteBranch { u }),
        },
        0.0,
        width,
        abs_tol,
    )?;
    Ok(QuadResult {
        value: integral.value / width,
        abs_error: integral.abs_error / width.abs(),
        ..integral
    })
}

/// `∫ p` over the support of `p`.
pub fn density_mass(p: &impl NestedDensity) -> QuadResult {
    integrate(|x| p.density(x), 0.0, p.support_upper(), 1e-12)
}

/// `∫ p log(p/q)` over `supp(p)`, or `+∞` if `p` has mass where `q` vanishes.
///
/// Support inclusion is probed through the densities themselves.
pub fn kl_quadrature(p: &impl NestedDensity, q: &impl NestedDensity) -> ExtReal {
    let (up_p, up_q) = (p.support_upper(), q.support_upper());
    if up_p > up_q {
        let probe = 0.5 * (up_p + up_q);
        if p.density(probe) > 0.0 && q.density(probe) == 0.0 {
            return ExtReal::PosInf;
        }
    }
    let r = integrate(
        |x| {
            let px = p.density(x);
            if px == 0.0 {
                0.0
            } else {
                px * (px.ln() - q.density(x).ln())
            }
        },
        0.0,
        up_p.min(up_q),
        1e-12,
    );
    ExtReal::Finite(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bregman::{delta_averaged_qcvx_bregman, AveragingRatio};
    use crate::generator::GeneratorSpec;
    use crate::statdiv::{kl_nested_uniform, kl_power_nested, NestedUniform, PowerNested};

    fn gen(name: &str) -> Generator {
        GeneratorSpec::named(name).build().unwrap()
    }

    fn wrap(inner: &str) -> Generator {
        GeneratorSpec::affine(1.0, 1.0, GeneratorSpec::named(inner))
            .build()
            .unwrap()
    }

    #[test]
    fn scaled_jensen_finite_branch() {
        let s = limit_scaled_jensen(&gen("log"), &[1.0], &[2.0], 20).unwrap();
        assert_eq!(s.ks.first(), Some(&4));
        assert_eq!(s.ks.len(), 17);
        assert_eq!(s.target, ExtReal::Finite(0.5));
        assert!(s.final_error() < 1e-4, "{}", s.final_error());
        assert!(s.errors_non_increasing_from(6));
        assert!(s.converged);
    }

    #[test]
    fn scaled_jensen_infinite_branch() {
        let s = limit_scaled_jensen(&gen("linear"), &[2.0], &[1.0], 20).unwrap();
        assert_eq!(s.target, ExtReal::PosInf);
        assert!(s.values.windows(2).all(|w| w[1] > w[0]));
        // 2^20 > 10^6 |ΔQ| with |ΔQ| = 1
        assert!(s.diverges());
        assert!(s.converged);
    }

    #[test]
    fn scaled_jensen_diagonal() {
        let s = limit_scaled_jensen(&gen("cubic"), &[0.4], &[0.4], 20).unwrap();
        assert!(s.values.iter().all(|v| *v == ExtReal::Finite(0.0)));
        assert!(s.converged);
        assert!(limit_scaled_jensen(&gen("log"), &[1.0], &[2.0], 3).is_err());
    }

    #[test]
    fn power_jensen_studies() {
        let s = limit_power_jensen(&wrap("quadratic"), &[0.0], &[2.0], 10).unwrap();
        assert_eq!(s.target, ExtReal::Finite(3.0));
        assert!(s.final_error() <= 1e-3 * 4.0, "{}", s.final_error());
        assert!(s.converged);
        assert!(s.errors_non_increasing_from(0));

        let d = limit_power_jensen(&wrap("quadratic"), &[0.7], &[0.7], 10).unwrap();
        assert!(d.values.iter().all(|v| *v == ExtReal::Finite(0.0)));
    }

    #[test]
    fn power_jensen_linear_example_needs_one_more_doubling() {
        // max{2, 4} - 3 = 1; at δ = 2^10 the power mean still trails max by
        // 4(1 - 2^{-1/1024}) ≈ 2.7067e-3, above the 2e-3 bound
        let f = wrap("linear");
        let at10 = limit_power_jensen(&f, &[1.0], &[3.0], 10).unwrap();
        assert_eq!(at10.target, ExtReal::Finite(1.0));
        assert!((at10.final_error() - 2.706_689_989_397e-3).abs() < 1e-12);
        assert!(!at10.converged);
        assert!(at10.errors_non_increasing_from(0));
        let at11 = limit_power_jensen(&f, &[1.0], &[3.0], 11).unwrap();
        assert!((at11.final_error() - 1.353_574_015_025e-3).abs() < 1e-12);
        assert!(at11.converged);
    }

    #[test]
    fn r_power_studies() {
        let q = gen("quadratic");
        let s = limit_r_power_bregman(&q, 1.0, 2.0, 20).unwrap();
        assert_eq!(s.target, ExtReal::Finite(4.0));
        assert!(s.final_error() <= 4e-3);
        assert!(s.converged);
        assert!(s.errors_non_increasing_from(0));

        let inf = limit_r_power_bregman(&q, 2.0, 1.0, 20).unwrap();
        assert_eq!(inf.target, ExtReal::PosInf);
        assert_eq!(inf.final_value(), ExtReal::PosInf);
        assert_eq!(inf.final_error(), 0.0);
        assert!(inf.converged);

        let d = limit_r_power_bregman(&wrap("quadratic"), 0.5, 0.5, 20).unwrap();
        assert!(d.values.iter().all(|v| v.finite().unwrap().abs() < 1e-12));
    }

    #[test]
    fn delta_average_integral_matches_closed_form() {
        for (name, t, tp, d, expected) in [
            ("quadratic", 1.0, 2.0, 0.5, 4.5),
            ("cubic", -1.0, 0.0, 0.5, 0.25),
            ("linear", 1.0, 3.0, 1.0, 2.0),
        ] {
            let q = gen(name);
            let quad = integrate_delta_average(&q, t, tp, d).unwrap();
            assert!(
                (quad.value - expected).abs() <= 1e-8 * expected,
                "{name}: {quad:?}"
            );
            let closed =
                delta_averaged_qcvx_bregman(&q, &[t], &[tp], AveragingRatio::new(d).unwrap())
                    .unwrap()
                    .finite()
                    .unwrap();
            assert!((quad.value - closed).abs() <= 1e-8 * closed.abs());
        }
    }

    #[test]
    fn delta_average_integral_preconditions() {
        let q = gen("quadratic");
        assert!(matches!(
            integrate_delta_average(&q, 2.0, 1.0, 0.5),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            integrate_delta_average(&gen("log").negate(), 2.0, 1.0, 2.0),
            Err(Error::DomainExtension { .. })
        ));
        assert_eq!(
            integrate_delta_average(&q, 1.5, 1.5, 0.5).unwrap().value,
            0.0
        );
    }

    #[test]
    fn delta_average_flags_infinite_branch_nodes() {
        // sine is not quasiconvex: the shifted pair crosses a peak
        let s = gen("sine");
        let r = integrate_delta_average(&s, 0.0, 1.0, 2.0);
        assert!(matches!(r, Err(Error::InfiniteBranch { .. })), "{r:?}");
    }

    #[test]
    fn quadrature_normalization_and_kl() {
        let u1 = NestedUniform::new(1.0).unwrap();
        let u2 = NestedUniform::new(2.0).unwrap();
        assert!((density_mass(&u1).value - 1.0).abs() < 1e-12);
        let kl = kl_quadrature(&u1, &u2).finite().unwrap();
        assert!((kl - kl_nested_uniform(1.0, 2.0).unwrap().finite().unwrap()).abs() < 1e-10);
        assert_eq!(kl_quadrature(&u2, &u1), ExtReal::PosInf);

        let p = PowerNested::new(1.5, 0.5).unwrap();
        let q = PowerNested::new(1.5, 1.25).unwrap();
        assert!((density_mass(&p).value - 1.0).abs() < 1e-10);
        let kl = kl_quadrature(&p, &q).finite().unwrap();
        let closed = kl_power_nested(1.5, 0.5, 1.25).unwrap().finite().unwrap();
        assert!((kl - closed).abs() < 1e-6, "{kl} vs {closed}");
        assert_eq!(kl_quadrature(&q, &p), ExtReal::PosInf);
    }
}
