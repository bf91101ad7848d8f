//! Bregman divergences for convex and quasiconvex generators.
//!
//! The quasiconvex Bregman pseudo-divergence is one-sided:
//!
//! ```text
//! qcvxB_Q(θ : θ′) = -(θ - θ′)ᵀ∇Q(θ′)   if Q(θ) ≤ Q(θ′)
//!                 = +∞                 otherwise
//! ```
//!
//! It vanishes for some `θ ≠ θ′` when `∇Q(θ′) = 0` at an inflection point.
//! The δ-averaged variant
//! `(Q(θ′ + δ(θ′ - θ)) - Q(θ′)) / δ` (finite iff `Q(θ′) ≥ Q(θ)`) is strictly
//! positive off the diagonal and needs no gradient.
//!
//! The branch test `Q(θ) ≤ Q(θ′)` is an exact float comparison, so the result
//! jumps between finite and `+∞` across ties. [`qcvx_bregman_diagnosed`] flags
//! inputs whose values agree to within [`TIE_REL_TOL`].
//!
//! Reverse divergences are obtained by swapping the arguments.

use crate::domain::check_dims;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::generator::Generator;

/// Relative gap below which `Q(θ)` and `Q(θ′)` count as tied.
pub const TIE_REL_TOL: f64 = 1e-12;

/// The ratio `δ > 0` between the averaging window and `θ′ - θ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AveragingRatio(f64);

impl AveragingRatio {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta.is_finite() {
            Ok(AveragingRatio(delta))
        } else {
            Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                reason: "averaging ratio must be finite and positive",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// A one-sided divergence value with its tie diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchValue {
    pub value: ExtReal,
    /// `Q(θ)` and `Q(θ′)` agree to [`TIE_REL_TOL`]; a perturbation of the
    /// inputs may flip the branch.
    pub tie_sensitive: bool,
}

fn is_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_REL_TOL * a.abs().max(b.abs())
}

fn check_pair(g: &Generator, theta: &[f64], theta_p: &[f64]) -> Result<()> {
    check_dims(g.dim(), theta.len())?;
    check_dims(g.dim(), theta_p.len())
}

/// `-(θ - θ′)ᵀ∇Q(θ′)`.
fn directional_term(q: &Generator, theta: &[f64], theta_p: &[f64]) -> Result<f64> {
    let grad = q.gradient(theta_p)?;
    let dot: f64 = theta
        .iter()
        .zip(theta_p)
        .zip(&grad)
        .map(|((a, b), g)| (a - b) * g)
        .sum();
    // `+ 0.0` turns the -0 of the diagonal into 0
    Ok(-dot + 0.0)
}

/// `F(θ) - F(θ′) - (θ - θ′)ᵀ∇F(θ′)`.
pub fn bregman(f: &Generator, theta: &[f64], theta_p: &[f64]) -> Result<f64> {
    check_pair(f, theta, theta_p)?;
    let (a, b) = (f.eval(theta)?, f.eval(theta_p)?);
    Ok(a - b + directional_term(f, theta, theta_p)?)
}

/// Quasiconvex Bregman pseudo-divergence; see the module docs.
pub fn qcvx_bregman(q: &Generator, theta: &[f64], theta_p: &[f64]) -> Result<ExtReal> {
    Ok(qcvx_bregman_diagnosed(q, theta, theta_p)?.value)
}

pub fn qcvx_bregman_diagnosed(
    q: &Generator,
    theta: &[f64],
    theta_p: &[f64],
) -> Result<BranchValue> {
    check_pair(q, theta, theta_p)?;
    let (a, b) = (q.eval(theta)?, q.eval(theta_p)?);
    let value = if a <= b {
        ExtReal::Finite(directional_term(q, theta, theta_p)?)
    } else {
        ExtReal::PosInf
    };
    Ok(BranchValue {
        value,
        tie_sensitive: is_tie(a, b),
    })
}

/// Quasiconvex Bregman divergence of `Q(θ) = Σ Q_i(θ_i)`.
///
/// The finite branch is the sum of the per-coordinate terms, but the branch
/// condition compares the totals: this is not the sum of the 1-D divergences.
pub fn qcvx_bregman_separable(
    components: &[Generator],
    theta: &[f64],
    theta_p: &[f64],
) -> Result<ExtReal> {
    check_dims(components.len(), theta.len())?;
    check_dims(components.len(), theta_p.len())?;
    let mut total = 0.0;
    let mut total_p = 0.0;
    for (c, (&x, &y)) in components.iter().zip(theta.iter().zip(theta_p)) {
        check_dims(1, c.dim())?;
        total += c.eval1(x)?;
        total_p += c.eval1(y)?;
    }
    if total > total_p {
        return Ok(ExtReal::PosInf);
    }
    let mut sum = 0.0;
    for (c, (&x, &y)) in components.iter().zip(theta.iter().zip(theta_p)) {
        sum -= (x - y) * c.derivative1(y)?;
    }
    Ok(ExtReal::Finite(sum))
}

/// δ-averaged quasiconvex Bregman divergence:
/// `(Q(θ′ + δ(θ′ - θ)) - Q(θ′)) / δ` when `Q(θ′) ≥ Q(θ)`, else `+∞`.
///
/// The extrapolated point must lie in the domain.
pub fn delta_averaged_qcvx_bregman(
    q: &Generator,
    theta: &[f64],
    theta_p: &[f64],
    ratio: AveragingRatio,
) -> Result<ExtReal> {
    check_pair(q, theta, theta_p)?;
    let (a, b) = (q.eval(theta)?, q.eval(theta_p)?);
    if b < a {
        return Ok(ExtReal::PosInf);
    }
    let delta = ratio.get();
    let ahead: Vec<f64> = theta
        .iter()
        .zip(theta_p)
        .map(|(&x, &y)| y + delta * (y - x))
        .collect();
    if !q.domain().contains(&ahead) {
        return Err(Error::DomainExtension { point: ahead });
    }
    Ok(ExtReal::Finite((q.eval(&ahead)? - b) / delta))
}

/// Extended Bregman divergence `Q(θ) - Q(θ′) + qcvxB_Q(θ : θ′)`.
///
/// Collapses to [`bregman`] for convex generators on the finite branch and
/// may be negative otherwise.
pub fn extended_bregman(q: &Generator, theta: &[f64], theta_p: &[f64]) -> Result<ExtReal> {
    check_pair(q, theta, theta_p)?;
    let (a, b) = (q.eval(theta)?, q.eval(theta_p)?);
    if a > b {
        return Ok(ExtReal::PosInf);
    }
    Ok(ExtReal::Finite(
        a - b + directional_term(q, theta, theta_p)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::GeneratorSpec;
    use proptest::prelude::*;

    fn gen(name: &str) -> Generator {
        GeneratorSpec::named(name).build().unwrap()
    }

    fn finite(v: ExtReal) -> f64 {
        v.finite().expect("finite branch")
    }

    fn ratio(d: f64) -> AveragingRatio {
        AveragingRatio::new(d).unwrap()
    }

    #[test]
    fn bregman_examples() {
        assert_eq!(bregman(&gen("quadratic"), &[3.0], &[1.0]).unwrap(), 4.0);
        assert_eq!(bregman(&gen("log"), &[2.5], &[2.5]).unwrap(), 0.0);
        let neg_log = gen("log").negate();
        let v = bregman(&neg_log, &[2.0], &[1.0]).unwrap();
        assert!((v - 0.306_852_819_440_054_7).abs() < 1e-15, "{v}");
    }

    #[test]
    fn qcvx_bregman_closed_forms() {
        let lin = gen("linear");
        assert_eq!(
            qcvx_bregman(&lin, &[1.0], &[2.0]).unwrap(),
            ExtReal::Finite(1.0)
        );
        assert_eq!(qcvx_bregman(&lin, &[2.0], &[1.0]).unwrap(), ExtReal::PosInf);
        // 1 - θ/θ′
        assert_eq!(
            qcvx_bregman(&gen("log"), &[1.0], &[2.0]).unwrap(),
            ExtReal::Finite(0.5)
        );
        // (√θ′ - θ/√θ′)/2
        assert_eq!(
            qcvx_bregman(&gen("sqrt"), &[1.0], &[4.0]).unwrap(),
            ExtReal::Finite(0.75)
        );
        // inflection point: zero although θ ≠ θ′
        assert_eq!(
            qcvx_bregman(&gen("cubic"), &[-1.0], &[0.0]).unwrap(),
            ExtReal::Finite(0.0)
        );
    }

    #[test]
    fn qcvx_bregman_tie_handling() {
        let q = gen("quadratic");
        let fwd = qcvx_bregman_diagnosed(&q, &[-2.0], &[2.0]).unwrap();
        let rev = qcvx_bregman_diagnosed(&q, &[2.0], &[-2.0]).unwrap();
        assert!(fwd.tie_sensitive && rev.tie_sensitive);
        assert_eq!(fwd.value, ExtReal::Finite(16.0));
        assert_eq!(rev.value, ExtReal::Finite(16.0));
        let clear = qcvx_bregman_diagnosed(&q, &[1.0], &[2.0]).unwrap();
        assert!(!clear.tie_sensitive);
        // one ulp above a tie lands on the infinite branch
        let above = qcvx_bregman_diagnosed(&q, &[2.0f64.next_up()], &[-2.0]).unwrap();
        assert_eq!(above.value, ExtReal::PosInf);
        assert!(above.tie_sensitive);
    }

    #[test]
    fn qcvx_bregman_errors() {
        assert!(matches!(
            qcvx_bregman(&gen("log"), &[1.0], &[0.0]),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            qcvx_bregman(&gen("log"), &[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn separable_examples() {
        let comps = vec![gen("quadratic"), gen("quadratic")];
        assert_eq!(
            qcvx_bregman_separable(&comps, &[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            ExtReal::Finite(4.0)
        );
        assert_eq!(
            qcvx_bregman_separable(&comps, &[1.0, 0.0], &[0.0, 2.0]).unwrap(),
            ExtReal::Finite(8.0)
        );
        let per_coordinate = qcvx_bregman(&comps[0], &[1.0], &[0.0]).unwrap()
            + qcvx_bregman(&comps[1], &[0.0], &[2.0]).unwrap();
        assert_eq!(per_coordinate, ExtReal::PosInf);
        assert_eq!(
            qcvx_bregman_separable(&comps, &[0.3, -1.2], &[0.3, -1.2]).unwrap(),
            ExtReal::Finite(0.0)
        );
        assert!(qcvx_bregman_separable(&comps, &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn separable_matches_joint_generator() {
        let comps = vec![gen("quadratic"), gen("cubic")];
        let joint = Generator::separable(comps.clone()).unwrap();
        for (t, tp) in [([0.5, -1.0], [1.0, 0.5]), ([2.0, 1.0], [0.1, 0.2])] {
            assert_eq!(
                qcvx_bregman_separable(&comps, &t, &tp).unwrap(),
                qcvx_bregman(&joint, &t, &tp).unwrap()
            );
        }
    }

    #[test]
    fn delta_averaged_examples() {
        // 2θ′(θ′-θ) + δ(θ′-θ)²
        assert_eq!(
            delta_averaged_qcvx_bregman(&gen("quadratic"), &[1.0], &[2.0], ratio(0.5)).unwrap(),
            ExtReal::Finite(4.5)
        );
        // -δ²θ³ at the inflection point
        assert_eq!(
            delta_averaged_qcvx_bregman(&gen("cubic"), &[-1.0], &[0.0], ratio(0.5)).unwrap(),
            ExtReal::Finite(0.25)
        );
        for d in [0.1, 0.5, 1.0, 3.0] {
            let v = delta_averaged_qcvx_bregman(&gen("linear"), &[1.0], &[2.0], ratio(d)).unwrap();
            assert!((finite(v) - 1.0).abs() < 1e-14, "δ = {d}");
        }
        assert_eq!(
            delta_averaged_qcvx_bregman(&gen("quadratic"), &[2.0], &[1.0], ratio(0.5)).unwrap(),
            ExtReal::PosInf
        );
    }

    #[test]
    fn delta_averaged_reports_domain_extension() {
        // √ decreasing direction: θ′ + δ(θ′ - θ) = 1 + 2(1 - 2) < 0
        let r = delta_averaged_qcvx_bregman(&gen("sqrt").negate(), &[2.0], &[1.0], ratio(2.0));
        match r {
            Err(Error::DomainExtension { point }) => assert_eq!(point, vec![-1.0]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(AveragingRatio::new(0.0).is_err());
        assert!(AveragingRatio::new(-1.0).is_err());
    }

    #[test]
    fn delta_averaged_handles_nonsmooth_generators() {
        let abs = gen("abs");
        let v = finite(delta_averaged_qcvx_bregman(&abs, &[-1.0], &[1.0], ratio(1.0)).unwrap());
        assert_eq!(v, 2.0);
    }

    #[test]
    fn extended_bregman_examples() {
        let v = finite(extended_bregman(&gen("log"), &[1.0], &[2.0]).unwrap());
        assert!((v + 0.193_147_180_559_945_3).abs() < 1e-15, "{v}");
        let q = gen("quadratic");
        assert_eq!(
            extended_bregman(&q, &[1.0], &[2.0]).unwrap(),
            ExtReal::Finite(bregman(&q, &[1.0], &[2.0]).unwrap())
        );
        assert_eq!(
            extended_bregman(&q, &[2.0], &[1.0]).unwrap(),
            ExtReal::PosInf
        );
        assert_eq!(
            extended_bregman(&gen("sqrt"), &[3.0], &[3.0]).unwrap(),
            ExtReal::Finite(0.0)
        );
    }

    proptest! {
        #[test]
        fn delta_average_strictly_positive_for_cubic(
            a in -5.0f64..5.0, gap in 1e-3f64..5.0, d in 0.05f64..3.0, at_zero in any::<bool>()
        ) {
            let (theta, theta_p) = if at_zero { (-gap, 0.0) } else { (a, a + gap) };
            let v = delta_averaged_qcvx_bregman(&gen("cubic"), &[theta], &[theta_p], ratio(d)).unwrap();
            prop_assert!(finite(v) > 0.0);
        }

        #[test]
        fn convex_case_dominates_value_gap(a in -4.0f64..4.0, b in -4.0f64..4.0) {
            let q = gen("quadratic");
            let (fa, fb) = (a * a, b * b);
            if let ExtReal::Finite(v) = qcvx_bregman(&q, &[a], &[b]).unwrap() {
                prop_assert!(v >= (fb - fa) - 1e-12 * (1.0 + fb));
                prop_assert!(fb - fa >= 0.0);
            }
        }

        #[test]
        fn exactly_one_orientation_infinite(a in 0.01f64..10.0, b in 0.01f64..10.0) {
            let g = gen("log");
            let fwd = qcvx_bregman(&g, &[a], &[b]).unwrap();
            let rev = qcvx_bregman(&g, &[b], &[a]).unwrap();
            if a != b {
                prop_assert!(fwd.is_inf() != rev.is_inf());
            } else {
                prop_assert!(fwd.is_finite() && rev.is_finite());
            }
        }
    }
}
