use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcvxdiv::bregman::{delta_averaged_qcvx_bregman, AveragingRatio};
use qcvxdiv::error::Error;
use qcvxdiv::generator::quasiconvex_catalog;
use qcvxdiv::oracles::{
    integrate_delta_average, integrate_delta_average_with_tol, limit_power_jensen,
    limit_r_power_bregman, limit_scaled_jensen,
};
use qcvxdiv::{ExtReal, Generator, GeneratorSpec};

fn named(name: &str) -> Generator {
    GeneratorSpec::named(name).build().unwrap()
}

fn plus_one(name: &str) -> Generator {
    GeneratorSpec::affine(1.0, 1.0, GeneratorSpec::named(name))
        .build()
        .unwrap()
}

fn oriented(q: &Generator, a: f64, b: f64) -> (f64, f64) {
    if q.eval1(a).unwrap() <= q.eval1(b).unwrap() {
        (a, b)
    } else {
        (b, a)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Pairs are kept apart so the error signal stays above cancellation noise.
    #[test]
    fn scaled_jensen_errors_shrink_after_k6(
        which in 0usize..3,
        a in 0.05f64..10.0,
        gap in 0.1f64..5.0,
        flip in any::<bool>(),
    ) {
        let name = ["log", "sqrt", "quadratic"][which];
        let q = named(name);
        let (a, b) = if name == "quadratic" {
            // error coefficient is proportional to θ + θ′
            let x = a - 5.0;
            let y = x + if flip { gap } else { -gap };
            prop_assume!((x + y).abs() > 0.1 && y.abs() <= 10.0);
            (x, y)
        } else {
            (a, a + gap)
        };
        let (t, tp) = oriented(&q, a, b);
        let s = limit_scaled_jensen(&q, &[t], &[tp], 20).unwrap();
        prop_assert!(s.target.is_finite());
        prop_assert!(s.errors_non_increasing_from(6), "{:?}", s.errors);
        prop_assert!(s.converged);
    }

    #[test]
    fn power_jensen_error_bounded_by_max_value(
        which in 0usize..3,
        a in 0.1f64..5.0,
        b in 0.1f64..5.0,
    ) {
        let f = [plus_one("quadratic"), plus_one("linear"), named("sqrt")][which].clone();
        let s = limit_power_jensen(&f, &[a], &[b], 10).unwrap();
        let fmax = f.eval1(a).unwrap().max(f.eval1(b).unwrap());
        // max - P_δ ≤ (1 - 2^{-1/δ}) max
        prop_assert!(s.final_error() <= (1.0 - (-1.0f64 / 1024.0).exp2()) * fmax * (1.0 + 1e-9));
        prop_assert!(s.errors_non_increasing_from(0), "{:?}", s.errors);
    }

    #[test]
    fn r_power_finite_branch_converges(a in 0.2f64..4.0, gap in 0.1f64..3.0) {
        let f = plus_one("quadratic");
        let s = limit_r_power_bregman(&f, a, a + gap, 20).unwrap();
        prop_assert!(s.target.is_finite());
        prop_assert!(s.converged, "{:?}", s.errors);
        let rev = limit_r_power_bregman(&f, a + gap, a, 20).unwrap();
        prop_assert_eq!(rev.target, ExtReal::PosInf);
        prop_assert!(rev.converged);
    }
}

#[test]
fn cubic_error_can_change_sign_along_the_schedule() {
    // error = ε(3θθ′d + d³ε)/(1-ε) with d = θ′ - θ; for θθ′ < 0 it crosses
    // zero near ε = 3|θθ′|/d², here between k = 6 and k = 7
    let (t, tp) = (-1.874_946_075_404_872_1, 0.002_400_852_082_337_756_6);
    let s = limit_scaled_jensen(&named("cubic"), &[t], &[tp], 20).unwrap();
    assert!(!s.errors_non_increasing_from(6), "{:?}", s.errors);
    let target = s.target.finite().unwrap();
    assert!(s.final_error() <= 1e-4 * (1.0 + target.abs()));
    assert!(s.converged);
}

/// Draws `(θ, θ′, δ)` with `Q(θ) ≤ Q(θ′)` whose shifted segment stays in the
/// domain.
fn valid_triple(rng: &mut ChaCha8Rng, q: &Generator, lo: f64, hi: f64) -> (f64, f64, f64) {
    loop {
        let (t, tp) = oriented(q, rng.gen_range(lo..hi), rng.gen_range(lo..hi));
        let delta = rng.gen_range(0.05..2.0);
        let width = delta * (tp - t);
        if t != tp && q.domain().contains(&[t + width]) && q.domain().contains(&[tp + width]) {
            return (t, tp, delta);
        }
    }
}

#[test]
fn shifted_pairs_stay_on_the_finite_branch() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for e in quasiconvex_catalog()
        .into_iter()
        .filter(|e| e.sample_box.dim() == 1)
    {
        let q = e.build();
        let (lo, hi) = e.sample_box.intervals()[0].endpoints().unwrap();
        for _ in 0..1000 {
            let (t, tp, delta) = valid_triple(&mut rng, &q, lo, hi);
            let quad = match integrate_delta_average(&q, t, tp, delta) {
                Ok(r) => r,
                Err(Error::InfiniteBranch { u }) => {
                    panic!(
                        "{}: infinite branch at u={u} for ({t}, {tp}, {delta})",
                        q.label()
                    )
                }
                Err(e) => panic!("{}: {e}", q.label()),
            };
            if q.label().starts_with("abs") {
                continue;
            }
            let closed =
                delta_averaged_qcvx_bregman(&q, &[t], &[tp], AveragingRatio::new(delta).unwrap())
                    .unwrap()
                    .finite()
                    .unwrap();
            let width = (delta * (tp - t)).abs();
            let bound = (1e-8 * closed.abs()).max(1e-10 / width);
            assert!(
                (quad.value - closed).abs() <= bound,
                "{}: ({t}, {tp}, {delta}) quadrature {} vs closed {closed}",
                q.label(),
                quad.value
            );
        }
    }
}

#[test]
fn halving_tolerance_stays_within_reported_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in ["quadratic", "cubic", "log", "sqrt", "neg-gauss"] {
        let q = named(name);
        let (lo, hi) = match name {
            "log" | "sqrt" => (0.1, 5.0),
            _ => (-2.0, 2.0),
        };
        for _ in 0..50 {
            let (t, tp, delta) = valid_triple(&mut rng, &q, lo, hi);
            let coarse = integrate_delta_average_with_tol(&q, t, tp, delta, 1e-10).unwrap();
            let fine = integrate_delta_average_with_tol(&q, t, tp, delta, 5e-11).unwrap();
            assert!(
                (coarse.value - fine.value).abs()
                    <= coarse.abs_error.max(f64::EPSILON * coarse.value.abs()),
                "{name}: ({t}, {tp}, {delta}) {coarse:?} vs {fine:?}"
            );
        }
    }
}
