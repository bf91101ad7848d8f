//! Sampling-based refutation of quasiconvexity.
//!
//! Sampling can refute but never certify, so the positive verdict is
//! [`Verdict::NoViolationFound`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{interpolate, BoxDomain};
use crate::error::{Error, Result};
use crate::generator::Generator;

/// Relative slack on each comparison, scaled by the values on the line.
pub const QUASICONVEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NoViolationFound,
    Refuted,
}

/// Three collinear points `a`, `mid`, `b` with `Q(mid) > max{Q(a), Q(b)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub a: Vec<f64>,
    pub mid: Vec<f64>,
    pub b: Vec<f64>,
    /// `Q(mid) - max{Q(a), Q(b)}`.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiconvexReport {
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub lines_checked: usize,
}

const MAX_WITNESSES: usize = 5;

/// Samples `n_lines` random segments in `region`, `n_points` equispaced points
/// per segment, and looks for a point that rises above both of the
/// neighbourhoods on either side of it (the restriction to a line must be
/// non-increasing then non-decreasing).
pub fn check_quasiconvex(
    g: &Generator,
    region: &BoxDomain,
    n_lines: usize,
    n_points: usize,
    seed: u64,
) -> Result<QuasiconvexReport> {
    if n_points < 3 {
        return Err(Error::InvalidParameter {
            name: "n_points",
            value: n_points as f64,
            reason: "need at least 3 points per line",
        });
    }
    if region.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: region.dim(),
        });
    }
    if !region.is_bounded() {
        return Err(Error::DegenerateBox("sampling box must be bounded".into()));
    }
    if !g.domain().contains_box(region) {
        return Err(Error::DegenerateBox(
            "sampling box is not contained in the generator domain".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds: Vec<(f64, f64)> = region
        .intervals()
        .iter()
        .map(|iv| iv.endpoints().expect("bounded"))
        .collect();
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        bounds
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..=hi))
            .collect()
    };

    let mut witnesses = Vec::new();
    let mut points = Vec::with_capacity(n_points);
    let mut values = Vec::with_capacity(n_points);
    for _ in 0..n_lines {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        points.clear();
        values.clear();
        for j in 0..n_points {
            let t = j as f64 / (n_points - 1) as f64;
            let p = interpolate(&a, &b, t)?;
            values.push(g.eval(&p)?);
            points.push(p);
        }
        if let Some((i, j, k, excess)) = unimodality_violation(&values) {
            witnesses.push(Witness {
                a: points[i].clone(),
                mid: points[j].clone(),
                b: points[k].clone(),
                excess,
            });
            if witnesses.len() >= MAX_WITNESSES {
                break;
            }
        }
    }
    let lines_checked = n_lines;
    Ok(QuasiconvexReport {
        verdict: if witnesses.is_empty() {
            Verdict::NoViolationFound
        } else {
            Verdict::Refuted
        },
        witnesses,
        lines_checked,
    })
}

/// Largest violation `v[j] > max{v[i], v[k]}` with `i < j < k`, beyond the
/// tolerance. The most damaging pair for a given `j` is the smallest value on
/// each side, so prefix and suffix minima make this linear.
fn unimodality_violation(values: &[f64]) -> Option<(usize, usize, usize, f64)> {
    let n = values.len();
    let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = QUASICONVEX_TOL * scale;

    let mut suffix = vec![0usize; n];
    suffix[n - 1] = n - 1;
    for j in (0..n - 1).rev() {
        suffix[j] = if values[j] <= values[suffix[j + 1]] {
            j
        } else {
            suffix[j + 1]
        };
    }
    let mut best: Option<(usize, usize, usize, f64)> = None;
    let mut prefix = 0usize;
    for j in 1..n - 1 {
        if values[j - 1] <= values[prefix] {
            prefix = j - 1;
        }
        let k = suffix[j + 1];
        let excess = values[j] - values[prefix].max(values[k]);
        if excess > tol && best.is_none_or(|b| excess > b.3) {
            best = Some((prefix, j, k, excess));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{quasiconvex_catalog, GeneratorSpec};
    use std::f64::consts::PI;

    #[test]
    fn unimodal_sequences_pass() {
        assert!(unimodality_violation(&[3.0, 2.0, 1.0, 1.0, 2.0]).is_none());
        assert!(unimodality_violation(&[1.0, 2.0, 3.0]).is_none());
        assert!(unimodality_violation(&[3.0, 2.0, 1.0]).is_none());
        let (i, j, k, ex) = unimodality_violation(&[0.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!((i, j, k), (0, 1, 2));
        assert_eq!(ex, 1.0);
        // rounding-level bumps are tolerated
        assert!(unimodality_violation(&[1.0, 1.0 + 1e-15, 1.0]).is_none());
    }

    #[test]
    fn quadratic_is_not_refuted() {
        let q = GeneratorSpec::named("quadratic").build().unwrap();
        let b = BoxDomain::cube(-5.0, 5.0, 1).unwrap();
        let r = check_quasiconvex(&q, &b, 32, 101, 7).unwrap();
        assert_eq!(r.verdict, Verdict::NoViolationFound);
    }

    #[test]
    fn sine_is_refuted_with_witness() {
        let s = GeneratorSpec::named("sine").build().unwrap();
        let b = BoxDomain::cube(0.0, 4.0 * PI, 1).unwrap();
        let r = check_quasiconvex(&s, &b, 32, 101, 7).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        let w = &r.witnesses[0];
        let v = |p: &[f64]| s.eval(p).unwrap();
        assert!(v(&w.mid) > v(&w.a).max(v(&w.b)));
        assert!(w.excess > 0.0);
    }

    #[test]
    fn log_is_not_refuted() {
        let g = GeneratorSpec::named("log").build().unwrap();
        let b = BoxDomain::cube(0.1, 10.0, 1).unwrap();
        let r = check_quasiconvex(&g, &b, 32, 101, 7).unwrap();
        assert_eq!(r.verdict, Verdict::NoViolationFound);
    }

    #[test]
    fn deterministic_given_seed() {
        let s = GeneratorSpec::named("sine").build().unwrap();
        let b = BoxDomain::cube(0.0, 4.0 * PI, 1).unwrap();
        assert_eq!(
            check_quasiconvex(&s, &b, 16, 51, 3).unwrap(),
            check_quasiconvex(&s, &b, 16, 51, 3).unwrap()
        );
    }

    #[test]
    fn catalog_never_refuted() {
        for entry in quasiconvex_catalog() {
            let g = entry.build();
            let r = check_quasiconvex(&g, &entry.sample_box, 64, 101, 19).unwrap();
            assert_eq!(r.verdict, Verdict::NoViolationFound, "{}", g.label());
        }
    }

    #[test]
    fn rejects_bad_boxes() {
        let g = GeneratorSpec::named("log").build().unwrap();
        let reaching_zero = BoxDomain::cube(0.0, 1.0, 1).unwrap();
        assert!(matches!(
            check_quasiconvex(&g, &reaching_zero, 4, 11, 0),
            Err(Error::DegenerateBox(_))
        ));
        assert!(check_quasiconvex(&g, &BoxDomain::reals(1), 4, 11, 0).is_err());
        let b = BoxDomain::cube(0.5, 1.0, 1).unwrap();
        assert!(check_quasiconvex(&g, &b, 4, 2, 0).is_err());
    }
}
