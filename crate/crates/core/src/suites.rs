//! Randomized property suites behind `qcvxdiv check`.
//!
//! Each suite draws from a seeded ChaCha8 stream and runs sequentially, so a
//! `(suite, samples, seed)` triple always produces the same report.
//! Identity tolerances are relative to `1 + Σ|terms|` of the quantities being
//! compared.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bregman::{bregman, delta_averaged_qcvx_bregman, qcvx_bregman, AveragingRatio};
use crate::domain::{interpolate, BoxDomain};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::generator::{quasiconvex_catalog, Generator, GeneratorSpec};
use crate::jensen::{extended_jensen, qccv_jensen, qcvx_jensen, SkewParam};
use crate::means::{mn_jensen, weighted_mean, MeanSpec};
use crate::oracles::{density_mass, kl_quadrature};
use crate::statdiv::{
    expfam_catalog, expfam_cross_entropy, expfam_entropy, expfam_kl, kl_nested_uniform,
    kl_power_nested, qcvx_bregman_from_kl, qcvx_bregman_reverse, NestedUniform, PowerNested,
};

pub const IDENTITY_TOL: f64 = 1e-10;
pub const FIRST_ORDER_TOL: f64 = 1e-9;
pub const KL_QUADRATURE_TOL: f64 = 1e-6;
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Rounding allowance for orderings between two computed means.
pub const MEAN_ORDER_TOL: f64 = 1e-13;
pub const MAX_WITNESSES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    FirstOrder,
    OneSidedInfinity,
    DeltaPositivity,
    KlQuadrature,
    Means,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Identities,
        Suite::FirstOrder,
        Suite::OneSidedInfinity,
        Suite::DeltaPositivity,
        Suite::KlQuadrature,
        Suite::Means,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::FirstOrder => "first-order",
            Suite::OneSidedInfinity => "one-sided-infinity",
            Suite::DeltaPositivity => "delta-positivity",
            Suite::KlQuadrature => "kl-quadrature",
            Suite::Means => "means",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown suite `{s}`")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub failures: usize,
    /// The first [`MAX_WITNESSES`] violations.
    pub witnesses: Vec<String>,
    /// Summary statistics and observations that are not pass/fail.
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            checks: 0,
            failures: 0,
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// Counts one check. `Ok(None)` passes, `Ok(Some(w))` is a violation
    /// with witness `w`, and a library error is a violation too.
    fn record(&mut self, what: &str, outcome: Result<Option<String>>) {
        self.checks += 1;
        let witness = match outcome {
            Ok(None) => return,
            Ok(Some(w)) => w,
            Err(e) => format!("error: {e}"),
        };
        self.failures += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(format!("{what}: {witness}"));
        }
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "suite {}: {} checks, {} passed, {} failed",
            self.suite,
            self.checks,
            self.checks - self.failures,
            self.failures
        )?;
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        for w in &self.witnesses {
            writeln!(f, "witness: {w}")?;
        }
        Ok(())
    }
}

/// Runs `suite` with `samples` random inputs per generator/family.
pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Result<SuiteReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: 0.0,
            reason: "at least one sample is required",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new(suite);
    match suite {
        Suite::Identities => identities(&mut report, &mut rng, samples)?,
        Suite::FirstOrder => first_order(&mut report, &mut rng, samples),
        Suite::OneSidedInfinity => one_sided_infinity(&mut report, &mut rng, samples),
        Suite::DeltaPositivity => delta_positivity(&mut report, &mut rng, samples)?,
        Suite::KlQuadrature => kl_quadrature_suite(&mut report, &mut rng, samples),
        Suite::Means => means(&mut report, &mut rng, samples)?,
    }
    Ok(report)
}

fn draw(rng: &mut ChaCha8Rng, b: &BoxDomain) -> Vec<f64> {
    b.intervals()
        .iter()
        .map(|iv| {
            let (lo, hi) = iv.endpoints().expect("sampling boxes are bounded");
            rng.gen_range(lo..=hi)
        })
        .collect()
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= IDENTITY_TOL * scale
}

fn mismatch(a: f64, b: f64, scale: f64) -> Option<String> {
    (!close(a, b, scale)).then(|| format!("{a:e} vs {b:e} (scale {scale:e})"))
}

fn abs_sum(xs: &[f64]) -> f64 {
    1.0 + xs.iter().map(|x| x.abs()).sum::<f64>()
}

fn point(label: &str, t: &[f64], tp: &[f64]) -> String {
    format!("{label} theta={t:?} theta_prime={tp:?}")
}

const AFFINE_A: [f64; 3] = [0.5, 2.0, 10.0];
const AFFINE_B: [f64; 3] = [-3.0, 0.0, 7.0];

fn identities(report: &mut SuiteReport, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
    let catalog = quasiconvex_catalog();
    let gens: Vec<Generator> = catalog.iter().map(|e| e.build()).collect();
    let negated: Vec<Generator> = gens.iter().map(|g| g.negate()).collect();
    let mut scaled = Vec::new();
    for e in &catalog {
        let mut row = Vec::new();
        for a in AFFINE_A {
            for b in AFFINE_B {
                row.push((a, GeneratorSpec::affine(a, b, e.spec.clone()).build()?));
            }
        }
        scaled.push(row);
    }
    let families = expfam_catalog();

    for _ in 0..samples {
        let i = rng.gen_range(0..catalog.len());
        let (q, b) = (&gens[i], &catalog[i].sample_box);
        let t = draw(rng, b);
        let tp = draw(rng, b);
        let alpha = rng.gen_range(0.001..0.999);
        let skew = SkewParam::new(alpha)?;
        let at = point(q.label(), &t, &tp);
        let (qa, qb) = (q.eval(&t)?, q.eval(&tp)?);
        let qm = q.eval(&interpolate(&t, &tp, alpha)?)?;
        let scale = abs_sum(&[qa, qb, qm]);
        let j = qcvx_jensen(q, &t, &tp, skew)?;
        let ej = extended_jensen(q, &t, &tp, skew)?;
        let gap = (qa - qb).abs();

        report.record(
            "qccvJ_{-Q} = qcvxJ_Q",
            qccv_jensen(&negated[i], &t, &tp, skew)
                .map(|h| mismatch(h, j, scale).map(|m| format!("{at} alpha={alpha}: {m}"))),
        );

        let (a, ref qs) = scaled[i][rng.gen_range(0..9)];
        report.record(
            "J_{aQ+b} = a J_Q",
            qcvx_jensen(qs, &t, &tp, skew).map(|js| {
                mismatch(js, a * j, a * scale + 10.0)
                    .map(|m| format!("{at} alpha={alpha} label={}: {m}", qs.label()))
            }),
        );

        let decomposed = ej + 0.5 * gap + qa * (alpha - 0.5) + qb * (0.5 - alpha);
        report.record(
            "general-alpha decomposition",
            Ok(mismatch(j, decomposed, scale).map(|m| format!("{at} alpha={alpha}: {m}"))),
        );
        report.record(
            "eJ <= qcvxJ",
            Ok((ej > j + IDENTITY_TOL * scale)
                .then(|| format!("{at} alpha={alpha}: {ej:e} > {j:e}"))),
        );
        report.record(
            "qcvxJ >= 0",
            Ok((j < -IDENTITY_TOL * scale).then(|| format!("{at} alpha={alpha}: {j:e}"))),
        );

        let half = SkewParam::HALF;
        let qh = q.eval(&interpolate(&t, &tp, 0.5)?)?;
        let scale_h = abs_sum(&[qa, qb, qh]);
        let jh = qcvx_jensen(q, &t, &tp, half)?;
        let ejh = extended_jensen(q, &t, &tp, half)?;
        report.record(
            "alpha=1/2 decomposition",
            Ok(mismatch(jh, ejh + 0.5 * gap, scale_h).map(|m| format!("{at}: {m}"))),
        );
        report.record(
            "eJ >= -|dQ|/2 at alpha=1/2",
            Ok((ejh < -0.5 * gap - IDENTITY_TOL * scale_h)
                .then(|| format!("{at}: {ejh:e} < {:e}", -0.5 * gap))),
        );
        report.record(
            "qcvxJ symmetric at alpha=1/2",
            qcvx_jensen(q, &tp, &t, half)
                .map(|js| mismatch(jh, js, scale_h).map(|m| format!("{at}: {m}"))),
        );

        let fam = &families[rng.gen_range(0..families.len())];
        let f = fam.family.cumulant();
        let mut t = draw(rng, &fam.sample_box);
        let mut tp = draw(rng, &fam.sample_box);
        let at = point(fam.name, &t, &tp);
        let kl = expfam_kl(&fam.family, &t, &tp)?;
        let ce = expfam_cross_entropy(&fam.family, &t, &tp)?;
        let h = expfam_entropy(&fam.family, &t)?;
        let scale = abs_sum(&[kl, ce, h]);
        report.record(
            "KL = cross-entropy - entropy",
            Ok(mismatch(kl, ce - h, scale).map(|m| format!("{at}: {m}"))),
        );
        report.record(
            "KL = B_F(theta':theta)",
            bregman(f, &tp, &t).map(|b| mismatch(kl, b, scale).map(|m| format!("{at}: {m}"))),
        );
        if f.eval(&tp)? > f.eval(&t)? {
            std::mem::swap(&mut t, &mut tp);
        }
        let scale = abs_sum(&[kl, f.eval(&t)?, f.eval(&tp)?]);
        report.record(
            "qcvxB_from_kl = qcvx_bregman",
            qcvx_bregman_from_kl(&fam.family, &t, &tp).and_then(|a| {
                let b = qcvx_bregman_reverse(&fam.family, &t, &tp)?;
                Ok(match (a, b) {
                    (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                        mismatch(a, b, scale).map(|m| format!("{}: {m}", point(fam.name, &t, &tp)))
                    }
                    _ => Some(format!("{}: {a} vs {b}", point(fam.name, &t, &tp))),
                })
            }),
        );
    }
    Ok(())
}

/// Pair drawn from the box, oriented so that `Q(θ) ≤ Q(θ′)`.
fn oriented_pair(
    rng: &mut ChaCha8Rng,
    q: &Generator,
    b: &BoxDomain,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = draw(rng, b);
    let tp = draw(rng, b);
    Ok(if q.eval(&t)? <= q.eval(&tp)? {
        (t, tp)
    } else {
        (tp, t)
    })
}

fn first_order(report: &mut SuiteReport, rng: &mut ChaCha8Rng, samples: usize) {
    let mut worst = f64::INFINITY;
    for e in quasiconvex_catalog() {
        let q = e.build();
        for _ in 0..samples {
            let outcome = oriented_pair(rng, &q, &e.sample_box).and_then(|(t, tp)| {
                Ok(match qcvx_bregman(&q, &t, &tp)? {
                    ExtReal::Finite(v) => {
                        worst = worst.min(v);
                        (v < -FIRST_ORDER_TOL)
                            .then(|| format!("{}: {v:e}", point(q.label(), &t, &tp)))
                    }
                    ExtReal::PosInf => Some(format!(
                        "{}: infinite although Q(theta) <= Q(theta_prime)",
                        point(q.label(), &t, &tp)
                    )),
                })
            });
            report.record("finite branch >= -1e-9", outcome);
        }
    }
    report
        .notes
        .push(format!("min finite-branch value {worst:e}"));
}

fn one_sided_infinity(report: &mut SuiteReport, rng: &mut ChaCha8Rng, samples: usize) {
    let mut ties = 0usize;
    for e in quasiconvex_catalog() {
        let q = e.build();
        for _ in 0..samples {
            let t = draw(rng, &e.sample_box);
            let tp = draw(rng, &e.sample_box);
            if t == tp {
                continue;
            }
            let outcome = (|| {
                let tie = q.eval(&t)? == q.eval(&tp)?;
                let fwd = qcvx_bregman(&q, &t, &tp)?;
                let rev = qcvx_bregman(&q, &tp, &t)?;
                let infinite = [fwd, rev].iter().filter(|v| v.is_inf()).count();
                let expected = if tie { 0 } else { 1 };
                ties += usize::from(tie);
                Ok((infinite != expected).then(|| {
                    format!(
                        "{}: forward {fwd}, reverse {rev}",
                        point(q.label(), &t, &tp)
                    )
                }))
            })();
            report.record("exactly one orientation infinite", outcome);
        }
    }
    report.notes.push(format!(
        "{ties} exact value ties (both orientations finite)"
    ));
}

/// 2-D generators with strictly convex sublevel sets, for tie cases.
const TIE_GENERATORS: [&str; 3] = ["quadratic", "neg-gauss", "log-norm-sq"];

fn delta_positivity(report: &mut SuiteReport, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
    let cubic = GeneratorSpec::named("cubic").build()?;
    for s in 0..samples {
        let mut t = rng.gen_range(-3.0..3.0);
        let mut tp = if s % 10 == 0 {
            0.0
        } else {
            rng.gen_range(-3.0..3.0)
        };
        if t == tp {
            continue;
        }
        if tp < t {
            if tp == 0.0 {
                t = -t;
            } else {
                std::mem::swap(&mut t, &mut tp);
            }
        }
        let delta = rng.gen_range(0.05..2.0);
        let outcome = delta_averaged_qcvx_bregman(&cubic, &[t], &[tp], AveragingRatio::new(delta)?)
            .map(|v| {
                (v.finite().is_none_or(|v| v <= 0.0))
                    .then(|| format!("cubic theta={t} theta_prime={tp} delta={delta}: {v}"))
            });
        report.record("cubic delta-average > 0", outcome);
    }

    for fam in expfam_catalog() {
        let f = fam.family.cumulant();
        for _ in 0..samples {
            let outcome = oriented_pair(rng, f, &fam.sample_box).and_then(|(t, tp)| {
                let floor = f.eval(&tp)? - f.eval(&t)?;
                let scale = abs_sum(&[f.eval(&tp)?, f.eval(&t)?]);
                Ok(match qcvx_bregman(f, &t, &tp)? {
                    ExtReal::Finite(v) if v >= floor - IDENTITY_TOL * scale => None,
                    v => Some(format!("{}: {v} < {floor:e}", point(fam.name, &t, &tp))),
                })
            });
            report.record("convex case qcvxB >= F(theta') - F(theta)", outcome);
        }
    }

    // Ties in the plane: coordinate swaps and sign flips keep Q bitwise equal.
    let mut tie_min = f64::INFINITY;
    for name in TIE_GENERATORS {
        let q = GeneratorSpec::named_dim(name, 2).build()?;
        let (lo, hi) = if name == "log-norm-sq" {
            (0.05, 5.0)
        } else {
            (-2.0, 2.0)
        };
        for s in 0..samples {
            let (a, b): (f64, f64) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
            let t = vec![a, b];
            let tp = if s % 2 == 0 || name == "log-norm-sq" {
                vec![b, a]
            } else {
                vec![-a, b]
            };
            if t == tp {
                continue;
            }
            let mut delta: f64 = rng.gen_range(0.05..2.0);
            if name == "log-norm-sq" {
                // keep both extrapolated points in the positive quadrant
                delta = delta.min(0.9 * a.min(b) / (a - b).abs());
            }
            let ratio = AveragingRatio::new(delta)?;
            let outcome = (|| {
                if q.eval(&t)? != q.eval(&tp)? {
                    return Ok(Some(format!("{}: not a tie", point(name, &t, &tp))));
                }
                let fwd = delta_averaged_qcvx_bregman(&q, &t, &tp, ratio)?;
                let rev = delta_averaged_qcvx_bregman(&q, &tp, &t, ratio)?;
                Ok(match (fwd, rev) {
                    (ExtReal::Finite(x), ExtReal::Finite(y)) if x > 0.0 && y > 0.0 => {
                        tie_min = tie_min.min(x.min(y));
                        None
                    }
                    _ => Some(format!(
                        "{} delta={delta}: forward {fwd}, reverse {rev}",
                        point(name, &t, &tp)
                    )),
                })
            })();
            report.record("2-D tie: both orientations finite and > 0", outcome);
        }
    }
    report
        .notes
        .push(format!("min delta-average over 2-D ties {tie_min:e}"));

    // Flat level sets: ties on a face of the L1 ball give a zero average.
    let l1 = GeneratorSpec::named_dim("abs", 2).build()?;
    let flat =
        delta_averaged_qcvx_bregman(&l1, &[1.0, 0.5], &[0.5, 1.0], AveragingRatio::new(0.25)?)?;
    report.notes.push(format!(
        "abs in 2-D at tie (1,0.5)/(0.5,1), delta=0.25: {flat} (not strictly quasiconvex)"
    ));
    Ok(())
}

fn kl_quadrature_suite(report: &mut SuiteReport, rng: &mut ChaCha8Rng, samples: usize) {
    let mut max_err: f64 = 0.0;
    let mut max_mass_err: f64 = 0.0;
    let linear = GeneratorSpec::named("linear")
        .build()
        .expect("linear builds");
    for _ in 0..samples {
        let (mut t, mut tp) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        if tp < t {
            std::mem::swap(&mut t, &mut tp);
        }
        let outcome = (|| {
            let (p, q) = (NestedUniform::new(t)?, NestedUniform::new(tp)?);
            let mass = density_mass(&p).value;
            max_mass_err = max_mass_err.max((mass - 1.0).abs());
            let closed = kl_nested_uniform(t, tp)?
                .finite()
                .expect("nested orientation");
            let quad = kl_quadrature(&p, &q).finite().expect("nested orientation");
            max_err = max_err.max((closed - quad).abs());
            let linear_b = qcvx_bregman(&linear, &[t], &[tp])?;
            let bad_reverse = t != tp
                && (kl_quadrature(&q, &p) != ExtReal::PosInf
                    || kl_nested_uniform(tp, t)? != ExtReal::PosInf
                    || qcvx_bregman(&linear, &[tp], &[t])? != ExtReal::PosInf);
            Ok(((closed - quad).abs() > KL_QUADRATURE_TOL
                || (mass - 1.0).abs() > NORMALIZATION_TOL
                || linear_b != ExtReal::Finite(closed)
                || bad_reverse)
                .then(|| format!("uniform theta={t} theta_prime={tp}: closed {closed:e}, quadrature {quad:e}, mass {mass}")))
        })();
        report.record("nested uniform", outcome);

        let alpha = rng.gen_range(1.2..4.0);
        let (mut t, mut tp) = (rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
        if tp < t {
            std::mem::swap(&mut t, &mut tp);
        }
        let outcome = (|| {
            let (p, q) = (PowerNested::new(alpha, t)?, PowerNested::new(alpha, tp)?);
            let mass = density_mass(&p).value;
            max_mass_err = max_mass_err.max((mass - 1.0).abs());
            let closed = kl_power_nested(alpha, t, tp)?
                .finite()
                .expect("nested orientation");
            let quad = kl_quadrature(&p, &q).finite().expect("nested orientation");
            max_err = max_err.max((closed - quad).abs());
            let linear_b = qcvx_bregman(&linear, &[t], &[tp])?
                .finite()
                .unwrap_or(f64::NAN);
            let bad_reverse = t != tp
                && (kl_quadrature(&q, &p) != ExtReal::PosInf
                    || kl_power_nested(alpha, tp, t)? != ExtReal::PosInf);
            Ok(((closed - quad).abs() > KL_QUADRATURE_TOL
                || (mass - 1.0).abs() > NORMALIZATION_TOL
                || !close(closed, alpha * linear_b, abs_sum(&[closed]))
                || bad_reverse)
                .then(|| format!("power alpha={alpha} theta={t} theta_prime={tp}: closed {closed:e}, quadrature {quad:e}, mass {mass}")))
        })();
        report.record("power nested", outcome);
    }
    report
        .notes
        .push(format!("max |closed - quadrature| = {max_err:e}"));
    report
        .notes
        .push(format!("max |mass - 1| = {max_mass_err:e}"));
}

const SKEWS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn means(report: &mut SuiteReport, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
    let identity = GeneratorSpec::named("linear").build()?;
    let log = GeneratorSpec::named("log").build()?;
    let sqrt = GeneratorSpec::named("sqrt").build()?;
    let kinds = [
        MeanSpec::Arithmetic,
        MeanSpec::geometric(),
        MeanSpec::Max,
        MeanSpec::Min,
        MeanSpec::QuasiArithmetic(log.clone()),
        MeanSpec::QuasiArithmetic(sqrt),
    ];
    let catalog: Vec<_> = quasiconvex_catalog()
        .into_iter()
        .filter(|e| e.sample_box.dim() == 1)
        .collect();
    let gens: Vec<Generator> = catalog.iter().map(|e| e.build()).collect();

    for _ in 0..samples {
        let x: f64 = rng.gen_range(0.1..10.0);
        let y = x * 10f64.powf(rng.gen_range(-1.0..1.0));
        let alpha = *SKEWS.choose(rng).expect("non-empty");
        let (lo, hi) = (x.min(y), x.max(y));
        let delta = rng.gen_range(-8.0..8.0);
        let power = MeanSpec::Power(delta);
        for spec in kinds.iter().chain(std::iter::once(&power)) {
            report.record(
                "min <= mean <= max",
                weighted_mean(spec, x, y, alpha).map(|m| {
                    (!(lo <= m && m <= hi))
                        .then(|| format!("{spec:?} x={x} y={y} alpha={alpha}: {m}"))
                }),
            );
        }

        let (d1, d2) = {
            let (a, b) = (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
            (f64::min(a, b), f64::max(a, b))
        };
        let p1 = weighted_mean(&MeanSpec::Power(d1), x, y, alpha)?;
        let p2 = weighted_mean(&MeanSpec::Power(d2), x, y, alpha)?;
        report.record(
            "power mean monotone in delta",
            Ok((p1 > p2 + MEAN_ORDER_TOL * hi)
                .then(|| format!("x={x} y={y} alpha={alpha} d1={d1} d2={d2}: {p1:e} > {p2:e}"))),
        );

        let a = weighted_mean(&MeanSpec::Arithmetic, x, y, alpha)?;
        let qa = weighted_mean(&MeanSpec::QuasiArithmetic(identity.clone()), x, y, alpha)?;
        report.record(
            "qa(identity) = arithmetic",
            Ok(mismatch(qa, a, abs_sum(&[a])).map(|m| format!("x={x} y={y} alpha={alpha}: {m}"))),
        );
        let g = weighted_mean(&MeanSpec::Power(0.0), x, y, alpha)?;
        let ql = weighted_mean(&MeanSpec::QuasiArithmetic(log.clone()), x, y, alpha)?;
        report.record(
            "qa(log) = power(0)",
            Ok(mismatch(ql, g, abs_sum(&[g])).map(|m| format!("x={x} y={y} alpha={alpha}: {m}"))),
        );

        if x != y {
            let errs = (0..=10)
                .map(|k| {
                    Ok((weighted_mean(&MeanSpec::Power((k as f64).exp2()), x, y, 0.5)? - hi).abs())
                })
                .collect::<Result<Vec<f64>>>()?;
            let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
            let last = errs[10];
            report.record(
                "power mean -> max",
                Ok((!monotone || last > 1e-3 * hi)
                    .then(|| format!("x={x} y={y}: errors {errs:?}"))),
            );
        }

        let i = rng.gen_range(0..gens.len());
        let (f, b) = (&gens[i], &catalog[i].sample_box);
        let t = draw(rng, b);
        let tp = draw(rng, b);
        let at = point(f.label(), &t, &tp);
        report.record(
            "(A,A)-Jensen = skewed Jensen",
            mn_jensen(
                f,
                &MeanSpec::Arithmetic,
                &MeanSpec::Arithmetic,
                alpha,
                &t,
                &tp,
            )
            .and_then(|mn| {
                let ej = extended_jensen(f, &t, &tp, SkewParam::new(alpha)?)?;
                let scale = abs_sum(&[f.eval(&t)?, f.eval(&tp)?]);
                Ok(((mn - ej).abs() > 1e-12 * scale)
                    .then(|| format!("{at} alpha={alpha}: {mn:e} vs {ej:e}")))
            }),
        );
    }
    Ok(())
}
