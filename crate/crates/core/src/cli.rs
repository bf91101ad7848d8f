//! The `qcvxdiv` command line.
//!
//! Exit codes: 0 success, 1 property violation or non-convergence, 2 usage or
//! configuration error (diagnostic on stderr).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bregman::{
    bregman, delta_averaged_qcvx_bregman, extended_bregman, qcvx_bregman_diagnosed, AveragingRatio,
};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::format::OutputFormat;
use crate::generator::{Generator, GeneratorSpec};
use crate::jensen::{extended_jensen, log_ratio_gap, qccv_jensen, qcvx_jensen, SkewParam};
use crate::means::{mn_jensen, power_mean_bregman, power_mean_jensen, r_power_bregman, MeanSpec};
use crate::oracles::{limit_power_jensen, limit_r_power_bregman, limit_scaled_jensen, LimitStudy};
use crate::statdiv::{
    expfam_cross_entropy, expfam_entropy, expfam_kl, kl_nested_uniform, kl_power_nested, ExpFamily,
};
use crate::suites::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Largest number of rows `table` will emit.
const MAX_TABLE_ROWS: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "qcvxdiv",
    version,
    about = "Quasiconvex Jensen and Bregman divergences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one divergence and print its value.
    Eval(EvalArgs),
    /// Tabulate a limit along a dyadic schedule as CSV `k,param,value,error`.
    LimitStudy(StudyArgs),
    /// Run a randomized property suite.
    Check(CheckArgs),
    /// Evaluate a 1-D divergence over a grid as CSV `theta,theta_prime,value`.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Divergence {
    QcvxJensen,
    QccvJensen,
    LogRatio,
    ExtJensen,
    MnJensen,
    PowerJensen,
    Bregman,
    QcvxBregman,
    DeltaQcvxBregman,
    ExtBregman,
    PowerBregman,
    RPowerBregman,
    KlNestedUniform,
    KlPowerNested,
    ExpfamKl,
    ExpfamEntropy,
    ExpfamCrossEntropy,
}

impl Divergence {
    fn needs_generator(self) -> bool {
        !matches!(
            self,
            Divergence::KlNestedUniform | Divergence::KlPowerNested
        )
    }

    fn name(self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    ScaledJensen,
    PowerJensen,
    RPowerBregman,
}

#[derive(Debug, Clone, Args)]
pub struct GenSource {
    /// Generator spec as inline JSON, e.g. '{"name":"log"}'.
    #[arg(long = "gen", value_name = "JSON", conflicts_with = "gen_file")]
    pub gen: Option<String>,
    /// File holding a generator spec.
    #[arg(long, value_name = "PATH")]
    pub gen_file: Option<PathBuf>,
}

impl GenSource {
    fn load(&self) -> Result<Option<Generator>> {
        let text = match (&self.gen, &self.gen_file) {
            (Some(s), _) => s.clone(),
            (None, Some(path)) => fs::read_to_string(path)
                .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?,
            (None, None) => return Ok(None),
        };
        Ok(Some(text.parse::<GeneratorSpec>()?.build()?))
    }

    fn require(&self) -> Result<Generator> {
        self.load()?.ok_or_else(|| {
            Error::InvalidSpec("a generator is required (--gen or --gen-file)".into())
        })
    }
}

/// Divergence parameters shared by `eval` and `table`.
#[derive(Debug, Clone, Args)]
pub struct DivParams {
    /// Skew α (default ½); the exponent for kl-power-nested.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Averaging ratio (delta-qcvx-bregman) or power-mean exponent (power-jensen).
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta2: Option<f64>,
    /// Power for r-power-bregman.
    #[arg(long)]
    pub r: Option<f64>,
    /// Mean on arguments for mn-jensen: arithmetic, geometric, max, min,
    /// power:<δ>, qa:<generator JSON>.
    #[arg(long, default_value = "arithmetic")]
    pub mean_m: String,
    /// Mean on values for mn-jensen.
    #[arg(long, default_value = "arithmetic")]
    pub mean_n: String,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub div: Divergence,
    #[command(flatten)]
    pub source: GenSource,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_coords)]
    pub theta: Coords,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_coords)]
    pub theta_prime: Option<Coords>,
    #[command(flatten)]
    pub params: DivParams,
    #[arg(long, value_enum, default_value_t = OutputFormat::Plain)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[arg(long, value_enum)]
    pub study: Study,
    #[command(flatten)]
    pub source: GenSource,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_coords)]
    pub theta: Coords,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_coords)]
    pub theta_prime: Coords,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(4..=40))]
    pub k_max: u32,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long, value_parser = parse_suite)]
    pub suite: Suite,
    /// Random inputs per generator or family.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Plain)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub div: Divergence,
    #[command(flatten)]
    pub source: GenSource,
    /// Grid bounds `lo,hi` for θ.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub theta_range: (f64, f64),
    /// Grid bounds for θ′ (defaults to the θ range).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub theta_prime_range: Option<(f64, f64)>,
    #[arg(long)]
    pub step: f64,
    #[command(flatten)]
    pub params: DivParams,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

/// Comma-separated coordinates, e.g. `1,-2.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

fn parse_coords(s: &str) -> std::result::Result<Coords, String> {
    parse_vector(s).map(Coords)
}

fn parse_vector(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(format!("`{t}` is not finite")),
                Err(_) => Err(format!("`{t}` is not a number")),
            }
        })
        .collect()
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    match parse_vector(s)?.as_slice() {
        [lo, hi] if lo <= hi => Ok((*lo, *hi)),
        [_, _] => Err("range must be `lo,hi` with lo <= hi".into()),
        _ => Err("range must be `lo,hi`".into()),
    }
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite; expected one of {}", names.join(", "))
    })
}

/// Resolved inputs for one divergence evaluation.
struct Evaluator {
    div: Divergence,
    generator: Option<Generator>,
    family: Option<ExpFamily>,
    params: DivParams,
    mean_m: MeanSpec,
    mean_n: MeanSpec,
}

fn required(name: &'static str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidSpec(format!("--{name} is required for this divergence")))
}

fn scalar(v: &[f64], what: &str) -> Result<f64> {
    match v {
        [x] => Ok(*x),
        _ => Err(Error::InvalidSpec(format!(
            "{what} must be a single number"
        ))),
    }
}

impl Evaluator {
    fn new(div: Divergence, source: &GenSource, params: &DivParams) -> Result<Self> {
        let generator = if div.needs_generator() {
            Some(source.require()?)
        } else {
            None
        };
        let family = match div {
            Divergence::ExpfamKl | Divergence::ExpfamEntropy | Divergence::ExpfamCrossEntropy => {
                Some(ExpFamily::new(
                    generator.clone().expect("generator loaded"),
                )?)
            }
            _ => None,
        };
        Ok(Evaluator {
            div,
            generator,
            family,
            params: params.clone(),
            mean_m: params.mean_m.parse()?,
            mean_n: params.mean_n.parse()?,
        })
    }

    fn skew(&self) -> Result<SkewParam> {
        SkewParam::new(self.params.alpha.unwrap_or(0.5))
    }

    /// Evaluates at `(θ, θ′)` and reports whether the branch is tie-sensitive.
    fn eval(&self, t: &[f64], tp: &[f64]) -> Result<(ExtReal, bool)> {
        use Divergence as D;
        let g = || self.generator.as_ref().expect("generator loaded");
        let fam = || self.family.as_ref().expect("family loaded");
        let fin = |v: Result<f64>| v.map(|v| (ExtReal::Finite(v), false));
        let p = &self.params;
        match self.div {
            D::QcvxJensen => fin(qcvx_jensen(g(), t, tp, self.skew()?)),
            D::QccvJensen => fin(qccv_jensen(g(), t, tp, self.skew()?)),
            D::LogRatio => fin(log_ratio_gap(g(), t, tp, self.skew()?)),
            D::ExtJensen => fin(extended_jensen(g(), t, tp, self.skew()?)),
            D::MnJensen => fin(mn_jensen(
                g(),
                &self.mean_m,
                &self.mean_n,
                p.alpha.unwrap_or(0.5),
                t,
                tp,
            )),
            D::PowerJensen => fin(power_mean_jensen(
                g(),
                required("delta", p.delta)?,
                p.alpha.unwrap_or(0.5),
                t,
                tp,
            )),
            D::Bregman => fin(bregman(g(), t, tp)),
            D::QcvxBregman => {
                qcvx_bregman_diagnosed(g(), t, tp).map(|b| (b.value, b.tie_sensitive))
            }
            D::DeltaQcvxBregman => {
                let ratio = AveragingRatio::new(required("delta", p.delta)?)?;
                delta_averaged_qcvx_bregman(g(), t, tp, ratio).map(|v| (v, false))
            }
            D::ExtBregman => extended_bregman(g(), t, tp).map(|v| (v, false)),
            D::PowerBregman => fin(power_mean_bregman(
                g(),
                required("delta1", p.delta1)?,
                required("delta2", p.delta2)?,
                scalar(t, "--theta")?,
                scalar(tp, "--theta-prime")?,
            )),
            D::RPowerBregman => r_power_bregman(
                g(),
                required("r", p.r)?,
                scalar(t, "--theta")?,
                scalar(tp, "--theta-prime")?,
            )
            .map(|v| (v, false)),
            D::KlNestedUniform => {
                kl_nested_uniform(scalar(t, "--theta")?, scalar(tp, "--theta-prime")?)
                    .map(|v| (v, false))
            }
            D::KlPowerNested => kl_power_nested(
                required("alpha", p.alpha)?,
                scalar(t, "--theta")?,
                scalar(tp, "--theta-prime")?,
            )
            .map(|v| (v, false)),
            D::ExpfamKl => fin(expfam_kl(fam(), t, tp)),
            D::ExpfamEntropy => fin(expfam_entropy(fam(), t)),
            D::ExpfamCrossEntropy => fin(expfam_cross_entropy(fam(), t, tp)),
        }
    }
}

const TIE_WARNING: &str =
    "warning: Q(theta) and Q(theta_prime) agree to 1e-12 relative; the finite/infinite branch is tie-sensitive";

fn cmd_eval(args: &EvalArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let ev = Evaluator::new(args.div, &args.source, &args.params)?;
    let tp = match (&args.theta_prime, args.div) {
        (Some(tp), _) => tp.0.clone(),
        (None, Divergence::ExpfamEntropy) => args.theta.0.clone(),
        (None, _) => return Err(Error::InvalidSpec("--theta-prime is required".into())),
    };
    let (value, tie) = ev.eval(&args.theta.0, &tp)?;
    if tie {
        let _ = writeln!(err, "{TIE_WARNING}");
    }
    let text = args.format.value(value);
    let line = match args.format {
        OutputFormat::Json => format!(
            "{{\"divergence\":{},\"value\":{text}}}",
            serde_json::to_string(&args.div.name()).expect("string serializes")
        ),
        _ => text,
    };
    let _ = writeln!(out, "{line}");
    Ok(EXIT_OK)
}

/// CSV rows `k,param,value,error` (header included).
pub fn study_csv(study: &LimitStudy, format: OutputFormat) -> String {
    let mut s = String::from("k,param,value,error\n");
    for i in 0..study.ks.len() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            study.ks[i],
            format.real(study.schedule[i]),
            format.value(study.values[i]),
            format.real(study.errors[i]),
        ));
    }
    s
}

fn study_json(study: &LimitStudy) -> String {
    let f = OutputFormat::Json;
    let rows: Vec<String> = (0..study.ks.len())
        .map(|i| {
            format!(
                "{{\"k\":{},\"param\":{},\"value\":{},\"error\":{}}}",
                study.ks[i],
                f.real(study.schedule[i]),
                f.value(study.values[i]),
                f.real(study.errors[i]),
            )
        })
        .collect();
    format!(
        "{{\"study\":\"{}\",\"target\":{},\"converged\":{},\"rows\":[{}]}}\n",
        study.kind.name(),
        f.value(study.target),
        study.converged,
        rows.join(",")
    )
}

fn cmd_limit_study(args: &StudyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let g = args.source.require()?;
    let (t, tp) = (&args.theta.0, &args.theta_prime.0);
    let study = match args.study {
        Study::ScaledJensen => limit_scaled_jensen(&g, t, tp, args.k_max)?,
        Study::PowerJensen => limit_power_jensen(&g, t, tp, args.k_max)?,
        Study::RPowerBregman => limit_r_power_bregman(
            &g,
            scalar(t, "--theta")?,
            scalar(tp, "--theta-prime")?,
            args.k_max,
        )?,
    };
    let text = match args.format {
        OutputFormat::Json => study_json(&study),
        f => study_csv(&study, f),
    };
    let _ = out.write_all(text.as_bytes());
    if study.converged {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(
            err,
            "{}: convergence criterion not met (final error {:e})",
            study.kind.name(),
            study.final_error()
        );
        Ok(EXIT_FAILURE)
    }
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let report = run_suite(args.suite, args.samples, args.seed)?;
    let text = match args.format {
        OutputFormat::Json => format!(
            "{}\n",
            serde_json::json!({
                "suite": report.suite.name(),
                "checks": report.checks,
                "failures": report.failures,
                "notes": report.notes,
                "witnesses": report.witnesses,
            })
        ),
        _ => report.to_string(),
    };
    let _ = out.write_all(text.as_bytes());
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn grid((lo, hi): (f64, f64), step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "grid step must be finite and positive",
        });
    }
    let n = ((hi - lo) / step * (1.0 + 1e-12)).floor();
    if n + 1.0 > MAX_TABLE_ROWS as f64 {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "grid has too many points",
        });
    }
    Ok((0..=n as usize).map(|i| lo + i as f64 * step).collect())
}

fn cmd_table(args: &TableArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let thetas = grid(args.theta_range, args.step)?;
    let primes = grid(
        args.theta_prime_range.unwrap_or(args.theta_range),
        args.step,
    )?;
    if thetas.len() * primes.len() > MAX_TABLE_ROWS {
        return Err(Error::InvalidParameter {
            name: "step",
            value: args.step,
            reason: "grid has too many points",
        });
    }
    let ev = Evaluator::new(args.div, &args.source, &args.params)?;
    if let Some(g) = &ev.generator {
        if g.dim() != 1 {
            return Err(Error::InvalidSpec("table needs a 1-D generator".into()));
        }
    }
    let f = args.format;
    let mut rows = Vec::with_capacity(thetas.len() * primes.len());
    let mut ties = 0usize;
    for &t in &thetas {
        for &tp in &primes {
            let (v, tie) = ev.eval(&[t], &[tp])?;
            ties += usize::from(tie && t != tp);
            rows.push(match f {
                OutputFormat::Json => format!(
                    "{{\"theta\":{},\"theta_prime\":{},\"value\":{}}}",
                    f.real(t),
                    f.real(tp),
                    f.value(v)
                ),
                _ => format!("{},{},{}", f.real(t), f.real(tp), f.value(v)),
            });
        }
    }
    let text = match f {
        OutputFormat::Json => format!("[{}]\n", rows.join(",")),
        _ => format!("theta,theta_prime,value\n{}\n", rows.join("\n")),
    };
    let _ = out.write_all(text.as_bytes());
    if ties > 0 {
        let _ = writeln!(err, "{TIE_WARNING} ({ties} off-diagonal grid points)");
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command, writing
/// to the given streams. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a, out, err),
        Command::LimitStudy(a) => cmd_limit_study(a, out, err),
        Command::Check(a) => cmd_check(a, out),
        Command::Table(a) => cmd_table(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!(
                "{}: {}",
                record.level().as_str().to_lowercase(),
                record.args()
            );
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

/// Entry point for the binary: process arguments and standard streams.
pub fn main() -> i32 {
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(log::LevelFilter::Warn);
    }
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = io::stdout().flush();
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("qcvxdiv").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn eval_examples() {
        let base = [
            "eval",
            "--div",
            "qcvx-bregman",
            "--gen",
            r#"{"name":"log"}"#,
        ];
        let (code, out, _) =
            run_str(&[&base[..], &["--theta", "1", "--theta-prime", "2"]].concat());
        assert_eq!((code, out.as_str()), (0, "0.5\n"));
        let (code, out, _) =
            run_str(&[&base[..], &["--theta", "2", "--theta-prime", "1"]].concat());
        assert_eq!((code, out.as_str()), (0, "inf\n"));
        let (code, out, _) = run_str(&[
            "eval",
            "--div",
            "qcvx-jensen",
            "--gen",
            r#"{"name":"cubic"}"#,
            "--theta",
            "-1",
            "--theta-prime",
            "0",
            "--alpha",
            "0.5",
        ]);
        assert_eq!((code, out.as_str()), (0, "0.125\n"));
    }

    #[test]
    fn vector_parsing() {
        assert_eq!(parse_vector("1,-2.5, 3").unwrap(), vec![1.0, -2.5, 3.0]);
        assert!(parse_vector("1,,2").is_err());
        assert!(parse_vector("inf").is_err());
        assert_eq!(parse_range("-1,2").unwrap(), (-1.0, 2.0));
        assert!(parse_range("2,1").is_err());
    }

    #[test]
    fn grid_points() {
        assert_eq!(grid((1.0, 2.0), 0.5).unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(grid((0.0, 0.3), 0.1).unwrap().len(), 4);
        assert!(grid((0.0, 1.0), 0.0).is_err());
        assert!(grid((0.0, 1.0), -0.5).is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["eval", "--div", "nosuch", "--theta", "1"]).0, 2);
        assert_eq!(run_str(&["check", "--suite", "nosuch"]).0, 2);
        let (code, _, err) = run_str(&[
            "eval",
            "--div",
            "qcvx-bregman",
            "--gen",
            r#"{"name":"log"}"#,
            "--theta",
            "1,2",
            "--theta-prime",
            "2",
        ]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error:"), "{err}");
        assert_eq!(run_str(&["frobnicate"]).0, 2);
    }
}
