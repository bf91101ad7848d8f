//! Number formatting for command output: C `%.{n}g` semantics, with `+∞`
//! as the token `inf`.

use clap::ValueEnum;

use crate::extreal::ExtReal;

pub const INF_TOKEN: &str = "inf";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// 6 significant digits.
    Plain,
    /// 17 significant digits (round-trip safe).
    Csv,
    /// 17 significant digits; `inf` as the JSON string "inf".
    Json,
}

impl OutputFormat {
    pub fn digits(self) -> usize {
        match self {
            OutputFormat::Plain => 6,
            OutputFormat::Csv | OutputFormat::Json => 17,
        }
    }

    /// A finite number or the `inf` token (quoted in JSON).
    pub fn value(self, v: ExtReal) -> String {
        match (v, self) {
            (ExtReal::Finite(x), _) => format_g(x, self.digits()),
            (ExtReal::PosInf, OutputFormat::Json) => format!("\"{INF_TOKEN}\""),
            (ExtReal::PosInf, _) => INF_TOKEN.to_string(),
        }
    }

    pub fn real(self, x: f64) -> String {
        self.value(ExtReal::from_f64(x))
    }
}

/// `printf("%.{sig}g", x)`.
pub fn format_g(x: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 {
            INF_TOKEN.into()
        } else {
            format!("-{INF_TOKEN}")
        };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
