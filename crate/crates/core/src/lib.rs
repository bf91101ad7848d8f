// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bregman;
pub mod cli;
pub mod domain;
pub mod error;
pub mod extreal;
pub mod format;
pub mod generator;
pub mod jensen;
pub mod means;
pub mod oracles;
pub mod quadrature;
pub mod quasiconvex;
pub mod statdiv;
pub mod suites;

pub use domain::{interpolate, Bound, BoxDomain, Interval};
pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use generator::{
    build_generator, eval_generator, gradient, ConvexityClass, Generator, GeneratorSpec, Positivity,
};
pub use quasiconvex::{check_quasiconvex, QuasiconvexReport, Verdict};
