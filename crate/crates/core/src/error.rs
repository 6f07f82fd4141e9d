use std::path::PathBuf;

use thiserror::Error;

use crate::exprlang::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed at (t, x) = ({t}, {x}): {source}")]
    Eval { t: f64, x: f64, source: EvalError },
    #[error("kappa must be nonzero")]
    ZeroKappa,
    #[error("point (t, x) = ({t}, {x}) violates t + x > 0")]
    Singular { t: f64, x: f64 },
    #[error("semi-invariant H vanishes at (t, x) = ({t}, {x}); Ovsiannikov invariants undefined")]
    VanishingH { t: f64, x: f64 },
    #[error("non-finite value {value} at (t, x) = ({t}, {x})")]
    NonFinite { t: f64, x: f64, value: f64 },
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("jet is outside the image of the contact map: {0}")]
    OutsideImage(String),
    #[error("target {target} is outside the attainable range: {reason}")]
    OutOfRange { target: f64, reason: String },
    #[error("degenerate solution spec: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub(crate) fn eval(t: f64, x: f64, source: EvalError) -> Self {
        Error::Eval { t, x, source }
    }
}
