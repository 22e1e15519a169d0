//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the scale/expression/quadrature
/// pipeline. Variants map one-to-one onto the error kinds reported by the
/// CLI as `{"error": kind, "detail": ...}`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("scale has no points: {0}")]
    EmptyScale(String),
    #[error("malformed scale spec: {0}")]
    MalformedSpec(String),
    #[error("point {0} is not a member of the scale")]
    NotInScale(f64),
    #[error("point {0} is a left-scattered maximum and lies outside the differentiation domain")]
    NotInKappa(f64),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not differentiable: {0}")]
    NotDifferentiable(String),
    #[error("monomial order {0} exceeds the supported depth limit of {1}")]
    DepthExceeded(u32, u32),
    #[error("quadrature failed to converge within {0} subdivisions")]
    QuadratureFailure(u32),
    #[error("required point {point} is not a member of the scale ({context})")]
    MembershipViolation { point: f64, context: String },
    #[error("points out of order: {0}")]
    OrderViolation(String),
    #[error("point {0} lies outside [{1}, {2}]")]
    OutOfRange(f64, f64, f64),
    #[error("closed form needs a {0} scale")]
    WrongScaleKind(String),
    #[error("scale too small to carry a partition with k = {0}")]
    Degenerate(usize),
}

impl Error {
    /// Stable machine-readable kind, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyScale(_) => "EmptyScale",
            Error::MalformedSpec(_) => "MalformedSpec",
            Error::NotInScale(_) => "NotInScale",
            Error::NotInKappa(_) => "NotInKappa",
            Error::Syntax { .. } => "SyntaxError",
            Error::UnknownFunction(_) => "UnknownFunction",
            Error::Domain(_) => "DomainError",
            Error::NotDifferentiable(_) => "NotDifferentiable",
            Error::DepthExceeded(..) => "DepthExceeded",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::MembershipViolation { .. } => "MembershipViolation",
            Error::OrderViolation(_) => "OrderViolation",
            Error::OutOfRange(..) => "OutOfRange",
            Error::WrongScaleKind(_) => "WrongScaleKind",
            Error::Degenerate(_) => "Degenerate",
        }
    }
}
