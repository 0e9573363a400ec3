use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot mix parameters {left} and {right} in one coefficient")]
    ParamMismatch { left: String, right: String },

    #[error("invalid matrix size {0}")]
    InvalidRank(usize),

    #[error("Lie algebra mismatch: {0} vs {1}")]
    AlgebraMismatch(String, String),

    #[error("function family mismatch: {0} vs {1}")]
    FamilyMismatch(String, String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("structure constants are not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),

    #[error("Jacobi identity fails on basis triple ({0}, {1}, {2})")]
    Jacobi(usize, usize, usize),

    #[error("summand decomposition is invalid: {0}")]
    Summands(String),

    #[error("bilinear form is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("bilinear form is not invariant on basis triple ({0}, {1}, {2})")]
    NotInvariant(usize, usize, usize),

    #[error("{point} is not a marked point of the {family} family")]
    UnknownPoint { point: String, family: String },

    #[error("series known only below t^{precision}; coefficient of t^{exponent} requested")]
    Truncated { exponent: i64, precision: i64 },

    #[error("series with non-invertible leading coefficient")]
    NotInvertible,

    #[error("coefficient {0} does not clear to a polynomial in the family parameters")]
    NotPolynomial(String),

    #[error("basis re-expression failed: {0}")]
    BasisExpression(String),

    #[error("Weierstrass series solver failed at t^{0}: {1}")]
    SeriesSolver(i64, String),

    #[error("no non-triviality witness with degree up to {0}")]
    NoWitness(i64),

    #[error("empty degree window {0}:{1}")]
    EmptyWindow(i64, i64),

    #[error("unknown generator {0}")]
    UnknownGenerator(String),

    #[error("{0}")]
    Eval(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}
