//! Exact scalars: rationals and polynomials in the formal parameters
//! `a2`, `e1`, `e2`.

pub mod linear;
mod poly;

pub use poly::{Monomial, Param, ParamPoly};
pub(crate) use poly::{fmt_rational, fmt_unsigned_term};

pub type Rational = num_rational::BigRational;

/// Parameter assignment used for degenerations and `--set`.
pub type Assignment = std::collections::BTreeMap<Param, Rational>;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// Exact sum, failing on a parameter-set mismatch.
pub fn poly_add(p: &ParamPoly, q: &ParamPoly) -> crate::Result<ParamPoly> {
    p.try_add(q)
}

/// Exact product, failing on a parameter-set mismatch.
pub fn poly_mul(p: &ParamPoly, q: &ParamPoly) -> crate::Result<ParamPoly> {
    p.try_mul(q)
}

pub fn poly_substitute(p: &ParamPoly, assignment: &Assignment) -> ParamPoly {
    p.substitute(assignment)
}
