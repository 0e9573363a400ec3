//! Truncated Laurent series with conservative precision tracking.

use std::fmt;

use super::local::SeriesCoeff;
use crate::coefficients::Rational;
use crate::error::{Error, Result};

/// `Σ c_k t^k` known for all `k < precision`.
///
/// Stored densely from the first nonzero coefficient; a series with no
/// known nonzero coefficient is `O(t^precision)` and has `start == precision`.
#[derive(Clone, PartialEq)]
pub struct LaurentSeries<C> {
    start: i64,
    coeffs: Vec<C>,
    precision: i64,
}

impl<C: SeriesCoeff> LaurentSeries<C> {
    /// `O(t^precision)`.
    pub fn zero(precision: i64) -> Self {
        LaurentSeries {
            start: precision,
            coeffs: Vec::new(),
            precision,
        }
    }

    /// Series from sparse terms; terms at or beyond `precision` are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, C)>, precision: i64) -> Self {
        let terms: Vec<(i64, C)> = terms.into_iter().filter(|(k, _)| *k < precision).collect();
        let Some(lo) = terms.iter().map(|(k, _)| *k).min() else {
            return Self::zero(precision);
        };
        let mut coeffs = vec![C::zero(); (precision - lo) as usize];
        for (k, c) in terms {
            let slot = &mut coeffs[(k - lo) as usize];
            *slot = slot.add(&c);
        }
        let mut s = LaurentSeries {
            start: lo,
            coeffs,
            precision,
        };
        s.normalize();
        s
    }

    pub fn monomial(exponent: i64, c: C, precision: i64) -> Self {
        Self::from_terms([(exponent, c)], precision)
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        self.coeffs.drain(..lead);
        self.start += lead as i64;
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    /// Exponent of the first known nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.start)
    }

    /// Known terms beyond the leading one.
    pub fn relative_precision(&self) -> i64 {
        self.precision - self.start
    }

    pub fn is_known_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: i64) -> Result<C> {
        if k >= self.precision {
            return Err(Error::Truncated {
                exponent: k,
                precision: self.precision,
            });
        }
        if k < self.start {
            return Ok(C::zero());
        }
        Ok(self.coeffs[(k - self.start) as usize].clone())
    }

    /// Nonzero known terms in increasing exponent.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.start + i as i64, c))
    }

    /// Coefficient of `t^{-1}`.
    pub fn residue(&self) -> Result<C> {
        self.coeff(-1)
    }

    pub fn truncate(&self, precision: i64) -> Self {
        if precision >= self.precision {
            return self.clone();
        }
        Self::from_terms(self.terms().map(|(k, c)| (k, c.clone())), precision)
    }

    pub fn add(&self, other: &Self) -> Self {
        let precision = self.precision.min(other.precision);
        Self::from_terms(
            self.terms()
                .chain(other.terms())
                .map(|(k, c)| (k, c.clone())),
            precision,
        )
    }

    pub fn neg(&self) -> Self {
        LaurentSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(C::neg).collect(),
            precision: self.precision,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.terms().map(|(k, v)| (k, v.mul(c))), self.precision)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let precision = (self.start + other.precision).min(other.start + self.precision);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero(precision);
        }
        let lo = self.start + other.start;
        let len = (precision - lo).max(0) as usize;
        let mut coeffs = vec![C::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if !b.is_zero() {
                    coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
                }
            }
        }
        let mut s = LaurentSeries {
            start: lo,
            coeffs,
            precision,
        };
        if len == 0 {
            s.start = precision;
        }
        s.normalize();
        s
    }

    /// `d/dt`.
    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|(k, _)| *k != 0)
                .map(|(k, c)| (k - 1, c.mul(&C::from_rational(Rational::from_integer(k.into()))))),
            self.precision - 1,
        )
    }

    /// Multiplicative inverse; the leading coefficient must be a unit.
    pub fn inverse(&self) -> Result<Self> {
        let lead = self.coeffs.first().ok_or(Error::NotInvertible)?;
        let inv = lead.unit_inverse().ok_or(Error::NotInvertible)?;
        let rel = self.coeffs.len();
        let mut h: Vec<C> = Vec::with_capacity(rel);
        h.push(inv.clone());
        for k in 1..rel {
            let mut acc = C::zero();
            for i in 1..=k {
                let f = &self.coeffs[i];
                if !f.is_zero() {
                    acc = acc.add(&f.mul(&h[k - i]));
                }
            }
            h.push(acc.mul(&inv).neg());
        }
        Ok(LaurentSeries {
            start: -self.start,
            coeffs: h,
            precision: -self.start + rel as i64,
        })
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut out = Self::monomial(0, C::one(), base.relative_precision().max(0));
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }
}

impl<C: SeriesCoeff> fmt::Debug for LaurentSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.terms() {
            write!(f, "({c:?})t^{k} + ")?;
        }
        write!(f, "O(t^{})", self.precision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{rational, ParamPoly};

    fn s(terms: &[(i64, i64)], prec: i64) -> LaurentSeries<ParamPoly> {
        LaurentSeries::from_terms(terms.iter().map(|&(k, c)| (k, ParamPoly::int(c))), prec)
    }

    #[test]
    fn geometric_inverse() {
        // 1/(1 - t) = 1 + t + t^2 + ...
        let inv = s(&[(0, 1), (1, -1)], 6).inverse().unwrap();
        assert_eq!(inv, s(&[(0, 1), (1, 1), (2, 1), (3, 1), (4, 1), (5, 1)], 6));
    }

    #[test]
    fn precision_of_products() {
        let a = s(&[(-2, 1), (0, 3)], 2); // rel precision 4
        let b = s(&[(1, 2)], 4); // rel precision 3
        let p = a.mul(&b);
        assert_eq!(p.valuation(), Some(-1));
        assert_eq!(p.precision(), 2);
        assert_eq!(p.coeff(-1).unwrap(), ParamPoly::int(2));
        assert_eq!(p.coeff(1).unwrap(), ParamPoly::int(6));
        assert!(matches!(p.coeff(2), Err(Error::Truncated { .. })));
    }

    #[test]
    fn derivative_and_residue() {
        // d/dt (t^-1 + 2 t^2) = -t^-2 + 4t
        let d = s(&[(-1, 1), (2, 2)], 5).derivative();
        assert_eq!(d, s(&[(-2, -1), (1, 4)], 4));
        assert!(d.residue().unwrap().is_zero());
    }

    #[test]
    fn negative_powers() {
        let x = s(&[(1, 1), (2, 1)], 6); // t + t^2
        let cube = x.pow(-3).unwrap();
        assert_eq!(cube.valuation(), Some(-3));
        let back = cube.mul(&x.pow(3).unwrap());
        assert_eq!(back.coeff(0).unwrap(), ParamPoly::one());
        for k in 1..back.precision() {
            assert!(back.coeff(k).unwrap().is_zero());
        }
        let half = LaurentSeries::monomial(0, ParamPoly::constant(rational(1, 2)), 3);
        assert!(half.inverse().is_ok());
        let nonunit = LaurentSeries::monomial(0, ParamPoly::var(crate::coefficients::Param::A2), 3);
        assert!(matches!(nonunit.inverse(), Err(Error::NotInvertible)));
    }
}
