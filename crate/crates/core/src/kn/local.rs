//! Coefficient rings for local expansions at the marked points.
//!
//! Expansions at `±a` need odd powers of `a` and `1/a`; expansions at the
//! torus half-period need `1/((e1−e2)(2e1+e2))`. Both are handled by Laurent
//! polynomials in two symbols whose only units are monomials, with a fixed
//! change of variables back to the family parameters.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::coefficients::{fmt_rational, rational, Monomial, Param, ParamPoly, Rational};
use crate::error::{Error, Result};

/// Laurent polynomial in two symbols with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LocalScalar {
    terms: BTreeMap<[i32; 2], Rational>,
}

impl LocalScalar {
    pub fn zero() -> Self {
        LocalScalar::default()
    }

    pub fn one() -> Self {
        LocalScalar::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        LocalScalar::monomial([0, 0], c)
    }

    pub fn int(c: i64) -> Self {
        LocalScalar::constant(Rational::from_integer(c.into()))
    }

    pub fn monomial(exps: [i32; 2], c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        LocalScalar { terms }
    }

    pub fn symbol(slot: usize) -> Self {
        let mut e = [0, 0];
        e[slot] = 1;
        LocalScalar::monomial(e, Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i32; 2], &Rational)> {
        self.terms.iter()
    }

    fn add_term(&mut self, e: [i32; 2], c: Rational) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(e).or_insert_with(Rational::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LocalScalar {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = LocalScalar::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term([e1[0] + e2[0], e1[1] + e2[1]], c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = LocalScalar::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, v * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = LocalScalar::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Inverse of a unit, i.e. of a single nonzero monomial.
    pub fn unit_inverse(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        Some(LocalScalar::monomial([-e[0], -e[1]], c.recip()))
    }
}

/// Ring structure needed by [`super::series::LaurentSeries`].
pub trait SeriesCoeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn from_rational(r: Rational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn unit_inverse(&self) -> Option<Self>;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn one() -> Self {
        Self::from_rational(Rational::one())
    }
}

impl SeriesCoeff for LocalScalar {
    fn zero() -> Self {
        LocalScalar::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_rational(r: Rational) -> Self {
        LocalScalar::constant(r)
    }
    fn add(&self, other: &Self) -> Self {
        LocalScalar::add(self, other)
    }
    fn neg(&self) -> Self {
        LocalScalar::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        LocalScalar::mul(self, other)
    }
    fn unit_inverse(&self) -> Option<Self> {
        LocalScalar::unit_inverse(self)
    }
}

impl SeriesCoeff for ParamPoly {
    fn zero() -> Self {
        ParamPoly::zero()
    }
    fn is_zero(&self) -> bool {
        ParamPoly::is_zero(self)
    }
    fn from_rational(r: Rational) -> Self {
        ParamPoly::constant(r)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn unit_inverse(&self) -> Option<Self> {
        self.as_constant()
            .filter(|c| !c.is_zero())
            .map(|c| ParamPoly::constant(c.recip()))
    }
}

/// How the two local symbols relate to the family parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalRing {
    /// No symbols; classical family.
    Rational,
    /// One symbol `a` with `a² = a2`.
    SqrtA2,
    /// Symbols `e1, e2` themselves.
    Weierstrass,
    /// Symbols `e1 − e2` and `2e1 + e2` (root differences at the half period).
    RootGaps,
}

impl LocalRing {
    fn symbol_names(self) -> [&'static str; 2] {
        match self {
            LocalRing::Rational => ["?", "?"],
            LocalRing::SqrtA2 => ["a", "?"],
            LocalRing::Weierstrass => ["e1", "e2"],
            LocalRing::RootGaps => ["(e1 - e2)", "(2*e1 + e2)"],
        }
    }

    /// Image of a family parameter in this ring.
    fn param_image(self, p: Param) -> Result<LocalScalar> {
        let third = rational(1, 3);
        let bad = || Error::Eval(format!("parameter {} does not live in {:?}", p.name(), self));
        match (self, p) {
            (LocalRing::SqrtA2, Param::A2) => Ok(LocalScalar::symbol(0).pow(2)),
            (LocalRing::Weierstrass, Param::E1) => Ok(LocalScalar::symbol(0)),
            (LocalRing::Weierstrass, Param::E2) => Ok(LocalScalar::symbol(1)),
            // e1 = (α + β)/3, e2 = (β − 2α)/3
            (LocalRing::RootGaps, Param::E1) => {
                Ok(LocalScalar::symbol(0).add(&LocalScalar::symbol(1)).scale(&third))
            }
            (LocalRing::RootGaps, Param::E2) => Ok(LocalScalar::symbol(1)
                .sub(&LocalScalar::symbol(0).scale(&rational(2, 1)))
                .scale(&third)),
            _ => Err(bad()),
        }
    }

    pub fn from_param(self, p: &ParamPoly) -> Result<LocalScalar> {
        let mut out = LocalScalar::zero();
        for (m, c) in p.terms() {
            let mut term = LocalScalar::constant(c.clone());
            for param in Param::ALL {
                let e = m.exponent(param);
                if e > 0 {
                    term = term.mul(&self.param_image(param)?.pow(e));
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Maps back to the family parameters; fails if the value needs a
    /// negative or (for `a`) odd power.
    pub fn to_param(self, s: &LocalScalar) -> Result<ParamPoly> {
        let not_poly = || Error::NotPolynomial(self.render(s));
        let mut out = ParamPoly::zero();
        for (e, c) in s.terms() {
            if e[0] < 0 || e[1] < 0 {
                return Err(not_poly());
            }
            let (i, j) = (e[0] as u32, e[1] as u32);
            let term = match self {
                LocalRing::Rational if i == 0 && j == 0 => ParamPoly::constant(c.clone()),
                LocalRing::SqrtA2 if i % 2 == 0 && j == 0 => {
                    ParamPoly::monomial(Monomial([i / 2, 0, 0]), c.clone())
                }
                LocalRing::Weierstrass => ParamPoly::monomial(Monomial([0, i, j]), c.clone()),
                LocalRing::RootGaps => {
                    let alpha = ParamPoly::var(Param::E1) - ParamPoly::var(Param::E2);
                    let beta = ParamPoly::int(2) * ParamPoly::var(Param::E1) + ParamPoly::var(Param::E2);
                    (alpha.pow(i) * beta.pow(j)).scale(c)
                }
                _ => return Err(not_poly()),
            };
            out += &term;
        }
        Ok(out)
    }

    pub fn render(self, s: &LocalScalar) -> String {
        if s.is_zero() {
            return "0".into();
        }
        let names = self.symbol_names();
        let mut out = String::new();
        for (k, (e, c)) in s.terms.iter().rev().enumerate() {
            let mut factors = Vec::new();
            for slot in 0..2 {
                match e[slot] {
                    0 => {}
                    1 => factors.push(names[slot].to_string()),
                    p => factors.push(format!("{}^{}", names[slot], p)),
                }
            }
            let mag = c.abs();
            let body = if factors.is_empty() {
                fmt_rational(&mag)
            } else if mag.is_one() {
                factors.join("*")
            } else {
                format!("{}*{}", fmt_rational(&mag), factors.join("*"))
            };
            let sign = match (k, c.is_negative()) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            out.push_str(sign);
            out.push_str(&body);
        }
        out
    }
}
