use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::Rational;
use crate::error::{Error, Result};

/// Formal parameters of the function-algebra families.
///
/// The three-point family only ever sees `a` through `a²`, so `A2` is a
/// single symbol. On the torus `e3 = -e1 - e2` is eliminated up front.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    A2,
    E1,
    E2,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::A2, Param::E1, Param::E2];

    pub fn name(self) -> &'static str {
        match self {
            Param::A2 => "a2",
            Param::E1 => "e1",
            Param::E2 => "e2",
        }
    }

    pub fn from_name(name: &str) -> Option<Param> {
        match name {
            "a2" => Some(Param::A2),
            "e1" => Some(Param::E1),
            "e2" => Some(Param::E2),
            _ => None,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Exponent vector over `(a2, e1, e2)`.
///
/// Ordered by total degree first, then lexicographically, which is the
/// order used for canonical rendering (largest first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u32; 3]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; 3])
    }

    pub fn var(p: Param) -> Self {
        let mut e = [0; 3];
        e[p.slot()] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponent(&self, p: Param) -> u32 {
        self.0[p.slot()]
    }

    pub fn is_one(&self) -> bool {
        self.0 == [0; 3]
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with rational coefficients in the formal parameters.
///
/// Zero coefficients are never stored, so equality is structural. A single
/// polynomial may use `a2` or `e1, e2` but never both: those belong to
/// different families and mixing them is a `ParamMismatch`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ParamPoly {
    terms: BTreeMap<Monomial, Rational>,
}

/// Which family-level parameter set a polynomial lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Support {
    Constant,
    A2,
    Elliptic,
    Mixed,
}

impl ParamPoly {
    pub fn zero() -> Self {
        ParamPoly::default()
    }

    pub fn one() -> Self {
        ParamPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        ParamPoly { terms }
    }

    pub fn int(c: i64) -> Self {
        ParamPoly::constant(Rational::from_integer(BigInt::from(c)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        ParamPoly::constant(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn var(p: Param) -> Self {
        ParamPoly::monomial(Monomial::var(p), Rational::one())
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ParamPoly { terms }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = ParamPoly::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The rational value if this polynomial has no parameter dependence.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Parameters that occur with nonzero exponent.
    pub fn params(&self) -> Vec<Param> {
        Param::ALL
            .into_iter()
            .filter(|p| self.terms.keys().any(|m| m.exponent(*p) > 0))
            .collect()
    }

    /// Leading term in the graded-lex order, if any.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn support(&self) -> Support {
        let mut a = false;
        let mut e = false;
        for m in self.terms.keys() {
            a |= m.exponent(Param::A2) > 0;
            e |= m.exponent(Param::E1) > 0 || m.exponent(Param::E2) > 0;
        }
        match (a, e) {
            (false, false) => Support::Constant,
            (true, false) => Support::A2,
            (false, true) => Support::Elliptic,
            (true, true) => Support::Mixed,
        }
    }

    fn check_compatible(&self, other: &ParamPoly) -> Result<()> {
        let (l, r) = (self.support(), other.support());
        let clash = matches!(
            (l, r),
            (Support::A2, Support::Elliptic)
                | (Support::Elliptic, Support::A2)
                | (Support::Mixed, _)
                | (_, Support::Mixed)
        );
        if clash {
            let names = |p: &ParamPoly| {
                p.params()
                    .iter()
                    .map(|p| p.name())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            return Err(Error::ParamMismatch {
                left: format!("{{{}}}", names(self)),
                right: format!("{{{}}}", names(other)),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &ParamPoly) -> Result<ParamPoly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &ParamPoly) -> Result<ParamPoly> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &ParamPoly) -> ParamPoly {
        if self.is_zero() || other.is_zero() {
            return ParamPoly::zero();
        }
        let mut out = ParamPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> ParamPoly {
        if c.is_zero() {
            return ParamPoly::zero();
        }
        ParamPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (*m, v * c))
                .collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> ParamPoly {
        let mut out = ParamPoly::one();
        for _ in 0..exp {
            out = out.mul_unchecked(self);
        }
        out
    }

    /// Partial evaluation. Parameters missing from `assignment` stay formal.
    pub fn substitute(&self, assignment: &BTreeMap<Param, Rational>) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = *m;
            for (p, value) in assignment {
                let e = m.exponent(*p);
                if e > 0 {
                    coeff *= pow_rational(value, e);
                    rest.0[p.slot()] = 0;
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }

    /// Replace each parameter by a polynomial.
    pub fn compose(&self, images: &BTreeMap<Param, ParamPoly>) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, c) in &self.terms {
            let mut term = ParamPoly::constant(c.clone());
            for p in Param::ALL {
                let e = m.exponent(p);
                if e == 0 {
                    continue;
                }
                let base = images
                    .get(&p)
                    .cloned()
                    .unwrap_or_else(|| ParamPoly::var(p));
                term = term.mul_unchecked(&base.pow(e));
            }
            out = &out + &term;
        }
        out
    }
}

fn pow_rational(r: &Rational, e: u32) -> Rational {
    let mut out = Rational::one();
    for _ in 0..e {
        out *= r;
    }
    out
}

impl From<i64> for ParamPoly {
    fn from(c: i64) -> Self {
        ParamPoly::int(c)
    }
}

impl From<Rational> for ParamPoly {
    fn from(c: Rational) -> Self {
        ParamPoly::constant(c)
    }
}

impl From<Param> for ParamPoly {
    fn from(p: Param) -> Self {
        ParamPoly::var(p)
    }
}

// Operators panic on a parameter-set clash; use `try_add`/`try_mul` where
// the operands come from unvalidated input.
impl Add<&ParamPoly> for &ParamPoly {
    type Output = ParamPoly;
    fn add(self, rhs: &ParamPoly) -> ParamPoly {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub<&ParamPoly> for &ParamPoly {
    type Output = ParamPoly;
    fn sub(self, rhs: &ParamPoly) -> ParamPoly {
        self.try_add(&-rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul<&ParamPoly> for &ParamPoly {
    type Output = ParamPoly;
    fn mul(self, rhs: &ParamPoly) -> ParamPoly {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        ParamPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($imp:ident $method:ident),*) => {$(
        impl $imp<ParamPoly> for ParamPoly {
            type Output = ParamPoly;
            fn $method(self, rhs: ParamPoly) -> ParamPoly { (&self).$method(&rhs) }
        }
        impl $imp<&ParamPoly> for ParamPoly {
            type Output = ParamPoly;
            fn $method(self, rhs: &ParamPoly) -> ParamPoly { (&self).$method(rhs) }
        }
        impl $imp<ParamPoly> for &ParamPoly {
            type Output = ParamPoly;
            fn $method(self, rhs: ParamPoly) -> ParamPoly { self.$method(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        -&self
    }
}

impl AddAssign<&ParamPoly> for ParamPoly {
    fn add_assign(&mut self, rhs: &ParamPoly) {
        self.check_compatible(rhs).unwrap_or_else(|e| panic!("{e}"));
        for (m, c) in &rhs.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl SubAssign<&ParamPoly> for ParamPoly {
    fn sub_assign(&mut self, rhs: &ParamPoly) {
        *self += &-rhs;
    }
}

impl Zero for ParamPoly {
    fn zero() -> Self {
        ParamPoly::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for ParamPoly {
    fn one() -> Self {
        ParamPoly::one()
    }
}

pub(crate) fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for p in Param::ALL {
        match m.exponent(p) {
            0 => {}
            1 => parts.push(p.name().to_string()),
            e => parts.push(format!("{}^{}", p.name(), e)),
        }
    }
    parts.join("*")
}

/// Renders one term with a non-negative coefficient magnitude.
pub(crate) fn fmt_unsigned_term(m: &Monomial, c: &Rational) -> String {
    let c = c.abs();
    if m.is_one() {
        fmt_rational(&c)
    } else if c.is_one() {
        fmt_monomial(m)
    } else {
        format!("{}*{}", fmt_rational(&c), fmt_monomial(m))
    }
}

impl fmt::Display for ParamPoly {
    /// Canonical rendering: terms from the largest monomial down, explicit
    /// `*` and `^`, e.g. `2*e1^2 - e1*e2 - e2^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            f.write_str(&fmt_unsigned_term(m, c))?;
        }
        Ok(())
    }
}
