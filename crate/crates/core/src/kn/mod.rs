//! Almost-graded function algebras with one basis element per degree:
//! Laurent polynomials, the three-point genus-zero algebra and the
//! two-point torus algebra.
//!
//! Each family has closed-form rules for products, derivatives and the
//! separating-cycle pairing `ω(f, g) = Σ_{P ∈ I} res_P(f dg)`, plus an
//! independent route through explicit rational functions, elliptic normal
//! forms and local Laurent expansions (see [`oracle`]).

pub mod local;
pub mod oracle;
pub mod series;
pub mod weierstrass;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::coefficients::{fmt_unsigned_term, Assignment, Param, ParamPoly, Rational};
use crate::error::{Error, Result};

pub use oracle::{fn_expand, fn_mul_oracle, fn_residue_pairing_oracle, PointLabel};
pub use weierstrass::EllipticNormalForm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `C[z, z⁻¹]`, poles at `0` and `∞`.
    Classical,
    /// Genus zero, poles at `±a` and `∞`; `A_{2k} = (z²−a²)^k`,
    /// `A_{2k+1} = z(z²−a²)^k`.
    ThreePoint,
    /// Torus, poles at `0̄` and `½`; `A_{2k} = (℘−e1)^k`,
    /// `A_{2k+1} = ½℘'(℘−e1)^{k−1}`.
    Torus,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Classical, Family::ThreePoint, Family::Torus];

    pub fn name(self) -> &'static str {
        match self {
            Family::Classical => "classical",
            Family::ThreePoint => "threepoint",
            Family::Torus => "torus",
        }
    }

    pub fn params(self) -> &'static [Param] {
        match self {
            Family::Classical => &[],
            Family::ThreePoint => &[Param::A2],
            Family::Torus => &[Param::E1, Param::E2],
        }
    }

    /// True if `p` only uses this family's parameters.
    pub fn admits(self, p: &ParamPoly) -> bool {
        p.params().iter().all(|x| self.params().contains(x))
    }

    pub fn marked_points(self) -> &'static [PointLabel] {
        match self {
            Family::Classical => &[PointLabel::Zero, PointLabel::Infinity],
            Family::ThreePoint => &[PointLabel::PlusA, PointLabel::MinusA, PointLabel::Infinity],
            Family::Torus => &[PointLabel::TorusOrigin, PointLabel::TorusHalf],
        }
    }

    /// Points whose residues make up the pairing, with orientation sign.
    ///
    /// On the torus the pairing is taken as `−res_{0̄}`, which by the
    /// residue theorem is the residue at `½`.
    pub fn pairing_points(self) -> &'static [(PointLabel, i64)] {
        match self {
            Family::Classical => &[(PointLabel::Zero, 1)],
            Family::ThreePoint => &[(PointLabel::PlusA, 1), (PointLabel::MinusA, 1)],
            Family::Torus => &[(PointLabel::TorusOrigin, -1)],
        }
    }

    /// Largest downward shift `n + m − h` in `A_n·A_m`.
    pub fn max_shift(self) -> i64 {
        match self {
            Family::Classical => 0,
            Family::ThreePoint => 2,
            Family::Torus => 4,
        }
    }

    /// Declared band `(T2, T1)` of total degrees where the pairing can be
    /// nonzero.
    pub fn cocycle_band(self) -> (i64, i64) {
        (0, self.max_shift())
    }

    /// Parameter values that collapse the family to the classical one.
    pub fn degeneration(self) -> Assignment {
        self.params()
            .iter()
            .map(|p| (*p, Rational::from_integer(0.into())))
            .collect()
    }

    fn alpha_beta() -> ParamPoly {
        let (e1, e2) = (ParamPoly::var(Param::E1), ParamPoly::var(Param::E2));
        (&e1 - &e2) * (ParamPoly::int(2) * &e1 + &e2)
    }

    /// `A_n · A_m` as `(degree, coefficient)` pairs.
    pub fn basis_product(self, n: i64, m: i64) -> Vec<(i64, ParamPoly)> {
        let both_odd = n.rem_euclid(2) == 1 && m.rem_euclid(2) == 1;
        let mut out = vec![(n + m, ParamPoly::one())];
        if both_odd {
            match self {
                Family::Classical => {}
                Family::ThreePoint => out.push((n + m - 2, ParamPoly::var(Param::A2))),
                Family::Torus => {
                    out.push((n + m - 2, ParamPoly::int(3) * ParamPoly::var(Param::E1)));
                    out.push((n + m - 4, Self::alpha_beta()));
                }
            }
        }
        out
    }

    /// `d/dz A_n` in the global coordinate.
    pub fn basis_derivative(self, n: i64) -> Vec<(i64, ParamPoly)> {
        let k = n.div_euclid(2);
        let odd = n.rem_euclid(2) == 1;
        let mut out = match (self, odd) {
            (Family::Classical, _) => vec![(n - 1, ParamPoly::int(n))],
            (Family::ThreePoint, false) => vec![(n - 1, ParamPoly::int(n))],
            (Family::ThreePoint, true) => vec![
                (n - 1, ParamPoly::int(n)),
                (n - 3, ParamPoly::int(2 * k) * ParamPoly::var(Param::A2)),
            ],
            (Family::Torus, false) => vec![(n + 1, ParamPoly::int(n))],
            (Family::Torus, true) => {
                let nf = EllipticNormalForm::from_fn(&FnElement::basis(self, n))
                    .expect("torus element");
                return nf.derivative().to_fn().coeffs.into_iter().collect();
            }
        };
        out.retain(|(_, c)| !c.is_zero());
        out
    }

    /// Closed-form `ω(A_n, A_m)`.
    pub fn basis_pairing(self, n: i64, m: i64) -> ParamPoly {
        let delta = |d: i64| m == -n + d;
        let nn = ParamPoly::int(-n);
        let odd = |x: i64| x.rem_euclid(2) == 1;
        let mut out = ParamPoly::zero();
        match self {
            Family::Classical => {
                if delta(0) {
                    out = nn;
                }
            }
            Family::ThreePoint | Family::Torus if odd(n) != odd(m) => {}
            Family::ThreePoint => {
                if delta(0) {
                    out = nn;
                } else if odd(n) && delta(2) {
                    out = ParamPoly::int(1 - n) * ParamPoly::var(Param::A2);
                }
            }
            Family::Torus => {
                if delta(0) {
                    out = nn;
                } else if odd(n) && delta(2) {
                    out = ParamPoly::int(3 * (1 - n)) * ParamPoly::var(Param::E1);
                } else if odd(n) && delta(4) {
                    out = ParamPoly::int(2 - n) * Self::alpha_beta();
                }
            }
        }
        out
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "classical" | "laurent" => Ok(Family::Classical),
            "threepoint" | "3point" => Ok(Family::ThreePoint),
            "torus" | "elliptic" => Ok(Family::Torus),
            other => Err(Error::Eval(format!("unknown family {other}"))),
        }
    }
}

/// Finite sum `Σ c_n A_n` in one family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnElement {
    family: Family,
    coeffs: BTreeMap<i64, ParamPoly>,
}

impl FnElement {
    pub fn zero(family: Family) -> Self {
        FnElement {
            family,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(family: Family, n: i64) -> Self {
        Self::from_terms(family, [(n, ParamPoly::one())])
    }

    pub fn constant(family: Family, c: ParamPoly) -> Self {
        Self::from_terms(family, [(0, c)])
    }

    pub fn from_terms(family: Family, terms: impl IntoIterator<Item = (i64, ParamPoly)>) -> Self {
        let mut f = FnElement::zero(family);
        for (n, c) in terms {
            f.add_term(n, &c);
        }
        f
    }

    fn add_term(&mut self, n: i64, c: &ParamPoly) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(n).or_default();
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `(degree, coefficient)` in increasing degree.
    pub fn coeffs(&self) -> impl DoubleEndedIterator<Item = (i64, &ParamPoly)> {
        self.coeffs.iter().map(|(n, c)| (*n, c))
    }

    pub fn coeff(&self, n: i64) -> ParamPoly {
        self.coeffs.get(&n).cloned().unwrap_or_default()
    }

    pub fn degrees(&self) -> BTreeSet<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn same_family(&self, other: &FnElement) -> Result<()> {
        if self.family != other.family {
            return Err(Error::FamilyMismatch(
                self.family.to_string(),
                other.family.to_string(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &FnElement) -> Result<FnElement> {
        self.same_family(other)?;
        let mut out = self.clone();
        for (n, c) in &other.coeffs {
            out.add_term(*n, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FnElement) -> Result<FnElement> {
        self.add(&other.scale(&ParamPoly::int(-1)))
    }

    pub fn scale(&self, s: &ParamPoly) -> FnElement {
        FnElement::from_terms(self.family, self.coeffs.iter().map(|(n, c)| (*n, c * s)))
    }

    /// Bilinear extension of the family's basis product.
    pub fn mul(&self, other: &FnElement) -> Result<FnElement> {
        self.same_family(other)?;
        let mut out = FnElement::zero(self.family);
        for (n, a) in &self.coeffs {
            for (m, b) in &other.coeffs {
                let ab = a * b;
                for (h, c) in self.family.basis_product(*n, *m) {
                    out.add_term(h, &(&ab * &c));
                }
            }
        }
        Ok(out)
    }

    pub fn derivative(&self) -> FnElement {
        let mut out = FnElement::zero(self.family);
        for (n, a) in &self.coeffs {
            for (h, c) in self.family.basis_derivative(*n) {
                out.add_term(h, &(a * &c));
            }
        }
        out
    }

    /// Closed-form pairing `ω(f, g)`, bilinearly extended.
    pub fn pairing(&self, other: &FnElement) -> Result<ParamPoly> {
        self.same_family(other)?;
        let mut out = ParamPoly::zero();
        for (n, a) in &self.coeffs {
            for (m, b) in &other.coeffs {
                let w = self.family.basis_pairing(*n, *m);
                if !w.is_zero() {
                    out += &(&(a * b) * &w);
                }
            }
        }
        Ok(out)
    }

    /// Coefficient substitution; the family tag is kept.
    pub fn substitute(&self, assignment: &Assignment) -> FnElement {
        FnElement::from_terms(
            self.family,
            self.coeffs.iter().map(|(n, c)| (*n, c.substitute(assignment))),
        )
    }

    /// Same coefficients, relabelled as another family.
    pub fn with_family(&self, family: Family) -> FnElement {
        FnElement {
            family,
            coeffs: self.coeffs.clone(),
        }
    }
}

/// Renders `coefficient * label`, e.g. `3*e1*h(0)` or `(a2 + 1)*A(2)`.
/// Returns the sign separately so callers can join terms.
pub(crate) fn fmt_scaled(c: &ParamPoly, label: &str) -> (bool, String) {
    if c.num_terms() == 1 {
        let (m, r) = c.leading().unwrap();
        let neg = num_traits::Signed::is_negative(r);
        let unit = num_traits::One::is_one(&num_traits::Signed::abs(r));
        let body = if m.is_one() && unit {
            label.to_string()
        } else {
            format!("{}*{}", fmt_unsigned_term(m, r), label)
        };
        return (neg, body);
    }
    let lead_neg = num_traits::Signed::is_negative(c.leading().unwrap().1);
    let shown = if lead_neg { -c } else { c.clone() };
    (lead_neg, format!("({shown})*{label}"))
}

pub(crate) fn join_terms(f: &mut fmt::Formatter<'_>, terms: &[(bool, String)]) -> fmt::Result {
    if terms.is_empty() {
        return f.write_str("0");
    }
    for (i, (neg, body)) in terms.iter().enumerate() {
        let sign = match (i, neg) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        };
        write!(f, "{sign}{body}")?;
    }
    Ok(())
}

impl fmt::Display for FnElement {
    /// Highest degree first: `A(2) + a2*A(0)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<_> = self
            .coeffs
            .iter()
            .rev()
            .map(|(n, c)| fmt_scaled(c, &format!("A({n})")))
            .collect();
        join_terms(f, &terms)
    }
}

pub fn fn_mul(f: &FnElement, g: &FnElement) -> Result<FnElement> {
    f.mul(g)
}

pub fn fn_derivative(f: &FnElement) -> FnElement {
    f.derivative()
}

pub fn fn_cocycle_pairing(f: &FnElement, g: &FnElement) -> Result<ParamPoly> {
    f.pairing(g)
}

/// Observed degree shifts `n + m − h` over all basis products in a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlmostGrading {
    pub shifts: BTreeSet<i64>,
    /// Products reach down to degree `n + m − l1`.
    pub l1: i64,
    /// Products reach up to degree `n + m + l2`.
    pub l2: i64,
}

pub fn almost_grading_bounds(family: Family, lo: i64, hi: i64) -> Result<AlmostGrading> {
    if lo > hi {
        return Err(Error::EmptyWindow(lo, hi));
    }
    let mut shifts = BTreeSet::new();
    for n in lo..=hi {
        for m in lo..=hi {
            let prod = FnElement::basis(family, n).mul(&FnElement::basis(family, m))?;
            shifts.extend(prod.degrees().into_iter().map(|h| n + m - h));
        }
    }
    let l1 = shifts.iter().copied().max().unwrap_or(0).max(0);
    let l2 = shifts.iter().map(|s| -s).max().unwrap_or(0).max(0);
    Ok(AlmostGrading { shifts, l1, l2 })
}
