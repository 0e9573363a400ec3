//! Independent evaluation route: explicit functions and local expansions.
//!
//! Products are recomputed from the defining formulas (Laurent monomials,
//! rational functions in `z`, elliptic normal forms) and the pairing from
//! residues of local Laurent expansions at the marked points. Nothing here
//! uses the closed-form tables in the parent module.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::local::{LocalRing, LocalScalar};
use super::series::LaurentSeries;
use super::weierstrass::{wp_series, EllipticNormalForm, TorusPoint};
use super::{Family, FnElement};
use crate::coefficients::{rational, Param, ParamPoly};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PointLabel {
    Zero,
    Infinity,
    PlusA,
    MinusA,
    TorusOrigin,
    TorusHalf,
}

impl PointLabel {
    pub fn name(self) -> &'static str {
        match self {
            PointLabel::Zero => "0",
            PointLabel::Infinity => "inf",
            PointLabel::PlusA => "+a",
            PointLabel::MinusA => "-a",
            PointLabel::TorusOrigin => "0bar",
            PointLabel::TorusHalf => "half",
        }
    }
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PointLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "0" => PointLabel::Zero,
            "inf" | "∞" => PointLabel::Infinity,
            "+a" | "a" => PointLabel::PlusA,
            "-a" => PointLabel::MinusA,
            "0bar" | "0̄" => PointLabel::TorusOrigin,
            "half" | "1/2" | "½" => PointLabel::TorusHalf,
            other => return Err(Error::Eval(format!("unknown point {other}"))),
        })
    }
}

fn check_point(family: Family, point: PointLabel) -> Result<()> {
    if family.marked_points().contains(&point) {
        Ok(())
    } else {
        Err(Error::UnknownPoint {
            point: point.to_string(),
            family: family.to_string(),
        })
    }
}

/// Coefficient ring of expansions at `point`.
pub fn local_ring(family: Family, point: PointLabel) -> Result<LocalRing> {
    check_point(family, point)?;
    Ok(match point {
        PointLabel::Zero => LocalRing::Rational,
        PointLabel::Infinity if family == Family::Classical => LocalRing::Rational,
        PointLabel::Infinity | PointLabel::PlusA | PointLabel::MinusA => LocalRing::SqrtA2,
        PointLabel::TorusOrigin => LocalRing::Weierstrass,
        PointLabel::TorusHalf => LocalRing::RootGaps,
    })
}

/// Order of vanishing of `A_n` at `point`.
pub fn basis_valuation(family: Family, point: PointLabel, n: i64) -> Result<i64> {
    check_point(family, point)?;
    Ok(match point {
        PointLabel::Zero => n,
        PointLabel::Infinity | PointLabel::TorusOrigin => -n,
        PointLabel::PlusA | PointLabel::MinusA => n.div_euclid(2),
        PointLabel::TorusHalf if n.rem_euclid(2) == 0 => n,
        PointLabel::TorusHalf => n - 2,
    })
}

fn basis_series(family: Family, point: PointLabel, n: i64, precision: i64) -> Result<LaurentSeries<LocalScalar>> {
    let v = basis_valuation(family, point, n)?;
    let rel = precision - v;
    if rel <= 0 {
        return Ok(LaurentSeries::zero(precision));
    }
    let one = LocalScalar::one;
    let a = || LocalScalar::symbol(0);
    let k = n.div_euclid(2);
    let odd = n.rem_euclid(2) == 1;
    let series = match (family, point) {
        (Family::Classical, PointLabel::Zero) => LaurentSeries::monomial(n, one(), precision),
        (Family::Classical, PointLabel::Infinity) => LaurentSeries::monomial(-n, one(), precision),
        (Family::ThreePoint, PointLabel::PlusA | PointLabel::MinusA) => {
            // z = ±a + t, w = z² − a² = ±2a·t + t²
            let s = if point == PointLabel::PlusA { 1 } else { -1 };
            let z = LaurentSeries::from_terms([(0, a().scale(&rational(s, 1))), (1, one())], rel);
            let w = LaurentSeries::from_terms([(1, a().scale(&rational(2 * s, 1))), (2, one())], 1 + rel);
            let wk = w.pow(k)?;
            if odd { z.mul(&wk) } else { wk }
        }
        (Family::ThreePoint, PointLabel::Infinity) => {
            // z = 1/t, w = t⁻² − a²
            let z = LaurentSeries::monomial(-1, one(), rel - 1);
            let w = LaurentSeries::from_terms([(-2, one()), (0, a().pow(2).neg())], rel - 2);
            let wk = w.pow(k)?;
            if odd { z.mul(&wk) } else { wk }
        }
        (Family::Torus, PointLabel::TorusOrigin | PointLabel::TorusHalf) => {
            let tp = if point == PointLabel::TorusOrigin {
                TorusPoint::Origin
            } else {
                TorusPoint::Half
            };
            let wp = wp_series(tp, rel + 2)?;
            let e1 = tp.ring().from_param(&ParamPoly::var(Param::E1))?;
            let u = wp.sub(&LaurentSeries::monomial(0, e1, wp.precision()));
            if odd {
                let half_dp = wp.derivative().scale(&LocalScalar::constant(rational(1, 2)));
                half_dp.mul(&u.pow(k - 1)?)
            } else {
                u.pow(k)?
            }
        }
        _ => unreachable!("point checked against family"),
    };
    if series.precision() < precision {
        return Err(Error::Truncated {
            exponent: precision,
            precision: series.precision(),
        });
    }
    Ok(series.truncate(precision))
}

/// Largest pole order of `f` at `point`.
pub fn pole_order(f: &FnElement, point: PointLabel) -> Result<i64> {
    let mut p = 0;
    for (n, _) in f.coeffs() {
        p = p.max(-basis_valuation(f.family(), point, n)?);
    }
    Ok(p)
}

/// Laurent expansion of `f` at `point`, known for all exponents `< precision`.
pub fn fn_expand(f: &FnElement, point: PointLabel, precision: i64) -> Result<LaurentSeries<LocalScalar>> {
    let ring = local_ring(f.family(), point)?;
    let mut out = LaurentSeries::zero(precision);
    for (n, c) in f.coeffs() {
        let c = ring.from_param(c)?;
        out = out.add(&basis_series(f.family(), point, n, precision)?.scale(&c));
    }
    Ok(out)
}

/// `res_P(f dg)` in the local coefficient ring at `P`.
pub fn residue_at(f: &FnElement, g: &FnElement, point: PointLabel) -> Result<LocalScalar> {
    if f.family() != g.family() {
        return Err(Error::FamilyMismatch(f.family().to_string(), g.family().to_string()));
    }
    let order = pole_order(f, point)?.max(pole_order(g, point)?) + 2;
    let fs = fn_expand(f, point, order)?;
    let gs = fn_expand(g, point, order)?;
    fs.mul(&gs.derivative()).residue()
}

/// `ω(f, g)` from local residues at the in-points of the family.
pub fn fn_residue_pairing_oracle(f: &FnElement, g: &FnElement) -> Result<ParamPoly> {
    let family = f.family();
    let mut total = LocalScalar::zero();
    let mut ring = LocalRing::Rational;
    for (point, sign) in family.pairing_points() {
        ring = local_ring(family, *point)?;
        let r = residue_at(f, g, *point)?;
        total = total.add(&r.scale(&rational(*sign, 1)));
    }
    ring.to_param(&total)
}

/// `num(z)·w^wpow` with `w = z² − a2`.
#[derive(Clone, Debug)]
struct ZRational {
    num: Vec<ParamPoly>,
    wpow: i64,
}

impl ZRational {
    fn w() -> Vec<ParamPoly> {
        vec![-ParamPoly::var(Param::A2), ParamPoly::zero(), ParamPoly::one()]
    }

    fn poly_mul(a: &[ParamPoly], b: &[ParamPoly]) -> Vec<ParamPoly> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![ParamPoly::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += &(x * y);
            }
        }
        out
    }

    fn basis(n: i64) -> Self {
        let num = if n.rem_euclid(2) == 0 {
            vec![ParamPoly::one()]
        } else {
            vec![ParamPoly::zero(), ParamPoly::one()]
        };
        ZRational {
            num,
            wpow: n.div_euclid(2),
        }
    }

    fn raise(&self, wpow: i64) -> Vec<ParamPoly> {
        let mut num = self.num.clone();
        for _ in wpow..self.wpow {
            num = Self::poly_mul(&num, &Self::w());
        }
        num
    }

    fn add(&self, other: &Self) -> Self {
        let wpow = self.wpow.min(other.wpow);
        let (a, b) = (self.raise(wpow), other.raise(wpow));
        let mut num = vec![ParamPoly::zero(); a.len().max(b.len())];
        for (i, c) in a.iter().enumerate() {
            num[i] += c;
        }
        for (i, c) in b.iter().enumerate() {
            num[i] += c;
        }
        ZRational { num, wpow }
    }

    fn scale(&self, s: &ParamPoly) -> Self {
        ZRational {
            num: self.num.iter().map(|c| c * s).collect(),
            wpow: self.wpow,
        }
    }

    fn mul(&self, other: &Self) -> Self {
        ZRational {
            num: Self::poly_mul(&self.num, &other.num),
            wpow: self.wpow + other.wpow,
        }
    }

    fn from_fn(f: &FnElement) -> Self {
        let mut acc = ZRational { num: Vec::new(), wpow: 0 };
        for (n, c) in f.coeffs() {
            acc = acc.add(&ZRational::basis(n).scale(c));
        }
        acc
    }

    /// Repeated division by `w`; each remainder `r0 + r1 z` at power `j`
    /// is `r0·A_{2j} + r1·A_{2j+1}`.
    fn to_fn(&self) -> FnElement {
        let a2 = ParamPoly::var(Param::A2);
        let mut num = self.num.clone();
        let mut j = self.wpow;
        let mut terms = Vec::new();
        while num.iter().any(|c| !c.is_zero()) {
            let mut quot = vec![ParamPoly::zero(); num.len().saturating_sub(2)];
            for i in (2..num.len()).rev() {
                let c = std::mem::take(&mut num[i]);
                num[i - 2] += &(&c * &a2);
                quot[i - 2] = c;
            }
            terms.push((2 * j, num.first().cloned().unwrap_or_default()));
            terms.push((2 * j + 1, num.get(1).cloned().unwrap_or_default()));
            num = quot;
            j += 1;
        }
        FnElement::from_terms(Family::ThreePoint, terms)
    }
}

/// `f·g` recomputed from explicit function representations.
pub fn fn_mul_oracle(f: &FnElement, g: &FnElement) -> Result<FnElement> {
    if f.family() != g.family() {
        return Err(Error::FamilyMismatch(f.family().to_string(), g.family().to_string()));
    }
    Ok(match f.family() {
        Family::Classical => {
            let mut out: BTreeMap<i64, ParamPoly> = BTreeMap::new();
            for (n, a) in f.coeffs() {
                for (m, b) in g.coeffs() {
                    *out.entry(n + m).or_default() += &(a * b);
                }
            }
            FnElement::from_terms(Family::Classical, out)
        }
        Family::ThreePoint => ZRational::from_fn(f).mul(&ZRational::from_fn(g)).to_fn(),
        Family::Torus => EllipticNormalForm::from_fn(f)?
            .mul(&EllipticNormalForm::from_fn(g)?)
            .to_fn(),
    })
}

/// Derivative recomputed from local expansions is awkward in the global
/// coordinate; this uses the explicit representations instead.
pub fn fn_derivative_oracle(f: &FnElement) -> Result<FnElement> {
    Ok(match f.family() {
        Family::Classical => FnElement::from_terms(
            Family::Classical,
            f.coeffs().map(|(n, c)| (n - 1, c * &ParamPoly::int(n))),
        ),
        Family::ThreePoint => {
            // (num·w^j)' = num'·w^j + num·j·2z·w^{j−1}
            let mut acc = ZRational { num: Vec::new(), wpow: 0 };
            for (n, c) in f.coeffs() {
                let b = ZRational::basis(n).scale(c);
                let dnum: Vec<ParamPoly> = b
                    .num
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| c * &ParamPoly::int(i as i64))
                    .collect();
                let two_jz = vec![ParamPoly::zero(), ParamPoly::int(2 * b.wpow)];
                acc = acc
                    .add(&ZRational { num: dnum, wpow: b.wpow })
                    .add(&ZRational {
                        num: ZRational::poly_mul(&b.num, &two_jz),
                        wpow: b.wpow - 1,
                    });
            }
            acc.to_fn()
        }
        Family::Torus => EllipticNormalForm::from_fn(f)?.derivative().to_fn(),
    })
}
