//! Weierstrass ℘ on the torus: local series solved from
//! `(℘')² = 4(℘−e1)(℘−e2)(℘−e3)`, and the normal form `p(u) + ℘'·q(u)`
//! with `u = ℘ − e1`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{OnceLock, RwLock};

use super::local::{LocalRing, LocalScalar};
use super::series::LaurentSeries;
use super::{Family, FnElement};
use crate::coefficients::{rational, Param, ParamPoly, Rational};
use crate::error::{Error, Result};

/// Where a local ℘ expansion is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TorusPoint {
    /// The lattice point `0̄`; coordinate `t = z`, ring in `e1, e2`.
    Origin,
    /// The half period `½`; coordinate `t = z − ½`, ring in the root gaps.
    Half,
}

impl TorusPoint {
    pub fn ring(self) -> LocalRing {
        match self {
            TorusPoint::Origin => LocalRing::Weierstrass,
            TorusPoint::Half => LocalRing::RootGaps,
        }
    }
}

/// `e1, e2, e3` expressed in the local ring, with `e3 = −e1 − e2`.
fn roots(ring: LocalRing) -> Result<[LocalScalar; 3]> {
    let e1 = ring.from_param(&ParamPoly::var(Param::E1))?;
    let e2 = ring.from_param(&ParamPoly::var(Param::E2))?;
    let e3 = e1.add(&e2).neg();
    Ok([e1, e2, e3])
}

/// `(P')² − 4(P−e1)(P−e2)(P−e3)`.
fn ode_residual(p: &LaurentSeries<LocalScalar>, e: &[LocalScalar; 3]) -> LaurentSeries<LocalScalar> {
    let d = p.derivative();
    let lhs = d.mul(&d);
    let prec = p.precision();
    let mut rhs = LaurentSeries::monomial(0, LocalScalar::int(4), prec + 8);
    for root in e {
        rhs = rhs.mul(&p.sub(&LaurentSeries::monomial(0, root.clone(), prec)));
    }
    lhs.sub(&rhs)
}

/// Solves an even ansatz order by order.
///
/// `known` are the fixed leading terms; each unknown coefficient at `t^s`
/// (s = first, first+2, …) is found by probing the residual at x = 0..3,
/// interpolating the cubic in x at the lowest order where x enters, and
/// taking its root: the unique one when the dependence is linear, the
/// nonzero one when the constant term vanishes and it is quadratic.
fn solve_even_ansatz(
    ring: LocalRing,
    known: Vec<(i64, LocalScalar)>,
    first: i64,
    precision: i64,
) -> Result<LaurentSeries<LocalScalar>> {
    let e = roots(ring)?;
    let mut terms = known;
    let mut s = first;
    while s < precision {
        let probe = |x: i64| {
            let mut t = terms.clone();
            t.push((s, LocalScalar::int(x)));
            ode_residual(&LaurentSeries::from_terms(t, s + 1), &e)
        };
        let r: Vec<_> = (0..4).map(probe).collect();
        let fail = |msg: &str| Error::SeriesSolver(s, msg.to_string());
        let known_to = r.iter().map(LaurentSeries::precision).min().unwrap();
        let lo = r.iter().filter_map(LaurentSeries::valuation).min().unwrap_or(known_to);
        let ord = (lo..known_to)
            .find(|&k| r[0].coeff(k).ok() != r[1].coeff(k).ok())
            .ok_or_else(|| fail("unknown does not enter the known residual"))?;
        for k in lo..ord {
            if !r[0].coeff(k)?.is_zero() {
                return Err(Error::SeriesSolver(k, "earlier order not satisfied".into()));
            }
        }
        let v: Vec<LocalScalar> = r.iter().map(|x| x.coeff(ord)).collect::<Result<_>>()?;
        // Newton forward differences -> monomial coefficients
        let d1 = v[1].sub(&v[0]);
        let d2 = v[2].sub(&v[1].scale(&rational(2, 1))).add(&v[0]);
        let d3 = v[3]
            .sub(&v[2].scale(&rational(3, 1)))
            .add(&v[1].scale(&rational(3, 1)))
            .sub(&v[0]);
        let c3 = d3.scale(&rational(1, 6));
        let c2 = d2.scale(&rational(1, 2)).sub(&d3.scale(&rational(1, 2)));
        let c1 = d1.sub(&d2.scale(&rational(1, 2))).add(&d3.scale(&rational(1, 3)));
        let c0 = v[0].clone();
        let x = if c3.is_zero() && c2.is_zero() {
            let inv = c1.unit_inverse().ok_or_else(|| fail("linear coefficient is not a unit"))?;
            c0.mul(&inv).neg()
        } else if c3.is_zero() && c0.is_zero() {
            let inv = c2.unit_inverse().ok_or_else(|| fail("quadratic coefficient is not a unit"))?;
            c1.mul(&inv).neg()
        } else {
            return Err(fail("no admissible root"));
        };
        terms.push((s, x));
        s += 2;
    }
    Ok(LaurentSeries::from_terms(terms, precision))
}

fn cache() -> &'static RwLock<HashMap<TorusPoint, LaurentSeries<LocalScalar>>> {
    static CACHE: OnceLock<RwLock<HashMap<TorusPoint, LaurentSeries<LocalScalar>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Local expansion of ℘ with at least `rel` known terms past the leading one.
///
/// At `0̄` the ansatz is `t⁻² + Σ d_j t^{2j}`; at `½` it is
/// `e1 + Σ b_k t^{2k}`. Results are memoized per point; the cache only ever
/// holds the longest series solved so far and is truncated on the way out.
pub fn wp_series(point: TorusPoint, rel: i64) -> Result<LaurentSeries<LocalScalar>> {
    let precision = match point {
        TorusPoint::Origin => rel - 2,
        TorusPoint::Half => rel + 2,
    };
    if let Some(s) = cache().read().unwrap().get(&point) {
        if s.precision() >= precision {
            return Ok(s.truncate(precision));
        }
    }
    let series = solve_wp_uncached(point, precision)?;
    let mut w = cache().write().unwrap();
    let keep = w.get(&point).is_none_or(|old| old.precision() < series.precision());
    if keep {
        w.insert(point, series.clone());
    }
    Ok(series)
}

pub(crate) fn solve_wp_uncached(point: TorusPoint, precision: i64) -> Result<LaurentSeries<LocalScalar>> {
    let ring = point.ring();
    match point {
        TorusPoint::Origin => solve_even_ansatz(ring, vec![(-2, LocalScalar::one())], 0, precision),
        TorusPoint::Half => {
            let e1 = ring.from_param(&ParamPoly::var(Param::E1))?;
            solve_even_ansatz(ring, vec![(0, e1)], 2, precision)
        }
    }
}

/// `(℘')² − 4(℘−e1)(℘−e2)(℘−e3)` for a solved series; zero up to its
/// known precision when the solver is right.
pub fn wp_ode_residual(point: TorusPoint, series: &LaurentSeries<LocalScalar>) -> Result<LaurentSeries<LocalScalar>> {
    Ok(ode_residual(series, &roots(point.ring())?))
}

/// `g2 = 4(e1² + e1e2 + e2²)`.
pub fn g2() -> ParamPoly {
    let (e1, e2) = (ParamPoly::var(Param::E1), ParamPoly::var(Param::E2));
    ParamPoly::int(4) * (e1.pow(2) + &e1 * &e2 + e2.pow(2))
}

/// `g3 = 4e1e2e3 = −4e1e2(e1 + e2)`.
pub fn g3() -> ParamPoly {
    let (e1, e2) = (ParamPoly::var(Param::E1), ParamPoly::var(Param::E2));
    ParamPoly::int(-4) * &e1 * &e2 * (&e1 + &e2)
}

type UPoly = BTreeMap<i64, ParamPoly>;

fn upoly_add(a: &UPoly, b: &UPoly) -> UPoly {
    let mut out = a.clone();
    for (k, c) in b {
        let entry = out.entry(*k).or_default();
        *entry += c;
        if entry.is_zero() {
            out.remove(k);
        }
    }
    out
}

fn upoly_mul(a: &UPoly, b: &UPoly) -> UPoly {
    let mut out = UPoly::new();
    for (i, x) in a {
        for (j, y) in b {
            let entry = out.entry(i + j).or_default();
            *entry += &(x * y);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn upoly_scale(a: &UPoly, s: &ParamPoly) -> UPoly {
    a.iter()
        .map(|(k, c)| (*k, c * s))
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

fn upoly_derivative(a: &UPoly) -> UPoly {
    a.iter()
        .filter(|(k, _)| **k != 0)
        .map(|(k, c)| (k - 1, c * &ParamPoly::int(*k)))
        .collect()
}

fn linear(c0: ParamPoly) -> UPoly {
    upoly_add(&UPoly::from([(1, ParamPoly::one())]), &UPoly::from([(0, c0)]))
}

/// `(℘')² = 4u(u + e1 − e2)(u + e1 − e3)` as a polynomial in `u`.
fn wp_prime_squared() -> UPoly {
    let (e1, e2) = (ParamPoly::var(Param::E1), ParamPoly::var(Param::E2));
    let e3 = -(&e1 + &e2);
    let u = UPoly::from([(1, ParamPoly::int(4))]);
    let f = upoly_mul(&u, &linear(&e1 - &e2));
    let f = upoly_mul(&f, &linear(&e1 - &e3));
    f.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// `℘'' = 6℘² − g2/2` with `℘ = u + e1`.
fn wp_second_derivative() -> UPoly {
    let wp = linear(ParamPoly::var(Param::E1));
    let sq = upoly_scale(&upoly_mul(&wp, &wp), &ParamPoly::int(6));
    upoly_add(&sq, &UPoly::from([(0, -(g2().scale(&rational(1, 2))))]))
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

/// Canonical representative `p(u) + ℘'·q(u)` of a torus function, with
/// `(℘')²` always reduced by the Weierstrass equation.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EllipticNormalForm {
    p: UPoly,
    q: UPoly,
}

impl EllipticNormalForm {
    pub fn new(p: BTreeMap<i64, ParamPoly>, q: BTreeMap<i64, ParamPoly>) -> Self {
        let clean = |m: BTreeMap<i64, ParamPoly>| m.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        EllipticNormalForm {
            p: clean(p),
            q: clean(q),
        }
    }

    pub fn p(&self) -> &BTreeMap<i64, ParamPoly> {
        &self.p
    }

    pub fn q(&self) -> &BTreeMap<i64, ParamPoly> {
        &self.q
    }

    /// `A_{2k} = u^k`, `A_{2k+1} = ½℘'u^{k−1}`.
    pub fn from_fn(f: &FnElement) -> Result<Self> {
        if f.family() != Family::Torus {
            return Err(Error::FamilyMismatch(f.family().to_string(), "torus".into()));
        }
        let mut nf = EllipticNormalForm::default();
        for (n, c) in f.coeffs() {
            if n % 2 == 0 {
                nf.p = upoly_add(&nf.p, &UPoly::from([(n / 2, c.clone())]));
            } else {
                let k = (n - 1) / 2;
                nf.q = upoly_add(&nf.q, &UPoly::from([(k - 1, c.scale(&rational(1, 2)))]));
            }
        }
        Ok(nf)
    }

    pub fn to_fn(&self) -> FnElement {
        let mut terms = Vec::new();
        for (k, c) in &self.p {
            terms.push((2 * k, c.clone()));
        }
        // ℘'u^j = 2·A_{2j+3}
        for (j, c) in &self.q {
            terms.push((2 * j + 3, c.scale(&Rational::from_integer(2.into()))));
        }
        FnElement::from_terms(Family::Torus, terms)
    }

    pub fn add(&self, other: &Self) -> Self {
        EllipticNormalForm {
            p: upoly_add(&self.p, &other.p),
            q: upoly_add(&self.q, &other.q),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let qq = upoly_mul(&self.q, &other.q);
        EllipticNormalForm {
            p: upoly_add(&upoly_mul(&self.p, &other.p), &upoly_mul(&qq, &wp_prime_squared())),
            q: upoly_add(&upoly_mul(&self.p, &other.q), &upoly_mul(&self.q, &other.p)),
        }
    }

    /// `d/dz`: `(p(u))' = p'(u)℘'`, `(℘'q(u))' = ℘''q(u) + (℘')²q'(u)`.
    pub fn derivative(&self) -> Self {
        let p = upoly_add(
            &upoly_mul(&wp_second_derivative(), &self.q),
            &upoly_mul(&wp_prime_squared(), &upoly_derivative(&self.q)),
        );
        EllipticNormalForm {
            p,
            q: upoly_derivative(&self.p),
        }
    }
}
