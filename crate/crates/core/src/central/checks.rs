//! Verification sweeps over homogeneous basis tuples of a degree window.
//!
//! Each sweep evaluates independent tuples in parallel and collects the
//! results in tuple order, so reports do not depend on scheduling. When a
//! sample budget is smaller than the number of tuples, a fixed-seed
//! generator picks the subset.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{cocycle_eval, extended_bracket, Cocycle, ExtendedElement};
use crate::coefficients::ParamPoly;
use crate::current::{tensor, CurrentAlgebra};
use crate::error::{Error, Result};
use crate::kn::{fn_mul_oracle, fn_residue_pairing_oracle, Family, FnElement};
use crate::lie::LieElement;

const SEED: u64 = 0x6b6e_6166_6669_6e65;

/// Inclusive degree range `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "(i64, i64)")]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::EmptyWindow(lo, hi));
        }
        Ok(Window { lo, hi })
    }

    pub fn degrees(self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

impl From<Window> for (i64, i64) {
    fn from(w: Window) -> Self {
        (w.lo, w.hi)
    }
}

impl FromStr for Window {
    type Err = Error;
    /// `LO:HI`, e.g. `-4:4`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Eval(format!("window must look like LO:HI, got {s:?}"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        Window::new(lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub tuple: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub family: String,
    pub algebra: String,
    pub window: Window,
    pub tuples_checked: usize,
    pub violations: Vec<Violation>,
    pub bounds: Option<serde_json::Value>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn report(
    check: &str,
    family: Family,
    algebra: &str,
    window: Window,
    results: Vec<Option<Violation>>,
) -> VerificationReport {
    VerificationReport {
        check: check.into(),
        family: family.to_string(),
        algebra: algebra.into(),
        window,
        tuples_checked: results.len(),
        violations: results.into_iter().flatten().collect(),
        bounds: None,
    }
}

/// Keeps everything, or a seeded sample of `budget` items in input order.
fn select<T: Clone>(items: Vec<T>, budget: Option<usize>) -> Vec<T> {
    match budget {
        Some(b) if b < items.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let mut idx = sample(&mut rng, items.len(), b).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| items[i].clone()).collect()
        }
        _ => items,
    }
}

fn triples<T: Copy>(basis: &[T]) -> Vec<(T, T, T)> {
    let mut out = Vec::new();
    for p in 0..basis.len() {
        for q in p + 1..basis.len() {
            for r in q + 1..basis.len() {
                out.push((basis[p], basis[q], basis[r]));
            }
        }
    }
    out
}

fn label(alg: &CurrentAlgebra, (i, n): (usize, i64)) -> String {
    format!("{}({})", alg.lie().label(i), n)
}

fn current_algebra(psi: &dyn Cocycle) -> CurrentAlgebra {
    CurrentAlgebra::new(psi.algebra().clone(), psi.family())
}

/// `ψ(u, v) + ψ(v, u) = 0` on all basis pairs, including `u = v`.
pub fn antisymmetry_check(psi: &dyn Cocycle, window: Window) -> Result<VerificationReport> {
    let alg = current_algebra(psi);
    let basis = alg.window_basis(window.lo, window.hi);
    let mut pairs = Vec::new();
    for p in 0..basis.len() {
        for q in p..basis.len() {
            pairs.push((basis[p], basis[q]));
        }
    }
    let results = pairs
        .par_iter()
        .map(|&((i, n), (j, m))| {
            let s = &psi.eval_basis(i, n, j, m)? + &psi.eval_basis(j, m, i, n)?;
            Ok((!s.is_zero()).then(|| Violation {
                tuple: format!("{}, {}", label(&alg, (i, n)), label(&alg, (j, m))),
                value: s.to_string(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report("antisymmetry", psi.family(), alg.lie().name(), window, results))
}

/// Cyclic sum `ψ([a,b],c) + ψ([b,c],a) + ψ([c,a],b)` on basis triples,
/// together with antisymmetry on basis pairs.
pub fn cocycle_condition_check(
    psi: &dyn Cocycle,
    window: Window,
    budget: Option<usize>,
) -> Result<VerificationReport> {
    let alg = current_algebra(psi);
    let basis = alg.window_basis(window.lo, window.hi);
    let picked = select(triples(&basis), budget);
    let mut results = picked
        .par_iter()
        .map(|&(a, b, c)| {
            let (ua, ub, uc) = (alg.basis(a.0, a.1), alg.basis(b.0, b.1), alg.basis(c.0, c.1));
            let mut s = cocycle_eval(psi, &ua.bracket(&ub)?, &uc)?;
            s += &cocycle_eval(psi, &ub.bracket(&uc)?, &ua)?;
            s += &cocycle_eval(psi, &uc.bracket(&ua)?, &ub)?;
            Ok((!s.is_zero()).then(|| Violation {
                tuple: format!("{}, {}, {}", label(&alg, a), label(&alg, b), label(&alg, c)),
                value: s.to_string(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let anti = antisymmetry_check(psi, window)?;
    results.extend(anti.violations.into_iter().map(Some));
    let mut r = report("cocycle-condition", psi.family(), alg.lie().name(), window, results);
    r.tuples_checked = picked.len() + anti.tuples_checked;
    Ok(r)
}

/// Jacobi identity of the extended bracket on basis triples.
pub fn extended_jacobi_check(
    psi: &dyn Cocycle,
    window: Window,
    budget: Option<usize>,
) -> Result<VerificationReport> {
    let alg = current_algebra(psi);
    let basis = alg.window_basis(window.lo, window.hi);
    let picked = select(triples(&basis), budget);
    let lift = |(i, n): (usize, i64)| ExtendedElement::lift(alg.basis(i, n));
    let results = picked
        .par_iter()
        .map(|&(a, b, c)| {
            let (xa, xb, xc) = (lift(a), lift(b), lift(c));
            let j1 = extended_bracket(psi, &extended_bracket(psi, &xa, &xb)?, &xc)?;
            let j2 = extended_bracket(psi, &extended_bracket(psi, &xb, &xc)?, &xa)?;
            let j3 = extended_bracket(psi, &extended_bracket(psi, &xc, &xa)?, &xb)?;
            let s = j1.add(&j2)?.add(&j3)?;
            Ok((!s.is_zero()).then(|| Violation {
                tuple: format!("{}, {}, {}", label(&alg, a), label(&alg, b), label(&alg, c)),
                value: s.to_string(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report("jacobi", psi.family(), alg.lie().name(), window, results))
}

/// Observed total degrees `n + m` with `ψ(ḡ_n, ḡ_m) ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalityBounds {
    /// Smallest observed `n + m`; `None` if `ψ` vanishes on the window.
    pub t2: Option<i64>,
    /// Largest observed `n + m`.
    pub t1: Option<i64>,
    pub window: Window,
    pub observed: BTreeSet<i64>,
    pub pairs_checked: usize,
}

pub fn locality_bounds(psi: &dyn Cocycle, window: Window) -> Result<LocalityBounds> {
    let alg = current_algebra(psi);
    let basis = alg.window_basis(window.lo, window.hi);
    let pairs: Vec<_> = basis
        .iter()
        .flat_map(|&a| basis.iter().map(move |&b| (a, b)))
        .collect();
    let hits = pairs
        .par_iter()
        .map(|&((i, n), (j, m))| Ok((!psi.eval_basis(i, n, j, m)?.is_zero()).then_some(n + m)))
        .collect::<Result<Vec<_>>>()?;
    let observed: BTreeSet<i64> = hits.into_iter().flatten().collect();
    Ok(LocalityBounds {
        t2: observed.first().copied(),
        t1: observed.last().copied(),
        window,
        observed,
        pairs_checked: pairs.len(),
    })
}

/// Flags every nonzero `ψ(ḡ_n, ḡ_m)` with `n + m` outside `declared`.
pub fn locality_check(psi: &dyn Cocycle, window: Window, declared: (i64, i64)) -> Result<VerificationReport> {
    let b = locality_bounds(psi, window)?;
    let violations = b
        .observed
        .iter()
        .filter(|s| !(declared.0..=declared.1).contains(*s))
        .map(|s| Violation {
            tuple: format!("n + m = {s}"),
            value: format!("outside declared band [{}, {}]", declared.0, declared.1),
        })
        .collect();
    Ok(VerificationReport {
        check: "locality".into(),
        family: psi.family().to_string(),
        algebra: psi.algebra().name().into(),
        window,
        tuples_checked: b.pairs_checked,
        violations,
        bounds: Some(serde_json::json!({
            "T2": b.t2,
            "T1": b.t1,
            "declared": [declared.0, declared.1],
            "observed": b.observed,
        })),
    })
}

fn random_fn(rng: &mut ChaCha8Rng, family: Family, window: Window) -> FnElement {
    let terms = rng.gen_range(1..=3);
    FnElement::from_terms(
        family,
        (0..terms).map(|_| {
            let n = rng.gen_range(window.lo..=window.hi);
            let c = rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 };
            (n, ParamPoly::int(c))
        }),
    )
}

/// `ψ(x⊗(h f'), y⊗g) + ψ(x⊗f, y⊗(h g')) = 0` on `samples` seeded draws of
/// `f, g` (one to three terms in the window) and basis elements `x, y`.
pub fn l_invariance_check(
    psi: &dyn Cocycle,
    h: &FnElement,
    window: Window,
    samples: usize,
) -> Result<VerificationReport> {
    if h.family() != psi.family() {
        return Err(Error::FamilyMismatch(h.family().to_string(), psi.family().to_string()));
    }
    let alg = psi.algebra().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ samples as u64);
    let draws: Vec<_> = (0..samples)
        .map(|_| {
            let f = random_fn(&mut rng, psi.family(), window);
            let g = random_fn(&mut rng, psi.family(), window);
            let x = rng.gen_range(0..alg.dim());
            let y = rng.gen_range(0..alg.dim());
            (f, g, x, y)
        })
        .collect();
    let results = draws
        .par_iter()
        .map(|(f, g, x, y)| {
            let lx = LieElement::basis(alg.clone(), *x);
            let ly = LieElement::basis(alg.clone(), *y);
            let hf = h.mul(&f.derivative())?;
            let hg = h.mul(&g.derivative())?;
            let s = &cocycle_eval(psi, &tensor(&lx, &hf), &tensor(&ly, g))?
                + &cocycle_eval(psi, &tensor(&lx, f), &tensor(&ly, &hg))?;
            Ok((!s.is_zero()).then(|| Violation {
                tuple: format!("h = {h}, f = {f}, g = {g}, x = {}, y = {}", alg.label(*x), alg.label(*y)),
                value: s.to_string(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report("linvariance", psi.family(), alg.name(), window, results))
}

/// Closed-form products and pairings against the independent oracles on
/// all basis pairs of the window.
pub fn oracle_check(family: Family, window: Window) -> Result<VerificationReport> {
    let pairs: Vec<(i64, i64)> = window
        .degrees()
        .flat_map(|n| window.degrees().map(move |m| (n, m)))
        .collect();
    let results = pairs
        .par_iter()
        .map(|&(n, m)| {
            let (f, g) = (FnElement::basis(family, n), FnElement::basis(family, m));
            let mut bad = Vec::new();
            let p = f.mul(&g)?;
            let q = fn_mul_oracle(&f, &g)?;
            if p != q {
                bad.push(format!("product {p} vs oracle {q}"));
            }
            let w = f.pairing(&g)?;
            let r = fn_residue_pairing_oracle(&f, &g)?;
            if w != r {
                bad.push(format!("pairing {w} vs residues {r}"));
            }
            Ok((!bad.is_empty()).then(|| Violation {
                tuple: format!("A({n}), A({m})"),
                value: bad.join("; "),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = report("oracle", family, "functions", window, results);
    r.tuples_checked *= 2;
    Ok(r)
}

/// Products and pairings at the degenerate parameter values against the
/// classical rules `A_n A_m = A_{n+m}`, `ω(A_n, A_m) = −n δ_{n+m,0}`.
pub fn degeneration_check(family: Family, window: Window) -> Result<VerificationReport> {
    let at = family.degeneration();
    let mut results = Vec::new();
    for n in window.degrees() {
        for m in window.degrees() {
            let (f, g) = (FnElement::basis(family, n), FnElement::basis(family, m));
            let p = f.mul(&g)?.substitute(&at).with_family(Family::Classical);
            let want = FnElement::basis(Family::Classical, n + m);
            results.push((p != want).then(|| Violation {
                tuple: format!("A({n})*A({m})"),
                value: format!("{p} instead of {want}"),
            }));
            let w = f.pairing(&g)?.substitute(&at);
            let want = if n + m == 0 { ParamPoly::int(-n) } else { ParamPoly::zero() };
            results.push((w != want).then(|| Violation {
                tuple: format!("omega(A({n}), A({m}))"),
                value: format!("{w} instead of {want}"),
            }));
        }
    }
    Ok(report("degeneration", family, "functions", window, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::central::CurrentCocycle;
    use crate::current::sl2;
    use crate::lie::BilinearForm;

    fn psi(family: Family) -> CurrentCocycle {
        CurrentCocycle::new(BilinearForm::trace(&sl2()).unwrap(), family)
    }

    #[test]
    fn window_parsing() {
        assert_eq!("-4:4".parse::<Window>().unwrap(), Window { lo: -4, hi: 4 });
        assert!(matches!("3:1".parse::<Window>(), Err(Error::EmptyWindow(3, 1))));
        assert!("3".parse::<Window>().is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let items: Vec<usize> = (0..100).collect();
        let a = select(items.clone(), Some(10));
        assert_eq!(a, select(items.clone(), Some(10)));
        assert_eq!(a.len(), 10);
        assert_eq!(select(items.clone(), None), items);
    }

    #[test]
    fn small_sweeps_are_clean() {
        let w = Window::new(-2, 2).unwrap();
        for family in Family::ALL {
            let p = psi(family);
            assert!(cocycle_condition_check(&p, w, None).unwrap().is_clean());
            assert!(extended_jacobi_check(&p, w, Some(200)).unwrap().is_clean());
            assert!(l_invariance_check(&p, &FnElement::basis(family, 1), w, 20).unwrap().is_clean());
            assert!(degeneration_check(family, w).unwrap().is_clean());
        }
    }

    #[test]
    fn corrupted_entry_is_caught() {
        let w = Window::new(-2, 2).unwrap();
        let bad = psi(Family::ThreePoint).corrupted(1, -1, ParamPoly::one());
        let r = cocycle_condition_check(&bad, w, None).unwrap();
        assert!(!r.is_clean());
        let r = extended_jacobi_check(&bad, w, None).unwrap();
        assert!(!r.is_clean());
    }

    #[test]
    fn observed_bands() {
        let w = Window::new(-4, 4).unwrap();
        let expect = [(Family::Classical, 0), (Family::ThreePoint, 2), (Family::Torus, 4)];
        for (family, t1) in expect {
            let b = locality_bounds(&psi(family), w).unwrap();
            assert_eq!((b.t2, b.t1), (Some(0), Some(t1)), "{family}");
        }
    }
}
