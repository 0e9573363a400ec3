//! Two-cocycles on current algebras and the centrally extended bracket
//! `[â, b̂] = [a, b]^ + ψ(a, b)·t`.

mod checks;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::coefficients::linear::{check_consistency, LinearRow};
use crate::coefficients::{Assignment, ParamPoly};
use crate::current::{CurrentAlgebra, CurrentElement};
use crate::error::{Error, Result};
use crate::kn::{fmt_scaled, fn_residue_pairing_oracle, join_terms, Family, FnElement};
use crate::lie::{BilinearForm, FiniteLieAlgebra};

pub use checks::{
    antisymmetry_check, cocycle_condition_check, degeneration_check, extended_jacobi_check,
    l_invariance_check, locality_bounds, locality_check, oracle_check, LocalityBounds,
    VerificationReport, Violation, Window,
};

/// A bilinear form on some current algebra, given on basis pairs.
pub trait Cocycle: Send + Sync {
    fn algebra(&self) -> &FiniteLieAlgebra;
    fn family(&self) -> Family;
    /// `ψ(x_i ⊗ A_n, x_j ⊗ A_m)`.
    fn eval_basis(&self, i: usize, n: i64, j: usize, m: i64) -> Result<ParamPoly>;
    fn describe(&self) -> String;
}

/// Which implementation of `ω` a geometric cocycle uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingRoute {
    /// Closed-form table.
    Table,
    /// Residues of local expansions.
    Oracle,
}

/// `ψ(x⊗f, y⊗g) = α(x, y)·ω(f, g)`.
pub struct CurrentCocycle {
    form: BilinearForm,
    family: Family,
    route: PairingRoute,
    memo: RwLock<HashMap<(i64, i64), ParamPoly>>,
    corruption: Option<(i64, i64, ParamPoly)>,
}

impl CurrentCocycle {
    pub fn new(form: BilinearForm, family: Family) -> Self {
        Self::with_route(form, family, PairingRoute::Table)
    }

    pub fn with_route(form: BilinearForm, family: Family, route: PairingRoute) -> Self {
        CurrentCocycle {
            form,
            family,
            route,
            memo: RwLock::new(HashMap::new()),
            corruption: None,
        }
    }

    /// Mutation harness: adds `delta` to the single table entry `ω(A_n, A_m)`.
    pub fn corrupted(mut self, n: i64, m: i64, delta: ParamPoly) -> Self {
        self.corruption = Some((n, m, delta));
        self
    }

    pub fn form(&self) -> &BilinearForm {
        &self.form
    }

    pub fn route(&self) -> PairingRoute {
        self.route
    }

    /// `ω(A_n, A_m)` along the configured route.
    pub fn pairing(&self, n: i64, m: i64) -> Result<ParamPoly> {
        let mut w = match self.route {
            PairingRoute::Table => self.family.basis_pairing(n, m),
            PairingRoute::Oracle => {
                if let Some(v) = self.memo.read().unwrap().get(&(n, m)) {
                    return Ok(self.apply_corruption(n, m, v.clone()));
                }
                let v = fn_residue_pairing_oracle(
                    &FnElement::basis(self.family, n),
                    &FnElement::basis(self.family, m),
                )?;
                self.memo.write().unwrap().insert((n, m), v.clone());
                v
            }
        };
        w = self.apply_corruption(n, m, w);
        Ok(w)
    }

    fn apply_corruption(&self, n: i64, m: i64, w: ParamPoly) -> ParamPoly {
        match &self.corruption {
            Some((cn, cm, d)) if (*cn, *cm) == (n, m) => &w + d,
            _ => w,
        }
    }
}

impl Cocycle for CurrentCocycle {
    fn algebra(&self) -> &FiniteLieAlgebra {
        self.form.algebra()
    }

    fn family(&self) -> Family {
        self.family
    }

    fn eval_basis(&self, i: usize, n: i64, j: usize, m: i64) -> Result<ParamPoly> {
        let a = self.form.entry(i, j);
        if a.is_zero() {
            return Ok(ParamPoly::zero());
        }
        Ok(a * &self.pairing(n, m)?)
    }

    fn describe(&self) -> String {
        let route = match self.route {
            PairingRoute::Table => "table",
            PairingRoute::Oracle => "residues",
        };
        let mut s = format!("alpha*omega on {} / {} ({route})", self.form.algebra(), self.family);
        if let Some((n, m, d)) = &self.corruption {
            s.push_str(&format!(", corrupted at ({n}, {m}) by {d}"));
        }
        s
    }
}

/// A functional on the current algebra with finite support.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearForm {
    values: BTreeMap<(usize, i64), ParamPoly>,
}

impl LinearForm {
    pub fn new(values: impl IntoIterator<Item = ((usize, i64), ParamPoly)>) -> Self {
        LinearForm {
            values: values.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn values(&self) -> &BTreeMap<(usize, i64), ParamPoly> {
        &self.values
    }

    pub fn eval(&self, u: &CurrentElement) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (k, c) in u.coeffs() {
            if let Some(v) = self.values.get(k) {
                out += &(c * v);
            }
        }
        out
    }
}

/// `δφ(u, v) = φ([u, v])`.
pub struct Coboundary {
    algebra: CurrentAlgebra,
    phi: LinearForm,
}

impl Cocycle for Coboundary {
    fn algebra(&self) -> &FiniteLieAlgebra {
        self.algebra.lie()
    }

    fn family(&self) -> Family {
        self.algebra.family()
    }

    fn eval_basis(&self, i: usize, n: i64, j: usize, m: i64) -> Result<ParamPoly> {
        let b = self.algebra.basis(i, n).bracket(&self.algebra.basis(j, m))?;
        Ok(self.phi.eval(&b))
    }

    fn describe(&self) -> String {
        format!("coboundary of a form with {} values", self.phi.values.len())
    }
}

pub fn coboundary(algebra: CurrentAlgebra, phi: LinearForm) -> Coboundary {
    Coboundary { algebra, phi }
}

/// `Σ c_k ψ_k` over cocycles on the same current algebra.
pub struct CocycleCombination {
    parts: Vec<(ParamPoly, Arc<dyn Cocycle>)>,
}

impl CocycleCombination {
    pub fn new(parts: Vec<(ParamPoly, Arc<dyn Cocycle>)>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Eval("empty cocycle combination".into()))?;
        for (_, p) in &parts {
            if p.algebra() != first.1.algebra() {
                return Err(Error::AlgebraMismatch(
                    first.1.algebra().name().into(),
                    p.algebra().name().into(),
                ));
            }
            if p.family() != first.1.family() {
                return Err(Error::FamilyMismatch(
                    first.1.family().to_string(),
                    p.family().to_string(),
                ));
            }
        }
        Ok(CocycleCombination { parts })
    }
}

impl Cocycle for CocycleCombination {
    fn algebra(&self) -> &FiniteLieAlgebra {
        self.parts[0].1.algebra()
    }

    fn family(&self) -> Family {
        self.parts[0].1.family()
    }

    fn eval_basis(&self, i: usize, n: i64, j: usize, m: i64) -> Result<ParamPoly> {
        let mut out = ParamPoly::zero();
        for (c, p) in &self.parts {
            out += &(c * &p.eval_basis(i, n, j, m)?);
        }
        Ok(out)
    }

    fn describe(&self) -> String {
        self.parts
            .iter()
            .map(|(c, p)| format!("({c})*[{}]", p.describe()))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn check_compatible(psi: &dyn Cocycle, u: &CurrentElement) -> Result<()> {
    if psi.algebra() != u.algebra() {
        return Err(Error::AlgebraMismatch(
            psi.algebra().name().into(),
            u.algebra().name().into(),
        ));
    }
    if psi.family() != u.family() {
        return Err(Error::FamilyMismatch(
            psi.family().to_string(),
            u.family().to_string(),
        ));
    }
    Ok(())
}

/// Bilinear extension of `ψ` from basis pairs.
pub fn cocycle_eval(psi: &dyn Cocycle, u: &CurrentElement, v: &CurrentElement) -> Result<ParamPoly> {
    check_compatible(psi, u)?;
    check_compatible(psi, v)?;
    let mut out = ParamPoly::zero();
    for ((i, n), a) in u.coeffs() {
        for ((j, m), b) in v.coeffs() {
            let w = psi.eval_basis(*i, *n, *j, *m)?;
            if !w.is_zero() {
                out += &(&(a * b) * &w);
            }
        }
    }
    Ok(out)
}

/// Element `u + c·t` of the central extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedElement {
    pub current: CurrentElement,
    pub central: ParamPoly,
}

impl ExtendedElement {
    pub fn new(current: CurrentElement, central: ParamPoly) -> Self {
        ExtendedElement { current, central }
    }

    pub fn lift(current: CurrentElement) -> Self {
        ExtendedElement::new(current, ParamPoly::zero())
    }

    /// The central generator `t`.
    pub fn central_unit(algebra: &CurrentAlgebra) -> Self {
        ExtendedElement::new(algebra.zero(), ParamPoly::one())
    }

    pub fn is_zero(&self) -> bool {
        self.current.is_zero() && self.central.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(ExtendedElement::new(
            self.current.add(&other.current)?,
            &self.central + &other.central,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&ParamPoly::int(-1)))
    }

    pub fn scale(&self, s: &ParamPoly) -> Self {
        ExtendedElement::new(self.current.scale(s), &self.central * s)
    }

    pub fn substitute(&self, assignment: &Assignment) -> Self {
        ExtendedElement::new(
            self.current.substitute(assignment),
            self.central.substitute(assignment),
        )
    }
}

impl fmt::Display for ExtendedElement {
    /// Current part in canonical order, then the central term: `h(0) - 2*t`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = self.current.render_terms();
        if !self.central.is_zero() {
            terms.push(fmt_scaled(&self.central, "t"));
        }
        join_terms(f, &terms)
    }
}

/// `[u + a·t, v + b·t] = [u, v] + ψ(u, v)·t`.
pub fn extended_bracket(psi: &dyn Cocycle, u: &ExtendedElement, v: &ExtendedElement) -> Result<ExtendedElement> {
    let current = u.current.bracket(&v.current)?;
    let central = cocycle_eval(psi, &u.current, &v.current)?;
    Ok(ExtendedElement::new(current, central))
}

/// A pair `(x⊗A_n, x⊗A_{−n})` on which `ψ` is nonzero. Every coboundary
/// vanishes there because `[x, x] = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub index: usize,
    pub label: String,
    pub degree: i64,
    pub value: String,
}

/// Searches Cartan-type basis elements first, then the rest, with
/// `n = 1, 2, …, max_degree`.
pub fn nontriviality_witness(psi: &dyn Cocycle, max_degree: i64) -> Result<Witness> {
    let alg = psi.algebra();
    let (cartan, other): (Vec<usize>, Vec<usize>) = (0..alg.dim()).partition(|&i| alg.is_cartan_type(i));
    for i in cartan.into_iter().chain(other) {
        for n in 1..=max_degree {
            let v = psi.eval_basis(i, n, i, -n)?;
            if !v.is_zero() {
                return Ok(Witness {
                    index: i,
                    label: alg.label(i).to_string(),
                    degree: n,
                    value: v.to_string(),
                });
            }
        }
    }
    Err(Error::NoWitness(max_degree))
}

/// Outcome of the finite-window equivalence question.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowEquivalence {
    pub window: (i64, i64),
    /// Number of basis pairs, i.e. equations.
    pub equations: usize,
    /// Number of unknowns (`λ` if present, plus the values of `φ`).
    pub unknowns: usize,
    pub solvable: bool,
}

/// Decides whether `ψ1 − λ·ψ2 = δφ` on all basis pairs of the window for
/// some scalar `λ` (when `psi2` is given) and some `φ` supported on the
/// degrees brackets of window elements can reach.
pub fn window_equivalence(
    psi1: &dyn Cocycle,
    psi2: Option<&dyn Cocycle>,
    window: Window,
) -> Result<WindowEquivalence> {
    let alg = CurrentAlgebra::new(psi1.algebra().clone(), psi1.family());
    if let Some(p) = psi2 {
        if p.algebra() != psi1.algebra() || p.family() != psi1.family() {
            return Err(Error::AlgebraMismatch(psi1.describe(), p.describe()));
        }
    }
    let basis = alg.window_basis(window.lo, window.hi);
    let dim = alg.lie().dim();
    let shift = alg.family().max_shift();
    let (dlo, dhi) = (2 * window.lo - shift, 2 * window.hi);
    let phi_index = |k: usize, h: i64| 1 + (h - dlo) as usize * dim + k;
    let mut rows = Vec::new();
    for (p, &(i, n)) in basis.iter().enumerate() {
        for &(j, m) in &basis[p + 1..] {
            let mut row = LinearRow {
                rhs: psi1.eval_basis(i, n, j, m)?,
                ..Default::default()
            };
            if let Some(p2) = psi2 {
                let v = p2.eval_basis(i, n, j, m)?;
                if !v.is_zero() {
                    row.coeffs.insert(0, v);
                }
            }
            let b = alg.basis(i, n).bracket(&alg.basis(j, m))?;
            for ((k, h), c) in b.coeffs() {
                debug_assert!((dlo..=dhi).contains(h));
                let e = row.coeffs.entry(phi_index(*k, *h)).or_default();
                *e += c;
            }
            row.coeffs.retain(|_, c| !c.is_zero());
            rows.push(row);
        }
    }
    let unknowns = (dhi - dlo + 1) as usize * dim + usize::from(psi2.is_some());
    let c = check_consistency(&rows);
    Ok(WindowEquivalence {
        window: (window.lo, window.hi),
        equations: rows.len(),
        unknowns,
        solvable: c.consistent,
    })
}

/// The two trace cocycles on `gl(n)` and evidence that they are independent.
pub struct GlCocyclePair {
    /// `tr(AB)·ω(f, g)`.
    pub psi1: CurrentCocycle,
    /// `tr(A)tr(B)·ω(f, g)`.
    pub psi2: CurrentCocycle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndependenceCertificate {
    /// `ψ2` vanishes on every pair of `sl(n)` basis elements.
    pub psi2_vanishes_on_sl: bool,
    /// Some `sl(n)` pair where `ψ1` is nonzero.
    pub psi1_on_sl: Option<Witness>,
    /// Coboundary-invariant witness that `ψ2` itself is not trivial.
    pub psi2_witness: Option<Witness>,
    /// No `λ, φ` with `ψ1 − λψ2 = δφ` on the window.
    pub equivalence: WindowEquivalence,
    pub independent: bool,
}

pub fn gl_cocycle_pair(n: usize, family: Family) -> Result<GlCocyclePair> {
    let gl = FiniteLieAlgebra::gl(n)?;
    Ok(GlCocyclePair {
        psi1: CurrentCocycle::new(BilinearForm::trace(&gl)?, family),
        psi2: CurrentCocycle::new(BilinearForm::trace_product(&gl)?, family),
    })
}

impl GlCocyclePair {
    pub fn certify(&self, window: Window) -> Result<IndependenceCertificate> {
        let alg = self.psi1.algebra();
        let sl: Vec<usize> = alg
            .summands()
            .iter()
            .filter(|s| s.kind == crate::lie::SummandKind::Simple)
            .flat_map(|s| s.range())
            .collect();
        let mut psi2_vanishes_on_sl = true;
        let mut psi1_on_sl = None;
        for &i in &sl {
            for &j in &sl {
                if !self.psi2.eval_basis(i, 1, j, -1)?.is_zero() {
                    psi2_vanishes_on_sl = false;
                }
                let v = self.psi1.eval_basis(i, 1, j, -1)?;
                if psi1_on_sl.is_none() && !v.is_zero() {
                    psi1_on_sl = Some(Witness {
                        index: i,
                        label: format!("{}, {}", alg.label(i), alg.label(j)),
                        degree: 1,
                        value: v.to_string(),
                    });
                }
            }
        }
        let psi2_witness = nontriviality_witness(&self.psi2, window.hi.max(1)).ok();
        let equivalence = window_equivalence(&self.psi1, Some(&self.psi2), window)?;
        let independent = !equivalence.solvable && psi2_witness.is_some();
        Ok(IndependenceCertificate {
            psi2_vanishes_on_sl,
            psi1_on_sl,
            psi2_witness,
            equivalence,
            independent,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Param;
    use crate::current::{sl2, sl2_generator, Sl2Generator::*};

    fn sl2_cocycle(family: Family) -> CurrentCocycle {
        CurrentCocycle::new(BilinearForm::trace(&sl2()).unwrap(), family)
    }

    fn lift(u: CurrentElement) -> ExtendedElement {
        ExtendedElement::lift(u)
    }

    #[test]
    fn classical_value() {
        let psi = sl2_cocycle(Family::Classical);
        let c = Family::Classical;
        let v = cocycle_eval(&psi, &sl2_generator(E, 2, c), &sl2_generator(F, -2, c)).unwrap();
        assert_eq!(v, ParamPoly::int(-2));
    }

    #[test]
    fn three_point_extended_relations() {
        let tp = Family::ThreePoint;
        let psi = sl2_cocycle(tp);
        let b = extended_bracket(&psi, &lift(sl2_generator(E, 2, tp)), &lift(sl2_generator(F, -2, tp))).unwrap();
        assert_eq!(b.to_string(), "h(0) - 2*t");
        let b = extended_bracket(&psi, &lift(sl2_generator(E, 1, tp)), &lift(sl2_generator(F, -1, tp))).unwrap();
        assert_eq!(b.to_string(), "h(0) + a2*h(-2) - t");
        for n in [-4, -2, 2, 4] {
            let v = cocycle_eval(&psi, &sl2_generator(H, n, tp), &sl2_generator(H, -n, tp)).unwrap();
            assert_eq!(v, ParamPoly::int(-2 * n));
        }
    }

    #[test]
    fn central_unit_is_central() {
        let tp = Family::ThreePoint;
        let psi = sl2_cocycle(tp);
        let t = ExtendedElement::central_unit(&CurrentAlgebra::new(sl2(), tp));
        let b = extended_bracket(&psi, &t, &lift(sl2_generator(E, 3, tp))).unwrap();
        assert!(b.is_zero());
    }

    #[test]
    fn coboundary_examples() {
        let c = Family::Classical;
        let alg = CurrentAlgebra::new(sl2(), c);
        let h = sl2().index_of("h").unwrap();
        let d = coboundary(alg.clone(), LinearForm::new([((h, 0), ParamPoly::one())]));
        let v = cocycle_eval(&d, &sl2_generator(E, 1, c), &sl2_generator(F, -1, c)).unwrap();
        assert_eq!(v, ParamPoly::one());
        let v = cocycle_eval(&d, &sl2_generator(H, 3, c), &sl2_generator(H, -3, c)).unwrap();
        assert!(v.is_zero());
        let zero = coboundary(alg, LinearForm::default());
        assert!(zero.eval_basis(0, 1, 1, -1).unwrap().is_zero());
    }

    #[test]
    fn witnesses() {
        for family in Family::ALL {
            let w = nontriviality_witness(&sl2_cocycle(family), 4).unwrap();
            assert_eq!((w.label.as_str(), w.degree), ("h", 1));
        }
        let psi = sl2_cocycle(Family::Torus);
        assert_eq!(psi.eval_basis(2, 2, 2, -2).unwrap(), ParamPoly::int(-4));
        let pair = gl_cocycle_pair(2, Family::Classical).unwrap();
        let w = nontriviality_witness(&pair.psi2, 4).unwrap();
        assert_eq!((w.label.as_str(), w.value.as_str()), ("I", "-4"));
    }

    #[test]
    fn gl_pair_values() {
        let tp = Family::ThreePoint;
        let pair = gl_cocycle_pair(2, tp).unwrap();
        let gl = pair.psi1.algebra().clone();
        let (i, e12, e21) = (
            gl.index_of("I").unwrap(),
            gl.index_of("E[1,2]").unwrap(),
            gl.index_of("E[2,1]").unwrap(),
        );
        for n in [-3, 2, 4] {
            assert_eq!(pair.psi1.eval_basis(i, n, i, -n).unwrap(), ParamPoly::int(-2 * n));
            assert!(pair.psi2.eval_basis(e12, n, e21, -n).unwrap().is_zero());
            assert_eq!(pair.psi1.eval_basis(e12, n, e21, -n).unwrap(), ParamPoly::int(-n));
        }
    }

    #[test]
    fn cocycle_is_not_a_window_coboundary() {
        let psi = sl2_cocycle(Family::ThreePoint);
        let eq = window_equivalence(&psi, None, Window::new(-2, 2).unwrap()).unwrap();
        assert!(!eq.solvable);
    }

    #[test]
    fn coboundary_is_a_window_coboundary() {
        let tp = Family::ThreePoint;
        let alg = CurrentAlgebra::new(sl2(), tp);
        let h = sl2().index_of("h").unwrap();
        let e = sl2().index_of("e").unwrap();
        let phi = LinearForm::new([
            ((h, 0), ParamPoly::one()),
            ((e, 1), ParamPoly::var(Param::A2)),
            ((h, -2), ParamPoly::int(3)),
        ]);
        let d = coboundary(alg, phi);
        let eq = window_equivalence(&d, None, Window::new(-2, 2).unwrap()).unwrap();
        assert!(eq.solvable);
    }

    #[test]
    fn gl2_pair_is_independent() {
        for family in Family::ALL {
            let cert = gl_cocycle_pair(2, family)
                .unwrap()
                .certify(Window::new(-2, 2).unwrap())
                .unwrap();
            assert!(cert.psi2_vanishes_on_sl);
            assert!(cert.psi1_on_sl.is_some());
            assert!(cert.independent, "{family}");
        }
    }

    #[test]
    fn gl1_pair_is_dependent() {
        let cert = gl_cocycle_pair(1, Family::Classical)
            .unwrap()
            .certify(Window::new(-2, 2).unwrap())
            .unwrap();
        assert!(cert.equivalence.solvable);
        assert!(!cert.independent);
    }

    #[test]
    fn oracle_route_matches_table() {
        for family in Family::ALL {
            let form = BilinearForm::trace(&sl2()).unwrap();
            let table = CurrentCocycle::new(form.clone(), family);
            let oracle = CurrentCocycle::with_route(form, family, PairingRoute::Oracle);
            for n in -3..=3 {
                for m in -3..=3 {
                    assert_eq!(
                        table.eval_basis(2, n, 2, m).unwrap(),
                        oracle.eval_basis(2, n, 2, m).unwrap(),
                        "{family} {n} {m}"
                    );
                }
            }
        }
    }
}
