//! Current algebras `𝔤 ⊗ 𝒜` with bracket `[x⊗f, y⊗g] = [x,y]⊗fg`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use crate::coefficients::{Assignment, ParamPoly};
use crate::error::{Error, Result};
use crate::kn::{fmt_scaled, join_terms, Family, FnElement};
use crate::lie::{FiniteLieAlgebra, LieElement, Summand, SummandKind};

/// A finite Lie algebra paired with a function family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurrentAlgebra {
    lie: FiniteLieAlgebra,
    family: Family,
}

impl CurrentAlgebra {
    pub fn new(lie: FiniteLieAlgebra, family: Family) -> Self {
        CurrentAlgebra { lie, family }
    }

    pub fn lie(&self) -> &FiniteLieAlgebra {
        &self.lie
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn zero(&self) -> CurrentElement {
        CurrentElement::zero(self.lie.clone(), self.family)
    }

    /// `x_i ⊗ A_n`.
    pub fn basis(&self, i: usize, n: i64) -> CurrentElement {
        CurrentElement::from_terms(self.lie.clone(), self.family, [((i, n), ParamPoly::one())])
    }

    /// `label(n)`, e.g. `("h", 0)`.
    pub fn generator(&self, label: &str, n: i64) -> Result<CurrentElement> {
        let i = self
            .lie
            .index_of(label)
            .ok_or_else(|| Error::UnknownGenerator(label.to_string()))?;
        Ok(self.basis(i, n))
    }

    /// All `x_i ⊗ A_n` with `lo ≤ n ≤ hi`, ordered by degree then index.
    pub fn window_basis(&self, lo: i64, hi: i64) -> Vec<(usize, i64)> {
        (lo..=hi)
            .flat_map(|n| (0..self.lie.dim()).map(move |i| (i, n)))
            .collect()
    }
}

/// Finite sum `Σ c_{i,n} x_i ⊗ A_n`, keyed by (Lie basis index, degree).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurrentElement {
    algebra: FiniteLieAlgebra,
    family: Family,
    coeffs: BTreeMap<(usize, i64), ParamPoly>,
}

impl CurrentElement {
    pub fn zero(algebra: FiniteLieAlgebra, family: Family) -> Self {
        CurrentElement {
            algebra,
            family,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        algebra: FiniteLieAlgebra,
        family: Family,
        terms: impl IntoIterator<Item = ((usize, i64), ParamPoly)>,
    ) -> Self {
        let mut u = CurrentElement::zero(algebra, family);
        for (key, c) in terms {
            u.add_term(key, &c);
        }
        u
    }

    fn add_term(&mut self, key: (usize, i64), c: &ParamPoly) {
        if c.is_zero() {
            return;
        }
        assert!(key.0 < self.algebra.dim(), "basis index {} out of range", key.0);
        let entry = self.coeffs.entry(key).or_default();
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn algebra(&self) -> &FiniteLieAlgebra {
        &self.algebra
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn current_algebra(&self) -> CurrentAlgebra {
        CurrentAlgebra::new(self.algebra.clone(), self.family)
    }

    pub fn coeffs(&self) -> &BTreeMap<(usize, i64), ParamPoly> {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, n: i64) -> ParamPoly {
        self.coeffs.get(&(i, n)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub(crate) fn compatible(&self, other: &CurrentElement) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch(
                self.algebra.name().into(),
                other.algebra.name().into(),
            ));
        }
        if self.family != other.family {
            return Err(Error::FamilyMismatch(
                self.family.to_string(),
                other.family.to_string(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &CurrentElement) -> Result<CurrentElement> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_term(*k, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &CurrentElement) -> Result<CurrentElement> {
        self.add(&other.scale(&ParamPoly::int(-1)))
    }

    pub fn scale(&self, s: &ParamPoly) -> CurrentElement {
        CurrentElement::from_terms(
            self.algebra.clone(),
            self.family,
            self.coeffs.iter().map(|(k, c)| (*k, c * s)),
        )
    }

    pub fn substitute(&self, assignment: &Assignment) -> CurrentElement {
        CurrentElement::from_terms(
            self.algebra.clone(),
            self.family,
            self.coeffs.iter().map(|(k, c)| (*k, c.substitute(assignment))),
        )
    }

    /// Same coefficients read in another family.
    pub fn with_family(&self, family: Family) -> CurrentElement {
        CurrentElement {
            algebra: self.algebra.clone(),
            family,
            coeffs: self.coeffs.clone(),
        }
    }

    /// The `𝔤`-valued coefficient of `A_n`.
    pub fn component(&self, n: i64) -> LieElement {
        LieElement::from_coeffs(
            self.algebra.clone(),
            self.coeffs
                .iter()
                .filter(|((_, d), _)| *d == n)
                .map(|((i, _), c)| (*i, c.clone())),
        )
    }

    /// `[u, v]`, bilinear in the Lie structure constants and the family's
    /// basis products.
    pub fn bracket(&self, other: &CurrentElement) -> Result<CurrentElement> {
        self.compatible(other)?;
        let mut out = CurrentElement::zero(self.algebra.clone(), self.family);
        for ((i, n), a) in &self.coeffs {
            for ((j, m), b) in &other.coeffs {
                let lie = self.algebra.bracket_basis(*i, *j);
                if lie.is_empty() {
                    continue;
                }
                let ab = a * b;
                let prod = self.family.basis_product(*n, *m);
                for (k, c) in lie {
                    let abc = ab.scale(c);
                    for (h, d) in &prod {
                        out.add_term((*k, *h), &(&abc * d));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Terms in rendering order: degree descending, then basis index.
    pub(crate) fn render_terms(&self) -> Vec<(bool, String)> {
        let mut keys: Vec<_> = self.coeffs.keys().copied().collect();
        keys.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        keys.into_iter()
            .map(|(i, n)| {
                let label = format!("{}({})", self.algebra.label(i), n);
                fmt_scaled(&self.coeffs[&(i, n)], &label)
            })
            .collect()
    }
}

impl fmt::Display for CurrentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        join_terms(f, &self.render_terms())
    }
}

pub fn current_bracket(u: &CurrentElement, v: &CurrentElement) -> Result<CurrentElement> {
    u.bracket(v)
}

/// Degrees with a nonzero homogeneous component.
pub fn degree_support(u: &CurrentElement) -> BTreeSet<i64> {
    u.coeffs.keys().map(|(_, n)| *n).collect()
}

/// `x ⊗ f`.
pub fn tensor(x: &LieElement, f: &FnElement) -> CurrentElement {
    let mut out = CurrentElement::zero(x.algebra().clone(), f.family());
    for (i, a) in x.coeffs() {
        for (n, b) in f.coeffs() {
            out.add_term((*i, n), &(a * b));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sl2Generator {
    E,
    F,
    H,
}

impl Sl2Generator {
    pub fn label(self) -> &'static str {
        match self {
            Sl2Generator::E => "e",
            Sl2Generator::F => "f",
            Sl2Generator::H => "h",
        }
    }
}

/// Shared `sl(2)` so generators from separate calls compare equal cheaply.
pub fn sl2() -> FiniteLieAlgebra {
    static SL2: OnceLock<FiniteLieAlgebra> = OnceLock::new();
    SL2.get_or_init(|| FiniteLieAlgebra::sl(2).expect("sl(2) is valid"))
        .clone()
}

/// One-dimensional abelian algebra with basis label `A`, so that
/// `A(n)` stands for `A_n` itself and the current algebra is `𝒜`.
pub fn function_algebra() -> FiniteLieAlgebra {
    static FUNCTIONS: OnceLock<FiniteLieAlgebra> = OnceLock::new();
    FUNCTIONS
        .get_or_init(|| {
            FiniteLieAlgebra::from_structure_constants(
                "functions",
                vec!["A".into()],
                vec![vec![Vec::new()]],
                vec![Summand {
                    offset: 0,
                    len: 1,
                    kind: SummandKind::Abelian,
                }],
            )
            .expect("abelian algebra is valid")
        })
        .clone()
}

pub fn is_function_algebra(alg: &FiniteLieAlgebra) -> bool {
    alg == &function_algebra()
}

/// `e_n`, `f_n` or `h_n`.
pub fn sl2_generator(kind: Sl2Generator, n: i64, family: Family) -> CurrentElement {
    let alg = sl2();
    let i = alg.index_of(kind.label()).expect("sl(2) label");
    CurrentAlgebra::new(alg, family).basis(i, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Param;
    use Sl2Generator::{E, F, H};

    #[test]
    fn three_point_odd_bracket() {
        let tp = Family::ThreePoint;
        let got = sl2_generator(E, 1, tp).bracket(&sl2_generator(F, 1, tp)).unwrap();
        let expected = sl2_generator(H, 2, tp)
            .add(&sl2_generator(H, 0, tp).scale(&ParamPoly::var(Param::A2)))
            .unwrap();
        assert_eq!(got, expected);
        assert_eq!(got.to_string(), "h(2) + a2*h(0)");
        assert_eq!(degree_support(&got), BTreeSet::from([0, 2]));
    }

    #[test]
    fn even_degree_bracket_is_homogeneous() {
        let tp = Family::ThreePoint;
        for m in -3..=3 {
            let got = sl2_generator(H, 2, tp).bracket(&sl2_generator(E, m, tp)).unwrap();
            assert_eq!(got, sl2_generator(E, 2 + m, tp).scale(&ParamPoly::int(2)));
        }
    }

    #[test]
    fn torus_rendering() {
        let t = Family::Torus;
        let got = sl2_generator(E, 1, t).bracket(&sl2_generator(F, 1, t)).unwrap();
        assert_eq!(got.to_string(), "h(2) + 3*e1*h(0) + (2*e1^2 - e1*e2 - e2^2)*h(-2)");
    }

    #[test]
    fn zero_and_support() {
        let c = Family::Classical;
        let z = sl2_generator(H, 0, c).bracket(&sl2_generator(H, 5, c)).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.to_string(), "0");
        assert!(degree_support(&z).is_empty());
        let u = sl2_generator(E, 1, c).add(&sl2_generator(F, 1, c)).unwrap();
        assert_eq!(degree_support(&u), BTreeSet::from([1]));
    }

    #[test]
    fn mismatches_are_errors() {
        let a = sl2_generator(E, 1, Family::Torus);
        let b = sl2_generator(F, 1, Family::Classical);
        assert!(matches!(a.bracket(&b), Err(Error::FamilyMismatch(..))));
        let gl2 = CurrentAlgebra::new(FiniteLieAlgebra::gl(2).unwrap(), Family::Torus);
        assert!(matches!(
            a.bracket(&gl2.basis(0, 1)),
            Err(Error::AlgebraMismatch(..))
        ));
    }

    #[test]
    fn tensor_matches_basis() {
        let alg = sl2();
        let x = LieElement::basis(alg.clone(), 2);
        let f = FnElement::basis(Family::Torus, -2);
        assert_eq!(tensor(&x, &f), sl2_generator(H, -2, Family::Torus));
    }
}
