//! Finite-dimensional Lie algebras given by rational structure constants,
//! and invariant symmetric bilinear forms on them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::coefficients::{fmt_rational, ParamPoly, Rational};
use crate::error::{Error, Result};

pub type RatMatrix = Vec<Vec<Rational>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SummandKind {
    Abelian,
    Simple,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summand {
    pub offset: usize,
    pub len: usize,
    pub kind: SummandKind,
}

impl Summand {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

#[derive(Debug)]
struct LieData {
    name: String,
    labels: Vec<String>,
    /// `constants[i][j]` lists `(k, c)` with `[x_i, x_j] = Σ c·x_k`.
    constants: Vec<Vec<Vec<(usize, Rational)>>>,
    summands: Vec<Summand>,
    /// Defining matrix realization, when there is one.
    matrices: Option<Vec<RatMatrix>>,
}

/// A finite-dimensional Lie algebra. Cheap to clone; validated on
/// construction (antisymmetry, Jacobi on all basis triples, summands).
#[derive(Clone, Debug)]
pub struct FiniteLieAlgebra(Arc<LieData>);

impl PartialEq for FiniteLieAlgebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.name == other.0.name && self.0.labels == other.0.labels)
    }
}

impl Eq for FiniteLieAlgebra {}

impl fmt::Display for FiniteLieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

fn elementary(n: usize, i: usize, j: usize) -> RatMatrix {
    let mut m = vec![vec![Rational::zero(); n]; n];
    m[i][j] = Rational::one();
    m
}

fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let n = a.len();
    let mut out = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

fn mat_sub(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

pub(crate) fn trace(a: &RatMatrix) -> Rational {
    (0..a.len()).map(|i| a[i][i].clone()).sum()
}

/// Solves `Σ_k c_k · columns[k] = target` exactly; `None` if inconsistent.
fn solve_columns(columns: &[Vec<Rational>], target: &[Rational]) -> Option<Vec<Rational>> {
    let rows = target.len();
    let cols = columns.len();
    let mut m: Vec<Vec<Rational>> = (0..rows)
        .map(|r| {
            let mut row: Vec<Rational> = columns.iter().map(|c| c[r].clone()).collect();
            row.push(target[r].clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..=cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}

pub(crate) fn determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        let inv = m[c][c].recip();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            for j in c..n {
                let d = &f * &m[c][j];
                m[i][j] -= d;
            }
        }
    }
    det
}

fn flatten(m: &RatMatrix) -> Vec<Rational> {
    m.iter().flatten().cloned().collect()
}

impl FiniteLieAlgebra {
    /// Builds and validates an algebra from explicit structure constants.
    pub fn from_structure_constants(
        name: impl Into<String>,
        labels: Vec<String>,
        constants: Vec<Vec<Vec<(usize, Rational)>>>,
        summands: Vec<Summand>,
    ) -> Result<Self> {
        Self::build(name.into(), labels, constants, summands, None)
    }

    fn build(
        name: String,
        labels: Vec<String>,
        constants: Vec<Vec<Vec<(usize, Rational)>>>,
        summands: Vec<Summand>,
        matrices: Option<Vec<RatMatrix>>,
    ) -> Result<Self> {
        let dim = labels.len();
        if constants.len() != dim || constants.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: constants.len(),
            });
        }
        let alg = FiniteLieAlgebra(Arc::new(LieData {
            name,
            labels,
            constants,
            summands,
            matrices,
        }));
        alg.validate()?;
        Ok(alg)
    }

    fn from_matrices(
        name: String,
        labels: Vec<String>,
        matrices: Vec<RatMatrix>,
        summands: Vec<Summand>,
    ) -> Result<Self> {
        let flat: Vec<Vec<Rational>> = matrices.iter().map(flatten).collect();
        let dim = matrices.len();
        let mut constants = vec![vec![Vec::new(); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let comm = mat_sub(
                    &mat_mul(&matrices[i], &matrices[j]),
                    &mat_mul(&matrices[j], &matrices[i]),
                );
                let coords = solve_columns(&flat, &flatten(&comm)).ok_or_else(|| {
                    Error::Eval(format!("{name}: basis is not closed under the commutator"))
                })?;
                constants[i][j] = coords
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
            }
        }
        Self::build(name, labels, constants, summands, Some(matrices))
    }

    /// Matrices of `sl(n)` in the order `E_ij` (i ≠ j, row-major), then
    /// `H_i = E_ii − E_{i+1,i+1}`.
    fn sl_basis(n: usize) -> (Vec<String>, Vec<RatMatrix>) {
        let mut labels = Vec::new();
        let mut mats = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    labels.push(format!("E[{},{}]", i + 1, j + 1));
                    mats.push(elementary(n, i, j));
                }
            }
        }
        for i in 0..n - 1 {
            labels.push(format!("H[{}]", i + 1));
            mats.push(mat_sub(&elementary(n, i, i), &elementary(n, i + 1, i + 1)));
        }
        (labels, mats)
    }

    /// `sl(n)`, trace-free `n × n` matrices. For `n = 2` the basis is
    /// labelled `e, f, h`.
    pub fn sl(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidRank(n));
        }
        let (mut labels, mats) = Self::sl_basis(n);
        if n == 2 {
            labels = vec!["e".into(), "f".into(), "h".into()];
        }
        let dim = mats.len();
        Self::from_matrices(
            format!("sl({n})"),
            labels,
            mats,
            vec![Summand {
                offset: 0,
                len: dim,
                kind: SummandKind::Simple,
            }],
        )
    }

    /// `gl(n)` with basis `I` followed by the `sl(n)` basis, so the
    /// decomposition scalars ⊕ sl(n) is a contiguous split.
    pub fn gl(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidRank(n));
        }
        let mut identity = vec![vec![Rational::zero(); n]; n];
        for (i, row) in identity.iter_mut().enumerate() {
            row[i] = Rational::one();
        }
        let mut labels = vec!["I".to_string()];
        let mut mats = vec![identity];
        let mut summands = vec![Summand {
            offset: 0,
            len: 1,
            kind: SummandKind::Abelian,
        }];
        if n >= 2 {
            let (l, m) = Self::sl_basis(n);
            summands.push(Summand {
                offset: 1,
                len: m.len(),
                kind: SummandKind::Simple,
            });
            labels.extend(l);
            mats.extend(m);
        }
        Self::from_matrices(format!("gl({n})"), labels, mats, summands)
    }

    /// Abelian algebra of dimension `m`, realized by diagonal matrix units.
    pub fn abelian(m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidRank(m));
        }
        let labels = (1..=m).map(|k| format!("Z[{k}]")).collect();
        let mats = (0..m).map(|k| elementary(m, k, k)).collect();
        Self::from_matrices(
            format!("ab({m})"),
            labels,
            mats,
            vec![Summand {
                offset: 0,
                len: m,
                kind: SummandKind::Abelian,
            }],
        )
    }

    /// Lie-algebra direct sum; matrices are embedded block-diagonally.
    pub fn direct_sum(parts: &[FiniteLieAlgebra]) -> Result<Self> {
        let name = parts
            .iter()
            .map(|p| p.name().to_string())
            .collect::<Vec<_>>()
            .join(" + ");
        let mut labels: Vec<String> = Vec::new();
        let mut summands = Vec::new();
        let total: usize = parts.iter().map(|p| p.dim()).sum();
        let mut constants = vec![vec![Vec::new(); total]; total];
        let size: usize = parts.iter().map(|p| p.matrix_size().unwrap_or(0)).sum();
        let have_matrices = parts.iter().all(|p| p.0.matrices.is_some());
        let mut matrices = Vec::new();
        let (mut offset, mut block) = (0, 0);
        for p in parts {
            for l in p.labels() {
                if labels.contains(l) {
                    return Err(Error::Summands(format!("duplicate basis label {l}")));
                }
                labels.push(l.clone());
            }
            for s in &p.0.summands {
                summands.push(Summand {
                    offset: s.offset + offset,
                    len: s.len,
                    kind: s.kind,
                });
            }
            for i in 0..p.dim() {
                for j in 0..p.dim() {
                    constants[offset + i][offset + j] = p
                        .bracket_basis(i, j)
                        .iter()
                        .map(|(k, c)| (k + offset, c.clone()))
                        .collect();
                }
            }
            if have_matrices {
                let n = p.matrix_size().unwrap_or(0);
                for m in p.0.matrices.as_ref().unwrap() {
                    let mut big = vec![vec![Rational::zero(); size]; size];
                    for r in 0..n {
                        for c in 0..n {
                            big[block + r][block + c] = m[r][c].clone();
                        }
                    }
                    matrices.push(big);
                }
                block += n;
            }
            offset += p.dim();
        }
        Self::build(
            name,
            labels,
            constants,
            summands,
            have_matrices.then_some(matrices),
        )
    }

    fn validate(&self) -> Result<()> {
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                let lhs = self.bracket_vec(i, j);
                let rhs = self.bracket_vec(j, i);
                if lhs.iter().zip(&rhs).any(|(a, b)| a != &-b) {
                    return Err(Error::NotAntisymmetric(i, j));
                }
            }
        }
        for i in 0..dim {
            for j in i + 1..dim {
                for k in j + 1..dim {
                    if !self.jacobi_sum(i, j, k).iter().all(Zero::is_zero) {
                        return Err(Error::Jacobi(i, j, k));
                    }
                }
            }
        }
        // summands tile the basis and do not talk to each other
        let mut covered = vec![None; dim];
        for (s_idx, s) in self.0.summands.iter().enumerate() {
            for b in s.range() {
                if b >= dim || covered[b].is_some() {
                    return Err(Error::Summands(format!("basis index {b} covered twice or out of range")));
                }
                covered[b] = Some(s_idx);
            }
        }
        if covered.iter().any(Option::is_none) {
            return Err(Error::Summands("summands do not cover the basis".into()));
        }
        for i in 0..dim {
            for j in 0..dim {
                let cross = covered[i] != covered[j];
                let abelian = self.0.summands[covered[i].unwrap()].kind == SummandKind::Abelian;
                if (cross || abelian) && !self.bracket_basis(i, j).is_empty() {
                    return Err(Error::Summands(format!(
                        "[{}, {}] should vanish",
                        self.label(i),
                        self.label(j)
                    )));
                }
            }
        }
        Ok(())
    }

    fn bracket_vec(&self, i: usize, j: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim()];
        for (k, c) in self.bracket_basis(i, j) {
            v[*k] += c;
        }
        v
    }

    /// `[[x_i,x_j],x_k] + [[x_j,x_k],x_i] + [[x_k,x_i],x_j]` as a dense vector.
    pub fn jacobi_sum(&self, i: usize, j: usize, k: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim()];
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            for (l, c1) in self.bracket_basis(a, b) {
                for (m, c2) in self.bracket_basis(*l, c) {
                    out[*m] += c1 * c2;
                }
            }
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn dim(&self) -> usize {
        self.0.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.0.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.0.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.labels.iter().position(|l| l == label)
    }

    pub fn summands(&self) -> &[Summand] {
        &self.0.summands
    }

    /// Sparse `[x_i, x_j]`.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, Rational)] {
        &self.0.constants[i][j]
    }

    pub fn matrix(&self, i: usize) -> Option<&RatMatrix> {
        self.0.matrices.as_ref().map(|m| &m[i])
    }

    pub fn matrix_size(&self) -> Option<usize> {
        self.0.matrices.as_ref().map(|m| m.first().map_or(0, Vec::len))
    }

    /// `ad(x_i)` is diagonal in the basis: a Cartan-type basis element.
    pub fn is_cartan_type(&self, i: usize) -> bool {
        (0..self.dim()).all(|j| self.bracket_basis(i, j).iter().all(|(k, _)| *k == j))
    }

    /// Coordinates of an arbitrary matrix in this algebra, if it lies in
    /// the span of the realization.
    pub fn decompose_matrix(&self, m: &RatMatrix) -> Option<LieElement> {
        let mats = self.0.matrices.as_ref()?;
        let flat: Vec<Vec<Rational>> = mats.iter().map(flatten).collect();
        let coords = solve_columns(&flat, &flatten(m))?;
        Some(LieElement::from_coeffs(
            self.clone(),
            coords
                .into_iter()
                .enumerate()
                .map(|(i, c)| (i, ParamPoly::constant(c))),
        ))
    }

    /// Gram matrix of `tr(AB)` in the matrix realization.
    pub fn trace_gram(&self) -> Option<Vec<Vec<Rational>>> {
        let mats = self.0.matrices.as_ref()?;
        Some(
            mats.iter()
                .map(|a| mats.iter().map(|b| trace(&mat_mul(a, b))).collect())
                .collect(),
        )
    }

    /// Gram matrix of the Killing form `tr(ad x ∘ ad y)`.
    pub fn killing_gram(&self) -> Vec<Vec<Rational>> {
        let dim = self.dim();
        let ad = |i: usize| -> Vec<Vec<Rational>> {
            let mut m = vec![vec![Rational::zero(); dim]; dim];
            for j in 0..dim {
                for (k, c) in self.bracket_basis(i, j) {
                    m[*k][j] = c.clone();
                }
            }
            m
        };
        let ads: Vec<_> = (0..dim).map(ad).collect();
        ads.iter()
            .map(|a| ads.iter().map(|b| trace(&mat_mul(a, b))).collect())
            .collect()
    }

    pub fn structure_constants(&self) -> impl Iterator<Item = (usize, usize, usize, &Rational)> {
        self.0.constants.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .flat_map(move |(j, v)| v.iter().map(move |(k, c)| (i, j, *k, c)))
        })
    }

    /// Canonical JSON description used by `describe`.
    pub fn describe(&self) -> serde_json::Value {
        let constants: Vec<_> = self
            .structure_constants()
            .map(|(i, j, k, c)| serde_json::json!({"i": i, "j": j, "k": k, "c": fmt_rational(c)}))
            .collect();
        serde_json::json!({
            "name": self.name(),
            "dim": self.dim(),
            "basis": self.labels(),
            "summands": self.summands(),
            "structure_constants": constants,
        })
    }
}

pub fn make_sl(n: usize) -> Result<FiniteLieAlgebra> {
    FiniteLieAlgebra::sl(n)
}

pub fn make_gl(n: usize) -> Result<FiniteLieAlgebra> {
    FiniteLieAlgebra::gl(n)
}

/// Element of a finite Lie algebra with parameter-polynomial coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieElement {
    algebra: FiniteLieAlgebra,
    coeffs: BTreeMap<usize, ParamPoly>,
}

impl LieElement {
    pub fn zero(algebra: FiniteLieAlgebra) -> Self {
        LieElement {
            algebra,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(algebra: FiniteLieAlgebra, i: usize) -> Self {
        Self::from_coeffs(algebra, [(i, ParamPoly::one())])
    }

    pub fn from_coeffs(
        algebra: FiniteLieAlgebra,
        coeffs: impl IntoIterator<Item = (usize, ParamPoly)>,
    ) -> Self {
        let mut e = LieElement::zero(algebra);
        for (i, c) in coeffs {
            e.add_term(i, &c);
        }
        e
    }

    pub fn algebra(&self) -> &FiniteLieAlgebra {
        &self.algebra
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, ParamPoly> {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> ParamPoly {
        self.coeffs.get(&i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_term(&mut self, i: usize, c: &ParamPoly) {
        assert!(i < self.algebra.dim(), "basis index {i} out of range");
        let entry = self.coeffs.entry(i).or_default();
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    pub fn add(&self, other: &LieElement) -> Result<LieElement> {
        self.same_algebra(other)?;
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            out.add_term(*i, c);
        }
        Ok(out)
    }

    pub fn scale(&self, s: &ParamPoly) -> LieElement {
        LieElement::from_coeffs(
            self.algebra.clone(),
            self.coeffs.iter().map(|(i, c)| (*i, c * s)),
        )
    }

    fn same_algebra(&self, other: &LieElement) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch(
                self.algebra.name().into(),
                other.algebra.name().into(),
            ));
        }
        Ok(())
    }

    /// Bilinear extension of the structure constants.
    pub fn bracket(&self, other: &LieElement) -> Result<LieElement> {
        self.same_algebra(other)?;
        let mut out = LieElement::zero(self.algebra.clone());
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let ab = a * b;
                for (k, c) in self.algebra.bracket_basis(*i, *j) {
                    out.add_term(*k, &ab.scale(c));
                }
            }
        }
        Ok(out)
    }
}

pub fn lie_bracket(x: &LieElement, y: &LieElement) -> Result<LieElement> {
    x.bracket(y)
}

/// Invariant symmetric bilinear form, validated on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearForm {
    algebra: FiniteLieAlgebra,
    gram: Vec<Vec<ParamPoly>>,
}

impl BilinearForm {
    pub fn new(algebra: FiniteLieAlgebra, gram: Vec<Vec<ParamPoly>>) -> Result<Self> {
        let dim = algebra.dim();
        if gram.len() != dim || gram.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: gram.len(),
            });
        }
        for i in 0..dim {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        let form = BilinearForm { algebra, gram };
        form.check_invariance()?;
        Ok(form)
    }

    fn from_rational(algebra: FiniteLieAlgebra, gram: Vec<Vec<Rational>>) -> Result<Self> {
        let gram = gram
            .into_iter()
            .map(|r| r.into_iter().map(ParamPoly::constant).collect())
            .collect();
        Self::new(algebra, gram)
    }

    fn check_invariance(&self) -> Result<()> {
        let alg = &self.algebra;
        let dim = alg.dim();
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    // α([x_i,x_j],x_k) = α(x_i,[x_j,x_k])
                    let mut lhs = ParamPoly::zero();
                    for (l, c) in alg.bracket_basis(i, j) {
                        lhs += &self.gram[*l][k].scale(c);
                    }
                    let mut rhs = ParamPoly::zero();
                    for (l, c) in alg.bracket_basis(j, k) {
                        rhs += &self.gram[i][*l].scale(c);
                    }
                    if lhs != rhs {
                        return Err(Error::NotInvariant(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    /// `tr(AB)` in the matrix realization.
    pub fn trace(algebra: &FiniteLieAlgebra) -> Result<Self> {
        let gram = algebra
            .trace_gram()
            .ok_or_else(|| Error::Eval(format!("{algebra} has no matrix realization")))?;
        Self::from_rational(algebra.clone(), gram)
    }

    /// `tr(A)·tr(B)` in the matrix realization.
    pub fn trace_product(algebra: &FiniteLieAlgebra) -> Result<Self> {
        let traces: Vec<Rational> = (0..algebra.dim())
            .map(|i| {
                algebra
                    .matrix(i)
                    .map(trace)
                    .ok_or_else(|| Error::Eval(format!("{algebra} has no matrix realization")))
            })
            .collect::<Result<_>>()?;
        let gram = traces
            .iter()
            .map(|a| traces.iter().map(|b| a * b).collect())
            .collect();
        Self::from_rational(algebra.clone(), gram)
    }

    pub fn algebra(&self) -> &FiniteLieAlgebra {
        &self.algebra
    }

    pub fn entry(&self, i: usize, j: usize) -> &ParamPoly {
        &self.gram[i][j]
    }

    pub fn gram(&self) -> &[Vec<ParamPoly>] {
        &self.gram
    }

    pub fn eval(&self, x: &LieElement, y: &LieElement) -> Result<ParamPoly> {
        if x.algebra() != &self.algebra || y.algebra() != &self.algebra {
            return Err(Error::AlgebraMismatch(
                self.algebra.name().into(),
                x.algebra().name().into(),
            ));
        }
        let mut out = ParamPoly::zero();
        for (i, a) in x.coeffs() {
            for (j, b) in y.coeffs() {
                if !self.gram[*i][*j].is_zero() {
                    out += &(&(a * b) * &self.gram[*i][*j]);
                }
            }
        }
        Ok(out)
    }

    /// Exact determinant when the Gram matrix is parameter-free.
    pub fn determinant(&self) -> Option<Rational> {
        let m = self
            .gram
            .iter()
            .map(|r| r.iter().map(ParamPoly::as_constant).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some(determinant(m))
    }
}

/// Block-diagonal invariant form: `weights[k]` times the trace form on the
/// k-th simple summand, and `abelian_gram` on the abelian coordinates.
///
/// The abelian Gram is measured in units of the trace pairing when the
/// realization makes that pairing scalar on the abelian block (for `gl(n)`,
/// gram `(1)` gives `α(I, I) = tr(I·I) = n`); otherwise it is taken as is.
/// Simple summands without a matrix realization use the Killing form.
pub fn trace_form(
    algebra: &FiniteLieAlgebra,
    weights: &[ParamPoly],
    abelian_gram: &[Vec<ParamPoly>],
) -> Result<BilinearForm> {
    let simple: Vec<&Summand> = algebra
        .summands()
        .iter()
        .filter(|s| s.kind == SummandKind::Simple)
        .collect();
    let abelian: Vec<usize> = algebra
        .summands()
        .iter()
        .filter(|s| s.kind == SummandKind::Abelian)
        .flat_map(|s| s.range())
        .collect();
    if weights.len() != simple.len() {
        return Err(Error::Dimension {
            expected: simple.len(),
            found: weights.len(),
        });
    }
    if abelian_gram.len() != abelian.len() || abelian_gram.iter().any(|r| r.len() != abelian.len())
    {
        return Err(Error::Dimension {
            expected: abelian.len(),
            found: abelian_gram.len(),
        });
    }
    for i in 0..abelian.len() {
        for j in 0..i {
            if abelian_gram[i][j] != abelian_gram[j][i] {
                return Err(Error::NotSymmetric(abelian[i], abelian[j]));
            }
        }
    }
    let dim = algebra.dim();
    let base = algebra.trace_gram().unwrap_or_else(|| algebra.killing_gram());
    let mut gram = vec![vec![ParamPoly::zero(); dim]; dim];
    for (s, w) in simple.iter().zip(weights) {
        for i in s.range() {
            for j in s.range() {
                gram[i][j] = w * &ParamPoly::constant(base[i][j].clone());
            }
        }
    }
    let unit = abelian.first().and_then(|&a0| {
        let c = base[a0][a0].clone();
        let scalar = abelian.iter().enumerate().all(|(x, &i)| {
            abelian
                .iter()
                .enumerate()
                .all(|(y, &j)| base[i][j] == if x == y { c.clone() } else { Rational::zero() })
        });
        (scalar && algebra.trace_gram().is_some() && !c.is_zero()).then_some(c)
    });
    let unit = ParamPoly::constant(unit.unwrap_or_else(Rational::one));
    for (x, &i) in abelian.iter().enumerate() {
        for (y, &j) in abelian.iter().enumerate() {
            gram[i][j] = &abelian_gram[x][y] * &unit;
        }
    }
    BilinearForm::new(algebra.clone(), gram)
}
