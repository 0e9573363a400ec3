//! Consistency of sparse linear systems whose entries are parameter
//! polynomials, decided over the field of fractions.

use std::collections::BTreeMap;

use super::ParamPoly;

/// One equation `Σ coeffs[j]·x_j = rhs`.
#[derive(Clone, Debug, Default)]
pub struct LinearRow {
    pub coeffs: BTreeMap<usize, ParamPoly>,
    pub rhs: ParamPoly,
}

impl LinearRow {
    pub fn is_trivial(&self) -> bool {
        self.coeffs.is_empty() && self.rhs.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Consistency {
    pub consistent: bool,
    pub rank: usize,
    /// Index (into the input) of an equation reduced to `0 = c`, `c ≠ 0`.
    pub contradiction: Option<usize>,
}

/// Gaussian elimination over `Q(params)`.
///
/// Constant pivots are preferred and eliminate with rational division.
/// When only parameter-dependent pivots remain the update is the
/// fraction-free cross multiplication `p·row − r·pivot`, which scales the
/// row by a nonzero polynomial and so leaves the solution set unchanged.
pub fn check_consistency(rows: &[LinearRow]) -> Consistency {
    let mut live: Vec<(usize, LinearRow)> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_trivial())
        .map(|(i, r)| (i, r.clone()))
        .collect();
    let mut rank = 0;

    loop {
        if let Some(pos) = live
            .iter()
            .position(|(_, r)| r.coeffs.is_empty() && !r.rhs.is_zero())
        {
            return Consistency {
                consistent: false,
                rank,
                contradiction: Some(live[pos].0),
            };
        }
        live.retain(|(_, r)| !r.is_trivial());

        // constant pivot if one exists, otherwise the sparsest candidate
        let pick = live
            .iter()
            .enumerate()
            .flat_map(|(ri, (_, r))| r.coeffs.iter().map(move |(c, v)| (ri, *c, v)))
            .min_by_key(|(ri, _, v)| (!v.is_constant(), v.num_terms(), live[*ri].1.coeffs.len()));
        let Some((pivot_row, col, _)) = pick else {
            return Consistency {
                consistent: true,
                rank,
                contradiction: None,
            };
        };
        let (_, pivot) = live.swap_remove(pivot_row);
        let p = pivot.coeffs[&col].clone();
        let p_const = p.as_constant();
        rank += 1;

        for (_, row) in live.iter_mut() {
            let Some(r) = row.coeffs.get(&col).cloned() else {
                continue;
            };
            match &p_const {
                Some(pc) => {
                    let factor = r.scale(&pc.recip());
                    axpy(row, &pivot, &-&factor);
                }
                None => {
                    scale_row(row, &p);
                    axpy(row, &pivot, &-&r);
                }
            }
            debug_assert!(!row.coeffs.contains_key(&col));
        }
    }
}

fn scale_row(row: &mut LinearRow, s: &ParamPoly) {
    for v in row.coeffs.values_mut() {
        *v = &*v * s;
    }
    row.rhs = &row.rhs * s;
}

/// `row += factor · pivot`
fn axpy(row: &mut LinearRow, pivot: &LinearRow, factor: &ParamPoly) {
    for (c, v) in &pivot.coeffs {
        let add = v * factor;
        let entry = row.coeffs.entry(*c).or_default();
        *entry += &add;
        if entry.is_zero() {
            row.coeffs.remove(c);
        }
    }
    row.rhs += &(&pivot.rhs * factor);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Param;

    fn row(coeffs: &[(usize, ParamPoly)], rhs: ParamPoly) -> LinearRow {
        LinearRow {
            coeffs: coeffs.iter().cloned().collect(),
            rhs,
        }
    }

    #[test]
    fn rational_system() {
        // x + y = 1, x - y = 0 -> consistent; adding 2x = 3 breaks it
        let mut rows = vec![
            row(&[(0, 1.into()), (1, 1.into())], 1.into()),
            row(&[(0, 1.into()), (1, (-1).into())], 0.into()),
        ];
        let c = check_consistency(&rows);
        assert!(c.consistent);
        assert_eq!(c.rank, 2);
        rows.push(row(&[(0, 2.into())], 3.into()));
        assert!(!check_consistency(&rows).consistent);
    }

    #[test]
    fn parametric_pivot() {
        // a2·x = 1 is solvable over Q(a2); a2·x = 1 together with x = 0 is not
        let a2 = ParamPoly::var(Param::A2);
        let rows = vec![row(&[(0, a2.clone())], 1.into())];
        assert!(check_consistency(&rows).consistent);
        let rows = vec![row(&[(0, a2.clone())], 1.into()), row(&[(0, 1.into())], 0.into())];
        assert!(!check_consistency(&rows).consistent);
    }

    #[test]
    fn explicit_contradiction() {
        let rows = vec![LinearRow::default(), row(&[], 2.into())];
        let c = check_consistency(&rows);
        assert!(!c.consistent);
        assert_eq!(c.contradiction, Some(1));
    }
}
