//! Rank and linear solves by exact elimination.

use std::collections::BTreeSet;

use super::sparse::{axpy, get, SparseRow};
use super::{Rational, Scalar};
use crate::system::LpSystem;

/// Column count above which [`rank`] switches to sparse elimination.
pub const DENSE_RANK_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMethod {
    Auto { dense_limit: usize },
    Dense,
    Sparse,
}

impl Default for RankMethod {
    fn default() -> Self {
        RankMethod::Auto {
            dense_limit: DENSE_RANK_LIMIT,
        }
    }
}

/// Rank of the coefficient matrix, right-hand sides excluded.
pub fn rank(sys: &LpSystem, method: RankMethod) -> usize {
    let rows = matrix_rows(sys);
    let dense = match method {
        RankMethod::Auto { dense_limit } => sys.num_unknowns() <= dense_limit,
        RankMethod::Dense => true,
        RankMethod::Sparse => false,
    };
    if dense {
        rank_dense(&rows, sys.num_unknowns())
    } else {
        rank_sparse(rows, sys.num_unknowns())
    }
}

fn matrix_rows(sys: &LpSystem) -> Vec<SparseRow<Rational>> {
    sys.constraints().iter().map(|c| c.terms.clone()).collect()
}

fn densify<T: Scalar>(rows: &[SparseRow<T>], cols: usize) -> Vec<Vec<T>> {
    rows.iter()
        .map(|r| {
            let mut d = vec![T::zero(); cols];
            for (c, v) in r {
                d[*c] = v.clone();
            }
            d
        })
        .collect()
}

/// Row echelon form in place; returns the pivot columns.
fn echelon<T: Scalar>(m: &mut [Vec<T>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let piv = m[r][c].clone();
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].div(&piv);
            let (top, bottom) = m.split_at_mut(i);
            let pr = &top[r];
            for (x, y) in bottom[0][c..].iter_mut().zip(&pr[c..]) {
                if !y.is_zero() {
                    *x = x.sub_mul(&f, y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_dense<T: Scalar>(rows: &[SparseRow<T>], cols: usize) -> usize {
    let mut m = densify(rows, cols);
    echelon(&mut m, cols).len()
}

/// Markowitz-style elimination: repeatedly pivots on the sparsest remaining
/// row, at its entry whose column is least populated.
pub fn rank_sparse<T: Scalar>(rows: Vec<SparseRow<T>>, cols: usize) -> usize {
    let mut rows: Vec<Option<SparseRow<T>>> = rows
        .into_iter()
        .map(|r| if r.is_empty() { None } else { Some(r) })
        .collect();
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); cols];
    let mut by_len: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (i, r) in rows.iter().enumerate() {
        if let Some(r) = r {
            for (c, _) in r {
                col_rows[*c].insert(i);
            }
            by_len.insert((r.len(), i));
        }
    }
    let mut rank = 0;
    while let Some((_, p)) = by_len.pop_first() {
        let prow = rows[p].take().expect("queued rows are live");
        for (c, _) in &prow {
            col_rows[*c].remove(&p);
        }
        let pc = prow
            .iter()
            .map(|(c, _)| *c)
            .min_by_key(|c| (col_rows[*c].len(), *c))
            .expect("queued rows are nonempty");
        let piv = get(&prow, pc).expect("pivot entry").clone();
        let targets: Vec<usize> = col_rows[pc].iter().copied().collect();
        for i in targets {
            let old = rows[i].take().expect("indexed rows are live");
            by_len.remove(&(old.len(), i));
            let f = get(&old, pc).expect("indexed entry").div(&piv);
            let new = axpy(&old, &f, &prow);
            for (c, _) in &old {
                col_rows[*c].remove(&i);
            }
            for (c, _) in &new {
                col_rows[*c].insert(i);
            }
            if !new.is_empty() {
                by_len.insert((new.len(), i));
                rows[i] = Some(new);
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinearSolution {
    Unique(Vec<Rational>),
    Inconsistent,
    Underdetermined { rank: usize },
}

/// Solves the equality system alone, ignoring nonnegativity.
pub fn solve_linear(sys: &LpSystem) -> LinearSolution {
    let n = sys.num_unknowns();
    let mut m: Vec<Vec<Rational>> = sys
        .constraints()
        .iter()
        .map(|c| {
            let mut row = vec![<Rational as Scalar>::zero(); n + 1];
            for (id, v) in &c.terms {
                row[*id] = v.clone();
            }
            row[n] = c.rhs.clone();
            row
        })
        .collect();
    let pivots = echelon(&mut m, n + 1);
    if pivots.last() == Some(&n) {
        return LinearSolution::Inconsistent;
    }
    if pivots.len() < n {
        return LinearSolution::Underdetermined { rank: pivots.len() };
    }
    let mut x = vec![<Rational as Scalar>::zero(); n];
    for (r, &c) in pivots.iter().enumerate().rev() {
        let mut acc = m[r][n].clone();
        for k in c + 1..n {
            acc = acc.sub_mul(&m[r][k], &x[k]);
        }
        x[c] = acc.div(&m[r][c]);
    }
    LinearSolution::Unique(x)
}
