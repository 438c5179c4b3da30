//! Two-phase tableau simplex over `A x = b, x >= 0`.
//!
//! Phase I keeps its artificial columns in the reduced-cost row so that an
//! infeasible system yields a Farkas certificate directly from the final
//! reduced costs.

use super::sparse::{axpy, get, scale, SparseRow};
use super::{Objective, Rational, Scalar, FLOAT_TOLERANCE};
use crate::error::{Error, Result};
use crate::system::LpSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pricing {
    /// Smallest-index entering and leaving columns; never cycles.
    #[default]
    Bland,
    /// Largest reduced cost, falling back to Bland after a run of degenerate
    /// pivots.
    Dantzig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimplexOptions {
    pub pricing: Pricing,
    pub degenerate_limit: usize,
    pub max_pivots: usize,
    /// The floating-point tableau is recomputed from the original rows every
    /// this many pivots. Ignored in exact arithmetic.
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pricing: Pricing::Bland,
            degenerate_limit: 25,
            max_pivots: usize::MAX,
            refactor_every: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpStatus<T> {
    Feasible {
        point: Vec<T>,
        objective: Option<T>,
        basis: Vec<usize>,
    },
    /// `y` with `y^T A <= 0` and `y^T b > 0`, one entry per constraint.
    Infeasible { certificate: Vec<T> },
    /// The objective grows without bound along the given entering column.
    Unbounded { column: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome<T> {
    pub status: LpStatus<T>,
    pub pivots: usize,
}

impl<T> LpOutcome<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, LpStatus::Feasible { .. })
    }

    pub fn point(&self) -> Option<&[T]> {
        match &self.status {
            LpStatus::Feasible { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn objective(&self) -> Option<&T> {
        match &self.status {
            LpStatus::Feasible { objective, .. } => objective.as_ref(),
            _ => None,
        }
    }
}

enum RunEnd {
    Optimal,
    Unbounded(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Tableau<T> {
    pub(crate) nstruct: usize,
    pub(crate) ncols: usize,
    pub(crate) rows: Vec<SparseRow<T>>,
    pub(crate) rhs: Vec<T>,
    pub(crate) basis: Vec<usize>,
    /// Rows and right-hand sides as built, for reinversion.
    source: Vec<SparseRow<T>>,
    source_rhs: Vec<T>,
    cost: Vec<T>,
    d: Vec<T>,
    z: T,
    pub(crate) pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    /// Rows normalized to a nonnegative right-hand side, with one artificial
    /// column per row forming the starting basis. Returns the row signs.
    fn with_artificials(sys: &LpSystem) -> (Self, Vec<bool>) {
        let nstruct = sys.num_unknowns();
        let m = sys.constraints().len();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        for (r, c) in sys.constraints().iter().enumerate() {
            let b = T::from_rational(&c.rhs);
            let flip = b.is_negative();
            let mut row: SparseRow<T> = c
                .terms
                .iter()
                .map(|(id, v)| {
                    let v = T::from_rational(v);
                    (*id, if flip { v.neg() } else { v })
                })
                .collect();
            row.push((nstruct + r, T::one()));
            rows.push(row);
            rhs.push(if flip { b.neg() } else { b });
            flipped.push(flip);
        }
        let ncols = nstruct + m;
        let mut cost = vec![T::zero(); ncols];
        for c in &mut cost[nstruct..] {
            *c = T::one().neg();
        }
        let mut t = Tableau {
            nstruct,
            ncols,
            source: if T::EXACT { Vec::new() } else { rows.clone() },
            source_rhs: if T::EXACT { Vec::new() } else { rhs.clone() },
            rows,
            rhs,
            basis: (nstruct..ncols).collect(),
            cost: Vec::new(),
            d: Vec::new(),
            z: T::zero(),
            pivots: 0,
        };
        t.set_cost(cost);
        (t, flipped)
    }

    fn set_cost(&mut self, cost: Vec<T>) {
        let mut d = cost.clone();
        let mut z = T::zero();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in row {
                d[*j] = d[*j].sub_mul(cb, v);
            }
            z = z.add(&cb.mul(&self.rhs[i]));
        }
        self.cost = cost;
        self.d = d;
        self.z = z;
    }

    pub(crate) fn pivot(&mut self, r: usize, j: usize) {
        let piv = get(&self.rows[r], j).expect("pivot entry present").clone();
        scale(&mut self.rows[r], &piv);
        self.rhs[r] = self.rhs[r].div(&piv);
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = get(&self.rows[i], j).cloned() {
                self.rows[i] = axpy(&self.rows[i], &f, &pivot_row);
                self.rhs[i] = self.rhs[i].sub_mul(&f, &self.rhs[r]);
                if !T::EXACT && self.rhs[i].is_zero() {
                    self.rhs[i] = T::zero();
                }
            }
        }
        let dj = self.d[j].clone();
        if !dj.is_zero() {
            for (c, v) in &pivot_row {
                self.d[*c] = self.d[*c].sub_mul(&dj, v);
            }
            self.z = self.z.add(&dj.mul(&self.rhs[r]));
        }
        self.d[j] = T::zero();
        self.rows[r] = pivot_row;
        self.basis[r] = j;
        self.pivots += 1;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        if bland {
            return (0..self.ncols).find(|&j| self.d[j].is_improving());
        }
        let mut best: Option<usize> = None;
        for j in 0..self.ncols {
            if self.d[j].is_improving()
                && best.is_none_or(|b| self.d[j].compare(&self.d[b]).is_gt())
            {
                best = Some(j);
            }
        }
        best
    }

    /// Rows attaining the minimum ratio for entering column `j`.
    pub(crate) fn ratio_rows(&self, j: usize) -> Vec<usize> {
        let mut best: Option<T> = None;
        let mut rows = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let Some(a) = get(row, j) else { continue };
            if !a.is_pivot_candidate() {
                continue;
            }
            let ratio = if self.rhs[i].is_zero() { T::zero() } else { self.rhs[i].div(a) };
            match best.as_ref().map(|b| ratio.compare(b)) {
                None | Some(std::cmp::Ordering::Less) => {
                    best = Some(ratio);
                    rows.clear();
                    rows.push(i);
                }
                Some(std::cmp::Ordering::Equal) => rows.push(i),
                _ => {}
            }
        }
        rows
    }

    fn leaving(&self, j: usize, bland: bool) -> Option<usize> {
        if T::EXACT || bland {
            return self.ratio_rows(j).into_iter().min_by_key(|&i| self.basis[i]);
        }
        // Harris two-pass test: relax the ratios by the feasibility tolerance,
        // then take the largest pivot among the rows within the relaxed bound.
        let candidates: Vec<(usize, f64, f64)> = self
            .rows
            .iter()
            .enumerate()
            .filter_map(|(i, row)| {
                let a = get(row, j)?;
                a.is_pivot_candidate()
                    .then(|| (i, a.to_f64(), self.rhs[i].to_f64().max(0.0)))
            })
            .collect();
        let bound = candidates
            .iter()
            .map(|&(_, a, b)| (b + FLOAT_TOLERANCE) / a)
            .fold(f64::INFINITY, f64::min);
        candidates
            .into_iter()
            .filter(|&(_, a, b)| b / a <= bound)
            .max_by(|x, y| x.1.total_cmp(&y.1).then(self.basis[y.0].cmp(&self.basis[x.0])))
            .map(|(i, _, _)| i)
    }

    fn run(&mut self, options: &SimplexOptions) -> Result<RunEnd> {
        let mut streak = 0usize;
        loop {
            if self.pivots >= options.max_pivots {
                return Err(Error::EncodingAnomaly(format!(
                    "simplex exceeded {} pivots",
                    options.max_pivots
                )));
            }
            let bland = options.pricing == Pricing::Bland || streak >= options.degenerate_limit;
            let Some(j) = self.entering(bland) else {
                return Ok(RunEnd::Optimal);
            };
            let Some(r) = self.leaving(j, bland) else {
                return Ok(RunEnd::Unbounded(j));
            };
            let degenerate = self.rhs[r].is_zero();
            self.pivot(r, j);
            streak = if degenerate { streak + 1 } else { 0 };
            if !T::EXACT && options.refactor_every > 0 && self.pivots.is_multiple_of(options.refactor_every) {
                self.reinvert();
            }
        }
    }

    /// Pivots zero-valued artificials out of the basis, drops rows that are
    /// combinations of others, and removes the artificial columns.
    fn finish_phase_one(&mut self) {
        let mut keep = vec![true; self.rows.len()];
        for i in 0..self.rows.len() {
            if self.basis[i] < self.nstruct {
                continue;
            }
            let entering = self.rows[i]
                .iter()
                .filter(|(c, _)| *c < self.nstruct)
                .max_by(|a, b| a.1.to_f64().abs().total_cmp(&b.1.to_f64().abs()))
                .map(|(c, _)| *c);
            match entering {
                Some(j) => self.pivot(i, j),
                None => keep[i] = false,
            }
        }
        let mut k = 0;
        self.rows.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        let mut k = 0;
        self.rhs.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        let mut k = 0;
        self.basis.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        if !T::EXACT {
            let mut k = 0;
            self.source.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            let mut k = 0;
            self.source_rhs.retain(|_| {
                k += 1;
                keep[k - 1]
            });
        }
        let n = self.nstruct;
        for row in self.rows.iter_mut().chain(self.source.iter_mut()) {
            row.retain(|(c, _)| *c < n);
        }
        for v in &mut self.rhs {
            if v.is_zero() {
                *v = T::zero();
            }
        }
        self.ncols = n;
        self.cost.truncate(n);
        self.d.truncate(n);
    }

    /// Recomputes `B^-1 A`, `B^-1 b` and the reduced costs from the source
    /// rows by Gauss-Jordan elimination with partial pivoting, discarding the
    /// rounding error accumulated by successive pivots.
    fn reinvert(&mut self) {
        let m = self.rows.len();
        let position: std::collections::HashMap<usize, usize> =
            self.basis.iter().enumerate().map(|(k, &j)| (j, k)).collect();
        let mut inv = vec![vec![T::zero(); 2 * m]; m];
        for (i, row) in self.source.iter().enumerate() {
            for (j, v) in row {
                if let Some(&k) = position.get(j) {
                    inv[i][k] = v.clone();
                }
            }
            inv[i][m + i] = T::one();
        }
        for k in 0..m {
            let Some(p) = (k..m).max_by(|&a, &b| inv[a][k].to_f64().abs().total_cmp(&inv[b][k].to_f64().abs())) else {
                return;
            };
            if inv[p][k].is_zero() {
                return;
            }
            inv.swap(k, p);
            let piv = inv[k][k].clone();
            for v in inv[k].iter_mut() {
                *v = v.div(&piv);
            }
            let pivot_row = inv[k].clone();
            for (i, row) in inv.iter_mut().enumerate() {
                let f = row[k].clone();
                if i == k || f.is_zero() {
                    continue;
                }
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v = v.sub_mul(&f, pv);
                }
            }
        }
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for inv_row in &inv {
            let mut dense = vec![T::zero(); self.ncols];
            let mut b = T::zero();
            for (i, w) in inv_row[m..].iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                for (j, v) in &self.source[i] {
                    dense[*j] = dense[*j].add(&w.mul(v));
                }
                b = b.add(&w.mul(&self.source_rhs[i]));
            }
            rows.push(dense.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect());
            rhs.push(if b.is_zero() { T::zero() } else { b });
        }
        self.rows = rows;
        self.rhs = rhs;
        let cost = std::mem::take(&mut self.cost);
        self.set_cost(cost);
    }

    pub(crate) fn point(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.nstruct];
        for (i, &j) in self.basis.iter().enumerate() {
            x[j] = self.rhs[i].clone();
        }
        x
    }
}

/// A feasible basis kept across objectives.
///
/// Phase I runs once at construction; every `maximize` starts from the
/// previous optimal basis.
#[derive(Debug, Clone)]
pub struct LpSolver<T> {
    tableau: Option<Tableau<T>>,
    certificate: Option<Vec<T>>,
    phase_one_pivots: usize,
    options: SimplexOptions,
}

impl<T: Scalar> LpSolver<T> {
    pub fn new(sys: &LpSystem, options: SimplexOptions) -> Result<Self> {
        let (mut t, flipped) = Tableau::<T>::with_artificials(sys);
        match t.run(&options)? {
            RunEnd::Optimal => {}
            RunEnd::Unbounded(_) => unreachable!("phase I objective is bounded by zero"),
        }
        let pivots = t.pivots;
        if t.z.is_negative() {
            let certificate = (0..flipped.len())
                .map(|r| {
                    let w = T::one().add(&t.d[t.nstruct + r]);
                    if flipped[r] {
                        w.neg()
                    } else {
                        w
                    }
                })
                .collect();
            return Ok(LpSolver {
                tableau: None,
                certificate: Some(certificate),
                phase_one_pivots: pivots,
                options,
            });
        }
        t.finish_phase_one();
        Ok(LpSolver {
            tableau: Some(t),
            certificate: None,
            phase_one_pivots: pivots,
            options,
        })
    }

    pub fn is_feasible(&self) -> bool {
        self.tableau.is_some()
    }

    pub fn certificate(&self) -> Option<&[T]> {
        self.certificate.as_deref()
    }

    pub fn phase_one_pivots(&self) -> usize {
        self.phase_one_pivots
    }

    pub fn total_pivots(&self) -> usize {
        self.tableau.as_ref().map_or(self.phase_one_pivots, |t| t.pivots)
    }

    pub(crate) fn tableau(&self) -> Option<&Tableau<T>> {
        self.tableau.as_ref()
    }

    /// The phase I point, or the certificate.
    pub fn feasibility(&self) -> LpOutcome<T> {
        match (&self.tableau, &self.certificate) {
            (Some(t), _) => LpOutcome {
                status: LpStatus::Feasible {
                    point: t.point(),
                    objective: None,
                    basis: t.basis.clone(),
                },
                pivots: t.pivots,
            },
            (None, Some(c)) => LpOutcome {
                status: LpStatus::Infeasible {
                    certificate: c.clone(),
                },
                pivots: self.phase_one_pivots,
            },
            (None, None) => unreachable!("solver holds a basis or a certificate"),
        }
    }

    pub fn maximize(&mut self, objective: &Objective) -> Result<LpOutcome<T>> {
        let Some(t) = self.tableau.as_mut() else {
            return Ok(self.feasibility());
        };
        let mut cost = vec![T::zero(); t.nstruct];
        for (id, c) in &objective.terms {
            if *id >= t.nstruct {
                return Err(Error::range("objective unknown", format!("{id} >= {}", t.nstruct)));
            }
            cost[*id] = cost[*id].add(&T::from_rational(c));
        }
        t.set_cost(cost);
        let start = t.pivots;
        let status = match t.run(&self.options)? {
            RunEnd::Optimal => LpStatus::Feasible {
                point: t.point(),
                objective: Some(t.z.add(&T::from_rational(&objective.constant))),
                basis: t.basis.clone(),
            },
            RunEnd::Unbounded(column) => LpStatus::Unbounded { column },
        };
        Ok(LpOutcome {
            status,
            pivots: t.pivots - start,
        })
    }
}

/// Phase I alone with Bland pricing.
pub fn solve_feasibility<T: Scalar>(sys: &LpSystem) -> Result<LpOutcome<T>> {
    Ok(LpSolver::<T>::new(sys, SimplexOptions::default())?.feasibility())
}

/// Maximizes over the system. Partial probabilities are bounded, so an
/// unbounded objective is reported as an encoding anomaly.
pub fn maximize<T: Scalar>(sys: &LpSystem, objective: &Objective) -> Result<LpOutcome<T>> {
    let mut solver = LpSolver::<T>::new(sys, SimplexOptions::default())?;
    let out = solver.maximize(objective)?;
    if let LpStatus::Unbounded { column } = out.status {
        return Err(Error::EncodingAnomaly(format!(
            "objective unbounded along unknown {column}"
        )));
    }
    Ok(out)
}

/// Checks `y^T A <= 0` column by column and `y^T b > 0` in exact arithmetic.
pub fn verify_certificate(sys: &LpSystem, y: &[Rational]) -> bool {
    if y.len() != sys.constraints().len() {
        return false;
    }
    let mut col = vec![<Rational as Scalar>::zero(); sys.num_unknowns()];
    let mut yb = <Rational as Scalar>::zero();
    for (c, w) in sys.constraints().iter().zip(y) {
        if Scalar::is_zero(w) {
            continue;
        }
        for (id, v) in &c.terms {
            col[*id] += w * v;
        }
        yb += w * &c.rhs;
    }
    Scalar::is_positive(&yb) && col.iter().all(|v| !Scalar::is_positive(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{int, rational};
    use crate::system::{ConstraintKind, Environment, LinearConstraint};

    fn system(rows: &[(&[(usize, i64)], i64)], n: usize) -> LpSystem {
        let mut sys = LpSystem::new(Environment::Generic);
        for _ in 0..n {
            sys.add_unknown(None).unwrap();
        }
        for (terms, rhs) in rows {
            sys.push(LinearConstraint::new(
                ConstraintKind::Extra,
                terms.iter().map(|(i, c)| (*i, int(*c))).collect(),
                int(*rhs),
            ))
            .unwrap();
        }
        sys
    }

    #[test]
    fn empty_system_is_feasible_at_origin() {
        let sys = LpSystem::new(Environment::Generic);
        let out = solve_feasibility::<Rational>(&sys).unwrap();
        assert!(out.is_feasible());
        assert!(out.point().unwrap().is_empty());
    }

    #[test]
    fn normalization_maximum() {
        let sys = system(&[(&[(0, 1), (1, 1)], 1)], 2);
        let out = maximize::<Rational>(&sys, &Objective::single(0)).unwrap();
        assert_eq!(out.objective(), Some(&int(1)));
        assert!(sys.is_satisfied_by(out.point().unwrap()));
    }

    #[test]
    fn infeasible_with_certificate() {
        // x0 + x1 = 1, x0 + x1 = 2
        let sys = system(&[(&[(0, 1), (1, 1)], 1), (&[(0, 1), (1, 1)], 2)], 2);
        let out = solve_feasibility::<Rational>(&sys).unwrap();
        let LpStatus::Infeasible { certificate } = out.status else {
            panic!("expected infeasible")
        };
        assert!(verify_certificate(&sys, &certificate));
        // negative right-hand side: x0 = -1
        let sys = system(&[(&[(0, 1)], -1)], 1);
        let LpStatus::Infeasible { certificate } = solve_feasibility::<Rational>(&sys).unwrap().status
        else {
            panic!("expected infeasible")
        };
        assert!(verify_certificate(&sys, &certificate));
        assert!(!verify_certificate(&sys, &[int(1)]));
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let sys = system(
            &[(&[(0, 1), (1, 1)], 1), (&[(0, 2), (1, 2)], 2), (&[(0, 1), (1, -1)], 0)],
            2,
        );
        let out = solve_feasibility::<Rational>(&sys).unwrap();
        assert_eq!(out.point().unwrap(), &[rational(1, 2), rational(1, 2)]);
    }

    #[test]
    fn unbounded_is_anomaly() {
        let sys = system(&[(&[(0, 1), (1, -1)], 0)], 2);
        assert!(matches!(
            maximize::<Rational>(&sys, &Objective::single(0)),
            Err(Error::EncodingAnomaly(_))
        ));
    }

    #[test]
    fn warm_start_across_objectives() {
        // x0 + x1 + x2 = 1
        let sys = system(&[(&[(0, 1), (1, 1), (2, 1)], 1)], 3);
        for pricing in [Pricing::Bland, Pricing::Dantzig] {
            let mut s = LpSolver::<Rational>::new(
                &sys,
                SimplexOptions {
                    pricing,
                    ..Default::default()
                },
            )
            .unwrap();
            for k in 0..3 {
                let out = s.maximize(&Objective::single(k)).unwrap();
                assert_eq!(out.objective(), Some(&int(1)));
                assert_eq!(out.point().unwrap()[k], int(1));
            }
        }
        let mut s = LpSolver::<f64>::new(&sys, SimplexOptions::default()).unwrap();
        let out = s
            .maximize(&Objective::new(vec![(0, int(1)), (1, int(2))]))
            .unwrap();
        assert!((out.objective().unwrap() - 2.0).abs() < 1e-12);
    }
}
