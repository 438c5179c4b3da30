//! Symbolic equations over requirements and their numbered linear form.

use std::collections::HashMap;
use std::fmt;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{int, Rational, Scalar};
use crate::model::Requirement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Data,
    Structural,
    Universal,
    /// Constraints added after encoding, e.g. hypotheses under test.
    Extra,
}

impl ConstraintKind {
    pub fn tag(self) -> &'static str {
        match self {
            ConstraintKind::Data => "data",
            ConstraintKind::Structural => "structural",
            ConstraintKind::Universal => "universal",
            ConstraintKind::Extra => "extra",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "data" => ConstraintKind::Data,
            "structural" => ConstraintKind::Structural,
            "universal" => ConstraintKind::Universal,
            "extra" => ConstraintKind::Extra,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Environment {
    Addition { n: u32 },
    Multiplication { n: u32, m: u32 },
    Generic,
}

/// Largest number of terms any generated equation carries: a full-adder
/// output plus its four truth-table rows.
pub const MAX_TERMS: usize = 5;

/// An equation `sum coef * P(requirement) = rhs` before unknowns are numbered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub kind: ConstraintKind,
    pub terms: ArrayVec<(i8, Requirement), MAX_TERMS>,
    pub rhs: i8,
}

impl Equation {
    pub fn new(kind: ConstraintKind, terms: &[(i8, Requirement)], rhs: i8) -> Self {
        Equation {
            kind,
            terms: terms.iter().copied().collect(),
            rhs,
        }
    }

    /// `P(lhs) - sum P(parts) = 0`.
    pub fn definition(kind: ConstraintKind, lhs: Requirement, parts: &[Requirement]) -> Self {
        let mut terms = ArrayVec::new();
        terms.push((1, lhs));
        for p in parts {
            terms.push((-1, *p));
        }
        Equation { kind, terms, rhs: 0 }
    }

    pub fn requirements(&self) -> impl Iterator<Item = Requirement> + '_ {
        self.terms.iter().map(|(_, r)| *r)
    }

    /// Left-hand requirement of a definition-shaped equation.
    pub fn lhs(&self) -> Requirement {
        self.terms[0].1
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, r)) in self.terms.iter().enumerate() {
            let sign = if *c < 0 { "-" } else if i > 0 { "+" } else { "" };
            if i > 0 {
                f.write_str(" ")?;
            }
            let mag = c.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}P{r}")?;
            } else {
                write!(f, "{sign}{mag}P{r}")?;
            }
        }
        write!(f, " = {}", self.rhs)
    }
}

/// A sparse linear equation over numbered unknowns.
///
/// Terms are sorted by unknown id, merged, and never hold a zero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub kind: ConstraintKind,
    pub terms: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(kind: ConstraintKind, mut terms: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        terms.sort_by_key(|(id, _)| *id);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(terms.len());
        for (id, c) in terms {
            match merged.last_mut() {
                Some((last, acc)) if *last == id => *acc += c,
                _ => merged.push((id, c)),
            }
        }
        merged.retain(|(_, c)| !Scalar::is_zero(c));
        LinearConstraint {
            kind,
            terms: merged,
            rhs,
        }
    }

    pub fn lhs_value<T: Scalar>(&self, point: &[T]) -> T {
        let mut acc = T::zero();
        for (id, c) in &self.terms {
            acc = acc.add(&T::from_rational(c).mul(&point[*id]));
        }
        acc
    }

    pub fn is_satisfied_by<T: Scalar>(&self, point: &[T]) -> bool {
        self.lhs_value(point).sub(&T::from_rational(&self.rhs)).is_zero()
    }
}

/// Counts of a system by role.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemCounts {
    pub unknowns: u64,
    pub positive_unknowns: u64,
    pub equations: u64,
    pub data: u64,
    pub structural: u64,
    pub universal: u64,
    pub extra: u64,
}

impl SystemCounts {
    pub(crate) fn bump(&mut self, kind: ConstraintKind) {
        self.equations += 1;
        match kind {
            ConstraintKind::Data => self.data += 1,
            ConstraintKind::Structural => self.structural += 1,
            ConstraintKind::Universal => self.universal += 1,
            ConstraintKind::Extra => self.extra += 1,
        }
    }
}

/// Unknown table plus constraint list.
///
/// Unknowns are numbered from 0 in order of first appearance. Encoded systems
/// label every unknown with its requirement; systems read from files may have
/// unlabeled unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSystem {
    pub env: Environment,
    labels: Vec<Option<Requirement>>,
    index: HashMap<Requirement, usize>,
    constraints: Vec<LinearConstraint>,
}

impl LpSystem {
    pub fn new(env: Environment) -> Self {
        LpSystem {
            env,
            labels: Vec::new(),
            index: HashMap::new(),
            constraints: Vec::new(),
        }
    }

    pub fn from_equations(env: Environment, equations: impl IntoIterator<Item = Equation>) -> Self {
        let mut sys = LpSystem::new(env);
        for eq in equations {
            sys.push_equation(&eq);
        }
        sys
    }

    pub fn num_unknowns(&self) -> usize {
        self.labels.len()
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn labels(&self) -> &[Option<Requirement>] {
        &self.labels
    }

    pub fn label(&self, id: usize) -> Option<Requirement> {
        self.labels.get(id).copied().flatten()
    }

    pub fn unknown_id(&self, r: &Requirement) -> Option<usize> {
        self.index.get(r).copied()
    }

    /// Id of a requirement, registering it if new.
    pub fn intern(&mut self, r: Requirement) -> usize {
        if let Some(id) = self.index.get(&r) {
            return *id;
        }
        let id = self.labels.len();
        self.labels.push(Some(r));
        self.index.insert(r, id);
        id
    }

    /// Appends an unknown, labeled or not. A label already in use is an error.
    pub fn add_unknown(&mut self, label: Option<Requirement>) -> Result<usize> {
        let id = self.labels.len();
        if let Some(r) = label {
            if self.index.contains_key(&r) {
                return Err(Error::parse(0, format!("requirement {r} labels two unknowns")));
            }
            self.index.insert(r, id);
        }
        self.labels.push(label);
        Ok(id)
    }

    pub(crate) fn set_label(&mut self, id: usize, r: Requirement) -> Result<()> {
        if id >= self.labels.len() {
            return Err(Error::range("unknown id", format!("{id} >= {}", self.labels.len())));
        }
        match self.index.get(&r) {
            Some(other) if *other != id => {
                return Err(Error::parse(0, format!("requirement {r} labels unknowns {other} and {id}")))
            }
            _ => {}
        }
        if let Some(old) = self.labels[id] {
            self.index.remove(&old);
        }
        self.labels[id] = Some(r);
        self.index.insert(r, id);
        Ok(())
    }

    pub fn push_equation(&mut self, eq: &Equation) {
        let terms = eq
            .terms
            .iter()
            .map(|(c, r)| (self.intern(*r), int(*c as i64)))
            .collect();
        self.constraints
            .push(LinearConstraint::new(eq.kind, terms, int(eq.rhs as i64)));
    }

    pub fn push(&mut self, constraint: LinearConstraint) -> Result<()> {
        if let Some((id, _)) = constraint.terms.iter().find(|(id, _)| *id >= self.labels.len()) {
            return Err(Error::range("unknown id", format!("{id} >= {}", self.labels.len())));
        }
        self.constraints.push(constraint);
        Ok(())
    }

    /// Adds `P(r) = value` as an extra constraint, registering `r` if needed.
    pub fn fix(&mut self, r: Requirement, value: Rational) {
        let id = self.intern(r);
        self.constraints.push(LinearConstraint::new(
            ConstraintKind::Extra,
            vec![(id, int(1))],
            value,
        ));
    }

    pub fn counts(&self) -> SystemCounts {
        let mut c = SystemCounts {
            unknowns: self.labels.len() as u64,
            positive_unknowns: self
                .labels
                .iter()
                .filter(|l| l.is_some_and(|r| r.is_positive()))
                .count() as u64,
            ..Default::default()
        };
        for k in &self.constraints {
            c.bump(k.kind);
        }
        c
    }

    pub fn is_satisfied_by<T: Scalar>(&self, point: &[T]) -> bool {
        point.len() == self.num_unknowns()
            && point.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| c.is_satisfied_by(point))
    }

    /// Indices of constraints the point violates.
    pub fn violations<T: Scalar>(&self, point: &[T]) -> Vec<usize> {
        self.constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_satisfied_by(point))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn max_row_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.terms.len()).max().unwrap_or(0)
    }

    pub fn average_row_nonzeros(&self) -> f64 {
        if self.constraints.is_empty() {
            return 0.0;
        }
        let total: usize = self.constraints.iter().map(|c| c.terms.len()).sum();
        total as f64 / self.constraints.len() as f64
    }

    /// Occurrences of each unknown across all constraints.
    pub fn column_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_unknowns()];
        for c in &self.constraints {
            for (id, _) in &c.terms {
                counts[*id] += 1;
            }
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(s: &str) -> Requirement {
        s.parse().unwrap()
    }

    #[test]
    fn linear_constraint_merges_and_drops_zeros() {
        let c = LinearConstraint::new(
            ConstraintKind::Extra,
            vec![(3, int(1)), (1, int(2)), (3, int(-1)), (1, int(1))],
            int(0),
        );
        assert_eq!(c.terms, vec![(1, int(3))]);
    }

    #[test]
    fn unknowns_numbered_by_first_appearance() {
        let eqs = [
            Equation::new(ConstraintKind::Data, &[(1, req("(1)"))], 0),
            Equation::definition(
                ConstraintKind::Structural,
                req("(3)"),
                &[req("(-1;2)"), req("(1;-2)")],
            ),
            Equation::new(ConstraintKind::Universal, &[(1, req("(1)")), (1, req("(-1)"))], 1),
        ];
        let sys = LpSystem::from_equations(Environment::Generic, eqs);
        let labels: Vec<String> = sys.labels().iter().map(|l| l.unwrap().to_string()).collect();
        assert_eq!(labels, ["(1)", "(3)", "(-1;2)", "(1;-2)", "(-1)"]);
        let counts = sys.counts();
        assert_eq!((counts.data, counts.structural, counts.universal), (1, 1, 1));
        assert_eq!(counts.positive_unknowns, 2);
        assert_eq!(sys.max_row_nonzeros(), 3);
    }

    #[test]
    fn satisfaction_is_exact() {
        let mut sys = LpSystem::new(Environment::Generic);
        sys.push_equation(&Equation::new(
            ConstraintKind::Universal,
            &[(1, req("(1)")), (1, req("(-1)"))],
            1,
        ));
        assert!(sys.is_satisfied_by(&[crate::lp::rational(1, 3), crate::lp::rational(2, 3)]));
        assert!(!sys.is_satisfied_by(&[crate::lp::rational(1, 3), crate::lp::rational(1, 3)]));
        assert!(!sys.is_satisfied_by(&[int(2), int(-1)]));
        assert_eq!(sys.violations(&[int(0), int(0)]), vec![0]);
    }

    #[test]
    fn equation_display() {
        let eq = Equation::definition(ConstraintKind::Structural, req("(4)"), &[req("(1;2)")]);
        assert_eq!(eq.to_string(), "P(4) -P(1;2) = 0");
    }
}
