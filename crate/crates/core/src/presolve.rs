//! Product-rule propagation.
//!
//! Fixed unknowns are found from constraints with a single free term. A
//! requirement fixed to 0 forces every requirement containing it to 0, and a
//! literal fixed to 1 makes `P(lit ; rest)` an alias of `P(rest)`. Aliases are
//! kept in a union-find over unknown ids rather than added as equations.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use crate::lp::{int, rank, Objective, Rational, RankMethod, Scalar};
use crate::model::{Literal, Requirement};
use crate::system::{LinearConstraint, LpSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum PresolveStep {
    /// A constraint left with one free term.
    Forced {
        unknown: usize,
        constraint: usize,
        value: String,
    },
    /// Contained in a requirement fixed to 0.
    ZeroSuperset { unknown: usize, source: usize },
    /// `P(lit ; rest) = P(rest)` once `P(lit) = 1`.
    Alias {
        unknown: usize,
        target: usize,
        literal: i32,
    },
}

/// Everything presolve decided, in the order it decided it. Replaying it with
/// [`apply`] on the original system reproduces the reduced system.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PresolveTrace {
    /// Original unknown id and its value; every member of a fixed class is
    /// listed.
    pub fixed: Vec<(usize, Rational)>,
    /// `(unknown, replacement)` pairs merged into one class.
    pub substitutions: Vec<(usize, usize)>,
    pub eliminated_constraints: usize,
    pub steps: Vec<PresolveStep>,
}

impl PresolveTrace {
    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty() && self.substitutions.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "fixed": self.fixed.iter().map(|(id, v)| (id, v.to_string())).collect::<Vec<_>>(),
            "substitutions": self.substitutions,
            "eliminated_constraints": self.eliminated_constraints,
            "steps": self.steps,
        })
    }
}

/// Where an original unknown went.
#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    Fixed(Rational),
    Free(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub system: LpSystem,
    /// One entry per original unknown.
    pub map: Vec<Slot>,
    /// Original id standing for each reduced unknown.
    pub representatives: Vec<usize>,
}

impl Reduction {
    /// Original-space point from a reduced-space point.
    pub fn expand<T: Scalar>(&self, reduced: &[T]) -> Vec<T> {
        self.map
            .iter()
            .map(|s| match s {
                Slot::Fixed(v) => T::from_rational(v),
                Slot::Free(k) => reduced[*k].clone(),
            })
            .collect()
    }

    pub fn restrict<T: Scalar>(&self, original: &[T]) -> Vec<T> {
        self.representatives.iter().map(|&id| original[id].clone()).collect()
    }

    pub fn fixed_count(&self) -> usize {
        self.map.iter().filter(|s| matches!(s, Slot::Fixed(_))).count()
    }

    /// Rank of the reduced system plus one per fixed singleton unknown: the
    /// rank of the system over single-literal unknowns once multi-literal
    /// unknowns are eliminated.
    pub fn determined_rank(&self, original: &LpSystem) -> usize {
        let fixed_singletons = self
            .map
            .iter()
            .enumerate()
            .filter(|(id, s)| {
                matches!(s, Slot::Fixed(_)) && original.label(*id).is_some_and(|r| r.len() == 1)
            })
            .count();
        rank(&self.system, RankMethod::default()) + fixed_singletons
    }

    /// The same objective over reduced unknowns; fixed unknowns move into the
    /// constant.
    pub fn restrict_objective(&self, objective: &Objective) -> Objective {
        let mut terms: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut constant = objective.constant.clone();
        for (id, c) in &objective.terms {
            match &self.map[*id] {
                Slot::Fixed(v) => constant += c * v,
                Slot::Free(k) => *terms.entry(*k).or_insert_with(|| int(0)) += c,
            }
        }
        let mut out = Objective::new(terms.into_iter().filter(|(_, c)| !Scalar::is_zero(c)).collect());
        out.constant = constant;
        out
    }

    /// Value of a requirement under a reduced-space point, if it is an unknown
    /// of the original system.
    pub fn value_of<T: Scalar>(&self, original: &LpSystem, r: &Requirement, reduced: &[T]) -> Option<T> {
        let id = original.unknown_id(r)?;
        Some(match &self.map[id] {
            Slot::Fixed(v) => T::from_rational(v),
            Slot::Free(k) => reduced[*k].clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PresolveOutcome {
    Reduced {
        reduction: Reduction,
        trace: PresolveTrace,
    },
    /// Propagation reached a contradiction: the system has no solution.
    ProvedInfeasible {
        trace: PresolveTrace,
        conflict: String,
    },
}

impl PresolveOutcome {
    pub fn trace(&self) -> &PresolveTrace {
        match self {
            PresolveOutcome::Reduced { trace, .. } | PresolveOutcome::ProvedInfeasible { trace, .. } => trace,
        }
    }

    pub fn reduction(&self) -> Option<&Reduction> {
        match self {
            PresolveOutcome::Reduced { reduction, .. } => Some(reduction),
            _ => None,
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
    weight: Vec<(usize, usize)>,
}

impl UnionFind {
    fn new(sys: &LpSystem) -> Self {
        let weight = (0..sys.num_unknowns())
            .map(|id| (sys.label(id).map_or(usize::MAX, |r| r.len()), id))
            .collect();
        UnionFind {
            parent: (0..sys.num_unknowns()).collect(),
            weight,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Merges two roots; the one with fewer literals, then smaller id, stays
    /// representative. Returns `(kept, absorbed)`.
    fn union_roots(&mut self, a: usize, b: usize) -> (usize, usize) {
        let (keep, drop) = if self.weight[a] <= self.weight[b] { (a, b) } else { (b, a) };
        self.parent[drop] = keep;
        (keep, drop)
    }
}

struct Propagator<'a> {
    sys: &'a LpSystem,
    uf: UnionFind,
    members: Vec<Vec<usize>>,
    value: Vec<Option<Rational>>,
    occurrences: Vec<Vec<usize>>,
    by_literal: HashMap<Literal, Vec<usize>>,
    constraint_queue: VecDeque<usize>,
    queued: Vec<bool>,
    events: VecDeque<usize>,
    trace: PresolveTrace,
}

type Conflict = String;

impl<'a> Propagator<'a> {
    fn new(sys: &'a LpSystem) -> Self {
        let n = sys.num_unknowns();
        let mut occurrences = vec![Vec::new(); n];
        for (i, c) in sys.constraints().iter().enumerate() {
            for (id, _) in &c.terms {
                occurrences[*id].push(i);
            }
        }
        let mut by_literal: HashMap<Literal, Vec<usize>> = HashMap::new();
        for (id, label) in sys.labels().iter().enumerate() {
            if let Some(r) = label {
                for l in r.literals() {
                    by_literal.entry(*l).or_default().push(id);
                }
            }
        }
        Propagator {
            sys,
            uf: UnionFind::new(sys),
            members: (0..n).map(|i| vec![i]).collect(),
            value: vec![None; n],
            occurrences,
            by_literal,
            constraint_queue: (0..sys.constraints().len()).collect(),
            queued: vec![true; sys.constraints().len()],
            events: VecDeque::new(),
            trace: PresolveTrace::default(),
        }
    }

    fn enqueue_class(&mut self, root: usize) {
        for &m in &self.members[root] {
            for &c in &self.occurrences[m] {
                if !self.queued[c] {
                    self.queued[c] = true;
                    self.constraint_queue.push_back(c);
                }
            }
        }
    }

    fn fix(&mut self, id: usize, v: Rational, step: PresolveStep) -> Result<(), Conflict> {
        let root = self.uf.find(id);
        if let Some(w) = &self.value[root] {
            if *w != v {
                return Err(format!("unknown {id} is forced to both {w} and {v}"));
            }
            return Ok(());
        }
        if v.is_negative() || v > int(1) {
            return Err(format!(
                "unknown {id}{} is forced to {v}, outside [0, 1]",
                self.label_text(id)
            ));
        }
        self.trace.steps.push(step);
        self.value[root] = Some(v.clone());
        for &m in &self.members[root] {
            self.trace.fixed.push((m, v.clone()));
            self.events.push_back(m);
        }
        self.enqueue_class(root);
        Ok(())
    }

    fn alias(&mut self, id: usize, target: usize, literal: Literal) -> Result<(), Conflict> {
        let (ra, rb) = (self.uf.find(id), self.uf.find(target));
        if ra == rb {
            return Ok(());
        }
        let (va, vb) = (self.value[ra].clone(), self.value[rb].clone());
        if let (Some(x), Some(y)) = (&va, &vb) {
            if x != y {
                return Err(format!(
                    "unknown {id}{} equals unknown {target}{} but they are fixed to {x} and {y}",
                    self.label_text(id),
                    self.label_text(target)
                ));
            }
        }
        self.trace.steps.push(PresolveStep::Alias {
            unknown: id,
            target,
            literal: literal.signed(),
        });
        self.trace.substitutions.push((id, target));
        let (keep, drop) = self.uf.union_roots(ra, rb);
        let newly_fixed: Vec<usize> = match (&va, &vb) {
            (Some(_), None) => self.members[rb].clone(),
            (None, Some(_)) => self.members[ra].clone(),
            _ => Vec::new(),
        };
        let merged = va.or(vb);
        let absorbed = std::mem::take(&mut self.members[drop]);
        self.members[keep].extend(absorbed);
        self.value[drop] = None;
        self.value[keep] = merged.clone();
        if let Some(v) = merged {
            for m in newly_fixed {
                self.trace.fixed.push((m, v.clone()));
                self.events.push_back(m);
            }
        }
        self.enqueue_class(keep);
        Ok(())
    }

    fn label_text(&self, id: usize) -> String {
        self.sys.label(id).map(|r| format!(" {r}")).unwrap_or_default()
    }

    fn product_rules(&mut self, id: usize) -> Result<(), Conflict> {
        let Some(r) = self.sys.label(id) else {
            return Ok(());
        };
        let root = self.uf.find(id);
        let Some(v) = self.value[root].clone() else {
            return Ok(());
        };
        let first = r.literals()[0];
        let holders = self.by_literal.get(&first).cloned().unwrap_or_default();
        if Scalar::is_zero(&v) {
            for w in holders {
                if w != id && self.sys.label(w).is_some_and(|s| s.implies(&r)) {
                    self.fix(w, int(0), PresolveStep::ZeroSuperset { unknown: w, source: id })?;
                }
            }
        } else if v == int(1) && r.len() == 1 {
            for w in holders {
                let Some(target) = self.sys.label(w).and_then(|s| s.without(first)) else {
                    continue;
                };
                if let Some(t) = self.sys.unknown_id(&target) {
                    self.alias(w, t, first)?;
                }
            }
        }
        Ok(())
    }

    fn process_constraint(&mut self, ci: usize) -> Result<(), Conflict> {
        let c = &self.sys.constraints()[ci];
        let mut free: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut rhs = c.rhs.clone();
        for (id, coef) in &c.terms {
            let root = self.uf.find(*id);
            match &self.value[root] {
                Some(v) => rhs -= coef * v,
                None => *free.entry(root).or_insert_with(|| int(0)) += coef,
            }
        }
        free.retain(|_, c| !Scalar::is_zero(c));
        match free.len() {
            0 if !Scalar::is_zero(&rhs) => Err(format!("constraint {ci} reduces to 0 = {rhs}")),
            1 => {
                let (root, a) = free.into_iter().next().expect("one term");
                let v = rhs / a;
                self.fix(
                    root,
                    v.clone(),
                    PresolveStep::Forced {
                        unknown: root,
                        constraint: ci,
                        value: v.to_string(),
                    },
                )
            }
            _ => Ok(()),
        }
    }

    fn run(&mut self) -> Result<(), Conflict> {
        loop {
            if let Some(id) = self.events.pop_front() {
                self.product_rules(id)?;
                continue;
            }
            let Some(ci) = self.constraint_queue.pop_front() else {
                return Ok(());
            };
            self.queued[ci] = false;
            self.process_constraint(ci)?;
        }
    }
}

/// Propagates to a fixpoint and returns the reduced system, or a proof that
/// no solution exists.
pub fn presolve(sys: &LpSystem) -> PresolveOutcome {
    let mut p = Propagator::new(sys);
    match p.run() {
        Ok(()) => {
            let mut trace = p.trace;
            let reduction = apply(&trace, sys);
            trace.eliminated_constraints = sys.constraints().len() - reduction.system.constraints().len();
            PresolveOutcome::Reduced { reduction, trace }
        }
        Err(conflict) => PresolveOutcome::ProvedInfeasible {
            trace: p.trace,
            conflict,
        },
    }
}

/// Replays a trace on the original system.
pub fn apply(trace: &PresolveTrace, sys: &LpSystem) -> Reduction {
    let n = sys.num_unknowns();
    let mut uf = UnionFind::new(sys);
    for &(a, b) in &trace.substitutions {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra != rb {
            uf.union_roots(ra, rb);
        }
    }
    let mut fixed: Vec<Option<Rational>> = vec![None; n];
    for (id, v) in &trace.fixed {
        fixed[*id] = Some(v.clone());
    }
    let roots: Vec<usize> = (0..n).map(|id| uf.find(id)).collect();
    let root_value: HashMap<usize, Rational> = (0..n)
        .filter_map(|id| fixed[id].clone().map(|v| (roots[id], v)))
        .collect();

    let mut reduced_id: HashMap<usize, usize> = HashMap::new();
    let mut representatives = Vec::new();
    let mut rewritten = Vec::new();
    for c in sys.constraints() {
        let mut rhs = c.rhs.clone();
        let mut terms = Vec::new();
        for (id, coef) in &c.terms {
            let root = roots[*id];
            match root_value.get(&root) {
                Some(v) => rhs -= coef * v,
                None => {
                    let k = *reduced_id.entry(root).or_insert_with(|| {
                        representatives.push(root);
                        representatives.len() - 1
                    });
                    terms.push((k, coef.clone()));
                }
            }
        }
        let lc = LinearConstraint::new(c.kind, terms, rhs);
        if lc.terms.is_empty() && Scalar::is_zero(&lc.rhs) {
            continue;
        }
        rewritten.push(lc);
    }
    for id in 0..n {
        let root = roots[id];
        if root == id && !root_value.contains_key(&root) && !reduced_id.contains_key(&root) {
            reduced_id.insert(root, representatives.len());
            representatives.push(root);
        }
    }

    let mut system = LpSystem::new(sys.env);
    for &rep in &representatives {
        system
            .add_unknown(sys.label(rep))
            .expect("representatives carry distinct labels");
    }
    for c in rewritten {
        system.push(c).expect("ids within reduced table");
    }
    let map = (0..n)
        .map(|id| match root_value.get(&roots[id]) {
            Some(v) => Slot::Fixed(v.clone()),
            None => Slot::Free(reduced_id[&roots[id]]),
        })
        .collect();
    Reduction {
        system,
        map,
        representatives,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addition::{build_addition, AdditionSpec};
    use crate::lp::solve_linear;

    fn addition(n: u32, u: Option<u64>, v: Option<u64>, s: Option<u64>) -> LpSystem {
        let mut spec = AdditionSpec::new(n).unwrap();
        if let Some(u) = u {
            spec.with_u(u).unwrap();
        }
        if let Some(v) = v {
            spec.with_v(v).unwrap();
        }
        if let Some(s) = s {
            spec.with_s(s).unwrap();
        }
        build_addition(&spec).unwrap()
    }

    #[test]
    fn one_bit_collapses_to_rank_eight() {
        let sys = addition(1, Some(0), Some(1), None);
        let PresolveOutcome::Reduced { reduction, .. } = presolve(&sys) else {
            panic!("feasible system proved infeasible")
        };
        assert_eq!(reduction.determined_rank(&sys), 8);
    }

    #[test]
    fn two_plus_three_fully_determined() {
        let sys = addition(2, Some(2), Some(3), None);
        let PresolveOutcome::Reduced { reduction, trace } = presolve(&sys) else {
            panic!("feasible system proved infeasible")
        };
        assert_eq!(reduction.system.num_unknowns(), 0);
        assert_eq!(reduction.determined_rank(&sys), 16);
        assert_eq!(trace.eliminated_constraints, 44);
        let point = reduction.expand::<Rational>(&[]);
        assert!(sys.is_satisfied_by(&point));
        let s5 = sys.unknown_id(&"(5)".parse().unwrap()).unwrap();
        assert_eq!(point[s5], int(1));
    }

    #[test]
    fn subtraction_is_contradictory() {
        let sys = addition(1, Some(1), None, Some(0));
        assert!(matches!(presolve(&sys), PresolveOutcome::ProvedInfeasible { .. }));
        assert!(matches!(
            solve_linear(&sys),
            crate::lp::LinearSolution::Inconsistent | crate::lp::LinearSolution::Unique(_)
        ));
    }

    #[test]
    fn no_data_means_no_change() {
        let sys = addition(2, None, None, None);
        let PresolveOutcome::Reduced { reduction, trace } = presolve(&sys) else {
            panic!("unconstrained addition proved infeasible")
        };
        assert!(trace.is_empty());
        assert_eq!(reduction.system, sys);
    }

    #[test]
    fn idempotent() {
        let sys = addition(3, Some(5), None, None);
        let PresolveOutcome::Reduced { reduction, .. } = presolve(&sys) else {
            panic!()
        };
        let PresolveOutcome::Reduced { reduction: again, trace } = presolve(&reduction.system) else {
            panic!()
        };
        assert!(trace.is_empty());
        assert_eq!(again.system, reduction.system);
    }

    #[test]
    fn replay_reproduces_reduction() {
        let sys = addition(3, Some(5), None, Some(9));
        let PresolveOutcome::Reduced { reduction, trace } = presolve(&sys) else {
            panic!()
        };
        assert_eq!(apply(&trace, &sys), reduction);
    }
}
