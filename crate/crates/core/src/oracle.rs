//! Ground truth by brute force: assignments computed with integer arithmetic,
//! their lift to deterministic LP points, and trial division.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{enumerate_vertices, int, LpSolver, LpStatus, Objective, Rational, SimplexOptions};
use crate::model::{
    AdditionLayout, AdditionVar, GlobalIndex, Literal, MultiplicationLayout, MultiplicationVar,
};
use crate::multiplication::{build_factoring, FactoringSpec};
use crate::presolve::{presolve, PresolveOutcome};
use crate::system::LpSystem;

/// Largest number of free input bits the enumerators accept.
pub const ENUMERATION_LIMIT: u32 = 20;

/// Value of every global variable; `values[k - 1]` is `X_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompleteAssignment {
    pub values: Vec<bool>,
}

impl CompleteAssignment {
    pub fn get(&self, k: GlobalIndex) -> bool {
        self.values[k.get() as usize - 1]
    }

    pub fn satisfies(&self, data: &[(Literal, bool)]) -> bool {
        data.iter().all(|(lit, v)| {
            let k = lit.var() as usize;
            k >= 1 && k <= self.values.len() && lit.holds(self.values[k - 1]) == *v
        })
    }

    fn set(&mut self, k: GlobalIndex, v: bool) {
        self.values[k.get() as usize - 1] = v;
    }
}

fn bit(x: u128, i: u32) -> bool {
    i < 128 && (x >> i) & 1 == 1
}

fn low(x: u128, bits: u32) -> u128 {
    if bits >= 128 {
        x
    } else {
        x & ((1u128 << bits) - 1)
    }
}

/// Bits of `S = U + V` with every carry.
pub fn addition_assignment(layout: &AdditionLayout, u: u64, v: u64) -> CompleteAssignment {
    let n = layout.n();
    let (u, v) = (u as u128, v as u128);
    let mut a = CompleteAssignment {
        values: vec![false; layout.variable_count() as usize],
    };
    let ix = |r| layout.index(r).expect("role in range");
    let s = u + v;
    for i in 0..n {
        a.set(ix(AdditionVar::U(i)), bit(u, i));
        a.set(ix(AdditionVar::V(i)), bit(v, i));
        a.set(ix(AdditionVar::S(i)), bit(s, i));
    }
    for i in 1..=n {
        let carry = bit(low(u, i) + low(v, i), i);
        a.set(ix(AdditionVar::R(i)), carry);
    }
    debug_assert_eq!(a.get(ix(AdditionVar::S(n))), bit(s, n));
    a
}

/// Bits of `A x B` computed step by step: partial sums `A * (B mod 2^(t+1))`
/// and the carries of each addition.
pub fn multiplication_assignment(layout: &MultiplicationLayout, a_val: u64, b_val: u64) -> CompleteAssignment {
    use MultiplicationVar::*;
    let (n, m) = (layout.n(), layout.m());
    let (av, bv) = (a_val as u128, b_val as u128);
    let mut a = CompleteAssignment {
        values: vec![false; layout.variable_count() as usize],
    };
    let ix = |r| layout.index(r).expect("role in range");
    for i in 0..n {
        a.set(ix(A(i)), bit(av, i));
        a.set(ix(U0(i)), bit(av, i) && bit(bv, 0));
    }
    for t in 0..m {
        a.set(ix(B(t)), bit(bv, t));
    }
    let mut partial = if bit(bv, 0) { av } else { 0 };
    for t in 1..m {
        let x = partial >> t;
        let y = if bit(bv, t) { av } else { 0 };
        for o in 0..n {
            a.set(ix(U { t, i: t + o }), bit(y, o));
            a.set(ix(S { t, i: t + o }), bit(x + y, o));
        }
        for o in 1..=n {
            a.set(ix(R { t, i: t + o }), bit(low(x, o) + low(y, o), o));
        }
        partial = av * low(bv, t + 1);
    }
    a
}

/// All assignments of the addition consistent with the fixed literals.
pub fn enumerate_addition(n: u32, data: &[(Literal, bool)]) -> Result<Vec<CompleteAssignment>> {
    if n > 6 {
        return Err(Error::TooLarge { bits: 2 * n, limit: 12 });
    }
    let layout = AdditionLayout::new(n)?;
    let mut out = Vec::new();
    for u in 0..1u64 << n {
        for v in 0..1u64 << n {
            let a = addition_assignment(&layout, u, v);
            if a.satisfies(data) {
                out.push(a);
            }
        }
    }
    Ok(out)
}

/// All assignments of the multiplication consistent with the fixed literals.
pub fn enumerate_multiplication(n: u32, m: u32, data: &[(Literal, bool)]) -> Result<Vec<CompleteAssignment>> {
    if n + m > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            bits: n + m,
            limit: ENUMERATION_LIMIT,
        });
    }
    let layout = MultiplicationLayout::new(n, m)?;
    let mut out = Vec::new();
    for a in 0..1u64 << n {
        for b in 0..1u64 << m {
            let asg = multiplication_assignment(&layout, a, b);
            if asg.satisfies(data) {
                out.push(asg);
            }
        }
    }
    Ok(out)
}

/// The deterministic point of an assignment: each requirement gets the product
/// of its literal indicators.
pub fn lift(a: &CompleteAssignment, sys: &LpSystem) -> Result<Vec<Rational>> {
    sys.labels()
        .iter()
        .enumerate()
        .map(|(id, label)| {
            let r = label.ok_or_else(|| Error::range("unknown", format!("{id} has no requirement label")))?;
            if r.literals().iter().any(|l| l.var() as usize > a.values.len()) {
                return Err(Error::range("requirement", format!("{r} outside the assignment")));
            }
            Ok(int(r.holds(&a.values) as i64))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "factor", rename_all = "snake_case")]
pub enum Primality {
    Prime,
    /// Smallest prime factor.
    Composite(u64),
}

pub fn trial_division(c: u64) -> Result<Primality> {
    if c < 2 {
        return Err(Error::range("trial division input", format!("{c} < 2")));
    }
    let mut d = 2u64;
    while d.checked_mul(d).is_some_and(|sq| sq <= c) {
        if c.is_multiple_of(d) {
            return Ok(Primality::Composite(d));
        }
        d += 1;
    }
    Ok(Primality::Prime)
}

/// Integral vertices of a factoring system, read back as `(A, B)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexFactorCheck {
    pub vertices: usize,
    pub integral_vertices: usize,
    pub factor_pairs: Vec<(u64, u64)>,
    /// True when every vertex was enumerated; false when the result comes
    /// from random-objective sampling.
    pub exhaustive: bool,
}

fn read_operand(sys: &LpSystem, point: &[Rational], bits: impl Iterator<Item = GlobalIndex>) -> Option<u64> {
    let mut v = 0u64;
    for (i, k) in bits.enumerate() {
        let id = sys.unknown_id(&crate::model::Requirement::single(k.positive()))?;
        if point[id] == int(1) {
            v |= 1 << i;
        } else if point[id] != int(0) {
            return None;
        }
    }
    Some(v)
}

fn is_integral(point: &[Rational]) -> bool {
    point.iter().all(|x| x.is_integer())
}

/// Enumerates the vertices of the presolved factoring system of `c` through
/// the feasible-basis graph when it has at most `max_columns` unknowns,
/// otherwise probes `samples` random objectives.
pub fn vertex_factor_check(c: u64, max_columns: usize, max_bases: usize, samples: usize, seed: u64) -> Result<VertexFactorCheck> {
    let spec = FactoringSpec::from_u64(c)?;
    let layout = spec.layout();
    let sys = build_factoring(&spec)?;
    let reduction = match presolve(&sys) {
        PresolveOutcome::Reduced { reduction, .. } => reduction,
        PresolveOutcome::ProvedInfeasible { .. } => {
            return Ok(VertexFactorCheck {
                vertices: 0,
                integral_vertices: 0,
                factor_pairs: Vec::new(),
                exhaustive: true,
            })
        }
    };
    let mut points = Vec::new();
    let mut exhaustive = false;
    if reduction.system.num_unknowns() <= max_columns {
        let e = enumerate_vertices(&reduction.system, max_bases)?;
        exhaustive = e.complete;
        points = e.vertices;
    }
    if !exhaustive {
        let mut solver = LpSolver::<Rational>::new(&reduction.system, SimplexOptions::default())?;
        let mut rng = StdRng::seed_from_u64(seed);
        for _ in 0..samples {
            let terms = (0..reduction.system.num_unknowns())
                .map(|id| (id, int(rng.gen_range(-8..=8))))
                .collect();
            if let LpStatus::Feasible { point, .. } = solver.maximize(&Objective::new(terms))?.status {
                points.push(point);
            }
        }
        points.sort();
        points.dedup();
    }
    let mut pairs = Vec::new();
    let mut integral = 0;
    for p in &points {
        let full = reduction.expand(p);
        if !is_integral(&full) {
            continue;
        }
        integral += 1;
        let a = read_operand(&sys, &full, (0..layout.n()).map(|i| layout.index(MultiplicationVar::A(i)).expect("A")));
        let b = read_operand(&sys, &full, (0..layout.m()).map(|t| layout.index(MultiplicationVar::B(t)).expect("B")));
        if let (Some(a), Some(b)) = (a, b) {
            pairs.push((a, b));
        }
    }
    pairs.sort();
    pairs.dedup();
    Ok(VertexFactorCheck {
        vertices: points.len(),
        integral_vertices: integral,
        factor_pairs: pairs,
        exhaustive,
    })
}
