//! Adder and AND gates and the structural equations of their truth tables.

use crate::model::{GlobalIndex, Literal, Requirement};
use crate::system::{ConstraintKind, Equation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Gate {
    Half {
        a: GlobalIndex,
        b: GlobalIndex,
        sum: GlobalIndex,
        carry: GlobalIndex,
    },
    Full {
        a: GlobalIndex,
        b: GlobalIndex,
        c: GlobalIndex,
        sum: GlobalIndex,
        carry: GlobalIndex,
    },
    And {
        a: GlobalIndex,
        b: GlobalIndex,
        out: GlobalIndex,
    },
}

/// `P(out) = sum of P(row)` over the input rows, in binary order, where `f`
/// is true.
fn truth_table(out: GlobalIndex, inputs: &[GlobalIndex], f: impl Fn(u32) -> bool) -> Equation {
    let d = inputs.len();
    let mut parts = Vec::new();
    for row in 0u32..(1 << d) {
        let ones = row.count_ones();
        if !f(ones) {
            continue;
        }
        let lits: Vec<Literal> = inputs
            .iter()
            .enumerate()
            .map(|(b, v)| v.literal(row & (1 << (d - 1 - b)) != 0))
            .collect();
        parts.push(Requirement::of(&lits));
    }
    Equation::definition(ConstraintKind::Structural, Requirement::single(out.positive()), &parts)
}

impl Gate {
    pub fn equations(&self) -> Vec<Equation> {
        match *self {
            Gate::Half { a, b, sum, carry } => vec![
                truth_table(sum, &[a, b], |k| k == 1),
                truth_table(carry, &[a, b], |k| k == 2),
            ],
            Gate::Full {
                a,
                b,
                c,
                sum,
                carry,
            } => vec![
                truth_table(sum, &[a, b, c], |k| k % 2 == 1),
                truth_table(carry, &[a, b, c], |k| k >= 2),
            ],
            Gate::And { a, b, out } => vec![truth_table(out, &[a, b], |k| k == 2)],
        }
    }

    /// Positive conjunctions over the gate inputs, singletons excluded.
    pub fn positive_unknowns(&self) -> Vec<Requirement> {
        let p = |v: &[GlobalIndex]| {
            Requirement::of(&v.iter().map(|x| x.positive()).collect::<Vec<_>>())
        };
        match *self {
            Gate::Half { a, b, .. } | Gate::And { a, b, .. } => vec![p(&[a, b])],
            Gate::Full { a, b, c, .. } => vec![p(&[a, b, c]), p(&[a, b]), p(&[b, c]), p(&[a, c])],
        }
    }
}

/// Structural equations of a gate list, ordered by ascending output index.
pub(crate) fn structural_equations(gates: &[Gate]) -> Vec<Equation> {
    let mut eqs: Vec<Equation> = gates.iter().flat_map(|g| g.equations()).collect();
    eqs.sort_by_key(|e| e.lhs().literals()[0].var());
    eqs
}
