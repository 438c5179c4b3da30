//! Normalization and marginalization equations generated from positive
//! unknowns.

use crate::error::{Error, Result};
use crate::model::{Literal, Requirement};
use crate::system::{ConstraintKind, Equation};

const SIGNS: [(bool, bool); 4] = [(true, true), (true, false), (false, true), (false, false)];

fn split(kept: &[Literal], dropped: Literal) -> Equation {
    let r = Requirement::of(kept);
    let mut with = kept.to_vec();
    with.push(dropped);
    let pos = Requirement::of(&with);
    *with.last_mut().unwrap() = dropped.negated();
    let neg = Requirement::of(&with);
    Equation::definition(ConstraintKind::Universal, r, &[pos, neg])
}

/// Emits the universal equations of one positive unknown: 1 for a singleton,
/// 4 for a pair and 12 for a triple.
pub fn for_each_universal_of(r: &Requirement, sink: &mut impl FnMut(Equation)) -> Result<()> {
    if !r.is_positive() {
        return Err(Error::Polarity(*r));
    }
    let v: Vec<_> = r.literals().iter().map(|l| l.index()).collect();
    match v.len() {
        1 => sink(Equation::new(
            ConstraintKind::Universal,
            &[
                (1, Requirement::single(v[0].positive())),
                (1, Requirement::single(v[0].negative())),
            ],
            1,
        )),
        2 => {
            for (a, b) in [(v[0], v[1]), (v[1], v[0])] {
                for s in [true, false] {
                    sink(split(&[a.literal(s)], b.positive()));
                }
            }
        }
        _ => {
            for (a, b, c) in [(v[0], v[1], v[2]), (v[1], v[2], v[0]), (v[2], v[0], v[1])] {
                for (sa, sb) in SIGNS {
                    sink(split(&[a.literal(sa), b.literal(sb)], c.positive()));
                }
            }
        }
    }
    Ok(())
}

/// Universal equations of a set of positive unknowns, in the set's sorted
/// order.
pub fn universal_equations(positive: &[Requirement]) -> Result<Vec<Equation>> {
    let mut sorted = positive.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out = Vec::new();
    for r in &sorted {
        for_each_universal_of(r, &mut |eq| out.push(eq))?;
    }
    Ok(out)
}

/// Number of universal equations a positive unknown generates.
pub fn universal_count(arity: usize) -> u64 {
    match arity {
        1 => 1,
        2 => 4,
        3 => 12,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(s: &str) -> Requirement {
        s.parse().unwrap()
    }

    #[test]
    fn singleton_normalization() {
        let eqs = universal_equations(&[req("(1)")]).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].to_string(), "P(1) +P(-1) = 1");
    }

    #[test]
    fn pair_marginals() {
        let eqs = universal_equations(&[req("(1;3)")]).unwrap();
        let text: Vec<String> = eqs.iter().map(|e| e.to_string()).collect();
        assert_eq!(
            text,
            [
                "P(1) -P(1;3) -P(1;-3) = 0",
                "P(-1) -P(-1;3) -P(-1;-3) = 0",
                "P(3) -P(1;3) -P(-1;3) = 0",
                "P(-3) -P(1;-3) -P(-1;-3) = 0",
            ]
        );
    }

    #[test]
    fn triple_marginals_cover_all_pair_variants() {
        let eqs = universal_equations(&[req("(2;4;7)")]).unwrap();
        assert_eq!(eqs.len(), 12);
        let mut lhs: Vec<Requirement> = eqs.iter().map(|e| e.lhs()).collect();
        lhs.sort();
        lhs.dedup();
        assert_eq!(lhs.len(), 12);
        assert!(lhs.iter().all(|r| r.len() == 2));
        assert!(eqs.iter().any(|e| e.to_string() == "P(-2;4) -P(-2;4;7) -P(-2;4;-7) = 0"));
        assert!(eqs.iter().any(|e| e.to_string() == "P(-4;7) -P(2;-4;7) -P(-2;-4;7) = 0"));
        for e in &eqs {
            assert_eq!(e.terms.len(), 3);
            assert!(e.terms[1].1.len() == 3 && e.terms[2].1.len() == 3);
        }
    }

    #[test]
    fn rejects_negative_generators() {
        assert!(matches!(
            universal_equations(&[req("(-1;2)")]),
            Err(Error::Polarity(_))
        ));
    }
}
