//! Vertex enumeration by traversal of the feasible-basis graph.
//!
//! Every vertex of `{x >= 0 : Ax = b}` has a feasible basis, and the feasible
//! bases are connected by simplex pivots, so a breadth-first search from the
//! phase I basis reaches them all.

use std::collections::{BTreeSet, HashSet, VecDeque};

use super::simplex::{LpSolver, SimplexOptions, Tableau};
use super::Rational;
use crate::error::Result;
use crate::system::LpSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct VertexEnumeration {
    pub vertices: Vec<Vec<Rational>>,
    pub bases_visited: usize,
    /// False when the basis limit stopped the search early.
    pub complete: bool,
}

pub fn enumerate_vertices(sys: &LpSystem, max_bases: usize) -> Result<VertexEnumeration> {
    let solver = LpSolver::<Rational>::new(sys, SimplexOptions::default())?;
    let Some(start) = solver.tableau() else {
        return Ok(VertexEnumeration {
            vertices: Vec::new(),
            bases_visited: 0,
            complete: true,
        });
    };
    let key = |t: &Tableau<Rational>| {
        let mut b = t.basis.clone();
        b.sort_unstable();
        b
    };
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut vertices: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(key(start));
    queue.push_back(start.clone());
    let mut complete = true;
    while let Some(t) = queue.pop_front() {
        vertices.insert(t.point());
        let basic: HashSet<usize> = t.basis.iter().copied().collect();
        for j in (0..t.ncols).filter(|j| !basic.contains(j)) {
            for r in t.ratio_rows(j) {
                let mut next = t.clone();
                next.pivot(r, j);
                if seen.insert(key(&next)) {
                    if seen.len() > max_bases {
                        complete = false;
                        break;
                    }
                    queue.push_back(next);
                }
            }
        }
        if !complete {
            break;
        }
    }
    Ok(VertexEnumeration {
        vertices: vertices.into_iter().collect(),
        bases_visited: seen.len(),
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::int;
    use crate::system::{ConstraintKind, Environment, LinearConstraint};

    #[test]
    fn simplex_vertices() {
        // x0 + x1 + x2 = 1: three unit vertices
        let mut sys = LpSystem::new(Environment::Generic);
        for _ in 0..3 {
            sys.add_unknown(None).unwrap();
        }
        sys.push(LinearConstraint::new(
            ConstraintKind::Extra,
            vec![(0, int(1)), (1, int(1)), (2, int(1))],
            int(1),
        ))
        .unwrap();
        let v = enumerate_vertices(&sys, 1000).unwrap();
        assert!(v.complete);
        assert_eq!(v.vertices.len(), 3);
        for p in &v.vertices {
            assert_eq!(p.iter().filter(|x| **x == int(1)).count(), 1);
        }
    }
}
