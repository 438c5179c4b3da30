//! Exact and floating-point linear programming over partial probabilities.

pub mod exact;
pub mod format;
pub mod rank;
pub mod scalar;
pub mod simplex;
pub(crate) mod sparse;
pub mod vertices;

pub use exact::ExactRational;
pub use format::{parse_native, write_lp, write_native, NativeStreamWriter};
pub use rank::{rank, rank_dense, rank_sparse, solve_linear, LinearSolution, RankMethod, DENSE_RANK_LIMIT};
pub use scalar::{int, parse_rational, rational, to_decimal, Rational, Scalar, FLOAT_PIVOT_TOLERANCE, FLOAT_TOLERANCE};
pub use simplex::{
    maximize, solve_feasibility, verify_certificate, LpOutcome, LpSolver, LpStatus, Pricing,
    SimplexOptions,
};
pub use vertices::{enumerate_vertices, VertexEnumeration};

use crate::error::{Error, Result};
use crate::system::LpSystem;

/// Sparse objective `sum coef * x_id + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Objective {
    pub terms: Vec<(usize, Rational)>,
    pub constant: Rational,
}

impl Objective {
    pub fn new(terms: Vec<(usize, Rational)>) -> Self {
        Objective {
            terms,
            constant: int(0),
        }
    }

    pub fn single(id: usize) -> Self {
        Objective::new(vec![(id, int(1))])
    }

    /// Parses `coef*id` and `coef*(requirement)` terms separated by spaces or
    /// `+`. A bare `id` or `(requirement)` has coefficient 1.
    pub fn parse(text: &str, sys: &LpSystem) -> Result<Self> {
        let mut terms = Vec::new();
        let cleaned = text.replace(" + ", " ").replace(" - ", " -");
        for tok in cleaned.split_whitespace() {
            let tok = tok.trim_start_matches('+');
            let (coef, target) = match tok.rsplit_once('*') {
                Some((c, t)) => (
                    parse_rational(c).ok_or_else(|| Error::parse(0, format!("bad coefficient in `{tok}`")))?,
                    t,
                ),
                None if tok.starts_with("-(") => (int(-1), &tok[1..]),
                None => (int(1), tok),
            };
            let id = if target.starts_with('(') {
                let r: crate::model::Requirement = target.parse()?;
                sys.unknown_id(&r)
                    .ok_or_else(|| Error::parse(0, format!("{r} is not an unknown of the system")))?
            } else {
                target
                    .parse::<usize>()
                    .map_err(|_| Error::parse(0, format!("bad unknown id in `{tok}`")))?
            };
            if id >= sys.num_unknowns() {
                return Err(Error::range("unknown id", format!("{id} >= {}", sys.num_unknowns())));
            }
            terms.push((id, coef));
        }
        if terms.is_empty() {
            return Err(Error::parse(0, "empty objective"));
        }
        Ok(Objective::new(terms))
    }
}
