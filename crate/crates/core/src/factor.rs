//! Factoring by bit-fixing over the multiplication system.
//!
//! The bits of `B` are decided one at a time. At step `t` the objective is the
//! sum of the already chosen literals plus `P(+B_t)` or `P(-B_t)`; a branch is
//! kept when its maximum reaches `t + 1`, i.e. every chosen literal can hold
//! with probability 1 at the same point.

use std::cmp::Ordering;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{int, ExactRational, LpSolver, LpStatus, Objective, Pricing, Rational, Scalar, SimplexOptions};
use crate::model::{Literal, MultiplicationVar, Requirement};
use crate::multiplication::{build_factoring, FactoringSpec};
use crate::oracle::{trial_division, Primality};
use crate::presolve::{presolve, PresolveOutcome, Reduction, Slot};
use crate::system::LpSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    #[default]
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorOptions {
    pub arithmetic: Arithmetic,
    pub presolve: bool,
    /// Backtrack into every branch that reached its target instead of
    /// stopping at the first dead end.
    pub exhaustive: bool,
    /// Try `B_t = 1` before `B_t = 0` when both reach the target.
    pub prefer_one: bool,
    pub pricing: Pricing,
    /// Cap on maximizations in exhaustive mode.
    pub max_objectives: usize,
    /// Cap on simplex pivots over the whole run.
    pub max_pivots: usize,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions {
            arithmetic: Arithmetic::Exact,
            presolve: true,
            exhaustive: false,
            prefer_one: true,
            pricing: Pricing::Dantzig,
            max_objectives: 4096,
            max_pivots: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorStatus {
    Composite {
        #[serde(serialize_with = "as_string")]
        a: BigUint,
        #[serde(serialize_with = "as_string")]
        b: BigUint,
    },
    /// Neither polarity of some bit reached its target.
    PrimeByProcedure,
    /// The system itself has no solution.
    InfeasibleSystem,
    /// Every bit was decided but the resulting `B` is not a nontrivial factor.
    Discrepancy { detail: String },
}

fn as_string<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl FactorStatus {
    pub fn label(&self) -> &'static str {
        match self {
            FactorStatus::Composite { .. } => "composite",
            FactorStatus::PrimeByProcedure => "prime_by_procedure",
            FactorStatus::InfeasibleSystem => "infeasible_system",
            FactorStatus::Discrepancy { .. } => "discrepancy",
        }
    }
}

/// One maximization of the bit-fixing loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BitDecision {
    pub bit: u32,
    /// Value of `B_t` the objective pushes towards.
    pub value: bool,
    pub optimum: String,
    pub target: u32,
    pub reached: bool,
    pub chosen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorStats {
    pub objectives_evaluated: usize,
    pub unknowns: usize,
    pub constraints: usize,
    /// Dimensions of the system handed to the simplex.
    pub lp_unknowns: usize,
    pub lp_constraints: usize,
    pub presolve_fixed_count: usize,
    pub pivots: usize,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorResult {
    #[serde(serialize_with = "as_string")]
    pub c: BigUint,
    pub n: u32,
    pub m: u32,
    pub arithmetic: Arithmetic,
    pub status: FactorStatus,
    pub log: Vec<BitDecision>,
    /// Integrality of the last optimal point, exact mode only.
    pub final_point_integral: Option<bool>,
    pub stats: FactorStats,
}

/// Maps requirements of the built system to the columns of the solved one.
struct Columns<'a> {
    original: &'a LpSystem,
    reduction: Option<&'a Reduction>,
}

impl Columns<'_> {
    fn add_term(&self, objective: &mut Objective, lit: Literal) -> Result<()> {
        let r = Requirement::single(lit);
        let id = self
            .original
            .unknown_id(&r)
            .ok_or_else(|| Error::EncodingAnomaly(format!("{r} is not an unknown of the factoring system")))?;
        match self.reduction.map(|red| &red.map[id]) {
            None => objective.terms.push((id, int(1))),
            Some(Slot::Free(k)) => objective.terms.push((*k, int(1))),
            Some(Slot::Fixed(v)) => objective.constant += v,
        }
        Ok(())
    }

    fn expand<T: Scalar>(&self, point: &[T]) -> Vec<T> {
        match self.reduction {
            Some(red) => red.expand(point),
            None => point.to_vec(),
        }
    }
}

struct Search<'a, T> {
    solver: LpSolver<T>,
    columns: Columns<'a>,
    b_literals: Vec<(Literal, Literal)>,
    spec: &'a FactoringSpec,
    options: FactorOptions,
    log: Vec<BitDecision>,
    objectives: usize,
    last_point: Option<Vec<T>>,
    rejected: Vec<String>,
}

enum Step {
    Found(BigUint, BigUint),
    DeadEnd,
}

impl<T: Scalar> Search<'_, T> {
    fn evaluate(&mut self, prefix: &[Literal], bit: u32, value: bool) -> Result<Option<Vec<T>>> {
        let (pos, neg) = self.b_literals[bit as usize];
        let mut objective = Objective::default();
        for lit in prefix.iter().chain(std::iter::once(if value { &pos } else { &neg })) {
            self.columns.add_term(&mut objective, *lit)?;
        }
        self.objectives += 1;
        let out = self.solver.maximize(&objective)?;
        let (point, optimum) = match out.status {
            LpStatus::Feasible { point, objective, .. } => (point, objective.expect("maximize reports its optimum")),
            LpStatus::Unbounded { column } => {
                return Err(Error::EncodingAnomaly(format!("objective unbounded along unknown {column}")))
            }
            LpStatus::Infeasible { .. } => unreachable!("the solver holds a feasible basis"),
        };
        let target = bit + 1;
        let reached = optimum.compare(&T::from_i64(target as i64)) == Ordering::Equal;
        self.log.push(BitDecision {
            bit,
            value,
            optimum: display_scalar(&optimum),
            target,
            reached,
            chosen: false,
        });
        Ok(reached.then_some(point))
    }

    fn order(&self) -> [bool; 2] {
        if self.options.prefer_one {
            [true, false]
        } else {
            [false, true]
        }
    }

    fn straight(&mut self) -> Result<FactorStatus> {
        let mut prefix = Vec::new();
        let mut b = BigUint::zero();
        for bit in 0..self.spec.m {
            let mut reached = Vec::new();
            for value in self.order() {
                if let Some(p) = self.evaluate(&prefix, bit, value)? {
                    reached.push((value, p, self.log.len() - 1));
                }
            }
            let Some((value, point, at)) = reached.into_iter().next() else {
                return Ok(FactorStatus::PrimeByProcedure);
            };
            self.log[at].chosen = true;
            self.last_point = Some(point);
            let (pos, neg) = self.b_literals[bit as usize];
            prefix.push(if value { pos } else { neg });
            if value {
                b.set_bit(bit as u64, true);
            }
        }
        Ok(match check_factor(self.spec, &b) {
            Ok(a) => FactorStatus::Composite { a, b },
            Err(detail) => FactorStatus::Discrepancy { detail },
        })
    }

    fn depth_first(&mut self, prefix: &mut Vec<Literal>, b: &mut BigUint) -> Result<Step> {
        let bit = prefix.len() as u32;
        if bit == self.spec.m {
            return Ok(match check_factor(self.spec, b) {
                Ok(a) => Step::Found(a, b.clone()),
                Err(detail) => {
                    self.rejected.push(detail);
                    Step::DeadEnd
                }
            });
        }
        for value in self.order() {
            if self.objectives >= self.options.max_objectives {
                return Ok(Step::DeadEnd);
            }
            let Some(point) = self.evaluate(prefix, bit, value)? else {
                continue;
            };
            let at = self.log.len() - 1;
            self.log[at].chosen = true;
            self.last_point = Some(point);
            let (pos, neg) = self.b_literals[bit as usize];
            prefix.push(if value { pos } else { neg });
            b.set_bit(bit as u64, value);
            let step = self.depth_first(prefix, b)?;
            prefix.pop();
            b.set_bit(bit as u64, false);
            if let Step::Found(..) = step {
                return Ok(step);
            }
        }
        Ok(Step::DeadEnd)
    }
}

fn display_scalar<T: Scalar>(v: &T) -> String {
    if T::EXACT {
        v.to_rational().to_string()
    } else {
        format!("{}", v.to_f64())
    }
}

/// `A = C / B` when `B` is a nontrivial divisor and `A` fits in `n` bits.
fn check_factor(spec: &FactoringSpec, b: &BigUint) -> std::result::Result<BigUint, String> {
    let c = &spec.c_value;
    if *b <= BigUint::one() || b >= c {
        return Err(format!("B = {b} is not in (1, {c})"));
    }
    if !(c % b).is_zero() {
        return Err(format!("B = {b} does not divide {c}"));
    }
    let a = c / b;
    if a.bits() > spec.n as u64 {
        return Err(format!("A = {a} does not fit in {} bits", spec.n));
    }
    debug_assert_eq!(&a * b, *c);
    Ok(a)
}

pub fn factor(c: &BigUint, options: &FactorOptions) -> Result<FactorResult> {
    match options.arithmetic {
        Arithmetic::Exact => factor_with::<ExactRational>(c, options),
        Arithmetic::Float => factor_with::<f64>(c, options),
    }
}

pub fn factor_u64(c: u64, options: &FactorOptions) -> Result<FactorResult> {
    factor(&BigUint::from(c), options)
}

/// The bit-fixing procedure with solver arithmetic `T`.
pub fn factor_with<T: Scalar>(c: &BigUint, options: &FactorOptions) -> Result<FactorResult> {
    let start = Instant::now();
    let spec = FactoringSpec::new(c)?;
    let layout = spec.layout();
    let sys = build_factoring(&spec)?;
    let mut stats = FactorStats {
        objectives_evaluated: 0,
        unknowns: sys.num_unknowns(),
        constraints: sys.constraints().len(),
        lp_unknowns: sys.num_unknowns(),
        lp_constraints: sys.constraints().len(),
        presolve_fixed_count: 0,
        pivots: 0,
        wall_time_ms: 0.0,
    };
    let mut result = FactorResult {
        c: c.clone(),
        n: spec.n,
        m: spec.m,
        arithmetic: if T::EXACT { Arithmetic::Exact } else { Arithmetic::Float },
        status: FactorStatus::InfeasibleSystem,
        log: Vec::new(),
        final_point_integral: None,
        stats: stats.clone(),
    };

    let outcome = options.presolve.then(|| presolve(&sys));
    let reduction = match &outcome {
        Some(PresolveOutcome::ProvedInfeasible { trace, .. }) => {
            stats.presolve_fixed_count = trace.fixed.len();
            stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            result.stats = stats;
            return Ok(result);
        }
        Some(PresolveOutcome::Reduced { reduction, .. }) => {
            stats.presolve_fixed_count = reduction.fixed_count();
            stats.lp_unknowns = reduction.system.num_unknowns();
            stats.lp_constraints = reduction.system.constraints().len();
            Some(reduction)
        }
        None => None,
    };
    let solved = reduction.map_or(&sys, |r| &r.system);
    let simplex = SimplexOptions {
        pricing: options.pricing,
        max_pivots: options.max_pivots,
        ..SimplexOptions::default()
    };
    let solver = LpSolver::<T>::new(solved, simplex)?;
    if !solver.is_feasible() {
        stats.pivots = solver.total_pivots();
        stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        result.stats = stats;
        return Ok(result);
    }

    let b_literals = (0..spec.m)
        .map(|t| {
            let k = layout.index(MultiplicationVar::B(t)).expect("B_t is in range");
            (k.positive(), k.negative())
        })
        .collect();
    let mut search = Search {
        solver,
        columns: Columns {
            original: &sys,
            reduction,
        },
        b_literals,
        spec: &spec,
        options: *options,
        log: Vec::new(),
        objectives: 0,
        last_point: None,
        rejected: Vec::new(),
    };
    let status = if options.exhaustive {
        let mut prefix = Vec::new();
        let mut b = BigUint::zero();
        match search.depth_first(&mut prefix, &mut b)? {
            Step::Found(a, b) => FactorStatus::Composite { a, b },
            Step::DeadEnd if search.rejected.is_empty() => FactorStatus::PrimeByProcedure,
            Step::DeadEnd => FactorStatus::Discrepancy {
                detail: search.rejected.join("; "),
            },
        }
    } else {
        search.straight()?
    };

    if T::EXACT {
        if let Some(p) = &search.last_point {
            let full: Vec<Rational> = search.columns.expand(p).iter().map(Scalar::to_rational).collect();
            result.final_point_integral = Some(classify_solution(&full, &sys).integral);
        }
    }
    stats.objectives_evaluated = search.objectives;
    stats.pivots = search.solver.total_pivots();
    stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    result.status = status;
    result.log = search.log;
    result.stats = stats;
    Ok(result)
}

/// A multi-literal unknown whose value differs from the product of its
/// literals' values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityViolation {
    pub requirement: Requirement,
    pub value: String,
    pub product: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminismReport {
    /// Every single-literal unknown with its value, in unknown-id order.
    pub singletons: Vec<(Requirement, String)>,
    pub integral: bool,
    pub violations: Vec<SeparabilityViolation>,
}

impl DeterminismReport {
    pub fn is_deterministic(&self) -> bool {
        self.integral && self.violations.is_empty()
    }
}

/// Integrality of the singletons and the product check on every multi-literal
/// unknown.
pub fn classify_solution(point: &[Rational], sys: &LpSystem) -> DeterminismReport {
    let literal_value = |lit: Literal| -> Option<Rational> {
        if let Some(id) = sys.unknown_id(&Requirement::single(lit)) {
            return Some(point[id].clone());
        }
        let id = sys.unknown_id(&Requirement::single(lit.negated()))?;
        Some(int(1) - &point[id])
    };
    let mut singletons = Vec::new();
    let mut integral = true;
    let mut violations = Vec::new();
    for (id, label) in sys.labels().iter().enumerate() {
        let Some(r) = label else { continue };
        let value = &point[id];
        if r.len() == 1 {
            integral &= value.is_integer();
            singletons.push((*r, value.to_string()));
            continue;
        }
        let product = r
            .literals()
            .iter()
            .try_fold(int(1), |acc, lit| literal_value(*lit).map(|v| acc * v));
        if let Some(product) = product {
            if product != *value {
                violations.push(SeparabilityViolation {
                    requirement: *r,
                    value: value.to_string(),
                    product: product.to_string(),
                });
            }
        }
    }
    DeterminismReport {
        singletons,
        integral,
        violations,
    }
}

/// One row of a sweep, with the trial-division ground truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub c: u64,
    pub prime: bool,
    pub status: String,
    pub a: Option<u64>,
    pub b: Option<u64>,
    pub objectives_evaluated: usize,
    pub lp_unknowns: usize,
    pub lp_constraints: usize,
    pub presolve_fixed_count: usize,
    pub wall_time_ms: f64,
    /// The procedure's verdict differs from trial division, or it reported a
    /// discrepancy.
    pub disagrees: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix {
    pub composite_found: usize,
    /// Composite, but the procedure stopped on a bit or found the system
    /// infeasible.
    pub composite_missed: usize,
    pub composite_discrepancy: usize,
    pub prime_confirmed: usize,
    pub prime_discrepancy: usize,
    /// Factors returned for a prime; impossible since factors are verified.
    pub prime_misfactored: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.composite_found
            + self.composite_missed
            + self.composite_discrepancy
            + self.prime_confirmed
            + self.prime_discrepancy
            + self.prime_misfactored
    }

    pub fn disagreements(&self) -> usize {
        self.composite_missed + self.composite_discrepancy + self.prime_discrepancy + self.prime_misfactored
    }

    pub fn discrepancies(&self) -> usize {
        self.composite_discrepancy + self.prime_discrepancy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub lo: u64,
    pub hi: u64,
    pub rows: Vec<SweepRow>,
    pub confusion: ConfusionMatrix,
    pub wall_time_ms: f64,
}

fn sweep_row(c: u64, options: &FactorOptions) -> Result<SweepRow> {
    let prime = trial_division(c)? == Primality::Prime;
    let r = factor_u64(c, options)?;
    let (a, b) = match &r.status {
        FactorStatus::Composite { a, b } => (a.to_u64(), b.to_u64()),
        _ => (None, None),
    };
    let disagrees = match &r.status {
        FactorStatus::Composite { .. } => prime,
        FactorStatus::PrimeByProcedure | FactorStatus::InfeasibleSystem => !prime,
        FactorStatus::Discrepancy { .. } => true,
    };
    Ok(SweepRow {
        c,
        prime,
        status: r.status.label().to_string(),
        a,
        b,
        objectives_evaluated: r.stats.objectives_evaluated,
        lp_unknowns: r.stats.lp_unknowns,
        lp_constraints: r.stats.lp_constraints,
        presolve_fixed_count: r.stats.presolve_fixed_count,
        wall_time_ms: r.stats.wall_time_ms,
        disagrees,
    })
}

/// Runs the procedure on every `C` in `lo..=hi` (values below 4 are skipped)
/// on `jobs` worker threads and tallies it against trial division.
pub fn sweep(lo: u64, hi: u64, options: &FactorOptions, jobs: usize) -> Result<SweepReport> {
    let start = Instant::now();
    let first = lo.max(4);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::range("job count", e.to_string()))?;
    let rows: Vec<SweepRow> = if first > hi {
        Vec::new()
    } else {
        pool.install(|| {
            (first..=hi)
                .into_par_iter()
                .map(|c| sweep_row(c, options))
                .collect::<Result<_>>()
        })?
    };
    let mut confusion = ConfusionMatrix::default();
    for r in &rows {
        let slot = match (r.prime, r.status.as_str()) {
            (false, "composite") => &mut confusion.composite_found,
            (false, "discrepancy") => &mut confusion.composite_discrepancy,
            (false, _) => &mut confusion.composite_missed,
            (true, "composite") => &mut confusion.prime_misfactored,
            (true, "discrepancy") => &mut confusion.prime_discrepancy,
            (true, _) => &mut confusion.prime_confirmed,
        };
        *slot += 1;
    }
    Ok(SweepReport {
        lo,
        hi,
        rows,
        confusion,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::rational;
    use crate::oracle::{lift, multiplication_assignment};

    fn composite(r: &FactorResult) -> Option<(u64, u64)> {
        match &r.status {
            FactorStatus::Composite { a, b } => Some((a.to_u64()?, b.to_u64()?)),
            _ => None,
        }
    }

    #[test]
    fn six_factors() {
        let r = factor_u64(6, &FactorOptions::default()).unwrap();
        let (a, b) = composite(&r).expect("6 is factored");
        assert_eq!(a * b, 6);
        assert!([(2, 3), (3, 2)].contains(&(a, b)));
        assert!(r.stats.objectives_evaluated <= 2 * r.m as usize);
    }

    #[test]
    fn never_wrong_factors() {
        for c in 4..=40u64 {
            let r = factor_u64(c, &FactorOptions::default()).unwrap();
            if let Some((a, b)) = composite(&r) {
                assert_eq!(a * b, c);
                assert!(b > 1 && a > 1);
            }
        }
    }

    #[test]
    fn primes_are_not_factored() {
        for c in [5u64, 7, 11, 13] {
            let r = factor_u64(c, &FactorOptions::default()).unwrap();
            assert!(composite(&r).is_none(), "{c}: {:?}", r.status);
        }
    }

    #[test]
    fn same_result_twice() {
        let o = FactorOptions::default();
        let (x, y) = (factor_u64(15, &o).unwrap(), factor_u64(15, &o).unwrap());
        assert_eq!(x.status, y.status);
        assert_eq!(x.log, y.log);
    }

    #[test]
    fn exhaustive_and_float_agree_on_six() {
        let o = FactorOptions {
            exhaustive: true,
            ..FactorOptions::default()
        };
        assert!(composite(&factor_u64(6, &o).unwrap()).is_some());
        let f = FactorOptions {
            arithmetic: Arithmetic::Float,
            ..FactorOptions::default()
        };
        let r = factor_u64(6, &f).unwrap();
        assert_eq!(composite(&r).map(|(a, b)| a * b), Some(6));
    }

    #[test]
    fn deterministic_lift_classifies_integral() {
        let spec = FactoringSpec::from_u64(6).unwrap();
        let sys = build_factoring(&spec).unwrap();
        let p = lift(&multiplication_assignment(&spec.layout(), 2, 3), &sys).unwrap();
        let d = classify_solution(&p, &sys);
        assert!(d.integral && d.violations.is_empty());
        let mut half = p.clone();
        half[0] = rational(1, 2);
        assert!(!classify_solution(&half, &sys).integral);
    }

    #[test]
    fn sweep_tallies() {
        let r = sweep(4, 16, &FactorOptions::default(), 2).unwrap();
        assert_eq!(r.rows.len(), 13);
        let composites: Vec<u64> = r.rows.iter().filter(|x| !x.prime).map(|x| x.c).collect();
        assert_eq!(composites, [4, 6, 8, 9, 10, 12, 14, 15, 16]);
        assert_eq!(r.confusion.total(), 13);
        assert_eq!(r.confusion.prime_misfactored, 0);
        assert!(sweep(10, 9, &FactorOptions::default(), 1).unwrap().rows.is_empty());
    }
}
