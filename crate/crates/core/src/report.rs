//! Claim verification: every stated count, rank, label and worked outcome is
//! recomputed and compared with the value as printed.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::Serialize;

use crate::addition::{addition_counts, addition_positive_unknowns, addition_structural, build_addition, AdditionSpec};
use crate::error::Result;
use crate::factor::{factor_u64, sweep, FactorOptions, FactorStatus};
use crate::lp::{
    int, rank, rational, solve_linear, ExactRational, LinearSolution, LpSolver, Objective, RankMethod, Rational, Scalar,
    SimplexOptions,
};
use crate::model::{
    AdditionLayout, AdditionVar, GlobalIndex, Literal, MultiplicationLayout, MultiplicationVar, Requirement,
};
use crate::multiplication::{
    build_factoring, factoring_counts, multiplication_counts, multiplication_positive_unknowns, product_structural,
    shifted_counts, shifted_positive_unknowns, shifted_structural, FactoringSpec, MultiplicationSpec,
};
use crate::oracle::{enumerate_addition, lift, vertex_factor_check};
use crate::presolve::{presolve, PresolveOutcome, Slot};
use crate::system::{Equation, LpSystem, SystemCounts};
use crate::universal::universal_equations;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch,
    /// The printed value disagrees, but the value reconstructed from the
    /// labeling convention and the worked examples agrees.
    SuspectedTypo,
    NotRun,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::Mismatch => "mismatch",
            Verdict::SuspectedTypo => "suspected-typo",
            Verdict::NotRun => "not-run",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Printed in the source text.
    Stated,
    /// Computed independently of the encoders under test.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimRecord {
    pub id: String,
    /// Where the claim is made, described by content.
    pub location: String,
    pub claim: String,
    pub expected: String,
    pub provenance: Provenance,
    pub observed: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Skip every claim that needs the solver or rank computations.
    pub count_only: bool,
    /// Upper end of the factoring sweep; 0 skips it.
    pub sweep_hi: u64,
    pub jobs: usize,
    pub factor: FactorOptions,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            count_only: false,
            sweep_hi: 64,
            jobs: 1,
            factor: FactorOptions::default(),
        }
    }
}

struct Ledger {
    records: Vec<ClaimRecord>,
    count_only: bool,
}

impl Ledger {
    fn push(
        &mut self,
        id: &str,
        location: &str,
        claim: &str,
        expected: impl ToString,
        provenance: Provenance,
        observed: Result<String>,
    ) {
        let expected = expected.to_string();
        let (observed, verdict) = match observed {
            Ok(o) => {
                let v = if o == expected { Verdict::Match } else { Verdict::Mismatch };
                (o, v)
            }
            Err(e) => (format!("error: {e}"), Verdict::Mismatch),
        };
        self.records.push(ClaimRecord {
            id: id.to_string(),
            location: location.to_string(),
            claim: claim.to_string(),
            expected,
            provenance,
            observed,
            verdict,
        });
    }

    fn stated(&mut self, id: &str, location: &str, claim: &str, expected: impl ToString, observed: Result<String>) {
        self.push(id, location, claim, expected, Provenance::Stated, observed);
    }

    /// A claim that needs the solver; recorded as not run in count-only mode.
    fn solver(
        &mut self,
        id: &str,
        location: &str,
        claim: &str,
        expected: impl ToString,
        provenance: Provenance,
        observe: impl FnOnce() -> Result<String>,
    ) {
        if self.count_only {
            self.records.push(ClaimRecord {
                id: id.to_string(),
                location: location.to_string(),
                claim: claim.to_string(),
                expected: expected.to_string(),
                provenance,
                observed: String::new(),
                verdict: Verdict::NotRun,
            });
        } else {
            self.push(id, location, claim, expected, provenance, observe());
        }
    }

    /// The printed value differs from the reconstructed one, which is what
    /// the encoders use.
    fn typo(&mut self, id: &str, location: &str, claim: &str, printed: &str, observed: String, detail: &str) {
        self.records.push(ClaimRecord {
            id: id.to_string(),
            location: location.to_string(),
            claim: format!("{claim} ({detail})"),
            expected: printed.to_string(),
            provenance: Provenance::Stated,
            observed,
            verdict: Verdict::SuspectedTypo,
        });
    }
}

fn pair(a: impl ToString, b: impl ToString) -> String {
    format!("{} / {}", a.to_string(), b.to_string())
}

fn addition_system(n: u32, u: Option<u64>, v: Option<u64>, s: Option<u64>) -> Result<LpSystem> {
    let mut spec = AdditionSpec::new(n)?;
    if let Some(u) = u {
        spec.with_u(u)?;
    }
    if let Some(v) = v {
        spec.with_v(v)?;
    }
    if let Some(s) = s {
        spec.with_s(s)?;
    }
    build_addition(&spec)
}

fn rough_rank(sys: &LpSystem) -> usize {
    rank(sys, RankMethod::default())
}

fn presolved_rank(sys: &LpSystem) -> String {
    match presolve(sys) {
        PresolveOutcome::Reduced { reduction, .. } => reduction.determined_rank(sys).to_string(),
        PresolveOutcome::ProvedInfeasible { conflict, .. } => format!("infeasible ({conflict})"),
    }
}

/// Minimum and maximum of `P(lit)` over the feasible set.
fn singleton_range(sys: &LpSystem, lit: Literal) -> Result<Option<(Rational, Rational)>> {
    let Some(id) = sys.unknown_id(&Requirement::single(lit)) else {
        return Ok(None);
    };
    let mut solver = LpSolver::<ExactRational>::new(sys, SimplexOptions::default())?;
    if !solver.is_feasible() {
        return Ok(None);
    }
    let hi = solver.maximize(&Objective::single(id))?;
    let lo = solver.maximize(&Objective::new(vec![(id, int(-1))]))?;
    match (hi.objective(), lo.objective()) {
        (Some(h), Some(l)) => Ok(Some((l.neg().to_rational(), h.to_rational()))),
        _ => Ok(None),
    }
}

/// The sum value when every output bit is pinned to 0 or 1 over the whole
/// feasible set.
fn determined_sum(sys: &LpSystem, n: u32) -> Result<String> {
    let layout = AdditionLayout::new(n)?;
    let mut value = 0u64;
    for i in 0..=n {
        let k = layout.index(AdditionVar::S(i))?;
        match singleton_range(sys, k.positive())? {
            Some((lo, hi)) if lo == hi && (lo == int(0) || lo == int(1)) => {
                if lo == int(1) {
                    value |= 1 << i;
                }
            }
            Some((lo, hi)) => return Ok(format!("S_{i} ranges over [{lo}, {hi}]")),
            None => return Ok("infeasible".into()),
        }
    }
    Ok(format!("S={value}"))
}

fn feasible_exact(sys: &LpSystem) -> Result<bool> {
    Ok(LpSolver::<ExactRational>::new(sys, SimplexOptions::default())?.is_feasible())
}

fn feasible_float(sys: &LpSystem) -> Result<bool> {
    Ok(LpSolver::<f64>::new(sys, SimplexOptions::default())?.is_feasible())
}

fn feasibility_word(feasible: bool) -> String {
    if feasible { "feasible" } else { "infeasible" }.into()
}

fn status_word(sys: &LpSystem) -> Result<String> {
    if let PresolveOutcome::ProvedInfeasible { .. } = presolve(sys) {
        return Ok("infeasible (presolve)".into());
    }
    Ok(feasibility_word(feasible_exact(sys)?))
}

/// The C = 5 system with `P(A_0) = P(B_0) = 1` and `P(A_1) = P(B_1) = 1/2`.
pub fn five_with_half_bits() -> Result<LpSystem> {
    let spec = FactoringSpec::from_u64(5)?;
    let layout = spec.layout();
    let mut sys = build_factoring(&spec)?;
    for (var, value) in [
        (MultiplicationVar::A(0), int(1)),
        (MultiplicationVar::B(0), int(1)),
        (MultiplicationVar::A(1), rational(1, 2)),
        (MultiplicationVar::B(1), rational(1, 2)),
    ] {
        sys.fix(Requirement::single(layout.index(var)?.positive()), value);
    }
    Ok(sys)
}

fn counts_text(c: &SystemCounts) -> String {
    format!(
        "unknowns={} positive={} structural={} universal={} equations={}",
        c.unknowns, c.positive_unknowns, c.structural, c.universal, c.equations
    )
}

/// Built systems against the closed forms, over a grid of sizes.
fn count_grid_addition() -> Result<String> {
    let mut bad = Vec::new();
    for n in 2..=16u32 {
        let built = addition_system(n, None, None, None)?.counts();
        let formula = SystemCounts {
            unknowns: 28 * n as u64 - 16,
            positive_unknowns: 8 * n as u64 - 3,
            structural: 2 * n as u64,
            universal: 28 * n as u64 - 20,
            equations: 30 * n as u64 - 20,
            ..SystemCounts::default()
        };
        if built != formula {
            bad.push(format!("n={n}: {}", counts_text(&built)));
        }
    }
    Ok(if bad.is_empty() { "all n in [2,16] agree".into() } else { bad.join("; ") })
}

fn count_grid_multiplication(max: u32) -> Result<String> {
    let mut bad = Vec::new();
    for n in 2..=max {
        for m in 2..=max {
            let (n64, m64) = (n as i64, m as i64);
            let built = crate::multiplication::build_multiplication(&MultiplicationSpec::new(n, m)?)?.counts();
            let expect = [
                30 * m64 * n64 - 14 * m64 - 22 * n64,
                8 * m64 * n64 - 2 * m64 - 5 * n64,
                3 * m64 * n64 - 2 * n64,
                31 * m64 * n64 - 19 * m64 - 25 * n64,
            ];
            let got = [built.unknowns, built.positive_unknowns, built.structural, built.universal].map(|v| v as i64);
            if got != expect {
                bad.push(format!("n={n} m={m}: {}", counts_text(&built)));
            }
            let shifted = shifted_counts(n, m);
            let expect = [
                26 * m64 * n64 - 16 * m64 - 24 * n64,
                7 * m64 * n64 - 3 * m64 - 6 * n64,
                2 * n64 * (m64 - 1),
                27 * m64 * n64 - 20 * m64 - 24 * n64,
            ];
            let got = [shifted.unknowns, shifted.positive_unknowns, shifted.structural, shifted.universal]
                .map(|v| v as i64);
            if got != expect {
                bad.push(format!("shifted n={n} m={m}: {}", counts_text(&shifted)));
            }
        }
    }
    Ok(if bad.is_empty() {
        format!("all (n,m) in [2,{max}]^2 agree")
    } else {
        bad.join("; ")
    })
}

/// The shifted-addition equations exactly as printed, for `n >= 3`, `m >= 3`,
/// written as `(lhs, [signed literal triples or pairs])`.
fn printed_shifted_equations(n: i64, m: i64) -> Vec<(i64, Vec<Vec<i64>>)> {
    let mut out = Vec::new();
    out.push((2 * n + 1, vec![vec![-2, n + 1], vec![2, -n - 1]]));
    out.push((3 * n + 1, vec![vec![2, n + 1]]));
    for i in 2..n {
        out.push((
            2 * n + i,
            vec![
                vec![i + 1, -i - n, -i - 3 * n + 1],
                vec![-i - 1, i + n, -i - 3 * n + 1],
                vec![-i - 1, -i - n, i + 3 * n - 1],
                vec![i + 1, i + n, i + 3 * n - 1],
            ],
        ));
        out.push((
            3 * n + i,
            vec![
                vec![i + 1, i + n, -i - 3 * n + 1],
                vec![-i - 1, i + n, i + 3 * n - 1],
                vec![i + 1, -i - n, i + 3 * n - 1],
                vec![i + 1, i + n, i + 3 * n - 1],
            ],
        ));
    }
    out.push((3 * n, vec![vec![2 * n, -4 * n + 1], vec![-2 * n, 4 * n - 1]]));
    out.push((4 * n, vec![vec![2 * n, 4 * n - 1]]));
    for t in 2..m {
        let k = 3 * n * t;
        out.push((k - n + 1, vec![vec![k - 4 * n + 2, -k + 2 * n - 1], vec![-k + 4 * n - 2, k - 2 * n + 1]]));
        out.push((k + 1, vec![vec![k - 4 * n + 2, k - 2 * n + 1]]));
        for i in 2..n {
            out.push((
                k - n + i,
                vec![
                    vec![-k + 4 * n - i - 1, -k + 2 * n - i, k + i - 1],
                    vec![-k + 4 * n - i - 1, k - 2 * n + i, -k - i + 1],
                    vec![k - 4 * n + i + 1, -k + 2 * n - i, -k - i + 1],
                    vec![k - 4 * n + i + 1, k - 2 * n + i, k + i - 1],
                ],
            ));
            out.push((
                k + i,
                vec![
                    vec![k - 4 * n + i + 1, k - 2 * n + i, -k - i + 1],
                    vec![k - 4 * n + i + 1, -k + 2 * n - i, k + i - 1],
                    vec![-k + 4 * n - i - 1, k - 2 * n + i, k + i - 1],
                    vec![k - 4 * n + i + 1, k - 2 * n + i, k + i - 1],
                ],
            ));
        }
        out.push((
            k,
            vec![
                vec![-k + 2 * n, -k + n, k + n - 1],
                vec![-k + 2 * n, k - n, -k - n + 1],
                vec![k - 2 * n, -k + n, -k - n + 1],
                vec![k - 2 * n, k - n, k + n - 1],
            ],
        ));
        out.push((
            k + n,
            vec![
                vec![k - 2 * n, k - n, -k - n + 1],
                vec![k - 2 * n, -k + n, k + n - 1],
                vec![-k + 2 * n, k - n, k + n - 1],
                vec![k - 2 * n, k - n, k + n - 1],
            ],
        ));
    }
    out
}

fn requirement_of(signed: &[i64]) -> Result<Requirement> {
    let lits = signed.iter().map(|&k| Literal::from_signed(k)).collect::<Result<Vec<_>>>()?;
    Requirement::new(&lits)
}

/// Set form of an equation `P(lhs) = sum P(terms)`, order-insensitive.
fn equation_key(eq: &Equation) -> (Requirement, BTreeSet<Requirement>) {
    let lhs = eq.lhs();
    let parts = eq.terms.iter().filter(|(c, _)| *c < 0).map(|(_, r)| *r).collect();
    (lhs, parts)
}

fn printed_key(lhs: i64, terms: &[Vec<i64>]) -> Result<(Requirement, BTreeSet<Requirement>)> {
    Ok((
        requirement_of(&[lhs])?,
        terms.iter().map(|t| requirement_of(t)).collect::<Result<_>>()?,
    ))
}

fn compare_printed_shifted() -> Result<String> {
    let mut mismatched = 0;
    let mut total = 0;
    for n in 3..=6u32 {
        for m in 3..=5u32 {
            let generated: BTreeSet<_> = shifted_structural(n, m)?.iter().map(equation_key).collect();
            for (lhs, terms) in printed_shifted_equations(n as i64, m as i64) {
                total += 1;
                if !generated.contains(&printed_key(lhs, &terms)?) {
                    mismatched += 1;
                }
            }
        }
    }
    Ok(format!("{mismatched} of {total} printed equations differ"))
}

/// The product equations as printed: `P(i) = P(i+3nm-2n+1 ; 3nm-n+m+3)` for
/// `t = 0` and `P(n(3t-2)+i-t+1) = P(i+3nm-2n+1 ; t+3nm-n+m+3)` otherwise.
fn compare_printed_product(n: u32, m: u32) -> Result<(usize, usize)> {
    let (ni, mi) = (n as i64, m as i64);
    let generated: BTreeSet<_> = product_structural(n, m)?.iter().map(equation_key).collect();
    let mut mismatched = 0;
    let mut total = 0;
    for t in 0..mi {
        for i in 0..ni {
            let (lhs, b) = if t == 0 {
                (i, 3 * ni * mi - ni + mi + 3)
            } else {
                (ni * (3 * t - 2) + i - t + 1, t + 3 * ni * mi - ni + mi + 3)
            };
            let a = i + 3 * ni * mi - 2 * ni + 1;
            total += 1;
            let key = match (requirement_of(&[lhs]), requirement_of(&[a, b])) {
                (Ok(l), Ok(r)) => Some((l, BTreeSet::from([r]))),
                _ => None,
            };
            if key.is_none_or(|k| !generated.contains(&k)) {
                mismatched += 1;
            }
        }
    }
    Ok((mismatched, total))
}

fn equation_text(eqs: &[Equation], lhs: u32) -> Result<String> {
    let target = Requirement::single(GlobalIndex::new(lhs)?.positive());
    Ok(eqs
        .iter()
        .find(|e| e.lhs() == target)
        .map(|e| e.to_string())
        .unwrap_or_else(|| "absent".into()))
}

fn label_claims(l: &mut Ledger) {
    let add2 = AdditionLayout::new(2);
    let mul23 = MultiplicationLayout::new(2, 3);
    let loc_add = "addition environment, global variable labeling and the n=2 layout";
    let loc_mul = "multiplication environment, n=2 m=3 layout";
    let idx = |r: Result<GlobalIndex>| r.map(|k| k.get().to_string());
    l.stated("label.add.s0", loc_add, "S_0 for n=2 is X_5", 5, idx(add2.as_ref().map_err(clone_err).and_then(|a| a.index(AdditionVar::S(0)))));
    l.stated("label.add.sn", loc_add, "S_n = R_n merge for n=2 is X_8", 8, idx(add2.as_ref().map_err(clone_err).and_then(|a| a.index(AdditionVar::S(2)))));
    let mv = |v: MultiplicationVar| idx(mul23.as_ref().map_err(clone_err).and_then(|a| a.index(v)));
    l.stated("label.mul.u12", loc_mul, "U_{1,2} is X_4", 4, mv(MultiplicationVar::U { t: 1, i: 2 }));
    l.stated("label.mul.r24", loc_mul, "R_{2,4} is X_14", 14, mv(MultiplicationVar::R { t: 2, i: 4 }));
    l.stated("label.mul.s11", loc_mul, "S_{1,1} is X_5", 5, mv(MultiplicationVar::S { t: 1, i: 1 }));
    l.stated("label.mul.a0", loc_mul, "A_0 is X_15", 15, mv(MultiplicationVar::A(0)));
    l.stated("label.mul.b2", loc_mul, "B_2 is X_19", 19, mv(MultiplicationVar::B(2)));
    let pb = |j: u32| idx(mul23.as_ref().map_err(clone_err).and_then(|a| a.product_bit(j)));
    l.stated("label.mul.c2", loc_mul, "C_2 is X_11", 11, pb(2));
    l.stated("label.mul.c4", loc_mul, "C_4 is X_14", 14, pb(4));
}

fn clone_err(e: &crate::error::Error) -> crate::error::Error {
    crate::error::Error::EncodingAnomaly(e.to_string())
}

fn count_claims(l: &mut Ledger) {
    let loc = "addition environment, relevant unknowns and universal equations";
    let c2 = addition_counts(2, 4);
    l.stated("count.add.n2.unknowns", loc, "n=2 has 28n-16 relevant unknowns", 40, Ok(c2.unknowns.to_string()));
    l.stated(
        "count.add.n2.positive",
        loc,
        "n=2 has 8n-3 positive relevant unknowns",
        13,
        addition_positive_unknowns(2).map(|p| p.len().to_string()),
    );
    l.stated("count.add.n2.universal", loc, "n=2 has 28n-20 universal equations", 36, Ok(c2.universal.to_string()));
    l.stated(
        "count.add.n2.equations",
        "addition environment, two-bit example",
        "2+3 on two bits gives 40 unknowns and 44 equations",
        pair(40, 44),
        addition_system(2, Some(2), Some(3), None).map(|s| pair(s.num_unknowns(), s.constraints().len())),
    );
    l.stated(
        "count.add.n1.example",
        "addition environment, one-bit example",
        "0+1 on one bit gives 12 unknowns and 12 equations",
        pair(12, 12),
        addition_system(1, Some(0), Some(1), None).map(|s| pair(s.num_unknowns(), s.constraints().len())),
    );
    l.stated(
        "count.add.n1.subtraction",
        "addition environment, subtraction example",
        "S=0, U=1 on one bit gives 12 unknowns and 13 equations",
        pair(12, 13),
        addition_system(1, Some(1), None, Some(0)).map(|s| pair(s.num_unknowns(), s.constraints().len())),
    );
    l.stated(
        "count.add.formulas",
        "addition environment, totals of the unknown and universal tables",
        "unknowns 28n-16, positive 8n-3, structural 2n, universal 28n-20 for n in [2,16]",
        "all n in [2,16] agree",
        count_grid_addition(),
    );
    l.stated(
        "count.add.structural.n2",
        "addition environment, two-bit structural equations",
        "the carry out of bit 0 is P(7) = P(1;3)",
        "P(7) -P(1;3) = 0",
        addition_structural(2).and_then(|e| equation_text(&e, 7)),
    );
    l.stated(
        "count.add.universal.triple",
        "addition environment, universal equations of a three-literal unknown",
        "(2;4;7) generates 12 universal equations",
        12,
        requirement_of(&[2, 4, 7]).and_then(|r| universal_equations(&[r])).map(|e| e.len().to_string()),
    );

    let loc = "shifted addition, positive unknowns and universal equations";
    l.stated(
        "count.shifted.n2m3.positive",
        loc,
        "n=2, m=3 has 7mn-3m-6n = 21 positive unknowns",
        21,
        shifted_positive_unknowns(2, 3).map(|p| p.len().to_string()),
    );
    l.stated(
        "count.shifted.n2m3.universal",
        loc,
        "n=2, m=3 has 27mn-20m-24n = 54 universal equations",
        54,
        Ok(shifted_counts(2, 3).universal.to_string()),
    );
    l.stated(
        "count.shifted.n2m3.structural",
        "shifted addition, n=2 m=3 structural equations",
        "the last carry equation is P(13) = P(6;9)",
        "P(13) -P(6;9) = 0",
        shifted_structural(2, 3).and_then(|e| equation_text(&e, 13)),
    );
    l.stated(
        "count.shifted.n2m3.sum",
        "shifted addition, n=2 m=3 structural equations",
        "P(12) is the four-term sum over {8, 10, 13}",
        "P(12) -P(-8;-10;13) -P(-8;10;-13) -P(8;-10;-13) -P(8;10;13) = 0",
        shifted_structural(2, 3).and_then(|e| equation_text(&e, 12)),
    );
    l.stated(
        "count.shifted.printed",
        "shifted addition, general structural equation table",
        "the printed equation families coincide with the generated ones for n in [3,6], m in [3,5]",
        "0 of 324 printed equations differ",
        compare_printed_shifted(),
    );

    let loc = "multiplication environment, totals";
    l.stated(
        "count.mul.n2m3.positive",
        loc,
        "n=2, m=3 has 32 positive unknowns, 11 of them new",
        pair(32, 11),
        multiplication_positive_unknowns(2, 3).and_then(|all| {
            let shifted = shifted_positive_unknowns(2, 3)?;
            Ok(pair(all.len(), all.len() - shifted.len()))
        }),
    );
    l.stated(
        "count.mul.n2m3.product",
        "multiplication environment, n=2 m=3 product equations",
        "the first product equation is P(1) = P(15;17)",
        "P(1) -P(15;17) = 0",
        product_structural(2, 3).and_then(|e| equation_text(&e, 1)),
    );
    l.stated(
        "count.mul.formulas",
        loc,
        "unknowns 30mn-14m-22n, positive 8mn-2m-5n, structural 3mn-2n, universal 31mn-19m-25n and the shifted-only counts, for (n,m) in [2,12]^2",
        "all (n,m) in [2,12]^2 agree",
        count_grid_multiplication(12),
    );
    let six = factoring_counts(3);
    l.stated(
        "count.factor.c6",
        "factoring, first example",
        "C=6 gives 48 unknowns and 48 equations",
        pair(48, 48),
        FactoringSpec::from_u64(6)
            .and_then(|s| build_factoring(&s))
            .map(|s| pair(s.num_unknowns(), s.constraints().len())),
    );
    l.stated(
        "count.factor.c6.formula",
        "factoring, first example",
        "the closed forms agree with the built C=6 system",
        pair(48, 48),
        six.map(|c| pair(c.unknowns, c.equations)),
    );
    l.stated(
        "count.factor.768",
        "factoring, 768-bit example",
        "n=767, m=384 gives 8,813,590 unknowns and 9,987,098 equations",
        pair(8_813_590, 9_987_098),
        factoring_counts(768).map(|c| pair(c.unknowns, c.equations)),
    );
    l.stated(
        "count.factor.1024",
        "factoring, 1024-bit example",
        "n=1023, m=512 gives 15,683,606 unknowns and 17,772,570 equations",
        pair(15_683_606, 17_772_570),
        factoring_counts(1024).map(|c| pair(c.unknowns, c.equations)),
    );
    l.stated(
        "count.factor.2048",
        "factoring, 2048-bit example",
        "the rough system is about 63e6 x 71e6",
        "63e6 x 71e6",
        factoring_counts(2048).map(|c| {
            let round = |v: u64| (v as f64 / 1e6).round() as u64;
            format!("{}e6 x {}e6", round(c.unknowns), round(c.equations))
        }),
    );
    l.stated(
        "count.factor.equations",
        "factoring, totals",
        "the factoring system has 34mn-18m-26n equations (n=767, m=384)",
        34 * 767 * 384 - 18 * 384 - 26 * 767,
        Ok(multiplication_counts(767, 384, 767 + 384).equations.to_string()),
    );
}

fn typo_claims(l: &mut Ledger) {
    match compare_printed_product(2, 3) {
        Ok((bad, total)) => l.typo(
            "typo.product.indices",
            "multiplication environment, complementary structural equation table",
            "printed product equations P(i) = P(i+3nm-2n+1 ; 3nm-n+m+3) and P(n(3t-2)+i-t+1) = P(i+3nm-2n+1 ; t+3nm-n+m+3)",
            "B index t+3nm-n+m+3",
            format!("{bad} of {total} printed equations differ for n=2, m=3; generated B index t+3nm-n+1"),
            "B label table and the worked layout give B_t = X_{t+3nm-n+1} and U_{0,i} = X_{i+1}",
        ),
        Err(e) => l.stated("typo.product.indices", "", "", "", Err(e)),
    }
    let (n, m) = (5i64, 4i64);
    let universal = multiplication_counts(n as u32, m as u32, 0).universal as i64;
    l.typo(
        "typo.universal.total",
        "multiplication environment, positive unknown table total",
        "universal equation total printed as 31mn-19m-25",
        &(31 * m * n - 19 * m - 25).to_string(),
        format!("{universal} at n=5, m=4 (31mn-19m-25n)"),
        "the term-by-term sum in the same paragraph yields 31mn-19m-25n",
    );
    let unknowns = multiplication_counts(n as u32, m as u32, 0).unknowns as i64;
    l.typo(
        "typo.factor.unknowns",
        "factoring, system size",
        "factoring unknown count printed as 30mn-14m-22",
        &(30 * m * n - 14 * m - 22).to_string(),
        format!("{unknowns} at n=5, m=4 (30mn-14m-22n)"),
        "the summary table and the 768-bit example use 30mn-14m-22n",
    );
}

fn sparsity_claims(l: &mut Ledger) {
    let sys = FactoringSpec::from_u64(255).and_then(|s| build_factoring(&s));
    l.stated(
        "sparsity.rows",
        "factoring, system size and the 768/1024-bit examples",
        "rows have at most 3 nonzero coefficients, 2 on average (measured at C=255)",
        "max 3, average 2.00",
        sys.map(|s| format!("max {}, average {:.2}", s.max_row_nonzeros(), s.average_row_nonzeros())),
    );
}

fn solver_claims(l: &mut Ledger, config: &VerifyConfig) {
    let stated = Provenance::Stated;
    let derived = Provenance::Derived;

    l.solver("rank.add.n1", "addition environment, one-bit example", "rank of the rough 0+1 system", 11, stated, || {
        Ok(rough_rank(&addition_system(1, Some(0), Some(1), None)?).to_string())
    });
    l.solver(
        "rank.add.n1.presolved",
        "addition environment, one-bit example",
        "rank after the product rule",
        8,
        stated,
        || Ok(presolved_rank(&addition_system(1, Some(0), Some(1), None)?)),
    );
    l.solver(
        "presolve.add.n1.multi",
        "addition environment, one-bit example",
        "the four unknowns with more than one literal become irrelevant",
        "0 free multi-literal unknowns",
        stated,
        || {
            let sys = addition_system(1, Some(0), Some(1), None)?;
            Ok(match presolve(&sys) {
                PresolveOutcome::Reduced { reduction, .. } => {
                    let free = reduction
                        .map
                        .iter()
                        .enumerate()
                        .filter(|(id, s)| matches!(s, Slot::Free(_)) && sys.label(*id).is_some_and(|r| r.len() > 1))
                        .count();
                    format!("{free} free multi-literal unknowns")
                }
                PresolveOutcome::ProvedInfeasible { .. } => "infeasible".into(),
            })
        },
    );
    l.solver("example.add.n1", "addition environment, one-bit example", "0+1 has the deterministic solution S=1", "S=1", stated, || {
        determined_sum(&addition_system(1, Some(0), Some(1), None)?, 1)
    });
    l.solver("rank.add.n2", "addition environment, two-bit example", "rank of the rough 2+3 system", 35, stated, || {
        Ok(rough_rank(&addition_system(2, Some(2), Some(3), None)?).to_string())
    });
    l.solver(
        "rank.add.n2.presolved",
        "addition environment, two-bit example",
        "rank after the product rule is 8n",
        16,
        stated,
        || Ok(presolved_rank(&addition_system(2, Some(2), Some(3), None)?)),
    );
    l.solver("example.add.n2", "addition environment, two-bit example", "2+3 is feasible with S=5", "S=5", stated, || {
        determined_sum(&addition_system(2, Some(2), Some(3), None)?, 2)
    });
    l.solver(
        "example.add.trivial",
        "addition environment, two-bit example",
        "the system is trivial once the product rule is applied (checked for every input pair, n <= 3)",
        "all presolved systems have no free unknown",
        stated,
        || {
            let mut open = Vec::new();
            for n in 1..=3u32 {
                for u in 0..1u64 << n {
                    for v in 0..1u64 << n {
                        let sys = addition_system(n, Some(u), Some(v), None)?;
                        if let PresolveOutcome::Reduced { reduction, .. } = presolve(&sys) {
                            if reduction.system.num_unknowns() > 0 {
                                open.push(format!("n={n} {u}+{v}"));
                            }
                        }
                    }
                }
            }
            Ok(if open.is_empty() {
                "all presolved systems have no free unknown".into()
            } else {
                format!("{} systems keep free unknowns, e.g. {}", open.len(), open[0])
            })
        },
    );
    l.solver(
        "example.add.subtraction",
        "addition environment, subtraction example",
        "S=0, U=1 is infeasible",
        "infeasible",
        stated,
        || {
            let sys = addition_system(1, Some(1), None, Some(0))?;
            Ok(feasibility_word(feasible_exact(&sys)?))
        },
    );
    l.solver(
        "example.add.subtraction.linear",
        "addition environment, subtraction example",
        "the equality system has rank 12 and the single solution has P(-2) = 2",
        "rank 12, P(-2)=2",
        stated,
        || {
            let sys = addition_system(1, Some(1), None, Some(0))?;
            let r = rough_rank(&sys);
            let id = sys.unknown_id(&requirement_of(&[-2])?);
            Ok(match (solve_linear(&sys), id) {
                (LinearSolution::Unique(x), Some(id)) => format!("rank {r}, P(-2)={}", x[id]),
                (other, _) => format!("rank {r}, {other:?}"),
            })
        },
    );
    l.solver(
        "oracle.add.lift",
        "addition environment, deterministic solutions",
        "every grade-school assignment for n <= 3 lifts to an exactly feasible point",
        "all lifted points feasible",
        derived,
        || {
            let mut bad = 0;
            for n in 1..=3u32 {
                let rough = addition_system(n, None, None, None)?;
                for a in enumerate_addition(n, &[])? {
                    if !rough.is_satisfied_by(&lift(&a, &rough)?) {
                        bad += 1;
                    }
                }
            }
            Ok(if bad == 0 { "all lifted points feasible".into() } else { format!("{bad} lifted points violate") })
        },
    );

    let six = || FactoringSpec::from_u64(6).and_then(|s| build_factoring(&s));
    let five = || FactoringSpec::from_u64(5).and_then(|s| build_factoring(&s));
    l.solver("rank.factor.c6", "factoring, first example", "rank of the C=6 system", 42, stated, || {
        Ok(rough_rank(&six()?).to_string())
    });
    l.solver("rank.factor.c5", "factoring, second example", "rank of the C=5 system", 42, stated, || {
        Ok(rough_rank(&five()?).to_string())
    });
    l.solver(
        "example.factor.c6.vertices",
        "factoring, first example",
        "the deterministic solutions are (A=2, B=3) and (A=3, B=2)",
        "(2,3) (3,2)",
        stated,
        || {
            let v = vertex_factor_check(6, 48, 200_000, 64, 6)?;
            Ok(v.factor_pairs.iter().map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join(" "))
        },
    );
    l.solver(
        "example.factor.c6.fractional",
        "factoring, first example",
        "there is also a continuous set of non-deterministic solutions",
        "fractional points exist (2 vertices, 2 integral)",
        stated,
        || {
            let v = vertex_factor_check(6, 48, 200_000, 64, 6)?;
            // Distinct 0/1 vertices have a fractional midpoint.
            Ok(if v.vertices > v.integral_vertices || v.vertices >= 2 {
                format!("fractional points exist ({} vertices, {} integral)", v.vertices, v.integral_vertices)
            } else {
                format!("{} vertices, all integral", v.vertices)
            })
        },
    );
    l.solver(
        "example.factor.c6",
        "factoring, procedure",
        "the bit-fixing procedure factors 6",
        "2 x 3",
        stated,
        || {
            Ok(match factor_u64(6, &config.factor)?.status {
                FactorStatus::Composite { a, b } => {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    format!("{lo} x {hi}")
                }
                other => other.label().to_string(),
            })
        },
    );
    l.solver(
        "example.factor.c5.feasible",
        "factoring, second example",
        "the C=5 system is feasible",
        "feasible",
        stated,
        || Ok(feasibility_word(feasible_exact(&five()?)?)),
    );
    l.solver(
        "example.factor.c5.deterministic",
        "factoring, second example",
        "the C=5 system has no deterministic solution with nontrivial factors",
        "no integral factor pair",
        stated,
        || {
            let v = vertex_factor_check(5, 48, 200_000, 64, 5)?;
            Ok(if v.factor_pairs.is_empty() {
                "no integral factor pair".into()
            } else {
                format!("{:?}", v.factor_pairs)
            })
        },
    );
    l.solver(
        "example.factor.c5.half",
        "factoring, second example",
        "P(A_0)=P(B_0)=1 with P(A_1)=P(B_1)=1/2 is feasible",
        "feasible",
        stated,
        || Ok(feasibility_word(feasible_exact(&five_with_half_bits()?)?)),
    );
    l.solver(
        "example.factor.c5.procedure",
        "factoring, procedure",
        "the procedure does not factor the prime 5",
        "not factored",
        stated,
        || {
            Ok(match factor_u64(5, &config.factor)?.status {
                FactorStatus::Composite { a, b } => format!("{a} x {b}"),
                _ => "not factored".into(),
            })
        },
    );
    l.solver(
        "agreement.float",
        "floating-point cross-check",
        "floating-point phase I reaches the exact feasibility status on the small instances",
        "all agree",
        derived,
        || {
            let mut systems = vec![
                addition_system(1, Some(0), Some(1), None)?,
                addition_system(2, Some(2), Some(3), None)?,
                addition_system(1, Some(1), None, Some(0))?,
                six()?,
                five()?,
                five_with_half_bits()?,
            ];
            for n in 1..=3u32 {
                for u in 0..1u64 << n {
                    for v in 0..1u64 << n {
                        systems.push(addition_system(n, Some(u), Some(v), None)?);
                    }
                }
            }
            let mut differ = 0;
            for s in &systems {
                if feasible_exact(s)? != feasible_float(s)? {
                    differ += 1;
                }
            }
            Ok(if differ == 0 { "all agree".into() } else { format!("{differ} of {} differ", systems.len()) })
        },
    );
    l.solver(
        "status.add.examples",
        "addition environment, examples",
        "feasibility of the one-bit, two-bit and subtraction examples",
        "feasible / feasible / infeasible (presolve)",
        stated,
        || {
            Ok(format!(
                "{} / {} / {}",
                status_word(&addition_system(1, Some(0), Some(1), None)?)?,
                status_word(&addition_system(2, Some(2), Some(3), None)?)?,
                status_word(&addition_system(1, Some(1), None, Some(0))?)?
            ))
        },
    );

    if config.sweep_hi >= 4 {
        let hi = config.sweep_hi;
        let report = if l.count_only { None } else { Some(sweep(4, hi, &config.factor, config.jobs.max(1))) };
        let claim = format!("the procedure factors every composite in [4,{hi}] and reports every prime");
        l.solver(
            "sweep.confusion",
            "factoring, procedure",
            &claim,
            "missed=0 discrepancies=0 misfactored=0",
            stated,
            || {
                let r = report.as_ref().expect("sweep ran").as_ref().map_err(clone_err)?;
                let c = r.confusion;
                Ok(format!(
                    "missed={} discrepancies={} misfactored={}",
                    c.composite_missed,
                    c.discrepancies(),
                    c.prime_misfactored
                ))
            },
        );
        l.solver(
            "sweep.objectives",
            "factoring, procedure",
            "at most 2m objective functions per number",
            "all within 2m",
            stated,
            || {
                let r = report.as_ref().expect("sweep ran").as_ref().map_err(clone_err)?;
                let over: Vec<u64> = r
                    .rows
                    .iter()
                    .filter(|row| {
                        FactoringSpec::from_u64(row.c).is_ok_and(|s| row.objectives_evaluated > 2 * s.m as usize)
                    })
                    .map(|row| row.c)
                    .collect();
                Ok(if over.is_empty() { "all within 2m".into() } else { format!("over for {over:?}") })
            },
        );
    }
}

/// Runs the whole claim suite.
pub fn verify_all(config: &VerifyConfig) -> Vec<ClaimRecord> {
    let mut l = Ledger {
        records: Vec::new(),
        count_only: config.count_only,
    };
    label_claims(&mut l);
    count_claims(&mut l);
    typo_claims(&mut l);
    sparsity_claims(&mut l);
    solver_claims(&mut l, config);
    l.records
}

/// Records serialized one per line.
pub fn to_json_lines(records: &[ClaimRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VerdictTally {
    pub matched: usize,
    pub mismatched: usize,
    pub suspected_typos: usize,
    pub not_run: usize,
}

pub fn tally(records: &[ClaimRecord]) -> VerdictTally {
    let mut t = VerdictTally::default();
    for r in records {
        match r.verdict {
            Verdict::Match => t.matched += 1,
            Verdict::Mismatch => t.mismatched += 1,
            Verdict::SuspectedTypo => t.suspected_typos += 1,
            Verdict::NotRun => t.not_run += 1,
        }
    }
    t
}

/// Fixed-width table of id, verdict, expected and observed.
pub fn summary_table(records: &[ClaimRecord]) -> String {
    let width = records.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:<14}  {:<28}  observed", "id", "verdict", "expected");
    for r in records {
        let _ = writeln!(
            out,
            "{:<width$}  {:<14}  {:<28}  {}",
            r.id,
            r.verdict.label(),
            r.expected,
            r.observed
        );
    }
    let t = tally(records);
    let _ = writeln!(
        out,
        "{} match, {} mismatch, {} suspected typo, {} not run",
        t.matched, t.mismatched, t.suspected_typos, t.not_run
    );
    out
}

/// `C` as a [`BigUint`] for callers holding a decimal string.
pub fn parse_biguint(s: &str) -> Option<BigUint> {
    s.trim().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find<'a>(records: &'a [ClaimRecord], id: &str) -> &'a ClaimRecord {
        records.iter().find(|r| r.id == id).unwrap_or_else(|| panic!("missing {id}"))
    }

    #[test]
    fn count_only_marks_solver_claims() {
        let records = verify_all(&VerifyConfig {
            count_only: true,
            ..VerifyConfig::default()
        });
        assert_eq!(find(&records, "count.add.n2.unknowns").verdict, Verdict::Match);
        assert_eq!(find(&records, "rank.factor.c6").verdict, Verdict::NotRun);
        assert_eq!(find(&records, "typo.universal.total").verdict, Verdict::SuspectedTypo);
        assert_eq!(find(&records, "sparsity.rows").verdict, Verdict::Mismatch);
        for r in &records {
            if r.provenance == Provenance::Stated && r.id.starts_with("count.") {
                assert_eq!(r.verdict, Verdict::Match, "{r:?}");
            }
        }
    }

    #[test]
    fn printed_shifted_table_is_consistent() {
        assert_eq!(compare_printed_shifted().unwrap(), "0 of 324 printed equations differ");
        let (bad, total) = compare_printed_product(2, 3).unwrap();
        assert_eq!(total, 6);
        assert_eq!(bad, 6);
    }

    #[test]
    fn json_lines_round_trip_shape() {
        let records = verify_all(&VerifyConfig {
            count_only: true,
            sweep_hi: 0,
            ..VerifyConfig::default()
        });
        let text = to_json_lines(&records);
        assert_eq!(text.lines().count(), records.len());
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert!(first.get("verdict").is_some());
        assert!(summary_table(&records).contains("not run"));
    }
}
