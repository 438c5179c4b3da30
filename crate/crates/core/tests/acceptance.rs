//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

use std::fs::File;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use bayes_arith::addition::{build_addition, AdditionSpec};
use bayes_arith::cli::{sweep_exit_code, EXIT_DISCREPANCY, EXIT_OK};
use bayes_arith::factor::{factor_u64, sweep, Arithmetic, FactorOptions, FactorStatus};
use bayes_arith::lp::{
    enumerate_vertices, int, rank, rational, ExactRational, LpSolver, NativeStreamWriter, Objective, RankMethod,
    Rational, SimplexOptions,
};
use bayes_arith::model::{AdditionLayout, AdditionVar, MultiplicationVar, Requirement};
use bayes_arith::multiplication::{
    build_factoring, build_multiplication, factoring_counts, for_each_multiplication_equation, FactoringSpec,
    MultiplicationSpec,
};
use bayes_arith::oracle::{enumerate_addition, lift, trial_division, Primality};
use bayes_arith::presolve::{presolve, PresolveOutcome};
use bayes_arith::system::{Environment, LpSystem};

/// Pinned limits.
const COUNT_LIMIT: Duration = Duration::from_secs(10);
const STREAM_768_LIMIT: Duration = Duration::from_secs(300);
const RANK_LIMIT: Duration = Duration::from_secs(10);
const SWEEP_LIMIT: Duration = Duration::from_secs(30 * 60);
/// Float feasibility tolerance under test.
const FLOAT_TOLERANCE: f64 = 1e-9;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn addition(n: u32, u: Option<u64>, v: Option<u64>, s: Option<u64>) -> Result<LpSystem, String> {
    let mut spec = AdditionSpec::new(n).map_err(e)?;
    if let Some(u) = u {
        spec.with_u(u).map_err(e)?;
    }
    if let Some(v) = v {
        spec.with_v(v).map_err(e)?;
    }
    if let Some(s) = s {
        spec.with_s(s).map_err(e)?;
    }
    build_addition(&spec).map_err(e)
}

fn factoring(c: u64) -> Result<LpSystem, String> {
    build_factoring(&FactoringSpec::from_u64(c).map_err(e)?).map_err(e)
}

fn feasible_exact(sys: &LpSystem) -> Result<bool, String> {
    Ok(LpSolver::<ExactRational>::new(sys, SimplexOptions::default()).map_err(e)?.is_feasible())
}

fn feasible_float(sys: &LpSystem) -> Result<bool, String> {
    Ok(LpSolver::<f64>::new(sys, SimplexOptions::default()).map_err(e)?.is_feasible())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    for n in 2..=16u32 {
        let c = addition(n, None, None, None)?.counts();
        let n = n as u64;
        check(
            (c.unknowns, c.positive_unknowns, c.structural, c.universal) == (28 * n - 16, 8 * n - 3, 2 * n, 28 * n - 20),
            format!("addition n={n}: {c:?}"),
        )?;
    }
    for n in 2..=12u32 {
        for m in 2..=12u32 {
            let c = build_multiplication(&MultiplicationSpec::new(n, m).map_err(e)?).map_err(e)?.counts();
            let (n, m) = (n as u64, m as u64);
            check(
                (c.unknowns, c.structural, c.universal)
                    == (30 * m * n - 14 * m - 22 * n, 3 * m * n - 2 * n, 31 * m * n - 19 * m - 25 * n),
                format!("multiplication n={n} m={m}: {c:?}"),
            )?;
        }
    }
    let t = start.elapsed();
    check(t < COUNT_LIMIT, format!("took {t:?}"))?;
    Ok(format!("15 addition and 121 multiplication sizes exact in {:.2}s", t.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let c768 = factoring_counts(768).map_err(e)?;
    let c1024 = factoring_counts(1024).map_err(e)?;
    check((c768.unknowns, c768.equations) == (8_813_590, 9_987_098), format!("768-bit formula {c768:?}"))?;
    check((c1024.unknowns, c1024.equations) == (15_683_606, 17_772_570), format!("1024-bit formula {c1024:?}"))?;

    let start = Instant::now();
    let mut data = MultiplicationSpec::new(767, 384).map_err(e)?;
    // Fix the product bits so the file carries n+m data equations like the
    // factoring system of a 768-bit integer.
    let c: bayes_arith::BigUint = (bayes_arith::BigUint::from(1u32) << 767u32) + 1u32;
    data.with_c(&c).map_err(e)?;
    let dir = tempfile::tempdir().map_err(e)?;
    let path = dir.path().join("factor768.txt");
    let mut w = NativeStreamWriter::new(File::create(&path).map_err(e)?, Environment::Multiplication { n: 767, m: 384 })
        .map_err(e)?;
    let mut failure = None;
    for_each_multiplication_equation(&data, |eq| {
        if failure.is_none() {
            failure = w.push(&eq).err();
        }
    })
    .map_err(e)?;
    if let Some(f) = failure {
        return Err(f.to_string());
    }
    let streamed = w.finish().map_err(e)?;
    let t = start.elapsed();
    let bytes = std::fs::metadata(&path).map_err(e)?.len();
    check(
        (streamed.unknowns, streamed.equations) == (8_813_590, 9_987_098),
        format!("streamed {streamed:?}"),
    )?;
    check(t < STREAM_768_LIMIT, format!("768-bit encode took {t:?}"))?;
    Ok(format!(
        "formulas exact; 768-bit system streamed to disk ({} MB) in {:.1}s",
        bytes / 1_000_000,
        t.as_secs_f64()
    ))
}

fn presolved_rank(sys: &LpSystem) -> Result<usize, String> {
    match presolve(sys) {
        PresolveOutcome::Reduced { reduction, .. } => Ok(reduction.determined_rank(sys)),
        PresolveOutcome::ProvedInfeasible { conflict, .. } => Err(format!("presolve infeasible: {conflict}")),
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T, String>) -> Result<(T, Duration), String> {
    let start = Instant::now();
    let v = f()?;
    let t = start.elapsed();
    check(t < RANK_LIMIT, format!("took {t:?}"))?;
    Ok((v, t))
}

fn criterion_3() -> Outcome {
    let one = addition(1, Some(0), Some(1), None)?;
    let two = addition(2, Some(2), Some(3), None)?;
    let six = factoring(6)?;
    let (r1, _) = timed(|| Ok(rank(&one, RankMethod::default())))?;
    let (r2, _) = timed(|| Ok(rank(&two, RankMethod::default())))?;
    let (p2, _) = timed(|| presolved_rank(&two))?;
    let (r6, t6) = timed(|| Ok(rank(&six, RankMethod::default())))?;
    check(r1 == 11, format!("n=1 rank {r1}"))?;
    check(r2 == 35, format!("n=2 rank {r2}"))?;
    check(p2 == 16, format!("n=2 presolved rank {p2}"))?;
    check(r6 == 42, format!("C=6 rank {r6}"))?;
    Ok(format!("ranks 11, 35, 16, 42 (C=6 in {:.3}s)", t6.as_secs_f64()))
}

/// `S` read from the range of every output bit over the feasible set; each
/// bit must be pinned to 0 or 1.
fn pinned_sum(sys: &LpSystem, n: u32) -> Result<u64, String> {
    let layout = AdditionLayout::new(n).map_err(e)?;
    let mut solver = LpSolver::<ExactRational>::new(sys, SimplexOptions::default()).map_err(e)?;
    check(solver.is_feasible(), "infeasible")?;
    let mut s = 0;
    for i in 0..=n {
        let lit = layout.index(AdditionVar::S(i)).map_err(e)?.positive();
        let id = sys.unknown_id(&Requirement::single(lit)).ok_or("S bit is not an unknown")?;
        let hi = solver.maximize(&Objective::single(id)).map_err(e)?;
        let lo = solver.maximize(&Objective::new(vec![(id, int(-1))])).map_err(e)?;
        let hi: Rational = hi.objective().ok_or("no optimum")?.clone().into();
        let lo: Rational = lo.objective().ok_or("no optimum")?.clone().into();
        let lo = -lo;
        check(lo == hi && (hi == int(0) || hi == int(1)), format!("S_{i} ranges over [{lo}, {hi}]"))?;
        if hi == int(1) {
            s |= 1 << i;
        }
    }
    Ok(s)
}

fn criterion_4() -> Outcome {
    let s5 = pinned_sum(&addition(2, Some(2), Some(3), None)?, 2)?;
    check(s5 == 5, format!("2+3 gives S={s5}"))?;
    let s1 = pinned_sum(&addition(1, Some(0), Some(1), None)?, 1)?;
    check(s1 == 1, format!("0+1 gives S={s1}"))?;
    let sub = addition(1, Some(1), None, Some(0))?;
    let presolve_says = matches!(presolve(&sub), PresolveOutcome::ProvedInfeasible { .. });
    let simplex_says = !feasible_exact(&sub)?;
    check(presolve_says && simplex_says, format!("subtraction: presolve {presolve_says}, simplex {simplex_says}"))?;
    Ok("S=5 and S=1 pinned integrally; subtraction infeasible by presolve and by simplex".into())
}

fn criterion_5() -> Outcome {
    let options = FactorOptions::default();
    match factor_u64(6, &options).map_err(e)?.status {
        FactorStatus::Composite { a, b } => {
            let mut pair = [a.to_string(), b.to_string()];
            pair.sort();
            check(pair == ["2", "3"], format!("factor(6) gave {pair:?}"))?;
        }
        other => return Err(format!("factor(6) gave {}", other.label())),
    }
    let (mut found, mut missed, mut discrepancies) = (0, 0, 0);
    for c in 4..=64u64 {
        if trial_division(c).map_err(e)? == Primality::Prime {
            continue;
        }
        match factor_u64(c, &options).map_err(e)?.status {
            FactorStatus::Composite { a, b } => {
                let (a, b): (u64, u64) = (a.try_into().map_err(e)?, b.try_into().map_err(e)?);
                check(a > 1 && b > 1 && a * b == c, format!("false factors {a} x {b} for {c}"))?;
                found += 1;
            }
            FactorStatus::Discrepancy { .. } => discrepancies += 1,
            _ => missed += 1,
        }
    }
    for p in [5u64, 7] {
        let status = factor_u64(p, &options).map_err(e)?.status;
        check(!matches!(status, FactorStatus::Composite { .. }), format!("factor({p}) gave {status:?}"))?;
    }
    let half = half_point_system()?;
    check(feasible_exact(&half)?, "C=5 half point infeasible")?;
    Ok(format!(
        "6 = 2 x 3; composites in [4,64]: {found} factored, {missed} not factored, {discrepancies} discrepancies, no false factors; 5 and 7 not factored; C=5 half point feasible"
    ))
}

fn half_point_system() -> Result<LpSystem, String> {
    let spec = FactoringSpec::from_u64(5).map_err(e)?;
    let layout = spec.layout();
    let mut sys = build_factoring(&spec).map_err(e)?;
    for (var, value) in [
        (MultiplicationVar::A(0), int(1)),
        (MultiplicationVar::B(0), int(1)),
        (MultiplicationVar::A(1), rational(1, 2)),
        (MultiplicationVar::B(1), rational(1, 2)),
    ] {
        sys.fix(Requirement::single(layout.index(var).map_err(e)?.positive()), value);
    }
    Ok(sys)
}

fn operand(sys: &LpSystem, point: &[Rational], bits: impl Iterator<Item = bayes_arith::model::GlobalIndex>) -> Result<u64, String> {
    let mut v = 0;
    for (i, k) in bits.enumerate() {
        let id = sys.unknown_id(&Requirement::single(k.positive())).ok_or("operand bit is not an unknown")?;
        if point[id] == int(1) {
            v |= 1 << i;
        }
    }
    Ok(v)
}

fn criterion_6() -> Outcome {
    let mut lifted = 0;
    for n in 1..=3u32 {
        let layout = AdditionLayout::new(n).map_err(e)?;
        let assignments = enumerate_addition(n, &[]).map_err(e)?;
        check(assignments.len() == 1 << (2 * n), format!("n={n}: {} assignments", assignments.len()))?;
        for a in &assignments {
            let read = |var: fn(u32) -> AdditionVar| -> Result<u64, String> {
                let mut v = 0;
                for i in 0..n {
                    if a.get(layout.index(var(i)).map_err(e)?) {
                        v |= 1 << i;
                    }
                }
                Ok(v)
            };
            let (u, v) = (read(AdditionVar::U)?, read(AdditionVar::V)?);
            let sys = addition(n, Some(u), Some(v), None)?;
            let point = lift(a, &sys).map_err(e)?;
            check(sys.is_satisfied_by(&point), format!("n={n} {u}+{v}: lifted point violates {:?}", sys.violations(&point)))?;
            lifted += 1;
        }
    }

    let spec = FactoringSpec::from_u64(6).map_err(e)?;
    let layout = spec.layout();
    let sys = factoring(6)?;
    check(sys.num_unknowns() == 48, format!("C=6 has {} columns", sys.num_unknowns()))?;
    let v = enumerate_vertices(&sys, 1_000_000).map_err(e)?;
    check(v.complete, format!("enumeration stopped after {} bases", v.bases_visited))?;
    let mut integral = 0;
    for p in &v.vertices {
        if !p.iter().all(|x| x.is_integer()) {
            continue;
        }
        integral += 1;
        let a = operand(&sys, p, (0..layout.n()).map(|i| layout.index(MultiplicationVar::A(i)).expect("A bit")))?;
        let b = operand(&sys, p, (0..layout.m()).map(|t| layout.index(MultiplicationVar::B(t)).expect("B bit")))?;
        check(a * b == 6, format!("integral vertex with A={a}, B={b}"))?;
    }
    check(integral > 0, "no integral vertex")?;
    Ok(format!(
        "{lifted} lifted points exact; C=6: {} vertices over {} bases, all {integral} integral ones factor 6",
        v.vertices.len(),
        v.bases_visited
    ))
}

fn criterion_7() -> Outcome {
    let options = FactorOptions::default();
    let report = sweep(4, 255, &options, 1).map_err(e)?;
    let t = Duration::from_secs_f64(report.wall_time_ms / 1e3);
    let c = report.confusion;
    check(report.rows.len() == 252 && c.total() == 252, format!("{} rows", report.rows.len()))?;
    for row in &report.rows {
        let truth = trial_division(row.c).map_err(e)? == Primality::Prime;
        check(row.prime == truth, format!("{} labelled prime={}", row.c, row.prime))?;
        if let (Some(a), Some(b)) = (row.a, row.b) {
            check(a > 1 && b > 1 && a * b == row.c, format!("false factors for {}", row.c))?;
        }
    }
    let code = sweep_exit_code(&c);
    let expected = if c.discrepancies() > 0 { EXIT_DISCREPANCY } else { EXIT_OK };
    check(code == expected, format!("exit code {code}, expected {expected}"))?;
    check(t < SWEEP_LIMIT, format!("took {t:?}"))?;
    Ok(format!(
        "{:.0}s; composite found {} missed {} discrepancy {}; prime confirmed {} discrepancy {} misfactored {}; exit code {code}",
        t.as_secs_f64(),
        c.composite_found,
        c.composite_missed,
        c.composite_discrepancy,
        c.prime_confirmed,
        c.prime_discrepancy,
        c.prime_misfactored
    ))
}

fn criterion_8() -> Outcome {
    let mut systems = vec![
        ("0+1", addition(1, Some(0), Some(1), None)?),
        ("2+3", addition(2, Some(2), Some(3), None)?),
        ("subtraction", addition(1, Some(1), None, Some(0))?),
        ("C=5", factoring(5)?),
        ("C=6", factoring(6)?),
        ("C=7", factoring(7)?),
        ("C=5 half point", half_point_system()?),
    ];
    for n in 1..=3u32 {
        for u in 0..1u64 << n {
            for v in 0..1u64 << n {
                systems.push(("addition", addition(n, Some(u), Some(v), None)?));
            }
        }
    }
    for (name, sys) in &systems {
        let (x, f) = (feasible_exact(sys)?, feasible_float(sys)?);
        check(x == f, format!("{name}: exact feasible={x}, float feasible={f}"))?;
    }
    for c in [5u64, 6, 7] {
        let exact = factor_u64(c, &FactorOptions::default()).map_err(e)?.status;
        let float = factor_u64(
            c,
            &FactorOptions {
                arithmetic: Arithmetic::Float,
                ..FactorOptions::default()
            },
        )
        .map_err(e)?
        .status;
        check(exact.label() == float.label(), format!("factor({c}): exact {}, float {}", exact.label(), float.label()))?;
    }
    Ok(format!(
        "{} systems and factor(5,6,7) agree (float tolerance {FLOAT_TOLERANCE:e})",
        systems.len()
    ))
}

fn main() {
    assert_eq!(FLOAT_TOLERANCE, bayes_arith::lp::FLOAT_TOLERANCE);
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("count formulas", criterion_1),
        ("large instance counts", criterion_2),
        ("ranks", criterion_3),
        ("worked examples", criterion_4),
        ("small factoring cases", criterion_5),
        ("oracle equivalence", criterion_6),
        ("factoring sweep [4,255]", criterion_7),
        ("exact/float agreement", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|x| *x == (k + 1).to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id} ({name}): {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id} ({name}): {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
