//! Command-line front end. Exit codes: 0 success, 1 usage or I/O error,
//! 2 a result disagrees with its oracle or a checked claim.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use crate::addition::{addition_counts, build_addition, AdditionSpec};
use crate::error::{Error, Result};
use crate::factor::{factor, sweep, Arithmetic, ConfusionMatrix, FactorOptions, FactorStatus};
use crate::lp::{
    parse_native, to_decimal, write_lp, write_native, ExactRational, LpSolver, LpStatus, NativeStreamWriter,
    Objective, Pricing, Scalar, SimplexOptions,
};
use crate::multiplication::{
    build_multiplication, count_by_streaming, for_each_multiplication_equation, multiplication_counts,
    FactoringSpec, MultiplicationSpec,
};
use crate::presolve::{presolve, PresolveOutcome};
use crate::report::{summary_table, tally, to_json_lines, verify_all, VerifyConfig};
use crate::system::{Environment, LpSystem, SystemCounts};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DISCREPANCY: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bayes-arith", version, about = "Binary arithmetic as linear programs over partial probabilities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode n-bit addition U + V = S.
    EncodeAdd(EncodeAdd),
    /// Encode n x m-bit multiplication A x B = C, or the factoring system of C.
    EncodeMul(EncodeMul),
    /// Run the bit-fixing factoring procedure on C.
    Factor(FactorArgs),
    /// Factor every integer in a range and compare with trial division.
    Sweep(SweepArgs),
    /// Compare built and streamed systems with the closed-form counts.
    VerifyCounts(VerifyCounts),
    /// Recompute every stated count, rank and worked outcome.
    VerifyClaims(VerifyClaims),
    /// Convert a native system file to CPLEX LP text.
    Export(Export),
    /// Feasibility or maximization of a native system file.
    Solve(Solve),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Native,
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PricingArg {
    Bland,
    Dantzig,
}

#[derive(Debug, Args)]
pub struct EncodeAdd {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub u: Option<u64>,
    #[arg(long)]
    pub v: Option<u64>,
    #[arg(long)]
    pub s: Option<u64>,
    /// Print counts instead of the system.
    #[arg(long)]
    pub stats: bool,
    #[arg(long, value_enum, default_value = "native")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeMul {
    #[arg(long, required_unless_present = "factor")]
    pub n: Option<u32>,
    #[arg(long, required_unless_present = "factor")]
    pub m: Option<u32>,
    #[arg(long, conflicts_with = "factor")]
    pub a: Option<BigUint>,
    #[arg(long, conflicts_with = "factor")]
    pub b: Option<BigUint>,
    #[arg(long, conflicts_with = "factor")]
    pub c: Option<BigUint>,
    /// Build the factoring system of this integer (sizes derived from it).
    #[arg(long, conflicts_with_all = ["n", "m"])]
    pub factor: Option<BigUint>,
    /// Write equations to --out as they are generated, without holding the
    /// system in memory.
    #[arg(long, requires = "out")]
    pub stream: bool,
    /// Print the closed-form counts only.
    #[arg(long)]
    pub counts_only: bool,
    #[arg(long)]
    pub stats: bool,
    #[arg(long, value_enum, default_value = "native")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    pub c: BigUint,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    #[arg(long)]
    pub no_presolve: bool,
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, value_enum, default_value = "dantzig")]
    pub pricing: PricingArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 4)]
    pub lo: u64,
    #[arg(long)]
    pub hi: u64,
    #[arg(long, env = "BAYES_ARITH_JOBS", default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    #[arg(long)]
    pub exhaustive: bool,
    /// Print every row as a JSON line before the summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyCounts {
    #[arg(long, default_value_t = 8)]
    pub max_n: u32,
    #[arg(long, default_value_t = 8)]
    pub max_m: u32,
}

#[derive(Debug, Args)]
pub struct VerifyClaims {
    #[arg(long)]
    pub count_only: bool,
    #[arg(long)]
    pub json: bool,
    /// Upper end of the factoring sweep; 0 skips it.
    #[arg(long, default_value_t = 64)]
    pub sweep_hi: u64,
    #[arg(long, env = "BAYES_ARITH_JOBS", default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct Export {
    pub input: PathBuf,
    /// Objective to maximize, e.g. "1*(3) + 2*(-1;4)" or "2*7".
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Solve {
    pub input: PathBuf,
    #[arg(long)]
    pub maximize: Option<String>,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    /// Apply the product rule before solving.
    #[arg(long)]
    pub presolve: bool,
    /// Print the feasible point.
    #[arg(long)]
    pub point: bool,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_counts(w: &mut dyn Write, c: &SystemCounts) -> io::Result<()> {
    writeln!(w, "unknowns={} equations={}", c.unknowns, c.equations)?;
    writeln!(
        w,
        "positive={} data={} structural={} universal={} extra={}",
        c.positive_unknowns, c.data, c.structural, c.universal, c.extra
    )
}

fn write_system(sys: &LpSystem, format: Format, out: &Option<PathBuf>) -> Result<()> {
    let w = output(out)?;
    match format {
        Format::Native => write_native(sys, w)?,
        Format::Lp => write_lp(sys, None, w)?,
    }
    Ok(())
}

fn encode_add(args: &EncodeAdd) -> Result<i32> {
    let mut spec = AdditionSpec::new(args.n)?;
    if let Some(u) = args.u {
        spec.with_u(u)?;
    }
    if let Some(v) = args.v {
        spec.with_v(v)?;
    }
    if let Some(s) = args.s {
        spec.with_s(s)?;
    }
    let sys = build_addition(&spec)?;
    if args.stats {
        let counts = sys.counts();
        let mut out = output(&args.out)?;
        print_counts(&mut out, &counts)?;
        if args.n >= 2 {
            let formula = addition_counts(args.n, counts.data);
            if formula.unknowns != counts.unknowns || formula.equations != counts.equations {
                writeln!(out, "closed form differs: {formula:?}")?;
                return Ok(EXIT_DISCREPANCY);
            }
        }
        return Ok(EXIT_OK);
    }
    write_system(&sys, args.format, &args.out)?;
    Ok(EXIT_OK)
}

fn multiplication_spec(args: &EncodeMul) -> Result<MultiplicationSpec> {
    if let Some(c) = &args.factor {
        return Ok(FactoringSpec::new(c)?.multiplication_spec());
    }
    let (Some(n), Some(m)) = (args.n, args.m) else {
        return Err(Error::range("operand sizes", "--n and --m are required without --factor"));
    };
    let mut spec = MultiplicationSpec::new(n, m)?;
    if let Some(a) = &args.a {
        spec.with_a(a)?;
    }
    if let Some(b) = &args.b {
        spec.with_b(b)?;
    }
    if let Some(c) = &args.c {
        spec.with_c(c)?;
    }
    Ok(spec)
}

fn encode_mul(args: &EncodeMul) -> Result<i32> {
    let spec = multiplication_spec(args)?;
    let data = spec.data_equations()?.len() as u64;
    let formula = multiplication_counts(spec.n, spec.m, data);
    if args.counts_only {
        print_counts(&mut *output(&args.out)?, &formula)?;
        return Ok(EXIT_OK);
    }
    let counts = if args.stream {
        if args.format != Format::Native {
            return Err(Error::range("format", "streaming writes the native format"));
        }
        let path = args.out.as_ref().expect("clap requires --out with --stream");
        let mut writer = NativeStreamWriter::new(
            File::create(path)?,
            Environment::Multiplication { n: spec.n, m: spec.m },
        )?;
        let mut failure = None;
        for_each_multiplication_equation(&spec, |eq| {
            if failure.is_none() {
                failure = writer.push(&eq).err();
            }
        })?;
        if let Some(e) = failure {
            return Err(e.into());
        }
        let counts = writer.finish()?;
        print_counts(&mut io::stdout().lock(), &counts)?;
        counts
    } else if args.stats {
        let counts = if spec.n * spec.m > 4096 { count_by_streaming(&spec)? } else { build_multiplication(&spec)?.counts() };
        print_counts(&mut *output(&args.out)?, &counts)?;
        counts
    } else {
        let sys = build_multiplication(&spec)?;
        write_system(&sys, args.format, &args.out)?;
        sys.counts()
    };
    if spec.n >= 2 && spec.m >= 2 && (counts.unknowns, counts.equations) != (formula.unknowns, formula.equations) {
        eprintln!("closed form differs: {formula:?}");
        return Ok(EXIT_DISCREPANCY);
    }
    Ok(EXIT_OK)
}

fn factor_options(mode: Mode, exhaustive: bool) -> FactorOptions {
    FactorOptions {
        arithmetic: match mode {
            Mode::Exact => Arithmetic::Exact,
            Mode::Float => Arithmetic::Float,
        },
        exhaustive,
        ..FactorOptions::default()
    }
}

fn run_factor(args: &FactorArgs) -> Result<i32> {
    let mut options = factor_options(args.mode, args.exhaustive);
    options.presolve = !args.no_presolve;
    options.pricing = match args.pricing {
        PricingArg::Bland => Pricing::Bland,
        PricingArg::Dantzig => Pricing::Dantzig,
    };
    let result = factor(&args.c, &options)?;
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&result).expect("result serializes"))?;
    } else {
        for d in &result.log {
            writeln!(
                out,
                "bit {} = {}: max {} target {} {}{}",
                d.bit,
                u8::from(d.value),
                d.optimum,
                d.target,
                if d.reached { "reached" } else { "not reached" },
                if d.chosen { ", fixed" } else { "" }
            )?;
        }
        match &result.status {
            FactorStatus::Composite { a, b } => writeln!(out, "{} = {} x {}", result.c, a, b)?,
            other => writeln!(out, "{}: {}", result.c, other.label())?,
        }
        let s = &result.stats;
        writeln!(
            out,
            "objectives={} lp={}x{} fixed={} pivots={} time={:.1}ms",
            s.objectives_evaluated, s.lp_constraints, s.lp_unknowns, s.presolve_fixed_count, s.pivots, s.wall_time_ms
        )?;
    }
    Ok(match result.status {
        FactorStatus::Discrepancy { .. } => EXIT_DISCREPANCY,
        _ => EXIT_OK,
    })
}

fn run_sweep(args: &SweepArgs) -> Result<i32> {
    let report = sweep(args.lo, args.hi, &factor_options(args.mode, args.exhaustive), args.jobs.max(1))?;
    let mut out = io::stdout().lock();
    if args.json {
        for row in &report.rows {
            writeln!(out, "{}", serde_json::to_string(row).expect("row serializes"))?;
        }
    }
    let c = report.confusion;
    writeln!(out, "range [{}, {}], {} integers, {:.1} s", report.lo, report.hi, c.total(), report.wall_time_ms / 1e3)?;
    writeln!(out, "               found  missed  discrepancy  misfactored")?;
    writeln!(out, "composite  {:>8}  {:>6}  {:>11}  {:>11}", c.composite_found, c.composite_missed, c.composite_discrepancy, "-")?;
    writeln!(out, "prime      {:>8}  {:>6}  {:>11}  {:>11}", c.prime_confirmed, "-", c.prime_discrepancy, c.prime_misfactored)?;
    let missed: Vec<String> = report.rows.iter().filter(|r| r.disagrees).map(|r| r.c.to_string()).collect();
    if !missed.is_empty() {
        writeln!(out, "disagreements: {}", missed.join(" "))?;
    }
    Ok(sweep_exit_code(&c))
}

/// A missed composite is an expected outcome of the procedure and is only
/// reported; a Discrepancy status or factors returned for a prime fail.
pub fn sweep_exit_code(c: &ConfusionMatrix) -> i32 {
    if c.discrepancies() > 0 || c.prime_misfactored > 0 {
        EXIT_DISCREPANCY
    } else {
        EXIT_OK
    }
}

fn verify_counts(args: &VerifyCounts) -> Result<i32> {
    let mut bad = 0;
    let mut out = io::stdout().lock();
    for n in 2..=args.max_n {
        let built = build_addition(&AdditionSpec::new(n)?)?.counts();
        if built != addition_counts(n, 0) {
            bad += 1;
            writeln!(out, "addition n={n}: built {built:?}")?;
        }
        for m in 2..=args.max_m {
            let spec = MultiplicationSpec::new(n, m)?;
            let formula = multiplication_counts(n, m, 0);
            let built = build_multiplication(&spec)?.counts();
            let streamed = count_by_streaming(&spec)?;
            if built != formula || streamed != formula {
                bad += 1;
                writeln!(out, "multiplication n={n} m={m}: built {built:?} streamed {streamed:?}")?;
            }
        }
    }
    writeln!(
        out,
        "{} sizes checked, {bad} disagree",
        (args.max_n.saturating_sub(1)) * (1 + args.max_m.saturating_sub(1))
    )?;
    Ok(if bad == 0 { EXIT_OK } else { EXIT_DISCREPANCY })
}

fn verify_claims(args: &VerifyClaims) -> Result<i32> {
    let records = verify_all(&VerifyConfig {
        count_only: args.count_only,
        sweep_hi: args.sweep_hi,
        jobs: args.jobs.max(1),
        ..VerifyConfig::default()
    });
    let mut out = io::stdout().lock();
    if args.json {
        out.write_all(to_json_lines(&records).as_bytes())?;
    } else {
        out.write_all(summary_table(&records).as_bytes())?;
    }
    Ok(if tally(&records).mismatched > 0 { EXIT_DISCREPANCY } else { EXIT_OK })
}

fn read_system(path: &PathBuf) -> Result<LpSystem> {
    parse_native(BufReader::new(File::open(path)?))
}

fn export(args: &Export) -> Result<i32> {
    let sys = read_system(&args.input)?;
    let objective = args.objective.as_deref().map(|t| Objective::parse(t, &sys)).transpose()?;
    write_lp(&sys, objective.as_ref(), output(&args.out)?)?;
    Ok(EXIT_OK)
}

fn solve_with<T: Scalar>(sys: &LpSystem, objective: Option<&Objective>, out: &mut dyn Write) -> Result<Option<Vec<String>>> {
    let mut solver = LpSolver::<T>::new(sys, SimplexOptions::default())?;
    let outcome = match objective {
        Some(o) if solver.is_feasible() => solver.maximize(o)?,
        _ => solver.feasibility(),
    };
    match &outcome.status {
        LpStatus::Feasible { point, objective, .. } => {
            writeln!(out, "feasible")?;
            if let Some(v) = objective {
                writeln!(out, "objective {}", to_decimal(&v.to_rational()))?;
            }
            Ok(Some(point.iter().map(|x| to_decimal(&x.to_rational())).collect()))
        }
        LpStatus::Infeasible { .. } => {
            writeln!(out, "infeasible")?;
            Ok(None)
        }
        LpStatus::Unbounded { column } => Err(Error::EncodingAnomaly(format!("unbounded along column {column}"))),
    }
}

fn solve(args: &Solve) -> Result<i32> {
    let original = read_system(&args.input)?;
    let mut out = io::stdout().lock();
    let (sys, reduction) = if args.presolve {
        match presolve(&original) {
            PresolveOutcome::Reduced { reduction, .. } => {
                writeln!(out, "presolve fixed {} unknowns", reduction.fixed_count())?;
                (reduction.system.clone(), Some(reduction))
            }
            PresolveOutcome::ProvedInfeasible { conflict, .. } => {
                writeln!(out, "infeasible (presolve: {conflict})")?;
                return Ok(EXIT_OK);
            }
        }
    } else {
        (original.clone(), None)
    };
    let mut objective = args.maximize.as_deref().map(|t| Objective::parse(t, &original)).transpose()?;
    if let (Some(o), Some(r)) = (objective.as_mut(), reduction.as_ref()) {
        *o = r.restrict_objective(o);
    }
    let point = match args.mode {
        Mode::Exact => solve_with::<ExactRational>(&sys, objective.as_ref(), &mut out)?,
        Mode::Float => solve_with::<f64>(&sys, objective.as_ref(), &mut out)?,
    };
    if let (true, Some(point)) = (args.point, point) {
        for (id, v) in point.iter().enumerate() {
            match sys.label(id) {
                Some(r) => writeln!(out, "{id} P{r} = {v}")?,
                None => writeln!(out, "{id} = {v}")?,
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::EncodeAdd(a) => encode_add(a),
        Command::EncodeMul(a) => encode_mul(a),
        Command::Factor(a) => run_factor(a),
        Command::Sweep(a) => run_sweep(a),
        Command::VerifyCounts(a) => verify_counts(a),
        Command::VerifyClaims(a) => verify_claims(a),
        Command::Export(a) => export(a),
        Command::Solve(a) => solve(a),
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
