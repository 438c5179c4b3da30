//! C interface. Every function returns a [`BaStatus`]; on failure the message
//! is available from [`ba_last_error`] on the same thread until the next call.
//! Systems are opaque [`BaSystem`] handles released with [`ba_system_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bayes_arith::addition::{build_addition, AdditionSpec};
use bayes_arith::factor::{factor, Arithmetic, FactorOptions, FactorStatus};
use bayes_arith::lp::{parse_native, write_native, ExactRational, LpSolver, SimplexOptions};
use bayes_arith::multiplication::{build_factoring, build_multiplication, FactoringSpec, MultiplicationSpec};
use bayes_arith::presolve::{presolve, PresolveOutcome};
use bayes_arith::system::LpSystem;
use bayes_arith::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Parse = 4,
    Io = 5,
    /// The system is malformed or the solver hit an internal limit.
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaArithmetic {
    Exact = 0,
    Float = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaFactorOutcome {
    Composite = 0,
    PrimeByProcedure = 1,
    InfeasibleSystem = 2,
    Discrepancy = 3,
}

/// Opaque system handle.
pub struct BaSystem {
    inner: LpSystem,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BaCounts {
    pub unknowns: u64,
    pub positive_unknowns: u64,
    pub equations: u64,
    pub data: u64,
    pub structural: u64,
    pub universal: u64,
    pub extra: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaFactorResult {
    pub outcome: BaFactorOutcome,
    /// Factors when `outcome` is composite and they fit in 64 bits, else 0.
    pub a: u64,
    pub b: u64,
    pub objectives_evaluated: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BaStatus {
    match e {
        Error::Range { .. } | Error::TooLarge { .. } => BaStatus::OutOfRange,
        Error::Parse { .. } => BaStatus::Parse,
        Error::Io(_) => BaStatus::Io,
        Error::EncodingAnomaly(_) => BaStatus::Internal,
        _ => BaStatus::InvalidArgument,
    }
}

fn guard(body: impl FnOnce() -> Result<(), BaStatus>) -> BaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BaStatus::Ok,
        Ok(Err(status)) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            BaStatus::Panic
        }
    }
}

fn fail(e: Error) -> BaStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn null(what: &str) -> BaStatus {
    set_error(format!("{what} is null"));
    BaStatus::NullPointer
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, BaStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not UTF-8"));
        BaStatus::InvalidArgument
    })
}

unsafe fn system<'a>(p: *const BaSystem) -> Result<&'a LpSystem, BaStatus> {
    p.as_ref().map(|s| &s.inner).ok_or_else(|| null("system"))
}

unsafe fn emit(out: *mut *mut BaSystem, sys: LpSystem) -> Result<(), BaStatus> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(BaSystem { inner: sys }));
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ba_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ba_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Encodes n-bit addition. A negative `u`, `v` or `s` leaves that operand free.
///
/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_encode_addition(n: u32, u: i64, v: i64, s: i64, out: *mut *mut BaSystem) -> BaStatus {
    guard(|| {
        let mut spec = AdditionSpec::new(n).map_err(fail)?;
        if u >= 0 {
            spec.with_u(u as u64).map_err(fail)?;
        }
        if v >= 0 {
            spec.with_v(v as u64).map_err(fail)?;
        }
        if s >= 0 {
            spec.with_s(s as u64).map_err(fail)?;
        }
        emit(out, build_addition(&spec).map_err(fail)?)
    })
}

/// Encodes n x m-bit multiplication with all operands free.
///
/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_encode_multiplication(n: u32, m: u32, out: *mut *mut BaSystem) -> BaStatus {
    guard(|| {
        let spec = MultiplicationSpec::new(n, m).map_err(fail)?;
        emit(out, build_multiplication(&spec).map_err(fail)?)
    })
}

/// Encodes the factoring system of the decimal integer `c`.
///
/// # Safety
/// `c` must be a nul-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ba_encode_factoring(c: *const c_char, out: *mut *mut BaSystem) -> BaStatus {
    guard(|| {
        let value = text(c, "c")?.trim().parse().map_err(|_| {
            set_error("c is not a decimal integer".into());
            BaStatus::InvalidArgument
        })?;
        let spec = FactoringSpec::new(&value).map_err(fail)?;
        emit(out, build_factoring(&spec).map_err(fail)?)
    })
}

/// Reads a native-format system file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ba_system_read(path: *const c_char, out: *mut *mut BaSystem) -> BaStatus {
    guard(|| {
        let file = File::open(text(path, "path")?).map_err(|e| fail(e.into()))?;
        emit(out, parse_native(BufReader::new(file)).map_err(fail)?)
    })
}

/// Writes a system in native format.
///
/// # Safety
/// `sys` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ba_system_write(sys: *const BaSystem, path: *const c_char) -> BaStatus {
    guard(|| {
        let sys = system(sys)?;
        let file = File::create(text(path, "path")?).map_err(|e| fail(e.into()))?;
        write_native(sys, file).map_err(|e| fail(e.into()))
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sys` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ba_system_free(sys: *mut BaSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Counts of unknowns and equations by role.
///
/// # Safety
/// `sys` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ba_system_counts(sys: *const BaSystem, out: *mut BaCounts) -> BaStatus {
    guard(|| {
        let c = system(sys)?.counts();
        let out = out.as_mut().ok_or_else(|| null("counts"))?;
        *out = BaCounts {
            unknowns: c.unknowns,
            positive_unknowns: c.positive_unknowns,
            equations: c.equations,
            data: c.data,
            structural: c.structural,
            universal: c.universal,
            extra: c.extra,
        };
        Ok(())
    })
}

/// Sets `*feasible` to 1 when the system has a nonnegative solution.
///
/// # Safety
/// `sys` must be a live handle and `feasible` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ba_system_feasible(sys: *const BaSystem, arithmetic: BaArithmetic, feasible: *mut i32) -> BaStatus {
    guard(|| {
        let sys = system(sys)?;
        let out = feasible.as_mut().ok_or_else(|| null("feasible"))?;
        let ok = match arithmetic {
            BaArithmetic::Exact => LpSolver::<ExactRational>::new(sys, SimplexOptions::default()).map(|s| s.is_feasible()),
            BaArithmetic::Float => LpSolver::<f64>::new(sys, SimplexOptions::default()).map(|s| s.is_feasible()),
        }
        .map_err(fail)?;
        *out = i32::from(ok);
        Ok(())
    })
}

/// Applies the product rule. On success `*reduced` receives the reduced
/// system, or null with `*proved_infeasible = 1` when presolve finds a
/// contradiction.
///
/// # Safety
/// `sys` must be a live handle; `reduced` and `proved_infeasible` valid for
/// writing.
#[no_mangle]
pub unsafe extern "C" fn ba_system_presolve(
    sys: *const BaSystem,
    reduced: *mut *mut BaSystem,
    proved_infeasible: *mut i32,
) -> BaStatus {
    guard(|| {
        let sys = system(sys)?;
        if reduced.is_null() {
            return Err(null("reduced"));
        }
        let flag = proved_infeasible.as_mut().ok_or_else(|| null("proved_infeasible"))?;
        match presolve(sys) {
            PresolveOutcome::Reduced { reduction, .. } => {
                *flag = 0;
                emit(reduced, reduction.system)
            }
            PresolveOutcome::ProvedInfeasible { .. } => {
                *flag = 1;
                *reduced = ptr::null_mut();
                Ok(())
            }
        }
    })
}

/// Runs the bit-fixing procedure on the decimal integer `c`.
///
/// # Safety
/// `c` must be a nul-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ba_factor(c: *const c_char, arithmetic: BaArithmetic, out: *mut BaFactorResult) -> BaStatus {
    guard(|| {
        let value = text(c, "c")?.trim().parse().map_err(|_| {
            set_error("c is not a decimal integer".into());
            BaStatus::InvalidArgument
        })?;
        let out = out.as_mut().ok_or_else(|| null("result"))?;
        let options = FactorOptions {
            arithmetic: match arithmetic {
                BaArithmetic::Exact => Arithmetic::Exact,
                BaArithmetic::Float => Arithmetic::Float,
            },
            ..FactorOptions::default()
        };
        let r = factor(&value, &options).map_err(fail)?;
        let to_u64 = |v: &bayes_arith::BigUint| u64::try_from(v).unwrap_or(0);
        let (outcome, a, b) = match &r.status {
            FactorStatus::Composite { a, b } => (BaFactorOutcome::Composite, to_u64(a), to_u64(b)),
            FactorStatus::PrimeByProcedure => (BaFactorOutcome::PrimeByProcedure, 0, 0),
            FactorStatus::InfeasibleSystem => (BaFactorOutcome::InfeasibleSystem, 0, 0),
            FactorStatus::Discrepancy { detail } => {
                set_error(detail.clone());
                (BaFactorOutcome::Discrepancy, 0, 0)
            }
        };
        *out = BaFactorResult {
            outcome,
            a,
            b,
            objectives_evaluated: r.stats.objectives_evaluated as u64,
        };
        Ok(())
    })
}
