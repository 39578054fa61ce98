//! C ABI for `reppower`.
//!
//! Every fallible function returns an [`RpStatus`]; on failure the message is
//! available from [`rp_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Methods are
//! passed as the `RP_METHOD_*` integer constants.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use reppower::mc::{simulate_power, SimSpec};
use reppower::solver::{solve_c, InterimInputs, SolveRequest};
use reppower::ssrp::{SsrpDataset, Table3Row};
use reppower::{fixed_power, interim_power, DesignConfig, Error, FixedDesign, InterimState, Method, Tail, ZValue};

pub const RP_METHOD_CP: u32 = 0;
pub const RP_METHOD_PP: u32 = 1;
pub const RP_METHOD_FBP: u32 = 2;
pub const RP_METHOD_CBP: u32 = 3;
pub const RP_METHOD_CPI: u32 = 4;
pub const RP_METHOD_IPPI: u32 = 5;
pub const RP_METHOD_PPI: u32 = 6;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Degenerate = 3,
    Infeasible = 4,
    BelowMinimum = 5,
    InvalidSpec = 6,
    Parse = 7,
    Invariant = 8,
    MissingField = 9,
    Io = 10,
    OutOfRange = 11,
    Panic = 12,
}

/// Significance level, shrinkage and tail.
pub struct RpConfig {
    inner: DesignConfig,
}

/// A loaded replication-project dataset.
pub struct RpDataset {
    len: usize,
    rows: Vec<Table3Row>,
    names: Vec<CString>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpPower {
    pub power: f64,
    pub supremum: f64,
    pub feasible_100: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpSolution {
    pub c: f64,
    /// NaN for design-time methods.
    pub f: f64,
    pub power: f64,
    pub degenerate: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpSimEstimate {
    pub estimate: f64,
    pub std_err: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RpInterimRow {
    /// Owned by the dataset; valid until it is freed.
    pub study: *const c_char,
    pub c: f64,
    pub f: f64,
    pub cpi: f64,
    pub ippi: f64,
    pub ppi: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> RpStatus {
    match e {
        Error::Domain { .. } => RpStatus::Domain,
        Error::Degenerate(_) => RpStatus::Degenerate,
        Error::Infeasible { .. } => RpStatus::Infeasible,
        Error::BelowMinimum { .. } => RpStatus::BelowMinimum,
        Error::InvalidSpec(_) => RpStatus::InvalidSpec,
        Error::Parse { .. } => RpStatus::Parse,
        Error::Invariant(_) => RpStatus::Invariant,
        Error::MissingField { .. } => RpStatus::MissingField,
        Error::Io(_) => RpStatus::Io,
    }
}

struct Fail(RpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail> + UnwindSafe>(f: F) -> RpStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RpStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RpStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(RpStatus::NullPointer, format!("{what} is null"))
}

fn method(code: u32) -> Result<Method, Fail> {
    Method::ALL
        .get(code as usize)
        .copied()
        .ok_or_else(|| Fail(RpStatus::InvalidSpec, format!("unknown method code {code}")))
}

unsafe fn config<'a>(cfg: *const RpConfig) -> Result<&'a DesignConfig, Fail> {
    cfg.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL,
/// or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a configuration. `two_sided` non-zero also counts significance in
/// the opposite direction.
///
/// # Safety
/// `out` must be a valid pointer; the handle is freed with [`rp_config_free`].
#[no_mangle]
pub unsafe extern "C" fn rp_config_new(alpha: f64, shrinkage: f64, two_sided: i32, out: *mut *mut RpConfig) -> RpStatus {
    guard(|| {
        let tail = if two_sided != 0 { Tail::TwoSided } else { Tail::Upper };
        let inner = DesignConfig::new(alpha, shrinkage)?.with_tail(tail);
        write(out, Box::into_raw(Box::new(RpConfig { inner })))
    })
}

/// # Safety
/// `cfg` must be null or a handle from [`rp_config_new`], freed at most once.
#[no_mangle]
pub unsafe extern "C" fn rp_config_free(cfg: *mut RpConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Design-time power (CP, PP, FBP or CBP).
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_fixed_power(cfg: *const RpConfig, method_code: u32, t_o: f64, c: f64, out: *mut RpPower) -> RpStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let r = fixed_power(method(method_code)?, &FixedDesign::new(t_o, c)?, cfg)?;
        write(
            out,
            RpPower {
                power: r.power.value(),
                supremum: r.supremum.value(),
                feasible_100: r.feasible_100,
            },
        )
    })
}

/// Interim power (CPi, IPPi or PPi).
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_interim_power(
    cfg: *const RpConfig,
    method_code: u32,
    t_o: f64,
    t_i: f64,
    c: f64,
    f: f64,
    out: *mut RpPower,
) -> RpStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let state = InterimState::new(t_i, f, c)?;
        let r = interim_power(method(method_code)?, ZValue::new(t_o)?, &state, cfg)?;
        write(
            out,
            RpPower {
                power: r.power.value(),
                supremum: r.supremum.value(),
                feasible_100: r.feasible_100,
            },
        )
    })
}

/// Smallest `c ≥ c_lower` reaching `target`. `t_i` and `ni_ratio`
/// (`n_i / n_o`) are used by interim methods only.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_solve_c(
    cfg: *const RpConfig,
    method_code: u32,
    target: f64,
    t_o: f64,
    t_i: f64,
    ni_ratio: f64,
    c_lower: f64,
    out: *mut RpSolution,
) -> RpStatus {
    guard(|| {
        let cfg = *config(cfg)?;
        let m = method(method_code)?;
        let t_o = ZValue::new(t_o)?;
        let mut req = if m.is_interim() {
            let inputs = InterimInputs {
                t_i: ZValue::new(t_i)?,
                interim_ratio: ni_ratio,
            };
            SolveRequest::interim(m, target, t_o, inputs, cfg)
        } else {
            SolveRequest::fixed(m, target, t_o, cfg)
        };
        req.c_lower = c_lower;
        let s = solve_c(&req)?;
        write(
            out,
            RpSolution {
                c: s.c,
                f: s.f.unwrap_or(f64::NAN),
                power: s.power,
                degenerate: s.degenerate,
            },
        )
    })
}

/// Monte-Carlo estimate of a power. `t_i` and `f` are ignored by the
/// design-time methods.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_simulate(
    cfg: *const RpConfig,
    method_code: u32,
    t_o: f64,
    t_i: f64,
    c: f64,
    f: f64,
    n_sims: u64,
    seed: u64,
    out: *mut RpSimEstimate,
) -> RpStatus {
    guard(|| {
        let cfg = *config(cfg)?;
        let m = method(method_code)?;
        let t_o = ZValue::new(t_o)?;
        let spec = if m.is_interim() {
            SimSpec::interim(m, t_o, ZValue::new(t_i)?, c, f, cfg)
        } else {
            SimSpec::fixed(m, t_o, c, cfg)
        };
        let est = simulate_power(&spec.with_sims(n_sims).with_seed(seed))?;
        write(
            out,
            RpSimEstimate {
                estimate: est.estimate,
                std_err: est.std_err,
            },
        )
    })
}

/// Loads a dataset from `path`, or the bundled copy when `path` is null.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_dataset_load(path: *const c_char, out: *mut *mut RpDataset) -> RpStatus {
    guard(|| {
        let data = if path.is_null() {
            SsrpDataset::embedded()
        } else {
            let path = CStr::from_ptr(path)
                .to_str()
                .map_err(|_| Fail(RpStatus::InvalidSpec, "path is not UTF-8".into()))?;
            SsrpDataset::load_csv(path)?
        };
        let rows = data.reproduce_table3()?.rows;
        let names = rows
            .iter()
            .map(|r| CString::new(r.study.replace('\0', " ")).unwrap_or_default())
            .collect();
        let handle = RpDataset {
            len: data.len(),
            rows,
            names,
        };
        write(out, Box::into_raw(Box::new(handle)))
    })
}

/// Number of studies; 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rp_dataset_len(ds: *const RpDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.len)
}

/// Number of studies with a stage-2 result; rows of the interim-power table.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rp_dataset_continued_len(ds: *const RpDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.rows.len())
}

/// Interim powers of the `index`-th continued study.
///
/// # Safety
/// `ds` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_dataset_interim_row(ds: *const RpDataset, index: usize, out: *mut RpInterimRow) -> RpStatus {
    guard(|| {
        let d = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let (row, name) = d
            .rows
            .get(index)
            .zip(d.names.get(index))
            .ok_or_else(|| Fail(RpStatus::OutOfRange, format!("row {index} of {}", d.rows.len())))?;
        write(
            out,
            RpInterimRow {
                study: name.as_ptr(),
                c: row.c,
                f: row.f,
                cpi: row.cpi,
                ippi: row.ippi,
                ppi: row.ppi,
            },
        )
    })
}

/// # Safety
/// `ds` must be null or a handle from [`rp_dataset_load`], freed at most once.
#[no_mangle]
pub unsafe extern "C" fn rp_dataset_free(ds: *mut RpDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = [0 as c_char; 256];
        let n = unsafe { rp_last_error_message(buf.as_mut_ptr(), buf.len()) };
        if n == 0 {
            return String::new();
        }
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn method_codes_follow_enum_order() {
        let codes = [
            RP_METHOD_CP,
            RP_METHOD_PP,
            RP_METHOD_FBP,
            RP_METHOD_CBP,
            RP_METHOD_CPI,
            RP_METHOD_IPPI,
            RP_METHOD_PPI,
        ];
        for (code, m) in codes.into_iter().zip(Method::ALL) {
            assert_eq!(method(code).ok(), Some(m));
        }
        assert!(method(7).is_err());
    }

    #[test]
    fn error_message_truncates() {
        let mut cfg = ptr::null_mut();
        let st = unsafe { rp_config_new(2.0, 0.0, 0, &mut cfg) };
        assert_eq!(st, RpStatus::Domain);
        assert!(cfg.is_null());
        assert!(last_error().contains("alpha"));
        let mut small = [0 as c_char; 4];
        let n = unsafe { rp_last_error_message(small.as_mut_ptr(), small.len()) };
        assert!(n > 3);
        assert_eq!(small[3], 0);
    }
}
