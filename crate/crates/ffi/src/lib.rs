//! C ABI over `ttdesign`.
//!
//! Configurations cross the boundary as opaque `TtdConfiguration` handles
//! created by the library and released with `ttd_configuration_free`. Every
//! fallible call returns a `TtdStatus`; on failure a message is available from
//! `ttd_last_error_message` until the next call on the same thread.
//! Matrices are column-major, one column per vector.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ttdesign::constructions::{self, MercedesAngles, StroudSign};
use ttdesign::design::io as design_io;
use ttdesign::design::{bessel_residual, default_probes, potential, DEFAULT_PROBE_COUNT};
use ttdesign::manifold::{multi_start, SolverOptions};
use ttdesign::verify::{cubature_residual, is_design};
use ttdesign::{Configuration, DesignError, DesignProblem, NormMode};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TtdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotUnitNorm = 4,
    Precondition = 5,
    Io = 6,
    Format = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TtdNormMode {
    EqualNorm = 0,
    Weighted = 1,
}

impl From<TtdNormMode> for NormMode {
    fn from(m: TtdNormMode) -> Self {
        match m {
            TtdNormMode::EqualNorm => NormMode::EqualNorm,
            TtdNormMode::Weighted => NormMode::Weighted,
        }
    }
}

/// Opaque configuration handle.
pub struct TtdConfiguration {
    inner: Configuration,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("no interior nul"));
}

fn status_of(e: &DesignError) -> TtdStatus {
    match e {
        DesignError::InvalidDimensions(_)
        | DesignError::InvalidParameter(_)
        | DesignError::ZeroColumn(_)
        | DesignError::AllZero
        | DesignError::EmptyProbes
        | DesignError::DegenerateStep(_) => TtdStatus::InvalidArgument,
        DesignError::DimensionMismatch(_) => TtdStatus::DimensionMismatch,
        DesignError::NotUnitNorm { .. } => TtdStatus::NotUnitNorm,
        DesignError::Precondition(_) => TtdStatus::Precondition,
        DesignError::Io(_) => TtdStatus::Io,
        DesignError::Format(_) | DesignError::Json(_) | DesignError::Csv(_) => TtdStatus::Format,
    }
}

struct Failure(TtdStatus, String);

impl From<DesignError> for Failure {
    fn from(e: DesignError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TtdStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TtdStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TtdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TtdStatus::Panic
        }
    }
}

unsafe fn config_ref<'a>(h: *const TtdConfiguration) -> Result<&'a Configuration, Failure> {
    h.as_ref().map(|c| &c.inner).ok_or_else(|| null("configuration"))
}

unsafe fn write_handle(out: *mut *mut TtdConfiguration, c: Configuration) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(TtdConfiguration { inner: c }));
    Ok(())
}

unsafe fn write_value<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = v;
    Ok(())
}

unsafe fn c_path(p: *const c_char) -> Result<String, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(TtdStatus::InvalidArgument, "path is not UTF-8".into()))
}

/// Message for the most recent failure on this thread; empty after success.
/// Valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn ttd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copies `d * n` column-major entries into a new handle. Equal-norm input
/// is normalized column by column.
///
/// # Safety
/// `entries` must point to `d * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ttd_configuration_new(
    d: usize,
    n: usize,
    mode: TtdNormMode,
    entries: *const f64,
    out: *mut *mut TtdConfiguration,
) -> TtdStatus {
    guard(|| {
        if entries.is_null() {
            return Err(null("entries"));
        }
        let len = d.checked_mul(n).ok_or_else(|| Failure(TtdStatus::InvalidArgument, "d * n overflows".into()))?;
        let m = nalgebra::DMatrix::from_column_slice(d, n, std::slice::from_raw_parts(entries, len));
        let c = match mode {
            TtdNormMode::EqualNorm => Configuration::equal_norm_from_raw(m)?,
            TtdNormMode::Weighted => Configuration::new(m, NormMode::Weighted)?,
        };
        write_handle(out, c)
    })
}

/// # Safety
/// `handle` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ttd_configuration_free(handle: *mut TtdConfiguration) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Dimension d, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ttd_configuration_dim(handle: *const TtdConfiguration) -> usize {
    handle.as_ref().map_or(0, |c| c.inner.d())
}

/// Number of vectors n, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ttd_configuration_len(handle: *const TtdConfiguration) -> usize {
    handle.as_ref().map_or(0, |c| c.inner.n())
}

/// # Safety
/// `handle` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ttd_configuration_mode(handle: *const TtdConfiguration, out: *mut TtdNormMode) -> TtdStatus {
    guard(|| {
        let mode = match config_ref(handle)?.mode() {
            NormMode::EqualNorm => TtdNormMode::EqualNorm,
            NormMode::Weighted => TtdNormMode::Weighted,
        };
        write_value(out, mode)
    })
}

/// Copies the column-major entries into `out`, which holds `len` doubles.
///
/// # Safety
/// `handle` must be valid; `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ttd_configuration_entries(
    handle: *const TtdConfiguration,
    out: *mut f64,
    len: usize,
) -> TtdStatus {
    guard(|| {
        let c = config_ref(handle)?;
        let src = c.as_slice();
        if out.is_null() {
            return Err(null("out"));
        }
        if len != src.len() {
            return Err(Failure(
                TtdStatus::DimensionMismatch,
                format!("buffer holds {len} doubles, need {}", src.len()),
            ));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, len);
        Ok(())
    })
}

/// Design potential at strength `t`.
///
/// # Safety
/// `handle` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ttd_potential(handle: *const TtdConfiguration, t: usize, out: *mut f64) -> TtdStatus {
    guard(|| write_value(out, potential(config_ref(handle)?, t)?.f))
}

/// Design verdict `f <= tolerance * n^2` after trace normalization.
///
/// # Safety
/// `handle` must be valid; `is_design_out` and `f_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ttd_is_design(
    handle: *const TtdConfiguration,
    t: usize,
    tolerance: f64,
    is_design_out: *mut c_int,
    f_out: *mut f64,
) -> TtdStatus {
    guard(|| {
        let (ok, f) = is_design(config_ref(handle)?, t, tolerance)?;
        write_value(is_design_out, ok as c_int)?;
        write_value(f_out, f)
    })
}

/// Largest monomial cubature error; unit-norm configurations only.
///
/// # Safety
/// `handle` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ttd_cubature_residual(handle: *const TtdConfiguration, t: usize, out: *mut f64) -> TtdStatus {
    guard(|| write_value(out, cubature_residual(config_ref(handle)?, t)?))
}

/// Relative Bessel-identity error over the default probe set drawn from `probe_seed`.
///
/// # Safety
/// `handle` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ttd_bessel_residual(
    handle: *const TtdConfiguration,
    t: usize,
    probe_seed: u64,
    out: *mut f64,
) -> TtdStatus {
    guard(|| {
        let c = config_ref(handle)?;
        let probes = default_probes(c.d(), DEFAULT_PROBE_COUNT, probe_seed);
        write_value(out, bessel_residual(c, t, &probes)?)
    })
}

/// Multi-start minimization; the best configuration is returned in `out`.
///
/// # Safety
/// `out` and `f_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ttd_minimize(
    t: usize,
    d: usize,
    n: usize,
    mode: TtdNormMode,
    restarts: usize,
    seed: u64,
    out: *mut *mut TtdConfiguration,
    f_out: *mut f64,
) -> TtdStatus {
    guard(|| {
        if out.is_null() || f_out.is_null() {
            return Err(null("out"));
        }
        let problem = DesignProblem::new(t, d, n, mode.into())?;
        let (best, _) = multi_start(&problem, restarts, &SolverOptions::default().with_seed(seed))?;
        write_value(f_out, best.f_value)?;
        write_handle(out, best.config)
    })
}

/// Closed-form constructions by name: `reznick_11pt`, `new_11pt_d5`,
/// `kempner_24pt`, `kempner_24pt_weighted`, `three_mubs`, `equally_spaced_lines`
/// (uses `param` as t), `stroud` (uses `param` as d and `sign` 0 plus / 1 minus),
/// `twelve_point` (reads four angles from `angles`, which may be null for zeros).
///
/// # Safety
/// `name` must be a nul-terminated string; `angles` null or four doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ttd_construct(
    name: *const c_char,
    param: usize,
    sign: c_int,
    angles: *const f64,
    out: *mut *mut TtdConfiguration,
) -> TtdStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name).to_string_lossy();
        let c = match name.as_ref() {
            "reznick_11pt" => constructions::reznick_11pt(),
            "new_11pt_d5" => constructions::new_11pt_d5(),
            "kempner_24pt" => constructions::kempner_24pt(),
            "kempner_24pt_weighted" => constructions::kempner_24pt_weighted(),
            "three_mubs" => constructions::three_mubs_r4(),
            "equally_spaced_lines" => constructions::equally_spaced_lines(param)?,
            "stroud" => {
                let s = match sign {
                    0 => StroudSign::Plus,
                    1 => StroudSign::Minus,
                    other => return Err(Failure(TtdStatus::InvalidArgument, format!("sign must be 0 or 1, got {other}"))),
                };
                constructions::stroud_design(param, s)?
            }
            "twelve_point" => {
                let th = if angles.is_null() {
                    [0.0; 4]
                } else {
                    let s = std::slice::from_raw_parts(angles, 4);
                    [s[0], s[1], s[2], s[3]]
                };
                constructions::twelve_point_design(&MercedesAngles::new(th))
            }
            other => return Err(Failure(TtdStatus::InvalidArgument, format!("unknown construction `{other}`"))),
        };
        write_handle(out, c)
    })
}

/// Reads a design JSON file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ttd_load_design(path: *const c_char, out: *mut *mut TtdConfiguration) -> TtdStatus {
    guard(|| {
        let doc = design_io::load(c_path(path)?)?;
        write_handle(out, doc.config)
    })
}

/// Writes a design JSON file; `t` of 0 omits the strength.
///
/// # Safety
/// `handle` must be valid; `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ttd_save_design(handle: *const TtdConfiguration, t: usize, path: *const c_char) -> TtdStatus {
    guard(|| {
        let mut doc = design_io::DesignDocument::new(config_ref(handle)?.clone());
        if t > 0 {
            doc = doc.with_t(t);
        }
        design_io::save(&doc, c_path(path)?)?;
        Ok(())
    })
}
