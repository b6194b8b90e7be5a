//! C ABI for the erpm metrics.
//!
//! Matrices and reports are opaque heap handles owned by the caller and
//! released with their `_free` function. Every fallible call returns an
//! [`ErpmStatus`]; on failure [`erpm_last_error`] describes the problem.
//! Matrices cross the boundary as row-major `double` arrays, one point per row.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use erpm::data_io::{load_matrix_csv, s_curve};
use erpm::metrics::{evaluate, MetricReport};
use erpm::reducers::{reduce, Method, ReducerSpec};
use erpm::spectral::{matrix_entropy, EntropyDecomposition};
use erpm::{DataMatrix, Error};

/// Result codes of every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErpmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    InvalidParameter = 3,
    Io = 4,
    /// Every singular value was zero.
    Degenerate = 5,
    /// The neighborhood graph had several components.
    Disconnected = 6,
    Numerical = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// Dimensionality reduction methods.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErpmMethod {
    Pca = 0,
    Kpca2 = 1,
    Lle = 2,
    Hlle = 3,
    Isomap = 4,
    InfoLle = 5,
    Identity = 6,
}

fn method_from_code(code: i32) -> Result<Method, Failure> {
    const TABLE: [(ErpmMethod, Method); 7] = [
        (ErpmMethod::Pca, Method::Pca),
        (ErpmMethod::Kpca2, Method::Kpca2),
        (ErpmMethod::Lle, Method::Lle),
        (ErpmMethod::Hlle, Method::Hlle),
        (ErpmMethod::Isomap, Method::Isomap),
        (ErpmMethod::InfoLle, Method::InfoLle),
        (ErpmMethod::Identity, Method::Identity),
    ];
    TABLE
        .iter()
        .find(|(c, _)| *c as i32 == code)
        .map(|(_, m)| *m)
        .ok_or_else(|| Failure(ErpmStatus::InvalidParameter, format!("unknown method code {code}")))
}

/// Global metrics of a report.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErpmGlobals {
    pub w_n: f64,
    pub w_v: f64,
    pub r_procrustes: f64,
    pub r_delta_h: f64,
    pub degenerate_count: usize,
}

/// Metrics of one neighborhood; NaN marks an undefined value.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErpmLocal {
    pub point_index: usize,
    pub delta_h: f64,
    pub procrustes_local: f64,
    pub degenerate: bool,
}

/// Spectral entropy of a matrix and its decomposition `entropy = ln(stable_rank) - epsilon_term`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErpmEntropy {
    pub stable_rank: f64,
    pub epsilon_term: f64,
    pub entropy: f64,
}

/// Opaque point matrix.
pub struct ErpmMatrix(DataMatrix);

/// Opaque evaluation report.
pub struct ErpmReport(MetricReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ErpmStatus {
    match e {
        Error::Input(_) | Error::Csv(_) | Error::Json(_) => ErpmStatus::InvalidInput,
        Error::Parameter(_) => ErpmStatus::InvalidParameter,
        Error::Io { .. } => ErpmStatus::Io,
        Error::DegenerateSpectrum | Error::AllDegenerate { .. } => ErpmStatus::Degenerate,
        Error::DisconnectedGraph { .. } => ErpmStatus::Disconnected,
        _ => ErpmStatus::Numerical,
    }
}

struct Failure(ErpmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ErpmStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ErpmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ErpmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("internal panic: {msg}"));
            ErpmStatus::Panic
        }
    }
}

unsafe fn matrix_ref<'a>(m: *const ErpmMatrix, what: &str) -> Result<&'a DataMatrix, Failure> {
    m.as_ref().map(|m| &m.0).ok_or_else(|| null(what))
}

unsafe fn read_row_major(rows: usize, cols: usize, data: *const f64) -> Result<DataMatrix, Failure> {
    if data.is_null() {
        return Err(null("data"));
    }
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Failure(ErpmStatus::InvalidParameter, "rows * cols overflows".into()))?;
    let values = std::slice::from_raw_parts(data, len).to_vec();
    Ok(DataMatrix::from_row_major(rows, cols, values)?)
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL after a success.
///
/// The string stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn erpm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies a row-major `rows x cols` array into a new matrix.
#[no_mangle]
pub unsafe extern "C" fn erpm_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut ErpmMatrix,
) -> ErpmStatus {
    guard(|| {
        let m = read_row_major(rows, cols, data)?;
        emit(out, ErpmMatrix(m))
    })
}

/// Reads a numeric CSV (optional header row) into a new matrix.
#[no_mangle]
pub unsafe extern "C" fn erpm_matrix_load_csv(path: *const c_char, out: *mut *mut ErpmMatrix) -> ErpmStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(ErpmStatus::InvalidInput, "path is not valid UTF-8".into()))?;
        let m = load_matrix_csv(Path::new(path))?;
        emit(out, ErpmMatrix(m))
    })
}

/// Number of rows, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn erpm_matrix_rows(m: *const ErpmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.nrows())
}

/// Number of columns, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn erpm_matrix_cols(m: *const ErpmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.ncols())
}

/// Copies the entries row-major into `buf`, which must hold at least `rows * cols` values.
#[no_mangle]
pub unsafe extern "C" fn erpm_matrix_copy_data(m: *const ErpmMatrix, buf: *mut f64, len: usize) -> ErpmStatus {
    guard(|| {
        let m = matrix_ref(m, "matrix")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let src = m.as_slice();
        if len < src.len() {
            return Err(Failure(
                ErpmStatus::InvalidParameter,
                format!("buffer holds {len} values, matrix has {}", src.len()),
            ));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn erpm_matrix_free(m: *mut ErpmMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Samples an S-curve; `truth` may be NULL, otherwise it receives the `n x 2` intrinsic coordinates.
#[no_mangle]
pub unsafe extern "C" fn erpm_s_curve(
    n: usize,
    noise: f64,
    seed: u64,
    points: *mut *mut ErpmMatrix,
    truth: *mut *mut ErpmMatrix,
) -> ErpmStatus {
    guard(|| {
        if points.is_null() {
            return Err(null("points"));
        }
        let d = s_curve(n, noise, seed)?;
        emit(points, ErpmMatrix(d.points))?;
        if !truth.is_null() {
            emit(truth, ErpmMatrix(d.ground_truth))?;
        }
        Ok(())
    })
}

/// Reduces `x` to `target_dim` dimensions. `method` is an [`ErpmMethod`] value;
/// `k` is ignored by methods without a neighborhood graph.
#[no_mangle]
pub unsafe extern "C" fn erpm_reduce(
    x: *const ErpmMatrix,
    method: i32,
    target_dim: usize,
    k: usize,
    out: *mut *mut ErpmMatrix,
) -> ErpmStatus {
    guard(|| {
        let x = matrix_ref(x, "x")?;
        let y = reduce(x, &ReducerSpec::new(method_from_code(method)?, target_dim, k))?;
        emit(out, ErpmMatrix(y))
    })
}

/// Evaluates embedding `y` of `x` with `k`-neighborhoods.
#[no_mangle]
pub unsafe extern "C" fn erpm_evaluate(
    x: *const ErpmMatrix,
    y: *const ErpmMatrix,
    k: usize,
    out: *mut *mut ErpmReport,
) -> ErpmStatus {
    guard(|| {
        let x = matrix_ref(x, "x")?;
        let y = matrix_ref(y, "y")?;
        let report = evaluate(x, y, k)?;
        emit(out, ErpmReport(report))
    })
}

#[no_mangle]
pub unsafe extern "C" fn erpm_report_globals(r: *const ErpmReport, out: *mut ErpmGlobals) -> ErpmStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("report"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let g = r.0.globals();
        *out = ErpmGlobals {
            w_n: g.w_n,
            w_v: g.w_v,
            r_procrustes: g.r_procrustes,
            r_delta_h: g.r_delta_h,
            degenerate_count: g.degenerate_count,
        };
        Ok(())
    })
}

/// Number of per-point records, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn erpm_report_len(r: *const ErpmReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.locals.len())
}

#[no_mangle]
pub unsafe extern "C" fn erpm_report_local(r: *const ErpmReport, index: usize, out: *mut ErpmLocal) -> ErpmStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("report"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let rec = r.0.locals.get(index).ok_or_else(|| {
            Failure(
                ErpmStatus::InvalidParameter,
                format!("index {index} out of range for {} records", r.0.locals.len()),
            )
        })?;
        *out = ErpmLocal {
            point_index: rec.point_index,
            delta_h: rec.delta_h,
            procrustes_local: rec.procrustes_local,
            degenerate: rec.degenerate,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn erpm_report_free(r: *mut ErpmReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Spectral entropy of a row-major `rows x cols` matrix.
#[no_mangle]
pub unsafe extern "C" fn erpm_spectral_entropy(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut ErpmEntropy,
) -> ErpmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = read_row_major(rows, cols, data)?;
        let EntropyDecomposition {
            stable_rank,
            epsilon_term,
            entropy,
        } = matrix_entropy(&m.to_dmatrix())?;
        *out = ErpmEntropy {
            stable_rank,
            epsilon_term,
            entropy,
        };
        Ok(())
    })
}
