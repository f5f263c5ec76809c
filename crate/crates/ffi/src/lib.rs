//! C ABI over the `skorokhod` core.
//!
//! Every fallible call returns an [`SkStatus`]; on failure the message is kept
//! per thread and can be copied out with [`sk_last_error`]. Objects cross the
//! boundary as opaque handles that must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use skorokhod::grid::uniform_grid;
use skorokhod::levy::LevyModel;
use skorokhod::m1::{dm_product, dm_strong_value};
use skorokhod::path::oscillation;
use skorokhod::{CadlagPath, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Domain = 4,
    Resource = 5,
    Parse = 6,
    Io = 7,
    Panic = 8,
    Other = 9,
}

/// A càdlàg path.
pub struct SkPath(CadlagPath);

/// A Lévy model.
pub struct SkModel(LevyModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SkStatus {
    match e {
        Error::AtSeed { source, .. } => status_of(source),
        Error::Domain { .. } => SkStatus::Domain,
        Error::DimensionMismatch { .. } | Error::HorizonMismatch { .. } | Error::GridMismatch(_) => {
            SkStatus::DimensionMismatch
        }
        Error::InvalidPath(_) | Error::InvalidArgument(_) | Error::EnsembleTooSmall { .. } | Error::NotDiagonal => {
            SkStatus::InvalidArgument
        }
        Error::Resource { .. } | Error::MatrixExpOverflow(_) => SkStatus::Resource,
        Error::Parse(_) | Error::Json(_) => SkStatus::Parse,
        Error::Io(_) => SkStatus::Io,
        _ => SkStatus::Other,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> SkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SkStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            SkStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn cstr<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail::Core(Error::Parse(format!("{what}: {e}"))))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn write<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    *out = v;
    Ok(())
}

/// Copies the calling thread's last error message into `buf`, NUL terminated
/// and truncated to `len`. Returns the full message length, 0 if there is none.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sk_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The maximal-inequality constant.
#[no_mangle]
pub extern "C" fn sk_kappa() -> f64 {
    skorokhod::convolution::kappa()
}

/// Path from `n` breakpoints; `left` and `right` are row-major `n x dim`.
///
/// # Safety
/// `times` must hold `n` values, `left` and `right` `n * dim` values each.
#[no_mangle]
pub unsafe extern "C" fn sk_path_new(
    dim: usize,
    n: usize,
    times: *const f64,
    left: *const f64,
    right: *const f64,
    out: *mut *mut SkPath,
) -> SkStatus {
    guard(|| {
        let len = n.checked_mul(dim).ok_or(Fail::Core(Error::InvalidArgument("size overflow".into())))?;
        let t = slice(times, n, "times")?.to_vec();
        let l = slice(left, len, "left")?.to_vec();
        let r = slice(right, len, "right")?.to_vec();
        put(out, SkPath(CadlagPath::new(dim, t, l, r)?), "out")
    })
}

/// Continuous piecewise-linear path through `n` points; `values` is row-major `n x dim`.
///
/// # Safety
/// `times` must hold `n` values and `values` `n * dim` values.
#[no_mangle]
pub unsafe extern "C" fn sk_path_polyline(
    dim: usize,
    n: usize,
    times: *const f64,
    values: *const f64,
    out: *mut *mut SkPath,
) -> SkStatus {
    guard(|| {
        let len = n.checked_mul(dim).ok_or(Fail::Core(Error::InvalidArgument("size overflow".into())))?;
        let v = slice(values, len, "values")?;
        sk_path_new_inner(dim, slice(times, n, "times")?, v, v, out)
    })
}

unsafe fn sk_path_new_inner(dim: usize, t: &[f64], l: &[f64], r: &[f64], out: *mut *mut SkPath) -> Result<(), Fail> {
    put(out, SkPath(CadlagPath::new(dim, t.to_vec(), l.to_vec(), r.to_vec())?), "out")
}

/// Reads a path CSV (`t, v_minus_*, v_plus_*`).
///
/// # Safety
/// `file` must be a NUL-terminated UTF-8 path.
#[no_mangle]
pub unsafe extern "C" fn sk_path_read_csv(file: *const c_char, out: *mut *mut SkPath) -> SkStatus {
    guard(|| {
        let f = std::fs::File::open(cstr(file, "file")?).map_err(Error::from)?;
        put(out, SkPath(CadlagPath::read_csv(std::io::BufReader::new(f))?), "out")
    })
}

/// # Safety
/// `p` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sk_path_free(p: *mut SkPath) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sk_path_dim(p: *const SkPath) -> usize {
    p.as_ref().map_or(0, |p| p.0.dim())
}

/// Number of breakpoints.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sk_path_len(p: *const SkPath) -> usize {
    p.as_ref().map_or(0, |p| p.0.len())
}

/// Right-continuous value at `t`, written to `out[0..dim]`.
///
/// # Safety
/// `p` must be a live handle and `out` must have room for `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn sk_path_evaluate(p: *const SkPath, t: f64, out: *mut f64, out_len: usize) -> SkStatus {
    guard(|| {
        let p = handle(p, "path")?;
        let v = p.0.evaluate(t)?;
        if out_len < v.len() {
            return Err(Error::DimensionMismatch { expected: v.len(), got: out_len }.into());
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        Ok(())
    })
}

/// Strong M1 distance at densification `mesh` (0 selects the default).
///
/// # Safety
/// `a` and `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_m1_distance(a: *const SkPath, b: *const SkPath, mesh: f64, out: *mut f64) -> SkStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        let d = if mesh == 0.0 { skorokhod::m1::dm_strong_default(&a.0, &b.0)?.distance } else { dm_strong_value(&a.0, &b.0, mesh)? };
        write(out, d, "out")
    })
}

/// Product-mode M1 distance `sum_k 2^-(k+1) rho_k / (1 + rho_k)`.
///
/// # Safety
/// `a` and `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_m1_product_distance(a: *const SkPath, b: *const SkPath, mesh: f64, out: *mut f64) -> SkStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        let mesh = if mesh == 0.0 { skorokhod::m1::default_mesh(&a.0) } else { mesh };
        write(out, dm_product(&a.0, &b.0, mesh)?, "out")
    })
}

/// Oscillation `M(f; delta)`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_oscillation(p: *const SkPath, delta: f64, mesh: f64, out: *mut f64) -> SkStatus {
    guard(|| {
        let p = handle(p, "path")?;
        let mesh = if mesh == 0.0 { skorokhod::m1::default_mesh(&p.0) } else { mesh };
        write(out, oscillation(&p.0, delta, mesh)?, "out")
    })
}

/// Parses and validates a model from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn sk_model_from_json(json: *const c_char, out: *mut *mut SkModel) -> SkStatus {
    guard(|| put(out, SkModel(LevyModel::from_json(cstr(json, "json")?)?), "out"))
}

/// # Safety
/// `m` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sk_model_free(m: *mut SkModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sk_model_dim(m: *const SkModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim)
}

/// Lévy symbol `Psi(u)`.
///
/// # Safety
/// `u` must hold `d` values; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_model_symbol(m: *const SkModel, u: *const f64, d: usize, re: *mut f64, im: *mut f64) -> SkStatus {
    guard(|| {
        let psi = handle(m, "model")?.0.symbol(slice(u, d, "u")?)?;
        write(re, psi.re, "re")?;
        write(im, psi.im, "im")
    })
}

/// Samples the model on `steps` uniform cells of `[0, horizon]`; the result is
/// the piecewise-constant path.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_model_sample_path(
    m: *const SkModel,
    horizon: f64,
    steps: usize,
    seed: u64,
    out: *mut *mut SkPath,
) -> SkStatus {
    guard(|| {
        let m = handle(m, "model")?;
        let grid = uniform_grid(0.0, horizon, steps)?;
        put(out, SkPath(m.0.sample_path(&grid, seed)?.path()), "out")
    })
}
