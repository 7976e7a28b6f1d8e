//! C ABI over the radixtiles core.
//!
//! Conventions: every fallible function returns [`RtStatus`] and writes its
//! result through an out-pointer; on failure the out-pointer is untouched and
//! [`rt_last_error`] holds a message for the calling thread. Panics never
//! cross the boundary; they surface as `RT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use radixtiles::digits::{canonical_digits_capped, validate_digit_set, DigitSet};
use radixtiles::lattice::{IntMatrix, IntVector};
use radixtiles::radix::{decide_radix, expand, DecideOptions, DEFAULT_MAX_STEPS};
use radixtiles::spectral::{is_dilation_matrix, mu_exceeds_two};
use radixtiles::tile::{
    multiplicity_with, rasterize, render_cells, tile_bounding_radius, tile_points, TileOracle, Window,
};
use radixtiles::wavelet::lowpass_symbol;
use radixtiles::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularMatrix = 3,
    DimensionMismatch = 4,
    InvalidDigits = 5,
    NotDilation = 6,
    ResourceLimit = 7,
    StepBudgetExceeded = 8,
    NoBetaFound = 9,
    Io = 10,
    Internal = 11,
    Panic = 12,
}

/// Opaque integer matrix.
pub struct RtMatrix {
    inner: IntMatrix,
}

/// Opaque validated digit set (carries its matrix).
pub struct RtDigitSet {
    inner: DigitSet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RtStatus {
    match e {
        Error::SingularMatrix => RtStatus::SingularMatrix,
        Error::DimensionMismatch { .. } | Error::DimensionError { .. } => RtStatus::DimensionMismatch,
        Error::WrongCount { .. } | Error::DuplicateCoset { .. } | Error::MissingZero => RtStatus::InvalidDigits,
        Error::NotDilation => RtStatus::NotDilation,
        Error::ResourceLimit { .. } => RtStatus::ResourceLimit,
        Error::StepBudgetExceeded(_) => RtStatus::StepBudgetExceeded,
        Error::NoBetaFound(_) => RtStatus::NoBetaFound,
        Error::Io(_) => RtStatus::Io,
        Error::InvalidMatrix(_) | Error::Parse(_) | Error::Json(_) | Error::NotTerminated => RtStatus::InvalidArgument,
        Error::Internal(_) => RtStatus::Internal,
    }
}

struct Fail(RtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(RtStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RtStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            RtStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(RtStatus::NullPointer, format!("{what} is null")))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(RtStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(RtStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn read_i64s<'a>(p: *const i64, len: usize, what: &str) -> Result<&'a [i64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail(RtStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).map_err(|_| Fail(RtStatus::Internal, "string contains NUL".into()))
}

fn json<T: serde::Serialize>(v: &T) -> Result<*mut c_char, Fail> {
    to_c_string(serde_json::to_string(v).map_err(Error::from)?)
}

/// Message for the last failed call on this thread ("" after a success).
/// The pointer stays valid until the next rt_* call on the same thread.
#[no_mangle]
pub extern "C" fn rt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// n x n matrix from row-major entries.
///
/// # Safety
/// `entries` must point to n*n readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_matrix_new(n: usize, entries: *const i64, out: *mut *mut RtMatrix) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        if n == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        let len = n.checked_mul(n).ok_or_else(|| invalid("dimension too large"))?;
        let e = read_i64s(entries, len, "entries")?;
        let rows: Vec<&[i64]> = e.chunks(n).collect();
        *out = Box::into_raw(Box::new(RtMatrix { inner: IntMatrix::from_i64(&rows) }));
        Ok(())
    })
}

/// Matrix from JSON rows, e.g. `[[1,1],[-1,1]]` (numbers or decimal strings).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_matrix_from_json(json: *const c_char, out: *mut *mut RtMatrix) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        let m: IntMatrix = serde_json::from_str(read_str(json, "json")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(RtMatrix { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from rt_matrix_* and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rt_matrix_free(m: *mut RtMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_matrix_dim(m: *const RtMatrix, out: *mut usize) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = deref(m, "matrix")?.inner.dim();
        Ok(())
    })
}

/// All eigenvalues strictly outside the unit circle (exact test).
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_is_dilation(m: *const RtMatrix, out: *mut bool) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = is_dilation_matrix(&deref(m, "matrix")?.inner);
        Ok(())
    })
}

/// Smallest singular value strictly above 2 (exact test).
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_mu_exceeds_two(m: *const RtMatrix, out: *mut bool) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = mu_exceeds_two(&deref(m, "matrix")?.inner);
        Ok(())
    })
}

/// Canonical digit set A(F) ∩ Z^n; `cap` bounds the enumeration (0 = default).
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_digits_canonical(m: *const RtMatrix, cap: u64, out: *mut *mut RtDigitSet) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        let cap = if cap == 0 { DecideOptions::default().cap } else { cap };
        let ds = canonical_digits_capped(&deref(m, "matrix")?.inner, cap)?;
        *out = Box::into_raw(Box::new(RtDigitSet { inner: ds }));
        Ok(())
    })
}

/// Validates `count` digits given as a row-major count x n array.
///
/// # Safety
/// `m` must be a live handle, `digits` must hold count*n values and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_digits_new(
    m: *const RtMatrix,
    count: usize,
    digits: *const i64,
    out: *mut *mut RtDigitSet,
) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        let a = &deref(m, "matrix")?.inner;
        let n = a.dim();
        let len = count.checked_mul(n).ok_or_else(|| invalid("digit count too large"))?;
        let raw = read_i64s(digits, len, "digits")?;
        let list: Vec<IntVector> = raw.chunks(n).map(IntVector::from_i64).collect();
        let ds = validate_digit_set(a, list)?;
        *out = Box::into_raw(Box::new(RtDigitSet { inner: ds }));
        Ok(())
    })
}

/// Digit set from `{"matrix": [...], "digits": [...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_digits_from_json(json: *const c_char, out: *mut *mut RtDigitSet) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = read_str(json, "json")?;
        let ds: DigitSet = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        *out = Box::into_raw(Box::new(RtDigitSet { inner: ds }));
        Ok(())
    })
}

/// # Safety
/// `d` must come from rt_digits_* and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rt_digits_free(d: *mut RtDigitSet) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_digits_count(d: *const RtDigitSet, out: *mut usize) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = deref(d, "digit set")?.inner.digits().len();
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle; `out` must be writable. Free the result with
/// rt_string_free.
#[no_mangle]
pub unsafe extern "C" fn rt_digits_to_json(d: *const RtDigitSet, out: *mut *mut c_char) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = json(&deref(d, "digit set")?.inner)?;
        Ok(())
    })
}

/// Decides whether every lattice vector has a finite expansion. `cap` bounds
/// the ball enumeration (0 = default). `report`, if non-null, receives the
/// full JSON report.
///
/// # Safety
/// `d` must be a live handle; `yields` must be writable; `report` may be null.
#[no_mangle]
pub unsafe extern "C" fn rt_decide(
    d: *const RtDigitSet,
    cap: u64,
    yields: *mut bool,
    report: *mut *mut c_char,
) -> RtStatus {
    guard(|| {
        check_out(yields, "yields")?;
        let mut opts = DecideOptions::default();
        if cap != 0 {
            opts.cap = cap;
        }
        let r = decide_radix(&deref(d, "digit set")?.inner, &opts)?;
        let text = if report.is_null() { None } else { Some(json(&r)?) };
        *yields = r.yields;
        if let Some(t) = text {
            *report = t;
        }
        Ok(())
    })
}

/// Digit expansion of `x` (length n) as JSON. `max_steps` 0 = default.
///
/// # Safety
/// `d` must be a live handle, `x` must hold n values and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rt_expand_json(
    d: *const RtDigitSet,
    x: *const i64,
    n: usize,
    max_steps: usize,
    out: *mut *mut c_char,
) -> RtStatus {
    guard(|| {
        check_out(out, "out")?;
        let ds = &deref(d, "digit set")?.inner;
        let v = IntVector::from_i64(read_i64s(x, n, "x")?);
        let steps = if max_steps == 0 { DEFAULT_MAX_STEPS } else { max_steps };
        *out = json(&expand(&v, ds, steps)?)?;
        Ok(())
    })
}

/// Mean number of lattice translates of T covering a uniform point of
/// [-1/2, 1/2)^n; about 1 exactly when T tiles by Z^n.
///
/// # Safety
/// `d` must be a live handle; `mean` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_multiplicity(
    d: *const RtDigitSet,
    samples: usize,
    depth: u32,
    seed: u64,
    mean: *mut f64,
) -> RtStatus {
    guard(|| {
        check_out(mean, "mean")?;
        let oracle = TileOracle::new(&deref(d, "digit set")?.inner)?;
        *mean = multiplicity_with(&oracle, samples, depth, seed).mean_multiplicity;
        Ok(())
    })
}

/// m0(xi) = q^{-1} sum_d exp(-2 pi i d.xi).
///
/// # Safety
/// `d` must be a live handle, `xi` must hold n values, `re` and `im` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rt_lowpass_symbol(
    d: *const RtDigitSet,
    xi: *const f64,
    n: usize,
    re: *mut f64,
    im: *mut f64,
) -> RtStatus {
    guard(|| {
        check_out(re, "re")?;
        check_out(im, "im")?;
        if xi.is_null() && n > 0 {
            return Err(Fail(RtStatus::NullPointer, "xi is null".into()));
        }
        let xs = if n == 0 { &[][..] } else { std::slice::from_raw_parts(xi, n) };
        let m = lowpass_symbol(&deref(d, "digit set")?.inner, xs)?;
        *re = m.re;
        *im = m.im;
        Ok(())
    })
}

/// Writes a binary PGM of the depth-k tile approximation (2-D only).
/// `style` 0 marks each point's pixel, 1 fills each point's cell.
/// `window` is {xmin, xmax, ymin, ymax} or null for the square of radius R_T.
///
/// # Safety
/// `d` must be a live handle, `path` a NUL-terminated string and `window`
/// null or 4 readable values.
#[no_mangle]
pub unsafe extern "C" fn rt_render_pgm(
    d: *const RtDigitSet,
    depth: u32,
    width: usize,
    height: usize,
    style: u32,
    window: *const f64,
    path: *const c_char,
) -> RtStatus {
    guard(|| {
        let ds = &deref(d, "digit set")?.inner;
        let path = read_str(path, "path")?;
        if width == 0 || height == 0 {
            return Err(invalid("raster size must be positive"));
        }
        let w = if window.is_null() {
            Window::centered(tile_bounding_radius(ds)?)
        } else {
            let v = std::slice::from_raw_parts(window, 4);
            Window { x_min: v[0], x_max: v[1], y_min: v[2], y_max: v[3] }
        };
        if !(w.x_min < w.x_max && w.y_min < w.y_max) {
            return Err(invalid("window needs xmin < xmax and ymin < ymax"));
        }
        let cap = DecideOptions::default().cap;
        let raster = match style {
            0 => {
                if ds.dim() != 2 {
                    return Err(Error::DimensionError { expected: 2, got: ds.dim() }.into());
                }
                rasterize(&tile_points(ds, depth, cap)?, width, height, &w)
            }
            1 => render_cells(ds, depth, width, height, &w, cap)?,
            s => return Err(invalid(format!("unknown style {s}"))),
        };
        raster.write_pgm(Path::new(path))?;
        Ok(())
    })
}
