//! C interface. Every function returns an [`SrStatus`]; on failure the
//! message is available from [`sr_last_error_message`] on the same thread.
//! Handles are heap objects owned by the caller and released with the
//! matching `*_free` function; passing NULL to a free function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use num_complex::Complex64;
use sampling_recovery::discretization::{draw_points, gram_spectrum, m_budget, MRule};
use sampling_recovery::greedy::{womp, DictionaryOnPoints};
use sampling_recovery::index_sets::{full_cube, hyperbolic_cross, IndexSet, MultiIndex};
use sampling_recovery::recovery::{recover, MSpec, RecoveryConfig};
use sampling_recovery::trig::{sample, PointSet, SparseCoefFn};
use sampling_recovery::Error;

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    CapExceeded = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque set of multi-indices.
pub struct SrIndexSet(IndexSet);

/// Opaque point set in [0, 2π)^d.
pub struct SrPointSet(PointSet);

/// Opaque finitely supported coefficient function.
pub struct SrCoefFn(SparseCoefFn);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SrStatus {
    match e {
        Error::DimensionMismatch { .. } => SrStatus::DimensionMismatch,
        Error::CapExceeded { .. } => SrStatus::CapExceeded,
        Error::Io(_) | Error::Csv(_) => SrStatus::Io,
        _ => SrStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SrStatus, String)>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SrStatus::Panic
        }
    }
}

fn lift<T>(r: sampling_recovery::Result<T>) -> Result<T, (SrStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SrStatus, String) {
    (SrStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SrStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (SrStatus, String)> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next failure on the same thread.
#[no_mangle]
pub extern "C" fn sr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// The hyperbolic cross Q_n in dimension d.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sr_hyperbolic_cross(n: u32, d: usize, out: *mut *mut SrIndexSet) -> SrStatus {
    guard(|| put(out, SrIndexSet(lift(hyperbolic_cross(n, d))?)))
}

/// The cube [−m, m]^d.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sr_full_cube(m: u64, d: usize, out: *mut *mut SrIndexSet) -> SrStatus {
    guard(|| put(out, SrIndexSet(lift(full_cube(m, d))?)))
}

/// Builds a set from `len` multi-indices stored row by row in `coords`.
///
/// # Safety
/// `coords` must point to `len * d` readable integers; `out` as above.
#[no_mangle]
pub unsafe extern "C" fn sr_index_set_from_coords(
    d: usize,
    coords: *const i64,
    len: usize,
    out: *mut *mut SrIndexSet,
) -> SrStatus {
    guard(|| {
        if coords.is_null() && len > 0 {
            return Err(null("coords"));
        }
        let flat = if len == 0 { &[][..] } else { slice::from_raw_parts(coords, len * d) };
        let members = flat.chunks(d.max(1)).map(MultiIndex::from).collect();
        put(out, SrIndexSet(lift(IndexSet::from_members(d, members))?))
    })
}

/// Number of members, or 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_index_set_len(set: *const SrIndexSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Dimension, or 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_index_set_dim(set: *const SrIndexSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.dim())
}

/// Copies member `i` (in sorted order) into `coords`, which holds `dim`
/// integers.
///
/// # Safety
/// `set` must be a live handle and `coords` writable for `dim` integers.
#[no_mangle]
pub unsafe extern "C" fn sr_index_set_get(set: *const SrIndexSet, i: usize, coords: *mut i64) -> SrStatus {
    guard(|| {
        let set = deref(set, "set")?;
        if coords.is_null() {
            return Err(null("coords"));
        }
        let k = set.0.get(i).ok_or_else(|| {
            (SrStatus::InvalidArgument, format!("index {i} out of range for {} members", set.0.len()))
        })?;
        slice::from_raw_parts_mut(coords, set.0.dim()).copy_from_slice(k.coords());
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_index_set_free(set: *mut SrIndexSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// m independent uniform points in [0, 2π)^d.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sr_draw_points(m: usize, d: usize, seed: u64, out: *mut *mut SrPointSet) -> SrStatus {
    guard(|| put(out, SrPointSet(lift(draw_points(m, d, seed))?)))
}

/// Points from `m * d` coordinates stored row by row.
///
/// # Safety
/// `coords` must point to `m * d` readable doubles; `out` as above.
#[no_mangle]
pub unsafe extern "C" fn sr_point_set_from_coords(
    d: usize,
    coords: *const f64,
    m: usize,
    out: *mut *mut SrPointSet,
) -> SrStatus {
    guard(|| {
        if coords.is_null() {
            return Err(null("coords"));
        }
        let flat = slice::from_raw_parts(coords, m * d).to_vec();
        put(out, SrPointSet(lift(PointSet::from_flat(d, flat))?))
    })
}

/// Number of points, or 0 for NULL.
///
/// # Safety
/// `points` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_point_set_len(points: *const SrPointSet) -> usize {
    points.as_ref().map_or(0, |p| p.0.len())
}

/// # Safety
/// `points` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_point_set_free(points: *mut SrPointSet) {
    if !points.is_null() {
        drop(Box::from_raw(points));
    }
}

/// Extreme eigenvalues of the discrete Gram matrix of `set` on `points`.
///
/// # Safety
/// Handles must be live; `lo` and `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_gram_spectrum(
    points: *const SrPointSet,
    set: *const SrIndexSet,
    lo: *mut f64,
    hi: *mut f64,
) -> SrStatus {
    guard(|| {
        let (points, set) = (deref(points, "points")?, deref(set, "set")?);
        if lo.is_null() || hi.is_null() {
            return Err(null("output"));
        }
        let (l, h) = lift(gram_spectrum(&points.0, &set.0))?;
        *lo = l;
        *hi = h;
        Ok(())
    })
}

/// ⌈c·v·(ln 2v)^e⌉ with e = `log_exponent`, which must be 3 or 4.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_m_budget(v: usize, log_exponent: i32, c_user: f64, out: *mut usize) -> SrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let rule = match log_exponent {
            3 => MRule::Log3,
            4 => MRule::Log4,
            e => return Err((SrStatus::InvalidArgument, format!("log exponent must be 3 or 4, got {e}"))),
        };
        *out = lift(m_budget(v, rule, c_user))?;
        Ok(())
    })
}

/// The zero function in dimension d.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sr_coef_fn_new(d: usize, out: *mut *mut SrCoefFn) -> SrStatus {
    guard(|| {
        if d == 0 {
            return Err((SrStatus::InvalidArgument, "dimension must be at least 1".into()));
        }
        put(out, SrCoefFn(SparseCoefFn::zero(d)))
    })
}

/// Sets the coefficient of frequency `k` (dim integers); zero removes it.
///
/// # Safety
/// `f` must be live and `k` readable for the dimension of `f`.
#[no_mangle]
pub unsafe extern "C" fn sr_coef_fn_set(f: *mut SrCoefFn, k: *const i64, re: f64, im: f64) -> SrStatus {
    guard(|| {
        let f = f.as_mut().ok_or_else(|| null("f"))?;
        if k.is_null() {
            return Err(null("k"));
        }
        let idx = MultiIndex::from(slice::from_raw_parts(k, f.0.dim()));
        lift(f.0.set(idx, Complex64::new(re, im)))
    })
}

/// Number of nonzero terms, or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_coef_fn_len(f: *const SrCoefFn) -> usize {
    f.as_ref().map_or(0, |f| f.0.len())
}

/// Term `i` in lexicographic frequency order.
///
/// # Safety
/// `f` must be live; `k` writable for the dimension; `re`, `im` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_coef_fn_term(
    f: *const SrCoefFn,
    i: usize,
    k: *mut i64,
    re: *mut f64,
    im: *mut f64,
) -> SrStatus {
    guard(|| {
        let f = deref(f, "f")?;
        if k.is_null() || re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        let (idx, c) = f.0.iter().nth(i).ok_or_else(|| {
            (SrStatus::InvalidArgument, format!("term {i} out of range for {} terms", f.0.len()))
        })?;
        slice::from_raw_parts_mut(k, f.0.dim()).copy_from_slice(idx.coords());
        *re = c.re;
        *im = c.im;
        Ok(())
    })
}

/// # Safety
/// `f` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_coef_fn_free(f: *mut SrCoefFn) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// f at every point; `re` and `im` receive one value per point.
///
/// # Safety
/// Handles must be live; `re` and `im` writable for the point count.
#[no_mangle]
pub unsafe extern "C" fn sr_sample(f: *const SrCoefFn, points: *const SrPointSet, re: *mut f64, im: *mut f64) -> SrStatus {
    guard(|| {
        let (f, points) = (deref(f, "f")?, deref(points, "points")?);
        if re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        let values = lift(sample(&f.0, &points.0))?;
        let (re, im) = (
            slice::from_raw_parts_mut(re, values.len()),
            slice::from_raw_parts_mut(im, values.len()),
        );
        for (j, v) in values.iter().enumerate() {
            re[j] = v.re;
            im[j] = v.im;
        }
        Ok(())
    })
}

/// WOMP on samples (`re`, `im`, one per point) over the trigonometric
/// columns of `set`. Writes the approximant and, unless NULL, the
/// `iterations + 1` residual norms.
///
/// # Safety
/// Handles must be live; `re`, `im` readable for the point count;
/// `residual_norms` NULL or writable for `iterations + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_womp(
    points: *const SrPointSet,
    set: *const SrIndexSet,
    re: *const f64,
    im: *const f64,
    t: f64,
    iterations: usize,
    approximant: *mut *mut SrCoefFn,
    residual_norms: *mut f64,
) -> SrStatus {
    guard(|| {
        let (points, set) = (deref(points, "points")?, deref(set, "set")?);
        if re.is_null() || im.is_null() {
            return Err(null("samples"));
        }
        let m = points.0.len();
        let (re, im) = (slice::from_raw_parts(re, m), slice::from_raw_parts(im, m));
        let f0: Vec<Complex64> = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let dict = lift(DictionaryOnPoints::new(set.0.clone(), points.0.clone()))?;
        let trace = lift(womp(&f0, &dict, t, iterations))?;
        if !residual_norms.is_null() {
            slice::from_raw_parts_mut(residual_norms, trace.residual_norms.len()).copy_from_slice(&trace.residual_norms);
        }
        put(approximant, SrCoefFn(trace.approximant(&dict)))
    })
}

/// Settings of [`sr_recover`]; obtain defaults from
/// [`sr_recovery_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SrRecoveryOptions {
    pub v: usize,
    pub p: f64,
    pub t: f64,
    /// Iteration multiplier.
    pub c: f64,
    pub c_user: f64,
    /// 3 or 4 for the log budgets, 0 to use `m_explicit`.
    pub log_exponent: i32,
    pub m_explicit: usize,
    pub seed: u64,
    pub verify_ud: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SrRecoveryResult {
    pub m: usize,
    pub err_lp: f64,
    pub err_l2_disc: f64,
    pub iterations: usize,
    /// 1 pass, 0 fail, −1 when not checked.
    pub ud_pass: i32,
    pub redraws: usize,
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_recovery_options_default(out: *mut SrRecoveryOptions) -> SrStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = RecoveryConfig::default();
        *out = SrRecoveryOptions {
            v: d.v,
            p: d.p,
            t: d.t,
            c: d.c,
            c_user: d.c_user,
            log_exponent: 3,
            m_explicit: 0,
            seed: d.seed,
            verify_ud: d.verify_ud,
        };
        Ok(())
    })
}

/// WOMP recovery of f from random samples over the automatic hyperbolic
/// cross dictionary.
///
/// # Safety
/// `f` and `opts` must be live; `approximant` and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_recover(
    f: *const SrCoefFn,
    opts: *const SrRecoveryOptions,
    approximant: *mut *mut SrCoefFn,
    result: *mut SrRecoveryResult,
) -> SrStatus {
    guard(|| {
        let (f, o) = (deref(f, "f")?, deref(opts, "opts")?);
        if result.is_null() {
            return Err(null("result"));
        }
        let m_rule = match o.log_exponent {
            0 => MSpec::Explicit(o.m_explicit),
            3 => MSpec::Rule(MRule::Log3),
            4 => MSpec::Rule(MRule::Log4),
            e => return Err((SrStatus::InvalidArgument, format!("log exponent must be 0, 3 or 4, got {e}"))),
        };
        let cfg = RecoveryConfig {
            d: f.0.dim(),
            p: o.p,
            v: o.v,
            m_rule,
            c_user: o.c_user,
            t: o.t,
            c: o.c,
            seed: o.seed,
            verify_ud: o.verify_ud,
            ..RecoveryConfig::default()
        };
        let (g, report) = lift(recover(&f.0, &cfg, None))?;
        *result = SrRecoveryResult {
            m: report.m,
            err_lp: report.err_lp,
            err_l2_disc: report.err_l2_disc,
            iterations: report.iterations,
            ud_pass: report.ud_pass().map_or(-1, i32::from),
            redraws: report.redraws,
        };
        if !approximant.is_null() {
            *approximant = Box::into_raw(Box::new(SrCoefFn(g)));
        }
        Ok(())
    })
}
