//! C ABI over the `gradmix` estimators.
//!
//! Objectives are opaque [`GradmixObjective`] handles, created from the built-in
//! registry or from a C callback and released with [`gradmix_objective_free`]. Every
//! fallible call returns a [`GradmixStatus`]; on failure a message is kept per thread
//! and read with [`gradmix_last_error`].

use gradmix::estimators::{Estimator, EstimatorParams, Scheme};
use gradmix::{mixing_coefficients, noisy_wrap, Error, Exact, NoiseSpec, Objective};
use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by every fallible function. `GRADMIX_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradmixStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownObjective = 3,
    DimensionMismatch = 4,
    NonFinite = 5,
    BufferTooSmall = 6,
    MissingGradient = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradmixScheme {
    Ffd = 0,
    Cfd = 1,
    Gsg = 2,
    Cgsg = 3,
    Nmxfd = 4,
    MxfdRaw = 5,
    AvgCfd = 6,
}

impl From<GradmixScheme> for Scheme {
    fn from(s: GradmixScheme) -> Self {
        match s {
            GradmixScheme::Ffd => Scheme::Ffd,
            GradmixScheme::Cfd => Scheme::Cfd,
            GradmixScheme::Gsg => Scheme::Gsg,
            GradmixScheme::Cgsg => Scheme::Cgsg,
            GradmixScheme::Nmxfd => Scheme::Nmxfd,
            GradmixScheme::MxfdRaw => Scheme::MxfdRaw,
            GradmixScheme::AvgCfd => Scheme::AvgCfd,
        }
    }
}

/// Estimator settings. Zero in `h`, `half_width`, `m` or `directions` selects the
/// library default; `lambda > 0` adds seeded Gaussian noise to every evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GradmixParams {
    pub scheme: GradmixScheme,
    /// Smoothing scale σ.
    pub sigma: f64,
    /// Quadrature step h.
    pub h: f64,
    /// Truncation half-width S = m·h.
    pub half_width: f64,
    /// Number of mixed central differences m.
    pub m: usize,
    /// Sampled directions M.
    pub directions: usize,
    pub seed: u64,
    /// Noise standard deviation λ.
    pub lambda: f64,
    pub noise_seed: u64,
}

type RawCallback = extern "C" fn(x: *const f64, n: usize, user_data: *mut c_void) -> f64;

/// Scalar callback `value = f(x, n, user_data)`; NULL is rejected.
pub type GradmixCallback = Option<extern "C" fn(x: *const f64, n: usize, user_data: *mut c_void) -> f64>;

/// Opaque objective handle.
pub struct GradmixObjective {
    inner: Box<dyn Objective>,
}

struct CallbackObjective {
    name: String,
    dim: usize,
    callback: RawCallback,
    user_data: *mut c_void,
}

// The callback is only ever invoked on the thread that called into the library.
unsafe impl Send for CallbackObjective {}
unsafe impl Sync for CallbackObjective {}

impl Objective for CallbackObjective {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.callback)(x.as_ptr(), x.len(), self.user_data)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> GradmixStatus {
    match e {
        Error::InvalidArgument { .. } | Error::UnknownScheme(_) => GradmixStatus::InvalidArgument,
        Error::UnknownObjective { .. } => GradmixStatus::UnknownObjective,
        Error::DimensionMismatch { .. } => GradmixStatus::DimensionMismatch,
        Error::NonFinite { .. } => GradmixStatus::NonFinite,
        Error::MissingGradient(_) => GradmixStatus::MissingGradient,
        _ => GradmixStatus::InvalidArgument,
    }
}

fn fail(status: GradmixStatus, msg: impl Into<String>) -> GradmixStatus {
    set_error(msg);
    status
}

/// Runs `body`, mapping library errors and panics to status codes.
fn guard(body: impl FnOnce() -> Result<(), GradmixStatus>) -> GradmixStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GradmixStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(GradmixStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> GradmixStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], GradmixStatus> {
    if p.is_null() {
        return Err(fail(GradmixStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], GradmixStatus> {
    if p.is_null() {
        return Err(fail(GradmixStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn handle<'a>(obj: *const GradmixObjective) -> Result<&'a GradmixObjective, GradmixStatus> {
    obj.as_ref().ok_or_else(|| fail(GradmixStatus::NullPointer, "objective handle is null"))
}

/// Message for the last failed call on this thread, or NULL. Valid until the next call
/// into the library from the same thread.
#[no_mangle]
pub extern "C" fn gradmix_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Default settings for `scheme` at scale `sigma`.
#[no_mangle]
pub extern "C" fn gradmix_params_default(scheme: GradmixScheme, sigma: f64) -> GradmixParams {
    GradmixParams {
        scheme,
        sigma,
        h: 0.0,
        half_width: 0.0,
        m: 0,
        directions: 0,
        seed: 0,
        lambda: 0.0,
        noise_seed: 0,
    }
}

/// Looks up a built-in objective. `dim = 0` keeps its default dimension.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gradmix_objective_from_registry(
    name: *const c_char,
    dim: usize,
    out: *mut *mut GradmixObjective,
) -> GradmixStatus {
    guard(|| {
        if name.is_null() || out.is_null() {
            return Err(fail(GradmixStatus::NullPointer, "name and out must be non-null"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| fail(GradmixStatus::InvalidArgument, "name is not UTF-8"))?;
        let inner = gradmix::testfns::lookup(name, (dim > 0).then_some(dim)).map_err(lib)?;
        *out = Box::into_raw(Box::new(GradmixObjective { inner }));
        Ok(())
    })
}

/// Wraps a C callback of dimension `dim`. `user_data` is passed back unchanged and must
/// outlive the handle.
///
/// # Safety
/// `out` must be a valid pointer; `callback` must be safe to call with any `x` of
/// length `dim`.
#[no_mangle]
pub unsafe extern "C" fn gradmix_objective_from_callback(
    dim: usize,
    callback: GradmixCallback,
    user_data: *mut c_void,
    out: *mut *mut GradmixObjective,
) -> GradmixStatus {
    guard(|| {
        let Some(callback) = callback else {
            return Err(fail(GradmixStatus::NullPointer, "callback is null"));
        };
        if out.is_null() {
            return Err(fail(GradmixStatus::NullPointer, "out is null"));
        }
        if dim == 0 {
            return Err(fail(GradmixStatus::InvalidArgument, "dim must be >= 1"));
        }
        let inner = Box::new(CallbackObjective {
            name: "callback".into(),
            dim,
            callback,
            user_data,
        });
        *out = Box::into_raw(Box::new(GradmixObjective { inner }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `obj` must come from one of the constructors and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gradmix_objective_free(obj: *mut GradmixObjective) {
    if !obj.is_null() {
        drop(Box::from_raw(obj));
    }
}

/// Dimension of the objective, 0 for NULL.
///
/// # Safety
/// `obj` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gradmix_objective_dim(obj: *const GradmixObjective) -> usize {
    obj.as_ref().map_or(0, |o| o.inner.dim())
}

/// Estimates the gradient at `x` (length `n`) into `out` (capacity `out_len >= n`).
/// `evals`, when non-NULL, receives the number of objective calls.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `obj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gradmix_estimate(
    obj: *const GradmixObjective,
    params: *const GradmixParams,
    x: *const f64,
    n: usize,
    out: *mut f64,
    out_len: usize,
    evals: *mut usize,
) -> GradmixStatus {
    guard(|| {
        let f = handle(obj)?.inner.as_ref();
        let p = *params
            .as_ref()
            .ok_or_else(|| fail(GradmixStatus::NullPointer, "params is null"))?;
        let x = slice(x, n, "x")?;
        if n != f.dim() {
            return Err(lib(Error::DimensionMismatch {
                expected: f.dim(),
                got: n,
            }));
        }
        let out = slice_mut(out, out_len, "out")?;
        if out_len < n {
            return Err(fail(GradmixStatus::BufferTooSmall, format!("out holds {out_len} values, need {n}")));
        }
        let mut ep = EstimatorParams::new(p.scheme.into(), p.sigma);
        ep.h = (p.h != 0.0).then_some(p.h);
        ep.s = (p.half_width != 0.0).then_some(p.half_width);
        ep.m = (p.m != 0).then_some(p.m);
        ep.directions = (p.directions != 0).then_some(p.directions);
        ep.seed = p.seed;
        let est = Estimator::new(ep.resolve().map_err(lib)?).map_err(lib)?;
        let g = if p.lambda == 0.0 {
            est.estimate(&mut Exact(f), x)
        } else {
            let spec = NoiseSpec::new(p.lambda, p.noise_seed).map_err(lib)?;
            let mut noisy = noisy_wrap(f, spec).map_err(lib)?;
            est.estimate(&mut noisy, x)
        }
        .map_err(lib)?;
        out[..n].copy_from_slice(&g.vector);
        if !evals.is_null() {
            *evals = g.evals;
        }
        Ok(())
    })
}

/// Analytic gradient of a built-in objective.
///
/// # Safety
/// As [`gradmix_estimate`].
#[no_mangle]
pub unsafe extern "C" fn gradmix_true_gradient(
    obj: *const GradmixObjective,
    x: *const f64,
    n: usize,
    out: *mut f64,
    out_len: usize,
) -> GradmixStatus {
    guard(|| {
        let f = handle(obj)?.inner.as_ref();
        let x = slice(x, n, "x")?;
        if n != f.dim() {
            return Err(lib(Error::DimensionMismatch {
                expected: f.dim(),
                got: n,
            }));
        }
        let out = slice_mut(out, out_len, "out")?;
        if out_len < n {
            return Err(fail(GradmixStatus::BufferTooSmall, format!("out holds {out_len} values, need {n}")));
        }
        let g = f
            .gradient(x)
            .ok_or_else(|| lib(Error::MissingGradient(f.name().to_string())))?;
        out[..n].copy_from_slice(&g);
        Ok(())
    })
}

/// Normalized weights `a_1..a_m` into `out` (capacity `out_len >= m`); the raw total
/// `C` into `total` when non-NULL.
///
/// # Safety
/// `out` must be valid for `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn gradmix_mixing_coefficients(
    m: usize,
    h: f64,
    out: *mut f64,
    out_len: usize,
    total: *mut f64,
) -> GradmixStatus {
    guard(|| {
        let out = slice_mut(out, out_len, "out")?;
        let t = mixing_coefficients(m, h).map_err(lib)?;
        if out_len < m {
            return Err(fail(GradmixStatus::BufferTooSmall, format!("out holds {out_len} values, need {m}")));
        }
        out[..m].copy_from_slice(&t.normalized);
        if !total.is_null() {
            *total = t.total;
        }
        Ok(())
    })
}
