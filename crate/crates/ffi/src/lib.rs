//! C ABI over the `maxbound` library.
//!
//! Every fallible function returns an [`MbStatus`] and writes results
//! through out-pointers. On failure the message is kept per thread and can be
//! copied out with [`mb_last_error_message`]. Matrices and process models are
//! opaque handles owned by the caller and released with the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use maxbound::bounds::{
    dependent_msq_bracket, headline_bound, independent_msq_bracket, lower_bound_certificate,
    LowerBoundCertificate, MaxQuery, QuantileBracket,
};
use maxbound::covariance::{eigen_bounds, natural_ordering, sigma_tau, CovarianceMatrix};
use maxbound::gaussian;
use maxbound::process::{stationary_lower_bound, WoldModel};
use maxbound::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MbStatus {
    Ok = 0,
    Domain = 1,
    Validity = 2,
    NotPositiveDefinite = 3,
    Numeric = 4,
    Resource = 5,
    Parse = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
}

impl From<&Error> for MbStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => MbStatus::Domain,
            Error::Validity(_) => MbStatus::Validity,
            Error::NotPositiveDefinite { .. } => MbStatus::NotPositiveDefinite,
            Error::Numeric(_) => MbStatus::Numeric,
            Error::Resource(_) => MbStatus::Resource,
            Error::Parse(_) => MbStatus::Parse,
            Error::Io(_) => MbStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

/// Runs `f`, recording the error message and converting panics.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> MbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            MbStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MbStatus::Panic
        }
    }
}

struct Fail(MbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(MbStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(MbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the length the full message
/// needs including the terminator; `buf` may be null to query it.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn mb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mb_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(s) => s,
            Err(_) => panic!("version literal"),
        };
    VERSION.as_ptr()
}

unsafe fn scalar(x: f64, out: *mut f64, f: fn(f64) -> maxbound::Result<f64>) -> MbStatus {
    guard(|| unsafe { write(out, f(x)?, "out") })
}

/// Standard normal CDF.
///
/// # Safety
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn mb_std_normal_cdf(x: f64, out: *mut f64) -> MbStatus {
    unsafe { scalar(x, out, gaussian::std_normal_cdf) }
}

/// Upper tail `1 - Phi(x)`.
///
/// # Safety
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn mb_std_normal_tail(x: f64, out: *mut f64) -> MbStatus {
    unsafe { scalar(x, out, gaussian::std_normal_tail) }
}

/// `ln(1 - Phi(x))`, accurate far into the tail.
///
/// # Safety
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn mb_std_normal_log_tail(x: f64, out: *mut f64) -> MbStatus {
    unsafe { scalar(x, out, gaussian::std_normal_log_tail) }
}

/// `Phi^{-1}(p)` for `p` in (0, 1).
///
/// # Safety
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn mb_std_normal_quantile(p: f64, out: *mut f64) -> MbStatus {
    unsafe { scalar(p, out, gaussian::std_normal_quantile) }
}

/// `V = -2 ln(1 - Phi(x)) - ln(2 pi)`.
///
/// # Safety
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn mb_tail_v(x: f64, out: *mut f64) -> MbStatus {
    unsafe { scalar(x, out, gaussian::tail_v) }
}

/// `V - ln V`, a lower bound on `x^2` for `x >= 2`.
///
/// # Safety
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn mb_invert_v_lower(v: f64, out: *mut f64) -> MbStatus {
    unsafe { scalar(v, out, gaussian::invert_v_lower) }
}

/// `V - ln V + ln V / V`, an upper bound on `x^2` for `x >= 1`.
///
/// # Safety
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn mb_invert_v_upper(v: f64, out: *mut f64) -> MbStatus {
    unsafe { scalar(v, out, gaussian::invert_v_upper) }
}

/// Lower-bound certificate: `Pr{M_n >= threshold} >= guaranteed_tail`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbCertificate {
    pub n: u64,
    pub alpha: f64,
    pub l_alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    pub threshold: f64,
    pub guaranteed_tail: f64,
}

impl From<LowerBoundCertificate> for MbCertificate {
    fn from(c: LowerBoundCertificate) -> Self {
        MbCertificate {
            n: c.n,
            alpha: c.alpha,
            l_alpha: c.l_alpha,
            sigma: c.sigma,
            tau: c.tau,
            threshold: c.threshold,
            guaranteed_tail: c.guaranteed_tail,
        }
    }
}

/// Bracket on `M_n^2`; `msq_lower` is NaN for one-sided brackets.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbBracket {
    pub coupling_value: f64,
    pub msq_lower: f64,
    pub msq_upper: f64,
    pub regime_ok: bool,
}

impl From<QuantileBracket> for MbBracket {
    fn from(b: QuantileBracket) -> Self {
        MbBracket {
            coupling_value: b.coupling_value,
            msq_lower: b.msq_lower.unwrap_or(f64::NAN),
            msq_upper: b.msq_upper,
            regime_ok: b.regime_ok,
        }
    }
}

/// # Safety
/// `out` must be null or valid for writing one `MbCertificate`.
#[no_mangle]
pub unsafe extern "C" fn mb_lower_bound_certificate(
    n: u64,
    alpha: f64,
    sigma: f64,
    tau: f64,
    out: *mut MbCertificate,
) -> MbStatus {
    guard(|| {
        let c = lower_bound_certificate(n, alpha, sigma, tau)?;
        unsafe { write(out, c.into(), "out") }
    })
}

/// Certificate at `alpha = 1/4` with `sigma = sqrt(lambda_min)`,
/// `tau = sqrt(lambda_max)`.
///
/// # Safety
/// `out` must be null or valid for writing one `MbCertificate`.
#[no_mangle]
pub unsafe extern "C" fn mb_headline_bound(
    n: u64,
    lambda_min: f64,
    lambda_max: f64,
    out: *mut MbCertificate,
) -> MbStatus {
    guard(|| {
        let c = headline_bound(n, lambda_min, lambda_max)?;
        unsafe { write(out, c.into(), "out") }
    })
}

/// Two-sided bracket for `n` independent unit Gaussians at Gumbel value `g`.
///
/// # Safety
/// `out` must be null or valid for writing one `MbBracket`.
#[no_mangle]
pub unsafe extern "C" fn mb_independent_msq_bracket(
    n: u64,
    g: f64,
    out: *mut MbBracket,
) -> MbStatus {
    guard(|| {
        let b = independent_msq_bracket(&MaxQuery::new(n)?, g)?;
        unsafe { write(out, b.into(), "out") }
    })
}

/// Upper bound on `M_n^2` under any dependence at exponential value `e`.
///
/// # Safety
/// `out` must be null or valid for writing one `MbBracket`.
#[no_mangle]
pub unsafe extern "C" fn mb_dependent_msq_bracket(n: u64, e: f64, out: *mut MbBracket) -> MbStatus {
    guard(|| {
        let b = dependent_msq_bracket(&MaxQuery::new(n)?, e)?;
        unsafe { write(out, b.into(), "out") }
    })
}

/// Opaque validated covariance matrix.
pub struct MbCovariance(CovarianceMatrix);

/// Validates a row-major `dim x dim` matrix and returns a handle in `out`.
///
/// # Safety
/// `entries` must be valid for `dim * dim` reads; `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn mb_covariance_new(
    entries: *const f64,
    dim: usize,
    out: *mut *mut MbCovariance,
) -> MbStatus {
    guard(|| {
        if entries.is_null() {
            return Err(null("entries"));
        }
        let len = dim
            .checked_mul(dim)
            .ok_or_else(|| Fail(MbStatus::Resource, format!("dimension {dim} overflows")))?;
        let flat = unsafe { std::slice::from_raw_parts(entries, len) };
        let rows: Vec<Vec<f64>> = flat.chunks(dim.max(1)).map(<[f64]>::to_vec).collect();
        let c = CovarianceMatrix::from_rows(&rows)?;
        unsafe { write(out, Box::into_raw(Box::new(MbCovariance(c))), "out") }
    })
}

/// Releases a handle from [`mb_covariance_new`]; null is ignored.
///
/// # Safety
/// `c` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mb_covariance_free(c: *mut MbCovariance) {
    if !c.is_null() {
        drop(unsafe { Box::from_raw(c) });
    }
}

/// Dimension of the matrix, 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mb_covariance_dim(c: *const MbCovariance) -> usize {
    unsafe { c.as_ref() }.map_or(0, |c| c.0.dim())
}

/// `(min sigma_i, max tau_i)` of the sequential decomposition under
/// `ordering` (a permutation of `0..dim`); a null `ordering` means natural
/// order.
///
/// # Safety
/// `c` must be a live handle, `ordering` null or valid for `ordering_len`
/// reads, and the outputs valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn mb_covariance_sigma_tau(
    c: *const MbCovariance,
    ordering: *const usize,
    ordering_len: usize,
    sigma: *mut f64,
    tau: *mut f64,
) -> MbStatus {
    guard(|| {
        let c = unsafe { c.as_ref() }.ok_or_else(|| null("covariance"))?;
        let order = if ordering.is_null() {
            natural_ordering(c.0.dim())
        } else {
            unsafe { std::slice::from_raw_parts(ordering, ordering_len) }.to_vec()
        };
        let (s, t) = sigma_tau(&c.0, &order)?;
        unsafe {
            write(sigma, s, "sigma")?;
            write(tau, t, "tau")
        }
    })
}

/// Smallest and largest eigenvalues.
///
/// # Safety
/// `c` must be a live handle and the outputs valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn mb_covariance_eigen_bounds(
    c: *const MbCovariance,
    lambda_min: *mut f64,
    lambda_max: *mut f64,
) -> MbStatus {
    guard(|| {
        let c = unsafe { c.as_ref() }.ok_or_else(|| null("covariance"))?;
        let (lo, hi) = eigen_bounds(&c.0)?;
        unsafe {
            write(lambda_min, lo, "lambda_min")?;
            write(lambda_max, hi, "lambda_max")
        }
    })
}

/// Opaque stationary process in moving-average form.
pub struct MbWoldModel(WoldModel);

/// AR(1) with unit marginal variance, truncated once the neglected
/// variance drops below `tail_tol`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mb_wold_ar1(
    rho: f64,
    tail_tol: f64,
    out: *mut *mut MbWoldModel,
) -> MbStatus {
    guard(|| {
        let m = WoldModel::ar1(rho, tail_tol)?;
        unsafe { write(out, Box::into_raw(Box::new(MbWoldModel(m))), "out") }
    })
}

/// Finite moving average `X_i = s (Z_i + sum_j psi_j Z_{i-j})`, scaled to
/// unit variance.
///
/// # Safety
/// `psi` must be null (with `len == 0`) or valid for `len` reads; `out` for
/// one write.
#[no_mangle]
pub unsafe extern "C" fn mb_wold_from_psi(
    psi: *const f64,
    len: usize,
    out: *mut *mut MbWoldModel,
) -> MbStatus {
    guard(|| {
        let coeffs = if len == 0 {
            Vec::new()
        } else if psi.is_null() {
            return Err(null("psi"));
        } else {
            unsafe { std::slice::from_raw_parts(psi, len) }.to_vec()
        };
        let m = WoldModel::from_psi(coeffs)?;
        unsafe { write(out, Box::into_raw(Box::new(MbWoldModel(m))), "out") }
    })
}

/// Releases a process handle; null is ignored.
///
/// # Safety
/// `m` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mb_wold_free(m: *mut MbWoldModel) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Subsampled lower bound for `n` consecutive values at stride `k`;
/// `subsample_count` may be null.
///
/// # Safety
/// `m` must be a live handle, `out` valid for one write and
/// `subsample_count` null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mb_stationary_lower_bound(
    m: *const MbWoldModel,
    n: u64,
    k: u64,
    alpha: f64,
    out: *mut MbCertificate,
    subsample_count: *mut u64,
) -> MbStatus {
    guard(|| {
        let m = unsafe { m.as_ref() }.ok_or_else(|| null("model"))?;
        let s = stationary_lower_bound(&m.0, n, k, alpha)?;
        if !subsample_count.is_null() {
            unsafe { subsample_count.write(s.subsample_count) };
        }
        unsafe { write(out, s.certificate.into(), "out") }
    })
}
