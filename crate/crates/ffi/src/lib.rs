//! C ABI over the `npiv` estimator and Monte Carlo harness.
//!
//! All objects are opaque handles created by `npiv_*_new`/`npiv_*_run`
//! style functions and released with the matching `*_free`. Every fallible
//! function returns an [`NpivStatus`]; on failure a message is available
//! from [`npiv_last_error_message`] until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use npiv::basis::{BasisFamily, BasisKind};
use npiv::galerkin::{Sample, ThresholdForm};
use npiv::harness::{run_experiment, ExperimentConfig, ExperimentOutput};
use npiv::selection::{adaptive_estimate, AdaptiveFit, PenaltyConfig};
use npiv::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpivStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Dimension = 4,
    Infeasible = 5,
    Sample = 6,
    Config = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpivBasis {
    /// `1, √2 cos(πx), √2 cos(2πx), ...`
    Cosine = 0,
    /// `1, √2 cos(2πx), √2 sin(2πx), ...`
    Trigonometric = 1,
}

/// Tuning of the dimension selection. Obtain defaults from
/// [`npiv_penalty_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpivPenalty {
    pub kappa: f64,
    pub sigma_multiplier: f64,
    /// Non-zero: threshold on `‖[T̂]⁻¹‖` instead of its square.
    pub unsquared_threshold: i32,
    /// Largest candidate dimension; 0 selects `⌊n^{1/4}⌋`.
    pub max_dimension: usize,
}

/// One row of an experiment's record table.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NpivRecord {
    pub n: usize,
    pub rep: usize,
    pub m_hat: usize,
    pub m_cap: usize,
    pub mise_adaptive: f64,
    pub m_star: usize,
    pub mise_oracle: f64,
    pub minimax_rate: f64,
    pub thresholded_frac: f64,
}

pub struct NpivSample(Sample);

pub struct NpivFit {
    fit: AdaptiveFit,
    basis: BasisFamily,
}

pub struct NpivExperiment(ExperimentOutput);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> NpivStatus {
    match err {
        Error::Domain(_) => NpivStatus::Domain,
        Error::Dimension(_) => NpivStatus::Dimension,
        Error::Infeasible(_) => NpivStatus::Infeasible,
        Error::Sample(_) => NpivStatus::Sample,
        Error::Config(_) => NpivStatus::Config,
        Error::Io { .. } | Error::Csv { .. } => NpivStatus::Io,
    }
}

fn guard(body: impl FnOnce() -> Result<(), (NpivStatus, String)>) -> NpivStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NpivStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NpivStatus::Panic
        }
    }
}

fn lib_err(err: Error) -> (NpivStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (NpivStatus, String) {
    (NpivStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, (NpivStatus, String)> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map_err(|_| (NpivStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn slice_arg<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], (NpivStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

fn basis_of(kind: NpivBasis) -> BasisFamily {
    BasisFamily::new(match kind {
        NpivBasis::Cosine => BasisKind::ConstantPlusCosine,
        NpivBasis::Trigonometric => BasisKind::FullTrigonometric,
    })
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn npiv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn npiv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn npiv_penalty_default() -> NpivPenalty {
    let c = PenaltyConfig::iid();
    NpivPenalty {
        kappa: c.kappa,
        sigma_multiplier: c.sigma_multiplier,
        unsquared_threshold: 0,
        max_dimension: 0,
    }
}

/// Threshold `α_n` of the truncation rule.
#[no_mangle]
pub extern "C" fn npiv_alpha_n(n: usize) -> f64 {
    npiv::selection::alpha_n(n)
}

/// Evaluates basis function `f_j(x)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn npiv_basis_eval(kind: NpivBasis, j: usize, x: f64, out: *mut f64) -> NpivStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = basis_of(kind).eval(j, x).map_err(lib_err)?;
        Ok(())
    })
}

/// Copies `len` observations into a new sample.
///
/// # Safety
/// `y`, `z`, `w` must each point to `len` readable doubles; `out` must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn npiv_sample_new(
    y: *const f64,
    z: *const f64,
    w: *const f64,
    len: usize,
    out: *mut *mut NpivSample,
) -> NpivStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let (y, z, w) = (slice_arg(y, len, "y")?, slice_arg(z, len, "z")?, slice_arg(w, len, "w")?);
        let sample = Sample::new(y.to_vec(), z.to_vec(), w.to_vec()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NpivSample(sample)));
        Ok(())
    })
}

/// Reads a `y,z,w` CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn npiv_sample_read_csv(path: *const c_char, out: *mut *mut NpivSample) -> NpivStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let sample = Sample::read_csv(path_arg(path)?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NpivSample(sample)));
        Ok(())
    })
}

/// Number of observations, 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn npiv_sample_len(sample: *const NpivSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `sample` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npiv_sample_free(sample: *mut NpivSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Runs the adaptive estimator with the same basis for `Z` and `W`.
/// A null `penalty` uses [`npiv_penalty_default`].
///
/// # Safety
/// `sample` must be a live handle, `penalty` null or readable, `out` valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn npiv_fit(
    sample: *const NpivSample,
    basis: NpivBasis,
    penalty: *const NpivPenalty,
    out: *mut *mut NpivFit,
) -> NpivStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let sample = sample.as_ref().ok_or_else(|| null("sample"))?;
        let p = penalty.as_ref().copied().unwrap_or_else(|| npiv_penalty_default());
        let config = PenaltyConfig {
            kappa: p.kappa,
            sigma_multiplier: p.sigma_multiplier,
            threshold_form: if p.unsquared_threshold != 0 {
                ThresholdForm::Unsquared
            } else {
                ThresholdForm::Squared
            },
            max_dimension: (p.max_dimension > 0).then_some(p.max_dimension),
            ..PenaltyConfig::iid()
        };
        let basis = basis_of(basis);
        let fit = adaptive_estimate(&sample.0, &basis, &basis, &config).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NpivFit { fit, basis }));
        Ok(())
    })
}

/// Selected dimension `m̂`, 0 for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn npiv_fit_m_hat(fit: *const NpivFit) -> usize {
    fit.as_ref().map_or(0, |f| f.fit.trace.m_selected)
}

/// Random truncation index `M̂`, 0 for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn npiv_fit_m_cap(fit: *const NpivFit) -> usize {
    fit.as_ref().map_or(0, |f| f.fit.trace.m_hat_cap)
}

/// Copies up to `cap` coefficients of `θ̂_{m̂}` into `buf` and stores the
/// full length in `len`. Pass `cap = 0` to query the length.
///
/// # Safety
/// `fit` must be a live handle, `buf` writable for `cap` doubles, `len`
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn npiv_fit_theta(fit: *const NpivFit, buf: *mut f64, cap: usize, len: *mut usize) -> NpivStatus {
    guard(|| {
        let fit = fit.as_ref().ok_or_else(|| null("fit"))?;
        if len.is_null() {
            return Err(null("len"));
        }
        let theta = &fit.fit.estimate.theta;
        *len = theta.len();
        if cap > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            let k = cap.min(theta.len());
            ptr::copy_nonoverlapping(theta.as_ptr(), buf, k);
        }
        Ok(())
    })
}

/// Evaluates the fitted structural function at `x ∈ [0,1]`.
///
/// # Safety
/// `fit` must be a live handle, `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn npiv_fit_eval(fit: *const NpivFit, x: f64, out: *mut f64) -> NpivStatus {
    guard(|| {
        let fit = fit.as_ref().ok_or_else(|| null("fit"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err((NpivStatus::Domain, format!("argument {x} outside [0,1]")));
        }
        *out = fit.basis.eval_series(&fit.fit.estimate.theta, x);
        Ok(())
    })
}

/// # Safety
/// `fit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npiv_fit_free(fit: *mut NpivFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Runs the experiment described by a TOML config file.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn npiv_experiment_run(config_path: *const c_char, out: *mut *mut NpivExperiment) -> NpivStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let config = ExperimentConfig::from_file(path_arg(config_path)?).map_err(lib_err)?;
        let output = run_experiment(&config).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NpivExperiment(output)));
        Ok(())
    })
}

/// Number of records, 0 for a null handle.
///
/// # Safety
/// `exp` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn npiv_experiment_len(exp: *const NpivExperiment) -> usize {
    exp.as_ref().map_or(0, |e| e.0.records.len())
}

/// Copies record `index` (sorted by `n`, then `rep`) into `out`.
///
/// # Safety
/// `exp` must be a live handle, `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn npiv_experiment_record(
    exp: *const NpivExperiment,
    index: usize,
    out: *mut NpivRecord,
) -> NpivStatus {
    guard(|| {
        let exp = exp.as_ref().ok_or_else(|| null("experiment"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = exp.0.records.get(index).ok_or_else(|| {
            (
                NpivStatus::InvalidArgument,
                format!("record {index} out of range (len {})", exp.0.records.len()),
            )
        })?;
        *out = NpivRecord {
            n: r.n,
            rep: r.rep,
            m_hat: r.m_hat,
            m_cap: r.m_cap,
            mise_adaptive: r.mise_adaptive,
            m_star: r.m_star,
            mise_oracle: r.mise_oracle,
            minimax_rate: r.minimax_rate,
            thresholded_frac: r.thresholded_fraction,
        };
        Ok(())
    })
}

/// # Safety
/// `exp` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npiv_experiment_free(exp: *mut NpivExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}
