//! C ABI over `scatter_trace`.
//!
//! Every fallible call returns an [`StStatus`]; on failure the message is
//! kept per thread and read back with [`st_last_error_message`]. Objects are
//! opaque handles released by their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use scatter_trace::potentials::PotentialModel;
use scatter_trace::scatter1d::{self, ScatterData1D};
use scatter_trace::scatter3d::{phase_shift_grid, PhaseShiftSpectrum};
use scatter_trace::trace1d::{self, WeightFunction};
use scatter_trace::trace3d::{self, DispersionInputs};
use scatter_trace::{Error, ErrorClass};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Validation = 5,
    Panic = 6,
}

/// Potential model.
pub struct StPotential(PotentialModel);

/// 1D scattering data on an ascending k grid.
pub struct StScatter1D(Vec<ScatterData1D>);

/// 3D phase-shift spectra on an ascending k grid.
pub struct StSpectra(Vec<PhaseShiftSpectrum>);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct StScatterPoint {
    pub k: f64,
    pub r_re: f64,
    pub r_im: f64,
    pub t_re: f64,
    pub t_im: f64,
    pub arg_det_s: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct StTrace {
    pub value: f64,
    pub quadrature_error: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct StSpectrumSummary {
    pub k: f64,
    pub channels: usize,
    pub sigma_bar: f64,
    pub hs_norm_squared: f64,
    pub re_log_det1: f64,
    pub im_log_det1: f64,
    pub max_abs_eta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct StCasimir3D {
    pub total: f64,
    pub anomaly_term: f64,
    pub cross_section_term: f64,
    pub det1_term: f64,
    pub det1_bound: f64,
    pub bound_violated: bool,
    pub weak_coupling_flag: bool,
    pub error_estimate: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(StStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::Config => StStatus::Config,
            ErrorClass::Numerical => StStatus::Numerical,
            ErrorClass::Validation => StStatus::Validation,
        };
        Fail(code, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(StStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> StStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            StStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            StStatus::Panic
        }
    }
}

unsafe fn json_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail(StStatus::InvalidArgument, format!("`{what}`: {e}")))
}

unsafe fn grid_arg<'a>(k: *const f64, n: usize) -> Result<&'a [f64], Fail> {
    if k.is_null() {
        return Err(null("k"));
    }
    Ok(slice::from_raw_parts(k, n))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn st_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a potential from its JSON description, e.g.
/// `{"kind": "gaussian", "height": 1.0, "width": 0.5}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn st_potential_from_json(
    json: *const c_char,
    out: *mut *mut StPotential,
) -> StStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = json_arg(json, "json")?;
        let model: PotentialModel = serde_json::from_str(text)
            .map_err(|e| Fail(StStatus::Config, format!("potential: {e}")))?;
        *out = Box::into_raw(Box::new(StPotential(model)));
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn st_potential_delta(g: f64, out: *mut *mut StPotential) -> StStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(StPotential(PotentialModel::delta(g)?)));
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn st_potential_gaussian(
    height: f64,
    width: f64,
    out: *mut *mut StPotential,
) -> StStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(StPotential(PotentialModel::gaussian(height, width)?)));
        Ok(())
    })
}

/// Evaluates `V(x, k)`.
///
/// # Safety
/// `pot` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_potential_value(
    pot: *const StPotential,
    x: f64,
    k: f64,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        let pot = in_arg(pot, "pot")?;
        *out_arg(out, "out")? = pot.0.evaluate(x, k)?;
        Ok(())
    })
}

/// # Safety
/// `pot` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn st_potential_free(pot: *mut StPotential) {
    if !pot.is_null() {
        drop(Box::from_raw(pot));
    }
}

/// Solves the 1D problem on `n` ascending wavenumbers.
///
/// # Safety
/// `k` must point to `n` doubles; the other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_scatter1d_solve(
    pot: *const StPotential,
    k: *const f64,
    n: usize,
    tol: f64,
    out: *mut *mut StScatter1D,
) -> StStatus {
    guard(|| {
        let pot = in_arg(pot, "pot")?;
        let ks = grid_arg(k, n)?;
        let out = out_arg(out, "out")?;
        let data = scatter1d::solve_grid(&pot.0, ks, tol)?;
        *out = Box::into_raw(Box::new(StScatter1D(data)));
        Ok(())
    })
}

/// # Safety
/// `data` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn st_scatter1d_len(data: *const StScatter1D) -> usize {
    data.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `data` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_scatter1d_get(
    data: *const StScatter1D,
    index: usize,
    out: *mut StScatterPoint,
) -> StStatus {
    guard(|| {
        let data = in_arg(data, "data")?;
        let out = out_arg(out, "out")?;
        let d = data.0.get(index).ok_or_else(|| {
            Fail(
                StStatus::InvalidArgument,
                format!("index {index} out of range (len {})", data.0.len()),
            )
        })?;
        *out = StScatterPoint {
            k: d.k,
            r_re: d.r.re,
            r_im: d.r.im,
            t_re: d.t.re,
            t_im: d.t.im,
            arg_det_s: d.arg_det_s(),
        };
        Ok(())
    })
}

/// # Safety
/// `data` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn st_scatter1d_free(data: *mut StScatter1D) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Spectral trace `∫ (dk/π) φ(k) d arg T / dk` with `φ` given as JSON,
/// e.g. `{"kind": "gaussian_bump", "center": 1.0, "width": 0.5}`.
///
/// # Safety
/// `data` must come from this library; `phi_json` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn st_trace1d(
    data: *const StScatter1D,
    phi_json: *const c_char,
    out: *mut StTrace,
) -> StStatus {
    guard(|| {
        let data = in_arg(data, "data")?;
        let text = json_arg(phi_json, "phi_json")?;
        let out = out_arg(out, "out")?;
        let phi: WeightFunction = serde_json::from_str(text)
            .map_err(|e| Fail(StStatus::Config, format!("phi: {e}")))?;
        phi.validate()?;
        let r = trace1d::trace_direct(&data.0, &phi)?;
        *out = StTrace {
            value: r.value,
            quadrature_error: r.quadrature_error,
        };
        Ok(())
    })
}

/// 1D Casimir energy from reflection data (dispersive potentials only).
///
/// # Safety
/// `data` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_casimir1d(data: *const StScatter1D, out: *mut StTrace) -> StStatus {
    guard(|| {
        let data = in_arg(data, "data")?;
        let out = out_arg(out, "out")?;
        let r = trace1d::casimir_energy_1d(&data.0)?;
        *out = StTrace {
            value: r.value,
            quadrature_error: r.quadrature_error,
        };
        Ok(())
    })
}

/// Partial-wave phase shifts on `n` ascending wavenumbers.
///
/// # Safety
/// `k` must point to `n` doubles; the other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_phase_shifts(
    pot: *const StPotential,
    k: *const f64,
    n: usize,
    tol: f64,
    out: *mut *mut StSpectra,
) -> StStatus {
    guard(|| {
        let pot = in_arg(pot, "pot")?;
        let ks = grid_arg(k, n)?;
        let out = out_arg(out, "out")?;
        let s = phase_shift_grid(&pot.0, ks, None, tol)?;
        *out = Box::into_raw(Box::new(StSpectra(s)));
        Ok(())
    })
}

/// # Safety
/// `spectra` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn st_spectra_len(spectra: *const StSpectra) -> usize {
    spectra.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `spectra` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_spectra_get(
    spectra: *const StSpectra,
    index: usize,
    out: *mut StSpectrumSummary,
) -> StStatus {
    guard(|| {
        let spectra = in_arg(spectra, "spectra")?;
        let out = out_arg(out, "out")?;
        let s = spectra.0.get(index).ok_or_else(|| {
            Fail(
                StStatus::InvalidArgument,
                format!("index {index} out of range (len {})", spectra.0.len()),
            )
        })?;
        let ld = s.log_det1();
        *out = StSpectrumSummary {
            k: s.k,
            channels: s.channels.len(),
            sigma_bar: s.sigma_bar(),
            hs_norm_squared: s.hs_norm_squared(),
            re_log_det1: ld.re,
            im_log_det1: ld.im,
            max_abs_eta: s.max_abs_eta(),
        };
        Ok(())
    })
}

/// Copies the channel phase shifts of spectrum `index` into `eta`, which
/// holds `cap` doubles. `len` receives the channel count; if it exceeds
/// `cap` nothing is copied and `InvalidArgument` is returned.
///
/// # Safety
/// `eta` must point to `cap` writable doubles (or be null with `cap == 0`).
#[no_mangle]
pub unsafe extern "C" fn st_spectra_phase_shifts(
    spectra: *const StSpectra,
    index: usize,
    eta: *mut f64,
    cap: usize,
    len: *mut usize,
) -> StStatus {
    guard(|| {
        let spectra = in_arg(spectra, "spectra")?;
        let len = out_arg(len, "len")?;
        let s = spectra
            .0
            .get(index)
            .ok_or_else(|| Fail(StStatus::InvalidArgument, format!("index {index} out of range")))?;
        *len = s.channels.len();
        if *len > cap {
            return Err(Fail(
                StStatus::InvalidArgument,
                format!("buffer holds {cap}, need {}", *len),
            ));
        }
        if *len > 0 {
            if eta.is_null() {
                return Err(null("eta"));
            }
            let dst = slice::from_raw_parts_mut(eta, *len);
            for (d, c) in dst.iter_mut().zip(&s.channels) {
                *d = c.eta;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `spectra` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn st_spectra_free(spectra: *mut StSpectra) {
    if !spectra.is_null() {
        drop(Box::from_raw(spectra));
    }
}

/// 3D Casimir energy from spectra computed for `pot`.
///
/// # Safety
/// Both handles must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_casimir3d(
    pot: *const StPotential,
    spectra: *const StSpectra,
    out: *mut StCasimir3D,
) -> StStatus {
    guard(|| {
        let pot = in_arg(pot, "pot")?;
        let spectra = in_arg(spectra, "spectra")?;
        let out = out_arg(out, "out")?;
        let born = spectra
            .0
            .iter()
            .map(|s| pot.0.volume_integral(s.k))
            .collect::<scatter_trace::Result<Vec<_>>>()?;
        let inputs = DispersionInputs::from_spectra(&spectra.0, born)?;
        let c = trace3d::casimir_energy_3d(&inputs)?;
        *out = StCasimir3D {
            total: c.total,
            anomaly_term: c.anomaly_term,
            cross_section_term: c.cross_section_term,
            det1_term: c.det1_term,
            det1_bound: c.det1_bound,
            bound_violated: c.bound_violated,
            weak_coupling_flag: c.weak_coupling_flag,
            error_estimate: c.error_estimate,
        };
        Ok(())
    })
}
