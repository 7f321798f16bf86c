//! C ABI over `heralded-fock`.
//!
//! States and datasets cross the boundary as opaque handles that the caller
//! releases with the matching `*_free` function. Every fallible call returns
//! an [`HfStatus`]; on failure, [`hf_last_error_message`] describes the cause
//! for the calling thread. Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use heralded_fock::cavity::{enhancement, finesse, optimal_input_coupler, CavitySpec, RateModel};
use heralded_fock::fock::{fock_state, DensityMatrix};
use heralded_fock::herald::{
    click_probability, herald_state, predicted_rates, two_photon_rate_law, ClickPattern, HeraldSpec,
};
use heralded_fock::hermite::fock_wavefunction;
use heralded_fock::homodyne::{phase_schedule, sample, PhaseSchedule, QuadratureDataset};
use heralded_fock::loss::apply_loss;
use heralded_fock::quadrature::quadrature_pdf;
use heralded_fock::tomo::{reconstruct, TomoConfig, TomoMode};
use heralded_fock::wigner::{wigner_min, wigner_point};
use heralded_fock::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numeric = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfClickPattern {
    None = 0,
    AOnly = 1,
    BOnly = 2,
    AOrBSingle = 3,
    Both = 4,
}

impl From<HfClickPattern> for ClickPattern {
    fn from(p: HfClickPattern) -> Self {
        match p {
            HfClickPattern::None => ClickPattern::None,
            HfClickPattern::AOnly => ClickPattern::AOnly,
            HfClickPattern::BOnly => ClickPattern::BOnly,
            HfClickPattern::AOrBSingle => ClickPattern::AOrBSingle,
            HfClickPattern::Both => ClickPattern::Both,
        }
    }
}

/// Herald-arm parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HfHeraldSpec {
    pub split: f64,
    pub eta_click: f64,
    pub dark: f64,
    pub pattern: HfClickPattern,
}

impl From<HfHeraldSpec> for HeraldSpec {
    fn from(s: HfHeraldSpec) -> Self {
        HeraldSpec {
            split: s.split,
            eta_click: s.eta_click,
            dark: s.dark,
            pattern: s.pattern.into(),
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfSchedule {
    UniformRandom = 0,
    Stepped = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfTomoMode {
    Full = 0,
    Diagonal = 1,
}

/// Opaque density matrix.
pub struct HfDensityMatrix(DensityMatrix);

/// Opaque homodyne dataset.
pub struct HfDataset(QuadratureDataset);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> HfStatus {
    match err {
        Error::Io(_) => HfStatus::Io,
        Error::Cutoff { .. }
        | Error::Domain { .. }
        | Error::Shape(_)
        | Error::Config { .. }
        | Error::Parse { .. }
        | Error::Json(_)
        | Error::Unsupported(_)
        | Error::OrderOverflow(_)
        | Error::NonPhysicalGain(_) => HfStatus::InvalidArgument,
        _ => HfStatus::Numeric,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (HfStatus, String)>) -> HfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside heralded-fock".into());
            HfStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (HfStatus, String)>;
}

impl<T> IntoFfi<T> for heralded_fock::Result<T> {
    fn ffi(self) -> Result<T, (HfStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (HfStatus, String) {
    (HfStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (HfStatus, String)> {
    // SAFETY: caller passes either NULL or a live handle from this library.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), (HfStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and, per the API contract, valid for writes.
    unsafe { p.write(value) };
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn hf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Pure Fock state `|n⟩⟨n|` with cutoff `dim`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_fock_state(n: usize, dim: usize, out: *mut *mut HfDensityMatrix) -> HfStatus {
    guard(|| {
        let rho = fock_state(n, dim).ffi()?;
        unsafe { write(out, Box::into_raw(Box::new(HfDensityMatrix(rho))), "out") }
    })
}

/// Diagonal state from `len` populations.
///
/// # Safety
/// `probs` must point to `len` readable doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_density_from_diagonal(
    probs: *const f64,
    len: usize,
    out: *mut *mut HfDensityMatrix,
) -> HfStatus {
    guard(|| {
        if probs.is_null() {
            return Err(null("probs"));
        }
        // SAFETY: caller guarantees `len` readable elements.
        let slice = unsafe { std::slice::from_raw_parts(probs, len) };
        let rho = DensityMatrix::from_diagonal(slice).ffi()?;
        rho.validate().ffi()?;
        unsafe { write(out, Box::into_raw(Box::new(HfDensityMatrix(rho))), "out") }
    })
}

/// Parses the `{"dim", "re", "im"}` JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_density_from_json(json: *const c_char, out: *mut *mut HfDensityMatrix) -> HfStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        // SAFETY: caller guarantees a NUL-terminated string.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| (HfStatus::InvalidArgument, e.to_string()))?;
        let rho = DensityMatrix::from_json(text).ffi()?;
        unsafe { write(out, Box::into_raw(Box::new(HfDensityMatrix(rho))), "out") }
    })
}

/// Serializes to JSON; release the string with [`hf_string_free`].
///
/// # Safety
/// `rho` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_density_to_json(rho: *const HfDensityMatrix, out: *mut *mut c_char) -> HfStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        let text = rho.0.to_json().ffi()?;
        let c = CString::new(text).map_err(|e| (HfStatus::Numeric, e.to_string()))?;
        unsafe { write(out, c.into_raw(), "out") }
    })
}

/// # Safety
/// `rho` must be NULL or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_density_free(rho: *mut HfDensityMatrix) {
    if !rho.is_null() {
        // SAFETY: created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(rho) });
    }
}

/// Fock cutoff of `rho`, or 0 for NULL.
///
/// # Safety
/// `rho` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_density_dim(rho: *const HfDensityMatrix) -> usize {
    // SAFETY: NULL or live handle per contract.
    unsafe { rho.as_ref() }.map_or(0, |r| r.0.dim())
}

/// Element `ρ_mn`.
///
/// # Safety
/// `rho` must be a live handle; `re` and `im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_density_element(
    rho: *const HfDensityMatrix,
    m: usize,
    n: usize,
    re: *mut f64,
    im: *mut f64,
) -> HfStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        let d = rho.0.dim();
        if m >= d || n >= d {
            return Err((HfStatus::InvalidArgument, format!("index ({m}, {n}) outside {d}x{d}")));
        }
        let z = rho.0.get(m, n);
        unsafe {
            write(re, z.re, "re")?;
            write(im, z.im, "im")
        }
    })
}

/// Loss channel with transmission `eta`, returning a new handle.
///
/// # Safety
/// `rho` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_apply_loss(
    rho: *const HfDensityMatrix,
    eta: f64,
    out: *mut *mut HfDensityMatrix,
) -> HfStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        let lossy = apply_loss(&rho.0, eta).ffi()?;
        unsafe { write(out, Box::into_raw(Box::new(HfDensityMatrix(lossy))), "out") }
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_fock_wavefunction(n: usize, x: f64, out: *mut f64) -> HfStatus {
    guard(|| {
        let v = fock_wavefunction(n, x).ffi()?;
        unsafe { write(out, v, "out") }
    })
}

/// # Safety
/// `rho` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_quadrature_pdf(rho: *const HfDensityMatrix, theta: f64, x: f64, out: *mut f64) -> HfStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        unsafe { write(out, quadrature_pdf(&rho.0, theta, x), "out") }
    })
}

/// # Safety
/// `rho` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_wigner_point(rho: *const HfDensityMatrix, x: f64, p: f64, out: *mut f64) -> HfStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        unsafe { write(out, wigner_point(&rho.0, x, p), "out") }
    })
}

/// Radial Wigner minimum of a diagonal state.
///
/// # Safety
/// `rho` must be a live handle; `value` and `radius` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_wigner_min(rho: *const HfDensityMatrix, value: *mut f64, radius: *mut f64) -> HfStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        let m = wigner_min(&rho.0).ffi()?;
        unsafe {
            write(value, m.value, "value")?;
            write(radius, m.radius, "radius")
        }
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_cavity_enhancement(r_in: f64, r_loop: f64, out: *mut f64) -> HfStatus {
    guard(|| {
        let spec = CavitySpec::new(r_in, r_loop).ffi()?;
        unsafe { write(out, enhancement(&spec).ffi()?, "out") }
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_cavity_finesse(r_in: f64, r_loop: f64, out: *mut f64) -> HfStatus {
    guard(|| {
        let spec = CavitySpec::new(r_in, r_loop).ffi()?;
        unsafe { write(out, finesse(&spec).ffi()?, "out") }
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_optimal_input_coupler(r_loop: f64, out: *mut f64) -> HfStatus {
    guard(|| unsafe { write(out, optimal_input_coupler(r_loop).ffi()?, "out") })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_click_probability(n: usize, spec: HfHeraldSpec, out: *mut f64) -> HfStatus {
    guard(|| {
        let spec: HeraldSpec = spec.into();
        spec.validate().ffi()?;
        unsafe { write(out, click_probability(spec.pattern, n, &spec), "out") }
    })
}

/// Heralded signal state and its per-pulse probability.
///
/// # Safety
/// `out_state` and `out_prob` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_herald_state(
    lambda: f64,
    spec: HfHeraldSpec,
    dim: usize,
    out_state: *mut *mut HfDensityMatrix,
    out_prob: *mut f64,
) -> HfStatus {
    guard(|| {
        if out_state.is_null() || out_prob.is_null() {
            return Err(null("output"));
        }
        let outcome = herald_state(lambda, &spec.into(), dim).ffi()?;
        unsafe {
            write(out_prob, outcome.prob_per_pulse, "out_prob")?;
            write(
                out_state,
                Box::into_raw(Box::new(HfDensityMatrix(outcome.state))),
                "out_state",
            )
        }
    })
}

/// Single- and two-photon herald rates (Hz).
///
/// # Safety
/// `r1` and `r2` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_predicted_rates(
    rep_rate: f64,
    gain: f64,
    spec: HfHeraldSpec,
    r1: *mut f64,
    r2: *mut f64,
) -> HfStatus {
    guard(|| {
        let model = RateModel::new(rep_rate, gain).ffi()?;
        let rates = predicted_rates(&model, &spec.into()).ffi()?;
        unsafe {
            write(r1, rates.r1_hz, "r1")?;
            write(r2, rates.r2_hz, "r2")
        }
    })
}

/// `R1² / (2·rep_rate)`.
#[no_mangle]
pub extern "C" fn hf_two_photon_rate_law(r1: f64, rep_rate: f64) -> f64 {
    two_photon_rate_law(r1, rep_rate)
}

/// Samples `n` quadratures of `rho` behind detection efficiency `eta_d`.
/// `steps` is used only by the stepped schedule.
///
/// # Safety
/// `rho` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_sample(
    rho: *const HfDensityMatrix,
    eta_d: f64,
    schedule: HfSchedule,
    steps: usize,
    n: usize,
    seed: u64,
    out: *mut *mut HfDataset,
) -> HfStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        let kind = match schedule {
            HfSchedule::UniformRandom => PhaseSchedule::UniformRandom,
            HfSchedule::Stepped => PhaseSchedule::Stepped { steps },
        };
        let phases = phase_schedule(kind, n, seed).ffi()?;
        let ds = sample(&rho.0, eta_d, &phases, seed).ffi()?;
        unsafe { write(out, Box::into_raw(Box::new(HfDataset(ds))), "out") }
    })
}

/// # Safety
/// `ds` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_len(ds: *const HfDataset) -> usize {
    // SAFETY: NULL or live handle per contract.
    unsafe { ds.as_ref() }.map_or(0, |d| d.0.len())
}

/// # Safety
/// `ds` must be a live handle; `theta` and `x` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_record(
    ds: *const HfDataset,
    index: usize,
    theta: *mut f64,
    x: *mut f64,
) -> HfStatus {
    guard(|| {
        let ds = unsafe { deref(ds, "ds") }?;
        let r =
            ds.0.records
                .get(index)
                .ok_or_else(|| (HfStatus::InvalidArgument, format!("record {index} out of range")))?;
        unsafe {
            write(theta, r.theta, "theta")?;
            write(x, r.x, "x")
        }
    })
}

/// Writes the `theta,x` CSV to `path`.
///
/// # Safety
/// `ds` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_write_csv(ds: *const HfDataset, path: *const c_char) -> HfStatus {
    guard(|| {
        let ds = unsafe { deref(ds, "ds") }?;
        if path.is_null() {
            return Err(null("path"));
        }
        // SAFETY: caller guarantees a NUL-terminated string.
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|e| (HfStatus::InvalidArgument, e.to_string()))?;
        let file = std::fs::File::create(path).map_err(|e| (HfStatus::Io, e.to_string()))?;
        ds.0.write_csv(std::io::BufWriter::new(file)).ffi()
    })
}

/// # Safety
/// `ds` must be NULL or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_free(ds: *mut HfDataset) {
    if !ds.is_null() {
        // SAFETY: created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(ds) });
    }
}

/// Maximum-likelihood reconstruction with detection-efficiency correction
/// `eta_d` (1 disables it). `iterations` and `loglik` may be NULL.
///
/// # Safety
/// `ds` must be a live handle; `out` must be valid for writes; `iterations`
/// and `loglik` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_maxlik(
    ds: *const HfDataset,
    dim: usize,
    eta_d: f64,
    mode: HfTomoMode,
    tol: f64,
    max_iter: usize,
    out: *mut *mut HfDensityMatrix,
    iterations: *mut usize,
    loglik: *mut f64,
) -> HfStatus {
    guard(|| {
        let ds = unsafe { deref(ds, "ds") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = TomoConfig {
            dim,
            eta_d,
            tol,
            max_iter,
            mode: match mode {
                HfTomoMode::Full => TomoMode::Full,
                HfTomoMode::Diagonal => TomoMode::Diagonal,
            },
            ..Default::default()
        };
        let (rho, diag) = reconstruct(&ds.0.records, &cfg).ffi()?;
        unsafe {
            if !iterations.is_null() {
                iterations.write(diag.iterations);
            }
            if !loglik.is_null() {
                loglik.write(diag.loglik);
            }
            write(out, Box::into_raw(Box::new(HfDensityMatrix(rho))), "out")
        }
    })
}
