//! C ABI over the `supertransfer` library.
//!
//! Every fallible function returns an [`StStatus`]; on failure the message is
//! available from [`st_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `*_free` function. Strings returned
//! by the library are released with [`st_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use supertransfer::diffusion::{
    effective_step_length, required_step_length, simulate_walk, DiffusionConfig, LifetimeModel,
};
use supertransfer::hamiltonians::{full_hamiltonian, SystemSpec};
use supertransfer::hilbert::OperatorMatrix;
use supertransfer::sectors::{emission_amplitude, supertransfer_forward, supertransfer_rate};
use supertransfer::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Domain = 4,
    Capacity = 5,
    DimensionMismatch = 6,
    Convergence = 7,
    Regime = 8,
    Degenerate = 9,
    InvalidRun = 10,
    Io = 11,
    Json = 12,
    Panic = 13,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("nul bytes removed")));
}

fn status_of(e: &Error) -> StStatus {
    match e {
        Error::Capacity { .. } => StStatus::Capacity,
        Error::Domain(_) => StStatus::Domain,
        Error::Config(_) => StStatus::Config,
        Error::DimensionMismatch { .. } => StStatus::DimensionMismatch,
        Error::Convergence { .. } => StStatus::Convergence,
        Error::Regime(_) => StStatus::Regime,
        Error::Degenerate(_) => StStatus::Degenerate,
        Error::InvalidRun(_) => StStatus::InvalidRun,
        Error::Io(_) => StStatus::Io,
        Error::Json(_) => StStatus::Json,
    }
}

/// Run `f`, translating errors and panics into a status and the last-error message.
fn guard(f: impl FnOnce() -> Result<(), (StStatus, String)>) -> StStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            StStatus::Panic
        }
    }
}

fn lib<T>(r: supertransfer::Result<T>) -> Result<T, (StStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), (StStatus, String)> {
    if p.is_null() {
        Err((StStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Message of the most recent failure on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on this thread or
/// [`st_clear_error`].
#[no_mangle]
pub extern "C" fn st_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn st_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn st_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn st_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// A validated model description.
pub struct StSystem {
    spec: SystemSpec,
}

/// A sparse complex operator.
pub struct StOperator {
    op: OperatorMatrix,
}

/// Parse and validate a model description given as JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_system_from_json(json: *const c_char, out: *mut *mut StSystem) -> StStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json).to_str().map_err(|e| (StStatus::InvalidUtf8, e.to_string()))?;
        let spec = lib(SystemSpec::from_json(text))?;
        *out = Box::into_raw(Box::new(StSystem { spec }));
        Ok(())
    })
}

/// # Safety
/// `sys` must be null or a handle from [`st_system_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn st_system_free(sys: *mut StSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Hilbert-space dimension of the system.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_system_dim(sys: *const StSystem, out: *mut usize) -> StStatus {
    guard(|| {
        non_null(sys, "sys")?;
        non_null(out, "out")?;
        *out = lib((*sys).spec.layout())?.total_dim();
        Ok(())
    })
}

/// Build the full Hamiltonian of a two-group system.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_system_hamiltonian(sys: *const StSystem, out: *mut *mut StOperator) -> StStatus {
    guard(|| {
        non_null(sys, "sys")?;
        non_null(out, "out")?;
        let op = lib(full_hamiltonian(&(*sys).spec))?;
        *out = Box::into_raw(Box::new(StOperator { op }));
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a live operator handle.
#[no_mangle]
pub unsafe extern "C" fn st_operator_free(op: *mut StOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// # Safety
/// `op` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_operator_dim(op: *const StOperator, out: *mut usize) -> StStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(out, "out")?;
        *out = (*op).op.dim();
        Ok(())
    })
}

/// Number of stored nonzero entries.
///
/// # Safety
/// `op` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_operator_nnz(op: *const StOperator, out: *mut usize) -> StStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(out, "out")?;
        *out = (*op).op.nnz();
        Ok(())
    })
}

/// Serialize the operator as JSON triplets; free the result with [`st_string_free`].
///
/// # Safety
/// `op` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_operator_to_json(op: *const StOperator, out: *mut *mut c_char) -> StStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(out, "out")?;
        let text = lib(serde_json::to_string(&(*op).op).map_err(Error::from))?;
        *out = CString::new(text).map_err(|e| (StStatus::Json, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Dicke emission amplitude `sqrt(n(N-n+1)(m_from+1)) γ`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_emission_amplitude(
    sites: usize,
    n: usize,
    gamma: f64,
    m_from: usize,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lib(emission_amplitude(sites, n, gamma, m_from))?;
        Ok(())
    })
}

/// Forward hopping rate from `|n>_A|m>_B` to `|n-1>_A|m+1>_B`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_supertransfer_forward(
    n: usize,
    sites_a: usize,
    m: usize,
    sites_b: usize,
    gamma: f64,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lib(supertransfer_forward(n, sites_a, m, sites_b, gamma))?;
        Ok(())
    })
}

/// Net A→B transfer rate.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_supertransfer_rate(
    n: usize,
    sites_a: usize,
    m: usize,
    sites_b: usize,
    gamma: f64,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lib(supertransfer_rate(n, sites_a, m, sites_b, gamma))?;
        Ok(())
    })
}

/// `ℓ = α γ τ`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_effective_step_length(alpha: f64, gamma: f64, tau: f64, out: *mut f64) -> StStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lib(effective_step_length(alpha, gamma, tau))?;
        Ok(())
    })
}

/// `L / sqrt(γ T)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_required_step_length(target_l: f64, gamma: f64, lifetime: f64, out: *mut f64) -> StStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lib(required_step_length(target_l, gamma, lifetime))?;
        Ok(())
    })
}

/// Random-walk parameters. Times in ps, rates in 1/ps, lengths in nm.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct StDiffusionConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
    pub lifetime: f64,
    /// Nonzero: every walker lives exactly `lifetime`; zero: exponential lifetimes.
    pub fixed_lifetime: u8,
    /// 1 or 2.
    pub lattice_dim: u8,
    pub complex_diameter: f64,
    pub target_l: f64,
    pub walkers: usize,
    pub rng_seed: u64,
}

/// Random-walk statistics. Standard errors are NaN for a single walker.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct StDiffusionResult {
    pub step_length_ell: f64,
    pub required_step_length: f64,
    pub rms_displacement_units: f64,
    pub rms_standard_error: f64,
    pub rms_displacement_nm: f64,
    pub incoherent_hops_mean: f64,
    pub incoherent_hops_standard_error: f64,
    pub condition_met: u8,
    pub walkers_reaching_target: f64,
    pub walkers: usize,
}

impl From<&DiffusionConfig> for StDiffusionConfig {
    fn from(c: &DiffusionConfig) -> Self {
        Self {
            alpha: c.alpha,
            gamma: c.gamma,
            tau: c.tau,
            lifetime: c.lifetime,
            fixed_lifetime: u8::from(c.lifetime_model == LifetimeModel::Fixed),
            lattice_dim: c.lattice_dim,
            complex_diameter: c.complex_diameter,
            target_l: c.target_l,
            walkers: c.walkers,
            rng_seed: c.rng_seed,
        }
    }
}

impl From<&StDiffusionConfig> for DiffusionConfig {
    fn from(c: &StDiffusionConfig) -> Self {
        Self {
            alpha: c.alpha,
            gamma: c.gamma,
            tau: c.tau,
            lifetime: c.lifetime,
            lifetime_model: if c.fixed_lifetime != 0 { LifetimeModel::Fixed } else { LifetimeModel::Exponential },
            lattice_dim: c.lattice_dim,
            complex_diameter: c.complex_diameter,
            target_l: c.target_l,
            walkers: c.walkers,
            rng_seed: c.rng_seed,
        }
    }
}

/// Fill `out` with the default walk parameters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_diffusion_default_config(out: *mut StDiffusionConfig) -> StStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = StDiffusionConfig::from(&DiffusionConfig::default());
        Ok(())
    })
}

/// Monte Carlo random walk; deterministic for a given `rng_seed`.
///
/// # Safety
/// `config` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn st_simulate_walk(config: *const StDiffusionConfig, out: *mut StDiffusionResult) -> StStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(out, "out")?;
        let r = lib(simulate_walk(&DiffusionConfig::from(&*config)))?;
        *out = StDiffusionResult {
            step_length_ell: r.step_length_ell,
            required_step_length: r.required_step_length,
            rms_displacement_units: r.rms_displacement_units,
            rms_standard_error: r.rms_standard_error.unwrap_or(f64::NAN),
            rms_displacement_nm: r.rms_displacement_nm,
            incoherent_hops_mean: r.incoherent_hops_mean,
            incoherent_hops_standard_error: r.incoherent_hops_standard_error.unwrap_or(f64::NAN),
            condition_met: u8::from(r.condition_met),
            walkers_reaching_target: r.walkers_reaching_target,
            walkers: r.walkers,
        };
        Ok(())
    })
}
