//! C ABI for the imflux simulation library.
//!
//! Shape: an opaque scenario handle built from the canonical defaults or a
//! TOML file, mutated through dotted-path overrides, and executed with
//! [`imflux_run`], which fills a flat summary struct and optionally writes
//! the full telemetry CSV. Every function returns an [`ImfluxStatus`]; the
//! message for the most recent failure on the current thread is available
//! through [`imflux_last_error`].
//!
//! The C header is generated into `include/imflux.h` by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::OnceLock;

use imflux::error::Error;
use imflux::scenario::ScenarioConfig;
use imflux::sim::run_scenario;
use imflux::telemetry;

/// Opaque scenario handle. Create with `imflux_scenario_default` or
/// `imflux_scenario_from_file`, release with `imflux_scenario_free`.
pub struct ImfluxScenario(ScenarioConfig);

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImfluxStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArg = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// The configuration is invalid (unknown key, unparsable value, or a
    /// value rejected by validation).
    Config = 3,
    /// A file could not be read or written.
    Io = 4,
    /// The simulation hit a non-finite value and stopped early; the summary
    /// is still filled with the state at the fault.
    Fault = 5,
    /// Unexpected internal failure (a caught panic).
    Internal = 6,
}

/// Flat end-of-run summary filled by `imflux_run`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ImfluxSummary {
    /// Number of integration steps executed.
    pub steps: u64,
    /// Number of telemetry records produced (decimated step boundaries).
    pub records: u64,
    /// Wall-clock seconds spent integrating.
    pub wall_seconds: f64,
    /// |flux estimate - true flux| at the end of the run (Wb).
    pub final_flux_err_norm: f64,
    /// Final rotor-resistance estimate (ohm).
    pub final_rr_hat: f64,
    /// Final relative rotor-resistance error.
    pub final_rr_err_rel: f64,
    /// Final load-torque estimate (N m).
    pub final_tl_hat: f64,
    /// Final absolute load-torque error (N m).
    pub final_tl_err: f64,
    /// Final rotor-speed estimate (rad/s).
    pub final_omega_hat: f64,
    /// Final absolute rotor-speed error (rad/s).
    pub final_omega_err: f64,
    /// Excitation energy of the electrical mixing determinant.
    pub int_delta_e_sq: f64,
    /// Excitation energy of the mechanical mixing determinant.
    pub int_delta_m_sq: f64,
    /// 1 if the run stopped on a non-finite value, else 0.
    pub faulted: u32,
    /// Time of the fault in seconds; meaningful only when `faulted` is 1.
    pub fault_time: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("imflux: unrepresentable error message").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ImfluxStatus {
    match e {
        Error::Config(_) | Error::ConfigParse(_) => ImfluxStatus::Config,
        Error::Io(_) | Error::Telemetry(_) => ImfluxStatus::Io,
        Error::Fault { .. } => ImfluxStatus::Fault,
    }
}

fn fail(e: &Error) -> ImfluxStatus {
    set_error(&e.to_string());
    status_of(e)
}

/// Run `f` with panics converted to `ImfluxStatus::Internal`.
fn guarded(f: impl FnOnce() -> ImfluxStatus) -> ImfluxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("imflux: internal panic");
            ImfluxStatus::Internal
        }
    }
}

/// Borrow a required C string argument.
///
/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn required_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, ImfluxStatus> {
    if p.is_null() {
        set_error(&format!("imflux: {what} must not be null"));
        return Err(ImfluxStatus::NullArg);
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(_) => {
            set_error(&format!("imflux: {what} is not valid UTF-8"));
            Err(ImfluxStatus::Utf8)
        }
    }
}

/// Library version as a static NUL-terminated string; never free it.
#[no_mangle]
pub extern "C" fn imflux_version() -> *const c_char {
    static VERSION_C: OnceLock<CString> = OnceLock::new();
    VERSION_C
        .get_or_init(|| CString::new(imflux::VERSION).expect("version has no NUL"))
        .as_ptr()
}

/// Message for the most recent failure on the calling thread, or null if no
/// failure has occurred. The pointer stays valid until the next failing call
/// on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn imflux_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// New scenario with the canonical default configuration. Never fails.
#[no_mangle]
pub extern "C" fn imflux_scenario_default() -> *mut ImfluxScenario {
    Box::into_raw(Box::new(ImfluxScenario(ScenarioConfig::default())))
}

/// Load a scenario from a TOML file. On success stores the new handle in
/// `*out`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn imflux_scenario_from_file(
    path: *const c_char,
    out: *mut *mut ImfluxScenario,
) -> ImfluxStatus {
    guarded(|| {
        if out.is_null() {
            set_error("imflux: out must not be null");
            return ImfluxStatus::NullArg;
        }
        let path = match required_str(path, "path") {
            Ok(s) => s,
            Err(st) => return st,
        };
        match ScenarioConfig::from_file(Path::new(path)) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(ImfluxScenario(cfg)));
                ImfluxStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Override one configuration key on the scenario, e.g.
/// `imflux_scenario_set(s, "sim.duration", "2.5")`. Unknown keys and
/// unparsable values fail with `Config`; value validation (positivity,
/// ranges) happens in `imflux_run`.
///
/// # Safety
/// `scenario` must be a live handle from this library; `key` and `value`
/// must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn imflux_scenario_set(
    scenario: *mut ImfluxScenario,
    key: *const c_char,
    value: *const c_char,
) -> ImfluxStatus {
    guarded(|| {
        if scenario.is_null() {
            set_error("imflux: scenario must not be null");
            return ImfluxStatus::NullArg;
        }
        let key = match required_str(key, "key") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let value = match required_str(value, "value") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let cfg = &mut (*scenario).0;
        match cfg.apply_overrides(&[format!("{key}={value}")]) {
            Ok(()) => ImfluxStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Serialize the scenario to TOML. On success `*out` holds a heap string;
/// release it with `imflux_string_free`.
///
/// # Safety
/// `scenario` must be a live handle from this library and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn imflux_scenario_to_toml(
    scenario: *const ImfluxScenario,
    out: *mut *mut c_char,
) -> ImfluxStatus {
    guarded(|| {
        if scenario.is_null() || out.is_null() {
            set_error("imflux: scenario and out must not be null");
            return ImfluxStatus::NullArg;
        }
        match (*scenario).0.to_toml_string() {
            Ok(text) => {
                let c = CString::new(text.replace('\0', " "))
                    .expect("NUL bytes were just replaced");
                *out = c.into_raw();
                ImfluxStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Validate the scenario and simulate it. Fills `*out_summary`; when
/// `telemetry_path` is non-null, also writes the full telemetry CSV there.
/// Returns `Fault` if integration hit a non-finite value; the summary then
/// describes the partial run and the telemetry holds the records up to the
/// fault.
///
/// # Safety
/// `scenario` must be a live handle from this library, `telemetry_path` null
/// or a valid NUL-terminated string, and `out_summary` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn imflux_run(
    scenario: *const ImfluxScenario,
    telemetry_path: *const c_char,
    out_summary: *mut ImfluxSummary,
) -> ImfluxStatus {
    guarded(|| {
        if scenario.is_null() || out_summary.is_null() {
            set_error("imflux: scenario and out_summary must not be null");
            return ImfluxStatus::NullArg;
        }
        let tele_path = if telemetry_path.is_null() {
            None
        } else {
            match required_str(telemetry_path, "telemetry_path") {
                Ok(s) => Some(s),
                Err(st) => return st,
            }
        };
        let cfg = &(*scenario).0;
        if let Err(e) = cfg.validate() {
            return fail(&e);
        }
        let out = match run_scenario(cfg) {
            Ok(o) => o,
            Err(e) => return fail(&e),
        };
        if let Some(path) = tele_path {
            if let Err(e) = telemetry::write_csv_file(Path::new(path), &out.records) {
                return fail(&e);
            }
        }
        let s = &out.summary;
        *out_summary = ImfluxSummary {
            steps: s.steps,
            records: out.records.len() as u64,
            wall_seconds: s.wall_seconds,
            final_flux_err_norm: s.final_flux_err_norm,
            final_rr_hat: s.final_rr_hat,
            final_rr_err_rel: s.final_rr_err_rel,
            final_tl_hat: s.final_tl_hat,
            final_tl_err: s.final_tl_err,
            final_omega_hat: s.final_omega_hat,
            final_omega_err: s.final_omega_err,
            int_delta_e_sq: s.int_delta_e_sq,
            int_delta_m_sq: s.int_delta_m_sq,
            faulted: s.fault.is_some() as u32,
            fault_time: s.fault.as_ref().map_or(0.0, |f| f.t),
        };
        match &s.fault {
            Some(f) => {
                set_error(&format!(
                    "integration fault at t = {:.6} s: non-finite value in {}",
                    f.t, f.what
                ));
                ImfluxStatus::Fault
            }
            None => ImfluxStatus::Ok,
        }
    })
}

/// Release a scenario handle. Null is a no-op.
///
/// # Safety
/// `scenario` must be null or a live handle from this library; it must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn imflux_scenario_free(scenario: *mut ImfluxScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Release a string returned by this library (`imflux_scenario_to_toml`).
/// Null is a no-op.
///
/// # Safety
/// `s` must be null or a string produced by this library; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn imflux_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
