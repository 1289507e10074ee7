//! C interface: build a scenario from key/value pairs, run it, read back
//! the summary and the per-step trace.
//!
//! Every fallible call returns a [`ChemoplastStatus`]. On failure the
//! message is kept per thread and read with [`chemoplast_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use chemoplast::scenario::{load_config, run_scenario, ScenarioConfig, ScenarioError};
use chemoplast::simulation::{simulate, RunOutput, Termination};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChemoplastStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Simulation = 4,
    Io = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Opaque scenario configuration.
pub struct ChemoplastScenario(ScenarioConfig);

/// Opaque result of a completed run.
pub struct ChemoplastRun(RunOutput);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChemoplastSummary {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub newton_iterations: usize,
    pub final_soc: f64,
    pub max_soc_drift: f64,
    pub max_eps_pl: f64,
    /// True when the surface filled up before the end of the protocol.
    pub saturated: bool,
    pub wall_seconds: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChemoplastStepRecord {
    pub t: f64,
    pub tau: f64,
    pub order: usize,
    pub newton_iters: usize,
    pub soc: f64,
    pub c_surf: f64,
    pub sigma_phi_surf: f64,
    pub eps_pl_surf: f64,
    pub voltage: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(ChemoplastStatus, String);

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let status = match e {
            ScenarioError::Config(_) | ScenarioError::EmptySweep => ChemoplastStatus::Config,
            ScenarioError::Simulation(_) => ChemoplastStatus::Simulation,
            ScenarioError::Io { .. } | ScenarioError::Csv { .. } => ChemoplastStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f` with panics caught and the error slot updated.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ChemoplastStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChemoplastStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ChemoplastStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(ChemoplastStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ChemoplastStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn chemoplast_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chemoplast_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New scenario with default settings. Free with [`chemoplast_scenario_free`].
#[no_mangle]
pub extern "C" fn chemoplast_scenario_new() -> *mut ChemoplastScenario {
    Box::into_raw(Box::new(ChemoplastScenario(ScenarioConfig::default())))
}

/// Reads a key = value configuration file into a new scenario.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chemoplast_scenario_load(
    path: *const c_char,
    out: *mut *mut ChemoplastScenario,
) -> ChemoplastStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = PathBuf::from(c_str(path, "path")?);
        let cfg = load_config(&path).map_err(ScenarioError::from)?;
        *out = Box::into_raw(Box::new(ChemoplastScenario(cfg)));
        Ok(())
    })
}

/// Sets one configuration key, using the same names and units as the
/// configuration file. The scenario is unchanged on failure.
///
/// # Safety
/// `scenario` must come from this library; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn chemoplast_scenario_set(
    scenario: *mut ChemoplastScenario,
    key: *const c_char,
    value: *const c_char,
) -> ChemoplastStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        let (key, value) = (c_str(key, "key")?, c_str(value, "value")?);
        let mut next = s.0.clone();
        next.set(key, value)
            .map_err(|m| Failure(ChemoplastStatus::InvalidArgument, format!("`{key}`: {m}")))?;
        next.validate().map_err(|e| Failure(ChemoplastStatus::Config, e.to_string()))?;
        s.0 = next;
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chemoplast_scenario_free(scenario: *mut ChemoplastScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the scenario. With `write_artifacts` the CSV files and summary go
/// to the configured output directory. Free the result with
/// [`chemoplast_run_free`].
///
/// # Safety
/// `scenario` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chemoplast_run(
    scenario: *const ChemoplastScenario,
    write_artifacts: bool,
    out: *mut *mut ChemoplastRun,
) -> ChemoplastStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let result = if write_artifacts {
            run_scenario(&s.0)?
        } else {
            let sim = s.0.simulation().map_err(ScenarioError::from)?;
            simulate(&sim).map_err(ScenarioError::from)?
        };
        *out = Box::into_raw(Box::new(ChemoplastRun(result)));
        Ok(())
    })
}

/// # Safety
/// `run` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chemoplast_run_free(run: *mut ChemoplastRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chemoplast_run_summary(
    run: *const ChemoplastRun,
    out: *mut ChemoplastSummary,
) -> ChemoplastStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = &r.0.summary;
        *out = ChemoplastSummary {
            accepted_steps: s.accepted_steps,
            rejected_steps: s.rejected_steps,
            newton_iterations: s.newton_iterations,
            final_soc: s.final_soc,
            max_soc_drift: s.max_soc_drift,
            max_eps_pl: s.max_eps,
            saturated: matches!(s.termination, Termination::SurfaceSaturated { .. }),
            wall_seconds: s.wall.as_secs_f64(),
        };
        Ok(())
    })
}

/// Number of trace records, including the initial state. Zero for NULL.
///
/// # Safety
/// `run` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn chemoplast_run_trace_len(run: *const ChemoplastRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.records.len())
}

/// Copies trace record `index` into `out`.
///
/// # Safety
/// `run` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chemoplast_run_trace(
    run: *const ChemoplastRun,
    index: usize,
    out: *mut ChemoplastStepRecord,
) -> ChemoplastStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let rec = r.0.records.get(index).ok_or_else(|| {
            Failure(
                ChemoplastStatus::OutOfRange,
                format!("index {index} beyond {} records", r.0.records.len()),
            )
        })?;
        *out = ChemoplastStepRecord {
            t: rec.t,
            tau: rec.tau,
            order: rec.order,
            newton_iters: rec.newton_iters,
            soc: rec.soc,
            c_surf: rec.c_surf,
            sigma_phi_surf: rec.sigma_phi_surf,
            eps_pl_surf: rec.eps_pl_surf,
            voltage: rec.voltage,
        };
        Ok(())
    })
}
