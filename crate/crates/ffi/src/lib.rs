//! C ABI over the `nsgate` simulator.
//!
//! Circuits are opaque `NsgCircuit` handles owned by the caller and released
//! with `nsg_circuit_free`. Every fallible call returns an `NsgStatus`; on
//! failure `nsg_last_error_message` describes the most recent error on the
//! calling thread. Strings returned by the library are released with
//! `nsg_string_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nsgate::elements::Circuit;
use nsgate::fidelity::{circuit_fidelity_mc, SeededRng};
use nsgate::fock::SingleModeState;
use nsgate::nsgate::{run_heralded, NsGateKind};
use nsgate::Error;
use num_complex::Complex64;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    InvalidCircuit = 4,
    /// The herald pattern cannot occur for this input.
    NotHeralded = 5,
    InvalidUtf8 = 6,
    Internal = 7,
}

/// Built-in gate wirings.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsgGate {
    Klm = 0,
    Reverse = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NsgComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for NsgComplex {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<NsgComplex> for Complex64 {
    fn from(c: NsgComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

/// Monte Carlo fidelity estimate.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NsgFidelity {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub n_excluded: usize,
    pub mean_success_prob: f64,
}

/// Opaque circuit handle.
pub struct NsgCircuit {
    inner: Circuit,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(error: &Error) -> NsgStatus {
    match error {
        Error::Parse { .. } => NsgStatus::ParseError,
        Error::InvalidCircuit(_)
        | Error::NoModes
        | Error::InvalidMode { .. }
        | Error::RepeatedMode(_)
        | Error::CutoffTooSmall { .. } => NsgStatus::InvalidCircuit,
        Error::NoHeraldedSamples { .. } => NsgStatus::NotHeralded,
        _ => NsgStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), NsgStatus>) -> NsgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsgStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            NsgStatus::Internal
        }
    }
}

fn fail(error: Error) -> NsgStatus {
    set_error(error.to_string());
    status_of(&error)
}

fn null(what: &str) -> NsgStatus {
    set_error(format!("{what} is null"));
    NsgStatus::NullPointer
}

unsafe fn deviations<'a>(
    circuit: &Circuit,
    devs: *const f64,
    n_devs: usize,
) -> Result<&'a [f64], NsgStatus> {
    if n_devs != circuit.parameter_count() {
        set_error(format!(
            "expected {} deviations, got {n_devs}",
            circuit.parameter_count()
        ));
        return Err(NsgStatus::InvalidArgument);
    }
    if n_devs == 0 {
        return Ok(&[]);
    }
    if devs.is_null() {
        return Err(null("deviations"));
    }
    Ok(std::slice::from_raw_parts(devs, n_devs))
}

fn into_handle(circuit: Circuit, out: *mut *mut NsgCircuit) {
    unsafe { *out = Box::into_raw(Box::new(NsgCircuit { inner: circuit })) };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nsg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn nsg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a handle for one of the built-in gates.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn nsg_circuit_builtin(
    gate: NsgGate,
    out: *mut *mut NsgCircuit,
) -> NsgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match gate {
            NsgGate::Klm => NsGateKind::Klm,
            NsgGate::Reverse => NsGateKind::Reverse,
        };
        into_handle(kind.circuit().clone(), out);
        Ok(())
    })
}

/// Parses a circuit from its plain-text description.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsg_circuit_parse(
    text: *const c_char,
    out: *mut *mut NsgCircuit,
) -> NsgStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|e| {
            set_error(e.to_string());
            NsgStatus::InvalidUtf8
        })?;
        let circuit = Circuit::parse(text).map_err(fail)?;
        into_handle(circuit, out);
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `circuit` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nsg_circuit_free(circuit: *mut NsgCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Number of deviation entries the circuit expects.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsg_circuit_parameter_count(
    circuit: *const NsgCircuit,
    out: *mut usize,
) -> NsgStatus {
    guard(|| {
        let circuit = circuit.as_ref().ok_or_else(|| null("circuit"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = circuit.inner.parameter_count();
        Ok(())
    })
}

/// Plain-text description of the circuit; free with `nsg_string_free`.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsg_circuit_to_text(
    circuit: *const NsgCircuit,
    out: *mut *mut c_char,
) -> NsgStatus {
    guard(|| {
        let circuit = circuit.as_ref().ok_or_else(|| null("circuit"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CString::new(circuit.inner.to_text()).map_err(|e| {
            set_error(e.to_string());
            NsgStatus::Internal
        })?;
        *out = text.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nsg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the circuit on signal `(c0, c1, c2)` and post-selects on the herald.
/// Writes the normalized output and the heralding probability. Returns
/// `NSG_STATUS_NOT_HERALDED` (with `probability` still written) when the
/// herald cannot fire.
///
/// # Safety
/// `deviations` must hold `n_deviations` values; `signal` and `output` must
/// point to three elements each; `probability` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsg_circuit_apply(
    circuit: *const NsgCircuit,
    deviations: *const f64,
    n_deviations: usize,
    signal: *const NsgComplex,
    output: *mut NsgComplex,
    probability: *mut f64,
) -> NsgStatus {
    guard(|| {
        let circuit = &circuit.as_ref().ok_or_else(|| null("circuit"))?.inner;
        let devs = self::deviations(circuit, deviations, n_deviations)?;
        if signal.is_null() {
            return Err(null("signal"));
        }
        if output.is_null() || probability.is_null() {
            return Err(null("output"));
        }
        let s = std::slice::from_raw_parts(signal, 3);
        let signal = SingleModeState::new(s[0].into(), s[1].into(), s[2].into());
        let outcome = run_heralded(circuit, devs, &signal).map_err(fail)?;
        *probability = outcome.probability;
        let out = std::slice::from_raw_parts_mut(output, 3);
        match outcome.output {
            Some(state) => {
                for (o, a) in out.iter_mut().zip(state.amplitudes) {
                    *o = a.into();
                }
                Ok(())
            }
            None => {
                out.fill(NsgComplex::default());
                set_error("herald pattern cannot occur for this input");
                Err(NsgStatus::NotHeralded)
            }
        }
    })
}

/// Average gate fidelity over `n_samples` Haar-random inputs.
/// Deterministic in `seed`.
///
/// # Safety
/// `deviations` must hold `n_deviations` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsg_circuit_fidelity_mc(
    circuit: *const NsgCircuit,
    deviations: *const f64,
    n_deviations: usize,
    n_samples: usize,
    seed: u64,
    out: *mut NsgFidelity,
) -> NsgStatus {
    guard(|| {
        let circuit = &circuit.as_ref().ok_or_else(|| null("circuit"))?.inner;
        let devs = self::deviations(circuit, deviations, n_deviations)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let est =
            circuit_fidelity_mc(circuit, devs, n_samples, SeededRng::new(seed)).map_err(fail)?;
        *out = NsgFidelity {
            mean: est.mean,
            std_error: est.std_error,
            n_samples: est.n_samples,
            n_excluded: est.n_excluded,
            mean_success_prob: est.mean_success_prob,
        };
        Ok(())
    })
}
