//! The two nonlinear-sign gate circuits and the heralding map.
//!
//! Both gates act on a signal in mode 1 with a single ancilla photon in mode
//! 2 (mode 3 empty), and succeed when the detectors see one photon in mode 2
//! and none in mode 3. The ideal map is `α|0⟩ + β|1⟩ + γ|2⟩ → α|0⟩ + β|1⟩ − γ|2⟩`
//! with heralding probability 1/4 for every input.
//!
//! Resolved wiring (1-based modes, elements in the order light meets them):
//!
//! | KLM                                   | Reverse                              |
//! |---------------------------------------|--------------------------------------|
//! | phase1 on 2, phase2 on 3 (inputs)     | phase1 on 2, phase2 on 3 (inputs)    |
//! | BS1 on (2,3), θ₁ = arccos √η₁         | phase3 on 1                          |
//! | phase3 on 1, phase4 on 2              | BS1 on (1,2), ξ₁ = arctan χ₁         |
//! | BS2 on (1,2), θ₂ = π − arccos √η₂     | phase4 on 2, phase5 on 1             |
//! | phase5 on 3                           | BS2 on (2,3), ξ₂ = π + arctan χ₂     |
//! | BS3 on (3,2), θ₃ = −θ₁                | BS3 on (1,2), ξ₃ = −ξ₁               |
//!
//! The KLM η values are intensity transmissions (`cos²θ = η`, so θ₁ = 22.5°).
//! The middle KLM splitter carries the negative amplitude transmission
//! `cos θ₂ = −√η₂`, and its third splitter lists its ports in reverse order so
//! that `θ₃ = −θ₁` literally. With these choices every nominal phase is zero
//! and the heralded amplitudes satisfy `c₀ = c₁ = −c₂`, `|c_k| = 1/2`.
//!
//! The two input phases of each gate are inert: a phase on the empty mode 3
//! does nothing, and a phase on the single ancilla photon is global.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::elements::{Circuit, CircuitElement, OpticalElement};
use crate::error::{Error, Result};
use crate::fock::{tensor_signal_ancilla, Complex, Occupation, SingleModeState, StateVector};

/// Heralding probabilities below this are treated as "no herald".
pub const MIN_HERALD_PROBABILITY: f64 = 1e-14;

/// Names of the eight tunable parameters, in error-vector order.
pub const PARAMETER_IDS: [&str; 8] = [
    "angle1", "angle2", "angle3", "phase1", "phase2", "phase3", "phase4", "phase5",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NsGateKind {
    Klm,
    Reverse,
}

impl NsGateKind {
    pub const ALL: [NsGateKind; 2] = [NsGateKind::Klm, NsGateKind::Reverse];

    pub fn as_str(self) -> &'static str {
        match self {
            NsGateKind::Klm => "klm",
            NsGateKind::Reverse => "reverse",
        }
    }

    /// The gate's circuit at nominal parameters, built once.
    pub fn circuit(self) -> &'static Circuit {
        static KLM: OnceLock<Circuit> = OnceLock::new();
        static REVERSE: OnceLock<Circuit> = OnceLock::new();
        match self {
            NsGateKind::Klm => KLM.get_or_init(klm_circuit),
            NsGateKind::Reverse => REVERSE.get_or_init(reverse_circuit),
        }
    }
}

impl fmt::Display for NsGateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NsGateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "klm" => Ok(NsGateKind::Klm),
            "reverse" | "rev" => Ok(NsGateKind::Reverse),
            other => Err(Error::InvalidArgument(format!(
                "unknown gate `{other}` (expected klm or reverse)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateConstants {
    pub eta1: f64,
    pub eta2: f64,
    pub chi1: f64,
    pub chi2: f64,
}

impl GateConstants {
    pub fn new() -> Self {
        let sqrt2 = 2f64.sqrt();
        Self {
            eta1: 1.0 / (4.0 - 2.0 * sqrt2),
            eta2: 3.0 - 2.0 * sqrt2,
            chi1: 8f64.powf(0.25),
            chi2: (16.0 * sqrt2 - 13.0).sqrt() / 7.0,
        }
    }

    pub fn klm_angles(&self) -> [f64; 3] {
        let theta1 = self.eta1.sqrt().acos();
        let theta2 = PI - self.eta2.sqrt().acos();
        [theta1, theta2, -theta1]
    }

    pub fn reverse_angles(&self) -> [f64; 3] {
        let xi1 = self.chi1.atan();
        [xi1, PI + self.chi2.atan(), -xi1]
    }
}

impl Default for GateConstants {
    fn default() -> Self {
        Self::new()
    }
}

fn slot(element: OpticalElement, parameter: &str, form: Option<&str>) -> CircuitElement {
    CircuitElement {
        element,
        parameter: PARAMETER_IDS
            .iter()
            .position(|p| *p == parameter)
            .expect("known parameter id"),
        form: form.map(str::to_string),
    }
}

fn ns_circuit(name: &str, elements: Vec<CircuitElement>) -> Circuit {
    Circuit::new(
        name,
        3,
        elements,
        PARAMETER_IDS.iter().map(|s| s.to_string()).collect(),
        Occupation::new([1, 0]),
        Occupation::new([1, 0]),
    )
    .expect("built-in circuits are valid")
}

pub fn klm_circuit() -> Circuit {
    let [t1, t2, t3] = GateConstants::new().klm_angles();
    let phase = |mode, id| slot(OpticalElement::phase_shifter(mode, 0.0), id, None);
    ns_circuit(
        "klm",
        vec![
            phase(1, "phase1"),
            phase(2, "phase2"),
            slot(
                OpticalElement::beam_splitter(1, 2, t1),
                "angle1",
                Some("arccos(sqrt(eta1))"),
            ),
            phase(0, "phase3"),
            phase(1, "phase4"),
            slot(
                OpticalElement::beam_splitter(0, 1, t2),
                "angle2",
                Some("pi-arccos(sqrt(eta2))"),
            ),
            phase(2, "phase5"),
            slot(
                OpticalElement::beam_splitter(2, 1, t3),
                "angle3",
                Some("-theta1"),
            ),
        ],
    )
}

pub fn reverse_circuit() -> Circuit {
    let [x1, x2, x3] = GateConstants::new().reverse_angles();
    let phase = |mode, id| slot(OpticalElement::phase_shifter(mode, 0.0), id, None);
    ns_circuit(
        "reverse",
        vec![
            phase(1, "phase1"),
            phase(2, "phase2"),
            phase(0, "phase3"),
            slot(
                OpticalElement::beam_splitter(0, 1, x1),
                "angle1",
                Some("arctan(chi1)"),
            ),
            phase(1, "phase4"),
            phase(0, "phase5"),
            slot(
                OpticalElement::beam_splitter(1, 2, x2),
                "angle2",
                Some("pi+arctan(chi2)"),
            ),
            slot(
                OpticalElement::beam_splitter(0, 1, x3),
                "angle3",
                Some("-xi1"),
            ),
        ],
    )
}

/// `(α, β, γ) → (α, β, −γ)`.
pub fn ideal_ns_target(input: &SingleModeState) -> SingleModeState {
    let [a, b, g] = input.amplitudes;
    SingleModeState::new(a, b, -g)
}

/// Post-selected signal state. `output` is `None` when the herald pattern
/// cannot occur (probability below [`MIN_HERALD_PROBABILITY`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalOutcome {
    pub output: Option<SingleModeState>,
    pub probability: f64,
    pub raw_coefficients: [Complex; 3],
}

impl ConditionalOutcome {
    pub fn from_raw(raw_coefficients: [Complex; 3]) -> Self {
        let probability: f64 = raw_coefficients.iter().map(|c| c.norm_sqr()).sum();
        let output = if probability >= MIN_HERALD_PROBABILITY {
            let norm = probability.sqrt();
            Some(SingleModeState {
                amplitudes: raw_coefficients.map(|c| c / norm),
            })
        } else {
            None
        };
        Self {
            output,
            probability,
            raw_coefficients,
        }
    }

    pub fn is_heralded(&self) -> bool {
        self.output.is_some()
    }
}

/// Projects a three-mode state onto `herald` on modes 2..: `c_n` is the
/// amplitude of `(n, herald...)` for `n = 0, 1, 2`.
pub fn post_select(state: &StateVector, herald: &Occupation) -> Result<ConditionalOutcome> {
    let basis = state.basis();
    if herald.mode_count() + 1 != basis.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: basis.mode_count() - 1,
            actual: herald.mode_count(),
        });
    }
    let mut counts = vec![0u32; basis.mode_count()];
    counts[1..].copy_from_slice(herald.counts());
    let raw = std::array::from_fn(|n| {
        counts[0] = n as u32;
        state.amplitude(&Occupation::new(counts.clone()))
    });
    Ok(ConditionalOutcome::from_raw(raw))
}

/// Runs a signal through `circuit` (ancilla attached, then heralded).
pub fn run_heralded(
    circuit: &Circuit,
    deviations: &[f64],
    signal: &SingleModeState,
) -> Result<ConditionalOutcome> {
    let mut state = tensor_signal_ancilla(signal, circuit.ancilla(), circuit.basis())?;
    circuit.propagate(deviations, 0..circuit.elements().len(), &mut state)?;
    post_select(&state, circuit.herald())
}

pub fn apply_ns(
    kind: NsGateKind,
    deviations: &[f64],
    signal: &SingleModeState,
) -> Result<ConditionalOutcome> {
    run_heralded(kind.circuit(), deviations, signal)
}

/// The heralded process is linear in the signal amplitudes: `c = K · (α, β, γ)`.
/// Column `n` of `K` is the raw heralded output for input `|n⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeraldedMap {
    pub matrix: [[Complex; 3]; 3],
}

impl HeraldedMap {
    pub fn new(circuit: &Circuit, deviations: &[f64]) -> Result<Self> {
        let mut matrix = [[Complex::new(0.0, 0.0); 3]; 3];
        for n in 0..3 {
            let column =
                run_heralded(circuit, deviations, &SingleModeState::fock(n))?.raw_coefficients;
            for (row, value) in matrix.iter_mut().zip(column) {
                row[n] = value;
            }
        }
        Ok(Self { matrix })
    }

    pub fn for_gate(kind: NsGateKind, deviations: &[f64]) -> Result<Self> {
        Self::new(kind.circuit(), deviations)
    }

    pub fn apply(&self, signal: &SingleModeState) -> ConditionalOutcome {
        let raw = std::array::from_fn(|m| {
            (0..3)
                .map(|n| self.matrix[m][n] * signal.amplitudes[n])
                .sum()
        });
        ConditionalOutcome::from_raw(raw)
    }
}
