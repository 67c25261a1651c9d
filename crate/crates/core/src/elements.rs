//! Passive optical elements on a truncated Fock space, and circuits built
//! from them.
//!
//! Beam splitters use a real rotation convention with no internal phase:
//!
//! ```text
//! U a_j† U† = cos θ a_j† + sin θ a_k†
//! U a_k† U† = −sin θ a_j† + cos θ a_k†
//! ```
//!
//! so `|1,0⟩ → cos θ |1,0⟩ + sin θ |0,1⟩` on the pair `(j, k)`. Swapping the
//! pair order is the same as negating the angle. Phase shifters act as
//! `|n⟩ → e^{inφ}|n⟩`. All complex phases live in explicit phase shifters.
//!
//! Each element is generated by a Hermitian operator, `U(t) = exp(−i t G)`:
//! `G = −i(a_j† a_k − a_k† a_j)` for a beam splitter and `G = n_j` for a
//! phase shifter. Parameter deviations are additive on the nominal value.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{Complex, FockBasis, Occupation, StateVector};

pub type Matrix = DMatrix<Complex>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OpticalElement {
    BeamSplitter { modes: (usize, usize), angle: f64 },
    PhaseShifter { mode: usize, phase: f64 },
}

impl OpticalElement {
    pub fn beam_splitter(first: usize, second: usize, angle: f64) -> Self {
        Self::BeamSplitter {
            modes: (first, second),
            angle,
        }
    }

    pub fn phase_shifter(mode: usize, phase: f64) -> Self {
        Self::PhaseShifter { mode, phase }
    }

    /// The angle or phase, in radians.
    pub fn value(&self) -> f64 {
        match *self {
            Self::BeamSplitter { angle, .. } => angle,
            Self::PhaseShifter { phase, .. } => phase,
        }
    }

    pub fn with_value(self, value: f64) -> Self {
        match self {
            Self::BeamSplitter { modes, .. } => Self::BeamSplitter {
                modes,
                angle: value,
            },
            Self::PhaseShifter { mode, .. } => Self::PhaseShifter { mode, phase: value },
        }
    }

    pub fn validate(&self, mode_count: usize) -> Result<()> {
        let check = |mode| {
            if mode < mode_count {
                Ok(())
            } else {
                Err(Error::InvalidMode { mode, mode_count })
            }
        };
        match *self {
            Self::BeamSplitter { modes: (j, k), .. } => {
                check(j)?;
                check(k)?;
                if j == k {
                    return Err(Error::RepeatedMode(j));
                }
                Ok(())
            }
            Self::PhaseShifter { mode, .. } => check(mode),
        }
    }

    pub fn unitary(&self, basis: &FockBasis) -> Result<Matrix> {
        match *self {
            Self::BeamSplitter { modes, angle } => beam_splitter_unitary(angle, modes, basis),
            Self::PhaseShifter { mode, phase } => phase_unitary(phase, mode, basis),
        }
    }

    /// Applies the element in place. Phase shifters skip the matrix.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match *self {
            Self::PhaseShifter { mode, phase } => {
                state.basis().check_mode(mode)?;
                let basis = Arc::clone(state.basis());
                for (amp, occ) in state.amplitudes_mut().iter_mut().zip(basis.states()) {
                    let n = occ.get(mode);
                    if n != 0 {
                        *amp *= Complex::from_polar(1.0, n as f64 * phase);
                    }
                }
                Ok(())
            }
            Self::BeamSplitter { modes, angle } => {
                self.validate(state.basis().mode_count())?;
                let basis = Arc::clone(state.basis());
                let trig = angle.sin_cos();
                let mut out = vec![Complex::new(0.0, 0.0); basis.len()];
                for (amp, input) in state.amplitudes().iter().zip(basis.states()) {
                    if *amp != Complex::new(0.0, 0.0) {
                        splitter_column(trig, modes, input, &basis, |row, u| out[row] += amp * u);
                    }
                }
                state.amplitudes_mut().copy_from_slice(&out);
                Ok(())
            }
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Beam-splitter matrix on the truncated basis, built sector by sector from
/// the mode transformation: `|a, b⟩` on the pair maps to
/// `(c a_j† + s a_k†)^a (−s a_j† + c a_k†)^b |0,0⟩ / √(a! b!)`.
pub fn beam_splitter_unitary(
    theta: f64,
    modes: (usize, usize),
    basis: &FockBasis,
) -> Result<Matrix> {
    let (j, k) = modes;
    OpticalElement::beam_splitter(j, k, theta).validate(basis.mode_count())?;
    let dim = basis.len();
    let mut u = Matrix::zeros(dim, dim);
    for (col, input) in basis.states().iter().enumerate() {
        splitter_column(theta.sin_cos(), modes, input, basis, |row, amp| {
            u[(row, col)] = Complex::new(amp, 0.0);
        });
    }
    Ok(u)
}

/// Image of one basis state under the splitter, reported as `(row, amplitude)`.
fn splitter_column(
    (s, c): (f64, f64),
    (j, k): (usize, usize),
    input: &Occupation,
    basis: &FockBasis,
    mut emit: impl FnMut(usize, f64),
) {
    let (a, b) = (input.get(j), input.get(k));
    let norm = (factorial(a) * factorial(b)).sqrt();
    // coefficient of (a_j†)^m (a_k†)^(a+b-m) in the expanded product
    let mut coeffs = [0.0; 16];
    let coeffs = &mut coeffs[..(a + b + 1) as usize];
    for p in 0..=a {
        let left = binomial(a, p) * c.powi(p as i32) * s.powi((a - p) as i32);
        for q in 0..=b {
            let right = binomial(b, q) * (-s).powi(q as i32) * c.powi((b - q) as i32);
            coeffs[(p + q) as usize] += left * right;
        }
    }
    let mut counts = input.clone();
    for (m, coeff) in coeffs.iter().enumerate() {
        if *coeff == 0.0 {
            continue;
        }
        let m = m as u32;
        counts.set(j, m);
        counts.set(k, a + b - m);
        let amp = coeff * (factorial(m) * factorial(a + b - m)).sqrt() / norm;
        let row = basis
            .index_of(&counts)
            .expect("beam splitters conserve photon number");
        emit(row, amp);
    }
}

/// Diagonal phase matrix: `e^{i n_j φ}` on a state with `n_j` photons in `mode`.
pub fn phase_unitary(phi: f64, mode: usize, basis: &FockBasis) -> Result<Matrix> {
    basis.check_mode(mode)?;
    let diag: Vec<Complex> = basis
        .states()
        .iter()
        .map(|s| Complex::from_polar(1.0, s.get(mode) as f64 * phi))
        .collect();
    Ok(Matrix::from_diagonal(&DVector::from_vec(diag)))
}

/// `a_to† a_from` on the truncated basis. Photon number is conserved, so the
/// truncation does not clip it.
fn hop(to: usize, from: usize, basis: &FockBasis) -> Matrix {
    let dim = basis.len();
    let mut m = Matrix::zeros(dim, dim);
    for (col, state) in basis.states().iter().enumerate() {
        let n_from = state.get(from);
        if n_from == 0 {
            continue;
        }
        let mut counts = state.counts().to_vec();
        counts[from] -= 1;
        counts[to] += 1;
        let amp = (n_from as f64 * counts[to] as f64).sqrt();
        let row = basis
            .index_of(&Occupation::new(counts))
            .expect("same grade");
        m[(row, col)] = Complex::new(amp, 0.0);
    }
    m
}

/// Hermitian generator `G` with `U(t) = exp(−i t G)` for the element's own
/// parameter.
pub fn generator_of(element: &OpticalElement, basis: &FockBasis) -> Result<Matrix> {
    element.validate(basis.mode_count())?;
    Ok(match *element {
        OpticalElement::BeamSplitter { modes: (j, k), .. } => {
            (hop(j, k, basis) - hop(k, j, basis)) * Complex::new(0.0, -1.0)
        }
        OpticalElement::PhaseShifter { mode, .. } => {
            let diag: Vec<Complex> = basis
                .states()
                .iter()
                .map(|s| Complex::new(s.get(mode) as f64, 0.0))
                .collect();
            Matrix::from_diagonal(&DVector::from_vec(diag))
        }
    })
}

/// One slot of a circuit: an element at its nominal value, and the index of
/// the tunable parameter that deviates it.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitElement {
    pub element: OpticalElement,
    pub parameter: usize,
    /// Closed form of the nominal value, for documentation only.
    pub form: Option<String>,
}

/// An interferometer acting on mode 0 (the signal) plus ancilla modes
/// `1..mode_count`, followed by photon counting on the ancilla modes.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    name: String,
    mode_count: usize,
    elements: Vec<CircuitElement>,
    parameter_ids: Vec<String>,
    ancilla: Occupation,
    herald: Occupation,
    basis: Arc<FockBasis>,
}

impl Circuit {
    /// `ancilla` and `herald` give occupations of modes `1..mode_count`.
    /// Every parameter must drive exactly one element.
    pub fn new(
        name: impl Into<String>,
        mode_count: usize,
        elements: Vec<CircuitElement>,
        parameter_ids: Vec<String>,
        ancilla: Occupation,
        herald: Occupation,
    ) -> Result<Self> {
        if mode_count < 2 {
            return Err(Error::InvalidCircuit(
                "need a signal mode and at least one ancilla mode".into(),
            ));
        }
        for (what, occ) in [("ancilla", &ancilla), ("herald", &herald)] {
            if occ.mode_count() != mode_count - 1 {
                return Err(Error::InvalidCircuit(format!(
                    "{what} lists {} modes, expected {}",
                    occ.mode_count(),
                    mode_count - 1
                )));
            }
        }
        let mut used = vec![0usize; parameter_ids.len()];
        for slot in &elements {
            slot.element.validate(mode_count)?;
            let count = used.get_mut(slot.parameter).ok_or_else(|| {
                Error::InvalidCircuit(format!("parameter index {} out of range", slot.parameter))
            })?;
            *count += 1;
        }
        if let Some(i) = used.iter().position(|&n| n != 1) {
            return Err(Error::InvalidCircuit(format!(
                "parameter `{}` drives {} elements, expected 1",
                parameter_ids[i], used[i]
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &parameter_ids {
            if !seen.insert(id) {
                return Err(Error::InvalidCircuit(format!("duplicate parameter `{id}`")));
            }
        }
        let basis = FockBasis::shared(mode_count, 2 + ancilla.total())?;
        Ok(Self {
            name: name.into(),
            mode_count,
            elements,
            parameter_ids,
            ancilla,
            herald,
            basis,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn elements(&self) -> &[CircuitElement] {
        &self.elements
    }

    pub fn parameter_ids(&self) -> &[String] {
        &self.parameter_ids
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_ids.len()
    }

    pub fn parameter_index(&self, id: &str) -> Result<usize> {
        self.parameter_ids
            .iter()
            .position(|p| p == id)
            .ok_or_else(|| Error::UnknownParameter(id.to_string()))
    }

    /// Element slot driven by parameter `parameter`.
    pub fn element_for_parameter(&self, parameter: usize) -> Option<usize> {
        self.elements.iter().position(|e| e.parameter == parameter)
    }

    pub fn ancilla(&self) -> &Occupation {
        &self.ancilla
    }

    pub fn herald(&self) -> &Occupation {
        &self.herald
    }

    /// Basis holding two signal photons plus the ancilla photons.
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    fn check_deviations(&self, deviations: &[f64]) -> Result<()> {
        if deviations.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_count(),
                actual: deviations.len(),
            });
        }
        Ok(())
    }

    /// Element `index` at nominal value plus its parameter's deviation.
    pub fn deviated_element(&self, index: usize, deviations: &[f64]) -> Result<OpticalElement> {
        self.check_deviations(deviations)?;
        let slot = self.elements.get(index).ok_or(Error::ComponentOutOfRange {
            index,
            len: self.elements.len(),
        })?;
        Ok(slot
            .element
            .with_value(slot.element.value() + deviations[slot.parameter]))
    }

    /// Propagates `state` through elements `range` (in circuit order).
    pub fn propagate(
        &self,
        deviations: &[f64],
        range: std::ops::Range<usize>,
        state: &mut StateVector,
    ) -> Result<()> {
        self.check_deviations(deviations)?;
        if **state.basis() != *self.basis {
            return Err(Error::BasisMismatch);
        }
        for index in range {
            self.deviated_element(index, deviations)?.apply(state)?;
        }
        Ok(())
    }

    /// Whole-circuit unitary at the given deviations.
    pub fn unitary(&self, deviations: &[f64]) -> Result<Matrix> {
        let dim = self.basis.len();
        let mut total = Matrix::identity(dim, dim);
        for index in 0..self.elements.len() {
            total = self
                .deviated_element(index, deviations)?
                .unitary(&self.basis)?
                * total;
        }
        Ok(total)
    }

    /// Plain-text `key = value` description; [`Circuit::parse`] reads it back.
    /// Modes are numbered from 1 in the text.
    pub fn to_text(&self) -> String {
        let list = |counts: &[u32]| {
            counts
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# linear-optical circuit; modes numbered from 1, signal on mode 1"
        );
        let _ = writeln!(
            out,
            "# elements are listed in the order light meets them; angles and phases in radians"
        );
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "modes = {}", self.mode_count);
        let _ = writeln!(out, "ancilla = {}", list(self.ancilla.counts()));
        let _ = writeln!(out, "herald = {}", list(self.herald.counts()));
        let _ = writeln!(out, "parameters = {}", self.parameter_ids.join(","));
        for slot in &self.elements {
            let param = &self.parameter_ids[slot.parameter];
            let _ = match slot.element {
                OpticalElement::BeamSplitter {
                    modes: (j, k),
                    angle,
                } => write!(
                    out,
                    "element = bs modes={},{} param={param} value={angle:?}",
                    j + 1,
                    k + 1
                ),
                OpticalElement::PhaseShifter { mode, phase } => write!(
                    out,
                    "element = phase mode={} param={param} value={phase:?}",
                    mode + 1
                ),
            };
            if let Some(form) = &slot.form {
                let _ = write!(out, " form={form}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut modes = None;
        let mut ancilla = None;
        let mut herald = None;
        let mut parameter_ids: Option<Vec<String>> = None;
        let mut raw_elements = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => name = Some(value.to_string()),
                "modes" => {
                    modes = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| err(format!("modes: {e}")))?,
                    )
                }
                "ancilla" => ancilla = Some(parse_counts(value).map_err(err)?),
                "herald" => herald = Some(parse_counts(value).map_err(err)?),
                "parameters" => {
                    parameter_ids = Some(value.split(',').map(|s| s.trim().to_string()).collect())
                }
                "element" => raw_elements.push((line_no, value.to_string())),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }

        let missing = |what: &str| Error::Parse {
            line: 0,
            message: format!("missing `{what}`"),
        };
        let modes = modes.ok_or_else(|| missing("modes"))?;
        let parameter_ids = parameter_ids.ok_or_else(|| missing("parameters"))?;
        let mut elements = Vec::with_capacity(raw_elements.len());
        for (line, spec) in raw_elements {
            elements.push(
                parse_element(&spec, &parameter_ids)
                    .map_err(|message| Error::Parse { line, message })?,
            );
        }
        Circuit::new(
            name.unwrap_or_default(),
            modes,
            elements,
            parameter_ids,
            Occupation::new(ancilla.ok_or_else(|| missing("ancilla"))?),
            Occupation::new(herald.ok_or_else(|| missing("herald"))?),
        )
    }
}

fn parse_counts(value: &str) -> std::result::Result<Vec<u32>, String> {
    value
        .split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

fn parse_mode(value: &str) -> std::result::Result<usize, String> {
    match value.trim().parse::<usize>() {
        Ok(0) => Err("modes are numbered from 1".into()),
        Ok(m) => Ok(m - 1),
        Err(e) => Err(format!("mode `{value}`: {e}")),
    }
}

fn parse_element(
    spec: &str,
    parameter_ids: &[String],
) -> std::result::Result<CircuitElement, String> {
    let mut tokens = spec.split_whitespace();
    let kind = tokens.next().ok_or("empty element")?;
    let (mut modes, mut param, mut value, mut form) = (None, None, None, None);
    for token in tokens {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| format!("expected `key=value`, got `{token}`"))?;
        match k {
            "mode" | "modes" => modes = Some(v.to_string()),
            "param" => param = Some(v.to_string()),
            "value" => value = Some(v.parse::<f64>().map_err(|e| format!("value `{v}`: {e}"))?),
            "form" => form = Some(v.to_string()),
            other => return Err(format!("unknown element key `{other}`")),
        }
    }
    let modes = modes.ok_or("element needs `mode`/`modes`")?;
    let value = value.ok_or("element needs `value`")?;
    let param = param.ok_or("element needs `param`")?;
    let parameter = parameter_ids
        .iter()
        .position(|p| *p == param)
        .ok_or_else(|| format!("parameter `{param}` not declared"))?;
    let element = match kind {
        "bs" => {
            let (j, k) = modes
                .split_once(',')
                .ok_or("beam splitter needs `modes=j,k`")?;
            OpticalElement::beam_splitter(parse_mode(j)?, parse_mode(k)?, value)
        }
        "phase" => OpticalElement::phase_shifter(parse_mode(&modes)?, value),
        other => return Err(format!("unknown element kind `{other}`")),
    };
    Ok(CircuitElement {
        element,
        parameter,
        form,
    })
}

/// Applies the circuit at `nominal + deviations` to `input`.
pub fn apply_circuit(
    circuit: &Circuit,
    deviations: &[f64],
    input: &StateVector,
) -> Result<StateVector> {
    let mut state = input.clone();
    circuit.propagate(deviations, 0..circuit.elements().len(), &mut state)?;
    Ok(state)
}
