//! Generator-variance sensitivity of individual components.
//!
//! For a pure state the quantum Fisher information of a parameter generated
//! by `G` is `4 (ΔG)²`. Everything here reports the variance `(ΔG)²` itself;
//! the factor 4 is never applied.
//!
//! The states averaged over are the ones that can actually reach a
//! component: a Haar-random signal tensored with the ancilla and propagated
//! through every element before it. The weighted average
//! `W_c = E_ψ[p(ψ) (ΔG_c)²]` uses the heralding probability of the full
//! circuit for input `ψ` as the (unnormalized) weight.

use rayon::prelude::*;

use crate::elements::{generator_of, Circuit, Matrix};
use crate::error::{Error, Result};
use crate::fidelity::{haar_sample, SeededRng};
use crate::fock::{tensor_signal_ancilla, Complex, SingleModeState, StateVector};
use crate::nsgate::{HeraldedMap, NsGateKind, MIN_HERALD_PROBABILITY};

use nalgebra::DVector;

/// Signal plus ancilla propagated through every element before
/// `component_index`. Index 0 is the untouched input.
pub fn conditional_state_before(
    circuit: &Circuit,
    deviations: &[f64],
    component_index: usize,
    signal: &SingleModeState,
) -> Result<StateVector> {
    let len = circuit.elements().len();
    if component_index >= len {
        return Err(Error::ComponentOutOfRange {
            index: component_index,
            len,
        });
    }
    let mut state = tensor_signal_ancilla(signal, circuit.ancilla(), circuit.basis())?;
    circuit.propagate(deviations, 0..component_index, &mut state)?;
    Ok(state)
}

/// Generator of the element at `component_index`.
pub fn component_generator(circuit: &Circuit, component_index: usize) -> Result<Matrix> {
    let slot = circuit
        .elements()
        .get(component_index)
        .ok_or(Error::ComponentOutOfRange {
            index: component_index,
            len: circuit.elements().len(),
        })?;
    generator_of(&slot.element, circuit.basis())
}

/// `⟨G²⟩ − ⟨G⟩²`, evaluated as `‖(G − ⟨G⟩)ψ‖² / ‖ψ‖²` so that eigenstates
/// give exactly zero.
pub fn variance(generator: &Matrix, state: &StateVector) -> Result<f64> {
    if generator.nrows() != state.amplitudes().len() {
        return Err(Error::DimensionMismatch {
            expected: generator.nrows(),
            actual: state.amplitudes().len(),
        });
    }
    let psi = DVector::from_column_slice(state.amplitudes());
    let g_psi = generator * &psi;
    let norm_sqr = psi.norm_squared();
    let mean = psi.dotc(&g_psi).re / norm_sqr;
    let centred = g_psi - psi * Complex::new(mean, 0.0);
    Ok(centred.norm_squared() / norm_sqr)
}

pub fn generator_variance(
    circuit: &Circuit,
    component_index: usize,
    state: &StateVector,
) -> Result<f64> {
    variance(&component_generator(circuit, component_index)?, state)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSensitivity {
    pub component_index: usize,
    pub parameter_id: String,
    /// Unweighted mean of `(ΔG)²` over heralded samples.
    pub mean_variance: f64,
    /// `W_c`: mean of `p(ψ) (ΔG)²` over all samples.
    pub weighted_average: f64,
    /// Largest sampled `(ΔG)²` among heralded samples; a lower bound on the
    /// optimum over herald-compatible states.
    pub max_sampled_variance: f64,
    pub n_samples: usize,
}

pub fn weighted_sensitivity_for(
    circuit: &Circuit,
    deviations: &[f64],
    component_index: usize,
    n_samples: usize,
    seed: SeededRng,
) -> Result<ComponentSensitivity> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "n_samples must be at least 1".into(),
        ));
    }
    let generator = component_generator(circuit, component_index)?;
    let map = HeraldedMap::new(circuit, deviations)?;
    let samples: Vec<(f64, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let psi = haar_sample(&mut seed.child(i as u64).rng());
            let state = conditional_state_before(circuit, deviations, component_index, &psi)?;
            let p = map.apply(&psi).probability;
            Ok((p, variance(&generator, &state)?))
        })
        .collect::<Result<_>>()?;

    let n = samples.len() as f64;
    let weighted_average = samples.iter().map(|(p, v)| p * v).sum::<f64>() / n;
    let heralded: Vec<f64> = samples
        .iter()
        .filter(|(p, _)| *p >= MIN_HERALD_PROBABILITY)
        .map(|(_, v)| *v)
        .collect();
    let (mean_variance, max_sampled_variance) = if heralded.is_empty() {
        (0.0, 0.0)
    } else {
        (
            heralded.iter().sum::<f64>() / heralded.len() as f64,
            heralded.iter().copied().fold(0.0, f64::max),
        )
    };
    Ok(ComponentSensitivity {
        component_index,
        parameter_id: circuit.parameter_ids()[circuit.elements()[component_index].parameter]
            .clone(),
        mean_variance,
        weighted_average,
        max_sampled_variance,
        n_samples,
    })
}

/// Sensitivity of one component of an ideal (undeviated) gate.
pub fn weighted_sensitivity(
    kind: NsGateKind,
    component_index: usize,
    n_samples: usize,
    seed: SeededRng,
) -> Result<ComponentSensitivity> {
    let circuit = kind.circuit();
    let zeros = vec![0.0; circuit.parameter_count()];
    weighted_sensitivity_for(circuit, &zeros, component_index, n_samples, seed)
}

/// One row per circuit element, in circuit order.
pub fn all_sensitivities(
    kind: NsGateKind,
    n_samples: usize,
    seed: SeededRng,
) -> Result<Vec<ComponentSensitivity>> {
    (0..kind.circuit().elements().len())
        .map(|c| weighted_sensitivity(kind, c, n_samples, seed))
        .collect()
}
