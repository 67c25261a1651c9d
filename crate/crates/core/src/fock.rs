//! Truncated multi-mode Fock space.
//!
//! A [`FockBasis`] enumerates every occupation tuple with at most `cutoff`
//! photons in total. States are graded by total photon number and sorted
//! lexicographically (ascending) inside each grade, so for three modes the
//! order starts `(0,0,0), (0,0,1), (0,1,0), (1,0,0), (0,0,2), ...`. This
//! order is part of the external contract: CSV files and the C header refer
//! to basis indices.
//!
//! Every element used in this crate conserves the total photon number, so
//! element matrices are block diagonal over the grades and the truncation is
//! exact.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Photon counts, one per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(Vec<u32>);

impl Occupation {
    pub fn new(counts: impl Into<Vec<u32>>) -> Self {
        Self(counts.into())
    }

    pub fn vacuum(mode_count: usize) -> Self {
        Self(vec![0; mode_count])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn mode_count(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub(crate) fn set(&mut self, mode: usize, count: u32) {
        self.0[mode] = count;
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug)]
pub struct FockBasis {
    mode_count: usize,
    cutoff: u32,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl PartialEq for FockBasis {
    // The enumeration is a pure function of (mode_count, cutoff).
    fn eq(&self, other: &Self) -> bool {
        self.mode_count == other.mode_count && self.cutoff == other.cutoff
    }
}

impl FockBasis {
    /// Enumerates all occupations of `mode_count` modes with at most `cutoff`
    /// photons in total.
    pub fn new(mode_count: usize, cutoff: u32) -> Result<Self> {
        if mode_count == 0 {
            return Err(Error::NoModes);
        }
        let mut states = Vec::new();
        for total in 0..=cutoff {
            let mut grade = Vec::new();
            compositions(
                mode_count,
                total,
                &mut Vec::with_capacity(mode_count),
                &mut grade,
            );
            states.extend(grade.into_iter().map(Occupation));
        }
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self {
            mode_count,
            cutoff,
            states,
            index,
        })
    }

    pub fn shared(mode_count: usize, cutoff: u32) -> Result<Arc<Self>> {
        Self::new(mode_count, cutoff).map(Arc::new)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &Occupation {
        &self.states[index]
    }

    pub fn index_of(&self, state: &Occupation) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.mode_count {
            Ok(())
        } else {
            Err(Error::InvalidMode {
                mode,
                mode_count: self.mode_count,
            })
        }
    }
}

// Ascending lexicographic list of all `modes`-tuples summing to `total`.
fn compositions(modes: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if modes == 1 {
        let mut state = prefix.clone();
        state.push(total);
        out.push(state);
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(modes - 1, total - first, prefix, out);
        prefix.pop();
    }
}

/// Complex amplitudes over a [`FockBasis`]. Conditional states may be
/// sub-normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex>,
}

impl StateVector {
    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let amplitudes = vec![Complex::new(0.0, 0.0); basis.len()];
        Self { basis, amplitudes }
    }

    pub fn basis_state(basis: Arc<FockBasis>, state: &Occupation) -> Result<Self> {
        let index = basis.index_of(state).ok_or(Error::CutoffTooSmall {
            cutoff: basis.cutoff(),
            required: state.total(),
        })?;
        let mut out = Self::zeros(basis);
        out.amplitudes[index] = Complex::new(1.0, 0.0);
        Ok(out)
    }

    pub fn from_amplitudes(basis: Arc<FockBasis>, amplitudes: Vec<Complex>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                actual: amplitudes.len(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex> {
        self.amplitudes
    }

    /// Amplitude of `state`, zero if it lies outside the truncation.
    pub fn amplitude(&self, state: &Occupation) -> Complex {
        self.basis
            .index_of(state)
            .map_or(Complex::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        Some(Self {
            basis: Arc::clone(&self.basis),
            amplitudes: self.amplitudes.iter().map(|a| a / norm).collect(),
        })
    }

    /// Probability mass in each total-photon-number sector, indexed by total.
    pub fn sector_weights(&self) -> Vec<f64> {
        let mut weights = vec![0.0; self.basis.cutoff() as usize + 1];
        for (state, a) in self.basis.states().iter().zip(&self.amplitudes) {
            weights[state.total() as usize] += a.norm_sqr();
        }
        weights
    }
}

/// A single-mode state truncated to `|0⟩, |1⟩, |2⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleModeState {
    pub amplitudes: [Complex; 3],
}

impl SingleModeState {
    pub fn new(a0: Complex, a1: Complex, a2: Complex) -> Self {
        Self {
            amplitudes: [a0, a1, a2],
        }
    }

    pub fn from_real(a0: f64, a1: f64, a2: f64) -> Self {
        Self::new(a0.into(), a1.into(), a2.into())
    }

    pub fn fock(n: usize) -> Self {
        let mut amplitudes = [Complex::new(0.0, 0.0); 3];
        amplitudes[n] = Complex::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// `(|0⟩ + |1⟩ + |2⟩)/√3`, the fixed probe input of the success-probability sweeps.
    pub fn equal_superposition() -> Self {
        let a = 1.0 / 3f64.sqrt();
        Self::from_real(a, a, a)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalized(&self) -> Option<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        Some(Self {
            amplitudes: self.amplitudes.map(|a| a / norm),
        })
    }
}

/// Embeds a signal on mode 0 alongside an ancilla occupation of modes
/// `1..basis.mode_count()`: amplitude `signal[n]` lands on `(n, ancilla...)`.
pub fn tensor_signal_ancilla(
    signal: &SingleModeState,
    ancilla: &Occupation,
    basis: &Arc<FockBasis>,
) -> Result<StateVector> {
    if ancilla.mode_count() + 1 != basis.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: basis.mode_count() - 1,
            actual: ancilla.mode_count(),
        });
    }
    let required = 2 + ancilla.total();
    if required > basis.cutoff() {
        return Err(Error::CutoffTooSmall {
            cutoff: basis.cutoff(),
            required,
        });
    }
    let mut out = StateVector::zeros(Arc::clone(basis));
    let mut counts = Vec::with_capacity(basis.mode_count());
    for (n, amplitude) in signal.amplitudes.iter().enumerate() {
        counts.clear();
        counts.push(n as u32);
        counts.extend_from_slice(ancilla.counts());
        let index = basis
            .index_of(&Occupation::new(counts.clone()))
            .expect("cutoff checked above");
        out.amplitudes[index] = *amplitude;
    }
    Ok(out)
}
