//! Haar-random inputs and Monte Carlo estimates of the average gate fidelity
//! of the normalized heralded process.
//!
//! Every sample draws from its own ChaCha8 stream derived from
//! `(seed, stream, sample_index)`, and per-sample results are reduced in
//! index order. Estimates therefore depend only on the inputs and the seed,
//! never on the number of worker threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::elements::Circuit;
use crate::error::{Error, Result};
use crate::fock::{Complex, SingleModeState};
use crate::nsgate::{ideal_ns_target, HeraldedMap, NsGateKind};

/// Default number of Haar samples per fidelity estimate.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Identity of a random stream: ChaCha8 keyed from `seed` (via
/// `seed_from_u64`) with 64-bit stream id `stream`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeededRng {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Independent sub-stream number `index`.
    pub fn child(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(index)),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Uniform (Haar-induced) random state on the unit sphere of C³: three
/// standard complex normals, normalized.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> SingleModeState {
    loop {
        let mut draw = || Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let raw = SingleModeState::new(draw(), draw(), draw());
        if let Some(state) = raw.normalized() {
            return state;
        }
    }
}

/// `|⟨target|actual⟩|²` for normalized states.
pub fn state_fidelity(target: &SingleModeState, actual: &SingleModeState) -> f64 {
    target.inner(actual).norm_sqr().min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityEstimate {
    pub mean: f64,
    /// Sample standard deviation over √n.
    pub std_error: f64,
    /// Heralded samples that entered the mean.
    pub n_samples: usize,
    /// Samples dropped because the herald could not fire.
    pub n_excluded: usize,
    pub mean_success_prob: f64,
}

/// Mean and standard error of `values`, summed in order.
pub(crate) fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn sample(map: &HeraldedMap, rng: SeededRng, index: usize) -> Option<(f64, f64)> {
    let psi = haar_sample(&mut rng.child(index as u64).rng());
    let outcome = map.apply(&psi);
    outcome.output.map(|out| {
        (
            state_fidelity(&ideal_ns_target(&psi), &out),
            outcome.probability,
        )
    })
}

fn reduce(samples: Vec<Option<(f64, f64)>>) -> Result<FidelityEstimate> {
    let heralded: Vec<(f64, f64)> = samples.iter().flatten().copied().collect();
    let n_excluded = samples.len() - heralded.len();
    if heralded.is_empty() {
        return Err(Error::NoHeraldedSamples {
            excluded: n_excluded,
        });
    }
    let fidelities: Vec<f64> = heralded.iter().map(|s| s.0).collect();
    let (mean, std_error) = mean_and_std_error(&fidelities);
    let mean_success_prob = heralded.iter().map(|s| s.1).sum::<f64>() / heralded.len() as f64;
    Ok(FidelityEstimate {
        mean,
        std_error,
        n_samples: heralded.len(),
        n_excluded,
        mean_success_prob,
    })
}

/// Fidelity estimate for a precomputed heralded map. `parallel` only changes
/// scheduling, never the result.
pub fn estimate_fidelity(
    map: &HeraldedMap,
    n_samples: usize,
    rng: SeededRng,
    parallel: bool,
) -> Result<FidelityEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "n_samples must be at least 1".into(),
        ));
    }
    let samples = if parallel {
        (0..n_samples)
            .into_par_iter()
            .map(|i| sample(map, rng, i))
            .collect()
    } else {
        (0..n_samples).map(|i| sample(map, rng, i)).collect()
    };
    reduce(samples)
}

pub fn circuit_fidelity_mc(
    circuit: &Circuit,
    deviations: &[f64],
    n_samples: usize,
    rng: SeededRng,
) -> Result<FidelityEstimate> {
    let map = HeraldedMap::new(circuit, deviations)?;
    estimate_fidelity(&map, n_samples, rng, true)
}

/// Average fidelity of the heralded, renormalized gate against the ideal NS
/// map over `n_samples` Haar-random inputs.
pub fn gate_fidelity_mc(
    kind: NsGateKind,
    deviations: &[f64],
    n_samples: usize,
    rng: SeededRng,
) -> Result<FidelityEstimate> {
    circuit_fidelity_mc(kind.circuit(), deviations, n_samples, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = SeededRng::new(7);
        let x: u64 = a.child(3).rng().random();
        let y: u64 = a.child(3).rng().random();
        let z: u64 = a.child(4).rng().random();
        let w: u64 = SeededRng::new(8).child(3).rng().random();
        assert_eq!(x, y);
        assert_ne!(x, z);
        assert_ne!(x, w);
    }

    #[test]
    fn haar_samples_are_normalized() {
        let mut rng = SeededRng::new(1).rng();
        for _ in 0..1000 {
            assert!((haar_sample(&mut rng).norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn state_fidelity_examples() {
        let zero = SingleModeState::fock(0);
        assert_eq!(state_fidelity(&zero, &zero), 1.0);
        assert_eq!(state_fidelity(&zero, &SingleModeState::fock(1)), 0.0);
        let h = 0.5f64.sqrt();
        let plus = SingleModeState::from_real(h, h, 0.0);
        assert!((state_fidelity(&zero, &plus) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ideal_gates_estimate_unit_fidelity() {
        for kind in NsGateKind::ALL {
            let est = gate_fidelity_mc(kind, &[0.0; 8], 2000, SeededRng::new(3)).unwrap();
            assert!((est.mean - 1.0).abs() < 1e-10, "{kind}: {}", est.mean);
            assert!((est.mean_success_prob - 0.25).abs() < 1e-10);
            assert_eq!(est.n_excluded, 0);
        }
    }

    #[test]
    fn inert_input_phase_leaves_fidelity_at_one() {
        let mut dev = [0.0; 8];
        dev[3] = std::f64::consts::PI;
        let est = gate_fidelity_mc(NsGateKind::Klm, &dev, 2000, SeededRng::new(3)).unwrap();
        assert!((est.mean - 1.0).abs() < 1e-10);
    }

    #[test]
    fn parallel_and_serial_agree_bitwise() {
        let mut dev = [0.0; 8];
        dev[1] = 0.2;
        let map = HeraldedMap::for_gate(NsGateKind::Klm, &dev).unwrap();
        let a = estimate_fidelity(&map, 3000, SeededRng::new(11), true).unwrap();
        let b = estimate_fidelity(&map, 3000, SeededRng::new(11), false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(gate_fidelity_mc(NsGateKind::Klm, &[0.0; 8], 0, SeededRng::new(1)).is_err());
    }

    #[test]
    fn unheraldable_process_reports_failure() {
        let zero = HeraldedMap {
            matrix: [[Complex::new(0.0, 0.0); 3]; 3],
        };
        assert_eq!(
            estimate_fidelity(&zero, 10, SeededRng::new(1), false).unwrap_err(),
            Error::NoHeraldedSamples { excluded: 10 }
        );
    }

    #[test]
    fn estimates_at_n_and_4n_are_consistent() {
        let mut dev = [0.0; 8];
        dev[0] = 0.15;
        dev[5] = 0.4;
        for kind in NsGateKind::ALL {
            let small = gate_fidelity_mc(kind, &dev, 2500, SeededRng::new(21)).unwrap();
            let large = gate_fidelity_mc(kind, &dev, 10_000, SeededRng::new(22)).unwrap();
            let combined = (small.std_error.powi(2) + large.std_error.powi(2)).sqrt();
            assert!(
                (small.mean - large.mean).abs() < 3.0 * combined,
                "{kind}: {small:?} {large:?}"
            );
        }
    }
}
