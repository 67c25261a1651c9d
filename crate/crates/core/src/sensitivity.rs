//! Single-parameter sweeps and compound-error scans.
//!
//! Sweeps move one parameter over an evenly spaced grid and reuse the same
//! seed at every grid point, so neighbouring Monte Carlo estimates share
//! their input states and the curves come out smooth. Compound scans draw
//! error vectors uniformly from the sphere of a given radius in parameter
//! space and report the spread of the resulting gate infidelities.
//!
//! The minimum-infidelity track of a compound scan is a sampled upper bound on
//! the true minimum; it is noisy by construction.

use std::ops::Deref;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fidelity::{estimate_fidelity, mean_and_std_error, state_fidelity, SeededRng};
use crate::fock::SingleModeState;
use crate::nsgate::{ideal_ns_target, HeraldedMap, NsGateKind};

/// Additive deviations, one per circuit parameter, in parameter-id order.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorVector(Vec<f64>);

impl ErrorVector {
    pub fn new(deltas: Vec<f64>) -> Self {
        Self(deltas)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    /// All zeros except `delta` at `index`.
    pub fn single(len: usize, index: usize, delta: f64) -> Self {
        let mut v = Self::zeros(len);
        v.0[index] = delta;
        v
    }

    pub fn magnitude(&self) -> f64 {
        self.0.iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ErrorVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Uniform draw from the sphere of `radius` in `dim` dimensions: independent
/// standard normals, normalized, then scaled.
pub fn sample_error_sphere<R: Rng + ?Sized>(
    dim: usize,
    radius: f64,
    rng: &mut R,
) -> Result<ErrorVector> {
    if radius.is_nan() || radius < 0.0 || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "radius must be >= 0, got {radius}"
        )));
    }
    if radius == 0.0 {
        return Ok(ErrorVector::zeros(dim));
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Ok(ErrorVector(
                v.into_iter().map(|x| x * radius / norm).collect(),
            ));
        }
    }
}

/// `points` evenly spaced values from `min` to `max` inclusive. When zero lies
/// strictly inside the range but misses the grid it is inserted, so the grid
/// then has `points + 1` entries.
pub fn sweep_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(Error::InvalidArgument(format!("bad range [{min}, {max}]")));
    }
    if points == 0 || (points == 1 && min != max) {
        return Err(Error::InvalidArgument(format!(
            "{points} points cannot span [{min}, {max}]"
        )));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (points - 1) as f64;
    let snap = 1e-12 * (max - min);
    let mut grid: Vec<f64> = (0..points)
        .map(|i| {
            if i == points - 1 {
                max
            } else {
                min + step * i as f64
            }
        })
        .map(|x| if x.abs() < snap { 0.0 } else { x })
        .collect();
    if min < 0.0 && max > 0.0 && !grid.contains(&0.0) {
        let at = grid.partition_point(|&x| x < 0.0);
        grid.insert(at, 0.0);
    }
    Ok(grid)
}

/// Parses `start:stop:count` into an inclusive grid (no zero insertion).
pub fn parse_range_spec(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidArgument(format!("expected start:stop:count, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || start > stop || (count == 1 && start != stop) {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                stop
            } else {
                start + step * i as f64
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityPoint {
    pub delta: f64,
    pub probability: f64,
    /// Fidelity to the ideal output for the probe input.
    pub fidelity: f64,
}

/// Heralding probability along one parameter for a fixed probe input (the
/// equal superposition by default). Deterministic.
pub fn sweep_success_probability_for(
    kind: NsGateKind,
    parameter_id: &str,
    grid: &[f64],
    probe: &SingleModeState,
) -> Result<Vec<ProbabilityPoint>> {
    let circuit = kind.circuit();
    let index = circuit.parameter_index(parameter_id)?;
    let target = ideal_ns_target(probe);
    grid.iter()
        .map(|&delta| {
            let deviations = ErrorVector::single(circuit.parameter_count(), index, delta);
            let outcome = HeraldedMap::new(circuit, &deviations)?.apply(probe);
            Ok(ProbabilityPoint {
                delta,
                probability: outcome.probability,
                fidelity: outcome
                    .output
                    .map_or(0.0, |out| state_fidelity(&target, &out)),
            })
        })
        .collect()
}

pub fn sweep_success_probability(
    kind: NsGateKind,
    parameter_id: &str,
    min: f64,
    max: f64,
    points: usize,
) -> Result<Vec<ProbabilityPoint>> {
    let grid = sweep_grid(min, max, points)?;
    sweep_success_probability_for(
        kind,
        parameter_id,
        &grid,
        &SingleModeState::equal_superposition(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub parameter_id: String,
    pub delta: f64,
    pub mean_fidelity: f64,
    pub fidelity_std_error: f64,
    pub mean_success_prob: f64,
    pub n_samples: usize,
}

pub fn sweep_fidelity_on_grid(
    kind: NsGateKind,
    parameter_id: &str,
    grid: &[f64],
    n_samples: usize,
    seed: SeededRng,
) -> Result<Vec<SweepRow>> {
    let circuit = kind.circuit();
    let index = circuit.parameter_index(parameter_id)?;
    grid.iter()
        .map(|&delta| {
            let deviations = ErrorVector::single(circuit.parameter_count(), index, delta);
            let map = HeraldedMap::new(circuit, &deviations)?;
            let est = estimate_fidelity(&map, n_samples, seed, true)?;
            Ok(SweepRow {
                parameter_id: parameter_id.to_string(),
                delta,
                mean_fidelity: est.mean,
                fidelity_std_error: est.std_error,
                mean_success_prob: est.mean_success_prob,
                n_samples: est.n_samples,
            })
        })
        .collect()
}

pub fn sweep_fidelity(
    kind: NsGateKind,
    parameter_id: &str,
    min: f64,
    max: f64,
    points: usize,
    n_samples: usize,
    seed: SeededRng,
) -> Result<Vec<SweepRow>> {
    let grid = sweep_grid(min, max, points)?;
    sweep_fidelity_on_grid(kind, parameter_id, &grid, n_samples, seed)
}

/// Half-widths of the interval around zero where the mean fidelity stays at
/// or above a threshold, on each side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceWindow {
    pub negative: f64,
    pub positive: f64,
    /// True when a side never dropped below the threshold inside the search limit.
    pub saturated: bool,
}

impl ToleranceWindow {
    pub fn width(&self) -> f64 {
        self.negative + self.positive
    }
}

/// Walks outward in steps of `search_limit / 200` until the estimate falls
/// below `min_fidelity`, then bisects. All estimates share `seed`.
pub fn tolerance_window(
    kind: NsGateKind,
    parameter_id: &str,
    min_fidelity: f64,
    n_samples: usize,
    seed: SeededRng,
    search_limit: f64,
) -> Result<ToleranceWindow> {
    let circuit = kind.circuit();
    let index = circuit.parameter_index(parameter_id)?;
    let fidelity_at = |delta: f64| -> Result<f64> {
        let deviations = ErrorVector::single(circuit.parameter_count(), index, delta);
        let map = HeraldedMap::new(circuit, &deviations)?;
        Ok(estimate_fidelity(&map, n_samples, seed, true)?.mean)
    };
    let step = search_limit / 200.0;
    let mut saturated = false;
    let mut half = |sign: f64| -> Result<f64> {
        let mut inside = 0.0;
        let mut outside = None;
        let mut d = step;
        while d <= search_limit + 0.5 * step {
            if fidelity_at(sign * d)? < min_fidelity {
                outside = Some(d);
                break;
            }
            inside = d;
            d += step;
        }
        let Some(mut outside) = outside else {
            saturated = true;
            return Ok(inside);
        };
        for _ in 0..40 {
            let mid = 0.5 * (inside + outside);
            if fidelity_at(sign * mid)? < min_fidelity {
                outside = mid;
            } else {
                inside = mid;
            }
        }
        Ok(0.5 * (inside + outside))
    };
    let negative = half(-1.0)?;
    let positive = half(1.0)?;
    Ok(ToleranceWindow {
        negative,
        positive,
        saturated,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompoundRow {
    pub radius: f64,
    pub min_infidelity: f64,
    pub max_infidelity: f64,
    pub mean_infidelity: f64,
    /// Standard error of `mean_infidelity` across error vectors.
    pub mean_std_error: f64,
    pub n_vectors: usize,
    pub n_states: usize,
}

/// For each radius: `n_vectors` error vectors uniform on the sphere, each
/// scored by the mean fidelity over `n_states` Haar inputs. Work is spread
/// over (radius, vector) pairs with per-pair random streams.
pub fn compound_scan(
    kind: NsGateKind,
    radii: &[f64],
    n_vectors: usize,
    n_states: usize,
    seed: SeededRng,
) -> Result<Vec<CompoundRow>> {
    if n_vectors == 0 || n_states == 0 {
        return Err(Error::InvalidArgument(
            "n_vectors and n_states must be at least 1".into(),
        ));
    }
    if let Some(r) = radii.iter().find(|r| r.is_nan() || **r < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be >= 0, got {r}"
        )));
    }
    let circuit = kind.circuit();
    let dim = circuit.parameter_count();
    let infidelities: Vec<f64> = (0..radii.len() * n_vectors)
        .into_par_iter()
        .map(|pair| -> Result<f64> {
            let (ri, vi) = (pair / n_vectors, pair % n_vectors);
            let stream = seed.child(ri as u64).child(vi as u64);
            let deviations = sample_error_sphere(dim, radii[ri], &mut stream.child(0).rng())?;
            let map = HeraldedMap::new(circuit, &deviations)?;
            let est = estimate_fidelity(&map, n_states, stream.child(1), false)?;
            Ok((1.0 - est.mean).max(0.0))
        })
        .collect::<Result<_>>()?;

    Ok(radii
        .iter()
        .zip(infidelities.chunks(n_vectors))
        .map(|(&radius, chunk)| {
            let (mean, mean_std_error) = mean_and_std_error(chunk);
            CompoundRow {
                radius,
                min_infidelity: chunk.iter().copied().fold(f64::INFINITY, f64::min),
                max_infidelity: chunk.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_infidelity: mean,
                mean_std_error,
                n_vectors,
                n_states,
            }
        })
        .collect())
}
