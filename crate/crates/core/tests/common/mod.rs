//! Independent reference implementations used by the integration tests.
//!
//! The oracle never touches the library's Fock basis, unitaries or
//! estimator: it rebuilds every element as a matrix exponential of ladder
//! operators on the full product space (4 levels per mode) and integrates
//! the fidelity exactly over the Haar measure.
#![allow(dead_code)]

use nalgebra::DMatrix;
use nsgate::elements::{Circuit, OpticalElement};
use num_complex::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

const LEVELS: usize = 4;
const DIM: usize = LEVELS * LEVELS * LEVELS;

fn index(n: [usize; 3]) -> usize {
    (n[0] * LEVELS + n[1]) * LEVELS + n[2]
}

fn annihilator(mode: usize) -> DMatrix<C> {
    let mut a = DMatrix::zeros(DIM, DIM);
    for n0 in 0..LEVELS {
        for n1 in 0..LEVELS {
            for n2 in 0..LEVELS {
                let n = [n0, n1, n2];
                if n[mode] == 0 {
                    continue;
                }
                let mut m = n;
                m[mode] -= 1;
                a[(index(m), index(n))] = C::new((n[mode] as f64).sqrt(), 0.0);
            }
        }
    }
    a
}

/// Element unitary on the product space. Exact on states with at most three
/// photons, since both generators conserve photon number.
pub fn element_unitary(element: &OpticalElement) -> DMatrix<C> {
    match *element {
        OpticalElement::BeamSplitter {
            modes: (j, k),
            angle,
        } => {
            let (aj, ak) = (annihilator(j), annihilator(k));
            let a = aj.adjoint() * &ak - ak.adjoint() * &aj;
            (a * C::new(angle, 0.0)).exp()
        }
        OpticalElement::PhaseShifter { mode, phase } => {
            let a = annihilator(mode);
            (a.adjoint() * a * C::new(0.0, phase)).exp()
        }
    }
}

pub fn circuit_unitary(circuit: &Circuit, deviations: &[f64]) -> DMatrix<C> {
    let mut u = DMatrix::identity(DIM, DIM);
    for slot in circuit.elements() {
        let e = slot
            .element
            .with_value(slot.element.value() + deviations[slot.parameter]);
        u = element_unitary(&e) * u;
    }
    u
}

/// `K[m][n] = ⟨m, herald| U |n, ancilla⟩`.
pub fn heralded_matrix(circuit: &Circuit, deviations: &[f64]) -> [[C; 3]; 3] {
    let u = circuit_unitary(circuit, deviations);
    let anc = circuit.ancilla().counts();
    let her = circuit.herald().counts();
    let mut k = [[C::new(0.0, 0.0); 3]; 3];
    for (n, row) in (0..3).map(|n| (n, index([n, anc[0] as usize, anc[1] as usize]))) {
        for (m, col) in k.iter_mut().enumerate() {
            col[n] = u[(index([m, her[0] as usize, her[1] as usize]), row)];
        }
    }
    k
}

const TARGET: [f64; 3] = [1.0, 1.0, -1.0];

fn fidelity(k: &[[C; 3]; 3], psi: [C; 3]) -> Option<f64> {
    let out: Vec<C> = (0..3)
        .map(|m| (0..3).map(|n| k[m][n] * psi[n]).sum())
        .collect();
    let p: f64 = out.iter().map(|c| c.norm_sqr()).sum();
    if p < 1e-14 {
        return None;
    }
    let overlap: C = (0..3).map(|n| (psi[n] * TARGET[n]).conj() * out[n]).sum();
    Some(overlap.norm_sqr() / p)
}

/// Exact Haar average of the heralded fidelity for a photon-number-conserving
/// map (diagonal `K`). For Haar-random ψ the populations `|ψ_n|²` are
/// uniform on the 2-simplex and the fidelity depends on nothing else, so the
/// average is a smooth 2-d integral; it is evaluated by the midpoint rule
/// after the Duffy map `(u, v) ↦ (u, (1-u)v, (1-u)(1-v))`.
pub fn quadrature_fidelity(k: &[[C; 3]; 3], points: usize) -> f64 {
    for (m, row) in k.iter().enumerate() {
        for (n, v) in row.iter().enumerate() {
            assert!(m == n || v.norm() < 1e-12, "oracle requires a diagonal map");
        }
    }
    let d = [k[0][0], k[1][1], k[2][2]];
    let h = 1.0 / points as f64;
    let mut total = 0.0;
    for i in 0..points {
        let u = (i as f64 + 0.5) * h;
        let mut row = 0.0;
        for j in 0..points {
            let v = (j as f64 + 0.5) * h;
            let x = [u, (1.0 - u) * v, (1.0 - u) * (1.0 - v)];
            let num: C = (0..3).map(|n| d[n] * (x[n] * TARGET[n])).sum();
            let den: f64 = (0..3).map(|n| x[n] * d[n].norm_sqr()).sum();
            row += num.norm_sqr() / den;
        }
        total += row * (1.0 - u);
    }
    2.0 * total * h * h
}

/// Plain Monte Carlo with its own generator, sampler and reduction.
/// Returns (mean, standard error).
pub fn sampled_fidelity(k: &[[C; 3]; 3], n: usize, seed: u64) -> (f64, f64) {
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut sum, mut sum_sq, mut count) = (0.0, 0.0, 0usize);
    for _ in 0..n {
        let mut psi = [C::new(0.0, 0.0); 3];
        for a in &mut psi {
            *a = C::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|a| *a /= norm);
        if let Some(f) = fidelity(k, psi) {
            sum += f;
            sum_sq += f * f;
            count += 1;
        }
    }
    let mean = sum / count as f64;
    let var = (sum_sq / count as f64 - mean * mean) * count as f64 / (count as f64 - 1.0);
    (mean, (var / count as f64).sqrt())
}

/// Deviation settings per gate used for estimator validation, indexed by
/// (angle1, angle2, angle3, phase1..phase5).
pub fn validation_settings() -> Vec<(&'static str, [f64; 8])> {
    vec![
        ("angle2 +0.3", [0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ("angle1 -0.2", [-0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        (
            "phase3 pi",
            [0.0, 0.0, 0.0, 0.0, 0.0, std::f64::consts::PI, 0.0, 0.0],
        ),
        ("angles 0.8/-0.5", [0.8, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ("mixed", [0.1, -0.15, 0.2, 0.05, -0.3, 0.3, -0.4, 0.5]),
    ]
}
