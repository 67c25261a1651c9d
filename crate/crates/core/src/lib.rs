//! Simulation of post-selected linear-optical nonlinear-sign gates and
//! analysis of their tolerance to component deviations.
//!
//! Layers, bottom up: [`fock`] (truncated Fock space), [`elements`]
//! (beam splitters, phase shifters, circuits), [`nsgate`] (the two gate
//! designs and heralding), [`fidelity`] (Haar Monte Carlo), [`sensitivity`]
//! (sweeps and compound errors) and [`qfi`] (generator variances). The
//! [`cli`] module backs the `nsgate` binary.

pub mod cli;
pub mod elements;
pub mod error;
pub mod fidelity;
pub mod fock;
pub mod nsgate;
pub mod qfi;
pub mod sensitivity;

pub use error::{Error, Result};
