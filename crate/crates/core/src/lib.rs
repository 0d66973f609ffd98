//! Classical simulation of the quantum-quantum Metropolis algorithm.
//!
//! The crate builds, for a small `n`-qubit Hamiltonian `H`:
//!
//! - the paired eigenbasis `|φ_i⟩|φ̃_i⟩`, where `|φ̃_i⟩` is the eigenvector of the
//!   time-reversed Hamiltonian `H* ` at the same energy ([`spectral`]);
//! - the Metropolis Markov chain induced by a symmetric kick and the Metropolis
//!   filter, with its stationary distribution and spectral gap ([`metropolis`]);
//! - the unitaries `U_X`, `U_Y`, the reflections `2Λ₁ − I`, `2Λ₂ − I` and the Szegedy
//!   walk `W` whose fixed point encodes the Gibbs state ([`walk`]);
//! - the annealing schedule that connects the infinite-temperature state to the
//!   coherent thermal state through projective measurements ([`qsa`]);
//! - finite-resolution phase-estimation error and degeneracy leakage ([`pea`]).
//!
//! Everything is dense linear algebra over `Complex64` and is `no_std` (with `alloc`).
//! File formats, configuration and the command-line runner live in the `q2ma` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
mod math;

pub mod hamiltonian;
pub mod metropolis;
pub mod numerics;
pub mod pea;
pub mod qsa;
pub mod spectral;
pub mod walk;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, StateVector, Tolerances, C64};
