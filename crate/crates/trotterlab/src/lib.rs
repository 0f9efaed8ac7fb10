//! Numerical toolkit for first-order product-formula (Trotter) evolutions of
//! layered spin Hamiltonians.
//!
//! The central object is the effective generator of one Trotter step: for a
//! layered Hamiltonian `H = H_1 + ... + H_G` and step `dt`, the step unitary
//! `T(dt)` equals `exp(-i Heff dt)` for a Hermitian `Heff = i ln(T) / dt`,
//! and long products `T^L` are *exact* evolutions under `Heff`. The library
//! builds layered models, extracts `Heff`, splits simulation error into
//! fidelity / phase / operator-norm / Euclidean parts, evaluates closed-form
//! ceilings on each part, and drives discretized-adiabatic and phase
//! -estimation experiments on top.
//!
//! Modules:
//!
//! * [`linalg`] - dense Hermitian eigendecomposition, evolution, principal
//!   logarithm, norms, with pinned deterministic conventions;
//! * [`hamiltonian`] - Pauli terms, commuting layers, model builders, and
//!   interaction (commutator-norm) constants;
//! * [`trotter`] - step unitaries, effective generators, error decomposition,
//!   spectral comparison, leakage, scaling fits;
//! * [`bounds`] - closed-form error ceilings and budget formulas;
//! * [`das`] - discretized adiabatic state preparation and its Trotterized
//!   counterpart, error suites, and sweeps;
//! * [`qpe`] - phase-estimation register distributions and two-state robust
//!   phase readout;
//! * [`config`] / [`runner`] - the declarative experiment layer used by the
//!   command-line driver.

pub mod bounds;
pub mod config;
pub mod das;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod qpe;
pub mod runner;
pub mod trotter;

pub use error::{Error, Result};
