//! Variational quantum state discrimination.
//!
//! This crate trains a parameterized POVM circuit to perform minimum-error
//! discrimination of few-qubit quantum states on an exact dense simulator,
//! checks the trained measurement against analytic and brute-force baselines
//! (Helstrom bound, pretty-good measurement, optimality conditions, Bloch
//! grid search), and reuses the trained discriminator as a multi-class
//! classifier over quantum feature maps.
//!
//! Module map:
//!
//! - [`qmath`] — dense complex linear algebra: products, Kronecker products,
//!   partial trace, Hermitian eigendecomposition, PSD matrix functions.
//! - [`circuit`] — the parameterized POVM circuit: statevector simulation,
//!   Kraus operators, POVM extraction.
//! - [`discrimination`] — error probability, Helstrom bound, pretty-good
//!   measurement, optimality certificate, brute-force oracle.
//! - [`training`] — cost function, finite-difference gradients, ADAM loop.
//! - [`encoding`] — input-state preparation: mixed-state circuits, quantum
//!   feature maps, Iris ingestion and rescaling.
//! - [`classify`] — stratified cross-validation, argmax decision rule,
//!   accuracy, one-vs-rest ROC/AUC.

pub mod circuit;
pub mod classify;
pub mod discrimination;
pub mod encoding;
mod error;
pub mod qmath;
pub mod random;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
