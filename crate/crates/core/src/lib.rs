//! Hybrid classical–quantum phase-space dynamics: a spin-1/2 atom on the
//! Bloch sphere coupled dispersively to a classical field mode, the fully
//! quantum reference model, and a pair of bilinearly coupled oscillators.

pub mod cartesian_wigner;
pub mod error;
pub mod hybrid_model;
pub mod oscillator_hybrid;
pub mod quadrature;
pub mod quantum_reference;
pub mod su2_wigner;

pub use error::{Error, Result};
pub use quadrature::{IntegrationResult, IntegrationSpec};
