//! Quantum gambling, generalized overlaps and the operational bound that
//! separates quantum theory from maximally psi-epistemic models.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`] – states, effects, spectra and the Bloch parametrization.
//! * [`sdp`] – a dense primal-dual interior-point solver for small
//!   semidefinite programs with first-class dual certificates.
//! * [`games`] – the gambling game, weighted distinguishability, overlaps
//!   and the bound report.
//! * [`ontic`] – finite ontological models and their exact payoffs.
//! * [`seesaw`] – alternating SDP lower bounds at fixed dimension.
//! * [`moments`] – dimension-free upper bounds from tracial moment matrices.
//! * [`report`] – command implementations shared by the CLI and bindings.

pub mod config;
pub mod error;
pub mod games;
pub mod moments;
pub mod ontic;
pub mod quantum;
pub mod report;
pub mod sdp;
pub mod seesaw;

pub use error::{Error, Result};
pub use games::{BoundReport, GambleResult, GameParams};
pub use quantum::{CMatrix, CVector, DensityMatrix, PureState, Povm, WeightedState};

/// Crate version string embedded in run records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
