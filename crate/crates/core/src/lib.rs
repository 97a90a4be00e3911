//! Resonance fluorescence of a driven four-level atom with two π transitions
//! sharing anti-parallel dipoles and two σ transitions.
//!
//! The pipeline is: parameters ([`model`]) → Bloch generator and steady state
//! ([`bloch`]) → regression kernels ([`regression`]) → spectra
//! ([`spectra`]) → line-shape analysis ([`analysis`]).

pub mod analysis;
pub mod bloch;
pub mod dressed;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod model;
pub mod presets;
pub mod regression;
pub mod spectra;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::SystemParams;
pub use spectra::{Channel, SpectrumEngine, SpectrumTrace};
