//! Quantum-chaos diagnostics for interacting spinless fermions on the
//! generalized Aubry-André chain.
//!
//! The crate builds the fixed-filling many-body Hamiltonian ([`model`]),
//! diagonalizes it ([`spectra`]) and evaluates four diagnostics over
//! ensembles of random phase offsets: the adjacent gap ratio ([`rstat`]),
//! the spectral form factor and Thouless time ([`sff`]), the fidelity
//! susceptibility ([`agp`]), and cost-function finite-size scaling
//! collapse ([`scaling`]).

pub mod agp;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod rstat;
pub mod scaling;
pub mod seed;
pub mod sff;
pub mod spectra;
pub mod surrogate;

pub use error::{Error, Result};
pub use model::{Boundary, DenseOperator, FockBasis, ModelParams, Perturbation};
pub use pipeline::Ensemble;
pub use rstat::GapRatioSummary;
pub use scaling::{AnsatzSpec, CollapsePoint, CollapseResult, Correlation, Drift};
pub use sff::SFFCurve;
pub use spectra::{EnergyWindow, SpectrumResult};
