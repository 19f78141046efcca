//! Simulation and analysis of noise in Mach-Zehnder interferometer meshes.
//!
//! The crate covers the triangular (Reck) and rectangular (Clements)
//! architectures end to end:
//!
//! - [`unitary`]: MZ transfer matrices, mesh decomposition and
//!   reconstruction, unitary ensembles and component noise.
//! - [`graph`]: the mesh as a directed acyclic graph, with path statistics,
//!   flow, sensitivity index and centrality measures.
//! - [`paths`]: exact closed-form path counts based on Catalan's trapezoids.
//! - [`photonics`]: Fock states, permanents, multi-photon transition
//!   probabilities and parameter dependency sets.
//! - [`bias`]: Monte Carlo estimators of single-photon (zeta) and
//!   multi-photon (Delta) bias.
//! - [`calibration`]: a simulated thermo-optic device and the sequential
//!   diagonal calibration procedure.
//! - [`cli`]: the command runners behind the `meshbias` binary.
//!
//! Mode, layer and row indices are zero-based everywhere except in
//! [`paths`], whose closed forms are stated for one-based mode labels.

// `!(x < y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod bias;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod export;
pub mod fit;
pub mod graph;
pub mod mesh;
pub mod par;
pub mod paths;
pub mod photonics;
pub mod rng;
pub mod stats;
pub mod unitary;

pub use error::{Error, Result};
pub use mesh::{Architecture, CellPosition};
pub use unitary::{CMatrix, MeshCell, MeshParameters, MzParams, NoiseModel};
