//! Network enhancement through latent-distance spectral filtering.
//!
//! The pipeline: ingest a network as a dense [`net::AdjacencyMatrix`], build
//! the latent distance matrix `D = AAᵀ(λI + AAᵀ)⁻¹` spectrally
//! ([`enhance::topola_distance`]), enhance the network as `A* = D A`
//! ([`enhance::nr_enhance`] or the randomized [`enhance::fastnr_enhance`]),
//! diffuse with a closed-form restart walk ([`diffusion`]), and score
//! cross-validated link prediction ([`eval`]). [`paths`] holds the exact
//! walk-counting oracles that pin the spectral code to ground truth on small
//! graphs.

pub mod diffusion;
pub mod enhance;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod net;
pub mod paths;
pub mod spectral;
pub mod synth;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
