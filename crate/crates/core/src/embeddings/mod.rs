//! Unitary and open-system embeddings of non-unitary dynamics.

pub mod lchs;
pub mod ndme;

pub use lchs::{lchs_evolve, lchs_evolve_with, lchs_truncation_probe, CauchyKernel, LchsKernel, LchsQuadrature};
pub use ndme::{interaction_picture, lindblad_evolve, ndme_embed, DensityState, InteractionRun, NdmeEmbedding};
