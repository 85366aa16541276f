//! Differentiable heads that map regression outputs to valid fundamental
//! matrices, with explicit backward passes.

pub mod epi;
pub mod loss;
pub mod norm;
pub mod recon;

pub use epi::{epi_backward, epi_forward, EpiParams};
pub use loss::{loss, LossWeights, Normalized};
pub use norm::{normalize, normalize_backward, NormKind};
pub use recon::{
    reconstruct_backward, reconstruct_forward, reconstruct_jacobian, Jacobian9x8, PrincipalPoints,
    ReconParams,
};
