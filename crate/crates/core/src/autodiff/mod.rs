//! Reverse-mode autodiff with re-differentiable gradients, small MLPs and
//! the Adam optimizer.

mod adam;
pub mod checkpoint;
mod mlp;
mod tape;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use mlp::{mlp_forward, Activation, InitScheme, MlpParams, MlpSpec, MlpVars, LEAKY_SLOPE};
pub use tape::{Tape, Tensor, Var};
