//! Discrete and simplicial currents.

mod discrete;
mod latent;
mod simplicial;

pub use discrete::{Atom, DiscreteCurrent};
pub use latent::{sample_latent_current, CoordinateLaw, LatentSpec};
pub use simplicial::{SimplicialChain, SimplicialComplex};
