//! Grassmann algebra over `R^d`: k-vectors, k-covectors, frames and norms.

mod frame;
mod haar;
mod kvector;
mod multi_index;
mod norms;
mod spectral;

pub use frame::{frame_to_kvector, simple_to_frame, Frame};
pub use haar::haar_frame_sample;
pub use kvector::{inner, wedge, Covector, Graded, KCovector, KVector, Kind, Vector};
pub use multi_index::{binomial, multi_indices, MultiIndex, MAX_DIM};
pub(crate) use multi_index::{lex_masks, mask_rank, merge_sign};
pub use norms::{
    all_simple, comass, exact_supported, mass, ComassMode, ComassResult, MassMode, MassResult,
};
pub use spectral::{spectral_decompose_2vector, PlaneComponent};
