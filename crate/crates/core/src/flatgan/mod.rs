//! Flat-metric generative training for 0- and 1-currents in the plane.
//!
//! The discriminator `ω` is trained to maximize
//! `E(θ, ω) = -(1/N) Σ <ω(x_i), T_i> + E_z <ω(g(z)), ∂g/∂z_1 ∧ …>` minus
//! soft comass and exterior-derivative penalties; the generator `g_θ`
//! minimizes `E`.

mod data;
mod loss;
mod metrics;
mod model;
mod train;

pub use data::{build_circle_dataset, DataCurrentSpec};
pub use loss::{data_term, generator_term, penalty, PenaltyTerms};
pub use metrics::{latent_walk, mean_min_distance, tangent_alignment, tube_fraction, walk_grid};
pub use model::{
    circle_embedding, omega_apply, DiscriminatorModel, DiscriminatorVars, GeneratorModel,
    GeneratorVars, NeuralForm,
};
pub use train::{train, CriticStep, EpochLog, Evaluation, FlatGan, TrainConfig, TrainReport};

pub use crate::algebra::haar_frame_sample;
