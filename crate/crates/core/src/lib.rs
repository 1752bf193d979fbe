pub mod algebra;
pub mod autodiff;
pub mod currents;
pub mod error;
pub mod flatgan;
pub mod flatnorm;
pub mod forms;

pub use error::{Error, Result};
