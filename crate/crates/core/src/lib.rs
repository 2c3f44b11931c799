pub mod channels;
pub mod classical_search;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod genuine_correlations;
pub mod linalg;
pub mod random;
pub mod states;

pub use error::{Error, Result};
