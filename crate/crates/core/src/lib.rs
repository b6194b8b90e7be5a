pub mod data_io;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod matrix;
pub mod neighborhoods;
pub mod spectral;
pub mod takens;

pub use error::{Error, Result};
pub use matrix::DataMatrix;
pub mod metrics;
pub mod reducers;
