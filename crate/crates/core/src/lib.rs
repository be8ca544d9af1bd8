pub mod error;
pub mod geometry;
pub mod heat;
pub mod bochner;
pub mod capacity;
pub mod cli;
pub mod linalg;
pub mod quadrature;
pub mod ricci;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};
