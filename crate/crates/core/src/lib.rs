pub mod error;
pub mod geometry;
pub mod mesh;
pub mod sparse;
pub mod quadrature;
pub mod assembly;
pub mod eigensolve;
pub mod oracle;
pub mod pipeline;
pub mod field;
pub mod analysis;

pub use error::{Error, Result};
