//! Finite-dimensional renorming workbench.
//!
//! Builds norms on R^n whose linear isometry group is a prescribed finite matrix
//! group, checks the claimed groups numerically, and classifies complex
//! structures inside them.

pub mod cli_io;
pub mod complex;
pub mod config;
pub mod error;
pub mod isometry;
pub mod jarosz;
pub mod linalg;
pub mod norm;
pub mod optimize;
pub mod orbit;
pub mod pimple;
pub mod pipeline;
pub mod rep;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use norm::{NormKind, NormObject};
