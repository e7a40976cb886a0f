pub mod error;
pub mod fd;
pub mod flow;
pub mod geometry;
pub mod half_forms;
pub mod manifold_file;
pub mod quadrature;
pub mod quantizer;
pub mod test_function;

pub use error::{Error, Result};
