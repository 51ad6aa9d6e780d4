pub mod admm;
pub mod cli;
pub mod data;
pub mod error;
pub mod forward;
pub mod linalg;
pub mod net;
pub mod tensor;
pub mod transform;
pub mod tsvd;

pub use error::{Error, Result};
pub use tensor::{ComplexMatrix, ComplexTensor3, C64};
