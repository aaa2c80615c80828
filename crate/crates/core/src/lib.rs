pub mod error;
pub mod fd;
pub mod finsler;
pub mod flow;
pub mod geodesic;
pub mod jet;
pub mod linalg;
pub mod navigation;
pub mod riemann;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
