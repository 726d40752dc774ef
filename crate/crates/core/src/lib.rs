//! Characteristic-root classification and dispersive decay prediction for
//! constant-coefficient hyperbolic operators.

pub mod classify;
pub mod error;
pub mod predict;
pub mod propagate;
pub mod roots;
pub mod symbols;

pub use error::{Error, Result};
