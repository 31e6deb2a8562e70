//! Toric geometry of ReLU networks.

pub mod divisor;
pub mod error;
pub mod exact_math;
pub mod expr;
pub mod fan;
pub mod network;
pub mod realizability;

pub use error::{Error, Result};
