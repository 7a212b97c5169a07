//! p-adic cohomology of hyperkloosterman sums over a totally ramified base.

pub mod charp;
pub mod dual;
pub mod error;
pub mod ff;
pub mod frobenius;
pub mod padic;
pub mod par;
pub mod pipeline;
pub mod suite;
pub mod weight;

pub use error::{Error, Result};
