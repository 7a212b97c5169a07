//! Finite fields and the brute-force exponential sum oracle.

pub mod cyclotomic;
pub mod field;
pub mod oracle;

pub use cyclotomic::CyclotomicInt;
pub use field::{FFField, FfElem};
