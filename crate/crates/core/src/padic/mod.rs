pub mod ramified;
pub mod ring;
pub mod unram;
pub mod zmod;

pub use ramified::{construct_gamma, EisensteinContext, GammaDigits, GammaTower, RamifiedElem};
pub use unram::{build_field, PrimeConfig, UnramifiedElem};
