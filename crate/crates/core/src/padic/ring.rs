//! Coefficient rings with a gamma-adic valuation.

use super::ramified::{EisensteinContext, RamifiedElem};
use crate::error::Result;
use std::fmt::Debug;

/// Operations the series and cohomology code needs from its scalars.
pub trait GammaRing: Sync + Send {
    type Elem: Clone + Debug + PartialEq + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, v: i64) -> Self::Elem;
    fn add(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn sub(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn neg(&self, x: &Self::Elem) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn scale_int(&self, x: &Self::Elem, k: i64) -> Self::Elem;
    fn mul_gamma_pow(&self, x: &Self::Elem, k: u64) -> Self::Elem;
    fn div_gamma_pow(&self, x: &Self::Elem, k: u64) -> Result<Self::Elem>;
    /// Lower bound on the gamma-adic order.
    fn val(&self, x: &Self::Elem) -> i64;
    /// Absolute gamma-adic precision.
    fn prec(&self, x: &Self::Elem) -> i64;
    fn with_prec(&self, x: &Self::Elem, prec: i64) -> Self::Elem;
    fn is_zero(&self, x: &Self::Elem) -> bool;
    fn sigma(&self, x: &Self::Elem, k: i64) -> Self::Elem;
    fn p(&self) -> u64;
}

impl GammaRing for EisensteinContext {
    type Elem = RamifiedElem;

    fn zero(&self) -> RamifiedElem {
        EisensteinContext::zero(self)
    }
    fn one(&self) -> RamifiedElem {
        EisensteinContext::one(self)
    }
    fn from_int(&self, v: i64) -> RamifiedElem {
        EisensteinContext::from_int(self, v)
    }
    fn add(&self, x: &RamifiedElem, y: &RamifiedElem) -> RamifiedElem {
        EisensteinContext::add(self, x, y)
    }
    fn sub(&self, x: &RamifiedElem, y: &RamifiedElem) -> RamifiedElem {
        EisensteinContext::sub(self, x, y)
    }
    fn neg(&self, x: &RamifiedElem) -> RamifiedElem {
        EisensteinContext::neg(self, x)
    }
    fn mul(&self, x: &RamifiedElem, y: &RamifiedElem) -> RamifiedElem {
        EisensteinContext::mul(self, x, y)
    }
    fn scale_int(&self, x: &RamifiedElem, k: i64) -> RamifiedElem {
        EisensteinContext::scale_int(self, x, k)
    }
    fn mul_gamma_pow(&self, x: &RamifiedElem, k: u64) -> RamifiedElem {
        EisensteinContext::mul_gamma_pow(self, x, k)
    }
    fn div_gamma_pow(&self, x: &RamifiedElem, k: u64) -> Result<RamifiedElem> {
        EisensteinContext::div_gamma_pow(self, x, k)
    }
    fn val(&self, x: &RamifiedElem) -> i64 {
        EisensteinContext::val(self, x)
    }
    fn prec(&self, x: &RamifiedElem) -> i64 {
        x.prec
    }
    fn with_prec(&self, x: &RamifiedElem, prec: i64) -> RamifiedElem {
        EisensteinContext::with_prec(self, x, prec)
    }
    fn is_zero(&self, x: &RamifiedElem) -> bool {
        EisensteinContext::is_zero(self, x)
    }
    fn sigma(&self, x: &RamifiedElem, k: i64) -> RamifiedElem {
        EisensteinContext::sigma(self, x, k)
    }
    fn p(&self) -> u64 {
        EisensteinContext::p(self)
    }
}
