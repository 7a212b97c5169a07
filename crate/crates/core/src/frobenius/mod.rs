//! The p-adic Frobenius on the top cohomology of the twisted de Rham complex.

pub mod matrix;
pub mod operator;
pub mod reduce;
pub mod splitting;

pub use matrix::{
    char_poly, frobenius_linearize, newton_slopes, verify_cochain_estimates,
    verify_matrix_estimates, verify_unit_congruences, Check, FrobMatrix,
};
pub use operator::{DOperatorTruncated, FrobeniusSetup};
pub use reduce::CohomologyCoords;
pub use splitting::{artin_hasse_coefficients, splitting_table, SplittingTable};

use crate::ff::CyclotomicInt;
use crate::padic::{EisensteinContext, RamifiedElem};

/// Image of `sum_t c_t zeta^t` under `zeta -> theta`.
pub fn embed_cyclotomic(
    ctx: &EisensteinContext,
    theta: &RamifiedElem,
    x: &CyclotomicInt,
) -> RamifiedElem {
    let mut acc = ctx.with_prec(&ctx.zero(), theta.prec);
    let mut pw = ctx.with_prec(&ctx.one(), theta.prec);
    for &c in x.counts() {
        acc = ctx.add(&acc, &ctx.scale_int(&pw, c));
        pw = ctx.mul(&pw, theta);
    }
    acc
}
