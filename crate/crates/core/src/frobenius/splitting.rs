//! Artin-Hasse coefficients and the splitting function `theta(t) = AH(gamma t)`.

use crate::error::{Error, Result};
use crate::padic::{zmod, EisensteinContext, RamifiedElem};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Coefficients of `AH(t) = exp(sum_k t^{p^k}/p^k)` through `t^depth`, from
/// `j a_j = sum_{p^k <= j} a_{j - p^k}`.
pub fn artin_hasse_coefficients(p: u64, depth: usize) -> Result<Vec<BigRational>> {
    let mut a: Vec<BigRational> = vec![BigRational::one()];
    let pb = BigInt::from(p);
    for j in 1..=depth {
        let mut acc = BigRational::zero();
        let mut pk = 1usize;
        while pk <= j {
            acc += &a[j - pk];
            pk *= p as usize;
        }
        let aj = acc / BigRational::from_integer(BigInt::from(j));
        if aj.denom().is_multiple_of(&pb) {
            return Err(Error::NonIntegral(format!(
                "Artin-Hasse coefficient {j} has p in its denominator"
            )));
        }
        a.push(aj);
    }
    Ok(a)
}

/// Image of a `p`-integral rational in `Z/p^M`.
pub fn rational_residue(r: &BigRational, pm: u64) -> Result<u64> {
    let m = BigInt::from(pm);
    let num = r.numer().mod_floor(&m);
    let den = r.denom().mod_floor(&m);
    let num: u64 = num.try_into().expect("reduced below modulus");
    let den: u64 = den.try_into().expect("reduced below modulus");
    let inv = zmod::inv(den, pm)
        .ok_or_else(|| Error::NonIntegral("denominator divisible by p".into()))?;
    Ok(zmod::mul(num, inv, pm))
}

/// `b_0..b_J` with `theta(t) = sum b_j t^j`, each known mod `gamma^precision`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingTable {
    pub b: Vec<RamifiedElem>,
    pub depth: usize,
    pub precision: i64,
}

pub fn splitting_table(
    ctx: &EisensteinContext,
    depth: usize,
    precision: i64,
) -> Result<SplittingTable> {
    if precision > ctx.cap() {
        return Err(Error::PrecisionInsufficient(format!(
            "splitting table at gamma^{precision} exceeds cap {}",
            ctx.cap()
        )));
    }
    let ah = artin_hasse_coefficients(ctx.p(), depth)?;
    let pm = ctx.cfg().pm();
    let mut b = Vec::with_capacity(depth + 1);
    for (j, r) in ah.iter().enumerate() {
        let c = rational_residue(r, pm)?;
        let x = ctx.mul_gamma_pow(&ctx.from_int(zmod::to_signed(c, pm)), j as u64);
        b.push(ctx.with_prec(&x, precision));
    }
    Ok(SplittingTable {
        b,
        depth,
        precision,
    })
}

impl SplittingTable {
    /// `b_j`, zero beyond the table depth when `j >= precision`.
    pub fn get(&self, ctx: &EisensteinContext, j: usize) -> Result<RamifiedElem> {
        match self.b.get(j) {
            Some(x) => Ok(x.clone()),
            None if j as i64 >= self.precision => Ok(ctx.with_prec(&ctx.zero(), self.precision)),
            None => Err(Error::PrecisionInsufficient(format!(
                "b_{j} beyond table depth {}",
                self.depth
            ))),
        }
    }

    /// `theta(1) = sum_j b_j`, a primitive `p`-th root of unity.
    pub fn theta_at_one(&self, ctx: &EisensteinContext) -> Result<RamifiedElem> {
        if (self.depth as i64) + 1 < self.precision {
            return Err(Error::PrecisionInsufficient(format!(
                "theta(1) needs depth {} at gamma^{}",
                self.precision - 1,
                self.precision
            )));
        }
        let mut acc = ctx.with_prec(&ctx.zero(), self.precision);
        for x in &self.b {
            acc = ctx.add(&acc, x);
        }
        Ok(acc)
    }
}
