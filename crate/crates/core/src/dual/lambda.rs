//! Truncated power series in a deformation variable over `O_0`.

use crate::error::{Error, Result};
use crate::padic::ring::GammaRing;
use crate::padic::{EisensteinContext, RamifiedElem};

/// `sum_{r < cap} c_r lambda^r`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSeries {
    pub coeffs: Vec<RamifiedElem>,
}

impl LambdaSeries {
    pub fn cap(&self) -> usize {
        self.coeffs.len()
    }
}

/// Ring context for `LambdaSeries` with a fixed cap.
#[derive(Clone, Copy, Debug)]
pub struct LambdaRing<'a> {
    pub ctx: &'a EisensteinContext,
    pub cap: usize,
}

impl<'a> LambdaRing<'a> {
    pub fn new(ctx: &'a EisensteinContext, cap: usize) -> Self {
        LambdaRing {
            ctx,
            cap: cap.max(1),
        }
    }

    pub fn constant(&self, c: &RamifiedElem) -> LambdaSeries {
        self.monomial(0, c)
    }

    /// `c lambda^r`, zero when `r >= cap`.
    pub fn monomial(&self, r: usize, c: &RamifiedElem) -> LambdaSeries {
        let mut s = self.zero();
        if r < self.cap {
            s.coeffs[r] = c.clone();
        }
        s
    }

    /// `lambda` itself.
    pub fn var(&self) -> LambdaSeries {
        self.monomial(1, &self.ctx.one())
    }

    pub fn from_coeffs(&self, c: &[RamifiedElem]) -> LambdaSeries {
        let mut s = self.zero();
        for (r, x) in c.iter().enumerate().take(self.cap) {
            s.coeffs[r] = x.clone();
        }
        s
    }

    /// Multiply by `lambda^k`.
    pub fn shift(&self, x: &LambdaSeries, k: usize) -> LambdaSeries {
        let mut s = self.zero();
        for r in k..self.cap {
            s.coeffs[r] = x.coeffs[r - k].clone();
        }
        s
    }

    /// `lambda d/dlambda`.
    pub fn lambda_deriv(&self, x: &LambdaSeries) -> LambdaSeries {
        let coeffs = x
            .coeffs
            .iter()
            .enumerate()
            .map(|(r, c)| self.ctx.scale_int(c, r as i64))
            .collect();
        LambdaSeries { coeffs }
    }

    pub fn mul_scalar(&self, x: &LambdaSeries, c: &RamifiedElem) -> LambdaSeries {
        LambdaSeries {
            coeffs: x.coeffs.iter().map(|v| self.ctx.mul(v, c)).collect(),
        }
    }

    /// Inverse of a series with unit constant term.
    pub fn inv(&self, x: &LambdaSeries) -> Result<LambdaSeries> {
        let ctx = self.ctx;
        let c0 = ctx.inv_unit(&x.coeffs[0])?;
        let mut out = self.zero();
        out.coeffs[0] = c0.clone();
        for r in 1..self.cap {
            let mut acc = ctx.zero();
            for k in 1..=r {
                acc = ctx.add(&acc, &ctx.mul(&x.coeffs[k], &out.coeffs[r - k]));
            }
            out.coeffs[r] = ctx.neg(&ctx.mul(&acc, &c0));
        }
        Ok(out)
    }

    /// `x(y)` for `y` without constant term.
    pub fn compose(&self, x: &LambdaSeries, y: &LambdaSeries) -> Result<LambdaSeries> {
        if !self.ctx.is_zero(&y.coeffs[0]) {
            return Err(Error::InvalidParameter("composition needs y(0) = 0".into()));
        }
        let mut acc = self.zero();
        for c in x.coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, y), &self.constant(c));
        }
        Ok(acc)
    }

    /// `x^k` for `k >= 0`.
    pub fn pow(&self, x: &LambdaSeries, k: u64) -> LambdaSeries {
        let mut acc = self.one();
        for _ in 0..k {
            acc = self.mul(&acc, x);
        }
        acc
    }

    pub fn eval(&self, x: &LambdaSeries, at: &RamifiedElem) -> RamifiedElem {
        let ctx = self.ctx;
        let mut acc = ctx.zero();
        for c in x.coeffs.iter().rev() {
            acc = ctx.add(&ctx.mul(&acc, at), c);
        }
        acc
    }

    /// Order of the `lambda^r` coefficient for each `r`.
    pub fn orders(&self, x: &LambdaSeries) -> Vec<i64> {
        x.coeffs.iter().map(|c| self.ctx.val(c)).collect()
    }
}

impl GammaRing for LambdaRing<'_> {
    type Elem = LambdaSeries;

    fn zero(&self) -> LambdaSeries {
        LambdaSeries {
            coeffs: vec![self.ctx.zero(); self.cap],
        }
    }
    fn one(&self) -> LambdaSeries {
        self.constant(&self.ctx.one())
    }
    fn from_int(&self, v: i64) -> LambdaSeries {
        self.constant(&self.ctx.from_int(v))
    }
    fn add(&self, x: &LambdaSeries, y: &LambdaSeries) -> LambdaSeries {
        LambdaSeries {
            coeffs: x
                .coeffs
                .iter()
                .zip(&y.coeffs)
                .map(|(a, b)| self.ctx.add(a, b))
                .collect(),
        }
    }
    fn sub(&self, x: &LambdaSeries, y: &LambdaSeries) -> LambdaSeries {
        LambdaSeries {
            coeffs: x
                .coeffs
                .iter()
                .zip(&y.coeffs)
                .map(|(a, b)| self.ctx.sub(a, b))
                .collect(),
        }
    }
    fn neg(&self, x: &LambdaSeries) -> LambdaSeries {
        LambdaSeries {
            coeffs: x.coeffs.iter().map(|a| self.ctx.neg(a)).collect(),
        }
    }
    fn mul(&self, x: &LambdaSeries, y: &LambdaSeries) -> LambdaSeries {
        let ctx = self.ctx;
        let mut out = self.zero();
        for (i, a) in x.coeffs.iter().enumerate() {
            for (j, b) in y.coeffs.iter().enumerate().take(self.cap - i) {
                out.coeffs[i + j] = ctx.add(&out.coeffs[i + j], &ctx.mul(a, b));
            }
        }
        out
    }
    fn scale_int(&self, x: &LambdaSeries, k: i64) -> LambdaSeries {
        LambdaSeries {
            coeffs: x.coeffs.iter().map(|a| self.ctx.scale_int(a, k)).collect(),
        }
    }
    fn mul_gamma_pow(&self, x: &LambdaSeries, k: u64) -> LambdaSeries {
        LambdaSeries {
            coeffs: x
                .coeffs
                .iter()
                .map(|a| self.ctx.mul_gamma_pow(a, k))
                .collect(),
        }
    }
    fn div_gamma_pow(&self, x: &LambdaSeries, k: u64) -> Result<LambdaSeries> {
        let coeffs = x
            .coeffs
            .iter()
            .map(|a| self.ctx.div_gamma_pow(a, k))
            .collect::<Result<_>>()?;
        Ok(LambdaSeries { coeffs })
    }
    fn val(&self, x: &LambdaSeries) -> i64 {
        x.coeffs
            .iter()
            .map(|c| self.ctx.val(c))
            .min()
            .unwrap_or(self.ctx.cap())
    }
    fn prec(&self, x: &LambdaSeries) -> i64 {
        x.coeffs
            .iter()
            .map(|c| c.prec)
            .min()
            .unwrap_or(self.ctx.cap())
    }
    fn with_prec(&self, x: &LambdaSeries, prec: i64) -> LambdaSeries {
        LambdaSeries {
            coeffs: x
                .coeffs
                .iter()
                .map(|a| self.ctx.with_prec(a, prec))
                .collect(),
        }
    }
    fn is_zero(&self, x: &LambdaSeries) -> bool {
        x.coeffs.iter().all(|a| self.ctx.is_zero(a))
    }
    fn sigma(&self, x: &LambdaSeries, k: i64) -> LambdaSeries {
        LambdaSeries {
            coeffs: x.coeffs.iter().map(|a| self.ctx.sigma(a, k)).collect(),
        }
    }
    fn p(&self) -> u64 {
        self.ctx.p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{build_field, construct_gamma};
    use proptest::prelude::*;

    fn ctx() -> EisensteinContext {
        construct_gamma(&build_field(3, 1, 8).unwrap(), 12).unwrap()
    }

    #[test]
    fn inverse_and_compose() {
        let c = ctx();
        let r = LambdaRing::new(&c, 6);
        // 1/(1 - lambda) = sum lambda^k
        let x = r.sub(&r.one(), &r.var());
        let y = r.inv(&x).unwrap();
        for k in 0..6 {
            assert!(c.eq_mod(&y.coeffs[k], &c.one(), 12));
        }
        // (1 + lambda)^2 composed with lambda + lambda^2
        let f = r.pow(&r.add(&r.one(), &r.var()), 2);
        let g = r.add(&r.var(), &r.shift(&r.var(), 1));
        let h = r.compose(&f, &g).unwrap();
        let want = r.pow(&r.add(&r.one(), &g), 2);
        assert!(r.is_zero(&r.sub(&h, &want)));
    }

    proptest! {
        #[test]
        fn deriv_is_derivation(a in proptest::collection::vec(-50i64..50, 5), b in proptest::collection::vec(-50i64..50, 5)) {
            let c = ctx();
            let r = LambdaRing::new(&c, 5);
            let x = r.from_coeffs(&a.iter().map(|&v| c.from_int(v)).collect::<Vec<_>>());
            let y = r.from_coeffs(&b.iter().map(|&v| c.from_int(v)).collect::<Vec<_>>());
            let lhs = r.lambda_deriv(&r.mul(&x, &y));
            let rhs = r.add(&r.mul(&r.lambda_deriv(&x), &y), &r.mul(&x, &r.lambda_deriv(&y)));
            prop_assert!(r.is_zero(&r.sub(&lhs, &rhs)));
        }
    }
}
