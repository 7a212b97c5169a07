//! `B(u)`, the cochain-level Frobenius `alpha_1` and the truncated operators `D_l`.

use super::splitting::{splitting_table, SplittingTable};
use crate::charp::GradedDivisionTable;
use crate::error::{Error, Result};
use crate::ff::FfElem;
use crate::padic::{
    build_field, construct_gamma, zmod, EisensteinContext, RamifiedElem, UnramifiedElem,
};
use crate::weight::{add_term, Exp, Simplex, WeightedSeries};

/// One correction term `gamma_m p^m H_l(x^{p^m})` of `D_l`, stored as
/// `c_m = gamma_m p^m / gamma^{p^m}` in `Z_p` and `lambda^{p^m}`.
#[derive(Clone, Debug)]
pub struct DTerm {
    pub m: u32,
    pub step: i32,
    pub ratio: u64,
    pub lambda_pow: UnramifiedElem,
}

/// `D_l = E_l + sum_m gamma_m p^m (x_l^{p^m} - lambda^{p^m} x^{p^m U})`, with
/// the terms whose gamma-order `(p-1)(p^m - 1)` reaches the working precision dropped.
#[derive(Clone, Debug)]
pub struct DOperatorTruncated {
    pub terms: Vec<DTerm>,
}

/// Everything the Frobenius computation at fixed `(p, a, n, lambda)` shares.
#[derive(Debug)]
pub struct FrobeniusSetup {
    pub ctx: EisensteinContext,
    pub lat: Simplex,
    pub lambda_bar: FfElem,
    /// Teichmuller lift of `lambda_bar`.
    pub lambda: RamifiedElem,
    /// Working gamma-adic precision.
    pub precision: i64,
    pub weight_cap: i64,
    pub splitting: SplittingTable,
    pub dop: DOperatorTruncated,
    pub charp: GradedDivisionTable,
}

/// Digits of `Z_q` needed so that `B(u)` for `w(u) <= W` fits at gamma-precision `N + W`.
pub fn digits_for(p: u64, precision: i64, weight_cap: i64) -> Result<u32> {
    let e = p as i64 - 1;
    let need = precision + weight_cap + 2;
    let d = ((need + e - 1) / e) as u32 + 2;
    if d > zmod::max_digits(p) {
        return Err(Error::PrecisionInsufficient(format!(
            "gamma^{need} needs {d} digits of Z_{p}, at most {} fit",
            zmod::max_digits(p)
        )));
    }
    Ok(d.max(2))
}

impl FrobeniusSetup {
    pub fn new(
        p: u64,
        a: usize,
        n: usize,
        lambda_bar: FfElem,
        precision: i64,
        weight_cap: i64,
    ) -> Result<Self> {
        if precision < 1 {
            return Err(Error::InvalidParameter("precision must be positive".into()));
        }
        if weight_cap < 0 {
            return Err(Error::InvalidParameter(
                "weight cap must be non-negative".into(),
            ));
        }
        let lat = Simplex::new(n)?;
        let digits = digits_for(p, precision, weight_cap)?;
        let cfg = build_field(p, a, digits)?;
        if lambda_bar == 0 {
            return Err(Error::ZeroLambda);
        }
        if lambda_bar >= cfg.residue_field().size() {
            return Err(Error::InvalidParameter(format!(
                "lambda {lambda_bar} not in F_{}",
                cfg.q()
            )));
        }
        let ctx = construct_gamma(&cfg, precision + weight_cap)?;
        let top = precision + weight_cap;
        let splitting = splitting_table(&ctx, top as usize + 1, top)?;
        Self::with_splitting(ctx, lat, lambda_bar, precision, weight_cap, splitting)
    }

    /// Same as `new` but with a caller-supplied splitting table.
    pub fn with_splitting(
        ctx: EisensteinContext,
        lat: Simplex,
        lambda_bar: FfElem,
        precision: i64,
        weight_cap: i64,
        splitting: SplittingTable,
    ) -> Result<Self> {
        let p = ctx.p();
        let lambda = ctx.teichmuller(lambda_bar);
        let mut terms = Vec::new();
        let mut m = 0u32;
        loop {
            let step = p.pow(m);
            if (p as i64 - 1) * (step as i64 - 1) >= precision {
                break;
            }
            let ratio = if m == 0 { 1 } else { ctx.splitting_ratio(m) };
            let lambda_pow = ctx.cfg().pow(&lambda.coeffs[0], step);
            terms.push(DTerm {
                m,
                step: step as i32,
                ratio,
                lambda_pow,
            });
            m += 1;
        }
        let charp = GradedDivisionTable::new(lat, ctx.cfg().residue_field().clone(), lambda_bar)?;
        Ok(FrobeniusSetup {
            ctx,
            lat,
            lambda_bar,
            lambda,
            precision,
            weight_cap,
            splitting,
            dop: DOperatorTruncated { terms },
            charp,
        })
    }

    pub fn n(&self) -> usize {
        self.lat.n
    }
    pub fn p(&self) -> u64 {
        self.ctx.p()
    }
    pub fn a(&self) -> usize {
        self.ctx.cfg().a()
    }

    /// `sigma^{-1}(lambda) = lambda^{p^{a-1}}` for Teichmuller `lambda`.
    pub fn lambda_sigma_inv(&self) -> RamifiedElem {
        let f = self.ctx.cfg().residue_field();
        let e = self.p().pow(self.a() as u32 - 1);
        self.ctx.teichmuller(f.pow(self.lambda_bar, e))
    }

    /// `B(u) = sum_l b_{u_1+l} .. b_{u_n+l} b_l lambda^l`, known mod `gamma^target`.
    pub fn b_coeff(&self, u: &Exp, lambda: &RamifiedElem, target: i64) -> Result<RamifiedElem> {
        let ctx = &self.ctx;
        let n = self.n();
        if target > self.splitting.precision {
            return Err(Error::PrecisionInsufficient(format!(
                "B at gamma^{target} exceeds splitting precision {}",
                self.splitting.precision
            )));
        }
        let sum_u: i64 = u.0[..n].iter().map(|&x| x as i64).sum();
        let mut acc = ctx.with_prec(&ctx.zero(), target);
        let mut l = self.lat.m(u);
        let mut lam_l = ctx.pow(lambda, l as u64);
        // ord of the l-th term is at least sum_u + (n+1) l
        while sum_u + (n as i64 + 1) * l < target {
            let mut term = ctx.mul(&self.splitting.get(ctx, l as usize)?, &lam_l);
            for k in 0..n {
                term = ctx.mul(
                    &term,
                    &self.splitting.get(ctx, (u.0[k] as i64 + l) as usize)?,
                );
            }
            acc = ctx.add(&acc, &term);
            lam_l = ctx.mul(&lam_l, lambda);
            l += 1;
        }
        Ok(ctx.with_prec(&acc, target))
    }

    /// `A(v~, u~) = gamma^{w(u) - w(v)} B^{sigma^{-1}}(p v - u)` mod `gamma^precision`.
    pub fn a_entry(&self, v: &Exp, u: &Exp, lambda_si: &RamifiedElem) -> Result<RamifiedElem> {
        let ctx = &self.ctx;
        let (wu, wv) = (self.lat.weight(u), self.lat.weight(v));
        let arg = v.scale(self.p() as i32).sub(u);
        let shift = wu - wv;
        let b = self.b_coeff(&arg, lambda_si, self.precision - shift)?;
        if shift >= 0 {
            Ok(ctx.mul_gamma_pow(&b, shift as u64))
        } else {
            ctx.div_gamma_pow(&b, (-shift) as u64)
        }
    }

    /// `alpha_1(eps~_i) = sum_{w(v) <= W} A(v~, eps~_i) v~`.
    pub fn alpha1_image(&self, i: usize) -> Result<WeightedSeries<RamifiedElem>> {
        if i > self.n() {
            return Err(Error::InvalidParameter(format!("basis index {i} > n")));
        }
        let u = self.lat.eps(i);
        let lsi = self.lambda_sigma_inv();
        let mut out = WeightedSeries::new(self.weight_cap);
        for v in self.lat.monomials_up_to(self.weight_cap) {
            out.terms.insert(v, self.a_entry(&v, &u, &lsi)?);
        }
        Ok(out)
    }

    /// `D_l f` in the normalized basis.
    pub fn apply_d(
        &self,
        l: usize,
        f: &WeightedSeries<RamifiedElem>,
    ) -> WeightedSeries<RamifiedElem> {
        let ctx = &self.ctx;
        let lat = &self.lat;
        let pm = ctx.cfg().pm();
        let mut out = WeightedSeries::new(f.weight_cap);
        let el = lat.e(l);
        let big_u = lat.big_u();
        for (u, c) in f.terms.iter() {
            let wu = lat.weight(u);
            let ul = u.0[l - 1];
            if ul != 0 {
                add_term(ctx, &mut out, *u, ctx.scale_int(c, ul as i64));
            }
            for t in &self.dop.terms {
                let cr = ctx.scale_int(c, zmod::to_signed(t.ratio, pm));
                let u1 = u.add(&el.scale(t.step));
                let s1 = t.step as i64 + wu - lat.weight(&u1);
                add_term(ctx, &mut out, u1, ctx.mul_gamma_pow(&cr, s1 as u64));
                let u2 = u.add(&big_u.scale(t.step));
                let s2 = t.step as i64 + wu - lat.weight(&u2);
                let c2 = ctx.neg(&ctx.mul_unram(&cr, &t.lambda_pow));
                add_term(ctx, &mut out, u2, ctx.mul_gamma_pow(&c2, s2 as u64));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::reduce_mod_gamma;
    use proptest::prelude::*;

    #[test]
    fn b_leading_and_orders() {
        let s = FrobeniusSetup::new(3, 1, 1, 1, 10, 6).unwrap();
        let ctx = &s.ctx;
        let b0 = s.b_coeff(&Exp::default(), &s.lambda, 10).unwrap();
        assert_eq!(ctx.residue(&b0), 1);
        let u = Exp::from_slice(&[2]);
        let b = s.b_coeff(&u, &s.lambda, 10).unwrap();
        assert_eq!(ctx.val(&b), 2);
    }

    #[test]
    fn d_operator_depth() {
        let s = FrobeniusSetup::new(2, 1, 2, 1, 8, 4).unwrap();
        // (p-1)(p^m - 1) < 8 keeps m = 0, 1, 2, 3
        assert_eq!(s.dop.terms.len(), 4);
        let s = FrobeniusSetup::new(5, 1, 1, 1, 16, 4).unwrap();
        assert_eq!(s.dop.terms.len(), 1);
    }

    #[test]
    fn d_reduces_to_dbar() {
        let s = FrobeniusSetup::new(3, 2, 2, 5, 6, 6).unwrap();
        let field = s.ctx.cfg().residue_field();
        for v in s.lat.monomials_up_to(3) {
            let f = WeightedSeries::monomial(v, s.ctx.one(), 20);
            for l in 1..=2 {
                let d = reduce_mod_gamma(&s.ctx, &s.apply_d(l, &f));
                let want = crate::charp::d_bar(
                    field,
                    &s.lat,
                    s.lambda_bar,
                    l,
                    &crate::weight::GradedPoly::monomial(v, 1),
                );
                assert_eq!(d, want);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn b_order_bound(which in 0usize..4, idx in 0usize..10_000) {
            let (p, n) = [(2u64, 1usize), (3, 1), (2, 2), (3, 2)][which];
            let s = FrobeniusSetup::new(p, 1, n, 1, 12, 8).unwrap();
            let mons = s.lat.monomials_up_to(8);
            let u = mons[idx % mons.len()];
            let b = s.b_coeff(&u, &s.lambda, 12).unwrap();
            prop_assert!(s.ctx.val(&b) >= s.lat.weight(&u).min(12));
        }
    }
}
