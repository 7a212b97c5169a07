//! `theta^_1(t) = prod_{j>=1} exp(gamma_j t^{p^j})` and the conversion
//! `rho`, multiplication by `theta^_1(lambda x^{-U}) prod_j theta^_1(x_j)` on
//! dual series.

use super::basis::DualSeries;
use crate::error::{Error, Result};
use crate::padic::{zmod, EisensteinContext, RamifiedElem};
use crate::par;
use crate::weight::{Exp, Simplex};
use std::collections::BTreeMap;

/// Coefficients of `theta^_1` and of its reciprocal through `t^depth`.
#[derive(Clone, Debug)]
pub struct ThetaHatTable {
    pub h: Vec<RamifiedElem>,
    pub h_inv: Vec<RamifiedElem>,
    pub depth: usize,
}

fn vp_factorial(p: u64, k: u64) -> u32 {
    let mut v = 0;
    let mut q = k / p;
    while q > 0 {
        v += q as u32;
        q /= p;
    }
    v
}

pub(crate) fn series_mul(
    ctx: &EisensteinContext,
    a: &[RamifiedElem],
    b: &[RamifiedElem],
) -> Vec<RamifiedElem> {
    let mut out = vec![ctx.zero(); a.len()];
    for (i, x) in a.iter().enumerate() {
        if ctx.is_zero(x) && x.prec >= ctx.cap() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(a.len() - i) {
            out[i + j] = ctx.add(&out[i + j], &ctx.mul(x, y));
        }
    }
    out
}

/// `exp(gamma r t^step)` through `t^depth` for `r` in `Z/p^M`, with the
/// factorials divided out exactly in `Z_p`.
pub(crate) fn exp_monomial(
    ctx: &EisensteinContext,
    r: u64,
    step: usize,
    depth: usize,
) -> Result<Vec<RamifiedElem>> {
    let p = ctx.p();
    let pm = ctx.cfg().pm();
    let digits = ctx.cfg().digits() as i64;
    let e = ctx.e() as i64;
    let v = zmod::val_p(r, p, digits as u32) as i64;
    let mut out = vec![ctx.zero(); depth + 1];
    out[0] = ctx.one();
    if v >= digits {
        // gamma r t^step is zero to working precision
        return Ok(out);
    }
    let unit = r / p.pow(v as u32);
    let mut unit_pow = 1u64;
    let mut fact_unit = 1u64;
    let mut k = 1u64;
    while k as usize * step <= depth {
        unit_pow = zmod::mul(unit_pow, unit, pm);
        let mut kk = k;
        while kk % p == 0 {
            kk /= p;
        }
        fact_unit = zmod::mul(fact_unit, kk % pm, pm);
        let shift = k as i64 * v - vp_factorial(p, k) as i64;
        let u = zmod::mul(unit_pow, zmod::inv(fact_unit, pm).expect("unit"), pm);
        // the unit part of r is only known mod p^{M - v}
        out[k as usize * step] = if shift >= 0 {
            let c = zmod::mul(u, zmod::pow(p, shift as u64, pm), pm);
            let x = ctx.with_prec(
                &ctx.from_int(zmod::to_signed(c, pm)),
                e * (digits - v + shift),
            );
            ctx.mul_gamma_pow(&x, k)
        } else {
            // gamma^k / p^j = gamma^{k - (p-1) j} s^j with pi = p s
            let j = (-shift) as u64;
            let c = zmod::mul(u, zmod::pow(ctx.s(), j, pm), pm);
            let x = ctx.with_prec(&ctx.from_int(zmod::to_signed(c, pm)), e * (digits - v));
            ctx.mul_gamma_pow(&x, k - e as u64 * j)
        };
        k += 1;
    }
    Ok(out)
}

impl ThetaHatTable {
    pub fn new(ctx: &EisensteinContext, depth: usize) -> Result<Self> {
        let p = ctx.p() as usize;
        let mut top = 0u32;
        while p.pow(top + 1) <= depth {
            top += 1;
        }
        let ratios = ctx.gamma_tower_ratios(top.max(1));
        let mut h = vec![ctx.zero(); depth + 1];
        h[0] = ctx.one();
        let mut h_inv = h.clone();
        for j in 1..=top {
            let r = ratios[j as usize];
            let step = p.pow(j);
            h = series_mul(ctx, &h, &exp_monomial(ctx, r, step, depth)?);
            h_inv = series_mul(
                ctx,
                &h_inv,
                &exp_monomial(ctx, zmod::neg(r, ctx.cfg().pm()), step, depth)?,
            );
        }
        Ok(ThetaHatTable { h, h_inv, depth })
    }

    /// Lower bound `i (p-1)^2 / p` on the gamma-order of the `t^i` coefficient.
    pub fn order_bound(p: u64, i: usize) -> i64 {
        let num = i as i64 * (p as i64 - 1).pow(2);
        (num + p as i64 - 1) / p as i64
    }

    fn table(&self, inverse: bool) -> &[RamifiedElem] {
        if inverse {
            &self.h_inv
        } else {
            &self.h
        }
    }
}

/// Precision bookkeeping for one conversion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoLedger {
    /// Tail bound assuming integral input; `None` when the bound is vacuous (`p = 2`).
    pub certified: Option<i64>,
    /// Minimum of the arithmetic precision and the smallest order met in the
    /// outermost `p` weight layers of the input.
    pub achieved: i64,
}

#[derive(Clone, Debug)]
pub struct RhoResult {
    pub series: DualSeries<RamifiedElem>,
    pub ledger: RhoLedger,
}

/// Coefficient of `x^t` in `theta^_1(lambda x^{-U}) prod theta^_1(x_k)`.
fn theta_x_coeff(
    ctx: &EisensteinContext,
    lat: &Simplex,
    tab: &[RamifiedElem],
    lambda: &RamifiedElem,
    t: &Exp,
) -> Result<RamifiedElem> {
    let n = lat.n;
    let mut acc = ctx.zero();
    let mut l = lat.m(t) as usize;
    loop {
        let idx: Vec<usize> = (0..n)
            .map(|k| (t.0[k] as i64 + l as i64) as usize)
            .collect();
        if l >= tab.len() || idx.iter().any(|&i| i >= tab.len()) {
            let need = idx.iter().sum::<usize>() + l;
            if ThetaHatTable::order_bound(ctx.p(), need) < ctx.cap() {
                return Err(Error::PrecisionInsufficient(format!(
                    "theta table too shallow at index {need}"
                )));
            }
            break;
        }
        let mut term = ctx.mul(&tab[l], &ctx.pow(lambda, l as u64));
        for &i in &idx {
            term = ctx.mul(&term, &tab[i]);
        }
        acc = ctx.add(&acc, &term);
        l += 1;
    }
    Ok(acc)
}

/// `rho(g)` (or its inverse) at all `omega` with `w(omega) <= out_weight`,
/// using the terms of `g` up to `g.weight_cap`.
pub fn rho_convert(
    ctx: &EisensteinContext,
    lat: &Simplex,
    table: &ThetaHatTable,
    lambda: &RamifiedElem,
    g: &DualSeries<RamifiedElem>,
    out_weight: i64,
    inverse: bool,
) -> Result<RhoResult> {
    let p = ctx.p() as i32;
    let tab = table.table(inverse);
    let w_g = g.weight_cap;
    let omegas = lat.monomials_up_to(out_weight);
    let mut coeff_cache: BTreeMap<Exp, RamifiedElem> = BTreeMap::new();
    for u in g.terms.keys() {
        for om in &omegas {
            let t = u.sub(om);
            if t.0[..lat.n].iter().all(|&x| x.rem_euclid(p) == 0) && !coeff_cache.contains_key(&t) {
                coeff_cache.insert(t, theta_x_coeff(ctx, lat, tab, lambda, &t)?);
            }
        }
    }
    let shell = w_g - ctx.p() as i64;
    let rows = par::map_slice(&omegas, |om| -> Result<(Exp, RamifiedElem, i64)> {
        let wo = lat.weight(om);
        let mut terms = Vec::new();
        let mut shell_min = ctx.cap();
        for (u, c) in &g.terms {
            let Some(tc) = coeff_cache.get(&u.sub(om)) else {
                continue;
            };
            let prod = ctx.mul(tc, c);
            let e = wo - lat.weight(u);
            if lat.weight(u) > shell {
                shell_min = shell_min.min(ctx.val(&prod) + e);
            }
            terms.push((prod, e));
        }
        // single terms may be non-integral when p = 2; scale up, sum, scale back
        let lift = terms
            .iter()
            .map(|(x, e)| -(ctx.val(x) + e))
            .max()
            .unwrap_or(0)
            .max(0);
        let mut acc = ctx.zero();
        for (x, e) in &terms {
            let k = e + lift;
            let t = if k >= 0 {
                ctx.mul_gamma_pow(x, k as u64)
            } else {
                ctx.div_gamma_pow(x, (-k) as u64)?
            };
            acc = ctx.add(&acc, &t);
        }
        let acc = ctx.div_gamma_pow(&acc, lift as u64).map_err(|_| {
            Error::PrecisionInsufficient(format!(
                "converted coefficient at {} is not integral",
                lat.fmt_exp(om)
            ))
        })?;
        Ok((*om, acc, shell_min))
    });
    let mut series = DualSeries::new(out_weight);
    let mut achieved = ctx.cap();
    let mut certified = if ctx.p() >= 3 { Some(ctx.cap()) } else { None };
    let rate_num = (ctx.p() as i64 - 1).pow(2) - ctx.p() as i64;
    for row in rows {
        let (om, v, shell_min) = row?;
        let wo = lat.weight(&om);
        achieved = achieved.min(v.prec).min(shell_min);
        if let Some(c) = certified.as_mut() {
            let tail = ((w_g - wo + 1) * rate_num).div_euclid(ctx.p() as i64);
            *c = (*c).min(tail).min(v.prec);
        }
        series.terms.insert(om, v);
    }
    Ok(RhoResult {
        series,
        ledger: RhoLedger {
            certified,
            achieved,
        },
    })
}

/// Depth of the theta table needed for input weights up to `w_g`.
pub fn table_depth(n: usize, w_g: i64, out_weight: i64) -> usize {
    ((n as i64 + 1) * (w_g + out_weight) + 1) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::basis::{apply_dual_d, AlgebraicDualBasis};
    use crate::frobenius::operator::FrobeniusSetup;
    use crate::padic::{build_field, construct_gamma};
    use proptest::prelude::*;

    fn ctx(p: u64, digits: u32) -> EisensteinContext {
        let cfg = build_field(p, 1, digits).unwrap();
        construct_gamma(&cfg, (p as i64 - 1) * (digits as i64 - 2)).unwrap()
    }

    #[test]
    fn table_shape() {
        for p in [2u64, 3, 5] {
            let c = ctx(p, 12);
            let t = ThetaHatTable::new(&c, 40).unwrap();
            assert_eq!(t.h[0], c.one());
            for i in 1..p as usize {
                assert!(c.is_zero(&t.h[i]));
            }
            let prod = series_mul(&c, &t.h, &t.h_inv);
            assert_eq!(prod[0], c.one());
            for (i, x) in prod.iter().enumerate().skip(1) {
                assert!(c.is_zero(x), "p={p} i={i} {x:?}");
            }
            for (i, x) in t.h.iter().enumerate() {
                assert!(
                    c.val(x) >= ThetaHatTable::order_bound(p, i).min(c.cap()),
                    "p={p} i={i} val={} prec={}",
                    c.val(x),
                    x.prec
                );
                if i % p as usize != 0 {
                    assert!(c.is_zero(x), "p={p} i={i} {x:?}");
                }
            }
        }
    }

    #[test]
    fn kernel_maps_to_kernel() {
        // D_l^* (rho xi) = theta D^(1)*_l xi = 0
        let s = FrobeniusSetup::new(3, 1, 1, 1, 8, 40).unwrap();
        let c = &s.ctx;
        let w_g = 36;
        let b = AlgebraicDualBasis::solve(
            s.lat,
            3,
            c.cfg().pm(),
            w_g,
            AlgebraicDualBasis::lambda_cap_for(1, c.cap()),
        )
        .unwrap();
        let tab = ThetaHatTable::new(c, table_depth(1, w_g, 12)).unwrap();
        for k in 0..=1 {
            let xi = b.numeric(c, &s.lambda, k).unwrap();
            let r = rho_convert(c, &s.lat, &tab, &s.lambda, &xi, 12, false).unwrap();
            let cert = r.ledger.certified.unwrap();
            assert!(cert >= 8, "certified {cert}");
            let d = apply_dual_d(c, &s.lat, 1, &s.dop.terms, &r.series);
            for (u, v) in &d.terms {
                if s.lat.weight(u) + 3 <= 12 {
                    assert!(c.val(v) >= cert, "u={u:?} val {}", c.val(v));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn inverse_round_trip(vals in proptest::collection::vec((-3i32..4, -30i64..30), 1..5)) {
            // dividing by gamma^{w(u) - w(omega)} needs headroom above the target
            let c = ctx(3, 39);
            let lat = Simplex::new(1).unwrap();
            let lambda = c.teichmuller(2);
            // finite support: everything above weight 3 is exactly zero
            let mut g = DualSeries::new(80);
            for (u, v) in vals {
                g.terms.insert(Exp::from_slice(&[u]), c.from_int(v));
            }
            let tab = ThetaHatTable::new(&c, 200).unwrap();
            let once = rho_convert(&c, &lat, &tab, &lambda, &g, 40, false).unwrap();
            let back = rho_convert(&c, &lat, &tab, &lambda, &once.series, 3, true).unwrap();
            let cert = back.ledger.certified.unwrap();
            prop_assert!(cert >= 8, "{:?} {:?}", once.ledger, back.ledger);
            for u in lat.monomials_up_to(3) {
                let want = g.terms.get(&u).cloned().unwrap_or_else(|| c.zero());
                prop_assert!(c.eq_mod(&back.series.terms[&u], &want, cert));
            }
        }
    }
}
