//! Reduction of series to the cohomology basis `eps~_0..eps~_n`.

use super::operator::FrobeniusSetup;
use crate::error::{Error, Result};
use crate::padic::RamifiedElem;
use crate::weight::{add_term, reduce_mod_gamma, WeightedSeries};

/// `f = sum_k coords[k] eps~_k + sum_j D_j zeta_j`, coordinates known mod `gamma^certified`.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyCoords {
    pub coords: Vec<RamifiedElem>,
    pub certified: i64,
    pub passes: usize,
}

impl FrobeniusSetup {
    /// Lift the char-p reduction, subtract, divide by gamma, repeat.
    pub fn cohomology_reduce(&self, f: &WeightedSeries<RamifiedElem>) -> Result<CohomologyCoords> {
        let ctx = &self.ctx;
        let n = self.n();
        let cfg = ctx.cfg();
        let start = f
            .terms
            .values()
            .map(|c| c.prec)
            .min()
            .unwrap_or(self.precision)
            .min(self.precision);
        let mut coords = vec![ctx.with_prec(&ctx.zero(), start); n + 1];
        let mut cur = WeightedSeries::new(f.weight_cap);
        for (u, c) in &f.terms {
            cur.terms.insert(*u, ctx.with_prec(c, start));
        }
        let mut t = 0i64;
        while t < start {
            let prec = start - t;
            cur.terms.retain(|_, c| ctx.val(c) < prec);
            if cur.terms.is_empty() {
                break;
            }
            let red = self.charp.filtered_reduce(&reduce_mod_gamma(ctx, &cur))?;
            let lift = |r| ctx.with_prec(&ctx.from_unram(&cfg.lift(r)), prec);
            for (k, &c) in red.c.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let x = lift(c);
                coords[k] = ctx.add(&coords[k], &ctx.mul_gamma_pow(&x, t as u64));
                add_term(ctx, &mut cur, self.lat.eps(k), ctx.neg(&x));
            }
            for (j, xi) in red.xi.iter().enumerate() {
                if xi.is_zero() {
                    continue;
                }
                let mut z = WeightedSeries::new(cur.weight_cap);
                for (u, &c) in &xi.terms {
                    z.terms.insert(*u, lift(c));
                }
                for (u, c) in self.apply_d(j + 1, &z).terms {
                    add_term(ctx, &mut cur, u, ctx.neg(&c));
                }
            }
            let mut next = WeightedSeries::new(cur.weight_cap);
            for (u, c) in &cur.terms {
                let q = ctx.div_gamma(c).map_err(|_| {
                    Error::BudgetExceeded(format!("residual not divisible by gamma at pass {t}"))
                })?;
                next.terms.insert(*u, q);
            }
            cur = next;
            t += 1;
        }
        Ok(CohomologyCoords {
            coords,
            certified: start,
            passes: t as usize,
        })
    }
}
