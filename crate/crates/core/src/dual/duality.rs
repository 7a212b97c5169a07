//! The Frobenius matrix recomputed by pairing `alpha_1` images against the
//! converted dual basis.

use super::basis::{pairing, AlgebraicDualBasis, DualSeries};
use super::theta::{rho_convert, table_depth, RhoLedger, ThetaHatTable};
use crate::error::{Error, Result};
use crate::ff::FfElem;
use crate::frobenius::{Check, FrobMatrix, FrobeniusSetup};
use crate::padic::{EisensteinContext, RamifiedElem};
use crate::par;
use crate::weight::WeightedSeries;

/// Weight caps for one duality run at gamma-precision `precision`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualityPlan {
    pub precision: i64,
    /// `alpha_1` images and converted duals are paired up to this weight.
    pub pair_weight: i64,
    /// Weight cap of the first-order dual basis fed to the conversion.
    pub dual_weight: i64,
}

impl DualityPlan {
    pub fn new(p: u64, precision: i64) -> Self {
        let e = p as i64 - 1;
        let pair_weight = if p == 2 {
            precision + 2
        } else {
            (precision + e - 1) / e
        };
        // tail of the conversion decays at ((p-1)^2 - p)/p per weight
        let dual_weight = if p == 2 {
            pair_weight + 2 * precision + 4
        } else {
            let rate = e * e - p as i64;
            pair_weight - 1 + (precision * p as i64 + rate - 1) / rate
        };
        DualityPlan {
            precision,
            pair_weight,
            dual_weight,
        }
    }
}

#[derive(Debug)]
pub struct DualityReport {
    pub setup: FrobeniusSetup,
    pub plan: DualityPlan,
    pub matrix: FrobMatrix,
    /// `gram[i][j] = <eps~_i, phi_j>`.
    pub gram: Vec<Vec<RamifiedElem>>,
    /// Converted dual basis `phi_j`, up to the pairing weight.
    pub phi: Vec<DualSeries<RamifiedElem>>,
    pub ledger: RhoLedger,
}

/// Solve `x a = b` row-wise for `a` congruent to the identity mod `gamma`;
/// returns `a^{-1} b`.
fn solve_unipotent(
    ctx: &EisensteinContext,
    a: &[Vec<RamifiedElem>],
    b: &[Vec<RamifiedElem>],
) -> Result<Vec<Vec<RamifiedElem>>> {
    let d = a.len();
    let mut m: Vec<Vec<RamifiedElem>> = a.to_vec();
    let mut r: Vec<Vec<RamifiedElem>> = b.to_vec();
    for c in 0..d {
        if ctx.val(&m[c][c]) != 0 {
            return Err(Error::Singular(format!(
                "pivot {c} of the Gram matrix is not a unit"
            )));
        }
        let inv = ctx.inv_unit(&m[c][c])?;
        for x in m[c].iter_mut().chain(r[c].iter_mut()) {
            *x = ctx.mul(x, &inv);
        }
        for k in 0..d {
            if k == c {
                continue;
            }
            let f = m[k][c].clone();
            for i in 0..d {
                let t = ctx.mul(&f, &m[c][i]);
                m[k][i] = ctx.sub(&m[k][i], &t);
            }
            for i in 0..r[k].len() {
                let t = ctx.mul(&f, &r[c][i]);
                r[k][i] = ctx.sub(&r[k][i], &t);
            }
        }
    }
    Ok(r)
}

/// `A~ = (G^t)^{-1} P` with `P[j][i] = <alpha_1(eps~_i), phi_j>` and
/// `G[i][j] = <eps~_i, phi_j>`; `phi_j` is dual to `eps~ theta^_1^{-1}`,
/// which is why the Gram correction is needed.
pub fn frobenius_via_duality(
    p: u64,
    a: usize,
    n: usize,
    lambda_bar: FfElem,
    precision: i64,
) -> Result<DualityReport> {
    let plan = DualityPlan::new(p, precision);
    let setup = FrobeniusSetup::new(p, a, n, lambda_bar, precision, plan.dual_weight)?;
    let ctx = &setup.ctx;
    let lat = setup.lat;
    let basis = AlgebraicDualBasis::solve(
        lat,
        p,
        ctx.cfg().pm(),
        plan.dual_weight,
        AlgebraicDualBasis::lambda_cap_for(n, ctx.cap()),
    )?;
    let table = ThetaHatTable::new(ctx, table_depth(n, plan.dual_weight, plan.pair_weight))?;
    let converted = par::map_range(n + 1, |k| {
        let xi = basis.numeric(ctx, &setup.lambda, k)?;
        rho_convert(
            ctx,
            &lat,
            &table,
            &setup.lambda,
            &xi,
            plan.pair_weight,
            false,
        )
    });
    let mut phi = Vec::with_capacity(n + 1);
    let mut ledger = RhoLedger {
        certified: Some(ctx.cap()),
        achieved: ctx.cap(),
    };
    for r in converted {
        let r = r?;
        ledger.achieved = ledger.achieved.min(r.ledger.achieved);
        ledger.certified = match (ledger.certified, r.ledger.certified) {
            (Some(x), Some(y)) => Some(x.min(y)),
            _ => None,
        };
        phi.push(r.series);
    }
    let lsi = setup.lambda_sigma_inv();
    let images: Vec<WeightedSeries<RamifiedElem>> = par::map_range(n + 1, |i| -> Result<_> {
        let u = lat.eps(i);
        let mut out = WeightedSeries::new(plan.pair_weight);
        for v in lat.monomials_up_to(plan.pair_weight) {
            out.terms.insert(v, setup.a_entry(&v, &u, &lsi)?);
        }
        Ok(out)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let gram: Vec<Vec<RamifiedElem>> = (0..=n)
        .map(|i| {
            phi.iter()
                .map(|f| {
                    f.terms
                        .get(&lat.eps(i))
                        .cloned()
                        .unwrap_or_else(|| ctx.zero())
                })
                .collect()
        })
        .collect();
    let gram_t: Vec<Vec<RamifiedElem>> = (0..=n)
        .map(|j| (0..=n).map(|i| gram[i][j].clone()).collect())
        .collect();
    let pmat: Vec<Vec<RamifiedElem>> = (0..=n)
        .map(|j| {
            images
                .iter()
                .map(|img| pairing(ctx, img, &phi[j]))
                .collect()
        })
        .collect();
    let entries = solve_unipotent(ctx, &gram_t, &pmat)?;
    let tail = ledger.certified.unwrap_or(ledger.achieved);
    let arith = entries
        .iter()
        .flatten()
        .map(|x| x.prec)
        .min()
        .unwrap_or(precision);
    let certified = precision.min(tail).min(arith);
    let matrix = FrobMatrix {
        entries,
        certified,
        semilinear: true,
    };
    Ok(DualityReport {
        setup,
        plan,
        matrix,
        gram,
        phi,
        ledger,
    })
}

/// Entrywise agreement of two Frobenius matrices computed in different contexts.
pub fn agreement_check(
    name: &str,
    dual_ctx: &EisensteinContext,
    dual: &FrobMatrix,
    primal_ctx: &EisensteinContext,
    primal: &FrobMatrix,
) -> Result<Check> {
    let bound = dual.certified.min(primal.certified);
    let mut worst = bound;
    for (rd, rp) in dual.entries.iter().zip(&primal.entries) {
        for (xd, xp) in rd.iter().zip(rp) {
            let xp = dual_ctx.from_digits(&primal_ctx.to_digits(xp))?;
            let diff = dual_ctx.sub(xd, &xp);
            worst = worst.min(dual_ctx.val(&diff));
        }
    }
    Ok(Check::new(
        name,
        worst >= bound,
        format!("agree mod gamma^{worst}, certified {bound}"),
    ))
}
