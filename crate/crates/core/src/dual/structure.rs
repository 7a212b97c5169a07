//! Frobenius structure of the deformation equation at a Teichmuller point.
//!
//! Series here are in `mu = lambda - lambda_0`. The dual Frobenius
//! `A(lambda)` is computed directly: entry `(j, i)` pairs
//! `psi_p(F(lambda, x) x^{eps_i})` with the dual basis at `lambda^p`, where
//! `F(lambda, x) = prod_k theta_1(x_k) theta_1(lambda x^U)` and
//! `theta_1(t) = exp(gamma (t - t^p))`. Nothing from the deformation side
//! enters that computation.

use super::basis::AlgebraicDualBasis;
use super::lambda::{LambdaRing, LambdaSeries};
use super::theta::{exp_monomial, series_mul};
use crate::error::{Error, Result};
use crate::ff::FfElem;
use crate::frobenius::{Check, FrobMatrix};
use crate::padic::ring::GammaRing;
use crate::padic::{build_field, construct_gamma, zmod, EisensteinContext, RamifiedElem};
use crate::par;
use crate::weight::{Exp, Simplex};
use std::collections::HashMap;

type SMat = Vec<Vec<LambdaSeries>>;

/// Truncation parameters for one structure check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructurePlan {
    pub precision: i64,
    pub mu_cap: usize,
    /// Weight cap of the pairing.
    pub pair_weight: i64,
    /// Solutions are carried as `gamma^lift Y` to clear factorials.
    pub lift: i64,
}

fn vp_factorial(p: u64, k: u64) -> i64 {
    let mut v = 0;
    let mut q = k / p;
    while q > 0 {
        v += q as i64;
        q /= p;
    }
    v
}

/// Lower bound on the gamma-order of the `t^i` coefficient of `theta_1`.
pub fn theta_one_bound(p: u64, i: usize) -> i64 {
    let num = i as i64 * (p as i64 - 1).pow(2);
    let den = (p * p) as i64;
    (num + den - 1) / den
}

impl StructurePlan {
    pub fn new(p: u64, precision: i64, mu_cap: usize) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidParameter(
                "structure check needs p >= 3".into(),
            ));
        }
        if precision < 1 || mu_cap < 1 {
            return Err(Error::InvalidParameter(
                "precision and mu cap must be positive".into(),
            ));
        }
        // the (v, eps_i) entry has order >= ceil((p w - 1)(p-1)^2/p^2) - w at w = w(v)
        let tail = |w: i64| theta_one_bound(p, (p as i64 * w - 1).max(0) as usize) - w;
        let mut pair_weight = 1;
        while tail(pair_weight + 1) < precision {
            pair_weight += 1;
        }
        let lift = (p as i64 - 1) * vp_factorial(p, mu_cap as u64 - 1);
        Ok(StructurePlan {
            precision,
            mu_cap,
            pair_weight,
            lift,
        })
    }

    fn target(&self) -> i64 {
        self.precision + 2 * self.lift + self.pair_weight + 4
    }
}

#[derive(Debug)]
pub struct StructureReport {
    pub ctx: EisensteinContext,
    pub plan: StructurePlan,
    /// `A(lambda)` as series in `mu`.
    pub frobenius: SMat,
    /// `gamma^{2 lift} M(lambda)`.
    pub transition: SMat,
    pub checks: Vec<Check>,
}

impl StructureReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `A(lambda_0)` as a linear Frobenius matrix.
    pub fn frobenius_at_base(&self) -> FrobMatrix {
        let entries = self
            .frobenius
            .iter()
            .map(|r| r.iter().map(|x| x.coeffs[0].clone()).collect())
            .collect();
        FrobMatrix {
            entries,
            certified: self.plan.precision,
            semilinear: false,
        }
    }
}

fn mat_mul(ring: &LambdaRing, x: &SMat, y: &SMat) -> SMat {
    let d = x.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    (0..d).fold(ring.zero(), |acc, k| {
                        ring.add(&acc, &ring.mul(&x[i][k], &y[k][j]))
                    })
                })
                .collect()
        })
        .collect()
}

fn mat_add(ring: &LambdaRing, x: &SMat, y: &SMat) -> SMat {
    x.iter()
        .zip(y)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| ring.add(u, v)).collect())
        .collect()
}

fn mat_scale(ring: &LambdaRing, x: &SMat, c: &LambdaSeries) -> SMat {
    x.iter()
        .map(|a| a.iter().map(|u| ring.mul(u, c)).collect())
        .collect()
}

/// Coefficients `gamma^lift Z_k` of the fundamental solution at `lambda_0`
/// (`inverse` for `Y^{-1}`), from the factorial-free recursion
/// `Z^_{k+1} = Z^_k (A - k) + k lambda_0 Z^_{k-1} c E` and its mirror.
fn solution_coeffs(
    ctx: &EisensteinContext,
    n: usize,
    lambda0: &RamifiedElem,
    cap: usize,
    lift: i64,
    inverse: bool,
) -> Result<Vec<Vec<Vec<RamifiedElem>>>> {
    let d = n + 1;
    let c = ctx.gamma_pow(d as u64);
    let ent = |i: usize, j: usize| -> RamifiedElem {
        match (i, j) {
            (0, j) if j == n => ctx.mul(&c, lambda0),
            (i, j) if i == j + 1 => ctx.one(),
            _ => ctx.zero(),
        }
    };
    let a: Vec<Vec<RamifiedElem>> = (0..d)
        .map(|i| (0..d).map(|j| ent(i, j)).collect())
        .collect();
    let mul = |x: &[Vec<RamifiedElem>], y: &[Vec<RamifiedElem>]| -> Vec<Vec<RamifiedElem>> {
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        (0..d).fold(ctx.zero(), |acc, k| {
                            ctx.add(&acc, &ctx.mul(&x[i][k], &y[k][j]))
                        })
                    })
                    .collect()
            })
            .collect()
    };
    let ident: Vec<Vec<RamifiedElem>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { ctx.one() } else { ctx.zero() })
                .collect()
        })
        .collect();
    let mut corner = vec![vec![ctx.zero(); d]; d];
    corner[0][n] = c.clone();
    let mut hat = vec![ident.clone()];
    for k in 0..cap.saturating_sub(1) {
        let shifted: Vec<Vec<RamifiedElem>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        ctx.sub(
                            &a[i][j],
                            &ctx.scale_int(
                                &ident[i][j],
                                if inverse { -(k as i64) } else { k as i64 },
                            ),
                        )
                    })
                    .collect()
            })
            .collect();
        let mut next = if inverse {
            let t = mul(&shifted, &hat[k]);
            t.iter()
                .map(|r| r.iter().map(|x| ctx.neg(x)).collect())
                .collect()
        } else {
            mul(&hat[k], &shifted)
        };
        if k > 0 {
            let f = ctx.scale_int(lambda0, k as i64);
            let t = if inverse {
                mul(&corner, &hat[k - 1])
            } else {
                mul(&hat[k - 1], &corner)
            };
            for i in 0..d {
                for j in 0..d {
                    let x = ctx.mul(&t[i][j], &f);
                    next[i][j] = if inverse {
                        ctx.sub(&next[i][j], &x)
                    } else {
                        ctx.add(&next[i][j], &x)
                    };
                }
            }
        }
        hat.push(next);
    }
    let p = ctx.p();
    let lam_inv = ctx.inv_unit(lambda0)?;
    let pm = ctx.cfg().pm();
    let mut out = Vec::with_capacity(cap);
    for (k, zk) in hat.iter().enumerate() {
        let v = vp_factorial(p, k as u64);
        let mut unit = 1u64;
        for i in 1..=k as u64 {
            let mut t = i;
            while t % p == 0 {
                t /= p;
            }
            unit = zmod::mul(unit, t % pm, pm);
        }
        let scale = ctx.mul(
            &ctx.from_int(zmod::to_signed(zmod::inv(unit, pm).expect("unit"), pm)),
            &ctx.pow(&lam_inv, k as u64),
        );
        let mut m = Vec::with_capacity(d);
        for row in zk {
            let mut r = Vec::with_capacity(d);
            for x in row {
                let y = ctx.mul(&ctx.mul_gamma_pow(x, lift as u64), &scale);
                r.push(ctx.div_p_pow(&y, v as u32)?);
            }
            m.push(r);
        }
        out.push(m);
    }
    Ok(out)
}

fn series_matrix(ring: &LambdaRing, coeffs: &[Vec<Vec<RamifiedElem>>]) -> SMat {
    let d = coeffs[0].len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    ring.from_coeffs(&coeffs.iter().map(|c| c[i][j].clone()).collect::<Vec<_>>())
                })
                .collect()
        })
        .collect()
}

/// `A(lambda)` as series in `mu`; entry `[j][i]` is the coefficient of the
/// `j`-th dual basis element at `lambda^p` in `alpha^*`.
fn frobenius_series(
    ring: &LambdaRing,
    lat: &Simplex,
    basis: &AlgebraicDualBasis,
    lambda: &LambdaSeries,
    plan: &StructurePlan,
) -> Result<SMat> {
    let ctx = ring.ctx;
    let p = ctx.p();
    let n = lat.n;
    let cap = ctx.cap();
    let pm = ctx.cfg().pm();
    let mut depth = 1usize;
    while theta_one_bound(p, depth) < cap {
        depth += 1;
    }
    let beta = series_mul(
        ctx,
        &exp_monomial(ctx, 1, 1, depth)?,
        &exp_monomial(ctx, pm - 1, p as usize, depth)?,
    );
    let mut lam_pow = vec![ring.one()];
    let lp = ring.pow(lambda, p);
    let lp_inv = ring.inv(&lp)?;
    let big = ring.mul_gamma_pow(&lp, n as u64 + 1);
    let duals: Vec<HashMap<Exp, LambdaSeries>> = (0..=n)
        .map(|k| {
            lat.monomials_up_to(plan.pair_weight)
                .into_iter()
                .map(|v| {
                    let poly = &basis.e[k][&v];
                    let mut acc = ring.zero();
                    for &c in poly.iter().rev() {
                        acc = ring.add(
                            &ring.mul(&acc, &big),
                            &ring.from_int(zmod::to_signed(c, pm)),
                        );
                    }
                    let m = lat.m(&v);
                    (v, ring.mul(&acc, &ring.pow(&lp_inv, m as u64)))
                })
                .collect()
        })
        .collect();
    let max_l = depth;
    while lam_pow.len() <= max_l {
        let next = ring.mul(lam_pow.last().unwrap(), lambda);
        lam_pow.push(next);
    }
    // coefficient of x^t in F(lambda, x)
    let f_coeff = |t: &Exp| -> LambdaSeries {
        let m = lat.m(t);
        let sum_t: i64 = t.0[..n].iter().map(|&x| x as i64).sum();
        let mut acc = ring.zero();
        let mut l = m;
        loop {
            let total = (n as i64 + 1) * l + sum_t;
            if total as usize > depth * (n + 1) || theta_one_bound(p, total as usize) >= cap {
                break;
            }
            let mut c = beta[l as usize].clone();
            let mut ok = true;
            for k in 0..n {
                let idx = (t.0[k] as i64 + l) as usize;
                if idx > depth {
                    ok = false;
                    break;
                }
                c = ctx.mul(&c, &beta[idx]);
            }
            if ok && !(ctx.is_zero(&c) && c.prec >= cap) {
                acc = ring.add(&acc, &ring.mul_scalar(&lam_pow[l as usize], &c));
            }
            l += 1;
        }
        acc
    };
    let cols: Vec<Result<Vec<LambdaSeries>>> = par::map_range(n + 1, |i| {
        let u = lat.eps(i);
        let wu = lat.weight(&u);
        let mut col = vec![ring.zero(); n + 1];
        for v in lat.monomials_up_to(plan.pair_weight) {
            let t = v.scale(p as i32).sub(&u);
            let s = f_coeff(&t);
            let shift = lat.weight(&v) - wu;
            let a = if shift >= 0 {
                ring.div_gamma_pow(&s, shift as u64).map_err(|_| {
                    Error::PrecisionInsufficient(format!(
                        "alpha entry at {} not integral",
                        lat.fmt_exp(&v)
                    ))
                })?
            } else {
                ring.mul_gamma_pow(&s, (-shift) as u64)
            };
            for (j, slot) in col.iter_mut().enumerate() {
                *slot = ring.add(slot, &ring.mul(&a, &duals[j][&v]));
            }
        }
        Ok(col)
    });
    let cols: Vec<Vec<LambdaSeries>> = cols.into_iter().collect::<Result<_>>()?;
    Ok((0..=n)
        .map(|j| (0..=n).map(|i| cols[i][j].clone()).collect())
        .collect())
}

/// Build `A(lambda)` near `lambda_0 = teich(lambda_bar0)` and test that
/// `M(lambda) = Y(lambda^p) A(lambda) Y(lambda)^{-1}` is constant through
/// `mu^{mu_cap - 1}` at gamma-precision `precision`.
pub fn frobenius_structure_check(
    p: u64,
    n: usize,
    lambda_bar0: FfElem,
    precision: i64,
    mu_cap: usize,
) -> Result<StructureReport> {
    let plan = StructurePlan::new(p, precision, mu_cap)?;
    if lambda_bar0 == 0 || lambda_bar0 as u64 >= p {
        return Err(Error::InvalidParameter(format!(
            "lambda_0 must lie in F_{p}^*"
        )));
    }
    let lat = Simplex::new(n)?;
    let target = plan.target();
    let e = p as i64 - 1;
    let digits = ((target + e - 1) / e) as u32 + 3;
    if digits > zmod::max_digits(p) {
        return Err(Error::PrecisionInsufficient(format!(
            "gamma^{target} needs {digits} digits of Z_{p}"
        )));
    }
    let ctx = construct_gamma(&build_field(p, 1, digits)?, target)?;
    let ring = LambdaRing::new(&ctx, mu_cap);
    let lambda0 = ctx.teichmuller(lambda_bar0);
    let lambda = ring.add(&ring.constant(&lambda0), &ring.monomial(1, &ctx.one()));
    let basis = AlgebraicDualBasis::solve(
        lat,
        p,
        ctx.cfg().pm(),
        plan.pair_weight + 1,
        AlgebraicDualBasis::lambda_cap_for(n, ctx.cap()),
    )?;
    let frobenius = frobenius_series(&ring, &lat, &basis, &lambda, &plan)?;

    let y = series_matrix(
        &ring,
        &solution_coeffs(&ctx, n, &lambda0, mu_cap, plan.lift, false)?,
    );
    let y_inv = series_matrix(
        &ring,
        &solution_coeffs(&ctx, n, &lambda0, mu_cap, plan.lift, true)?,
    );
    let mut checks = Vec::new();

    let lifted = ctx.gamma_pow(2 * plan.lift as u64);
    let prod = mat_mul(&ring, &y, &y_inv);
    let mut worst = i64::MAX;
    for (i, row) in prod.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let want = if i == j {
                ring.constant(&lifted)
            } else {
                ring.zero()
            };
            worst = worst.min(ring.val(&ring.sub(x, &want)));
        }
    }
    let need = plan.precision + 2 * plan.lift;
    checks.push(Check::new(
        "fundamental_solution",
        worst >= need,
        format!("Y Y^-1 = 1 mod gamma^{}", worst - 2 * plan.lift),
    ));

    let shift = ring.sub(&ring.pow(&lambda, p), &ring.constant(&lambda0));
    let y_phi: SMat = y
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| ring.compose(x, &shift))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let transition = mat_mul(&ring, &mat_mul(&ring, &y_phi, &frobenius), &y_inv);
    let mut worst = i64::MAX;
    let mut prec = i64::MAX;
    for x in transition.iter().flatten() {
        for c in &x.coeffs[1..] {
            worst = worst.min(ctx.val(c));
            prec = prec.min(c.prec);
        }
    }
    if prec < need {
        return Err(Error::PrecisionInsufficient(format!(
            "transition coefficients known to gamma^{}, need {}",
            prec - 2 * plan.lift,
            plan.precision
        )));
    }
    checks.push(Check::new(
        "frobenius_structure",
        worst >= need,
        format!(
            "mu^1..mu^{} of M vanish mod gamma^{}, target {}",
            mu_cap - 1,
            worst.min(prec) - 2 * plan.lift,
            plan.precision
        ),
    ));

    let worst = derivative_residual(&ring, n, p as i64, &lambda, &frobenius);
    checks.push(Check::new(
        "frobenius_derivative",
        worst >= plan.precision,
        format!("lambda A' - A G + p G^phi A = 0 mod gamma^{worst}"),
    ));

    let base = &frobenius;
    let a00 = &base[0][0].coeffs[0];
    let diag_ok =
        ctx.eq_mod(a00, &ctx.one(), 1) && (1..=n).all(|i| ctx.val(&base[i][i].coeffs[0]) >= 1);
    checks.push(Check::new(
        "base_point_diagonal",
        diag_ok,
        format!("A(lambda_0)[0][0] = 1 mod gamma, ord of later diagonal entries >= 1"),
    ));

    Ok(StructureReport {
        ctx: ctx.clone(),
        plan,
        frobenius,
        transition,
        checks,
    })
}

/// Lowest gamma-order in `lambda A' - A G(lambda) + k G(lambda^p) A`
/// below the top `mu` power; constancy of `M` is the case `k = p`.
fn derivative_residual(
    ring: &LambdaRing,
    n: usize,
    k: i64,
    lambda: &LambdaSeries,
    frobenius: &SMat,
) -> i64 {
    let ctx = ring.ctx;
    let p = ctx.p();
    let g_at = |arg: &LambdaSeries| -> SMat {
        let c = ring.mul_gamma_pow(arg, n as u64 + 1);
        (0..=n)
            .map(|i| {
                (0..=n)
                    .map(|j| match (i, j) {
                        (0, j) if j == n => c.clone(),
                        (i, j) if i == j + 1 => ring.one(),
                        _ => ring.zero(),
                    })
                    .collect()
            })
            .collect()
    };
    let deriv: SMat = frobenius
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| ring.mul(lambda, &mu_derivative(ring, x)))
                .collect()
        })
        .collect();
    let rhs = mat_add(
        ring,
        &mat_mul(ring, frobenius, &g_at(lambda)),
        &mat_scale(
            ring,
            &mat_mul(ring, &g_at(&ring.pow(lambda, p)), frobenius),
            &ring.from_int(-k),
        ),
    );
    let mut worst = i64::MAX;
    for (x, y) in deriv.iter().flatten().zip(rhs.iter().flatten()) {
        let d = ring.sub(x, y);
        for c in &d.coeffs[..ring.cap - 1] {
            worst = worst.min(ctx.val(c).min(c.prec));
        }
    }
    worst
}

/// `d/dmu`.
fn mu_derivative(ring: &LambdaRing, x: &LambdaSeries) -> LambdaSeries {
    let ctx = ring.ctx;
    let mut out = ring.zero();
    for r in 1..x.coeffs.len() {
        out.coeffs[r - 1] = ctx.scale_int(&x.coeffs[r], r as i64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_one_decay() {
        for p in [3u64, 5] {
            let ctx = construct_gamma(&build_field(p, 1, 24).unwrap(), 40).unwrap();
            let pm = ctx.cfg().pm();
            let depth = 60;
            let beta = series_mul(
                &ctx,
                &exp_monomial(&ctx, 1, 1, depth).unwrap(),
                &exp_monomial(&ctx, pm - 1, p as usize, depth).unwrap(),
            );
            for (i, b) in beta.iter().enumerate() {
                let bound = theta_one_bound(p, i).min(b.prec);
                assert!(
                    ctx.val(b) >= bound,
                    "p={p} i={i} val {} bound {bound}",
                    ctx.val(b)
                );
            }
        }
    }

    #[test]
    fn plan_shape() {
        let plan = StructurePlan::new(3, 4, 4).unwrap();
        assert_eq!(plan.lift, 2);
        assert!(plan.pair_weight >= 10);
        assert!(StructurePlan::new(2, 4, 4).is_err());
    }

    #[test]
    fn constant_at_base_point() {
        let rep = frobenius_structure_check(3, 1, 1, 4, 4).unwrap();
        for c in &rep.checks {
            assert!(c.pass, "{c:?}");
        }
        // A itself moves with lambda
        let ctx = &rep.ctx;
        assert!(rep
            .frobenius
            .iter()
            .flatten()
            .any(|x| ctx.val(&x.coeffs[1]) < rep.plan.precision));
        // dropping the factor p from G(lambda^p) breaks the identity
        let ring = LambdaRing::new(ctx, 4);
        let lam = ring.add(
            &ring.constant(&ctx.teichmuller(1)),
            &ring.monomial(1, &ctx.one()),
        );
        assert!(derivative_residual(&ring, 1, 3, &lam, &rep.frobenius) >= 4);
        assert!(derivative_residual(&ring, 1, 1, &lam, &rep.frobenius) < 4);
    }

    #[test]
    fn base_point_matches_primal_char_poly() {
        use crate::frobenius::char_poly;
        use crate::pipeline::{build_setup, context_for, RunParams};
        let rep = frobenius_structure_check(3, 1, 1, 4, 2).unwrap();
        let params = RunParams::new(3, 1, 1, 1);
        let primal = build_setup(&params, None)
            .unwrap()
            .frobenius_matrix()
            .unwrap();
        let pctx = context_for(&params).unwrap();
        let ours = char_poly(&rep.ctx, &rep.frobenius_at_base());
        let theirs = char_poly(&pctx, &primal);
        for (x, y) in ours.iter().zip(&theirs) {
            let y = rep.ctx.from_digits(&pctx.to_digits(y)).unwrap();
            assert!(
                rep.ctx.eq_mod(x, &y, 4),
                "{:?} vs {:?}",
                rep.ctx.to_digits(x),
                rep.ctx.to_digits(&y)
            );
        }
    }
}
