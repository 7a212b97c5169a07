//! End-to-end runs: oracle L-polynomial against `det(I - T alpha_0)`.

use crate::error::{Error, Result};
use crate::ff::{oracle, FfElem};
use crate::frobenius::{
    char_poly, embed_cyclotomic, frobenius_linearize, newton_slopes, splitting_table,
    verify_cochain_estimates, verify_matrix_estimates, verify_unit_congruences, Check, FrobMatrix,
    FrobeniusSetup,
};
use crate::padic::{build_field, construct_gamma, GammaDigits, RamifiedElem};
use serde::Serialize;

/// Parameters of one `(n, p, a, lambda)` run; `None` picks the default.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunParams {
    pub p: u64,
    pub a: usize,
    pub n: usize,
    pub lambda: FfElem,
    /// Comparison precision `N` in gamma-units.
    pub precision: Option<i64>,
    pub weight_cap: Option<i64>,
}

/// Perturbation `b_index += gamma^gamma_power` of the Frobenius-side splitting table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Fault {
    pub b_index: usize,
    pub gamma_power: u64,
}

impl RunParams {
    pub fn new(p: u64, a: usize, n: usize, lambda: FfElem) -> Self {
        RunParams {
            p,
            a,
            n,
            lambda,
            precision: None,
            weight_cap: None,
        }
    }
    /// `4(p-1)` unless overridden.
    pub fn comparison_precision(&self) -> i64 {
        self.precision.unwrap_or(4 * (self.p as i64 - 1))
    }
    /// Enough to resolve the last Newton vertex and the unit congruences.
    pub fn working_precision(&self) -> i64 {
        let e = self.p as i64 - 1;
        let top = (self.a as i64) * e * (self.n * (self.n + 1) / 2) as i64 + 1;
        self.comparison_precision()
            .max(top)
            .max(e * self.n as i64 + 1)
    }
    pub fn weight(&self) -> i64 {
        self.weight_cap
            .unwrap_or(self.working_precision() + self.n as i64 + 1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LFunctionReport {
    pub params: RunParams,
    pub comparison_precision: i64,
    pub working_precision: i64,
    pub weight_cap: i64,
    /// Coefficient `k` of the oracle polynomial as counts of `zeta^0..zeta^{p-1}`.
    pub oracle: Vec<Vec<i64>>,
    pub char_poly: Vec<GammaDigits>,
    /// `ord_gamma(c_k - oracle_k)` capped at the certificate.
    pub agreement: Vec<i64>,
    pub slopes: Option<Vec<String>>,
    pub checks: Vec<Check>,
    /// Stage blamed for the first failing check.
    pub failed_stage: Option<String>,
    #[serde(skip)]
    pub frobenius: Option<FrobMatrix>,
    #[serde(skip)]
    pub char_poly_elems: Vec<RamifiedElem>,
}

impl LFunctionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn build_setup(params: &RunParams, fault: Option<Fault>) -> Result<FrobeniusSetup> {
    let n_work = params.working_precision();
    let w = params.weight();
    let mut setup = FrobeniusSetup::new(params.p, params.a, params.n, params.lambda, n_work, w)?;
    if let Some(f) = fault {
        let ctx = &setup.ctx;
        let mut table = setup.splitting.clone();
        let bump = ctx.gamma_pow(f.gamma_power);
        let x = table.get(ctx, f.b_index)?;
        if f.b_index < table.b.len() {
            table.b[f.b_index] = ctx.with_prec(&ctx.add(&x, &bump), table.precision);
        }
        setup = FrobeniusSetup::with_splitting(
            setup.ctx.clone(),
            setup.lat,
            params.lambda,
            n_work,
            w,
            table,
        )?;
    }
    Ok(setup)
}

pub fn oracle_lpoly(params: &RunParams) -> Result<oracle::LPolynomial> {
    let cfg = build_field(params.p, params.a, 2)?;
    let s = oracle::power_sums(cfg.residue_field(), params.n, params.lambda, params.n + 1)?;
    oracle::lpoly_from_power_sums(&s, params.n)
}

/// Full comparison with every valuation check.
pub fn run_lfunction(params: &RunParams, fault: Option<Fault>) -> Result<LFunctionReport> {
    let n_cmp = params.comparison_precision();
    let setup = build_setup(params, fault)?;
    let ctx = &setup.ctx;
    let lpoly = oracle_lpoly(params)?;

    // zeta_p -> theta(1) from an untouched table
    let clean = splitting_table(ctx, setup.splitting.depth, setup.splitting.precision)?;
    let theta = ctx.with_prec(&clean.theta_at_one(ctx)?, setup.precision);
    let mut checks = Vec::new();
    let root_ok = ctx.eq_mod(&ctx.pow(&theta, params.p), &ctx.one(), setup.precision)
        && ctx.val(&ctx.sub(&theta, &ctx.one())) == 1;
    checks.push(Check::new("theta_root_of_unity", root_ok, ""));

    let (m, images) = setup.frobenius_with_images()?;
    for (i, img) in images.iter().enumerate() {
        checks.extend(verify_cochain_estimates(&setup, i, img));
    }
    checks.extend(verify_matrix_estimates(ctx, &m));
    let m0 = frobenius_linearize(ctx, &m);
    let cp = char_poly(ctx, &m0);

    let mut agreement = Vec::new();
    for (c, o) in cp.iter().zip(&lpoly.coefficients) {
        let e = embed_cyclotomic(ctx, &theta, o);
        agreement.push(ctx.val(&ctx.sub(c, &e)).min(c.prec));
    }
    let agree = cp.len() == lpoly.coefficients.len() && agreement.iter().all(|&v| v >= n_cmp);
    checks.push(Check::new(
        "oracle_agreement",
        agree,
        format!("orders {agreement:?}, need {n_cmp}"),
    ));

    let slopes = newton_slopes(ctx, &cp);
    let slope_ok = match &slopes {
        Ok(s) => s
            .iter()
            .enumerate()
            .all(|(i, x)| *x == num_rational::Ratio::from_integer(i as i64)),
        Err(_) => false,
    };
    checks.push(Check::new(
        "newton_slopes",
        slope_ok,
        match &slopes {
            Ok(s) => s
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            Err(e) => e.to_string(),
        },
    ));
    checks.extend(verify_unit_congruences(ctx, &cp, params.n));

    let failed_stage = checks
        .iter()
        .find(|c| !c.pass)
        .map(|c| stage_of(&c.name).to_string());
    Ok(LFunctionReport {
        params: params.clone(),
        comparison_precision: n_cmp,
        working_precision: setup.precision,
        weight_cap: setup.weight_cap,
        oracle: lpoly
            .coefficients
            .iter()
            .map(|c| c.counts().to_vec())
            .collect(),
        char_poly: cp.iter().map(|c| ctx.to_digits(c)).collect(),
        agreement,
        slopes: slopes
            .ok()
            .map(|s| s.iter().map(|x| x.to_string()).collect()),
        checks,
        failed_stage,
        frobenius: Some(m),
        char_poly_elems: cp,
    })
}

/// Re-run at `(N + extra, W + extra)` and compare every reported digit below the old certificate.
pub fn stability_check(params: &RunParams, extra: i64) -> Result<Check> {
    let base = run_lfunction(params, None)?;
    let mut bumped = params.clone();
    bumped.precision = Some(params.comparison_precision() + extra);
    bumped.weight_cap = Some(params.weight() + extra);
    let more = run_lfunction(&bumped, None)?;
    let ctx = context_for(&bumped)?;
    let mut changed = Vec::new();
    let old = base.frobenius.as_ref().expect("set by run_lfunction");
    let new = more.frobenius.as_ref().expect("set by run_lfunction");
    let old_ctx = context_for(params)?;
    for (j, (ro, rn)) in old.entries.iter().zip(&new.entries).enumerate() {
        for (i, (xo, xn)) in ro.iter().zip(rn).enumerate() {
            let xo = ctx.from_digits(&old_ctx.to_digits(xo))?;
            if !ctx.eq_mod(&xo, xn, xo.prec) {
                changed.push(format!("A[{j}][{i}]"));
            }
        }
    }
    for (k, (co, cn)) in base.char_poly.iter().zip(&more.char_poly).enumerate() {
        let (xo, xn) = (ctx.from_digits(co)?, ctx.from_digits(cn)?);
        if !ctx.eq_mod(&xo, &xn, co.prec) {
            changed.push(format!("c_{k}"));
        }
    }
    let detail = if changed.is_empty() {
        format!(
            "certificates {} -> {}",
            base.working_precision, more.working_precision
        )
    } else {
        format!("changed: {}", changed.join(", "))
    };
    Ok(Check::new("stability", changed.is_empty(), detail))
}

fn stage_of(check: &str) -> &'static str {
    if check.starts_with("theta") {
        "padic-core"
    } else {
        "frobenius-lift"
    }
}

/// Context matching the one `build_setup` uses, for decoding report digits.
pub fn context_for(params: &RunParams) -> Result<crate::padic::EisensteinContext> {
    let n_work = params.working_precision();
    let w = params.weight();
    let digits = crate::frobenius::operator::digits_for(params.p, n_work, w)?;
    let cfg = build_field(params.p, params.a, digits)?;
    construct_gamma(&cfg, n_work + w)
}

/// Reject malformed parameter sets before any work.
pub fn validate(params: &RunParams) -> Result<()> {
    if !crate::padic::zmod::is_prime(params.p) {
        return Err(Error::NotPrime(params.p));
    }
    if params.a == 0 {
        return Err(Error::InvalidParameter("a must be positive".into()));
    }
    if params.lambda == 0 {
        return Err(Error::ZeroLambda);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases_pass() {
        for (p, a, n, lam) in [
            (3u64, 1usize, 1usize, 1u32),
            (2, 1, 1, 1),
            (5, 1, 1, 2),
            (2, 1, 2, 1),
            (3, 2, 1, 4),
        ] {
            let r = run_lfunction(&RunParams::new(p, a, n, lam), None).unwrap();
            for c in r.checks.iter().filter(|c| !c.pass) {
                eprintln!("{p} {a} {n} {lam}: {} {}", c.name, c.detail);
            }
            assert!(
                r.passed(),
                "p={p} a={a} n={n} lambda={lam} agreement {:?}",
                r.agreement
            );
        }
    }

    #[test]
    fn p3_polynomial() {
        let params = RunParams::new(3, 1, 1, 1);
        let r = run_lfunction(&params, None).unwrap();
        assert_eq!(r.oracle, vec![vec![1, 0, 0], vec![-1, 0, 0], vec![3, 0, 0]]);
        let ctx = context_for(&params).unwrap();
        let want = [1i64, -1, 3];
        for (c, w) in r.char_poly_elems.iter().zip(want) {
            assert!(ctx.eq_mod(c, &ctx.from_int(w), 8));
        }
        assert_eq!(r.slopes, Some(vec!["0".to_string(), "1".to_string()]));
    }

    #[test]
    fn fault_attribution() {
        let params = RunParams::new(3, 1, 1, 1);
        let r = run_lfunction(
            &params,
            Some(Fault {
                b_index: 2,
                gamma_power: 2,
            }),
        )
        .unwrap();
        assert!(!r.check("oracle_agreement").unwrap().pass);
        assert_eq!(r.failed_stage.as_deref(), Some("frobenius-lift"));
        let r = run_lfunction(
            &params,
            Some(Fault {
                b_index: 2,
                gamma_power: 8,
            }),
        )
        .unwrap();
        assert!(r.passed());
    }

    #[test]
    fn stable_under_more_precision() {
        for (p, a, n) in [(2u64, 1usize, 1usize), (3, 1, 1)] {
            let c = stability_check(&RunParams::new(p, a, n, 1), 2).unwrap();
            assert!(c.pass, "{}", c.detail);
        }
    }

    #[test]
    fn validation() {
        assert_eq!(
            validate(&RunParams::new(4, 1, 1, 1)),
            Err(Error::NotPrime(4))
        );
        assert_eq!(
            validate(&RunParams::new(3, 1, 1, 0)),
            Err(Error::ZeroLambda)
        );
        assert!(validate(&RunParams::new(3, 1, 1, 2)).is_ok());
    }
}
