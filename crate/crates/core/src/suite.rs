//! Check suites behind the command-line front end.

use crate::dual::{
    agreement_check, frobenius_structure_check, frobenius_via_duality, local_solution,
    ode_residual_check, rederive_connection, symplectic_check, AlgebraicDualBasis,
};
use crate::error::Result;
use crate::ff::FfElem;
use crate::frobenius::Check;
use crate::padic::{build_field, GammaDigits};
use crate::pipeline::{
    context_for, run_lfunction, stability_check, validate, LFunctionReport, RunParams,
};
use crate::weight::Simplex;
use serde::Serialize;
use std::collections::BTreeMap;

/// Summary group a check belongs to.
pub fn group_of(name: &str) -> &str {
    const PREFIXES: [(&str, &str); 8] = [
        ("cochain_", "cochain_estimates"),
        ("matrix_", "matrix_estimates"),
        ("unit_congruence_", "unit_congruences"),
        ("ode_residual", "ode_residual"),
        ("frobenius_structure", "frobenius_structure"),
        ("frobenius_derivative", "frobenius_structure"),
        ("fundamental_solution", "frobenius_structure"),
        ("base_point_diagonal", "frobenius_structure"),
    ];
    PREFIXES
        .iter()
        .find(|(p, _)| name.starts_with(p))
        .map(|(_, g)| *g)
        .unwrap_or(name)
}

/// `group -> all checks in it passed`.
pub fn summarize(checks: &[Check]) -> BTreeMap<String, bool> {
    let mut out = BTreeMap::new();
    for c in checks {
        let e = out.entry(group_of(&c.name).to_string()).or_insert(true);
        *e &= c.pass;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformationReport {
    pub p: u64,
    pub a: usize,
    pub n: usize,
    pub lambda: FfElem,
    pub precision: i64,
    pub lambda_order: usize,
    pub checks: Vec<Check>,
    /// Why the Frobenius-structure part did not run, if it did not.
    pub skipped: Option<String>,
    /// `A(lambda_0)` when the structure check ran.
    pub base_frobenius: Option<Vec<Vec<GammaDigits>>>,
}

/// Connection re-derivation, local solutions, the symplectic identity and,
/// for `a = 1`, `p >= 3` and `lambda` in the prime field, the Frobenius
/// structure through `mu^{min(M, 4) - 1}`.
pub fn deformation_suite(
    p: u64,
    a: usize,
    n: usize,
    lambda: FfElem,
    precision: i64,
    lambda_order: usize,
) -> Result<DeformationReport> {
    validate(&RunParams::new(p, a, n, lambda))?;
    let lat = Simplex::new(n)?;
    let mut checks = Vec::new();

    let digits = (precision / (p as i64 - 1)) as u32 + 4;
    let cfg = build_field(p, 1, digits)?;
    let basis = AlgebraicDualBasis::solve(lat, p, cfg.pm(), n as i64 + 4, lambda_order.max(2))?;
    checks.push(rederive_connection(&basis)?.1);

    let plus = local_solution(n, 1, lambda_order)?;
    let minus = local_solution(n, -1, lambda_order)?;
    checks.push(ode_residual_check(&plus));
    checks.push(ode_residual_check(&minus));
    checks.push(symplectic_check(&plus, &minus));

    let mut skipped = None;
    let mut base_frobenius = None;
    if a != 1 || p < 3 || lambda as u64 >= p {
        skipped = Some("frobenius structure needs a = 1, p >= 3 and lambda in F_p".into());
    } else {
        let rep = frobenius_structure_check(p, n, lambda, precision, lambda_order.min(4))?;
        base_frobenius = Some(
            rep.frobenius_at_base()
                .entries
                .iter()
                .map(|r| r.iter().map(|x| rep.ctx.to_digits(x)).collect())
                .collect(),
        );
        checks.extend(rep.checks);
    }
    Ok(DeformationReport {
        p,
        a,
        n,
        lambda,
        precision,
        lambda_order,
        checks,
        skipped,
        base_frobenius,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub lfunction: LFunctionReport,
    pub deformation: DeformationReport,
    pub checks: Vec<Check>,
    pub summary: BTreeMap<String, bool>,
}

impl VerifyReport {
    /// Keep only checks whose name or group starts with `filter`.
    pub fn retain(&mut self, filter: &str) {
        self.checks
            .retain(|c| c.name.starts_with(filter) || group_of(&c.name).starts_with(filter));
        self.summary = summarize(&self.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Everything: the trace-formula comparison with its valuation checks,
/// stability under more precision, agreement with the duality-side matrix,
/// and the deformation suite.
pub fn verify_suite(params: &RunParams, lambda_order: usize) -> Result<VerifyReport> {
    validate(params)?;
    let lfunction = run_lfunction(params, None)?;
    let mut checks = lfunction.checks.clone();
    checks.push(stability_check(params, params.p as i64 - 1)?);

    let primal = lfunction.frobenius.as_ref().expect("set by run_lfunction");
    let dual = frobenius_via_duality(
        params.p,
        params.a,
        params.n,
        params.lambda,
        params.working_precision(),
    )?;
    checks.push(agreement_check(
        "duality_agreement",
        &dual.setup.ctx,
        &dual.matrix,
        &context_for(params)?,
        primal,
    )?);

    let deformation = deformation_suite(
        params.p,
        params.a,
        params.n,
        params.lambda,
        params.comparison_precision(),
        lambda_order,
    )?;
    checks.extend(deformation.checks.iter().cloned());
    let summary = summarize(&checks);
    Ok(VerifyReport {
        lfunction,
        deformation,
        checks,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups() {
        assert_eq!(group_of("cochain_lower_bound_col2"), "cochain_estimates");
        assert_eq!(group_of("ode_residual_-gamma"), "ode_residual");
        assert_eq!(group_of("symplectic"), "symplectic");
        let s = summarize(&[
            Check::new("unit_congruence_c0", true, ""),
            Check::new("unit_congruence_c1", false, ""),
        ]);
        assert_eq!(s["unit_congruences"], false);
    }

    #[test]
    fn deformation_small() {
        let rep = deformation_suite(3, 1, 1, 1, 4, 4).unwrap();
        assert!(rep.skipped.is_none());
        assert!(rep.checks.iter().all(|c| c.pass), "{:?}", rep.checks);
        let rep = deformation_suite(2, 1, 1, 1, 4, 4).unwrap();
        assert!(rep.skipped.is_some());
        assert!(rep.checks.iter().all(|c| c.pass));
    }

    #[test]
    fn verify_p3_n1() {
        let mut rep = verify_suite(&RunParams::new(3, 1, 1, 1), 4).unwrap();
        assert!(
            rep.passed(),
            "{:?}",
            rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
        );
        rep.retain("symplectic");
        assert_eq!(rep.checks.len(), 1);
    }
}
