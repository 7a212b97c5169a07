//! Acceptance criteria 1-9, one line each. Runs without the libtest harness so
//! the lines always show; exits non-zero if any criterion fails.

use hkl::charp::GradedDivisionTable;
use hkl::dual::{
    frobenius_structure_check, frobenius_via_duality, local_solution, ode_residual_check,
    rederive_connection, symplectic_check, AlgebraicDualBasis,
};
use hkl::ff::{oracle, FFField, FfElem};
use hkl::padic::{build_field, EisensteinContext, RamifiedElem};
use hkl::pipeline::{
    build_setup, context_for, run_lfunction, stability_check, Fault, LFunctionReport, RunParams,
};
use hkl::weight::{GradedPoly, Simplex};
use std::collections::BTreeMap;
use std::time::Instant;

/// Comparison precision `N = 4(p-1)` in gamma-units.
fn n_of(p: u64) -> i64 {
    4 * (p as i64 - 1)
}
/// Duality agreement is required mod `gamma^{N - DUAL_SLACK}`.
const DUAL_SLACK: i64 = 2;
/// Deformation: `lambda`-order of the local solutions, `mu`-order and gamma-precision of the structure check.
const ODE_ORDER: usize = 8;
const STRUCTURE_ORDER: usize = 4;
fn structure_precision(p: u64) -> i64 {
    2 * (p as i64 - 1)
}
/// Char-p suite: weights up to this, at least this many round-trips.
const CHARP_WEIGHT: i64 = 10;
const CHARP_ROUND_TRIPS: usize = 1000;
const CHARP_PER_CASE: usize = 150;

/// `1` and `-1` in `F_p`.
fn lambdas(p: u64) -> Vec<FfElem> {
    if p == 2 {
        vec![1]
    } else {
        vec![1, (p - 1) as FfElem]
    }
}
const STABILITY_EXTRA: i64 = 2;
const FAULT_INDEX: usize = 2;
const FAULT_COARSE: u64 = 2;

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: impl Into<String>) -> Line {
    Line {
        pass,
        detail: detail.into(),
    }
}

/// `(n, p, a)` grid with up to three nonzero lambdas each.
fn grid() -> Vec<RunParams> {
    let mut shapes = Vec::new();
    for p in [2u64, 3, 5, 7] {
        for a in [1usize, 2] {
            shapes.push((1usize, p, a));
        }
    }
    shapes.extend([(2, 2, 1), (2, 3, 1), (3, 2, 1)]);
    let mut out = Vec::new();
    for (n, p, a) in shapes {
        let q = p.pow(a as u32);
        for lambda in 1..q.min(4) {
            out.push(RunParams::new(p, a, n, lambda as FfElem));
        }
    }
    out
}

/// Count vector of `sum_x zeta^{x_1 + ... + x_n + lambda/(x_1...x_n)}` over `F_p`,
/// by direct enumeration with integers mod `p`.
fn brute_counts(p: u64, n: usize, lambda: u64) -> Vec<u64> {
    let inv = |x: u64| (1..p).find(|y| x * y % p == 1).unwrap();
    let mut counts = vec![0u64; p as usize];
    let mut x = vec![1u64; n];
    loop {
        let prod = x.iter().fold(1, |acc, v| acc * v % p);
        let t = (x.iter().sum::<u64>() + lambda * inv(prod)) % p;
        counts[t as usize] += 1;
        let mut k = 0;
        while k < n && x[k] == p - 1 {
            x[k] = 1;
            k += 1;
        }
        if k == n {
            return counts;
        }
        x[k] += 1;
    }
}

fn failing(rep: &LFunctionReport, prefix: &str) -> Vec<String> {
    rep.checks
        .iter()
        .filter(|c| c.name.starts_with(prefix) && !c.pass)
        .map(|c| c.name.clone())
        .collect()
}

fn label(r: &RunParams) -> String {
    format!("(n={}, p={}, a={}, lambda={})", r.n, r.p, r.a, r.lambda)
}

fn criterion_1(reports: &[(RunParams, LFunctionReport)]) -> Line {
    let mut bad = Vec::new();
    let mut min_order = i64::MAX;
    for (params, rep) in reports {
        let n = n_of(params.p);
        let worst = rep.agreement.iter().copied().min().unwrap_or(i64::MIN);
        min_order = min_order.min(worst - n);
        if worst < n
            || rep.comparison_precision != n
            || !failing(rep, "oracle_agreement").is_empty()
        {
            bad.push(label(params));
        }
        if params.a == 1 && params.n <= 2 {
            let field = FFField::new(params.p, 1).unwrap();
            let lib = oracle::kloosterman_counts(&field, params.n, params.lambda).unwrap();
            if lib != brute_counts(params.p, params.n, params.lambda as u64) {
                bad.push(format!("{} counts", label(params)));
            }
        }
    }
    line(
        bad.is_empty(),
        format!(
            "{} cases, agreement exceeds N by >= {min_order}; failures {bad:?}",
            reports.len()
        ),
    )
}

fn criterion_from_checks(
    reports: &[(RunParams, LFunctionReport)],
    prefixes: &[&str],
    what: &str,
) -> Line {
    let mut bad = Vec::new();
    let mut count = 0;
    for (params, rep) in reports {
        for pre in prefixes {
            count += rep
                .checks
                .iter()
                .filter(|c| c.name.starts_with(pre))
                .count();
            for name in failing(rep, pre) {
                bad.push(format!("{} {name}", label(params)));
            }
        }
    }
    line(
        bad.is_empty() && count > 0,
        format!("{count} {what} checks; failures {bad:?}"),
    )
}

fn agreement_order(
    dctx: &EisensteinContext,
    dual: &[Vec<RamifiedElem>],
    pctx: &EisensteinContext,
    primal: &[Vec<RamifiedElem>],
) -> i64 {
    let mut worst = i64::MAX;
    for (rd, rp) in dual.iter().zip(primal) {
        for (xd, xp) in rd.iter().zip(rp) {
            let xp = dctx.from_digits(&pctx.to_digits(xp)).unwrap();
            let diff = dctx.sub(xd, &xp);
            worst = worst.min(dctx.val(&diff).min(diff.prec));
        }
    }
    worst
}

fn criterion_5() -> Line {
    let mut cases = Vec::new();
    for (n, p, a) in [(1usize, 2u64, 1usize), (1, 3, 1), (2, 2, 1)] {
        cases.push(RunParams::new(p, a, n, 1));
        if p.pow(a as u32) > 2 {
            cases.push(RunParams::new(p, a, n, 2));
        }
    }
    let mut bad = Vec::new();
    let mut orders = Vec::new();
    for params in &cases {
        let need = n_of(params.p) - DUAL_SLACK;
        let primal = build_setup(params, None)
            .unwrap()
            .frobenius_matrix()
            .unwrap();
        let pctx = context_for(params).unwrap();
        match frobenius_via_duality(
            params.p,
            params.a,
            params.n,
            params.lambda,
            params.working_precision(),
        ) {
            Ok(rep) => {
                let got =
                    agreement_order(&rep.setup.ctx, &rep.matrix.entries, &pctx, &primal.entries);
                orders.push(got);
                if got < need || rep.matrix.certified < need || primal.certified < need {
                    bad.push(format!("{} agrees to {got}, need {need}", label(params)));
                }
            }
            Err(e) => bad.push(format!("{}: {e}", label(params))),
        }
    }
    line(
        bad.is_empty(),
        format!(
            "{} cases, agreement orders {orders:?}; failures {bad:?}",
            cases.len()
        ),
    )
}

/// Leading-form product: `x^a x^b = x^{a+b}` when weights add, else 0.
fn leading_mul(lat: &Simplex, field: &FFField, f: &GradedPoly, g: &GradedPoly) -> GradedPoly {
    let mut out = GradedPoly::default();
    for (a, &ca) in &f.terms {
        for (b, &cb) in &g.terms {
            let s = a.add(b);
            if lat.weight(&s) == lat.weight(a) + lat.weight(b) {
                out.add_term(field, s, field.mul(ca, cb));
            }
        }
    }
    out
}

fn criterion_6() -> Line {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut trips = 0usize;
    for n in 1..=3usize {
        for p in [2u64, 3, 5] {
            let lat = Simplex::new(n).unwrap();
            let field = FFField::new(p, 1).unwrap();
            for lambda in lambdas(p) {
                let table = GradedDivisionTable::new(lat.clone(), field.clone(), lambda).unwrap();
                for row in table.acyclicity_ranks(CHARP_WEIGHT) {
                    let want = usize::from(row.weight <= n as i64);
                    if row.coker_dim != want {
                        bad.push(format!(
                            "n={n} p={p} lambda={lambda} weight {} coker {}",
                            row.weight, row.coker_dim
                        ));
                    }
                }
                for u in lat
                    .monomials_up_to(CHARP_WEIGHT)
                    .into_iter()
                    .take(CHARP_PER_CASE)
                {
                    trips += 1;
                    let q = match table.graded_divide(&u) {
                        Ok(q) => q,
                        Err(e) => {
                            bad.push(format!("n={n} p={p} {}: {e}", lat.fmt_exp(&u)));
                            continue;
                        }
                    };
                    let i = lat.weight(&u);
                    let mut back = if i as usize <= n {
                        GradedPoly::monomial(lat.eps(i as usize), q.a)
                    } else {
                        GradedPoly::default()
                    };
                    for (j, xi) in q.xi.iter().enumerate() {
                        let mut h = GradedPoly::monomial(lat.e(j + 1), 1);
                        h.add_term(&field, lat.big_u(), field.neg(lambda));
                        back = back.add(&field, &leading_mul(&lat, &field, &h, xi));
                    }
                    if back != GradedPoly::monomial(u, 1) {
                        bad.push(format!("n={n} p={p} round trip at {}", lat.fmt_exp(&u)));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    line(
        bad.is_empty() && trips >= CHARP_ROUND_TRIPS && secs < 30.0,
        format!(
            "{trips} round trips, ranks to weight {CHARP_WEIGHT}, {secs:.1}s; failures {bad:?}"
        ),
    )
}

fn criterion_7() -> Line {
    let start = Instant::now();
    let p = 3u64;
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for n in [1usize, 2] {
        let plus = local_solution(n, 1, ODE_ORDER).unwrap();
        let minus = local_solution(n, -1, ODE_ORDER).unwrap();
        let mut checks = vec![
            ode_residual_check(&plus),
            ode_residual_check(&minus),
            symplectic_check(&plus, &minus),
        ];
        let cfg = build_field(p, 1, 12).unwrap();
        let basis = AlgebraicDualBasis::solve(
            Simplex::new(n).unwrap(),
            p,
            cfg.pm(),
            n as i64 + 4,
            ODE_ORDER,
        )
        .unwrap();
        checks.push(rederive_connection(&basis).unwrap().1);
        match frobenius_structure_check(p, n, 1, structure_precision(p), STRUCTURE_ORDER) {
            Ok(rep) => checks.extend(rep.checks),
            Err(e) => bad.push(format!("n={n} structure: {e}")),
        }
        for c in checks {
            if c.name == "frobenius_structure" {
                notes.push(format!("n={n} {}", c.detail));
            }
            if !c.pass {
                bad.push(format!("n={n} {}: {}", c.name, c.detail));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    line(
        bad.is_empty() && secs < 120.0,
        format!("{notes:?}, {secs:.1}s; failures {bad:?}"),
    )
}

fn criterion_8() -> Line {
    let smallest = RunParams::new(2, 1, 1, 1);
    match stability_check(&smallest, STABILITY_EXTRA) {
        Ok(c) => line(c.pass, format!("{}: {}", label(&smallest), c.detail)),
        Err(e) => line(false, e.to_string()),
    }
}

fn criterion_9() -> Line {
    let cases = [
        RunParams::new(2, 1, 1, 1),
        RunParams::new(3, 1, 1, 1),
        RunParams::new(2, 1, 2, 1),
    ];
    let mut bad = Vec::new();
    let mut flipped = Vec::new();
    for params in &cases {
        let fine = Fault {
            b_index: FAULT_INDEX,
            gamma_power: n_of(params.p) as u64,
        };
        match run_lfunction(params, Some(fine)) {
            Ok(rep) if rep.passed() => {}
            Ok(rep) => bad.push(format!(
                "gamma^N flipped {} {:?}",
                label(params),
                failing(&rep, "")
            )),
            Err(e) => bad.push(format!("{}: {e}", label(params))),
        }
        let coarse = Fault {
            b_index: FAULT_INDEX,
            gamma_power: FAULT_COARSE,
        };
        match run_lfunction(params, Some(coarse)) {
            Ok(rep) => {
                let oracle_failed = !failing(&rep, "oracle_agreement").is_empty();
                if oracle_failed {
                    flipped.push(label(params));
                    if rep.failed_stage.as_deref() != Some("frobenius-lift") {
                        bad.push(format!("{} blamed {:?}", label(params), rep.failed_stage));
                    }
                }
            }
            Err(e) => bad.push(format!("{}: {e}", label(params))),
        }
    }
    line(
        bad.is_empty() && !flipped.is_empty(),
        format!("gamma^2 fault flips oracle agreement at {flipped:?}; problems {bad:?}"),
    )
}

fn main() {
    let start = Instant::now();
    let grid = grid();
    let reports: Vec<(RunParams, LFunctionReport)> =
        hkl::par::map_slice(&grid, |r| (r.clone(), run_lfunction(r, None)))
            .into_iter()
            .map(|(r, rep)| {
                let rep = rep.unwrap_or_else(|e| panic!("{}: {e}", label(&r)));
                (r, rep)
            })
            .collect();
    let grid_secs = start.elapsed().as_secs_f64();

    let mut lines: BTreeMap<u32, (&str, Line)> = BTreeMap::new();
    let mut c1 = criterion_1(&reports);
    c1.detail.push_str(&format!(", {grid_secs:.1}s"));
    c1.pass &= grid_secs < 600.0;
    lines.insert(1, ("oracle equivalence", c1));
    lines.insert(
        2,
        (
            "newton polygon",
            criterion_from_checks(&reports, &["newton_slopes"], "slope"),
        ),
    );
    lines.insert(
        3,
        (
            "unit congruences",
            criterion_from_checks(&reports, &["unit_congruence_"], "congruence"),
        ),
    );
    lines.insert(
        4,
        (
            "matrix-form estimates",
            criterion_from_checks(&reports, &["cochain_", "matrix_"], "estimate"),
        ),
    );
    lines.insert(5, ("dual/primal agreement", criterion_5()));
    lines.insert(6, ("char-p suite", criterion_6()));
    lines.insert(7, ("deformation suite", criterion_7()));
    lines.insert(8, ("stability", criterion_8()));
    lines.insert(9, ("fault injection", criterion_9()));

    let mut all = true;
    for (k, (name, l)) in &lines {
        all &= l.pass;
        println!(
            "criterion {k} [{name}]: {} - {}",
            if l.pass { "PASS" } else { "FAIL" },
            l.detail
        );
    }
    println!(
        "acceptance: {} in {:.1}s",
        if all { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    if !all {
        std::process::exit(1);
    }
}
