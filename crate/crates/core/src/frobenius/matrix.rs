//! Frobenius on cohomology, its characteristic polynomial and the valuation checks.

use super::operator::FrobeniusSetup;
use crate::error::{Error, Result};
use crate::padic::{EisensteinContext, RamifiedElem};
use crate::par;
use crate::weight::WeightedSeries;
use num_rational::Ratio;
use serde::Serialize;

/// `entries[j][i] = A~(eps~_j, eps~_i)`, known mod `gamma^certified`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrobMatrix {
    pub entries: Vec<Vec<RamifiedElem>>,
    pub certified: i64,
    /// `alpha_1` (sigma^{-1}-semilinear) rather than `alpha_0`.
    pub semilinear: bool,
}

impl FrobMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }
}

/// One named pass/fail line of a verification report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

pub fn mat_mul(
    ctx: &EisensteinContext,
    x: &[Vec<RamifiedElem>],
    y: &[Vec<RamifiedElem>],
) -> Vec<Vec<RamifiedElem>> {
    let d = x.len();
    (0..d)
        .map(|r| {
            (0..d)
                .map(|c| {
                    let mut acc = ctx.zero();
                    for k in 0..d {
                        acc = ctx.add(&acc, &ctx.mul(&x[r][k], &y[k][c]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

impl FrobeniusSetup {
    /// Column `i` is the reduction of `alpha_1(eps~_i)`.
    pub fn frobenius_matrix(&self) -> Result<FrobMatrix> {
        let d = self.n() + 1;
        let cols = par::map_range(d, |i| {
            self.alpha1_image(i)
                .and_then(|f| self.cohomology_reduce(&f))
        });
        let mut entries = vec![Vec::with_capacity(d); d];
        let mut certified = self.precision;
        for col in cols {
            let col = col?;
            certified = certified.min(col.certified);
            for (j, c) in col.coords.into_iter().enumerate() {
                entries[j].push(c);
            }
        }
        Ok(FrobMatrix {
            entries,
            certified,
            semilinear: true,
        })
    }

    /// Reduce every `alpha_1(eps~_i)` and return the images alongside the matrix.
    pub fn frobenius_with_images(&self) -> Result<(FrobMatrix, Vec<WeightedSeries<RamifiedElem>>)> {
        let d = self.n() + 1;
        let images: Vec<_> = par::map_range(d, |i| self.alpha1_image(i))
            .into_iter()
            .collect::<Result<_>>()?;
        let cols = par::map_slice(&images, |f| self.cohomology_reduce(f));
        let mut entries = vec![Vec::with_capacity(d); d];
        let mut certified = self.precision;
        for col in cols {
            let col = col?;
            certified = certified.min(col.certified);
            for (j, c) in col.coords.into_iter().enumerate() {
                entries[j].push(c);
            }
        }
        Ok((
            FrobMatrix {
                entries,
                certified,
                semilinear: true,
            },
            images,
        ))
    }
}

/// Order in which sigma-conjugates are multiplied: `alpha_1^a` has matrix
/// `M sigma^{-1}(M) .. sigma^{-(a-1)}(M)`.
pub const LINEARIZE_LEFT_TO_RIGHT: bool = true;

/// Matrix of `alpha_0 = alpha_1^a`.
pub fn frobenius_linearize(ctx: &EisensteinContext, m: &FrobMatrix) -> FrobMatrix {
    let a = ctx.cfg().a();
    if !m.semilinear {
        return m.clone();
    }
    let conj = |k: usize| -> Vec<Vec<RamifiedElem>> {
        m.entries
            .iter()
            .map(|row| row.iter().map(|x| ctx.sigma(x, -(k as i64))).collect())
            .collect()
    };
    let mut acc = m.entries.clone();
    for k in 1..a {
        acc = if LINEARIZE_LEFT_TO_RIGHT {
            mat_mul(ctx, &acc, &conj(k))
        } else {
            mat_mul(ctx, &conj(k), &acc)
        };
    }
    FrobMatrix {
        entries: acc,
        certified: m.certified,
        semilinear: false,
    }
}

/// Coefficients of `det(I - T M)`, constant term first (Berkowitz, division free).
pub fn char_poly(ctx: &EisensteinContext, m: &FrobMatrix) -> Vec<RamifiedElem> {
    let a = &m.entries;
    let d = a.len();
    let mut poly = vec![ctx.one()];
    for j in (0..d).rev() {
        let k = d - j;
        // Toeplitz column [1, -a, -R C, -R A1 C, ..]
        let mut col = vec![ctx.one(), ctx.neg(&a[j][j])];
        let mut vec_c: Vec<RamifiedElem> = (j + 1..d).map(|r| a[r][j].clone()).collect();
        for _ in 0..k.saturating_sub(1) {
            let mut rc = ctx.zero();
            for (idx, r) in (j + 1..d).enumerate() {
                rc = ctx.add(&rc, &ctx.mul(&a[j][r], &vec_c[idx]));
            }
            col.push(ctx.neg(&rc));
            vec_c = (j + 1..d)
                .map(|r| {
                    let mut acc = ctx.zero();
                    for (idx, c) in (j + 1..d).enumerate() {
                        acc = ctx.add(&acc, &ctx.mul(&a[r][c], &vec_c[idx]));
                    }
                    acc
                })
                .collect();
        }
        let mut next = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let mut acc = ctx.zero();
            for l in 0..=i.min(k - 1) {
                acc = ctx.add(&acc, &ctx.mul(&col[i - l], &poly[l]));
            }
            next.push(acc);
        }
        poly = next;
    }
    poly.into_iter()
        .map(|c| ctx.with_prec(&c, m.certified))
        .collect()
}

/// Slopes of the lower Newton polygon of `sum c_k T^k` in `ord_q` units.
pub fn newton_slopes(ctx: &EisensteinContext, coeffs: &[RamifiedElem]) -> Result<Vec<Ratio<i64>>> {
    let unit = (ctx.e() * ctx.cfg().a()) as i64;
    let pts: Vec<(i64, i64, bool)> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let v = ctx.val(c);
            (k as i64, v, v < c.prec)
        })
        .collect();
    let last = pts.len() - 1;
    if last == 0 || !pts[0].2 || !pts[last].2 {
        return Err(Error::PrecisionInsufficient(
            "polygon endpoints not resolved".into(),
        ));
    }
    // hull over exactly known points
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &(k, v, known) in &pts {
        if !known {
            continue;
        }
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            if (y2 - y1) * (k - x1) >= (v - y1) * (x2 - x1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((k, v));
    }
    // unresolved points must lie on or above the hull
    for &(k, v, known) in &pts {
        if known {
            continue;
        }
        let seg = hull
            .windows(2)
            .find(|w| w[0].0 <= k && k <= w[1].0)
            .unwrap();
        let ((x1, y1), (x2, y2)) = (seg[0], seg[1]);
        if v * (x2 - x1) < y1 * (x2 - x1) + (y2 - y1) * (k - x1) {
            return Err(Error::PrecisionInsufficient(format!(
                "coefficient {k} could lie below the polygon"
            )));
        }
    }
    let mut slopes = Vec::new();
    for w in hull.windows(2) {
        let ((x1, y1), (x2, y2)) = (w[0], w[1]);
        let s = Ratio::new(y2 - y1, (x2 - x1) * unit);
        for _ in 0..(x2 - x1) {
            slopes.push(s);
        }
    }
    Ok(slopes)
}

/// `c_k = (-1)^k e_k(1, q, .., q^n)` modulo `gamma^{1 + ord e_k}` for every `k`.
pub fn verify_unit_congruences(
    ctx: &EisensteinContext,
    coeffs: &[RamifiedElem],
    n: usize,
) -> Vec<Check> {
    let q = ctx.cfg().q() as i64;
    let unit = (ctx.e() * ctx.cfg().a()) as i64;
    // prod (1 + q^i T)
    let mut e = vec![ctx.one()];
    let mut qi = ctx.one();
    for _ in 0..=n {
        let mut next = e.clone();
        next.push(ctx.zero());
        for k in 0..e.len() {
            next[k + 1] = ctx.add(&next[k + 1], &ctx.mul(&e[k], &qi));
        }
        e = next;
        qi = ctx.scale_int(&qi, q);
    }
    let mut out = Vec::new();
    for k in 0..=n + 1 {
        let want = if k % 2 == 1 {
            ctx.neg(&e[k])
        } else {
            e[k].clone()
        };
        let need = 1 + unit * (k * k.saturating_sub(1) / 2) as i64;
        let c = &coeffs[k];
        let got = ctx.val(&ctx.sub(c, &want)).min(c.prec);
        let pass = c.prec >= need && got >= need;
        out.push(Check::new(
            format!("unit_congruence_c{k}"),
            pass,
            format!(
                "ord(c_{k} - (-1)^{k} e_{k}) >= {got}, need {need}, certified {}",
                c.prec
            ),
        ));
    }
    out
}

/// Order estimates on `alpha_1` images (cochain level) for column `i`.
pub fn verify_cochain_estimates(
    setup: &FrobeniusSetup,
    i: usize,
    image: &WeightedSeries<RamifiedElem>,
) -> Vec<Check> {
    let ctx = &setup.ctx;
    let lat = &setup.lat;
    let e = ctx.e() as i64;
    let eps = lat.eps(i);
    let (mut lower_ok, mut strict_ok) = (true, true);
    let mut worst = String::new();
    for (v, c) in &image.terms {
        let w = lat.weight(v);
        let val = ctx.val(c);
        if val < (e * w).min(c.prec) {
            lower_ok = false;
            worst = format!("v={} ord {val} < {}", lat.fmt_exp(v), e * w);
        }
        if w <= i as i64 && *v != eps && val < (e * w + 1).min(c.prec) {
            strict_ok = false;
            worst = format!("v={} ord {val} <= {}", lat.fmt_exp(v), e * w);
        }
    }
    let diag = &image.terms[&eps];
    let diag_ok = diag.prec > e * i as i64
        && ctx.val(diag) == e * i as i64
        && ctx
            .div_p_pow(diag, i as u32)
            .map(|u| ctx.residue(&u) == 1)
            .unwrap_or(false);
    vec![
        Check::new(
            format!("cochain_lower_bound_col{i}"),
            lower_ok,
            worst.clone(),
        ),
        Check::new(format!("cochain_strict_col{i}"), strict_ok, worst),
        Check::new(
            format!("cochain_diagonal_col{i}"),
            diag_ok,
            format!("ord {}", ctx.val(diag)),
        ),
    ]
}

/// Order estimates of the matrix on cohomology; also the row-scaled unipotent shape.
pub fn verify_matrix_estimates(ctx: &EisensteinContext, m: &FrobMatrix) -> Vec<Check> {
    let e = ctx.e() as i64;
    let d = m.dim();
    let (mut lower, mut strict, mut diag) = (true, true, true);
    let mut detail = Vec::new();
    for j in 0..d {
        for i in 0..d {
            let x = &m.entries[j][i];
            let v = ctx.val(x);
            let b = e * j as i64;
            if v < b.min(x.prec) {
                lower = false;
                detail.push(format!("({j},{i}) ord {v} < {b}"));
            }
            if j < i && v < (b + 1).min(x.prec) {
                strict = false;
                detail.push(format!("({j},{i}) ord {v} <= {b}"));
            }
            if i == j {
                let ok = x.prec > b
                    && v == b
                    && ctx
                        .div_p_pow(x, j as u32)
                        .map(|u| ctx.residue(&u) == 1)
                        .unwrap_or(false);
                if !ok {
                    diag = false;
                    detail.push(format!("({j},{j}) not p^{j} times a 1-unit"));
                }
            }
        }
    }
    let shape = lower && strict && diag;
    let detail = detail.join("; ");
    vec![
        Check::new("matrix_lower_bound", lower, detail.clone()),
        Check::new("matrix_diagonal", diag, detail.clone()),
        Check::new("matrix_strict_upper", strict, detail.clone()),
        Check::new("matrix_row_scaled_unipotent", shape, detail),
    ]
}
