//! Dual series, the pairing, and the dual basis of the first-order kernel.
//!
//! A dual series stores `xi*(u)`, the coefficient of `gamma^{-w(u)} x^{-u}`.
//! Multiplication by a Laurent monomial is self-adjoint for the pairing, so
//! the adjoint of `D_l` is `-E_l` plus the same multiplication operators.

use super::lambda::{LambdaRing, LambdaSeries};
use crate::error::{Error, Result};
use crate::frobenius::operator::DTerm;
use crate::padic::ring::GammaRing;
use crate::padic::{zmod, EisensteinContext, RamifiedElem};
use crate::par;
use crate::weight::{Exp, Simplex, WeightedSeries};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct DualSeries<E> {
    pub terms: BTreeMap<Exp, E>,
    pub weight_cap: i64,
}

impl<E: Clone> DualSeries<E> {
    pub fn new(weight_cap: i64) -> Self {
        DualSeries {
            terms: BTreeMap::new(),
            weight_cap,
        }
    }
    pub fn monomial(u: Exp, c: E, weight_cap: i64) -> Self {
        let mut s = Self::new(weight_cap);
        s.terms.insert(u, c);
        s
    }
}

fn accumulate<R: GammaRing>(ring: &R, f: &mut DualSeries<R::Elem>, u: Exp, c: R::Elem) {
    match f.terms.get_mut(&u) {
        Some(old) => *old = ring.add(old, &c),
        None => {
            f.terms.insert(u, c);
        }
    }
}

/// `<f, g> = sum_u f(u) g(u)`.
pub fn pairing(
    ctx: &EisensteinContext,
    f: &WeightedSeries<RamifiedElem>,
    g: &DualSeries<RamifiedElem>,
) -> RamifiedElem {
    let mut acc = ctx.zero();
    for (u, a) in &f.terms {
        if let Some(b) = g.terms.get(u) {
            acc = ctx.add(&acc, &ctx.mul(a, b));
        }
    }
    acc
}

/// Multiplication by `c gamma^g x^s` on the dual side: index `u` moves to `u - s`.
pub fn dual_mul_monomial<R: GammaRing>(
    ring: &R,
    lat: &Simplex,
    xi: &DualSeries<R::Elem>,
    s: &Exp,
    c: &R::Elem,
    g: i64,
) -> Result<DualSeries<R::Elem>> {
    let mut out = DualSeries::new(xi.weight_cap);
    for (u, v) in &xi.terms {
        let u2 = u.sub(s);
        let e = g + lat.weight(&u2) - lat.weight(u);
        let t = ring.mul(v, c);
        let t = if e >= 0 {
            ring.mul_gamma_pow(&t, e as u64)
        } else {
            ring.div_gamma_pow(&t, (-e) as u64)?
        };
        accumulate(ring, &mut out, u2, t);
    }
    Ok(out)
}

/// `-E_l` on the dual side.
pub fn dual_euler<R: GammaRing>(
    ring: &R,
    l: usize,
    xi: &DualSeries<R::Elem>,
) -> DualSeries<R::Elem> {
    let mut out = DualSeries::new(xi.weight_cap);
    for (u, v) in &xi.terms {
        let ul = u.0[l - 1];
        if ul != 0 {
            out.terms.insert(*u, ring.scale_int(v, ul as i64));
        }
    }
    out
}

/// The single term of `D^(1)_l = E_l + gamma (x_l - lambda x^{-U})`.
pub fn first_order_terms(lambda: &RamifiedElem) -> Vec<DTerm> {
    vec![DTerm {
        m: 0,
        step: 1,
        ratio: 1,
        lambda_pow: lambda.coeffs[0].clone(),
    }]
}

/// `D_l^* = -E_l + sum_m c_m gamma^{p^m} (x_l^{p^m} - lambda^{p^m} x^{-p^m U})`.
/// Coefficients at `u'` are complete only when `w(u') + max p^m <= weight_cap`.
pub fn apply_dual_d(
    ctx: &EisensteinContext,
    lat: &Simplex,
    l: usize,
    terms: &[DTerm],
    xi: &DualSeries<RamifiedElem>,
) -> DualSeries<RamifiedElem> {
    let pm = ctx.cfg().pm();
    let mut out = dual_euler(ctx, l, xi);
    for t in terms {
        let cr = ctx.from_int(zmod::to_signed(t.ratio, pm));
        let s1 = lat.e(l).scale(t.step);
        let s2 = lat.big_u().scale(t.step);
        let c2 = ctx.neg(&ctx.mul_unram(&cr, &t.lambda_pow));
        for (s, c) in [(s1, cr.clone()), (s2, c2)] {
            // exponent step + w(u') - w(u) is never negative here
            let part =
                dual_mul_monomial(ctx, lat, xi, &s, &c, t.step as i64).expect("non-negative shift");
            for (u, v) in part.terms {
                accumulate(ctx, &mut out, u, v);
            }
        }
    }
    out
}

/// Dual basis of the kernel of all `D^(1)*_l`, written
/// `xi*_k(u) = lambda^{-m(u)} e_k(u)(Lambda)` with `Lambda = gamma^{n+1} lambda`
/// and `e_k(u)` a polynomial over `Z/p^D`, truncated below `Lambda^lambda_cap`.
#[derive(Clone, Debug)]
pub struct AlgebraicDualBasis {
    pub lat: Simplex,
    pub p: u64,
    pub pm: u64,
    pub weight_cap: i64,
    pub lambda_cap: usize,
    pub e: Vec<BTreeMap<Exp, Vec<u64>>>,
}

type Poly = Vec<u64>;

fn poly_axpy(acc: &mut Poly, c: u64, x: &Poly, shift: usize, pm: u64) {
    if c == 0 {
        return;
    }
    for r in shift..acc.len() {
        acc[r] = zmod::add(acc[r], zmod::mul(c, x[r - shift], pm), pm);
    }
}

/// Left inverse of an integer matrix over `Z/p^D`, using unit pivots.
fn left_inverse(c: &[Vec<u64>], cols: usize, p: u64, pm: u64) -> Result<Vec<Vec<u64>>> {
    let rows = c.len();
    let mut a: Vec<Vec<u64>> = c
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.resize(cols + rows, 0);
            v[cols + i] = 1;
            v
        })
        .collect();
    for col in 0..cols {
        let piv = (col..rows)
            .find(|&r| a[r][col] % p != 0)
            .ok_or_else(|| Error::Singular(format!("no unit pivot in column {col}")))?;
        a.swap(col, piv);
        let inv = zmod::inv(a[col][col], pm).expect("unit");
        for x in a[col].iter_mut() {
            *x = zmod::mul(*x, inv, pm);
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col] == 0 {
                continue;
            }
            let f = row[col];
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = zmod::sub(*x, zmod::mul(f, *y, pm), pm);
            }
        }
    }
    Ok(a.into_iter()
        .take(cols)
        .map(|r| r[cols..].to_vec())
        .collect())
}

impl AlgebraicDualBasis {
    /// Solve the relations weight by weight; every row not used for a pivot is
    /// checked and an inconsistency is an error.
    pub fn solve(
        lat: Simplex,
        p: u64,
        pm: u64,
        weight_cap: i64,
        lambda_cap: usize,
    ) -> Result<Self> {
        let n = lat.n;
        let r_cap = lambda_cap.max(1);
        let mut e: Vec<BTreeMap<Exp, Poly>> = (0..=n)
            .map(|k| {
                let mut c = vec![0; r_cap];
                c[0] = u64::from(k == 0);
                BTreeMap::from([(Exp::default(), c)])
            })
            .collect();
        for w in 0..weight_cap {
            let unknowns = lat.monomials_of_weight(w + 1);
            let index: BTreeMap<Exp, usize> =
                unknowns.iter().enumerate().map(|(i, u)| (*u, i)).collect();
            let mut mat: Vec<Vec<u64>> = Vec::new();
            // rhs[row][k]
            let mut rhs: Vec<Vec<Poly>> = Vec::new();
            for u in lat.monomials_of_weight(w) {
                for j in 1..=n {
                    let mut row = vec![0u64; unknowns.len()];
                    let mut b: Vec<Poly> = vec![vec![0; r_cap]; n + 1];
                    let uj = u.0[j - 1] as i64;
                    let up = u.add(&lat.e(j));
                    let dn = u.add(&lat.big_u());
                    for k in 0..=n {
                        poly_axpy(&mut b[k], zmod::from_i64(-uj, pm), &e[k][&u], 0, pm);
                    }
                    match index.get(&up) {
                        Some(&c) => row[c] = zmod::add(row[c], 1, pm),
                        None => {
                            (0..=n).for_each(|k| poly_axpy(&mut b[k], pm - 1, &e[k][&up], 1, pm))
                        }
                    }
                    match index.get(&dn) {
                        Some(&c) => row[c] = zmod::sub(row[c], 1, pm),
                        None => (0..=n).for_each(|k| poly_axpy(&mut b[k], 1, &e[k][&dn], 1, pm)),
                    }
                    mat.push(row);
                    rhs.push(b);
                }
            }
            if (w + 1) as usize <= n {
                let eps = lat.eps((w + 1) as usize);
                let mut row = vec![0u64; unknowns.len()];
                row[index[&eps]] = 1;
                mat.push(row);
                rhs.push(
                    (0..=n)
                        .map(|k| {
                            let mut c = vec![0; r_cap];
                            c[0] = u64::from(k == (w + 1) as usize);
                            c
                        })
                        .collect(),
                );
            }
            let linv = left_inverse(&mat, unknowns.len(), p, pm)?;
            let solved: Vec<Vec<Poly>> = par::map_range(n + 1, |k| {
                linv.iter()
                    .map(|lrow| {
                        let mut acc = vec![0; r_cap];
                        for (r, &c) in lrow.iter().enumerate() {
                            poly_axpy(&mut acc, c, &rhs[r][k], 0, pm);
                        }
                        acc
                    })
                    .collect()
            });
            for (r, row) in mat.iter().enumerate() {
                for k in 0..=n {
                    let mut acc = vec![0; r_cap];
                    for (c, &a) in row.iter().enumerate() {
                        poly_axpy(&mut acc, a, &solved[k][c], 0, pm);
                    }
                    if acc != rhs[r][k] {
                        return Err(Error::Singular(format!(
                            "relation {r} at weight {w} inconsistent for k = {k}"
                        )));
                    }
                }
            }
            for (k, sol) in solved.into_iter().enumerate() {
                for (u, x) in unknowns.iter().zip(sol) {
                    e[k].insert(*u, x);
                }
            }
        }
        Ok(AlgebraicDualBasis {
            lat,
            p,
            pm,
            weight_cap,
            lambda_cap: r_cap,
            e,
        })
    }

    /// Smallest `Lambda`-cap that resolves gamma-precision `prec`.
    pub fn lambda_cap_for(n: usize, prec: i64) -> usize {
        (prec.max(1) as usize).div_ceil(n + 1)
    }

    /// `xi*_k` at a unit `lambda`.
    pub fn numeric(
        &self,
        ctx: &EisensteinContext,
        lambda: &RamifiedElem,
        k: usize,
    ) -> Result<DualSeries<RamifiedElem>> {
        let big = ctx.mul_gamma_pow(lambda, self.lat.n as u64 + 1);
        let lam_inv = ctx.inv_unit(lambda)?;
        let mut out = DualSeries::new(self.weight_cap);
        for (u, poly) in &self.e[k] {
            let mut acc = ctx.zero();
            for &c in poly.iter().rev() {
                acc = ctx.add(
                    &ctx.mul(&acc, &big),
                    &ctx.from_int(zmod::to_signed(c, self.pm)),
                );
            }
            let m = self.lat.m(u);
            if m > 0 {
                acc = ctx.mul(&acc, &ctx.pow(&lam_inv, m as u64));
            }
            out.terms.insert(*u, acc);
        }
        Ok(out)
    }

    /// `lambda^{m(u)} xi*_k(u)` as a series in `lambda`; the pole stays implicit.
    pub fn symbolic(&self, ring: &LambdaRing, k: usize) -> DualSeries<LambdaSeries> {
        let ctx = ring.ctx;
        let step = self.lat.n as u64 + 1;
        let mut out = DualSeries::new(self.weight_cap);
        for (u, poly) in &self.e[k] {
            let coeffs: Vec<RamifiedElem> = poly
                .iter()
                .enumerate()
                .map(|(r, &c)| {
                    ctx.mul_gamma_pow(&ctx.from_int(zmod::to_signed(c, self.pm)), step * r as u64)
                })
                .collect();
            out.terms.insert(*u, ring.from_coeffs(&coeffs));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{build_field, construct_gamma};
    use proptest::prelude::*;

    fn ctx(p: u64, a: usize, digits: u32) -> EisensteinContext {
        let cfg = build_field(p, a, digits).unwrap();
        construct_gamma(&cfg, (p as i64 - 1) * (digits as i64 - 2)).unwrap()
    }

    fn basis(c: &EisensteinContext, n: usize, w: i64) -> AlgebraicDualBasis {
        let lat = Simplex::new(n).unwrap();
        let r = AlgebraicDualBasis::lambda_cap_for(n, c.cap());
        AlgebraicDualBasis::solve(lat, c.p(), c.cfg().pm(), w, r).unwrap()
    }

    #[test]
    fn n1_closed_form() {
        // u e(u) + e(u+1) - Lambda e(u-1) = 0 for u >= 1 gives (-1)^{u-1}(u-1)! at Lambda^0 for k = 1
        let c = ctx(5, 1, 12);
        let b = basis(&c, 1, 8);
        let mut f = 1i64;
        for u in 1..=8i32 {
            if u > 1 {
                f *= -(u as i64 - 1);
            }
            let got = zmod::to_signed(b.e[1][&Exp::from_slice(&[u])][0], b.pm);
            assert_eq!(got, f, "u={u}");
        }
        assert_eq!(b.e[1][&Exp::from_slice(&[-1])][0], 1);
    }

    #[test]
    fn gram_and_kernel() {
        for (p, a, n, lam) in [
            (3u64, 1usize, 1usize, 1u32),
            (2, 1, 2, 1),
            (3, 2, 2, 5),
            (5, 1, 1, 3),
        ] {
            let c = ctx(p, a, 10);
            let w = 7;
            let b = basis(&c, n, w);
            let lambda = c.teichmuller(lam);
            let lat = b.lat;
            let terms = first_order_terms(&lambda);
            for k in 0..=n {
                let xi = b.numeric(&c, &lambda, k).unwrap();
                for i in 0..=n {
                    let f = WeightedSeries::monomial(lat.eps(i), c.one(), w);
                    let want = if i == k { c.one() } else { c.zero() };
                    assert!(c.eq_mod(&pairing(&c, &f, &xi), &want, c.cap()));
                }
                for l in 1..=n {
                    let r = apply_dual_d(&c, &lat, l, &terms, &xi);
                    for (u, v) in &r.terms {
                        if lat.weight(u) < w {
                            assert!(c.is_zero(v), "p={p} n={n} k={k} l={l} u={u:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn symbolic_orders() {
        let c = ctx(3, 1, 12);
        let b = basis(&c, 2, 6);
        let ring = LambdaRing::new(&c, b.lambda_cap);
        for k in 0..=2 {
            for s in b.symbolic(&ring, k).terms.values() {
                for (r, o) in ring.orders(s).into_iter().enumerate() {
                    assert!(o >= 3 * r as i64);
                }
            }
        }
    }

    #[test]
    fn pairing_basics() {
        let c = ctx(3, 1, 8);
        let u = Exp::from_slice(&[2, -1]);
        let f = WeightedSeries::monomial(u, c.one(), 6);
        assert_eq!(
            pairing(&c, &f, &DualSeries::monomial(u, c.one(), 6)),
            c.one()
        );
        let v = Exp::from_slice(&[1, 1]);
        assert!(c.is_zero(&pairing(&c, &f, &DualSeries::monomial(v, c.one(), 6))));
    }

    fn primal_mul(
        c: &EisensteinContext,
        lat: &Simplex,
        f: &WeightedSeries<RamifiedElem>,
        s: &Exp,
        g: i64,
    ) -> WeightedSeries<RamifiedElem> {
        let mut out = WeightedSeries::new(f.weight_cap);
        for (u, v) in &f.terms {
            let u2 = u.add(s);
            let e = g + lat.weight(u) - lat.weight(&u2);
            let t = if e >= 0 {
                c.mul_gamma_pow(v, e as u64)
            } else {
                c.div_gamma_pow(v, (-e) as u64).unwrap()
            };
            crate::weight::add_term(c, &mut out, u2, t);
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn adjoint_pairs(
            fu in proptest::collection::vec((-3i32..4, -3i32..4, -20i64..20), 1..6),
            gu in proptest::collection::vec((-3i32..4, -3i32..4, -20i64..20), 1..6),
            s in (-2i32..3, -2i32..3),
            l in 1usize..3,
        ) {
            let c = ctx(3, 1, 10);
            let lat = Simplex::new(2).unwrap();
            let mut f = WeightedSeries::new(20);
            for (a, b, v) in fu {
                crate::weight::add_term(&c, &mut f, Exp::from_slice(&[a, b]), c.from_int(v));
            }
            let mut g = DualSeries::new(20);
            for (a, b, v) in gu {
                accumulate(&c, &mut g, Exp::from_slice(&[a, b]), c.from_int(v));
            }
            // Euler
            let mut ef = WeightedSeries::new(20);
            for (u, v) in &f.terms {
                ef.terms.insert(*u, c.scale_int(v, u.0[l - 1] as i64));
            }
            // dual_euler is -E_l in dual coordinates
            let lhs = pairing(&c, &ef, &g);
            prop_assert!(c.eq_mod(&lhs, &pairing(&c, &f, &dual_euler(&c, l, &g)), c.cap()));
            // monomial multiplication
            let s = Exp::from_slice(&[s.0, s.1]);
            let g_shift = lat.weight(&s);
            let lhs = pairing(&c, &primal_mul(&c, &lat, &f, &s, g_shift), &g);
            let rhs = pairing(&c, &f, &dual_mul_monomial(&c, &lat, &g, &s, &c.one(), g_shift).unwrap());
            prop_assert!(c.eq_mod(&lhs, &rhs, c.cap() - 2 * g_shift));
        }
    }
}
