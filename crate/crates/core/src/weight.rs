//! Weights, conical coordinates and truncated Laurent series attached to the
//! simplex with vertices `e_1, .., e_n, U = (-1, .., -1)`.

use crate::error::{Error, Result};
use crate::ff::{FFField, FfElem};
use crate::padic::ring::GammaRing;
use crate::padic::{EisensteinContext, RamifiedElem};
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const MAX_N: usize = 8;

/// Exponent vector in `Z^n`, padded with zeros up to `MAX_N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Exp(pub [i32; MAX_N]);

impl Exp {
    pub fn from_slice(u: &[i32]) -> Self {
        assert!(u.len() <= MAX_N);
        let mut v = [0; MAX_N];
        v[..u.len()].copy_from_slice(u);
        Exp(v)
    }
    pub fn add(&self, o: &Exp) -> Exp {
        let mut v = self.0;
        for (a, b) in v.iter_mut().zip(o.0) {
            *a += b;
        }
        Exp(v)
    }
    pub fn sub(&self, o: &Exp) -> Exp {
        let mut v = self.0;
        for (a, b) in v.iter_mut().zip(o.0) {
            *a -= b;
        }
        Exp(v)
    }
    pub fn scale(&self, c: i32) -> Exp {
        Exp(self.0.map(|a| a * c))
    }
    pub fn neg(&self) -> Exp {
        self.scale(-1)
    }
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

/// Conical coordinates `u = nu_0 U + sum nu_j e_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConicalCoords {
    pub nu: Vec<u32>,
    /// Bit `j` set iff `nu_j > 0`.
    pub support: u32,
}

/// Ring context for exponents of `n` variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Simplex {
    pub n: usize,
}

impl Simplex {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::InvalidParameter(format!("n must be in 1..={MAX_N}")));
        }
        Ok(Simplex { n })
    }

    pub fn e(&self, j: usize) -> Exp {
        let mut v = [0; MAX_N];
        v[j - 1] = 1;
        Exp(v)
    }
    /// `U = (-1, .., -1)`.
    pub fn big_u(&self) -> Exp {
        let mut v = [0; MAX_N];
        v[..self.n].fill(-1);
        Exp(v)
    }
    /// `epsilon_i = x_1 .. x_i`.
    pub fn eps(&self, i: usize) -> Exp {
        let mut v = [0; MAX_N];
        v[..i].fill(1);
        Exp(v)
    }

    /// `m(u) = max(0, -u_1, .., -u_n)`.
    pub fn m(&self, u: &Exp) -> i64 {
        u.0[..self.n]
            .iter()
            .map(|&a| -(a as i64))
            .max()
            .unwrap()
            .max(0)
    }

    pub fn weight(&self, u: &Exp) -> i64 {
        let s: i64 = u.0[..self.n].iter().map(|&a| a as i64).sum();
        s + (self.n as i64 + 1) * self.m(u)
    }

    /// Weight as the maximum of the facet forms.
    pub fn weight_by_forms(&self, u: &Exp) -> i64 {
        let s: i64 = u.0[..self.n].iter().map(|&a| a as i64).sum();
        let n1 = self.n as i64 + 1;
        u.0[..self.n]
            .iter()
            .map(|&a| s - n1 * a as i64)
            .fold(s, i64::max)
    }

    pub fn conical(&self, u: &Exp) -> ConicalCoords {
        let m = self.m(u);
        let mut nu = vec![m as u32];
        nu.extend(u.0[..self.n].iter().map(|&a| (a as i64 + m) as u32));
        let support = nu
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .fold(0, |s, (j, _)| s | 1 << j);
        ConicalCoords { nu, support }
    }

    pub fn support(&self, u: &Exp) -> u32 {
        self.conical(u).support
    }

    pub fn same_cone(&self, u: &Exp, v: &Exp) -> bool {
        let full = (1u32 << (self.n + 1)) - 1;
        self.support(u) | self.support(v) != full
    }

    /// `u / p` when `p` divides every coordinate.
    pub fn psi(&self, u: &Exp, p: u64) -> Option<Exp> {
        let p = p as i32;
        if u.0.iter().all(|a| a % p == 0) {
            Some(Exp(u.0.map(|a| a / p)))
        } else {
            None
        }
    }

    /// All `u` with `w(u) = i`, in lexicographic order.
    pub fn monomials_of_weight(&self, i: i64) -> Vec<Exp> {
        let mut out = Vec::new();
        if i == 0 {
            return vec![Exp::default()];
        }
        let n = self.n;
        let mut nu = vec![0i64; n + 1];
        fn rec(k: usize, left: i64, nu: &mut Vec<i64>, n: usize, out: &mut Vec<Exp>) {
            if k == n {
                nu[n] = left;
                if nu.iter().any(|&v| v == 0) {
                    let mut v = [0; MAX_N];
                    for j in 0..n {
                        v[j] = (nu[j + 1] - nu[0]) as i32;
                    }
                    out.push(Exp(v));
                }
                return;
            }
            for x in 0..=left {
                nu[k] = x;
                rec(k + 1, left - x, nu, n, out);
            }
        }
        rec(0, i, &mut nu, n, &mut out);
        out.sort();
        out
    }

    /// All `u` with `w(u) <= w_max`, by weight then lexicographically.
    pub fn monomials_up_to(&self, w_max: i64) -> Vec<Exp> {
        (0..=w_max)
            .flat_map(|i| self.monomials_of_weight(i))
            .collect()
    }

    pub fn fmt_exp(&self, u: &Exp) -> String {
        let parts: Vec<String> = u.0[..self.n].iter().map(|a| a.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// `sum xi(u) gamma^{w(u)} x^u` truncated at weight `weight_cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSeries<E> {
    pub terms: BTreeMap<Exp, E>,
    pub weight_cap: i64,
}

impl<E: Clone> WeightedSeries<E> {
    pub fn new(weight_cap: i64) -> Self {
        WeightedSeries {
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

/// Accumulate `c` into `f` at `u`.
pub fn add_term<R: GammaRing>(ring: &R, f: &mut WeightedSeries<R::Elem>, u: Exp, c: R::Elem) {
    match f.terms.get_mut(&u) {
        Some(old) => *old = ring.add(old, &c),
        None => {
            f.terms.insert(u, c);
        }
    }
}

pub fn series_add<R: GammaRing>(
    ring: &R,
    f: &WeightedSeries<R::Elem>,
    g: &WeightedSeries<R::Elem>,
) -> WeightedSeries<R::Elem> {
    let mut out = WeightedSeries::new(f.weight_cap.min(g.weight_cap));
    for (u, c) in f.terms.iter().chain(&g.terms) {
        add_term(ring, &mut out, *u, c.clone());
    }
    out
}

pub fn series_scale<R: GammaRing>(
    ring: &R,
    f: &WeightedSeries<R::Elem>,
    c: &R::Elem,
) -> WeightedSeries<R::Elem> {
    WeightedSeries {
        terms: f.terms.iter().map(|(u, x)| (*u, ring.mul(x, c))).collect(),
        weight_cap: f.weight_cap,
    }
}

/// Product in the normalized basis `gamma^{w(u)} x^u`; terms above the common
/// weight cap are dropped.
pub fn series_multiply<R: GammaRing>(
    ring: &R,
    lat: &Simplex,
    f: &WeightedSeries<R::Elem>,
    g: &WeightedSeries<R::Elem>,
) -> Result<WeightedSeries<R::Elem>> {
    if f.weight_cap != g.weight_cap {
        return Err(Error::InvalidParameter("weight cap mismatch".into()));
    }
    let cap = f.weight_cap;
    let mut out = WeightedSeries::new(cap);
    for (u, x) in &f.terms {
        let wu = lat.weight(u);
        for (v, y) in &g.terms {
            let t = u.add(v);
            let wt = lat.weight(&t);
            if wt > cap {
                continue;
            }
            let shift = (wu + lat.weight(v) - wt) as u64;
            let c = ring.mul_gamma_pow(&ring.mul(x, y), shift);
            add_term(ring, &mut out, t, c);
        }
    }
    Ok(out)
}

/// One line per term: `u=(..) nu=(..) w=.. coeff=..`.
pub fn debug_dump<E: std::fmt::Debug>(lat: &Simplex, f: &WeightedSeries<E>) -> String {
    let mut s = String::new();
    for (u, c) in &f.terms {
        let nu = lat.conical(u).nu;
        let nu: Vec<String> = nu.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(
            s,
            "u={} nu=({}) w={} coeff={:?}",
            lat.fmt_exp(u),
            nu.join(","),
            lat.weight(u),
            c
        );
    }
    s
}

/// Element of the associated graded ring over `F_q`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GradedPoly {
    pub terms: BTreeMap<Exp, FfElem>,
}

impl GradedPoly {
    pub fn monomial(u: Exp, c: FfElem) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(u, c);
        }
        GradedPoly { terms }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn add_term(&mut self, f: &FFField, u: Exp, c: FfElem) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(u).or_insert(0);
        *e = f.add(*e, c);
        if *e == 0 {
            self.terms.remove(&u);
        }
    }
    pub fn add(&self, f: &FFField, o: &GradedPoly) -> GradedPoly {
        let mut out = self.clone();
        for (u, &c) in &o.terms {
            out.add_term(f, *u, c);
        }
        out
    }
    pub fn scale(&self, f: &FFField, c: FfElem) -> GradedPoly {
        let mut out = GradedPoly::default();
        for (u, &x) in &self.terms {
            out.add_term(f, *u, f.mul(x, c));
        }
        out
    }
    pub fn sub(&self, f: &FFField, o: &GradedPoly) -> GradedPoly {
        self.add(f, &o.scale(f, f.neg(1)))
    }
    /// Homogeneous weight, if all terms share one.
    pub fn weight(&self, lat: &Simplex) -> Option<i64> {
        let mut it = self.terms.keys().map(|u| lat.weight(u));
        let w = it.next()?;
        it.all(|x| x == w).then_some(w)
    }
    pub fn max_weight(&self, lat: &Simplex) -> Option<i64> {
        self.terms.keys().map(|u| lat.weight(u)).max()
    }
    /// Part of weight exactly `i`.
    pub fn piece(&self, lat: &Simplex, i: i64) -> GradedPoly {
        GradedPoly {
            terms: self
                .terms
                .iter()
                .filter(|(u, _)| lat.weight(u) == i)
                .map(|(u, c)| (*u, *c))
                .collect(),
        }
    }
}

/// Product in the associated graded ring: `x^u x^v = x^{u+v}` on a common
/// cone, zero otherwise.
pub fn graded_multiply(f: &FFField, lat: &Simplex, a: &GradedPoly, b: &GradedPoly) -> GradedPoly {
    let mut out = GradedPoly::default();
    for (u, &x) in &a.terms {
        for (v, &y) in &b.terms {
            if lat.same_cone(u, v) {
                out.add_term(f, u.add(v), f.mul(x, y));
            }
        }
    }
    out
}

/// Coefficientwise reduction mod `gamma`.
pub fn reduce_mod_gamma(ctx: &EisensteinContext, f: &WeightedSeries<RamifiedElem>) -> GradedPoly {
    let field = ctx.cfg().residue_field();
    let mut out = GradedPoly::default();
    for (u, c) in &f.terms {
        if c.prec > 0 {
            out.add_term(field, *u, ctx.residue(c));
        }
    }
    out
}
