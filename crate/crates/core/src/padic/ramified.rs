//! The totally ramified ring `O_0 = Z_q[gamma]`, `gamma^{p-1} = pi` with `pi in p Z_p^x`.
//!
//! Every element carries an absolute precision `prec` in gamma-units: it is
//! known modulo `gamma^prec`. Coordinates are kept reduced accordingly.

use super::unram::{PrimeConfig, UnramifiedElem};
use super::zmod;
use crate::error::{Error, Result};
use crate::ff::FfElem;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RamifiedElem {
    /// Coordinates on `1, gamma, .., gamma^{p-2}`.
    pub coeffs: Vec<UnramifiedElem>,
    /// Known modulo `gamma^prec`.
    pub prec: i64,
}

/// `gamma` as the class of `t` in `Z_q[t]/(t^{p-1} - pi)`.
#[derive(Clone, Debug)]
pub struct EisensteinContext {
    cfg: PrimeConfig,
    /// `gamma^{p-1}`, a `p`-adic integer of valuation one.
    pi: u64,
    /// `pi / p` and its inverse.
    s: u64,
    s_inv: u64,
    truncation_depth: u32,
    target: i64,
}

/// `(p^j - 1)/(p - 1)`.
fn rep_unit(p: u64, j: u32) -> u64 {
    (0..j).map(|i| p.pow(i)).sum()
}

/// Smallest `J` with `p^{J+1} - 1 - (J+1)(p-1) >= N + p`.
pub fn truncation_depth_for(p: u64, n: i64) -> u32 {
    let mut j = 1u32;
    loop {
        let lhs = (p as i128).pow(j + 1) - 1 - (j as i128 + 1) * (p as i128 - 1);
        if lhs >= (n + p as i64) as i128 {
            return j;
        }
        j += 1;
    }
}

/// Root of the exponent series `sum_j t^{p^j}/p^j` of order `1/(p-1)`, at
/// target gamma-adic precision `n`.
pub fn construct_gamma(cfg: &PrimeConfig, n: i64) -> Result<EisensteinContext> {
    let p = cfg.p();
    let m = cfg.digits();
    if n < 1 {
        return Err(Error::InvalidParameter(
            "target precision must be positive".into(),
        ));
    }
    let need = ((n + p as i64 - 2) / (p as i64 - 1)) as u32 + 2;
    if m < need {
        return Err(Error::PrecisionInsufficient(format!(
            "{m} digits, need {need} for gamma-adic target {n}"
        )));
    }
    let pm = cfg.pm();
    // pi = p s with s = -1 - sum_{j>=2} p^{e_j - j} s^{e_j}, e_j = (p^j-1)/(p-1);
    // terms with e_j - j >= M vanish.
    let rule = truncation_depth_for(p, n);
    let mut depth = 1u32;
    while (depth + 1) < 40 && rep_unit(p, depth + 1) - (depth as u64 + 1) < m as u64 {
        depth += 1;
    }
    let depth = depth.max(rule);
    let mut s = pm - 1;
    for _ in 0..=m {
        let mut acc = zmod::neg(1, pm);
        for j in 2..=depth {
            let e = rep_unit(p, j);
            let shift = e - j as u64;
            if shift >= m as u64 {
                break;
            }
            let term = zmod::mul(p.pow(shift as u32), zmod::pow(s, e, pm), pm);
            acc = zmod::sub(acc, term, pm);
        }
        if acc == s {
            break;
        }
        s = acc;
    }
    let s_inv = zmod::inv(s, pm).expect("s is a unit");
    Ok(EisensteinContext {
        cfg: cfg.clone(),
        pi: zmod::mul(p, s, pm),
        s,
        s_inv,
        truncation_depth: depth,
        target: n,
    })
}

impl EisensteinContext {
    pub fn cfg(&self) -> &PrimeConfig {
        &self.cfg
    }
    pub fn p(&self) -> u64 {
        self.cfg.p()
    }
    /// Ramification degree `p - 1`.
    pub fn e(&self) -> usize {
        self.cfg.p() as usize - 1
    }
    pub fn truncation_depth(&self) -> u32 {
        self.truncation_depth
    }
    pub fn target(&self) -> i64 {
        self.target
    }
    /// Largest representable precision, `(p-1) M`.
    pub fn cap(&self) -> i64 {
        self.e() as i64 * self.cfg.digits() as i64
    }
    /// `gamma^{p-1}` as an integer residue mod `p^M`.
    pub fn pi(&self) -> u64 {
        self.pi
    }
    /// Unit `gamma^{p-1}/p`.
    pub fn s(&self) -> u64 {
        self.s
    }
    /// Minimal polynomial `t^{p-1} - pi`, low degree first, mod `p^M`.
    pub fn gamma_minpoly(&self) -> Vec<u64> {
        let mut g = vec![0; self.e() + 1];
        g[0] = zmod::neg(self.pi, self.cfg.pm());
        g[self.e()] = 1;
        g
    }

    fn digits_for(&self, prec: i64, i: usize) -> u32 {
        let e = self.e() as i64;
        let d = prec - i as i64;
        if d <= 0 {
            return 0;
        }
        (((d + e - 1) / e) as u32).min(self.cfg.digits())
    }

    fn normalize(&self, mut coeffs: Vec<UnramifiedElem>, prec: i64) -> RamifiedElem {
        let prec = prec.min(self.cap());
        for (i, c) in coeffs.iter_mut().enumerate() {
            let d = self.digits_for(prec, i);
            if d < self.cfg.digits() {
                *c = self.cfg.truncate(c, d);
            }
        }
        RamifiedElem { coeffs, prec }
    }

    pub fn with_prec(&self, x: &RamifiedElem, prec: i64) -> RamifiedElem {
        self.normalize(x.coeffs.clone(), prec.min(x.prec))
    }

    pub fn zero(&self) -> RamifiedElem {
        RamifiedElem {
            coeffs: vec![self.cfg.zero(); self.e()],
            prec: self.cap(),
        }
    }
    pub fn one(&self) -> RamifiedElem {
        self.from_int(1)
    }
    pub fn from_int(&self, v: i64) -> RamifiedElem {
        self.from_unram(&self.cfg.from_int(v))
    }
    pub fn from_unram(&self, v: &UnramifiedElem) -> RamifiedElem {
        let mut z = self.zero();
        z.coeffs[0] = v.clone();
        z
    }
    /// `gamma^k`, `k >= 0`.
    pub fn gamma_pow(&self, k: u64) -> RamifiedElem {
        let e = self.e() as u64;
        let pm = self.cfg.pm();
        let mut z = self.zero();
        z.coeffs[(k % e) as usize].coeffs[0] = zmod::pow(self.pi, k / e, pm);
        z
    }
    pub fn gamma(&self) -> RamifiedElem {
        self.gamma_pow(1)
    }
    pub fn teichmuller(&self, r: FfElem) -> RamifiedElem {
        self.from_unram(&self.cfg.teichmuller(r))
    }

    /// Lower bound on `ord_gamma`; equals `prec` when the element is zero to
    /// known precision.
    pub fn val(&self, x: &RamifiedElem) -> i64 {
        let e = self.e() as i64;
        let mut v = x.prec;
        for (i, c) in x.coeffs.iter().enumerate() {
            if !self.cfg.is_zero(c) {
                v = v.min(e * self.cfg.val(c) as i64 + i as i64);
            }
        }
        v
    }

    pub fn is_zero(&self, x: &RamifiedElem) -> bool {
        x.coeffs.iter().all(|c| self.cfg.is_zero(c))
    }

    /// `x == y` modulo `gamma^n`.
    pub fn eq_mod(&self, x: &RamifiedElem, y: &RamifiedElem, n: i64) -> bool {
        let d = self.sub(x, y);
        let d = self.normalize(d.coeffs, n);
        self.is_zero(&d)
    }

    pub fn add(&self, x: &RamifiedElem, y: &RamifiedElem) -> RamifiedElem {
        let c = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(u, v)| self.cfg.add(u, v))
            .collect();
        self.normalize(c, x.prec.min(y.prec))
    }
    pub fn sub(&self, x: &RamifiedElem, y: &RamifiedElem) -> RamifiedElem {
        let c = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(u, v)| self.cfg.sub(u, v))
            .collect();
        self.normalize(c, x.prec.min(y.prec))
    }
    pub fn neg(&self, x: &RamifiedElem) -> RamifiedElem {
        RamifiedElem {
            coeffs: x.coeffs.iter().map(|u| self.cfg.neg(u)).collect(),
            prec: x.prec,
        }
    }
    /// Multiply by an integer; precision is unchanged (conservative).
    pub fn scale_int(&self, x: &RamifiedElem, k: i64) -> RamifiedElem {
        let k = zmod::from_i64(k, self.cfg.pm());
        let c = x.coeffs.iter().map(|u| self.cfg.scale(u, k)).collect();
        self.normalize(c, x.prec)
    }
    /// Multiply by an element of `Z_q` known exactly.
    pub fn mul_unram(&self, x: &RamifiedElem, u: &UnramifiedElem) -> RamifiedElem {
        let c = x.coeffs.iter().map(|c| self.cfg.mul(c, u)).collect();
        self.normalize(c, x.prec)
    }

    pub fn mul(&self, x: &RamifiedElem, y: &RamifiedElem) -> RamifiedElem {
        let e = self.e();
        let cfg = &self.cfg;
        let prec = (x.prec + self.val(y)).min(y.prec + self.val(x));
        let mut low = vec![cfg.zero(); e];
        let mut high = vec![cfg.zero(); e];
        for (i, u) in x.coeffs.iter().enumerate() {
            if cfg.is_zero(u) {
                continue;
            }
            for (j, v) in y.coeffs.iter().enumerate() {
                if cfg.is_zero(v) {
                    continue;
                }
                let t = cfg.mul(u, v);
                if i + j < e {
                    low[i + j] = cfg.add(&low[i + j], &t);
                } else {
                    high[i + j - e] = cfg.add(&high[i + j - e], &t);
                }
            }
        }
        for (l, h) in low.iter_mut().zip(&high) {
            if !cfg.is_zero(h) {
                *l = cfg.add(l, &cfg.scale(h, self.pi));
            }
        }
        self.normalize(low, prec)
    }

    /// `x * gamma^k` for `k >= 0`.
    pub fn mul_gamma_pow(&self, x: &RamifiedElem, k: u64) -> RamifiedElem {
        if k == 0 {
            return x.clone();
        }
        let e = self.e();
        let cfg = &self.cfg;
        let pm = cfg.pm();
        let mut out = vec![cfg.zero(); e];
        let (q, r) = ((k / e as u64), (k % e as u64) as usize);
        let base = zmod::pow(self.pi, q, pm);
        let wrap = zmod::mul(base, self.pi, pm);
        for (i, c) in x.coeffs.iter().enumerate() {
            let (idx, f) = if i + r < e {
                (i + r, base)
            } else {
                (i + r - e, wrap)
            };
            out[idx] = cfg.scale(c, f);
        }
        self.normalize(out, x.prec + k as i64)
    }

    pub fn pow(&self, x: &RamifiedElem, mut k: u64) -> RamifiedElem {
        let mut base = x.clone();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Reduction mod `gamma`.
    pub fn residue(&self, x: &RamifiedElem) -> FfElem {
        self.cfg.residue(&x.coeffs[0])
    }

    /// Exact division by `gamma`; fails unless `gamma` divides to known precision.
    pub fn div_gamma(&self, x: &RamifiedElem) -> Result<RamifiedElem> {
        let e = self.e();
        let cfg = &self.cfg;
        let c0 = &x.coeffs[0];
        let c0p = cfg
            .div_p_pow(c0, 1)
            .ok_or_else(|| Error::NonIntegral("division by gamma of a gamma-adic unit".into()))?;
        // c0 / gamma = (c0 / p) s^{-1} gamma^{p-2}
        let tail = cfg.scale(&c0p, self.s_inv);
        let mut out: Vec<UnramifiedElem> = x.coeffs[1..].to_vec();
        out.push(tail);
        debug_assert_eq!(out.len(), e);
        Ok(self.normalize(out, x.prec - 1))
    }

    pub fn div_gamma_pow(&self, x: &RamifiedElem, k: u64) -> Result<RamifiedElem> {
        let e = self.e() as u64;
        let mut y = x.clone();
        // whole multiples of p-1 at once: gamma^{p-1} = p s
        let q = k / e;
        if q > 0 {
            y = self.div_p_pow(&y, q as u32)?;
            let sinv = zmod::pow(self.s_inv, q, self.cfg.pm());
            y = self.scale_int(&y, zmod::to_signed(sinv, self.cfg.pm()));
        }
        for _ in 0..k % e {
            y = self.div_gamma(&y)?;
        }
        Ok(y)
    }

    /// Exact division by `p^k`; consumes `k (p-1)` units of precision.
    pub fn div_p_pow(&self, x: &RamifiedElem, k: u32) -> Result<RamifiedElem> {
        let cfg = &self.cfg;
        let mut out = Vec::with_capacity(x.coeffs.len());
        for c in &x.coeffs {
            out.push(
                cfg.div_p_pow(c, k)
                    .ok_or_else(|| Error::NonIntegral(format!("division by p^{k}")))?,
            );
        }
        Ok(self.normalize(out, x.prec - k as i64 * self.e() as i64))
    }

    /// Inverse of a gamma-adic unit by Newton iteration.
    pub fn inv_unit(&self, x: &RamifiedElem) -> Result<RamifiedElem> {
        let r = self.residue(x);
        let rinv = self
            .cfg
            .residue_field()
            .inv(r)
            .ok_or_else(|| Error::NonIntegral("inverse of a non-unit".into()))?;
        let mut y = self.from_unram(&self.cfg.lift(rinv));
        let two = self.from_int(2);
        let mut correct = 1i64;
        let full = RamifiedElem {
            coeffs: x.coeffs.clone(),
            prec: self.cap(),
        };
        while correct < self.cap() {
            y = self.mul(&y, &self.sub(&two, &self.mul(&full, &y)));
            correct *= 2;
        }
        Ok(self.normalize(y.coeffs, x.prec))
    }

    /// `x / y` where `y = gamma^k * unit` and `gamma^k | x`.
    pub fn div(&self, x: &RamifiedElem, y: &RamifiedElem) -> Result<RamifiedElem> {
        let k = self.val(y);
        if k >= y.prec {
            return Err(Error::Singular(
                "division by zero to known precision".into(),
            ));
        }
        let yu = self.div_gamma_pow(y, k as u64)?;
        let xs = self.div_gamma_pow(x, k as u64)?;
        Ok(self.mul(&xs, &self.inv_unit(&yu)?))
    }

    pub fn sigma(&self, x: &RamifiedElem, k: i64) -> RamifiedElem {
        if self.cfg.a() == 1 {
            return x.clone();
        }
        RamifiedElem {
            coeffs: x.coeffs.iter().map(|c| self.cfg.sigma(c, k)).collect(),
            prec: x.prec,
        }
    }

    /// `gamma_i = sum_{j<=i} gamma^{p^j}/p^j` for `i = 0..=top`.
    pub fn gamma_tower(&self, top: u32) -> Result<GammaTower> {
        let pm = self.cfg.pm();
        let gammas = self
            .gamma_tower_ratios(top)
            .into_iter()
            .map(|r| self.mul_gamma_pow(&self.from_int(zmod::to_signed(r, pm)), 1))
            .collect();
        Ok(GammaTower { gammas })
    }

    /// `gamma_i / gamma` as residues in `Z/p^M`.
    pub fn gamma_tower_ratios(&self, top: u32) -> Vec<u64> {
        let p = self.p();
        let pm = self.cfg.pm();
        let m = self.cfg.digits() as u64;
        let mut out = Vec::new();
        let mut acc = 0u64;
        for j in 0..=top {
            // gamma^{p^j}/p^j = gamma * p^{e_j - j} s^{e_j}
            let e = rep_unit(p, j);
            if e - (j as u64) < m {
                let t = zmod::mul(p.pow((e - j as u64) as u32), zmod::pow(self.s, e, pm), pm);
                acc = zmod::add(acc, t, pm);
            }
            out.push(acc);
        }
        out
    }

    /// `c_m = gamma_m p^m / gamma^{p^m}`, an element of `Z_p` of gamma-order
    /// `(p-1)(p^m - 1)`.
    pub fn splitting_ratio(&self, m: u32) -> u64 {
        let p = self.p();
        let pm = self.cfg.pm();
        let digits = self.cfg.digits() as u64;
        let em = rep_unit(p, m);
        let mut acc = 0u64;
        // gamma_m = -sum_{j>m} gamma^{p^j}/p^j, so c_m = -sum_{j>m} p^{m-j} gamma^{p^j - p^m}
        // and gamma^{p^j - p^m} = pi^{(p^j - p^m)/(p-1)}.
        let mut j = m + 1;
        loop {
            let f = rep_unit(p, j) - em;
            let shift = f as i64 - (j - m) as i64;
            if shift >= digits as i64 || j > 60 {
                break;
            }
            let t = zmod::mul(p.pow(shift as u32), zmod::pow(self.s, f, pm), pm);
            acc = zmod::sub(acc, t, pm);
            j += 1;
        }
        acc
    }

    /// Serialized coordinates: outer index the gamma-power, inner the `Z_q`
    /// coordinates as residues mod `p^M`.
    pub fn to_digits(&self, x: &RamifiedElem) -> GammaDigits {
        GammaDigits {
            gamma_digits: x.coeffs.iter().map(|c| c.coeffs.clone()).collect(),
            prec: x.prec,
        }
    }

    pub fn from_digits(&self, d: &GammaDigits) -> Result<RamifiedElem> {
        if d.gamma_digits.len() != self.e()
            || d.gamma_digits.iter().any(|c| c.len() != self.cfg.a())
        {
            return Err(Error::InvalidParameter("gamma_digits shape".into()));
        }
        let coeffs = d
            .gamma_digits
            .iter()
            .map(|c| UnramifiedElem {
                coeffs: c.iter().map(|&v| v % self.cfg.pm()).collect(),
            })
            .collect();
        Ok(self.normalize(coeffs, d.prec))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaDigits {
    pub gamma_digits: Vec<Vec<u64>>,
    pub prec: i64,
}

#[derive(Clone, Debug)]
pub struct GammaTower {
    pub gammas: Vec<RamifiedElem>,
}
