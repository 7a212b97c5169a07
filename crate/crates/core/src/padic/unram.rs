//! `Z_q = Z_p[y]/(f)` modulo `p^M`, with Frobenius and Teichmüller lifts.

use super::zmod;
use crate::error::{Error, Result};
use crate::ff::field::fp_poly;
use crate::ff::{FFField, FfElem};

/// Coordinates in the power basis `1, y, .., y^{a-1}` of the unramified modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnramifiedElem {
    pub coeffs: Vec<u64>,
}

/// Ring context for `Z_q` at `M` digits. Read-only after construction.
#[derive(Clone, Debug)]
pub struct PrimeConfig {
    p: u64,
    a: usize,
    digits: u32,
    pm: u64,
    modulus: Vec<u64>,
    residue: FFField,
    /// `sigma(y)^i` for `i < a`.
    frob_basis: Vec<UnramifiedElem>,
}

/// Deterministic field context: lexicographically lowest irreducible modulus,
/// `y - 1` when `a = 1`.
pub fn build_field(p: u64, a: usize, digits: u32) -> Result<PrimeConfig> {
    if !zmod::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if a == 0 {
        return Err(Error::InvalidParameter("a must be positive".into()));
    }
    if digits < 2 || digits > zmod::max_digits(p) {
        return Err(Error::InvalidParameter(format!(
            "working precision {digits} outside 2..={}",
            zmod::max_digits(p)
        )));
    }
    let modulus = fp_poly::lex_min_irreducible(p, a);
    let residue = FFField::with_modulus(p, &modulus)?;
    let pm = p.pow(digits);
    let mut cfg = PrimeConfig {
        p,
        a,
        digits,
        pm,
        modulus,
        residue,
        frob_basis: Vec::new(),
    };
    cfg.frob_basis = cfg.compute_frob_basis();
    Ok(cfg)
}

impl PrimeConfig {
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn a(&self) -> usize {
        self.a
    }
    pub fn q(&self) -> u64 {
        self.p.pow(self.a as u32)
    }
    pub fn digits(&self) -> u32 {
        self.digits
    }
    /// `p^M`.
    pub fn pm(&self) -> u64 {
        self.pm
    }
    /// Monic modulus over `F_p`, lifted verbatim to `Z/p^M`.
    pub fn unram_modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn residue_field(&self) -> &FFField {
        &self.residue
    }

    pub fn zero(&self) -> UnramifiedElem {
        UnramifiedElem {
            coeffs: vec![0; self.a],
        }
    }
    pub fn one(&self) -> UnramifiedElem {
        self.from_int(1)
    }
    pub fn from_int(&self, x: i64) -> UnramifiedElem {
        let mut c = vec![0; self.a];
        c[0] = zmod::from_i64(x, self.pm);
        UnramifiedElem { coeffs: c }
    }
    pub fn is_zero(&self, x: &UnramifiedElem) -> bool {
        x.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, x: &UnramifiedElem, y: &UnramifiedElem) -> UnramifiedElem {
        UnramifiedElem {
            coeffs: x
                .coeffs
                .iter()
                .zip(&y.coeffs)
                .map(|(&u, &v)| zmod::add(u, v, self.pm))
                .collect(),
        }
    }
    pub fn sub(&self, x: &UnramifiedElem, y: &UnramifiedElem) -> UnramifiedElem {
        UnramifiedElem {
            coeffs: x
                .coeffs
                .iter()
                .zip(&y.coeffs)
                .map(|(&u, &v)| zmod::sub(u, v, self.pm))
                .collect(),
        }
    }
    pub fn neg(&self, x: &UnramifiedElem) -> UnramifiedElem {
        UnramifiedElem {
            coeffs: x.coeffs.iter().map(|&u| zmod::neg(u, self.pm)).collect(),
        }
    }
    /// Multiply by an integer residue mod `p^M`.
    pub fn scale(&self, x: &UnramifiedElem, k: u64) -> UnramifiedElem {
        UnramifiedElem {
            coeffs: x.coeffs.iter().map(|&u| zmod::mul(u, k, self.pm)).collect(),
        }
    }

    pub fn mul(&self, x: &UnramifiedElem, y: &UnramifiedElem) -> UnramifiedElem {
        let a = self.a;
        if a == 1 {
            return UnramifiedElem {
                coeffs: vec![zmod::mul(x.coeffs[0], y.coeffs[0], self.pm)],
            };
        }
        let mut prod = vec![0u128; 2 * a - 1];
        let pm = self.pm as u128;
        for (i, &u) in x.coeffs.iter().enumerate() {
            if u == 0 {
                continue;
            }
            for (j, &v) in y.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u as u128 * v as u128) % pm;
            }
        }
        for k in (a..2 * a - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..a {
                let sub = c * self.modulus[i] as u128 % pm;
                prod[k - a + i] = (prod[k - a + i] + pm - sub) % pm;
            }
        }
        UnramifiedElem {
            coeffs: prod[..a].iter().map(|&c| c as u64).collect(),
        }
    }

    pub fn pow(&self, x: &UnramifiedElem, mut e: u64) -> UnramifiedElem {
        let mut base = x.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Reduction mod `p`.
    pub fn residue(&self, x: &UnramifiedElem) -> FfElem {
        let c: Vec<u64> = x.coeffs.iter().map(|&u| u % self.p).collect();
        self.residue.encode(&c)
    }

    /// Coordinatewise lift of a residue with digits in `0..p`.
    pub fn lift(&self, r: FfElem) -> UnramifiedElem {
        UnramifiedElem {
            coeffs: self.residue.decode(r),
        }
    }

    /// Inverse of a unit; `None` when the residue vanishes.
    pub fn inv(&self, x: &UnramifiedElem) -> Option<UnramifiedElem> {
        let r = self.residue.inv(self.residue(x))?;
        let mut y = self.lift(r);
        let two = self.from_int(2);
        let mut correct = 1u32;
        while correct < self.digits {
            y = self.mul(&y, &self.sub(&two, &self.mul(x, &y)));
            correct *= 2;
        }
        Some(y)
    }

    /// Minimal `p`-adic valuation over the coordinates (`M` for zero).
    pub fn val(&self, x: &UnramifiedElem) -> u32 {
        x.coeffs
            .iter()
            .map(|&c| zmod::val_p(c, self.p, self.digits))
            .min()
            .unwrap()
    }

    /// Exact division by `p^k`; `None` when some coordinate is not divisible.
    /// The top `k` digits become unknown and are filled with zero.
    pub fn div_p_pow(&self, x: &UnramifiedElem, k: u32) -> Option<UnramifiedElem> {
        let d = self.p.pow(k);
        if x.coeffs.iter().any(|&c| c % d != 0) {
            return None;
        }
        Some(UnramifiedElem {
            coeffs: x.coeffs.iter().map(|&c| c / d).collect(),
        })
    }

    /// Reduce coordinates modulo `p^k`.
    pub fn truncate(&self, x: &UnramifiedElem, k: u32) -> UnramifiedElem {
        if k >= self.digits {
            return x.clone();
        }
        let d = self.p.pow(k);
        UnramifiedElem {
            coeffs: x.coeffs.iter().map(|&c| c % d).collect(),
        }
    }

    fn eval_modulus(&self, w: &UnramifiedElem, derivative: bool) -> UnramifiedElem {
        let mut acc = self.zero();
        for i in (0..=self.a).rev() {
            let c = if derivative {
                if i == 0 {
                    continue;
                }
                zmod::mul(self.modulus[i], i as u64, self.pm)
            } else {
                self.modulus[i]
            };
            acc = self.mul(&acc, w);
            acc.coeffs[0] = zmod::add(acc.coeffs[0], c, self.pm);
        }
        acc
    }

    fn compute_frob_basis(&self) -> Vec<UnramifiedElem> {
        let mut y = self.zero();
        if self.a == 1 {
            return vec![self.one()];
        }
        y.coeffs[1] = 1;
        let mut w = self.pow(&y, self.p);
        let mut correct = 1u32;
        while correct < self.digits {
            let f = self.eval_modulus(&w, false);
            let df = self.eval_modulus(&w, true);
            let dinv = self.inv(&df).expect("separable modulus");
            w = self.sub(&w, &self.mul(&f, &dinv));
            correct *= 2;
        }
        let mut out = vec![self.one()];
        for i in 1..self.a {
            out.push(self.mul(&out[i - 1], &w));
        }
        out
    }

    /// `sigma^k` for any integer `k`; `sigma^a = id`.
    pub fn sigma(&self, x: &UnramifiedElem, k: i64) -> UnramifiedElem {
        let a = self.a as i64;
        let k = k.rem_euclid(a);
        let mut cur = x.clone();
        for _ in 0..k {
            let mut next = self.zero();
            for (i, &c) in cur.coeffs.iter().enumerate() {
                if c != 0 {
                    next = self.add(&next, &self.scale(&self.frob_basis[i], c));
                }
            }
            cur = next;
        }
        cur
    }

    /// Teichmüller representative of a residue.
    pub fn teichmuller(&self, r: FfElem) -> UnramifiedElem {
        let mut x = self.lift(r);
        let q = self.q();
        for _ in 0..self.digits {
            let nx = self.pow(&x, q);
            if nx == x {
                break;
            }
            x = nx;
        }
        x
    }
}
