//! Small finite fields `F_{p^d}` with log/antilog and trace tables.
//!
//! Elements are encoded as integers `c_0 + c_1 p + ... + c_{d-1} p^{d-1}`,
//! the coordinates in the power basis of the defining modulus.

use crate::error::{Error, Result};

pub type FfElem = u32;

/// Polynomial helpers over `F_p`, coefficient vectors low degree first.
pub(crate) mod fp_poly {
    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.len() > 1 && *a.last().unwrap() == 0 {
            a.pop();
        }
        a
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        let db = b.len() - 1;
        let lead_inv = crate::padic::zmod::inv(b[db], p).expect("nonzero lead");
        while r.len() > db && !(r.len() == 1 && r[0] == 0) {
            let dr = r.len() - 1;
            let c = (r[dr] * lead_inv) % p;
            if c != 0 {
                for i in 0..=db {
                    let idx = dr - db + i;
                    r[idx] = (r[idx] + p * p - c * b[i] % p) % p;
                }
            }
            r.pop();
            if r.is_empty() {
                r.push(0);
            }
        }
        trim(r)
    }

    pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        rem(&out, m, p)
    }

    /// Trial division by every monic polynomial of degree `1..=deg/2`.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let d = f.len() - 1;
        if d <= 1 {
            return d == 1;
        }
        for dd in 1..=d / 2 {
            let count = p.pow(dd as u32);
            for code in 0..count {
                let mut g = vec![0u64; dd + 1];
                let mut c = code;
                for slot in g.iter_mut().take(dd) {
                    *slot = c % p;
                    c /= p;
                }
                g[dd] = 1;
                let r = rem(f, &g, p);
                if r.len() == 1 && r[0] == 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Lowest irreducible monic polynomial of degree `d`, ordered by the
    /// integer `c_0 + c_1 p + ...`; degree one uses `y - 1`.
    pub fn lex_min_irreducible(p: u64, d: usize) -> Vec<u64> {
        if d == 1 {
            return vec![p - 1, 1];
        }
        let count = p.pow(d as u32);
        for code in 0..count {
            let mut f = vec![0u64; d + 1];
            let mut c = code;
            for slot in f.iter_mut().take(d) {
                *slot = c % p;
                c /= p;
            }
            f[d] = 1;
            if is_irreducible(&f, p) {
                return f;
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }
}

#[derive(Clone, Debug)]
pub struct FFField {
    p: u64,
    degree: usize,
    size: u32,
    modulus: Vec<u64>,
    exp: Vec<FfElem>,
    log: Vec<u32>,
    trace: Vec<u8>,
}

impl FFField {
    /// Field `F_{p^d}` defined by the lexicographically lowest irreducible modulus.
    pub fn new(p: u64, d: usize) -> Result<Self> {
        if !crate::padic::zmod::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if d == 0 {
            return Err(Error::InvalidParameter(
                "field degree must be positive".into(),
            ));
        }
        Self::with_modulus(p, &fp_poly::lex_min_irreducible(p, d))
    }

    pub fn with_modulus(p: u64, modulus: &[u64]) -> Result<Self> {
        let d = modulus.len() - 1;
        let modulus: Vec<u64> = modulus.iter().map(|c| c % p).collect();
        if modulus[d] != 1 || !fp_poly::is_irreducible(&modulus, p) {
            return Err(Error::InvalidParameter(
                "modulus must be monic irreducible".into(),
            ));
        }
        let size = p
            .checked_pow(d as u32)
            .filter(|s| *s <= 1 << 24)
            .ok_or_else(|| {
                Error::BudgetExceeded(format!("field of size {p}^{d} too large for tables"))
            })? as u32;
        let mut field = FFField {
            p,
            degree: d,
            size,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            trace: Vec::new(),
        };
        field.build_tables();
        Ok(field)
    }

    fn build_tables(&mut self) {
        let order = self.size as u64 - 1;
        let primes = prime_factors(order);
        let mut gen = None;
        for code in 1..self.size {
            let g = self.decode(code);
            if primes.iter().all(|&r| {
                let h = self.poly_pow(&g, order / r);
                !(h.len() == 1 && h[0] == 1)
            }) {
                gen = Some(g);
                break;
            }
        }
        let g = gen.expect("multiplicative group is cyclic");
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![u32::MAX; self.size as usize];
        let mut cur = vec![1u64];
        for k in 0..order {
            let code = self.encode(&cur);
            exp.push(code);
            log[code as usize] = k as u32;
            cur = fp_poly::mulmod(&cur, &g, &self.modulus, self.p);
        }
        self.exp = exp;
        self.log = log;

        // Tr(y^j) = sum_i (y^j)^{p^i}; trace is F_p-linear in the coordinates.
        let mut basis_tr = vec![0u64; self.degree];
        for (j, slot) in basis_tr.iter_mut().enumerate() {
            let mut yj = vec![0u64; j + 1];
            yj[j] = 1;
            let yj = fp_poly::rem(&yj, &self.modulus, self.p);
            let mut acc = 0u64;
            let mut cur = yj;
            for _ in 0..self.degree {
                acc = (acc + cur[0]) % self.p;
                cur = self.poly_pow(&cur, self.p);
            }
            *slot = acc;
        }
        self.trace = (0..self.size)
            .map(|code| {
                let c = self.decode(code);
                let mut t = 0u64;
                for (j, &cj) in c.iter().enumerate() {
                    t = (t + cj * basis_tr[j]) % self.p;
                }
                t as u8
            })
            .collect();
    }

    fn poly_pow(&self, base: &[u64], mut e: u64) -> Vec<u64> {
        let mut r = vec![1u64];
        let mut b = base.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                r = fp_poly::mulmod(&r, &b, &self.modulus, self.p);
            }
            b = fp_poly::mulmod(&b, &b, &self.modulus, self.p);
            e >>= 1;
        }
        r
    }

    pub fn decode(&self, mut code: FfElem) -> Vec<u64> {
        let mut c = vec![0u64; self.degree];
        for slot in c.iter_mut() {
            *slot = code as u64 % self.p;
            code /= self.p as u32;
        }
        c
    }

    pub fn encode(&self, coords: &[u64]) -> FfElem {
        let mut code = 0u64;
        for &c in coords.iter().take(self.degree).rev() {
            code = code * self.p + c % self.p;
        }
        code as FfElem
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn size(&self) -> u32 {
        self.size
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FfElem {
        0
    }
    pub fn one(&self) -> FfElem {
        1
    }

    pub fn from_int(&self, x: i64) -> FfElem {
        x.rem_euclid(self.p as i64) as FfElem
    }

    pub fn add(&self, x: FfElem, y: FfElem) -> FfElem {
        let p = self.p as u32;
        let (mut x, mut y) = (x, y);
        let (mut out, mut place) = (0u32, 1u32);
        for _ in 0..self.degree {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        out
    }

    pub fn neg(&self, x: FfElem) -> FfElem {
        let p = self.p as u32;
        let mut x = x;
        let (mut out, mut place) = (0u32, 1u32);
        for _ in 0..self.degree {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        out
    }

    pub fn sub(&self, x: FfElem, y: FfElem) -> FfElem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: FfElem, y: FfElem) -> FfElem {
        if x == 0 || y == 0 {
            return 0;
        }
        let order = self.size - 1;
        let k = (self.log[x as usize] as u64 + self.log[y as usize] as u64) % order as u64;
        self.exp[k as usize]
    }

    pub fn inv(&self, x: FfElem) -> Option<FfElem> {
        if x == 0 {
            return None;
        }
        let order = self.size - 1;
        Some(self.exp[((order - self.log[x as usize]) % order) as usize])
    }

    pub fn pow(&self, x: FfElem, e: u64) -> FfElem {
        if x == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let order = (self.size - 1) as u64;
        let k = (self.log[x as usize] as u64 * (e % order)) % order;
        self.exp[k as usize]
    }

    /// Multiply by an integer scalar.
    pub fn scale(&self, x: FfElem, c: i64) -> FfElem {
        self.mul(x, self.from_int(c))
    }

    /// `g^k` for the fixed generator `g`.
    pub fn exp(&self, k: u64) -> FfElem {
        self.exp[(k % (self.size as u64 - 1)) as usize]
    }

    /// Discrete log to the fixed generator; `None` for zero.
    pub fn log(&self, x: FfElem) -> Option<u32> {
        (x != 0).then(|| self.log[x as usize])
    }

    /// Absolute trace to `F_p`, as an integer in `[0, p)`.
    pub fn trace(&self, x: FfElem) -> u8 {
        self.trace[x as usize]
    }

    /// Trace indexed by discrete log (`g^k`).
    pub fn trace_by_log(&self) -> Vec<u8> {
        self.exp.iter().map(|&e| self.trace[e as usize]).collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = FfElem> {
        0..self.size
    }

    /// Find a root in `self` of a polynomial with coefficients in `F_p`.
    pub fn root_of(&self, poly: &[u64]) -> Option<FfElem> {
        self.elements().find(|&x| {
            let mut acc = 0;
            for &c in poly.iter().rev() {
                acc = self.add(self.mul(acc, x), self.from_int(c as i64));
            }
            acc == 0
        })
    }

    /// Embed an element of `sub` (given by coordinates in `sub`'s power basis)
    /// via the image `root` of `sub`'s generator `y`.
    pub fn embed(&self, sub: &FFField, x: FfElem, root: FfElem) -> FfElem {
        let coords = sub.decode(x);
        let mut acc = 0;
        for &c in coords.iter().rev() {
            acc = self.add(self.mul(acc, root), self.from_int(c as i64));
        }
        acc
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_modulus_over_f3_has_no_roots() {
        let f = FFField::new(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        // exhaustive root check over F_3
        for x in 0..3u64 {
            assert_ne!((x * x + 1) % 3, 0);
        }
    }

    #[test]
    fn field_axioms_f9() {
        let f = FFField::new(3, 2).unwrap();
        for x in f.elements() {
            assert_eq!(f.add(x, f.neg(x)), 0);
            if x != 0 {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
            }
            for y in f.elements() {
                assert_eq!(f.mul(x, y), f.mul(y, x));
                assert_eq!(
                    f.trace(f.add(x, y)),
                    ((f.trace(x) as u64 + f.trace(y) as u64) % 3) as u8
                );
            }
        }
        // Trace is surjective.
        let mut seen = [false; 3];
        for x in f.elements() {
            seen[f.trace(x) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn embedding_is_a_homomorphism() {
        let small = FFField::new(2, 2).unwrap();
        let big = FFField::new(2, 4).unwrap();
        let root = big.root_of(small.modulus()).unwrap();
        for x in small.elements() {
            for y in small.elements() {
                let xy = big.embed(&small, small.mul(x, y), root);
                assert_eq!(
                    xy,
                    big.mul(big.embed(&small, x, root), big.embed(&small, y, root))
                );
            }
        }
    }

    #[test]
    fn non_prime_rejected() {
        assert!(matches!(FFField::new(4, 1), Err(Error::NotPrime(4))));
    }
}
