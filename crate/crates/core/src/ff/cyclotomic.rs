//! Exact elements of `Z[zeta_p]` as count vectors.

use serde::{Deserialize, Serialize};
use std::fmt;

/// `sum_t c_t zeta^t`, canonicalized so that `c_{p-1} = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclotomicInt {
    counts: Vec<i64>,
}

impl CyclotomicInt {
    pub fn from_counts(counts: Vec<i64>) -> Self {
        assert!(counts.len() >= 2, "need p >= 2 slots");
        let mut c = CyclotomicInt { counts };
        c.canonicalize();
        c
    }

    pub fn zero(p: usize) -> Self {
        CyclotomicInt { counts: vec![0; p] }
    }

    pub fn from_int(p: usize, v: i64) -> Self {
        let mut counts = vec![0; p];
        counts[0] = v;
        CyclotomicInt { counts }
    }

    /// `zeta^t`.
    pub fn zeta_pow(p: usize, t: usize) -> Self {
        let mut counts = vec![0; p];
        counts[t % p] = 1;
        Self::from_counts(counts)
    }

    fn canonicalize(&mut self) {
        let top = *self.counts.last().unwrap();
        if top != 0 {
            for c in self.counts.iter_mut() {
                *c -= top;
            }
        }
    }

    pub fn p(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_counts(
            self.counts
                .iter()
                .zip(&o.counts)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_counts(
            self.counts
                .iter()
                .zip(&o.counts)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::from_counts(self.counts.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::from_counts(self.counts.iter().map(|a| a * k).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.p();
        let mut out = vec![0i64; p];
        for (i, &a) in self.counts.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.counts.iter().enumerate() {
                out[(i + j) % p] += a * b;
            }
        }
        Self::from_counts(out)
    }

    /// Exact division by an integer; `None` when some coordinate is not divisible.
    /// Coordinates in the canonical form are a `Z`-basis, so this is exact.
    pub fn div_exact(&self, k: i64) -> Option<Self> {
        if self.counts.iter().any(|c| c % k != 0) {
            return None;
        }
        Some(CyclotomicInt {
            counts: self.counts.iter().map(|c| c / k).collect(),
        })
    }

    /// Galois action `zeta -> zeta^s`.
    pub fn galois(&self, s: usize) -> Self {
        let p = self.p();
        assert!(s % p != 0);
        let mut out = vec![0i64; p];
        for (t, &c) in self.counts.iter().enumerate() {
            out[(t * s) % p] += c;
        }
        Self::from_counts(out)
    }

    /// Value under the complex embedding `zeta -> exp(2 pi i s / p)`.
    pub fn embed_complex(&self, s: usize) -> (f64, f64) {
        let p = self.p() as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &c) in self.counts.iter().enumerate() {
            let ang = 2.0 * std::f64::consts::PI * ((t * s) % self.p()) as f64 / p;
            re += c as f64 * ang.cos();
            im += c as f64 * ang.sin();
        }
        (re, im)
    }
}

impl fmt::Display for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (t, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match t {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}z")?,
                _ => write!(f, "{c}z^{t}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
