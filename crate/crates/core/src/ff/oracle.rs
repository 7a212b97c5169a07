//! Brute-force hyperkloosterman sums and their L-polynomials.

use super::cyclotomic::CyclotomicInt;
use super::field::{FFField, FfElem};
use crate::error::{Error, Result};
use crate::par;
use serde::{Deserialize, Serialize};

/// Maximum number of torus points enumerated for a single sum.
pub const ENUMERATION_BUDGET: u64 = 100_000_000;

/// Frobenius power sums are `t_k = (-1)^n S_k`, i.e.
/// `det(I - T Frob) = exp(-sum t_k T^k / k)` with this sign exponent.
/// Pinned against the cohomological side for `(n, p, a, lambda) = (1, 3, 1, 1)`.
pub fn trace_sign(n: usize) -> i64 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Raw count vector of `Kl_{n+1}(lambda)`: `c_t = #{x : Tr(x_1+..+x_n + lambda/(x_1..x_n)) = t}`.
pub fn kloosterman_counts(field: &FFField, n: usize, lambda: FfElem) -> Result<Vec<u64>> {
    if lambda == 0 {
        return Err(Error::ZeroLambda);
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let order = field.size() as u64 - 1;
    let points = (order as u128).pow(n as u32);
    if points > ENUMERATION_BUDGET as u128 {
        return Err(Error::BudgetExceeded(format!("{points} torus points")));
    }
    let p = field.p() as usize;
    let tr = field.trace_by_log();
    let lam_log = field.log(lambda).unwrap() as u64;

    fn walk(
        depth: usize,
        n: usize,
        order: u64,
        tr: &[u8],
        p: usize,
        lam_log: u64,
        trace_acc: usize,
        exp_acc: u64,
        counts: &mut [u64],
    ) {
        if depth == n {
            let last = (lam_log + order * n as u64 - exp_acc) % order;
            counts[(trace_acc + tr[last as usize] as usize) % p] += 1;
            return;
        }
        for e in 0..order {
            walk(
                depth + 1,
                n,
                order,
                tr,
                p,
                lam_log,
                trace_acc + tr[e as usize] as usize,
                exp_acc + e,
                counts,
            );
        }
    }

    let partials = par::map_range(order as usize, |e1| {
        let mut counts = vec![0u64; p];
        walk(
            1,
            n,
            order,
            &tr,
            p,
            lam_log,
            tr[e1] as usize,
            e1 as u64,
            &mut counts,
        );
        counts
    });
    let mut counts = vec![0u64; p];
    for part in partials {
        for (c, x) in counts.iter_mut().zip(part) {
            *c += x;
        }
    }
    Ok(counts)
}

pub fn kloosterman_sum(field: &FFField, n: usize, lambda: FfElem) -> Result<CyclotomicInt> {
    let counts = kloosterman_counts(field, n, lambda)?;
    Ok(CyclotomicInt::from_counts(
        counts.into_iter().map(|c| c as i64).collect(),
    ))
}

/// `S_1..S_{k_max}` where `S_k` is the sum over `F_{q^k}` with `lambda` viewed there.
pub fn power_sums(
    field: &FFField,
    n: usize,
    lambda: FfElem,
    k_max: usize,
) -> Result<Vec<CyclotomicInt>> {
    if lambda == 0 {
        return Err(Error::ZeroLambda);
    }
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if k == 1 {
            out.push(kloosterman_sum(field, n, lambda)?);
            continue;
        }
        let big = FFField::new(field.p(), field.degree() * k)?;
        let root = big
            .root_of(field.modulus())
            .ok_or_else(|| Error::InvalidParameter("subfield modulus has no root".into()))?;
        let lam = big.embed(field, lambda, root);
        out.push(kloosterman_sum(&big, n, lam)?);
    }
    Ok(out)
}

/// `det(I - T Frob)` over `Z[zeta_p]`; constant term 1, degree `n + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LPolynomial {
    pub coefficients: Vec<CyclotomicInt>,
    /// `L(T)^{sign_exponent} = det(I - T Frob)`.
    pub sign_exponent: i32,
}

impl LPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// Newton's identities with `t_k = sign * S_k`.
pub fn lpoly_with_sign(s: &[CyclotomicInt], n: usize, sign: i64) -> Result<LPolynomial> {
    let deg = n + 1;
    if s.len() < deg {
        return Err(Error::InvalidParameter(format!(
            "need {deg} power sums, got {}",
            s.len()
        )));
    }
    let p = s[0].p();
    let t: Vec<CyclotomicInt> = s.iter().map(|x| x.scale(sign)).collect();
    // e_k = (1/k) sum_{i=1}^k (-1)^{i-1} e_{k-i} t_i
    let mut e = vec![CyclotomicInt::from_int(p, 1)];
    for k in 1..=deg {
        let mut acc = CyclotomicInt::zero(p);
        for i in 1..=k {
            let term = e[k - i].mul(&t[i - 1]);
            acc = if i % 2 == 1 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        let ek = acc
            .div_exact(k as i64)
            .ok_or_else(|| Error::NonIntegral(format!("Newton identity at degree {k}")))?;
        e.push(ek);
    }
    let coefficients = e
        .into_iter()
        .enumerate()
        .map(|(k, ek)| if k % 2 == 1 { ek.neg() } else { ek })
        .collect();
    Ok(LPolynomial {
        coefficients,
        sign_exponent: if n % 2 == 1 { 1 } else { -1 },
    })
}

pub fn lpoly_from_power_sums(s: &[CyclotomicInt], n: usize) -> Result<LPolynomial> {
    lpoly_with_sign(s, n, trace_sign(n))
}

/// Power sums `S_1..S_k` re-expanded from an L-polynomial (inverse of Newton).
pub fn power_sums_from_lpoly(l: &LPolynomial, n: usize, k_max: usize) -> Vec<CyclotomicInt> {
    let p = l.coefficients[0].p();
    // e_k = (-1)^k c_k; t_k = (-1)^{k-1} k e_k + sum_{i=1}^{k-1} (-1)^{i-1} ... solved forward
    let deg = l.degree();
    let e: Vec<CyclotomicInt> = l
        .coefficients
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 1 { c.neg() } else { c.clone() })
        .collect();
    let ek = |k: usize| {
        if k <= deg {
            e[k].clone()
        } else {
            CyclotomicInt::zero(p)
        }
    };
    let mut t: Vec<CyclotomicInt> = Vec::new();
    for k in 1..=k_max {
        // k e_k = sum_{i=1}^k (-1)^{i-1} e_{k-i} t_i  =>  solve for t_k
        let mut rhs = ek(k).scale(k as i64);
        for i in 1..k {
            let term = ek(k - i).mul(&t[i - 1]);
            rhs = if i % 2 == 1 {
                rhs.sub(&term)
            } else {
                rhs.add(&term)
            };
        }
        let tk = if k % 2 == 1 { rhs } else { rhs.neg() };
        t.push(tk);
    }
    let sign = trace_sign(n);
    t.into_iter().map(|x| x.scale(sign)).collect()
}

/// Count-vector totals must equal `(q^k - 1)^n`.
pub fn expected_total(q: u64, k: u32, n: usize) -> u128 {
    ((q as u128).pow(k) - 1).pow(n as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kl2_f3_lambda_one() {
        let f = FFField::new(3, 1).unwrap();
        let c = kloosterman_counts(&f, 1, 1).unwrap();
        assert_eq!(c, vec![0, 1, 1]);
        assert_eq!(
            kloosterman_sum(&f, 1, 1).unwrap(),
            CyclotomicInt::from_int(3, -1)
        );
    }

    #[test]
    fn kl2_f2_single_point() {
        let f = FFField::new(2, 1).unwrap();
        assert_eq!(
            kloosterman_sum(&f, 1, 1).unwrap(),
            CyclotomicInt::from_int(2, 1)
        );
    }

    #[test]
    fn zero_lambda_rejected() {
        let f = FFField::new(3, 1).unwrap();
        assert_eq!(kloosterman_sum(&f, 1, 0), Err(Error::ZeroLambda));
    }

    #[test]
    fn f3_s2_over_f9_and_lpoly() {
        let f = FFField::new(3, 1).unwrap();
        let s = power_sums(&f, 1, 1, 2).unwrap();
        // F_9 enumeration: eight points
        let total: i64 = {
            let big = FFField::new(3, 2).unwrap();
            let root = big.root_of(f.modulus()).unwrap();
            kloosterman_counts(&big, 1, big.embed(&f, 1, root))
                .unwrap()
                .iter()
                .sum::<u64>() as i64
        };
        assert_eq!(total, 8);
        let l = lpoly_from_power_sums(&s, 1).unwrap();
        assert_eq!(l.coefficients[0], CyclotomicInt::from_int(3, 1));
        assert_eq!(l.coefficients[1], CyclotomicInt::from_int(3, -1));
        assert_eq!(l.coefficients[2], CyclotomicInt::from_int(3, 3));
        assert_eq!(power_sums_from_lpoly(&l, 1, 2), s);
    }

    #[test]
    fn weil_bound_n1() {
        for (p, a) in [(3u64, 1usize), (5, 1), (7, 1), (2, 2), (3, 2)] {
            let f = FFField::new(p, a).unwrap();
            let q = f.size() as f64;
            for lam in 1..f.size() {
                let kl = kloosterman_sum(&f, 1, lam).unwrap();
                for s in 1..p as usize {
                    let (re, im) = kl.embed_complex(s);
                    assert!((re * re + im * im).sqrt() <= 2.0 * q.sqrt() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn roots_have_absolute_value_sqrt_q() {
        let f = FFField::new(5, 1).unwrap();
        let s = power_sums(&f, 1, 2, 2).unwrap();
        let l = lpoly_from_power_sums(&s, 1).unwrap();
        for emb in 1..5 {
            // product of the two reciprocal roots is c_2
            let (re, im) = l.coefficients[2].embed_complex(emb);
            assert!(((re * re + im * im).sqrt() - 5.0).abs() < 1e-6);
        }
    }

    #[test]
    fn totals_and_galois_equivariance() {
        let f = FFField::new(5, 1).unwrap();
        for lam in 1..5 {
            let c = kloosterman_counts(&f, 2, lam).unwrap();
            assert_eq!(c.iter().sum::<u64>() as u128, expected_total(5, 1, 2));
            // zeta -> zeta^s corresponds to the character t -> s t, i.e. to
            // the sum with x scaled by s and lambda by s^{n+1}.
            let kl = kloosterman_sum(&f, 2, lam).unwrap();
            for s in 1..5u32 {
                let lam_s = f.mul(lam, f.pow(s, 3));
                let lhs = kloosterman_sum(&f, 2, lam_s).unwrap();
                assert_eq!(lhs, kl.galois(s as usize));
            }
        }
    }

    #[test]
    fn both_sign_conventions_integral_for_pin_case() {
        // (n, p, a, lambda) = (1, 3, 1, 1): both signs give integral polynomials,
        // so the integrality test alone does not pin the sign; the
        // cohomological comparison does (see the frobenius tests).
        let f = FFField::new(3, 1).unwrap();
        let s = power_sums(&f, 1, 1, 2).unwrap();
        let plus = lpoly_with_sign(&s, 1, 1).unwrap();
        let minus = lpoly_with_sign(&s, 1, -1).unwrap();
        assert_ne!(plus, minus);
        assert_eq!(trace_sign(1), -1);
    }
}
