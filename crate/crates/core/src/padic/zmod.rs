//! Arithmetic in `Z / p^M` on machine words.
//!
//! Residues are kept in `[0, modulus)`; the modulus is always below `2^63`
//! so sums fit a `u64` and products fit a `u128`.

#[inline]
pub fn add(x: u64, y: u64, m: u64) -> u64 {
    let s = x + y;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
pub fn sub(x: u64, y: u64, m: u64) -> u64 {
    if x >= y {
        x - y
    } else {
        x + m - y
    }
}

#[inline]
pub fn neg(x: u64, m: u64) -> u64 {
    if x == 0 {
        0
    } else {
        m - x
    }
}

#[inline]
pub fn mul(x: u64, y: u64, m: u64) -> u64 {
    ((x as u128 * y as u128) % m as u128) as u64
}

pub fn pow(mut x: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, x, m);
        }
        x = mul(x, x, m);
        e >>= 1;
    }
    r
}

/// Reduce a signed integer into `[0, m)`.
#[inline]
pub fn from_i64(x: i64, m: u64) -> u64 {
    let r = (x as i128).rem_euclid(m as i128);
    r as u64
}

/// Symmetric representative in `(-m/2, m/2]`.
pub fn to_signed(x: u64, m: u64) -> i64 {
    if x > m / 2 {
        x as i64 - m as i64
    } else {
        x as i64
    }
}

/// Inverse of a unit modulo `m`, or `None` when `gcd(x, m) != 1`.
pub fn inv(x: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (x % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// p-adic valuation of a residue modulo `p^prec_digits`; zero maps to `prec_digits`.
pub fn val_p(mut x: u64, p: u64, prec_digits: u32) -> u32 {
    if x == 0 {
        return prec_digits;
    }
    let mut v = 0;
    while x % p == 0 && v < prec_digits {
        x /= p;
        v += 1;
    }
    v
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Largest `M` with `p^M < 2^62`.
pub fn max_digits(p: u64) -> u32 {
    let mut m = 0;
    let mut acc: u128 = 1;
    while acc * (p as u128) < (1u128 << 62) {
        acc *= p as u128;
        m += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_valuation() {
        let m = 3u64.pow(10);
        for x in [1u64, 2, 4, 5, 59048] {
            let y = inv(x, m).unwrap();
            assert_eq!(mul(x, y, m), 1);
        }
        assert!(inv(3, m).is_none());
        assert_eq!(val_p(18, 3, 10), 2);
        assert_eq!(val_p(0, 3, 10), 10);
        assert_eq!(to_signed(m - 1, m), -1);
    }

    #[test]
    fn digit_budget() {
        assert_eq!(max_digits(2), 61);
        assert!(3u128.pow(max_digits(3) + 1) >= 1 << 62);
    }
}
