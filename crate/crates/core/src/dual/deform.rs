//! The deformation equation `lambda dY/dlambda = Y G` on the first-order dual
//! basis, its local solution at `lambda = 0` and the symplectic identity.
//!
//! Everything at `lambda = 0` is exact over `Q` in the variable
//! `Lambda = gamma^{n+1} lambda`; `lambda d/dlambda = Lambda d/dLambda`.

use super::basis::AlgebraicDualBasis;
use super::lambda::{LambdaRing, LambdaSeries};
use crate::error::{Error, Result};
use crate::frobenius::Check;
use crate::padic::ring::GammaRing;
use crate::padic::{zmod, EisensteinContext};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type QMat = Vec<Vec<BigRational>>;

pub fn q_zero(d: usize) -> QMat {
    vec![vec![BigRational::zero(); d]; d]
}

pub fn q_identity(d: usize) -> QMat {
    let mut m = q_zero(d);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigRational::one();
    }
    m
}

pub fn q_mul(x: &QMat, y: &QMat) -> QMat {
    let d = x.len();
    let mut out = q_zero(d);
    for i in 0..d {
        for k in 0..d {
            if x[i][k].is_zero() {
                continue;
            }
            for j in 0..d {
                if !y[k][j].is_zero() {
                    out[i][j] += &x[i][k] * &y[k][j];
                }
            }
        }
    }
    out
}

pub fn q_add(x: &QMat, y: &QMat) -> QMat {
    x.iter()
        .zip(y)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + v).collect())
        .collect()
}

pub fn q_sub(x: &QMat, y: &QMat) -> QMat {
    x.iter()
        .zip(y)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u - v).collect())
        .collect()
}

pub fn q_scale(x: &QMat, c: &BigRational) -> QMat {
    x.iter()
        .map(|a| a.iter().map(|u| u * c).collect())
        .collect()
}

pub fn q_transpose(x: &QMat) -> QMat {
    let d = x.len();
    (0..d)
        .map(|i| (0..d).map(|j| x[j][i].clone()).collect())
        .collect()
}

fn q_is_zero(x: &QMat) -> bool {
    x.iter().flatten().all(|v| v.is_zero())
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `G = G0 + Lambda G1` with ones below the diagonal in `G0` and the corner
/// `G1[0][n] = 1`; for `-gamma` the corner picks up `(-1)^{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionMatrix {
    pub n: usize,
    pub g0: QMat,
    pub g1: QMat,
}

pub fn connection_matrix(n: usize, sign: i64) -> ConnectionMatrix {
    let d = n + 1;
    let mut g0 = q_zero(d);
    for k in 1..d {
        g0[k][k - 1] = BigRational::one();
    }
    let mut g1 = q_zero(d);
    g1[0][n] = int(sign.pow(n as u32 + 1));
    ConnectionMatrix { n, g0, g1 }
}

impl ConnectionMatrix {
    /// Entries as series in `lambda`: the corner is `gamma^{n+1} lambda`.
    pub fn to_lambda(&self, ring: &LambdaRing) -> Vec<Vec<LambdaSeries>> {
        let ctx = ring.ctx;
        let d = self.n + 1;
        let corner = ctx.mul_gamma_pow(&ctx.one(), d as u64);
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let c0 = ring.from_int(rat_to_i64(&self.g0[i][j]));
                        let c1 =
                            ring.monomial(1, &ctx.scale_int(&corner, rat_to_i64(&self.g1[i][j])));
                        ring.add(&c0, &c1)
                    })
                    .collect()
            })
            .collect()
    }
}

fn rat_to_i64(x: &BigRational) -> i64 {
    i64::try_from(x.to_integer()).expect("small integer entry")
}

/// The nilpotent `H` of the local exponent at `lambda = 0`.
pub fn nilpotent_h(n: usize) -> QMat {
    connection_matrix(n, 1).g0
}

/// Antidiagonal `Theta[k][n-k] = (-1)^k`.
pub fn theta_matrix(n: usize) -> QMat {
    let mut m = q_zero(n + 1);
    for k in 0..=n {
        m[k][n - k] = int(if k % 2 == 0 { 1 } else { -1 });
    }
    m
}

/// Re-expand `D^(1)*_lambda` of the dual basis in the dual basis, from the
/// algebraic coefficients. Returns `c[k][i]` with
/// `D_lambda xi*_k = sum_i c[k][i](Lambda) xi*_i`, coefficients mod `p^D`.
pub fn rederive_connection(b: &AlgebraicDualBasis) -> Result<(Vec<Vec<Vec<u64>>>, Check)> {
    let lat = &b.lat;
    let n = lat.n;
    let pm = b.pm;
    let r_cap = b.lambda_cap;
    let big_u = lat.big_u();
    let apply = |k: usize, u: &crate::weight::Exp| -> Vec<u64> {
        let e = &b.e[k];
        let cur = &e[u];
        let m = lat.m(u);
        let mut out: Vec<u64> = cur
            .iter()
            .enumerate()
            .map(|(r, &c)| zmod::mul(c, zmod::from_i64(r as i64 - m, pm), pm))
            .collect();
        let v = u.add(&big_u);
        let shift = (1 + m - lat.m(&v)) as usize;
        let prev = &e[&v];
        for r in shift..r_cap {
            out[r] = zmod::sub(out[r], prev[r - shift], pm);
        }
        out
    };
    let coeffs: Vec<Vec<Vec<u64>>> = (0..=n)
        .map(|k| (0..=n).map(|i| apply(k, &lat.eps(i))).collect())
        .collect();
    let mut bad = Vec::new();
    for u in lat.monomials_up_to(b.weight_cap - 1) {
        for k in 0..=n {
            let lhs = apply(k, &u);
            let mut rhs = vec![0u64; r_cap];
            for i in 0..=n {
                let ei = &b.e[i][&u];
                for (s, &c) in coeffs[k][i].iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    for r in s..r_cap {
                        rhs[r] = zmod::add(rhs[r], zmod::mul(c, ei[r - s], pm), pm);
                    }
                }
            }
            if lhs != rhs {
                bad.push(format!("k={k} at {}", lat.fmt_exp(&u)));
            }
        }
    }
    let g = connection_matrix(n, 1);
    let mut mismatch = Vec::new();
    for k in 0..=n {
        for i in 0..=n {
            let mut want = vec![0u64; r_cap];
            want[0] = zmod::from_i64(-rat_to_i64(&g.g0[k][i]), pm);
            if r_cap > 1 {
                want[1] = zmod::from_i64(-rat_to_i64(&g.g1[k][i]), pm);
            }
            if coeffs[k][i] != want {
                mismatch.push(format!("G[{k}][{i}]"));
            }
        }
    }
    let pass = bad.is_empty() && mismatch.is_empty();
    let detail = if pass {
        format!("weights <= {}, Lambda-degree < {r_cap}", b.weight_cap - 1)
    } else {
        format!("outside span: {:?}; differs: {:?}", bad.first(), mismatch)
    };
    Ok((coeffs, Check::new("connection_rederived", pass, detail)))
}

/// `P(Lambda) = sum_r q[r] Lambda^r` with `Y = lambda^H P` solving the system
/// for `sign * gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSolution {
    pub n: usize,
    pub sign: i64,
    pub q: Vec<QMat>,
}

/// Solve `(r + ad_H) Q_r = Q_{r-1} G1` order by order; `ad_H` is nilpotent so
/// the Neumann series terminates, and a nonzero remainder is an error.
pub fn local_solution(n: usize, sign: i64, cap: usize) -> Result<LocalSolution> {
    if sign.abs() != 1 {
        return Err(Error::InvalidParameter("sign must be 1 or -1".into()));
    }
    let d = n + 1;
    let conn = connection_matrix(n, sign);
    let h = nilpotent_h(n);
    let ad = |x: &QMat| q_sub(&q_mul(&h, x), &q_mul(x, &h));
    let mut q = vec![q_identity(d)];
    for r in 1..cap.max(1) {
        let rhs = q_mul(&q[r - 1], &conn.g1);
        let rr = int(r as i64);
        let mut term = q_scale(&rhs, &(BigRational::one() / &rr));
        let mut sol = q_zero(d);
        for _ in 0..=2 * n + 1 {
            sol = q_add(&sol, &term);
            term = q_scale(&ad(&term), &(-BigRational::one() / &rr));
        }
        if !q_is_zero(&term) {
            return Err(Error::Singular(format!(
                "recursion at order {r} did not terminate"
            )));
        }
        let check = q_add(&q_scale(&sol, &rr), &ad(&sol));
        if check != rhs {
            return Err(Error::Singular(format!(
                "recursion at order {r} not solved"
            )));
        }
        q.push(sol);
    }
    Ok(LocalSolution { n, sign, q })
}

/// `sum_{a, r} c[a][r] log(lambda)^a Lambda^r`.
type LogSeries = Vec<Vec<QMat>>;

fn factorial(a: usize) -> BigRational {
    (1..=a as i64)
        .map(int)
        .fold(BigRational::one(), |x, y| x * y)
}

impl LocalSolution {
    pub fn cap(&self) -> usize {
        self.q.len()
    }

    /// `Y = lambda^H P` as a polynomial in `log lambda`.
    fn y_series(&self) -> LogSeries {
        let h = nilpotent_h(self.n);
        let mut hp = q_identity(self.n + 1);
        let mut out = Vec::new();
        for a in 0..=self.n {
            let c = q_scale(&hp, &(BigRational::one() / factorial(a)));
            out.push(self.q.iter().map(|qr| q_mul(&c, qr)).collect());
            hp = q_mul(&hp, &h);
        }
        out
    }

    /// Coefficient of `Lambda^r` as an element of `O_0`, when it is integral.
    pub fn coefficient(
        &self,
        ctx: &EisensteinContext,
        r: usize,
    ) -> Result<Vec<Vec<crate::padic::RamifiedElem>>> {
        let p = BigInt::from(ctx.p());
        let pm = ctx.cfg().pm();
        let gpow = ctx.mul_gamma_pow(&ctx.one(), ((self.n + 1) * r) as u64);
        let conv = |x: &BigRational| -> Result<crate::padic::RamifiedElem> {
            if x.is_zero() {
                return Ok(ctx.zero());
            }
            let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
            let mut v = 0i64;
            while (&num % &p).is_zero() {
                num /= &p;
                v += 1;
            }
            while (&den % &p).is_zero() {
                den /= &p;
                v -= 1;
            }
            let unit =
                crate::frobenius::splitting::rational_residue(&BigRational::new(num, den), pm)?;
            let y = ctx.mul(&gpow, &ctx.from_int(zmod::to_signed(unit, pm)));
            if v >= 0 {
                Ok(ctx.mul(
                    &y,
                    &ctx.from_int(zmod::to_signed(zmod::pow(ctx.p(), v as u64, pm), pm)),
                ))
            } else {
                ctx.div_p_pow(&y, (-v) as u32)
            }
        };
        self.q[r]
            .iter()
            .map(|row| row.iter().map(conv).collect())
            .collect()
    }
}

/// Substitute `Y = lambda^H P` back into `lambda dY/dlambda = Y G`, exactly,
/// through `Lambda^{cap-1}` and every power of `log lambda`.
pub fn ode_residual_check(sol: &LocalSolution) -> Check {
    let n = sol.n;
    let conn = connection_matrix(n, sol.sign);
    let y = sol.y_series();
    let cap = sol.cap();
    let mut bad = Vec::new();
    for a in 0..=n {
        for r in 0..cap {
            // lambda d/dlambda of L^a Lambda^r is a L^{a-1} Lambda^r + r L^a Lambda^r
            let mut lhs = q_scale(&y[a][r], &int(r as i64));
            if a < n {
                lhs = q_add(&lhs, &q_scale(&y[a + 1][r], &int(a as i64 + 1)));
            }
            let mut rhs = q_mul(&y[a][r], &conn.g0);
            if r > 0 {
                rhs = q_add(&rhs, &q_mul(&y[a][r - 1], &conn.g1));
            }
            if lhs != rhs {
                bad.push(format!("log^{a} Lambda^{r}"));
            }
        }
    }
    let sign = if sol.sign > 0 { "+" } else { "-" };
    Check::new(
        format!("ode_residual_{sign}gamma"),
        bad.is_empty(),
        if bad.is_empty() {
            format!("zero through Lambda^{}", cap - 1)
        } else {
            bad.join(", ")
        },
    )
}

/// `lambda^H P Theta (lambda^H P_-)^t = Theta` through `Lambda^{cap-1}`, with
/// every positive power of `log lambda` required to cancel.
pub fn symplectic_check(plus: &LocalSolution, minus: &LocalSolution) -> Check {
    let n = plus.n;
    let cap = plus.cap().min(minus.cap());
    let theta = theta_matrix(n);
    let y = plus.y_series();
    let ym = minus.y_series();
    let mut bad = Vec::new();
    for c in 0..=2 * n {
        for r in 0..cap {
            let mut acc = q_zero(n + 1);
            for a in 0..=c.min(n) {
                let b = c - a;
                if b > n {
                    continue;
                }
                for r1 in 0..=r {
                    let t = q_mul(&q_mul(&y[a][r1], &theta), &q_transpose(&ym[b][r - r1]));
                    acc = q_add(&acc, &t);
                }
            }
            let want = if c == 0 && r == 0 {
                theta.clone()
            } else {
                q_zero(n + 1)
            };
            if acc != want {
                bad.push(format!("log^{c} Lambda^{r}"));
            }
        }
    }
    Check::new(
        "symplectic",
        bad.is_empty(),
        if bad.is_empty() {
            format!("identity through Lambda^{}", cap - 1)
        } else {
            bad.join(", ")
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{build_field, construct_gamma};
    use crate::weight::Simplex;

    #[test]
    fn n1_matrix() {
        let g = connection_matrix(1, 1);
        assert_eq!(g.g0, vec![vec![int(0), int(0)], vec![int(1), int(0)]]);
        assert_eq!(g.g1, vec![vec![int(0), int(1)], vec![int(0), int(0)]]);
        let c = construct_gamma(&build_field(3, 1, 8).unwrap(), 12).unwrap();
        let ring = LambdaRing::new(&c, 4);
        let m = g.to_lambda(&ring);
        assert_eq!(m[0][1].coeffs[1], c.gamma_pow(2));
        for row in &m {
            for e in row {
                assert!(e.coeffs[2..].iter().all(|x| c.is_zero(x)));
            }
        }
    }

    #[test]
    fn theta_transpose() {
        for n in 1..5 {
            let t = theta_matrix(n);
            let sign = int(if n % 2 == 0 { 1 } else { -1 });
            assert_eq!(q_transpose(&t), q_scale(&t, &sign));
        }
    }

    #[test]
    fn connection_from_dual_basis() {
        for (p, n) in [(3u64, 1usize), (2, 2), (5, 2), (3, 3)] {
            let c = construct_gamma(&build_field(p, 1, 16).unwrap(), 12).unwrap();
            let b =
                AlgebraicDualBasis::solve(Simplex::new(n).unwrap(), p, c.cfg().pm(), 6, 5).unwrap();
            let (_, check) = rederive_connection(&b).unwrap();
            assert!(check.pass, "p={p} n={n} {check:?}");
        }
    }

    #[test]
    fn local_solutions() {
        for n in 1..=3 {
            let plus = local_solution(n, 1, 8).unwrap();
            let minus = local_solution(n, -1, 8).unwrap();
            assert_eq!(plus.q[0], q_identity(n + 1));
            assert!(ode_residual_check(&plus).pass);
            assert!(ode_residual_check(&minus).pass);
            let s = symplectic_check(&plus, &minus);
            assert!(s.pass, "n={n} {s:?}");
            // gamma -> -gamma acts as Lambda -> (-1)^{n+1} Lambda
            let f = int(if (n + 1) % 2 == 0 { 1 } else { -1 });
            for r in 0..8 {
                let mut c = BigRational::one();
                for _ in 0..r {
                    c *= &f;
                }
                assert_eq!(minus.q[r], q_scale(&plus.q[r], &c));
            }
        }
    }

    #[test]
    fn constant_term_symplectic() {
        let plus = local_solution(2, 1, 1).unwrap();
        let minus = local_solution(2, -1, 1).unwrap();
        assert!(symplectic_check(&plus, &minus).pass);
    }

    #[test]
    fn broken_solution_fails() {
        let mut plus = local_solution(1, 1, 4).unwrap();
        plus.q[2][0][0] += int(1);
        assert!(!ode_residual_check(&plus).pass);
    }

    #[test]
    fn integral_coefficients_n1() {
        let c = construct_gamma(&build_field(3, 1, 12).unwrap(), 20).unwrap();
        let sol = local_solution(1, 1, 5).unwrap();
        for r in 0..5 {
            let m = sol.coefficient(&c, r).unwrap();
            for x in m.iter().flatten() {
                assert!(c.val(x) >= 0);
            }
        }
    }
}
