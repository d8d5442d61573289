//! Helpers shared by the unit tests: exact rational mirrors of the decimal
//! types, used as independent oracles.

use num_bigint::BigInt;
use num_rational::BigRational;
use std::str::FromStr;

use crate::decfix::{DecInterval, FixedDec};

/// Exact rational value of a `FixedDec`, recovered through its exact
/// decimal rendering (so only public API is involved).
pub(crate) fn rat(x: &FixedDec) -> BigRational {
    rat_str(&x.to_string())
}

/// Exact rational value of a plain decimal string.
pub(crate) fn rat_str(s: &str) -> BigRational {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(&digits).unwrap();
    let den = BigInt::from(10u8).pow(frac.len() as u32);
    BigRational::new(num, den)
}

pub(crate) fn interval_contains_rat(i: &DecInterval, q: &BigRational) -> bool {
    &rat(i.lo()) <= q && q <= &rat(i.hi())
}

/// Truncated product of rational coefficient sequences: the degree-`k`
/// prefix of the polynomial product.
pub(crate) fn rat_poly_mul(a: &[BigRational], b: &[BigRational], k: usize) -> Vec<BigRational> {
    let zero = BigRational::from(BigInt::from(0));
    let mut out = vec![zero; k + 1];
    for (i, ai) in a.iter().enumerate() {
        if i > k {
            break;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j > k {
                break;
            }
            out[i + j] += ai * bj;
        }
    }
    out
}

pub(crate) fn rat_poly_add(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let zero = BigRational::from(BigInt::from(0));
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            a.get(i).cloned().unwrap_or_else(|| zero.clone())
                + b.get(i).cloned().unwrap_or_else(|| zero.clone())
        })
        .collect()
}

/// Rational oracle for division by an affine factor `c0 + c1*w` in the
/// truncated ring: the recurrence `g_j = (a_j - c1*g_{j-1}) / c0`.
pub(crate) fn rat_div_affine(
    a: &[BigRational],
    c0: &BigRational,
    c1: &BigRational,
) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = Vec::with_capacity(a.len());
    for (j, aj) in a.iter().enumerate() {
        let prev = if j == 0 {
            BigRational::from(BigInt::from(0))
        } else {
            c1 * &out[j - 1]
        };
        out.push((aj - prev) / c0);
    }
    out
}

fn rzero() -> BigRational {
    BigRational::from(BigInt::from(0))
}

fn rone() -> BigRational {
    BigRational::from(BigInt::from(1))
}

/// Full (untruncated) polynomial product.
fn poly_mul_full(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    rat_poly_mul(a, b, a.len() + b.len() - 2)
}

/// Exact rational evaluation of `psi(z) = 1 - z^2 (u/10 + sum nu_i w^i)`.
pub(crate) fn rat_eval_psi(u: &BigRational, nu: &[BigRational], z: &BigRational) -> BigRational {
    let z2 = z * z;
    let w = (z2.clone() - rone()) / rat_str("2.5");
    let mut g = u / BigRational::from(BigInt::from(10));
    let mut wp = rone();
    for v in nu {
        wp *= w.clone();
        g += v * wp.clone();
    }
    rone() - z2 * g
}

/// Symbolic oracle for the doubling operator, computed entirely in
/// `x = z^2` space with exact rational polynomial algebra — a route
/// disjoint from the `w`-space truncated-series implementation.
///
/// Builds `P(x)` with `psi(z) = P(z^2)`, composes
/// `T(psi)(z) = P((P(lambda^2 x))^2) / lambda` without any truncation,
/// converts back to `w`-coordinates by polynomial division by `x` and the
/// Taylor shift `x = 1 + 2.5 w`, and reads off `(v, (mu_1, ..., mu_k))`.
pub(crate) fn rat_apply_t(
    u: &BigRational,
    nu: &[BigRational],
    k: usize,
) -> (BigRational, Vec<BigRational>) {
    use num_integer::binomial;

    let ten = BigRational::from(BigInt::from(10));
    // G part in x: u/10 + sum nu_i ((x-1)/2.5)^i.
    let base = vec![rat_str("-0.4"), rat_str("0.4")];
    let mut gx = vec![u / &ten];
    let mut pw = vec![rone()];
    for v in nu {
        pw = poly_mul_full(&pw, &base);
        let term: Vec<BigRational> = pw.iter().map(|c| c * v).collect();
        gx = rat_poly_add(&gx, &term);
    }
    // P(x) = 1 - x * gx.
    let mut p = vec![rzero(); gx.len() + 1];
    p[0] = rone();
    for (j, c) in gx.iter().enumerate() {
        p[j + 1] -= c;
    }

    let lam = rone() - u / &ten;
    assert!(lam != rzero(), "oracle requires lambda != 0");
    let lam2 = &lam * &lam;

    // inner(x) = P(lambda^2 x).
    let mut l2p = rone();
    let inner: Vec<BigRational> = p
        .iter()
        .map(|c| {
            let r = c * &l2p;
            l2p *= lam2.clone();
            r
        })
        .collect();
    let sq = poly_mul_full(&inner, &inner);

    // outer = P(sq), composed by Horner.
    let mut outer = vec![p.last().unwrap().clone()];
    for c in p[..p.len() - 1].iter().rev() {
        outer = poly_mul_full(&outer, &sq);
        outer[0] += c;
    }

    // tpsi = outer / lambda; 1 - tpsi = x * h(x).
    let q: Vec<BigRational> = outer.iter().map(|c| -(c / &lam)).collect();
    let mut q0 = q[0].clone();
    q0 += rone();
    assert!(q0 == rzero(), "T psi must fix the value 1 at z = 0");
    let h = &q[1..];

    // Taylor shift x = 1 + 2.5 w: coefficient of w^j is
    // sum_{i >= j} h_i * C(i, j) * 2.5^j.
    let five_half = rat_str("2.5");
    let mut shift_pow = rone();
    let mut g_w = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let mut acc = rzero();
        for (i, hi) in h.iter().enumerate().skip(j) {
            let c = binomial(BigInt::from(i), BigInt::from(j));
            acc += hi * BigRational::from(c);
        }
        g_w.push(acc * shift_pow.clone());
        shift_pow *= five_half.clone();
    }

    let v = &g_w[0] * &ten;
    let mu = g_w[1..].to_vec();
    (v, mu)
}
