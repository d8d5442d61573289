//! Truncated power series over decimal intervals.
//!
//! A [`TruncSeries`] is a polynomial `c_0 + c_1*w + ... + c_K*w^K` of
//! interval coefficients, viewed as an element of the ring of power series
//! truncated at order `K`: products discard all terms of degree `> K`.
//! Truncation commutes with ring operations, so working at order `K`
//! throughout is equivalent to truncating an exact computation at the end.
//!
//! Every operation takes a working scale `ws` and rounds each output
//! coefficient outward exactly once. In particular [`mul`] accumulates the
//! full convolution for each output coefficient in exact arithmetic before
//! its single rounding, so interval blow-up comes only from genuine input
//! widths, not from intermediate rounding.

use std::cell::RefCell;
use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use rug::integer::Order;
use rug::ops::DivRounding;
use rug::{Complete, Integer};

use crate::decfix::{DecInterval, FixedDec, Round};
use crate::{Error, Result};

/// A truncated power series: interval coefficients `c_0 ..= c_K` in the
/// expansion variable, truncation order `K = coeffs.len() - 1`.
#[derive(Debug, Clone)]
pub struct TruncSeries {
    coeffs: Vec<DecInterval>,
}

impl TruncSeries {
    /// Build from explicit coefficients `c_0 ..= c_K` (at least one).
    pub fn from_coeffs(coeffs: Vec<DecInterval>) -> Self {
        assert!(!coeffs.is_empty(), "series needs a constant term");
        TruncSeries { coeffs }
    }

    /// The constant series `c` at truncation order `order`.
    pub fn constant(c: DecInterval, order: usize) -> Self {
        let mut coeffs = vec![zero_point(); order + 1];
        coeffs[0] = c;
        TruncSeries { coeffs }
    }

    /// The series `w` (the expansion variable) at truncation order `order`.
    pub fn variable(order: usize) -> Self {
        assert!(order >= 1, "order 0 cannot represent w");
        let mut coeffs = vec![zero_point(); order + 1];
        coeffs[1] = DecInterval::point(FixedDec::from_int(1));
        TruncSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &DecInterval {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[DecInterval] {
        &self.coeffs
    }

    /// The same series at truncation order `k`: drops high coefficients or
    /// pads with exact zeros.
    pub fn truncated(&self, k: usize) -> TruncSeries {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(k + 1, zero_point());
        TruncSeries { coeffs }
    }

    /// Sum of upper bounds of coefficient magnitudes: an upper bound for
    /// the l1 norm of any member polynomial.
    pub fn l1_norm_upper(&self) -> FixedDec {
        let mut acc = FixedDec::zero(0);
        for c in &self.coeffs {
            acc = acc.add(&c.mag_upper());
        }
        acc
    }

    /// Largest coefficient width (diagnostic for certification).
    pub fn max_width(&self) -> FixedDec {
        let mut w = FixedDec::zero(0);
        for c in &self.coeffs {
            w = w.max(c.width());
        }
        w
    }
}

fn zero_point() -> DecInterval {
    DecInterval::point(FixedDec::zero(0))
}

fn is_zero_point(i: &DecInterval) -> bool {
    i.lo().is_zero() && i.hi().is_zero()
}

fn common_scale(a: &TruncSeries, b: &TruncSeries, ws: u32) -> u32 {
    a.coeffs
        .iter()
        .chain(b.coeffs.iter())
        .flat_map(|c| [c.lo().scale(), c.hi().scale()])
        .fold(ws, u32::max)
}

// --- GMP-backed convolution core ---
//
// Convolutions dominate the cost of everything built on this module, so
// their inner loops run on GMP integers (via `rug`): deltas against the
// portable path are the multiply-accumulate primitive (no allocation per
// pair product) and assembly multiplication. GMP stays private to these
// loops; every input and output is still an exact decimal.
//
// Intervals are handled in doubled midpoint-radius form. Writing
// `mid = lo + hi` and `rad = hi - lo` per coefficient (exact integers at a
// common scale), every choice of members `x, y` satisfies
//
//     4*x*y  in  mid1*mid2 +- (|mid1|*rad2 + rad1*|mid2| + rad1*rad2),
//
// so summing midpoint products and radius majorants separately and
// dividing by `4 * 10^(2s - ws)` with directed rounding encloses every
// exact convolution of members — the same containment contract as exact
// endpoint arithmetic, wider only by the second-order `rad1*rad2` term
// (far below one output ulp for certified inputs). Point coefficients
// have zero radius, for them the result is exactly rounded.

thread_local! {
    static RUG_POW10: RefCell<Vec<Integer>> = RefCell::new(vec![Integer::from(1)]);
}

/// Multiply in place by `10^n` (memoized GMP-side powers).
fn rug_mul_pow10(v: &mut Integer, n: u32) {
    if n == 0 {
        return;
    }
    RUG_POW10.with(|cache| {
        let mut c = cache.borrow_mut();
        while c.len() <= n as usize {
            let next = (c.last().unwrap() * 10u32).complete();
            c.push(next);
        }
        *v *= &c[n as usize];
    });
}

/// One interval coefficient in doubled midpoint-radius form: `mid` and
/// `rad` are `lo + hi` and `hi - lo` as integers at the common scale,
/// `abs = |mid|`, and `apr = abs + rad` (the factor pairing `rad` terms).
/// Point coefficients carry no radius parts.
struct GmpCoeff {
    mid: Integer,
    abs: Integer,
    rad: Option<Integer>,
    apr: Option<Integer>,
}

fn gmp_int_at(x: &FixedDec, scale: u32) -> Integer {
    let (neg, mant, s0) = x.raw_parts();
    let mut v = Integer::from_digits(&mant.to_u64_digits(), Order::Lsf);
    rug_mul_pow10(&mut v, scale - s0);
    if neg {
        v = -v;
    }
    v
}

fn gmp_coeff(c: &DecInterval, scale: u32) -> Option<GmpCoeff> {
    if is_zero_point(c) {
        return None;
    }
    let lo = gmp_int_at(c.lo(), scale);
    let hi = gmp_int_at(c.hi(), scale);
    let mid = (&lo + &hi).complete();
    let rad = hi - lo;
    let abs = mid.clone().abs();
    if rad.cmp0() == Ordering::Equal {
        Some(GmpCoeff {
            mid,
            abs,
            rad: None,
            apr: None,
        })
    } else {
        let apr = (&abs + &rad).complete();
        Some(GmpCoeff {
            mid,
            abs,
            rad: Some(rad),
            apr: Some(apr),
        })
    }
}

fn gmp_coeffs(t: &TruncSeries, scale: u32) -> Vec<Option<GmpCoeff>> {
    t.coeffs.iter().map(|c| gmp_coeff(c, scale)).collect()
}

/// Fold one coefficient pair into the midpoint sum `m` and radius sum `r`
/// via GMP multiply-accumulate. The radius majorant groups as
/// `rad1*(abs2 + rad2) + rad2*abs1`, two products when both sides are
/// genuine intervals, one when only one side is, none for points.
#[inline]
fn acc_pair(m: &mut Integer, r: &mut Integer, x: &GmpCoeff, y: &GmpCoeff) {
    *m += &x.mid * &y.mid;
    match (&x.rad, &y.rad) {
        (None, None) => {}
        (Some(rx), None) => *r += rx * &y.abs,
        (None, Some(ry)) => *r += ry * &x.abs,
        (Some(rx), Some(ry)) => {
            *r += rx * y.apr.as_ref().expect("apr accompanies rad");
            *r += ry * &x.abs;
        }
    }
}

/// The divisor `4 * 10^(2*scale - ws)` shared by every output coefficient
/// of one convolution (sums are in quarter-units at twice the scale).
fn quarter_divisor(scale: u32, ws: u32) -> Integer {
    let mut d = Integer::from(4);
    rug_mul_pow10(&mut d, 2 * scale - ws);
    d
}

/// Turn midpoint/radius sums into an outward-rounded interval at `ws`.
fn round_quarters(m: Integer, r: Integer, div: &Integer, ws: u32) -> DecInterval {
    let lo = (&m - &r).complete().div_floor(div);
    let hi = (m + r).div_ceil(div);
    DecInterval::from_endpoints(gmp_to_fixed(&lo, ws), gmp_to_fixed(&hi, ws))
        .expect("outward rounding preserves endpoint order")
}

/// The value `q * 10^-scale` as an exact decimal.
fn gmp_to_fixed(q: &Integer, scale: u32) -> FixedDec {
    let sign = if q.cmp0() == Ordering::Less {
        Sign::Minus
    } else {
        Sign::Plus
    };
    let mag = BigUint::from_bytes_le(&q.to_digits::<u8>(Order::Lsf));
    FixedDec::from_signed_mant(BigInt::from_biguint(sign, mag), scale)
}

/// Coefficient-wise sum, outward-rounded at `ws`. Operands of different
/// orders are zero-padded to the larger order.
pub fn add(a: &TruncSeries, b: &TruncSeries, ws: u32) -> TruncSeries {
    let k = a.order().max(b.order());
    let zero = zero_point();
    let coeffs = (0..=k)
        .map(|i| {
            let x = a.coeffs.get(i).unwrap_or(&zero);
            let y = b.coeffs.get(i).unwrap_or(&zero);
            DecInterval::add(x, y, ws)
        })
        .collect();
    TruncSeries { coeffs }
}

/// Coefficient-wise difference, outward-rounded at `ws`.
pub fn sub(a: &TruncSeries, b: &TruncSeries, ws: u32) -> TruncSeries {
    let k = a.order().max(b.order());
    let zero = zero_point();
    let coeffs = (0..=k)
        .map(|i| {
            let x = a.coeffs.get(i).unwrap_or(&zero);
            let y = b.coeffs.get(i).unwrap_or(&zero);
            DecInterval::sub(x, y, ws)
        })
        .collect();
    TruncSeries { coeffs }
}

/// Multiply every coefficient by the scalar interval `c`, rounding at `ws`.
pub fn scale(a: &TruncSeries, c: &DecInterval, ws: u32) -> TruncSeries {
    let coeffs = a.coeffs.iter().map(|x| DecInterval::mul(x, c, ws)).collect();
    TruncSeries { coeffs }
}

/// Divide every coefficient by the scalar interval `c` (not containing
/// zero), rounding at `ws`.
pub fn div_scalar(a: &TruncSeries, c: &DecInterval, ws: u32) -> Result<TruncSeries> {
    let coeffs = a
        .coeffs
        .iter()
        .map(|x| DecInterval::div(x, c, ws))
        .collect::<Result<Vec<_>>>()?;
    Ok(TruncSeries { coeffs })
}

/// Truncated product.
///
/// Each output coefficient accumulates its entire convolution sum in exact
/// integer arithmetic (midpoint and radius parts separately) and is
/// rounded outward exactly once at `ws`, so interval growth comes only
/// from genuine input widths plus a sub-ulp second-order radius term.
/// Structural zero coefficients are skipped, so multiplying by a sparse
/// series (an affine factor, say) costs only its nonzero terms. Squaring
/// (both arguments the same reference) accumulates each off-diagonal pair
/// once and doubles the sums, halving the multiply count.
pub fn mul(a: &TruncSeries, b: &TruncSeries, ws: u32) -> TruncSeries {
    let k = a.order().max(b.order());
    let s = common_scale(a, b, ws);
    let na = gmp_coeffs(a, s);
    let div = quarter_divisor(s, ws);
    let mut coeffs = Vec::with_capacity(k + 1);
    if std::ptr::eq(a, b) {
        for j in 0..=k {
            let mut m = Integer::new();
            let mut r = Integer::new();
            // Pairs (i, j-i) with i < j-i carry the same radius majorant in
            // either order, so one accumulation doubled is the same bound.
            for i in j.saturating_sub(k)..(j + 1) / 2 {
                let (Some(x), Some(y)) = (&na[i], &na[j - i]) else {
                    continue;
                };
                acc_pair(&mut m, &mut r, x, y);
            }
            m <<= 1;
            r <<= 1;
            if j % 2 == 0 {
                if let Some(x) = &na[j / 2] {
                    acc_pair(&mut m, &mut r, x, x);
                }
            }
            coeffs.push(round_quarters(m, r, &div, ws));
        }
        return TruncSeries { coeffs };
    }
    let nb = gmp_coeffs(b, s);
    for j in 0..=k {
        let mut m = Integer::new();
        let mut r = Integer::new();
        let i_max = j.min(a.order());
        let i_min = j.saturating_sub(b.order());
        for i in i_min..=i_max {
            let (Some(x), Some(y)) = (&na[i], &nb[j - i]) else {
                continue;
            };
            acc_pair(&mut m, &mut r, x, y);
        }
        coeffs.push(round_quarters(m, r, &div, ws));
    }
    TruncSeries { coeffs }
}

/// Evaluate the polynomial `p[0] + p[1]*x + ... + p[d]*x^d` at a series
/// argument by Horner's rule, in the truncation ring of `x`.
pub fn poly_eval_horner(p: &[DecInterval], x: &TruncSeries, ws: u32) -> TruncSeries {
    if p.len() >= 2 && x.coeffs.iter().skip(2).all(is_zero_point) {
        return poly_eval_affine(p, x, ws);
    }
    let k = x.order();
    let mut acc = match p.last() {
        Some(c) => TruncSeries::constant(c.clone(), k),
        None => return TruncSeries::constant(zero_point(), k),
    };
    for c in p[..p.len() - 1].iter().rev() {
        acc = mul(&acc, x, ws);
        acc.coeffs[0] = DecInterval::add(&acc.coeffs[0], c, ws);
    }
    acc
}

/// One scalar-times-coefficient term of an affine Horner step, folded into
/// the midpoint sum `m` and radius sum `r`. The accumulator coefficient is
/// `(am, ar)` in doubled units; the radius majorant mirrors `acc_pair`.
fn affine_term(m: &mut Integer, r: &mut Integer, c: &GmpCoeff, am: &Integer, ar: &Integer) {
    *m += &c.mid * am;
    match (&c.rad, ar.cmp0() != Ordering::Equal) {
        (None, false) => {}
        (None, true) => *r += ar * &c.abs,
        (Some(rc), false) => *r += rc * &*am.as_abs(),
        (Some(rc), true) => {
            let apr = (&*am.as_abs() + ar).complete();
            *r += rc * &apr;
            *r += ar * &c.abs;
        }
    }
}

/// Horner evaluation specialized to an affine argument `x0 + x1*w`.
///
/// The accumulator stays in integer midpoint/radius form at scale `ws`
/// between steps, so each step costs two scalar products and one directed
/// rounding per coefficient with no decimal round trips. Scalars and
/// polynomial coefficients finer than `ws` are rounded outward once up
/// front; the result encloses the generic path's and matches it exactly
/// when every input is at scale `ws` or coarser.
fn poly_eval_affine(p: &[DecInterval], x: &TruncSeries, ws: u32) -> TruncSeries {
    let k = x.order();
    let sx = x
        .coeffs
        .iter()
        .take(2)
        .flat_map(|c| [c.lo().scale(), c.hi().scale()])
        .fold(0, u32::max)
        .min(ws);
    let outward = |c: &DecInterval, scale: u32| -> DecInterval {
        DecInterval::from_endpoints(
            c.lo().round_to_scale(scale, Round::Down),
            c.hi().round_to_scale(scale, Round::Up),
        )
        .expect("directed rounding preserves endpoint order")
    };
    let x0 = gmp_coeff(&outward(&x.coeffs[0], sx), sx);
    let x1 = x
        .coeffs
        .get(1)
        .and_then(|c| gmp_coeff(&outward(c, sx), sx));
    // Polynomial coefficients as doubled (sum, difference) endpoint pairs.
    let pc: Vec<Option<(Integer, Integer)>> = p
        .iter()
        .map(|c| {
            if is_zero_point(c) {
                return None;
            }
            let r = outward(c, ws);
            let lo = gmp_int_at(r.lo(), ws);
            let hi = gmp_int_at(r.hi(), ws);
            Some(((&lo + &hi).complete(), hi - lo))
        })
        .collect();
    // Products of doubled units at ws + sx are rounded back to ws.
    let div = {
        let mut d = Integer::from(4);
        rug_mul_pow10(&mut d, sx);
        d
    };
    let mut am = vec![Integer::new(); k + 1];
    let mut ar = vec![Integer::new(); k + 1];
    if let Some(Some((pm, pr))) = pc.last() {
        am[0] = pm.clone();
        ar[0] = pr.clone();
    }
    let mut nm = vec![Integer::new(); k + 1];
    let mut nr = vec![Integer::new(); k + 1];
    for step in (0..p.len() - 1).rev() {
        for j in 0..=k {
            let mut m = Integer::new();
            let mut r = Integer::new();
            if let Some(c) = &x0 {
                affine_term(&mut m, &mut r, c, &am[j], &ar[j]);
            }
            if j >= 1 {
                if let Some(c) = &x1 {
                    affine_term(&mut m, &mut r, c, &am[j - 1], &ar[j - 1]);
                }
            }
            let lo = (&m - &r).complete().div_floor(&div);
            let hi = (m + r).div_ceil(&div);
            nm[j] = (&lo + &hi).complete();
            nr[j] = hi - lo;
        }
        if let Some((pm, pr)) = &pc[step] {
            nm[0] += pm;
            nr[0] += pr;
        }
        std::mem::swap(&mut am, &mut nm);
        std::mem::swap(&mut ar, &mut nr);
    }
    let coeffs = (0..=k)
        .map(|j| {
            let lo = (&am[j] - &ar[j]).complete() >> 1;
            let hi = (&am[j] + &ar[j]).complete() >> 1;
            DecInterval::from_endpoints(gmp_to_fixed(&lo, ws), gmp_to_fixed(&hi, ws))
                .expect("midpoint/radius form preserves endpoint order")
        })
        .collect();
    TruncSeries { coeffs }
}

/// Exact-sum linear combination `sum_r cs[r] * xs[r]` of equal-order
/// series, one outward rounding per output coefficient.
fn linear_combination(cs: &[DecInterval], xs: &[TruncSeries], ws: u32) -> TruncSeries {
    debug_assert_eq!(cs.len(), xs.len());
    debug_assert!(!xs.is_empty());
    let k = xs[0].order();
    let s = cs
        .iter()
        .chain(xs.iter().flat_map(|t| t.coeffs.iter()))
        .flat_map(|c| [c.lo().scale(), c.hi().scale()])
        .fold(ws, u32::max);
    let ncs: Vec<Option<GmpCoeff>> = cs.iter().map(|c| gmp_coeff(c, s)).collect();
    let nxs: Vec<Vec<Option<GmpCoeff>>> = xs.iter().map(|t| gmp_coeffs(t, s)).collect();
    let div = quarter_divisor(s, ws);
    let mut coeffs = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut m = Integer::new();
        let mut r = Integer::new();
        for (c, t) in ncs.iter().zip(&nxs) {
            let (Some(c), Some(x)) = (c, &t[i]) else {
                continue;
            };
            acc_pair(&mut m, &mut r, c, x);
        }
        coeffs.push(round_quarters(m, r, &div, ws));
    }
    TruncSeries { coeffs }
}

/// Evaluate the polynomial `p[0] + p[1]*x + ... + p[d]*x^d` at a series
/// argument by square-root block grouping: the coefficients are split into
/// blocks of width about `sqrt(d)`, each block is a scalar combination of
/// precomputed powers `x^0 ..= x^s`, and the blocks are combined by Horner
/// in `x^s`. Same enclosure contract as [`poly_eval_horner`] (the result
/// brackets the truncated composition for all members of the inputs), but
/// only about `2*sqrt(d)` ring products instead of `d` — a large win when
/// `x` is dense. Small polynomials fall back to Horner.
pub fn poly_eval_blocks(p: &[DecInterval], x: &TruncSeries, ws: u32) -> TruncSeries {
    let d = p.len().saturating_sub(1);
    if d < 4 || x.coeffs.iter().skip(2).all(is_zero_point) {
        // Short polynomials and affine arguments are cheaper by Horner
        // (the affine case runs linearly in integer form).
        return poly_eval_horner(p, x, ws);
    }
    let k = x.order();
    let s = (d as f64).sqrt().ceil() as usize;
    let mut powers: Vec<TruncSeries> = Vec::with_capacity(s + 1);
    powers.push(TruncSeries::constant(
        DecInterval::point(FixedDec::from_int(1)),
        k,
    ));
    powers.push(x.truncated(k));
    for i in 2..=s {
        // Even powers square the half power, which costs half a product.
        let next = if i % 2 == 0 {
            let half = &powers[i / 2];
            mul(half, half, ws)
        } else {
            mul(&powers[i - 1], x, ws)
        };
        powers.push(next);
    }
    let block = |b: usize| -> TruncSeries {
        let cs = &p[b * s..((b + 1) * s).min(p.len())];
        linear_combination(cs, &powers[..cs.len()], ws)
    };
    let nblocks = p.len().div_ceil(s);
    let mut acc = block(nblocks - 1);
    for b in (0..nblocks - 1).rev() {
        acc = mul(&acc, &powers[s], ws);
        acc = add(&acc, &block(b), ws);
    }
    acc
}

/// Divide by an affine factor: the unique series `g` with
/// `(c0 + c1*w) * g = a` in the truncation ring, computed by the recurrence
/// `g_0 = a_0/c0`, `g_j = (a_j - c1*g_{j-1})/c0`.
///
/// Requires `c0 != 0` (an affine factor with nonzero constant term is a
/// unit in the truncated ring). Note the recurrence multiplies the width
/// of `g_{j-1}` by `|c1/c0|`, so for `|c1| > |c0|` the caller must budget
/// working precision for geometric width growth across the `K`
/// coefficients.
pub fn div_by_affine(
    a: &TruncSeries,
    c0: &FixedDec,
    c1: &FixedDec,
    ws: u32,
) -> Result<TruncSeries> {
    if c0.is_zero() {
        return Err(Error::SeriesDivisionByZero);
    }
    let c0i = DecInterval::point(c0.clone());
    let c1i = DecInterval::point(c1.clone());
    let mut coeffs: Vec<DecInterval> = Vec::with_capacity(a.coeffs.len());
    for (j, aj) in a.coeffs.iter().enumerate() {
        let num = if j == 0 {
            aj.clone()
        } else {
            let t = DecInterval::mul(&c1i, &coeffs[j - 1], ws);
            DecInterval::sub(aj, &t, ws)
        };
        coeffs.push(DecInterval::div(&num, &c0i, ws)?);
    }
    Ok(TruncSeries { coeffs })
}
