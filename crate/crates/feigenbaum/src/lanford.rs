//! Lanford coordinates, the doubling operator `T`, and the contraction
//! map `Phi`.
//!
//! A candidate solution of the functional equation is represented as
//!
//! ```text
//!     psi(z) = 1 - z^2 * ( u/10 + sum_{i=1}^{d} nu_i * w^i ),
//!     w = (z^2 - 1) / 2.5,
//! ```
//!
//! i.e. by the coordinate vector `(u, (nu_1, ..., nu_d))`. The norm is
//! `|u| + sum |nu_i|`; in that metric the map
//!
//! ```text
//!     Phi(psi) = psi - J(T(psi) - psi),      J(u, nu) = (u/3.669, -nu),
//! ```
//!
//! is a contraction with factor < 0.9 on a ball of radius 0.009 around the
//! reference polynomial [`psi0`], and its fixed point is the solution `g`.
//! (The [`crate::verify`] module re-establishes the quantitative facts
//! behind this at runtime.)
//!
//! [`apply_t`] computes `T` in certified interval arithmetic working
//! entirely in truncated power series in `w`; [`apply_phi`] combines it
//! with `J`. Both truncate at a caller-chosen ring order `K`, which is
//! harmless for the leading coefficients: truncation is a quotient
//! homomorphism, so coefficients of index `<= K` come out exactly as if
//! computed without truncation.

use crate::decfix::{DecInterval, FixedDec, Round};
use crate::series::{self, TruncSeries};
use crate::{Error, Result};

use num_bigint::BigUint;
use num_integer::binomial;

/// Exact coordinates `(u, (nu_1, ..., nu_d))` of a candidate function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanfordCoords {
    pub u: FixedDec,
    pub nu: Vec<FixedDec>,
}

/// Interval-valued coordinates: the image of a set of functions.
#[derive(Debug, Clone)]
pub struct IntervalCoords {
    pub u: DecInterval,
    pub nu: Vec<DecInterval>,
}

impl LanfordCoords {
    pub fn new(u: FixedDec, nu: Vec<FixedDec>) -> Self {
        LanfordCoords { u, nu }
    }

    /// Number of `nu` coefficients (the polynomial degree in `w`).
    pub fn degree(&self) -> usize {
        self.nu.len()
    }

    /// Exact norm `|u| + sum |nu_i|`.
    pub fn norm(&self) -> FixedDec {
        let mut acc = self.u.abs();
        for v in &self.nu {
            acc = acc.add(&v.abs());
        }
        acc
    }

    /// Exact norm of the coordinate-wise difference, zero-padding the
    /// shorter `nu` vector.
    pub fn norm_dist(&self, other: &LanfordCoords) -> FixedDec {
        let mut acc = self.u.sub(&other.u).abs();
        let zero = FixedDec::zero(0);
        let n = self.nu.len().max(other.nu.len());
        for i in 0..n {
            let a = self.nu.get(i).unwrap_or(&zero);
            let b = other.nu.get(i).unwrap_or(&zero);
            acc = acc.add(&a.sub(b).abs());
        }
        acc
    }

    /// The scaling factor `lambda = psi(1) = 1 - u/10`, exactly.
    pub fn lambda(&self) -> FixedDec {
        FixedDec::from_int(1).sub(&self.u.mul_pow10(-1))
    }

    /// Point-interval view.
    pub fn to_intervals(&self) -> IntervalCoords {
        IntervalCoords {
            u: DecInterval::point(self.u.clone()),
            nu: self.nu.iter().cloned().map(DecInterval::point).collect(),
        }
    }
}

impl IntervalCoords {
    pub fn degree(&self) -> usize {
        self.nu.len()
    }

    /// Largest endpoint gap over all coordinates.
    pub fn max_width(&self) -> FixedDec {
        let mut w = self.u.width();
        for v in &self.nu {
            w = w.max(v.width());
        }
        w
    }

    /// Upper bound for the norm over all members: `max|u| + sum max|nu_i|`.
    pub fn norm_upper(&self) -> FixedDec {
        let mut acc = self.u.mag_upper();
        for v in &self.nu {
            acc = acc.add(&v.mag_upper());
        }
        acc
    }

    /// Exact midpoints rounded to `scale` (to nearest, ties away from
    /// zero). The result differs from any member by at most
    /// `width/2 + 10^-scale/2` per coordinate.
    pub fn midpoint_rounded(&self, scale: u32) -> LanfordCoords {
        LanfordCoords {
            u: self.u.mid().round_to_scale(scale, Round::Nearest),
            nu: self
                .nu
                .iter()
                .map(|v| v.mid().round_to_scale(scale, Round::Nearest))
                .collect(),
        }
    }

    /// Does every coordinate interval of `self` contain the corresponding
    /// exact coordinate (missing `nu` entries count as zero)?
    pub fn contains(&self, c: &LanfordCoords) -> bool {
        let zero = FixedDec::zero(0);
        if !self.u.contains(&c.u) {
            return false;
        }
        let n = self.nu.len().max(c.nu.len());
        for i in 0..n {
            let x = c.nu.get(i).unwrap_or(&zero);
            match self.nu.get(i) {
                Some(iv) => {
                    if !iv.contains(x) {
                        return false;
                    }
                }
                None => {
                    if !x.is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// The degree-10 reference polynomial `psi0`: the explicit starting point
/// whose `Phi`-orbit converges to the solution `g`.
///
/// All coefficients carry exactly 41 fractional digits and every
/// denominator is a power of ten, so the coordinates below are exact.
pub fn psi0() -> LanfordCoords {
    const U0: &str = "13.99535280247654509657069657886239000000000";
    const NU: [&str; 9] = [
        "-0.37020336425570944099807863650264000000000",
        "-0.10516441308487059395306704671240000000000",
        "0.04689224531866417356902064258837500000000",
        "-0.00657196434429489515940234119726562500000",
        "-0.00092424880356949042888086870078125000000",
        "0.00060199775715465703408272872656250000000",
        "-0.00007266358160903580114416214843750000000",
        "-0.00003921160572782132082950382843017578125",
        "0.00000105783506805382222151565551757812500",
    ];
    LanfordCoords {
        u: U0.parse().expect("psi0 u constant"),
        nu: NU.iter().map(|s| s.parse().expect("psi0 nu constant")).collect(),
    }
}

/// The contraction-rate data of the fixed-point argument. Everything the
/// driver and verifier need about the proven lemma, as exact decimals.
pub mod constants {
    use crate::decfix::FixedDec;

    /// Lipschitz bound for `Phi` on the ball `||psi - psi0|| <= 0.009`.
    pub fn phi_lipschitz() -> FixedDec {
        "0.9".parse().unwrap()
    }

    /// Radius of the ball around `psi0` on which the bound holds.
    pub fn ball_radius() -> FixedDec {
        "0.009".parse().unwrap()
    }

    /// Bound for the initial displacement `||Phi(psi0) - psi0||`.
    pub fn initial_displacement() -> FixedDec {
        "0.000004".parse().unwrap()
    }

    /// Bound for `||g - psi0||` implied by the two constants above
    /// (`4e-6 / (1 - 0.9)`, stated directly as `4e-5`).
    pub fn g_ball_radius() -> FixedDec {
        "0.00004".parse().unwrap()
    }

    /// The divisor in `J`: `J(u, nu) = (u / 3.669, -nu)`.
    pub fn j_divisor() -> FixedDec {
        "3.669".parse().unwrap()
    }
}

/// The coordinate involution `J(u, nu) = (u / 3.669, -nu)`.
///
/// The division is enclosed by a directed-rounded pair at scale `ws`; the
/// negations are exact.
pub fn apply_j(c: &LanfordCoords, ws: u32) -> IntervalCoords {
    let d = constants::j_divisor();
    let lo = FixedDec::div_round(&c.u, &d, ws, Round::Down).expect("divisor is nonzero");
    let hi = FixedDec::div_round(&c.u, &d, ws, Round::Up).expect("divisor is nonzero");
    IntervalCoords {
        u: DecInterval::from_endpoints(lo, hi).expect("directed rounding is ordered"),
        nu: c
            .nu
            .iter()
            .map(|v| DecInterval::point(v.negated()))
            .collect(),
    }
}

/// The doubling operator `T(psi)(z) = psi(psi(lambda * z)) / lambda` with
/// `lambda = psi(1)`, computed in the truncated ring of order `k` at
/// working scale `ws`.
///
/// Writing `G(w) = u/10 + sum nu_i w^i`, the computation is:
///
/// 1. `lambda = 1 - u/10` (exact); fails if zero.
/// 2. `wt = (lambda^2 - 1)/2.5 + lambda^2 * w` — the image of `w` under
///    `z -> lambda*z` (exact affine coefficients).
/// 3. `h1 = G(wt)` (Horner in the ring).
/// 4. `y = 1 - lambda^2 * (1 + 2.5w) * h1` — this is `psi(lambda*z)` as a
///    series in `w`, using `z^2 = 1 + 2.5w`.
/// 5. `y2 = y^2` and `W = (y2 - 1)/2.5` — the image of `w` under
///    `z -> psi(lambda*z)` (the factor `1/2.5 = 0.4` is exact).
/// 6. `body = 1 - y2 * G(W)` — this is `psi(psi(lambda*z))`.
/// 7. `tpsi = body / lambda` (directed-rounded divisions).
/// 8. `gprime = (1 - tpsi) / (1 + 2.5w)` — peel the `z^2` factor back off
///    in `w`-form to recover `T(psi)`'s own coefficient vector.
/// 9. Output `u' = 10 * gprime_0`, `nu'_i = gprime_i` for `i = 1..=k`.
///
/// The division in step 8 amplifies interval widths by 2.5 per
/// coefficient index, so `ws` must exceed the target accuracy by roughly
/// `0.4 * k` digits; see the driver's guard-digit policy.
pub fn apply_t(c: &LanfordCoords, k: usize, ws: u32) -> Result<IntervalCoords> {
    assert!(k >= 1, "truncation order must be at least 1");
    let one = FixedDec::from_int(1);
    let lam = c.lambda();
    if lam.is_zero() {
        return Err(Error::LambdaContainsZero);
    }
    let lam2 = lam.mul(&lam);

    // G as a coefficient polynomial over intervals.
    let mut g_poly: Vec<DecInterval> = Vec::with_capacity(c.nu.len() + 1);
    g_poly.push(DecInterval::point(c.u.mul_pow10(-1)));
    g_poly.extend(c.nu.iter().cloned().map(DecInterval::point));

    // (2) wt = (lam^2 - 1)*0.4 + lam^2 * w, exact.
    let two_fifths = FixedDec::from_scaled_int(4, 1);
    let wt0 = lam2.sub(&one).mul(&two_fifths);
    let mut wt_coeffs = vec![DecInterval::point(FixedDec::zero(0)); k + 1];
    wt_coeffs[0] = DecInterval::point(wt0);
    wt_coeffs[1] = DecInterval::point(lam2.clone());
    let wt = TruncSeries::from_coeffs(wt_coeffs);

    // (3) h1 = G(wt).
    let h1 = series::poly_eval_horner(&g_poly, &wt, ws);

    // (4) y = 1 - lam^2 * (1 + 2.5w) * h1.
    let zsq = affine_zsq(k);
    let t = series::scale(&h1, &DecInterval::point(lam2), ws);
    let t = series::mul(&t, &zsq, ws);
    let one_series = TruncSeries::constant(DecInterval::point(one.clone()), k);
    let y = series::sub(&one_series, &t, ws);

    // (5) y2 = y^2, W = (y2 - 1) * 0.4.
    let y2 = series::mul(&y, &y, ws);
    let shifted = series::sub(&y2, &one_series, ws);
    let w_big = series::scale(&shifted, &DecInterval::point(two_fifths), ws);

    // (6) body = 1 - y2 * G(W). W is a dense series, so the block
    // evaluator's sqrt-many ring products dominate the cost of a step.
    let h2 = series::poly_eval_blocks(&g_poly, &w_big, ws);
    let body = series::sub(&one_series, &series::mul(&y2, &h2, ws), ws);

    // (7) tpsi = body / lambda.
    let tpsi = series::div_scalar(&body, &DecInterval::point(lam.clone()), ws)?;

    // (8) gprime = (1 - tpsi) / (1 + 2.5w).
    let a = series::sub(&one_series, &tpsi, ws);
    let gprime = series::div_by_affine(&a, &one, &FixedDec::from_scaled_int(25, 1), ws)?;

    // (9) read off the coordinates.
    Ok(coords_from_gprime(&gprime, k))
}

/// The series `z^2 = 1 + 2.5w` at order `k`.
fn affine_zsq(k: usize) -> TruncSeries {
    let mut coeffs = vec![DecInterval::point(FixedDec::zero(0)); k + 1];
    coeffs[0] = DecInterval::point(FixedDec::from_int(1));
    coeffs[1] = DecInterval::point(FixedDec::from_scaled_int(25, 1));
    TruncSeries::from_coeffs(coeffs)
}

/// Extract `(u', nu')` from the `w`-coefficient series of
/// `(1 - T(psi)(z)) / z^2`.
fn coords_from_gprime(gprime: &TruncSeries, k: usize) -> IntervalCoords {
    let u = {
        let c0 = gprime.coeff(0);
        DecInterval::from_endpoints(c0.lo().mul_pow10(1), c0.hi().mul_pow10(1))
            .expect("scaling by 10 preserves order")
    };
    let nu = (1..=k).map(|i| gprime.coeff(i).clone()).collect();
    IntervalCoords { u, nu }
}

/// One application of the contraction map:
/// `Phi(psi) = psi - J(T(psi) - psi)`.
///
/// In coordinates: `u' = u - (u_T - u)/3.669` and `nu' = nu_T` (the `nu`
/// parts of `-J(T psi - psi)` and `psi` recombine to exactly the `nu` part
/// of `T psi`).
pub fn apply_phi(c: &LanfordCoords, k: usize, ws: u32) -> Result<IntervalCoords> {
    let t = apply_t(c, k, ws)?;
    let u_point = DecInterval::point(c.u.clone());
    let diff = DecInterval::sub(&t.u, &u_point, ws);
    let corr = DecInterval::div(&diff, &DecInterval::point(constants::j_divisor()), ws)?;
    let u = DecInterval::sub(&u_point, &corr, ws);
    Ok(IntervalCoords { u, nu: t.nu })
}

/// Exact Taylor coefficients `a_1 ..= a_order` of
/// `psi(z) = 1 + a_1 z^2 + a_2 z^4 + ...` in the variable `x = z^2`.
///
/// Expanding `w^i = ((x-1)/2.5)^i` by the binomial theorem gives
///
/// ```text
///     a_{j+1} = -( u/10 * [j=0]
///                  + sum_{i >= max(j,1)} nu_i * C(i,j) * (-1)^(i-j) * (2/5)^i )
/// ```
///
/// and `(2/5)^i = 4^i * 10^-i` is an exact decimal, so the whole transform
/// is exact — no working scale is needed. Indices past the polynomial
/// degree are exactly zero.
pub fn to_taylor(c: &LanfordCoords, order: usize) -> Vec<FixedDec> {
    let d = c.nu.len();
    let mut out = Vec::with_capacity(order);
    for a_index in 1..=order {
        let j = a_index - 1;
        let mut acc = if j == 0 {
            c.u.mul_pow10(-1)
        } else {
            FixedDec::zero(0)
        };
        for i in j.max(1)..=d {
            let c_ij = binomial(BigUint::from(i), BigUint::from(j));
            let four_i = BigUint::from(4u8).pow(i as u32);
            let weight = FixedDec::from_scaled_int(1, i as u32)
                .mul(&big_to_fixed(c_ij * four_i));
            let term = c.nu[i - 1].mul(&weight);
            if (i - j) % 2 == 0 {
                acc = acc.add(&term);
            } else {
                acc = acc.sub(&term);
            }
        }
        out.push(acc.negated());
    }
    out
}

fn big_to_fixed(v: BigUint) -> FixedDec {
    v.to_string().parse().expect("decimal digits")
}

/// Certified evaluation of the polynomial `psi` at a real point or
/// interval `z` with `z^2 <= 3.5` (i.e. `|w| <= 1`).
pub fn eval_psi(c: &IntervalCoords, z: &DecInterval, ws: u32) -> DecInterval {
    let z2 = DecInterval::powi(z, 2, ws);
    eval_psi_at_zsq(c, &z2, ws)
}

/// Same as [`eval_psi`] but taking `x = z^2` directly.
pub fn eval_psi_at_zsq(c: &IntervalCoords, z2: &DecInterval, ws: u32) -> DecInterval {
    let one = DecInterval::point(FixedDec::from_int(1));
    let w = {
        let shifted = DecInterval::sub(z2, &one, ws);
        DecInterval::mul(
            &shifted,
            &DecInterval::point(FixedDec::from_scaled_int(4, 1)),
            ws,
        )
    };
    // G(w) = u/10 + w * (nu_1 + w * (nu_2 + ...)).
    let mut acc = DecInterval::point(FixedDec::zero(0));
    for v in c.nu.iter().rev() {
        acc = DecInterval::mul(&acc, &w, ws);
        acc = DecInterval::add(&acc, v, ws);
    }
    acc = DecInterval::mul(&acc, &w, ws);
    let u_tenth = DecInterval::from_endpoints(
        c.u.lo().mul_pow10(-1),
        c.u.hi().mul_pow10(-1),
    )
    .expect("scaling preserves order");
    acc = DecInterval::add(&acc, &u_tenth, ws);
    DecInterval::sub(&one, &DecInterval::mul(z2, &acc, ws), ws)
}

/// Enclosure of `g(z)` from an enclosure `c` of `g`'s coordinates plus a
/// norm bound `fn_err >= ||g - psi_c||.
///
/// For coordinates within norm distance `r`, function values at `z` with
/// `z^2 <= 3.5` differ by at most `r * z^2` (each `|w^i| <= 1` there), so
/// the polynomial evaluation is inflated by `fn_err * sup z^2`.
pub fn eval_g_enclosure(
    c: &IntervalCoords,
    z: &DecInterval,
    ws: u32,
    fn_err: &FixedDec,
) -> DecInterval {
    let z2 = DecInterval::powi(z, 2, ws);
    let val = eval_psi_at_zsq(c, &z2, ws);
    let pad = fn_err.mul(&z2.mag_upper()).round_to_scale(ws, Round::Up);
    DecInterval::from_endpoints(val.lo().sub(&pad), val.hi().add(&pad))
        .expect("padding preserves order")
}
