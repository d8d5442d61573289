use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use super::pow10;
use crate::{Error, Result};

/// Rounding directions for scale reduction and division.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    /// Toward minus infinity (result never exceeds the exact value).
    Down,
    /// Toward plus infinity (result is never below the exact value).
    Up,
    /// To nearest representable value, ties rounded away from zero.
    Nearest,
}

/// An exact fixed-point decimal: `sign * mant * 10^-scale`.
///
/// The mantissa is an arbitrary-precision natural number, so addition,
/// subtraction and multiplication never round. Zero is canonical: its sign
/// is always positive, whatever computation produced it.
///
/// Values compare by numeric value, not representation: `1.5 == 1.50`.
#[derive(Debug, Clone)]
pub struct FixedDec {
    neg: bool,
    mant: BigUint,
    scale: u32,
}

impl FixedDec {
    fn from_raw(neg: bool, mant: BigUint, scale: u32) -> Self {
        let neg = neg && !mant.is_zero();
        FixedDec { neg, mant, scale }
    }

    /// Zero at the given scale.
    pub fn zero(scale: u32) -> Self {
        FixedDec {
            neg: false,
            mant: BigUint::zero(),
            scale,
        }
    }

    /// Exact integer value, scale 0.
    pub fn from_int(v: i64) -> Self {
        FixedDec::from_raw(v < 0, BigUint::from(v.unsigned_abs()), 0)
    }

    /// The value `v * 10^-scale`.
    pub fn from_scaled_int(v: i64, scale: u32) -> Self {
        FixedDec::from_raw(v < 0, BigUint::from(v.unsigned_abs()), scale)
    }

    /// One unit in the last place at the given scale: `10^-scale`.
    pub fn ulp(scale: u32) -> Self {
        FixedDec::from_scaled_int(1, scale)
    }

    /// `1` if the value is `>= 0` (including zero), `-1` otherwise.
    pub fn sign(&self) -> i8 {
        if self.neg {
            -1
        } else {
            1
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    /// Number of fractional decimal digits carried by the representation.
    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Absolute value, same scale.
    pub fn abs(&self) -> Self {
        FixedDec {
            neg: false,
            mant: self.mant.clone(),
            scale: self.scale,
        }
    }

    /// Same representation at a scale at least `scale` (exact; a no-op if
    /// the current scale is already as large).
    pub fn rescale_up(&self, scale: u32) -> Self {
        if scale <= self.scale {
            return self.clone();
        }
        FixedDec {
            neg: self.neg,
            mant: &self.mant * pow10(scale - self.scale),
            scale,
        }
    }

    fn mant_at(&self, scale: u32) -> BigUint {
        debug_assert!(scale >= self.scale);
        if scale == self.scale {
            self.mant.clone()
        } else {
            &self.mant * pow10(scale - self.scale)
        }
    }

    /// Exact sum; the result carries the larger of the two scales.
    pub fn add(&self, other: &FixedDec) -> FixedDec {
        let scale = self.scale.max(other.scale);
        let a = self.mant_at(scale);
        let b = other.mant_at(scale);
        if self.neg == other.neg {
            FixedDec::from_raw(self.neg, a + b, scale)
        } else {
            match a.cmp(&b) {
                Ordering::Equal => FixedDec::zero(scale),
                Ordering::Greater => FixedDec::from_raw(self.neg, a - b, scale),
                Ordering::Less => FixedDec::from_raw(other.neg, b - a, scale),
            }
        }
    }

    /// Exact difference; the result carries the larger of the two scales.
    pub fn sub(&self, other: &FixedDec) -> FixedDec {
        self.add(&other.negated())
    }

    /// Exact product; scales add.
    pub fn mul(&self, other: &FixedDec) -> FixedDec {
        FixedDec::from_raw(
            self.neg ^ other.neg,
            &self.mant * &other.mant,
            self.scale + other.scale,
        )
    }

    /// The raw representation, for crate-internal bulk accumulation.
    pub(crate) fn raw_parts(&self) -> (bool, &BigUint, u32) {
        (self.neg, &self.mant, self.scale)
    }

    /// The value `m * 10^-scale`.
    pub(crate) fn from_signed_mant(m: BigInt, scale: u32) -> FixedDec {
        let neg = m.sign() == Sign::Minus;
        FixedDec::from_raw(neg, m.into_parts().1, scale)
    }

    pub fn negated(&self) -> FixedDec {
        FixedDec::from_raw(!self.neg, self.mant.clone(), self.scale)
    }

    /// Exact multiplication by `10^k` (negative `k` divides).
    pub fn mul_pow10(&self, k: i32) -> FixedDec {
        if k >= 0 {
            let k = k as u32;
            if k <= self.scale {
                FixedDec {
                    neg: self.neg,
                    mant: self.mant.clone(),
                    scale: self.scale - k,
                }
            } else {
                FixedDec {
                    neg: self.neg,
                    mant: &self.mant * pow10(k - self.scale),
                    scale: 0,
                }
            }
        } else {
            FixedDec {
                neg: self.neg,
                mant: self.mant.clone(),
                scale: self.scale + k.unsigned_abs(),
            }
        }
    }

    /// Exact halving (`mant * 5` at `scale + 1`).
    pub fn halved(&self) -> FixedDec {
        FixedDec {
            neg: self.neg,
            mant: &self.mant * 5u32,
            scale: self.scale + 1,
        }
    }

    /// Round to `scale` fractional digits in the given direction.
    ///
    /// Increasing the scale is exact in every mode. Decreasing it rounds by
    /// value: `Down` toward minus infinity, `Up` toward plus infinity,
    /// `Nearest` with ties away from zero. The result always differs from
    /// the exact value by less than `10^-scale` (at most half that for
    /// `Nearest`).
    pub fn round_to_scale(&self, scale: u32, mode: Round) -> FixedDec {
        if scale >= self.scale {
            return self.rescale_up(scale);
        }
        let (q, r) = self.mant.div_rem(&pow10(self.scale - scale));
        let inexact = !r.is_zero();
        let bump = match mode {
            Round::Down => self.neg && inexact,
            Round::Up => !self.neg && inexact,
            Round::Nearest => (r << 1u8) >= pow10(self.scale - scale),
        };
        let mant = if bump { q + 1u32 } else { q };
        FixedDec::from_raw(self.neg, mant, scale)
    }

    /// Quotient `num / den` rounded to `scale` fractional digits.
    ///
    /// The result is within one unit in the last place of the exact
    /// quotient and on the correct side for the directed modes; `Nearest`
    /// is within half a unit. Fails only when `den` is zero.
    pub fn div_round(num: &FixedDec, den: &FixedDec, scale: u32, mode: Round) -> Result<FixedDec> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(FixedDec::zero(scale));
        }
        // num/den in units of 10^-scale is num.mant * 10^e / den.mant with
        // e = scale + den.scale - num.scale.
        let e = scale as i64 + den.scale as i64 - num.scale as i64;
        let (n_int, d_int) = if e >= 0 {
            (&num.mant * pow10(e as u32), den.mant.clone())
        } else {
            (num.mant.clone(), &den.mant * pow10(e.unsigned_abs() as u32))
        };
        let neg = num.neg ^ den.neg;
        let (q, r) = n_int.div_rem(&d_int);
        let inexact = !r.is_zero();
        let bump = match mode {
            Round::Down => neg && inexact,
            Round::Up => !neg && inexact,
            Round::Nearest => (r << 1u8) >= d_int,
        };
        let mant = if bump { q + 1u32 } else { q };
        Ok(FixedDec::from_raw(neg, mant, scale))
    }

    fn cmp_mag(&self, other: &FixedDec) -> Ordering {
        if self.scale == other.scale {
            self.mant.cmp(&other.mant)
        } else {
            let scale = self.scale.max(other.scale);
            self.mant_at(scale).cmp(&other.mant_at(scale))
        }
    }

    /// The exact value as a rational number.
    pub fn to_rational(&self) -> BigRational {
        let sign = if self.neg { Sign::Minus } else { Sign::Plus };
        BigRational::new(
            BigInt::from_biguint(sign, self.mant.clone()),
            BigInt::from(pow10(self.scale)),
        )
    }

    /// Smallest value at `scale` that is >= the rational `r` (round toward
    /// plus infinity). Used to turn exact rational error bounds into
    /// representable decimals without understating them.
    pub fn from_rational_ceil(r: &BigRational, scale: u32) -> FixedDec {
        let scaled = r * BigRational::from_integer(BigInt::from(pow10(scale)));
        let int = scaled.ceil().to_integer();
        let neg = int.sign() == Sign::Minus;
        FixedDec::from_raw(neg, int.magnitude().clone(), scale)
    }

    /// Largest value at `scale` that is <= the rational `r` (round toward
    /// minus infinity) — the lower-endpoint counterpart of
    /// [`FixedDec::from_rational_ceil`].
    pub fn from_rational_floor(r: &BigRational, scale: u32) -> FixedDec {
        let scaled = r * BigRational::from_integer(BigInt::from(pow10(scale)));
        let int = scaled.floor().to_integer();
        let neg = int.sign() == Sign::Minus;
        FixedDec::from_raw(neg, int.magnitude().clone(), scale)
    }

    /// Render with the sign always present and the integer part zero-padded
    /// to `int_digits` (used by the checkpoint format).
    pub fn to_padded_string(&self, int_digits: usize) -> String {
        let sign = if self.neg { '-' } else { '+' };
        let (int, frac) = self.mant.div_rem(&pow10(self.scale));
        if self.scale == 0 {
            format!("{sign}{int:0>int_digits$}", int = int.to_string())
        } else {
            format!(
                "{sign}{int:0>int_digits$}.{frac:0>frac_digits$}",
                int = int.to_string(),
                frac = frac.to_string(),
                frac_digits = self.scale as usize
            )
        }
    }
}

impl fmt::Display for FixedDec {
    /// Exactly `scale` fractional digits, no exponent, `-` only when
    /// negative.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            write!(f, "-")?;
        }
        if self.scale == 0 {
            return write!(f, "{}", self.mant);
        }
        let (int, frac) = self.mant.div_rem(&pow10(self.scale));
        write!(
            f,
            "{}.{frac:0>width$}",
            int,
            frac = frac.to_string(),
            width = self.scale as usize
        )
    }
}

impl FromStr for FixedDec {
    type Err = Error;

    /// Accepts `[+|-] digits [. digits]`; the scale is the number of digits
    /// after the point.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason| Error::Parse {
            input: s.to_string(),
            reason,
        };
        let rest = match s.as_bytes().first() {
            Some(b'+') => &s[1..],
            Some(b'-') => &s[1..],
            _ => s,
        };
        let neg = s.starts_with('-');
        let (int_part, frac_part) = match rest.split_once('.') {
            Some((i, f)) => (i, f),
            None => (rest, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(parse_err("no digits"));
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(parse_err("invalid digit"));
        }
        if frac_part.len() > u32::MAX as usize {
            return Err(parse_err("scale too large"));
        }
        let mut digits = String::with_capacity(int_part.len() + frac_part.len());
        digits.push_str(int_part);
        digits.push_str(frac_part);
        let mant = BigUint::parse_bytes(digits.as_bytes(), 10).ok_or(parse_err("no digits"))?;
        Ok(FixedDec::from_raw(neg, mant, frac_part.len() as u32))
    }
}

impl PartialEq for FixedDec {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FixedDec {}

impl PartialOrd for FixedDec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedDec {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.neg, other.neg) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => self.cmp_mag(other),
            (true, true) => other.cmp_mag(self),
        }
    }
}

impl std::ops::Neg for &FixedDec {
    type Output = FixedDec;
    fn neg(self) -> FixedDec {
        self.negated()
    }
}

impl std::ops::Add for &FixedDec {
    type Output = FixedDec;
    fn add(self, rhs: Self) -> FixedDec {
        FixedDec::add(self, rhs)
    }
}

impl std::ops::Sub for &FixedDec {
    type Output = FixedDec;
    fn sub(self, rhs: Self) -> FixedDec {
        FixedDec::sub(self, rhs)
    }
}

impl std::ops::Mul for &FixedDec {
    type Output = FixedDec;
    fn mul(self, rhs: Self) -> FixedDec {
        FixedDec::mul(self, rhs)
    }
}
