use std::fmt;

use super::{FixedDec, Round};
use crate::{Error, Result};

/// A closed decimal interval `[lo, hi]` with `lo <= hi`.
///
/// All arithmetic rounds outward to the caller's working scale `ws`: the
/// returned interval contains every value obtainable by applying the exact
/// operation to any points of the operand intervals. Directed rounding is
/// the only source of width growth, and each operation adds at most one
/// unit in the last place per endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecInterval {
    lo: FixedDec,
    hi: FixedDec,
}

impl DecInterval {
    /// Degenerate interval `[x, x]`.
    pub fn point(x: FixedDec) -> Self {
        DecInterval { lo: x.clone(), hi: x }
    }

    /// Interval from endpoints; fails if `lo > hi`.
    pub fn from_endpoints(lo: FixedDec, hi: FixedDec) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvertedInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(DecInterval { lo, hi })
    }

    pub fn lo(&self) -> &FixedDec {
        &self.lo
    }

    pub fn hi(&self) -> &FixedDec {
        &self.hi
    }

    /// Exact width `hi - lo`.
    pub fn width(&self) -> FixedDec {
        self.hi.sub(&self.lo)
    }

    /// Exact midpoint `(lo + hi) / 2` (scale grows by one).
    pub fn mid(&self) -> FixedDec {
        self.lo.add(&self.hi).halved()
    }

    pub fn contains(&self, x: &FixedDec) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        let zero = FixedDec::zero(0);
        self.lo <= zero && zero <= self.hi
    }

    /// Does this interval contain every point of `other`?
    pub fn encloses(&self, other: &DecInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// An upper bound for `|x|` over the interval: `max(|lo|, |hi|)`.
    pub fn mag_upper(&self) -> FixedDec {
        self.lo.abs().max(self.hi.abs())
    }

    /// A lower bound for `|x|` over the interval (zero if it contains 0).
    pub fn mag_lower(&self) -> FixedDec {
        if self.contains_zero() {
            FixedDec::zero(0)
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Round endpoints outward to scale `ws`.
    pub fn outward(&self, ws: u32) -> Self {
        DecInterval {
            lo: self.lo.round_to_scale(ws, Round::Down),
            hi: self.hi.round_to_scale(ws, Round::Up),
        }
    }

    /// Exact negation `[-hi, -lo]`.
    pub fn neg(&self) -> Self {
        DecInterval {
            lo: self.hi.negated(),
            hi: self.lo.negated(),
        }
    }

    /// `a + b`, outward-rounded to scale `ws`.
    pub fn add(a: &DecInterval, b: &DecInterval, ws: u32) -> DecInterval {
        DecInterval {
            lo: a.lo.add(&b.lo).round_to_scale(ws, Round::Down),
            hi: a.hi.add(&b.hi).round_to_scale(ws, Round::Up),
        }
    }

    /// `a - b`, outward-rounded to scale `ws`.
    pub fn sub(a: &DecInterval, b: &DecInterval, ws: u32) -> DecInterval {
        DecInterval::add(a, &b.neg(), ws)
    }

    /// `a * b`, outward-rounded to scale `ws`.
    ///
    /// Computes all four endpoint products exactly and takes their range,
    /// which is the exact range of the product over the operand boxes.
    pub fn mul(a: &DecInterval, b: &DecInterval, ws: u32) -> DecInterval {
        let pp = a.lo.mul(&b.lo);
        let pq = a.lo.mul(&b.hi);
        let qp = a.hi.mul(&b.lo);
        let qq = a.hi.mul(&b.hi);
        let lo = (&pp).min(&pq).min(&qp).min(&qq);
        let hi = (&pp).max(&pq).max(&qp).max(&qq);
        DecInterval {
            lo: lo.round_to_scale(ws, Round::Down),
            hi: hi.round_to_scale(ws, Round::Up),
        }
    }

    /// `a / b` for a divisor interval not containing zero, outward-rounded
    /// to scale `ws`.
    pub fn div(a: &DecInterval, b: &DecInterval, ws: u32) -> Result<DecInterval> {
        if b.contains_zero() {
            return Err(Error::DivisorContainsZero {
                lo: b.lo.to_string(),
                hi: b.hi.to_string(),
            });
        }
        // With 0 outside b, x/y is monotone in each argument, so the range
        // over the boxes is attained at endpoint pairs.
        let mut lo: Option<FixedDec> = None;
        let mut hi: Option<FixedDec> = None;
        for x in [&a.lo, &a.hi] {
            for y in [&b.lo, &b.hi] {
                let d = FixedDec::div_round(x, y, ws, Round::Down)?;
                let u = FixedDec::div_round(x, y, ws, Round::Up)?;
                lo = Some(match lo {
                    Some(cur) => cur.min(d),
                    None => d,
                });
                hi = Some(match hi {
                    Some(cur) => cur.max(u),
                    None => u,
                });
            }
        }
        Ok(DecInterval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        })
    }

    /// `a^n`, outward-rounded to scale `ws`.
    ///
    /// Even powers account for interior minima: if the base contains zero
    /// the result's lower endpoint is clamped to zero rather than taken
    /// from the endpoint powers.
    pub fn powi(a: &DecInterval, n: u32, ws: u32) -> DecInterval {
        if n == 0 {
            return DecInterval::point(FixedDec::from_int(1)).outward(ws);
        }
        let plo = pow_fixed(&a.lo, n);
        let phi = pow_fixed(&a.hi, n);
        let (lo, hi) = if n % 2 == 1 {
            (plo, phi)
        } else {
            let hi = (&plo).max(&phi).clone();
            let lo = if a.contains_zero() {
                FixedDec::zero(0)
            } else {
                (&plo).min(&phi).clone()
            };
            (lo, hi)
        };
        DecInterval {
            lo: lo.round_to_scale(ws, Round::Down),
            hi: hi.round_to_scale(ws, Round::Up),
        }
    }
}

fn pow_fixed(x: &FixedDec, n: u32) -> FixedDec {
    let mut acc = FixedDec::from_int(1);
    for _ in 0..n {
        acc = acc.mul(x);
    }
    acc
}

impl From<FixedDec> for DecInterval {
    fn from(x: FixedDec) -> Self {
        DecInterval::point(x)
    }
}

impl fmt::Display for DecInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;
    use std::str::FromStr;

    fn fd(s: &str) -> FixedDec {
        s.parse().unwrap()
    }

    fn iv(lo: &str, hi: &str) -> DecInterval {
        DecInterval::from_endpoints(fd(lo), fd(hi)).unwrap()
    }

    fn rat(x: &FixedDec) -> BigRational {
        // Display is exact, so parsing it back is an exact conversion.
        let s = x.to_string();
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i.to_string(), f.to_string()),
            None => (s, String::new()),
        };
        let digits = format!("{int}{frac}");
        let num = BigInt::from_str(&digits).unwrap();
        let den = BigInt::from(10u8).pow(frac.len() as u32);
        BigRational::new(num, den)
    }

    #[test]
    fn endpoint_order_is_enforced() {
        assert!(DecInterval::from_endpoints(fd("2"), fd("1")).is_err());
        assert!(DecInterval::from_endpoints(fd("1"), fd("1")).is_ok());
    }

    #[test]
    fn width_and_mid_are_exact() {
        let i = iv("1", "2");
        assert_eq!(i.width().to_string(), "1");
        assert_eq!(i.mid().to_string(), "1.5");
        let i = iv("-0.40", "-0.39");
        assert_eq!(i.width().to_string(), "0.01");
        assert_eq!(i.mid().to_string(), "-0.395");
    }

    #[test]
    fn squaring_brackets_root_two() {
        let i = DecInterval::powi(&iv("1.414", "1.415"), 2, 4);
        assert_eq!(i.lo().to_string(), "1.9993");
        assert_eq!(i.hi().to_string(), "2.0023");
        assert!(i.contains(&fd("2")));
    }

    #[test]
    fn even_powers_clamp_at_zero() {
        let i = DecInterval::powi(&iv("-2", "1"), 2, 2);
        assert_eq!(i.lo().to_string(), "0.00");
        assert_eq!(i.hi().to_string(), "4.00");
        let i = DecInterval::powi(&iv("-2", "1"), 3, 2);
        assert_eq!(i.lo().to_string(), "-8.00");
        assert_eq!(i.hi().to_string(), "1.00");
    }

    #[test]
    fn division_brackets_quotient() {
        let q = DecInterval::div(&iv("1", "1"), &iv("3", "3"), 5).unwrap();
        assert_eq!(q.lo().to_string(), "0.33333");
        assert_eq!(q.hi().to_string(), "0.33334");
    }

    #[test]
    fn division_by_interval_containing_zero_fails() {
        assert!(DecInterval::div(&iv("1", "2"), &iv("-1", "1"), 5).is_err());
        assert!(DecInterval::div(&iv("1", "2"), &iv("0", "1"), 5).is_err());
        assert!(DecInterval::div(&iv("1", "2"), &iv("-1", "0"), 5).is_err());
        assert!(DecInterval::div(&iv("1", "2"), &iv("0.001", "1"), 5).is_ok());
    }

    #[test]
    fn multiplication_handles_sign_straddles() {
        let p = DecInterval::mul(&iv("-2", "3"), &iv("-5", "4"), 0);
        assert_eq!(p.lo().to_string(), "-15");
        assert_eq!(p.hi().to_string(), "12");
    }

    #[test]
    fn point_arithmetic_at_sufficient_scale_is_exact() {
        let a = DecInterval::point(fd("0.25"));
        let b = DecInterval::point(fd("-1.5"));
        let p = DecInterval::mul(&a, &b, 10);
        assert!(p.width().is_zero());
        assert_eq!(p.lo().to_string(), "-0.3750000000");
        let s = DecInterval::add(&a, &b, 10);
        assert!(s.width().is_zero());
        assert_eq!(s.lo(), &fd("-1.25"));
    }

    #[test]
    fn magnitude_bounds() {
        let i = iv("-2.5", "1");
        assert_eq!(i.mag_upper().to_string(), "2.5");
        assert!(i.mag_lower().is_zero());
        let i = iv("-3", "-2");
        assert_eq!(i.mag_lower().to_string(), "2");
        assert_eq!(i.mag_upper().to_string(), "3");
    }

    fn arb_interval() -> impl Strategy<Value = DecInterval> {
        (
            any::<bool>(),
            "[0-9]{1,20}",
            any::<bool>(),
            "[0-9]{1,20}",
            0u32..20,
        )
            .prop_map(|(n1, d1, n2, d2, scale)| {
                let mk = |neg: bool, digits: &str| -> FixedDec {
                    let s = format!("{}{}", if neg { "-" } else { "" }, digits);
                    let x: FixedDec = s.parse().unwrap();
                    x.mul_pow10(-(scale as i32))
                };
                let a = mk(n1, &d1);
                let b = mk(n2, &d2);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                DecInterval::from_endpoints(lo, hi).unwrap()
            })
    }

    proptest! {
        #[test]
        fn add_contains_all_endpoint_sums(a in arb_interval(), b in arb_interval(), ws in 0u32..25) {
            let r = DecInterval::add(&a, &b, ws);
            for x in [a.lo(), a.hi(), &a.mid()] {
                for y in [b.lo(), b.hi(), &b.mid()] {
                    prop_assert!(r.contains(&x.add(y)));
                }
            }
            prop_assert!(r.lo() <= r.hi());
        }

        #[test]
        fn mul_contains_all_endpoint_products(a in arb_interval(), b in arb_interval(), ws in 0u32..25) {
            let r = DecInterval::mul(&a, &b, ws);
            for x in [a.lo(), a.hi(), &a.mid()] {
                for y in [b.lo(), b.hi(), &b.mid()] {
                    prop_assert!(r.contains(&x.mul(y)));
                }
            }
        }

        #[test]
        fn sub_contains_all_endpoint_differences(a in arb_interval(), b in arb_interval(), ws in 0u32..25) {
            let r = DecInterval::sub(&a, &b, ws);
            for x in [a.lo(), a.hi()] {
                for y in [b.lo(), b.hi()] {
                    prop_assert!(r.contains(&x.sub(y)));
                }
            }
        }

        #[test]
        fn div_brackets_rational_quotients(a in arb_interval(), b in arb_interval(), ws in 0u32..25) {
            prop_assume!(!b.contains_zero());
            let r = DecInterval::div(&a, &b, ws).unwrap();
            for x in [a.lo(), a.hi(), &a.mid()] {
                for y in [b.lo(), b.hi(), &b.mid()] {
                    let q = rat(x) / rat(y);
                    prop_assert!(rat(r.lo()) <= q && q <= rat(r.hi()));
                }
            }
        }

        #[test]
        fn rounding_adds_at_most_one_ulp_per_endpoint(a in arb_interval(), b in arb_interval(), ws in 0u32..25) {
            let r = DecInterval::add(&a, &b, ws);
            let exact_width = a.width().add(&b.width());
            let slack = FixedDec::from_scaled_int(2, ws);
            prop_assert!(r.width() <= exact_width.add(&slack));
        }

        #[test]
        fn powi_contains_midpoint_powers(a in arb_interval(), n in 0u32..6, ws in 0u32..25) {
            let r = DecInterval::powi(&a, n, ws);
            for x in [a.lo(), a.hi(), &a.mid()] {
                let mut p = FixedDec::from_int(1);
                for _ in 0..n {
                    p = p.mul(x);
                }
                prop_assert!(r.contains(&p), "{} not in {}", p, r);
            }
        }
    }
}
