//! Exact fixed-point decimal numbers and directed-rounded decimal intervals.
//!
//! [`FixedDec`] is a sign + arbitrary-precision mantissa + decimal scale
//! triple representing `sign * mant * 10^-scale` exactly. Addition and
//! multiplication are exact; precision is lost only at explicit, directed
//! rounding points ([`FixedDec::round_to_scale`], [`FixedDec::div_round`]).
//!
//! [`DecInterval`] wraps a pair of `FixedDec` endpoints and implements
//! outward-rounded interval arithmetic on top of them: every operation
//! returns an interval guaranteed to contain the exact result of the
//! operation applied to any points of the inputs.

mod fixed;
mod interval;

pub use fixed::{FixedDec, Round};
pub use interval::DecInterval;

use std::cell::RefCell;

use num_bigint::BigUint;
use num_traits::One;

thread_local! {
    static POW10: RefCell<Vec<BigUint>> = RefCell::new(vec![BigUint::one()]);
}

/// `10^n` as a big integer, memoized per thread.
///
/// Scale alignments and rounding divisions request the same handful of
/// powers over and over; caching them is a large constant-factor win.
pub(crate) fn pow10(n: u32) -> BigUint {
    POW10.with(|cache| {
        let mut v = cache.borrow_mut();
        while v.len() <= n as usize {
            let next = v.last().unwrap() * 10u32;
            v.push(next);
        }
        v[n as usize].clone()
    })
}
