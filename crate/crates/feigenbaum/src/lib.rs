//! Certified computation of the Feigenbaum period-doubling constant
//! `alpha = -2.5029078750958928...` and of the solution `g` of the
//! Cvitanovic-Feigenbaum functional equation
//!
//! ```text
//!     g(x) = (1 / g(1)) * g(g(g(1) * x)),        g(0) = 1,
//! ```
//!
//! to any requested number of decimal digits, together with machine-checked
//! error bounds.
//!
//! Everything is built on exact fixed-point decimal arithmetic
//! ([`decfix::FixedDec`]) and directed-rounded decimal intervals
//! ([`decfix::DecInterval`]); no binary floating point enters any certified
//! computation. The function `g` is represented in *Lanford coordinates*
//! ([`lanford::LanfordCoords`]): writing `x = z^2` and `w = (x - 1) / 2.5`,
//!
//! ```text
//!     psi(z) = 1 - z^2 * ( u / 10 + sum_i nu_i * w^i ),
//! ```
//!
//! so a function is the pair `(u, (nu_1, ..., nu_d))`. A contraction map
//! `Phi` built from the doubling operator `T` (see [`lanford::apply_phi`])
//! has `g` as its unique fixed point near an explicit degree-10 starting
//! polynomial `psi0`; iterating `Phi` with certified rounding yields
//! enclosures of `g` whose error shrinks like `0.01 * 0.93^m` after `m`
//! steps ([`driver`]). The [`verify`] module re-derives every analytic
//! inequality this argument relies on, either by certified interval
//! arithmetic or by exact rational arithmetic.
//!
//! The `feigenbaum` binary exposes all of this as a CLI; see the README.

pub mod decfix;
pub mod driver;
pub mod lanford;
pub mod series;
pub mod verify;

mod error;
#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
