use thiserror::Error;

/// Errors surfaced by the certified-arithmetic layers and the iteration
/// driver.
///
/// Every variant is a *detected* failure: arithmetic here never silently
/// degrades. Either an operation completes with a rigorous enclosure or it
/// reports why it could not.
#[derive(Debug, Error)]
pub enum Error {
    /// Division by an exact zero scalar.
    #[error("division by zero")]
    DivisionByZero,

    /// Interval division where the divisor interval contains zero.
    #[error("divisor interval [{lo}, {hi}] contains zero")]
    DivisorContainsZero { lo: String, hi: String },

    /// Interval endpoints supplied in the wrong order.
    #[error("invalid interval: lower endpoint {lo} exceeds upper endpoint {hi}")]
    InvertedInterval { lo: String, hi: String },

    /// The scaling factor `lambda = 1 - u/10` vanished (or its enclosure
    /// contains zero), so the doubling operator is undefined.
    #[error("lambda enclosure contains zero; doubling operator undefined")]
    LambdaContainsZero,

    /// An affine series division `a / (c0 + c1*w)` with `c0 = 0`.
    #[error("series division by affine factor with zero constant term")]
    SeriesDivisionByZero,

    /// A contraction step could not certify its output to the required
    /// width even after raising the working precision to the retry limit.
    #[error(
        "step {m}: could not certify coefficient widths <= 10^-{target_scale} \
         (worst width ~{achieved}) even at working scale {work_scale}"
    )]
    Certification {
        m: u32,
        target_scale: u32,
        work_scale: u32,
        achieved: String,
    },

    /// An iterate violated the invariant that every coefficient fits in
    /// two integer digits. This cannot happen while the iteration stays in
    /// its proven contraction ball, so it indicates a logic error upstream.
    #[error("step {m}: coefficient magnitude {value} exceeds two integer digits")]
    MagnitudeOverflow { m: u32, value: String },

    /// The iterate passed to a final-answer routine is not precise enough
    /// for the requested digit count.
    #[error(
        "state at step {m} supports only ~{supported} certified digits, \
         {requested} requested; advance the iteration further"
    )]
    InsufficientPrecision {
        m: u32,
        supported: u32,
        requested: u32,
    },

    /// A Taylor order beyond what the iterate carries.
    #[error(
        "state at step {m} carries only {available} Taylor coefficients, \
         order {requested} requested; advance the iteration further"
    )]
    OrderUnavailable {
        m: u32,
        available: u32,
        requested: u32,
    },

    /// The symbolic startup check of the per-step rounding allowance
    /// failed: `(11+m)·10^-(42+m)` would exceed `10^-5 · 0.93^m` at this
    /// step, so the certified-distance induction would not close.
    #[error("step {m}: per-step rounding budget exceeds its convergence allowance")]
    BudgetExceeded { m: u32 },

    /// Malformed or corrupt checkpoint data.
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    /// Failure reading or writing a checkpoint file.
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed decimal input.
    #[error("cannot parse {input:?} as a fixed-point decimal: {reason}")]
    Parse { input: String, reason: &'static str },
}

impl Error {
    /// Process exit code for the CLI, as documented in the README.
    ///
    /// `0` success, `1` verification failure, `2` usage error (produced by
    /// the argument parser, not here), `3` internal certification failure,
    /// `4` corrupt checkpoint.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CorruptCheckpoint(_) | Error::Io(_) => 4,
            _ => 3,
        }
    }
}
