//! Prime-field arithmetic, Lagrange encoding and error-correcting decoding.
//!
//! Block parts `P_1..P_K` are placed at the data points `omega_k` and every
//! coordinate is extended to the node points `beta_i` by Lagrange
//! interpolation. Because the hash used by the committee is linear, hashes of
//! coded parts are evaluations of a degree `K-1` polynomial whose values at the
//! data points are the hashes of the uncoded parts. [`decode_with_errors`]
//! recovers that polynomial from any `(K-1) + 2f + 1` evaluations of which at
//! most `f` are wrong.

mod codec;
mod field;
mod poly;

use thiserror::Error;

pub use codec::{decode_threshold, decode_with_errors, encode_parts, CodeParams, EvalDomain};
pub use field::{ff_op, Fe, FieldOp, Fp, MERSENNE61};
pub use poly::{lagrange_interpolate, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("inversion of zero")]
    DivisionByZero,
    #[error("duplicate evaluation point {0}")]
    DuplicatePoint(u64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("need at least {need} results to decode, have {have}")]
    InsufficientResults { have: usize, need: usize },
    #[error("no polynomial within the error budget")]
    DecodeFailure,
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
}
