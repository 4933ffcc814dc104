//! Exact arithmetic in the free algebra `F<X>` (and `F<Z, X>`): sparse
//! polynomials keyed by words, over the rationals or a prime field.

mod field;
mod poly;
mod text;
mod word;

pub use field::{Field, FieldElem, MAX_PRIME};
pub use poly::{Degree, NcPoly};
pub use text::parse_terms;
pub use word::{Alphabet, Var, Word};

use thiserror::Error;

/// Default cap on word length; products that would exceed it fail instead
/// of exhausting memory.
pub const DEFAULT_WORD_LEN_GUARD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("field mismatch: {left} vs {right}")]
    FieldMismatch { left: Field, right: Field },
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: Alphabet, right: Alphabet },
    #[error("variable {var} is not in alphabet {alphabet}")]
    VarOutOfAlphabet { var: Var, alphabet: Alphabet },
    #[error("word of length {len} exceeds the guard of {limit}")]
    WordTooLong { len: usize, limit: usize },
    #[error("{0} is not invertible")]
    NotInvertible(String),
    #[error("{0} is not a supported prime modulus")]
    InvalidModulus(u64),
    #[error("parse error: {0}")]
    Parse(String),
}
