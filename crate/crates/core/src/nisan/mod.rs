//! Coefficient matrices `M_f^{a,b}`, their exact rank, and the per-gate
//! rank inequalities for sum and product gates.

mod checks;
mod matrix;
mod rank;

pub use checks::{
    check_all_gates, check_product_inequality, check_sum_inequality, EdgeRank, GateCheck,
    ProductCheck, RankCache, SumCheck, TermRank,
};
pub use matrix::{build_matrix, index_word, word_index, NisanMatrix};
pub use rank::{dense_rank, rank, verify_pivots, RankResult};

use thiserror::Error;

use crate::circuit::NodeId;
use crate::freealgebra::AlgebraError;

/// Matrices with more logical entries than this are never made dense.
pub const DEFAULT_GUARD_ENTRIES: u128 = 1 << 20;

/// Environment variable overriding [`DEFAULT_GUARD_ENTRIES`].
pub const GUARD_ENV: &str = "NCCLAB_GUARD_ENTRIES";

/// The matrix guard, honouring `NCCLAB_GUARD_ENTRIES` when it parses.
pub fn guard_entries() -> u128 {
    std::env::var(GUARD_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_GUARD_ENTRIES)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NisanError {
    #[error("the alphabet has no X variables")]
    EmptyAlphabet,
    #[error("monomial {0} mentions Z variables")]
    NotOverX(String),
    #[error("bad matrix index {0}")]
    BadIndex(String),
    #[error("field mismatch between matrices")]
    FieldMismatch,
    #[error("matrix shapes are incompatible")]
    ShapeMismatch,
    #[error("{entries} logical entries exceed the guard of {guard}")]
    GuardExceeded { entries: u128, guard: u128 },
    #[error("node {0} does not exist")]
    NoSuchNode(NodeId),
    #[error("node {0} is not a sum gate")]
    NotSumGate(NodeId),
    #[error("node {0} is not a product gate")]
    NotProductGate(NodeId),
    #[error("product gate {node}: child {child} has a nonzero constant term")]
    NonzeroConstantTerm { node: NodeId, child: NodeId },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
