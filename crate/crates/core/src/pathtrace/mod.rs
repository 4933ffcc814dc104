//! The backward path from the output gate: Rule-1/Rule-2 at sum gates and
//! the `j`-selection at product gates, plus an independent re-check of every
//! accounting inequality and of the witness set of product gates.
//!
//! Thresholds involve `c/√n`; every comparison is squared first so that it
//! runs in exact integer arithmetic.

mod verify;
mod walk;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::circuit::{CircuitError, NodeId};
use crate::nisan::NisanError;

pub use verify::{verify_trace, Check, ClosedForm, TraceVerification};
pub use walk::trace_path;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("P1..P5 required: {0}")]
    NotNormalized(String),
    #[error("invalid trace configuration: {0}")]
    Config(String),
    /// A step for which the rank inequalities guarantee a choice found none.
    #[error("invariant violation at step {step}: {detail}")]
    Defect { step: usize, detail: String },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Nisan(#[from] NisanError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceConfig {
    pub c: u64,
    pub alpha: BigRational,
    pub d: usize,
    pub n: u32,
}

impl TraceConfig {
    pub const DEFAULT_C: u64 = 64;

    pub fn default_alpha() -> BigRational {
        BigRational::new(1.into(), 4.into())
    }

    /// `c = 64`, `α = 1/4`.
    pub fn new(d: usize, n: u32) -> Result<Self, TraceError> {
        Self::with_constants(d, n, Self::DEFAULT_C, Self::default_alpha())
    }

    pub fn with_constants(d: usize, n: u32, c: u64, alpha: BigRational) -> Result<Self, TraceError> {
        if d == 0 || !d.is_multiple_of(2) {
            return Err(TraceError::Config(format!("d = {d} must be even and positive")));
        }
        if n == 0 {
            return Err(TraceError::Config("n must be positive".into()));
        }
        if c == 0 {
            return Err(TraceError::Config("c must be positive".into()));
        }
        if !alpha.is_positive() || alpha >= BigRational::one() {
            return Err(TraceError::Config(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        Ok(TraceConfig { c, alpha, d, n })
    }

    /// `rank ≥ (c/√n)·r`, i.e. `n·rank² ≥ c²·r²`.
    pub(crate) fn meets_rule1(&self, rank: usize, r: usize) -> bool {
        let n = BigInt::from(self.n);
        let c = BigInt::from(self.c);
        n * sq(rank) >= c.pow(2) * sq(r)
    }

    /// `α^e · (c/√n) · r ≤ rank`, squared: `p^{2e}·c²·r² ≤ q^{2e}·n·rank²`
    /// for `α = p/q`.
    pub(crate) fn scaled_threshold_le(&self, e: u32, r: usize, rank: usize) -> bool {
        let (p, q) = (self.alpha.numer(), self.alpha.denom());
        let c = BigInt::from(self.c);
        p.pow(2 * e) * c.pow(2) * sq(r) <= q.pow(2 * e) * BigInt::from(self.n) * sq(rank)
    }

    /// Smallest `k` with `α^{k+1}·t ≤ rank`; the child then lies in band `k`
    /// whenever `rank < t`.
    pub(crate) fn band(&self, r: usize, rank: usize) -> u32 {
        debug_assert!(rank > 0);
        let mut k = 0;
        while !self.scaled_threshold_le(k + 1, r, rank) {
            k += 1;
        }
        k
    }
}

impl Serialize for TraceConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TraceConfig", 4)?;
        st.serialize_field("c", &self.c)?;
        st.serialize_field("alpha", &self.alpha.to_string())?;
        st.serialize_field("d", &self.d)?;
        st.serialize_field("n", &self.n)?;
        st.end()
    }
}

fn sq(v: usize) -> BigInt {
    let v = BigInt::from(v);
    &v * &v
}

/// `t_i = (c/√n)·r_i`, kept as the integer `c·r_i` over `√n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Threshold {
    pub scaled_rank: String,
    pub sqrt_of: u32,
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/sqrt({})", self.scaled_rank, self.sqrt_of)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Continue into the right child; `a` drops by `j`.
    RightKept,
    /// Continue into the left child; `b` drops by `j`.
    LeftKept,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Move {
    SumRule1 {
        threshold: Threshold,
        chosen: NodeId,
    },
    SumRule2 {
        threshold: Threshold,
        k: u32,
        /// `N_{i,k}`, which becomes `S_{i+1}`.
        band: Vec<NodeId>,
        band_rank: usize,
        chosen: NodeId,
    },
    Product {
        j: usize,
        side: Side,
        chosen: NodeId,
    },
}

impl Move {
    pub fn chosen(&self) -> NodeId {
        match self {
            Move::SumRule1 { chosen, .. }
            | Move::SumRule2 { chosen, .. }
            | Move::Product { chosen, .. } => *chosen,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Rank,
    Leaf,
    EmptyCut,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub index: usize,
    pub node: NodeId,
    pub a: usize,
    pub b: usize,
    pub rank: usize,
    /// How the next node was chosen; absent on the terminal step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<Move>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathTrace {
    pub config: TraceConfig,
    pub steps: Vec<TraceStep>,
    /// Index of the terminal step.
    pub t: usize,
    pub stop: StopReason,
    pub rule1_steps: Vec<usize>,
    pub rule2_steps: Vec<usize>,
    pub product_steps: Vec<usize>,
    /// Union of the Rule-2 sets, ascending.
    pub witness: Vec<NodeId>,
}

impl PathTrace {
    pub fn initial_rank(&self) -> usize {
        self.steps[0].rank
    }

    pub fn k_sum(&self) -> u64 {
        self.steps
            .iter()
            .filter_map(|s| match &s.step {
                Some(Move::SumRule2 { k, .. }) => Some(*k as u64),
                _ => None,
            })
            .sum()
    }

    pub fn j_sum(&self) -> usize {
        self.steps
            .iter()
            .filter_map(|s| match &s.step {
                Some(Move::Product { j, .. }) => Some(*j),
                _ => None,
            })
            .sum()
    }

    /// `S_{i+1}` for each Rule-2 step `i`.
    pub fn witness_sets(&self) -> Vec<(usize, &[NodeId])> {
        self.steps
            .iter()
            .filter_map(|s| match &s.step {
                Some(Move::SumRule2 { band, .. }) => Some((s.index, band.as_slice())),
                _ => None,
            })
            .collect()
    }
}

pub(crate) fn ratio(num: usize, den: usize) -> BigRational {
    if den == 0 {
        return BigRational::zero();
    }
    BigRational::new(num.into(), den.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(TraceConfig::new(3, 2).is_err());
        assert!(TraceConfig::new(0, 2).is_err());
        assert!(TraceConfig::with_constants(2, 2, 64, BigRational::one()).is_err());
        let cfg = TraceConfig::new(2, 2).unwrap();
        assert_eq!((cfg.c, cfg.alpha.to_string()), (64, "1/4".to_string()));
    }

    #[test]
    fn squared_comparisons() {
        let cfg = TraceConfig::new(2, 2).unwrap();
        // t = 64·2/√2 ≈ 90.5
        assert!(!cfg.meets_rule1(90, 2));
        assert!(cfg.meets_rule1(91, 2));
        // α^4·t ≈ 0.354 ≤ 1 < α^3·t ≈ 1.41
        assert_eq!(cfg.band(2, 1), 3);
        let one = TraceConfig::with_constants(2, 4, 1, TraceConfig::default_alpha()).unwrap();
        // t = r/2
        assert!(one.meets_rule1(1, 2));
        assert!(!one.meets_rule1(1, 3));
    }

    use crate::circuit::{Circuit, CircuitBuilder};
    use crate::freealgebra::{Alphabet, Field};
    use crate::hardpoly::{naive_circuit, HardPolySpec};
    use crate::nisan::DEFAULT_GUARD_ENTRIES;
    use crate::normalize::normalize;

    fn normalized_palindrome(n: u32, d: usize) -> Circuit {
        let spec = HardPolySpec::new(n, d).unwrap();
        normalize(&naive_circuit(spec, Field::Rational, DEFAULT_GUARD_ENTRIES).unwrap())
            .unwrap()
            .0
    }

    /// `x1·(x1x1x1 + x2x2x2)`, normalized.
    fn factored_circuit() -> Circuit {
        let mut b = CircuitBuilder::new(Field::Rational, Alphabet::x_only(2));
        let x1 = b.input(0);
        let x2 = b.input(1);
        let sq1 = b.prod(x1, x1);
        let m1 = b.prod(x1, sq1);
        let sq2 = b.prod(x2, x2);
        let m2 = b.prod(x2, sq2);
        let s = b.sum(&[m1, m2]);
        let top = b.prod(x1, s);
        let c = b.finish(top).unwrap();
        normalize(&c).unwrap().0
    }

    #[test]
    fn worked_palindrome_trace() {
        let c = normalized_palindrome(2, 2);
        let cfg = TraceConfig::new(2, 2).unwrap();
        let tr = trace_path(&c, &cfg).unwrap();
        assert_eq!(tr.t, 1);
        assert_eq!(tr.initial_rank(), 2);
        assert_eq!(tr.rule2_steps, vec![0]);
        let Some(Move::SumRule2 { k, band, .. }) = &tr.steps[0].step else {
            panic!("expected Rule-2, got {:?}", tr.steps[0].step);
        };
        assert_eq!(*k, 3);
        assert_eq!(band.len(), 2);
        assert_eq!(tr.steps[1].rank, 1);
        assert!(c.node(tr.steps[1].node).is_prod());
        assert_eq!(tr.stop, StopReason::Rank);
        assert_eq!(tr.k_sum(), 3);

        let v = verify_trace(&tr, &c, &cfg).unwrap();
        assert!(v.passed, "{:?}", v.failures().collect::<Vec<_>>());
        assert!(v.closed_form.applicable);
        assert_eq!(v.closed_form.k_sum_at_least_d, Some(true));
        assert!(!v.closed_form.large_n_regime);
        assert!(v.closed_form.witness_bound_holds);
    }

    #[test]
    fn injected_constants_change_the_rules() {
        let c = factored_circuit();
        let quarter = TraceConfig::default_alpha();
        let cfg = TraceConfig::with_constants(4, 2, 1, quarter).unwrap();
        let tr = trace_path(&c, &cfg).unwrap();
        let kinds: Vec<_> = tr.steps.iter().map(|s| s.step.clone()).collect();
        assert!(matches!(kinds[0], Some(Move::SumRule1 { .. })));
        assert!(matches!(
            kinds[1],
            Some(Move::Product { j: 1, side: Side::RightKept, .. })
        ));
        assert!(matches!(&kinds[2], Some(Move::SumRule2 { k: 0, band, .. }) if band.len() == 2));
        assert_eq!(tr.t, 3);
        assert!(verify_trace(&tr, &c, &cfg).unwrap().passed);

        let defaults = TraceConfig::new(4, 2).unwrap();
        let tr = trace_path(&c, &defaults).unwrap();
        assert!(matches!(tr.steps[0].step, Some(Move::SumRule2 { k: 2, .. })));
        assert!(verify_trace(&tr, &c, &defaults).unwrap().passed);
    }

    #[test]
    fn zero_initial_rank_stops_at_once() {
        let c = normalized_palindrome(2, 2);
        let cfg = TraceConfig::new(4, 2).unwrap();
        let tr = trace_path(&c, &cfg).unwrap();
        assert_eq!((tr.t, tr.initial_rank()), (0, 0));
        assert!(tr.witness.is_empty());
        let v = verify_trace(&tr, &c, &cfg).unwrap();
        assert!(v.passed);
        assert!(!v.closed_form.applicable);
    }

    #[test]
    fn dropping_a_witness_member_is_caught() {
        let c = normalized_palindrome(2, 2);
        let cfg = TraceConfig::new(2, 2).unwrap();
        let mut tr = trace_path(&c, &cfg).unwrap();
        if let Some(Move::SumRule2 { band, chosen, .. }) = &mut tr.steps[0].step {
            band.retain(|m| m == chosen);
        }
        let v = verify_trace(&tr, &c, &cfg).unwrap();
        assert!(!v.passed);
        assert!(v.failures().any(|f| f.name == "band" && f.step == Some(0)));
    }

    #[test]
    fn unnormalized_input_is_refused() {
        let spec = HardPolySpec::new(2, 2).unwrap();
        let raw = naive_circuit(spec, Field::Rational, DEFAULT_GUARD_ENTRIES).unwrap();
        let err = trace_path(&raw, &TraceConfig::new(2, 2).unwrap()).unwrap_err();
        assert!(err.to_string().starts_with("P1..P5 required"));
    }

    #[test]
    fn deterministic() {
        let c = normalized_palindrome(2, 4);
        let cfg = TraceConfig::new(4, 2).unwrap();
        let a = serde_json::to_string(&trace_path(&c, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&trace_path(&c, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
