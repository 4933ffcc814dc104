//! Explicit full-rank polynomials: the palindrome `Σ_w w·reverse(w)` over
//! all words of length `d/2`, and the naive circuit computing it.

use thiserror::Error;

use crate::circuit::{Circuit, CircuitBuilder, CircuitError, NodeId};
use crate::freealgebra::{Alphabet, Field, NcPoly};
use crate::nisan::index_word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HardPolyError {
    #[error("degree {0} must be even and at least 2")]
    BadDegree(usize),
    #[error("alphabet size {0} must be at least 2")]
    BadAlphabet(u32),
    #[error("M^(d/2,d/2) would have {entries} logical entries, above the guard of {guard}")]
    TooLarge { entries: u128, guard: u128 },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HardPolySpec {
    n: u32,
    d: usize,
}

impl HardPolySpec {
    pub fn new(n: u32, d: usize) -> Result<Self, HardPolyError> {
        if n < 2 {
            return Err(HardPolyError::BadAlphabet(n));
        }
        if d < 2 || !d.is_multiple_of(2) {
            return Err(HardPolyError::BadDegree(d));
        }
        Ok(HardPolySpec { n, d })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `n^{d/2}`, the side of the middle-cut matrix.
    pub fn side(&self) -> u128 {
        (self.n as u128).saturating_pow((self.d / 2) as u32)
    }

    fn check_guard(&self, guard: u128) -> Result<usize, HardPolyError> {
        let entries = self.side().saturating_mul(self.side());
        if entries > guard {
            return Err(HardPolyError::TooLarge { entries, guard });
        }
        Ok(self.side() as usize)
    }

    /// The half-words `w` in lexicographic order, as zero-based indices.
    fn half_words(&self, count: usize) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..count).map(move |i| {
            index_word(i, self.n, self.d / 2)
                .x_indices()
                .expect("X-word")
        })
    }

    fn monomials(&self, count: usize) -> impl Iterator<Item = Vec<u32>> + '_ {
        self.half_words(count).map(|w| {
            let mut full = w.clone();
            full.extend(w.iter().rev());
            full
        })
    }
}

/// `Σ_{|w| = d/2} w·reverse(w)` with every coefficient 1.
pub fn palindrome_poly(spec: HardPolySpec, field: Field, guard: u128) -> Result<NcPoly, HardPolyError> {
    let count = spec.check_guard(guard)?;
    let terms = spec
        .monomials(count)
        .map(|m| (crate::freealgebra::Word::from_x(&m), field.one()));
    Ok(NcPoly::from_terms(field, Alphabet::x_only(spec.n), terms)
        .expect("palindrome words are over X"))
}

/// One shared leaf per input, a balanced product tree per monomial and a
/// single top sum: `(d-1)·n^{d/2}` non-scalar product gates.
pub fn naive_circuit(spec: HardPolySpec, field: Field, guard: u128) -> Result<Circuit, HardPolyError> {
    let count = spec.check_guard(guard)?;
    let mut b = CircuitBuilder::new(field, Alphabet::x_only(spec.n));
    let leaves: Vec<NodeId> = (0..spec.n).map(|i| b.input(i)).collect();
    let roots: Vec<NodeId> = spec
        .monomials(count)
        .map(|m| {
            let ids: Vec<NodeId> = m.iter().map(|&i| leaves[i as usize]).collect();
            product_tree(&mut b, &ids)
        })
        .collect();
    let out = b.sum(&roots);
    Ok(b.finish(out)?)
}

fn product_tree(b: &mut CircuitBuilder, ids: &[NodeId]) -> NodeId {
    if ids.len() == 1 {
        return ids[0];
    }
    let (l, r) = ids.split_at(ids.len() / 2);
    let l = product_tree(b, l);
    let r = product_tree(b, r);
    b.prod(l, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{classify_gates, compute_polynomial, node_polynomials};
    use crate::nisan::{build_matrix, rank, DEFAULT_GUARD_ENTRIES};

    #[test]
    fn small_instances() {
        let q = Field::Rational;
        let f = palindrome_poly(HardPolySpec::new(2, 2).unwrap(), q, DEFAULT_GUARD_ENTRIES).unwrap();
        assert_eq!(f.to_string(), "1 * x1.x1 + 1 * x2.x2");
        let f = palindrome_poly(HardPolySpec::new(2, 4).unwrap(), q, DEFAULT_GUARD_ENTRIES).unwrap();
        assert_eq!(
            f.to_string(),
            "1 * x1.x1.x1.x1 + 1 * x1.x2.x2.x1 + 1 * x2.x1.x1.x2 + 1 * x2.x2.x2.x2"
        );
    }

    #[test]
    fn full_rank_middle_cut() {
        for (n, d) in [(2, 2), (2, 4), (3, 2)] {
            let spec = HardPolySpec::new(n, d).unwrap();
            for field in [Field::Rational, Field::prime(2).unwrap()] {
                let f = palindrome_poly(spec, field, DEFAULT_GUARD_ENTRIES).unwrap();
                let m = build_matrix(&f, d / 2, d / 2).unwrap();
                assert_eq!(rank(&m).rank as u128, spec.side());
            }
        }
    }

    #[test]
    fn naive_circuit_counts() {
        for (n, d) in [(2, 2), (2, 4), (3, 4), (2, 6)] {
            let spec = HardPolySpec::new(n, d).unwrap();
            let c = naive_circuit(spec, Field::Rational, DEFAULT_GUARD_ENTRIES).unwrap();
            let counts = classify_gates(&c, &node_polynomials(&c).unwrap()).counts;
            assert_eq!(counts.nonscalar_products as u128, (d as u128 - 1) * spec.side());
            assert_eq!(counts.scalar_products, 0);
            assert_eq!(
                compute_polynomial(&c).unwrap(),
                palindrome_poly(spec, Field::Rational, DEFAULT_GUARD_ENTRIES).unwrap()
            );
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(HardPolySpec::new(2, 3), Err(HardPolyError::BadDegree(3)));
        assert_eq!(HardPolySpec::new(1, 2), Err(HardPolyError::BadAlphabet(1)));
        let spec = HardPolySpec::new(4, 12).unwrap();
        assert_eq!(
            palindrome_poly(spec, Field::Rational, DEFAULT_GUARD_ENTRIES),
            Err(HardPolyError::TooLarge {
                entries: 1 << 24,
                guard: DEFAULT_GUARD_ENTRIES
            })
        );
    }
}
