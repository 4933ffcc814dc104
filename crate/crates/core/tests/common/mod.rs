//! Helpers shared by the integration tests. The rank oracle here works on
//! plain dense matrices of `BigRational` or `u64` residues and does not go
//! through the library's field or matrix types.

#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use ncclab::freealgebra::{Field, FieldElem};
use ncclab::nisan::NisanMatrix;
use num_rational::BigRational;
use num_traits::Zero;

/// Dense rank over Q by textbook Gauss-Jordan elimination.
pub fn oracle_rank_q(mut a: Vec<Vec<BigRational>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in 0..rows {
            if i != rank && !a[i][col].is_zero() {
                let f = &a[i][col] / &a[rank][col];
                for j in col..cols {
                    let t = &f * &a[rank][j];
                    a[i][j] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dense rank modulo a prime `p`.
pub fn oracle_rank_mod(mut a: Vec<Vec<u64>>, p: u64) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let inv = |x: u64| (1..p).find(|y| x * y % p == 1).expect("prime modulus");
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let s = inv(a[rank][col]);
        for j in 0..cols {
            a[rank][j] = a[rank][j] * s % p;
        }
        for i in 0..rows {
            if i != rank && a[i][col] != 0 {
                let f = a[i][col];
                for j in 0..cols {
                    a[i][j] = (a[i][j] + p - f * a[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Oracle rank of a matrix through its dense form.
pub fn oracle_rank(m: &NisanMatrix) -> usize {
    let dense = m.to_dense(u128::MAX).expect("small matrix");
    match m.field() {
        Field::Rational => oracle_rank_q(
            dense
                .iter()
                .map(|r| r.iter().map(|e| e.as_rational().unwrap().clone()).collect())
                .collect(),
        ),
        Field::Prime(p) => oracle_rank_mod(
            dense
                .iter()
                .map(|r| r.iter().map(residue).collect())
                .collect(),
            p,
        ),
    }
}

pub fn residue(e: &FieldElem) -> u64 {
    match e {
        FieldElem::Residue { value, .. } => *value,
        FieldElem::Rational(_) => panic!("not a residue"),
    }
}

pub mod gen {
    use ncclab::freealgebra::{Alphabet, Field, NcPoly, Word};
    use proptest::prelude::*;

    /// Up to `max_terms` terms with words of length ≤ `max_len` over `x`
    /// letters and small integer coefficients.
    pub fn poly(
        field: Field,
        x: u32,
        max_len: usize,
        max_terms: usize,
    ) -> impl Strategy<Value = NcPoly> {
        prop::collection::vec(
            (prop::collection::vec(0..x, 0..=max_len), -4i64..=4),
            0..=max_terms,
        )
        .prop_map(move |terms| {
            NcPoly::from_terms(
                field,
                Alphabet::x_only(x),
                terms.into_iter().map(|(w, c)| (Word::from_x(&w), field.from_i64(c))),
            )
            .unwrap()
        })
    }

    pub fn field() -> impl Strategy<Value = Field> {
        prop_oneof![Just(Field::Rational), Just(Field::Prime(101)), Just(Field::Prime(2))]
    }
}
