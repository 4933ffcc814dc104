use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::freealgebra::{Field, FieldElem, Word};

use super::NisanMatrix;

/// Exact rank with the pivots that certify it: the submatrix on the pivot
/// rows and columns is nonsingular.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankResult {
    pub rank: usize,
    pub pivots: Vec<(Word, Word)>,
}

/// Row-echelon elimination over the occupied rows and columns. Rows are
/// inserted in ascending word order and reduced on their leading column, so
/// the pivot list is reproducible.
pub fn rank(m: &NisanMatrix) -> RankResult {
    let rows = m.occupied_rows();
    let cols = m.occupied_cols();
    let col_pos: BTreeMap<&Word, usize> = cols.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut grouped: Vec<Vec<(usize, &FieldElem)>> = vec![Vec::new(); rows.len()];
    let mut row_idx = 0;
    for (r, c, v) in m.entries() {
        while rows[row_idx] != *r {
            row_idx += 1;
        }
        grouped[row_idx].push((col_pos[c], v));
    }
    let pivots = match m.field() {
        Field::Rational => eliminate_rational(&grouped),
        Field::Prime(p) => eliminate_modular(&grouped, p),
    };
    RankResult {
        rank: pivots.len(),
        pivots: pivots
            .into_iter()
            .map(|(r, c)| (rows[r].clone(), cols[c].clone()))
            .collect(),
    }
}

fn eliminate_modular(rows: &[Vec<(usize, &FieldElem)>], p: u64) -> Vec<(usize, usize)> {
    let residue = |e: &FieldElem| match e {
        FieldElem::Residue { value, .. } => *value,
        FieldElem::Rational(_) => unreachable!("matrix entries share its field"),
    };
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % p as u128) as u64;
    let inv = |a: u64| {
        // Fermat; p is prime.
        let (mut base, mut e, mut acc) = (a, p - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, base);
            }
            base = mulmod(base, base);
            e >>= 1;
        }
        acc
    };
    let mut basis: BTreeMap<usize, BTreeMap<usize, u64>> = BTreeMap::new();
    let mut pivots = Vec::new();
    for (ri, row) in rows.iter().enumerate() {
        let mut cur: BTreeMap<usize, u64> = row.iter().map(|(c, v)| (*c, residue(v))).collect();
        while let Some((&lead, &lv)) = cur.iter().next() {
            let Some(prow) = basis.get(&lead) else {
                let s = inv(lv);
                for v in cur.values_mut() {
                    *v = mulmod(*v, s);
                }
                basis.insert(lead, cur);
                pivots.push((ri, lead));
                break;
            };
            for (&c, &pv) in prow {
                let e = cur.entry(c).or_insert(0);
                *e = (*e + p - mulmod(lv, pv)) % p;
                if *e == 0 {
                    cur.remove(&c);
                }
            }
        }
    }
    pivots
}

fn eliminate_rational(rows: &[Vec<(usize, &FieldElem)>]) -> Vec<(usize, usize)> {
    let mut basis: BTreeMap<usize, BTreeMap<usize, BigInt>> = BTreeMap::new();
    let mut pivots = Vec::new();
    for (ri, row) in rows.iter().enumerate() {
        let mut cur = integer_row(row);
        while let Some((&lead, lv)) = cur.iter().next() {
            let Some(prow) = basis.get(&lead) else {
                basis.insert(lead, cur);
                pivots.push((ri, lead));
                break;
            };
            // cur <- p·cur - l·prow, with p, l the two leading entries.
            let lv = lv.clone();
            let pl = &prow[&lead];
            let mut next = BTreeMap::new();
            for (c, v) in &cur {
                next.insert(*c, v * pl);
            }
            for (c, pv) in prow {
                let e = next.entry(*c).or_insert_with(BigInt::zero);
                *e -= &lv * pv;
            }
            next.retain(|_, v| !v.is_zero());
            cur = primitive(next);
        }
    }
    pivots
}

/// Clears denominators and divides out the content, leading entry positive.
fn integer_row(row: &[(usize, &FieldElem)]) -> BTreeMap<usize, BigInt> {
    let rats: Vec<_> = row
        .iter()
        .map(|(c, v)| (*c, v.as_rational().expect("rational matrix").clone()))
        .collect();
    let lcm = rats
        .iter()
        .fold(BigInt::one(), |acc, (_, q)| acc.lcm(q.denom()));
    let out = rats
        .into_iter()
        .map(|(c, q)| (c, q.numer() * (&lcm / q.denom())))
        .collect();
    primitive(out)
}

fn primitive(mut row: BTreeMap<usize, BigInt>) -> BTreeMap<usize, BigInt> {
    let g = row.values().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let negate = row.values().next().is_some_and(|v| v.is_negative());
    if g.is_zero() {
        return row;
    }
    for v in row.values_mut() {
        *v = &*v / &g;
        if negate {
            *v = -&*v;
        }
    }
    row
}

/// Re-checks a pivot witness against the matrix: the pivot rows and columns
/// must be distinct and the submatrix they select must be nonsingular.
pub fn verify_pivots(m: &NisanMatrix, result: &RankResult) -> bool {
    let r = result.pivots.len();
    if r != result.rank {
        return false;
    }
    let mut rows: Vec<&Word> = result.pivots.iter().map(|(w, _)| w).collect();
    let mut cols: Vec<&Word> = result.pivots.iter().map(|(_, w)| w).collect();
    rows.sort();
    cols.sort();
    if rows.windows(2).any(|w| w[0] == w[1]) || cols.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    let sub: Vec<Vec<FieldElem>> = rows
        .iter()
        .map(|rw| cols.iter().map(|cw| m.entry(rw, cw)).collect())
        .collect();
    dense_rank(sub) == r
}

/// Plain Gaussian elimination on a dense matrix.
pub fn dense_rank(mut a: Vec<Vec<FieldElem>>) -> usize {
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let inv = a[rank][col].inv().expect("nonzero pivot");
        let pivot_row: Vec<FieldElem> = a[rank].iter().map(|x| x * &inv).collect();
        for (i, row) in a.iter_mut().enumerate() {
            if i == rank || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = &*x - &(&f * y);
            }
        }
        a[rank] = pivot_row;
        rank += 1;
    }
    rank
}
