use std::collections::BTreeMap;

use crate::freealgebra::{Alphabet, Field, FieldElem, NcPoly, Word};

use super::NisanError;

/// The coefficient matrix `M_f^{a,b}`: rows are words of length `a`,
/// columns words of length `b`, and the entry at `(u, w)` is the
/// coefficient of `u·w` in `f`. Only nonzero entries are stored; the logical
/// shape is `n^a × n^b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NisanMatrix {
    field: Field,
    n: u32,
    a: usize,
    b: usize,
    entries: BTreeMap<(Word, Word), FieldElem>,
}

/// Splits the degree-`(a+b)` part of `p` at position `a`.
pub fn build_matrix(p: &NcPoly, a: usize, b: usize) -> Result<NisanMatrix, NisanError> {
    let n = p.alphabet().x;
    if n == 0 {
        return Err(NisanError::EmptyAlphabet);
    }
    let mut entries = BTreeMap::new();
    for (w, c) in p.terms() {
        if w.len() != a + b {
            continue;
        }
        if w.has_z() {
            return Err(NisanError::NotOverX(w.to_string()));
        }
        entries.insert(w.split_at(a), c.clone());
    }
    Ok(NisanMatrix {
        field: p.field(),
        n,
        a,
        b,
        entries,
    })
}

impl NisanMatrix {
    pub fn zero(field: Field, n: u32, a: usize, b: usize) -> Self {
        NisanMatrix {
            field,
            n,
            a,
            b,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a matrix from explicit entries; zeros are dropped and every
    /// row/column word must have the declared length over `n` letters.
    pub fn from_entries<I>(field: Field, n: u32, a: usize, b: usize, entries: I) -> Result<Self, NisanError>
    where
        I: IntoIterator<Item = (Word, Word, FieldElem)>,
    {
        let mut m = NisanMatrix::zero(field, n, a, b);
        for (r, c, v) in entries {
            let ok_word = |w: &Word, len: usize| {
                w.len() == len && w.x_indices().is_some_and(|ix| ix.iter().all(|&i| i < n))
            };
            if !ok_word(&r, a) || !ok_word(&c, b) {
                return Err(NisanError::BadIndex(format!("({r}, {c})")));
            }
            if v.field() != field {
                return Err(NisanError::FieldMismatch);
            }
            if !v.is_zero() {
                m.entries.insert((r, c), v);
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn alphabet_size(&self) -> u32 {
        self.n
    }

    pub fn row_len(&self) -> usize {
        self.a
    }

    pub fn col_len(&self) -> usize {
        self.b
    }

    /// Logical number of rows `n^a` (saturating).
    pub fn rows(&self) -> u128 {
        (self.n as u128).saturating_pow(self.a as u32)
    }

    pub fn cols(&self) -> u128 {
        (self.n as u128).saturating_pow(self.b as u32)
    }

    pub fn logical_entries(&self) -> u128 {
        self.rows().saturating_mul(self.cols())
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Word, &Word, &FieldElem)> {
        self.entries.iter().map(|((r, c), v)| (r, c, v))
    }

    pub fn entry(&self, row: &Word, col: &Word) -> FieldElem {
        self.entries
            .get(&(row.clone(), col.clone()))
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    /// Occupied row words, ascending.
    pub fn occupied_rows(&self) -> Vec<Word> {
        let mut rows: Vec<Word> = self.entries.keys().map(|(r, _)| r.clone()).collect();
        rows.dedup();
        rows
    }

    /// Occupied column words, ascending.
    pub fn occupied_cols(&self) -> Vec<Word> {
        let mut cols: Vec<Word> = self.entries.keys().map(|(_, c)| c.clone()).collect();
        cols.sort();
        cols.dedup();
        cols
    }

    fn check_shape(&self, other: &NisanMatrix) -> Result<(), NisanError> {
        if self.field != other.field {
            return Err(NisanError::FieldMismatch);
        }
        if (self.n, self.a, self.b) != (other.n, other.a, other.b) {
            return Err(NisanError::ShapeMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &NisanMatrix) -> Result<NisanMatrix, NisanError> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            let s = match out.entries.get(k) {
                Some(cur) => cur + v,
                None => v.clone(),
            };
            if s.is_zero() {
                out.entries.remove(k);
            } else {
                out.entries.insert(k.clone(), s);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &FieldElem) -> NisanMatrix {
        let mut out = NisanMatrix::zero(self.field, self.n, self.a, self.b);
        if !c.is_zero() {
            out.entries = self.entries.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        }
        out
    }

    /// Kronecker product with word-concatenation indexing:
    /// `(A ⊗ B)(u·u', w·w') = A(u, w) · B(u', w')`.
    pub fn kronecker(&self, other: &NisanMatrix) -> Result<NisanMatrix, NisanError> {
        if self.n != other.n {
            return Err(NisanError::ShapeMismatch);
        }
        if self.field != other.field {
            return Err(NisanError::FieldMismatch);
        }
        let mut out = NisanMatrix::zero(self.field, self.n, self.a + other.a, self.b + other.b);
        for ((u, w), x) in &self.entries {
            for ((u2, w2), y) in &other.entries {
                out.entries.insert((u.concat(u2), w.concat(w2)), x * y);
            }
        }
        Ok(out)
    }

    /// Maps entries into another field (rationals into GF(p)).
    pub fn convert(&self, field: Field) -> Result<NisanMatrix, NisanError> {
        let entries = self
            .entries
            .iter()
            .map(|((r, c), v)| Ok((r.clone(), c.clone(), v.convert(field)?)))
            .collect::<Result<Vec<_>, crate::freealgebra::AlgebraError>>()?;
        NisanMatrix::from_entries(field, self.n, self.a, self.b, entries)
    }

    /// `Σ entry · row·col`, the homogeneous polynomial the matrix encodes.
    pub fn to_polynomial(&self) -> NcPoly {
        NcPoly::from_terms(
            self.field,
            Alphabet::x_only(self.n),
            self.entries.iter().map(|((r, c), v)| (r.concat(c), v.clone())),
        )
        .expect("matrix words are over X")
    }

    /// Dense row-major form, refused above `guard` logical entries.
    pub fn to_dense(&self, guard: u128) -> Result<Vec<Vec<FieldElem>>, NisanError> {
        let total = self.logical_entries();
        if total > guard {
            return Err(NisanError::GuardExceeded { entries: total, guard });
        }
        let (rows, cols) = (self.rows() as usize, self.cols() as usize);
        let mut dense = vec![vec![self.field.zero(); cols]; rows];
        for ((r, c), v) in &self.entries {
            dense[word_index(r, self.n)][word_index(c, self.n)] = v.clone();
        }
        Ok(dense)
    }
}

/// Position of an `X`-word in the lexicographic enumeration of all words of
/// its length (base-`n` digits).
pub fn word_index(w: &Word, n: u32) -> usize {
    w.x_indices()
        .expect("X-word")
        .iter()
        .fold(0usize, |acc, &i| acc * n as usize + i as usize)
}

/// The `X`-word of length `len` at position `idx`.
pub fn index_word(mut idx: usize, n: u32, len: usize) -> Word {
    let mut digits = vec![0u32; len];
    for d in digits.iter_mut().rev() {
        *d = (idx % n as usize) as u32;
        idx /= n as usize;
    }
    Word::from_x(&digits)
}
