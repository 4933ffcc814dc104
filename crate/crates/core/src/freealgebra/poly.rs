use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use super::{AlgebraError, Alphabet, Field, FieldElem, Var, Word, DEFAULT_WORD_LEN_GUARD};

/// Degree of a polynomial. The zero polynomial has degree `NegInfinity`,
/// which sorts below every finite degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }

    /// True for finite degrees `>= k`.
    pub fn at_least(self, k: usize) -> bool {
        matches!(self, Degree::Finite(d) if d >= k)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// A non-commutative polynomial: a finite map from words to nonzero
/// coefficients. Two polynomials are equal iff their maps are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NcPoly {
    field: Field,
    alphabet: Alphabet,
    terms: BTreeMap<Word, FieldElem>,
}

impl NcPoly {
    pub fn zero(field: Field, alphabet: Alphabet) -> Self {
        NcPoly {
            field,
            alphabet,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: Field, alphabet: Alphabet, c: FieldElem) -> Result<Self, AlgebraError> {
        Self::monomial(field, alphabet, Word::empty(), c)
    }

    pub fn var(field: Field, alphabet: Alphabet, v: Var) -> Result<Self, AlgebraError> {
        Self::monomial(field, alphabet, Word::new(vec![v]), field.one())
    }

    pub fn monomial(
        field: Field,
        alphabet: Alphabet,
        word: Word,
        c: FieldElem,
    ) -> Result<Self, AlgebraError> {
        Self::from_terms(field, alphabet, [(word, c)])
    }

    /// Builds a polynomial from `(word, coefficient)` pairs, summing repeated
    /// words and dropping zeros.
    pub fn from_terms<I>(field: Field, alphabet: Alphabet, terms: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (Word, FieldElem)>,
    {
        let mut p = NcPoly::zero(field, alphabet);
        for (w, c) in terms {
            if c.field() != field {
                return Err(AlgebraError::FieldMismatch {
                    left: field,
                    right: c.field(),
                });
            }
            if let Some(v) = w.letters().iter().find(|v| !alphabet.contains(**v)) {
                return Err(AlgebraError::VarOutOfAlphabet { var: *v, alphabet });
            }
            p.add_term(w, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, w: Word, c: FieldElem) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &FieldElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> FieldElem {
        self.terms.get(w).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn degree(&self) -> Degree {
        self.terms
            .keys()
            .map(Word::len)
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    pub fn constant_term(&self) -> FieldElem {
        self.coeff(&Word::empty())
    }

    fn check_compatible(&self, other: &NcPoly) -> Result<(), AlgebraError> {
        if self.field != other.field {
            return Err(AlgebraError::FieldMismatch {
                left: self.field,
                right: other.field,
            });
        }
        if self.alphabet != other.alphabet {
            return Err(AlgebraError::AlphabetMismatch {
                left: self.alphabet,
                right: other.alphabet,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &NcPoly) -> Result<NcPoly, AlgebraError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &NcPoly) -> Result<NcPoly, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> NcPoly {
        NcPoly {
            field: self.field,
            alphabet: self.alphabet,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &FieldElem) -> Result<NcPoly, AlgebraError> {
        if c.field() != self.field {
            return Err(AlgebraError::FieldMismatch {
                left: self.field,
                right: c.field(),
            });
        }
        if c.is_zero() {
            return Ok(NcPoly::zero(self.field, self.alphabet));
        }
        Ok(NcPoly {
            field: self.field,
            alphabet: self.alphabet,
            terms: self.terms.iter().map(|(w, a)| (w.clone(), a * c)).collect(),
        })
    }

    /// Product with the default word-length guard.
    pub fn mul(&self, other: &NcPoly) -> Result<NcPoly, AlgebraError> {
        self.mul_guarded(other, DEFAULT_WORD_LEN_GUARD)
    }

    /// Product in the free algebra: concatenate words, multiply coefficients.
    /// Fails if a resulting word would be longer than `max_len`.
    pub fn mul_guarded(&self, other: &NcPoly, max_len: usize) -> Result<NcPoly, AlgebraError> {
        self.check_compatible(other)?;
        let mut out = NcPoly::zero(self.field, self.alphabet);
        if self.is_zero() || other.is_zero() {
            return Ok(out);
        }
        let len = self.degree().finite().unwrap_or(0) + other.degree().finite().unwrap_or(0);
        if len > max_len {
            return Err(AlgebraError::WordTooLong { len, limit: max_len });
        }
        for (u, a) in &self.terms {
            for (w, b) in &other.terms {
                out.add_term(u.concat(w), a * b);
            }
        }
        Ok(out)
    }

    /// The homogeneous component of degree `r`.
    pub fn homogeneous_part(&self, r: usize) -> NcPoly {
        self.filter(|w| w.len() == r)
    }

    /// `p - p^0`: everything but the constant term.
    pub fn positive_part(&self) -> NcPoly {
        self.filter(|w| !w.is_empty())
    }

    /// Keeps the terms whose word satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&Word) -> bool) -> NcPoly {
        NcPoly {
            field: self.field,
            alphabet: self.alphabet,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| keep(w))
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    /// Re-declares the polynomial over another alphabet, which must contain
    /// every variable actually used.
    pub fn with_alphabet(&self, alphabet: Alphabet) -> Result<NcPoly, AlgebraError> {
        for w in self.terms.keys() {
            if let Some(v) = w.letters().iter().find(|v| !alphabet.contains(**v)) {
                return Err(AlgebraError::VarOutOfAlphabet { var: *v, alphabet });
            }
        }
        Ok(NcPoly {
            field: self.field,
            alphabet,
            terms: self.terms.clone(),
        })
    }

    /// Maps every coefficient into `field`.
    pub fn convert(&self, field: Field) -> Result<NcPoly, AlgebraError> {
        let terms = self
            .terms
            .iter()
            .map(|(w, c)| Ok((w.clone(), c.convert(field)?)))
            .collect::<Result<Vec<_>, AlgebraError>>()?;
        NcPoly::from_terms(field, self.alphabet, terms)
    }

    /// Substitution with the default word-length guard.
    pub fn substitute(
        &self,
        images: &BTreeMap<Var, NcPoly>,
        target: Alphabet,
    ) -> Result<NcPoly, AlgebraError> {
        self.substitute_guarded(images, target, DEFAULT_WORD_LEN_GUARD)
    }

    /// The algebra homomorphism determined by `images`: each letter with an
    /// image maps to it, every other letter to itself (and must therefore be
    /// a member of `target`). Images must live over `target`.
    pub fn substitute_guarded(
        &self,
        images: &BTreeMap<Var, NcPoly>,
        target: Alphabet,
        max_len: usize,
    ) -> Result<NcPoly, AlgebraError> {
        for img in images.values() {
            if img.field != self.field {
                return Err(AlgebraError::FieldMismatch {
                    left: self.field,
                    right: img.field,
                });
            }
            if img.alphabet != target {
                return Err(AlgebraError::AlphabetMismatch {
                    left: target,
                    right: img.alphabet,
                });
            }
        }
        let mut letter_cache: BTreeMap<Var, NcPoly> = BTreeMap::new();
        let mut image_of = |v: Var| -> Result<NcPoly, AlgebraError> {
            if let Some(p) = images.get(&v) {
                return Ok(p.clone());
            }
            if let Some(p) = letter_cache.get(&v) {
                return Ok(p.clone());
            }
            let p = NcPoly::var(self.field, target, v)?;
            letter_cache.insert(v, p.clone());
            Ok(p)
        };
        let mut out = NcPoly::zero(self.field, target);
        for (w, c) in &self.terms {
            let mut acc = NcPoly::constant(self.field, target, c.clone())?;
            for &v in w.letters() {
                acc = acc.mul_guarded(&image_of(v)?, max_len)?;
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }
}

impl fmt::Display for NcPoly {
    /// Terms joined by ` + ` in word order; the zero polynomial prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if w.is_empty() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c} * {w}")?;
            }
        }
        Ok(())
    }
}
