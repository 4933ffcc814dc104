use std::fmt;

use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// A variable of the ambient free algebra. Indices are zero-based; `X(0)`
/// prints as `x1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X(u32),
    Z(u32),
}

impl Var {
    pub fn is_x(self) -> bool {
        matches!(self, Var::X(_))
    }

    pub fn is_z(self) -> bool {
        matches!(self, Var::Z(_))
    }

    pub fn index(self) -> u32 {
        match self {
            Var::X(i) | Var::Z(i) => i,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Z(i) => write!(f, "z{}", i + 1),
        }
    }
}

impl std::str::FromStr for Var {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlgebraError::Parse(format!("malformed variable `{s}`"));
        let (ctor, digits): (fn(u32) -> Var, &str) = if let Some(d) = s.strip_prefix('x') {
            (Var::X, d)
        } else if let Some(d) = s.strip_prefix('z') {
            (Var::Z, d)
        } else {
            return Err(bad());
        };
        let k: u32 = digits.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        Ok(ctor(k - 1))
    }
}

/// The variable sets `X = {x1..x_x}` and `Z = {z1..z_z}` of a ring `F<Z, X>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    pub x: u32,
    pub z: u32,
}

impl Alphabet {
    pub fn new(x: u32, z: u32) -> Self {
        Alphabet { x, z }
    }

    /// `F<X>` with `n` variables.
    pub fn x_only(n: u32) -> Self {
        Alphabet { x: n, z: 0 }
    }

    /// `F<Z>` with `m` variables.
    pub fn z_only(m: u32) -> Self {
        Alphabet { x: 0, z: m }
    }

    pub fn contains(&self, v: Var) -> bool {
        match v {
            Var::X(i) => i < self.x,
            Var::Z(i) => i < self.z,
        }
    }

    /// True when every variable of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &Alphabet) -> bool {
        self.x <= other.x && self.z <= other.z
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<x:{}, z:{}>", self.x, self.z)
    }
}

/// A monomial: a finite sequence of variables. The empty word is the
/// monomial of the constant term.
///
/// Ordering is lexicographic by variable (all `x` before all `z`, then by
/// index), a proper prefix sorting first.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Var>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Var>) -> Self {
        Word(letters)
    }

    /// A word over `X` from zero-based indices.
    pub fn from_x(indices: &[u32]) -> Self {
        Word(indices.iter().map(|&i| Var::X(i)).collect())
    }

    pub fn from_z(indices: &[u32]) -> Self {
        Word(indices.iter().map(|&i| Var::Z(i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Var] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn split_at(&self, mid: usize) -> (Word, Word) {
        let (a, b) = self.0.split_at(mid);
        (Word(a.to_vec()), Word(b.to_vec()))
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn z_count(&self) -> usize {
        self.0.iter().filter(|v| v.is_z()).count()
    }

    pub fn has_z(&self) -> bool {
        self.0.iter().any(|v| v.is_z())
    }

    pub fn has_x(&self) -> bool {
        self.0.iter().any(|v| v.is_x())
    }

    /// Zero-based `x` indices when the word uses only `X` letters.
    pub fn x_indices(&self) -> Option<Vec<u32>> {
        self.0
            .iter()
            .map(|v| match v {
                Var::X(i) => Some(*i),
                Var::Z(_) => None,
            })
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Serialized as its display form, e.g. `"x1.x2"`; the empty word is `""`.
impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromIterator<Var> for Word {
    fn from_iter<T: IntoIterator<Item = Var>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_lexicographic_prefix_first() {
        let a = Word::from_x(&[0]);
        let b = Word::from_x(&[0, 1]);
        let c = Word::from_x(&[1]);
        assert!(Word::empty() < a && a < b && b < c);
        assert!(Word::from_x(&[5]) < Word::from_z(&[0]));
    }

    #[test]
    fn var_round_trip() {
        assert_eq!("x3".parse::<Var>().unwrap(), Var::X(2));
        assert_eq!(Var::Z(0).to_string(), "z1");
        assert!("x0".parse::<Var>().is_err());
        assert!("y1".parse::<Var>().is_err());
    }
}
