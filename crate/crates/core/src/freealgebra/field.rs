//! Exact scalars: arbitrary-precision rationals and residues modulo a prime.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::AlgebraError;

/// Largest admissible prime modulus. Keeps residue products inside `u64`.
pub const MAX_PRIME: u64 = (1 << 32) - 1;

/// The coefficient field of a polynomial or circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    /// The rationals.
    Rational,
    /// The prime field GF(p).
    Prime(u64),
}

impl Field {
    /// GF(p), rejecting non-primes and moduli above [`MAX_PRIME`].
    pub fn prime(p: u64) -> Result<Field, AlgebraError> {
        if p > MAX_PRIME || !is_prime(p) {
            return Err(AlgebraError::InvalidModulus(p));
        }
        Ok(Field::Prime(p))
    }

    pub fn zero(self) -> FieldElem {
        self.from_i64(0)
    }

    pub fn one(self) -> FieldElem {
        self.from_i64(1)
    }

    pub fn from_i64(self, v: i64) -> FieldElem {
        match self {
            Field::Rational => FieldElem::Rational(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(p) => FieldElem::Residue {
                value: v.rem_euclid(p as i64) as u64,
                modulus: p,
            },
        }
    }

    pub fn from_bigint(self, v: &BigInt) -> FieldElem {
        match self {
            Field::Rational => FieldElem::Rational(BigRational::from_integer(v.clone())),
            Field::Prime(p) => FieldElem::Residue {
                value: reduce_bigint(v, p),
                modulus: p,
            },
        }
    }

    /// The image of the rational `num/den` in this field.
    pub fn from_ratio(self, num: &BigInt, den: &BigInt) -> Result<FieldElem, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::NotInvertible(format!("{num}/{den}")));
        }
        match self {
            Field::Rational => Ok(FieldElem::Rational(BigRational::new(num.clone(), den.clone()))),
            Field::Prime(_) => {
                let d = self.from_bigint(den);
                let inv = d
                    .inv()
                    .ok_or_else(|| AlgebraError::NotInvertible(format!("{num}/{den} in {self}")))?;
                Ok(self.from_bigint(num) * inv)
            }
        }
    }

    /// Parses `"a"` or `"a/b"` (optional leading minus sign).
    pub fn parse_elem(self, s: &str) -> Result<FieldElem, AlgebraError> {
        let s = s.trim();
        let bad = || AlgebraError::Parse(format!("malformed coefficient `{s}`"));
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let num = BigInt::from_str(num).map_err(|_| bad())?;
        let den = BigInt::from_str(den).map_err(|_| bad())?;
        self.from_ratio(&num, &den)
    }

    pub fn characteristic(self) -> u64 {
        match self {
            Field::Rational => 0,
            Field::Prime(p) => p,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "GF({p})"),
        }
    }
}

impl FromStr for Field {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "Q" {
            return Ok(Field::Rational);
        }
        let inner = s
            .strip_prefix("GF(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| AlgebraError::Parse(format!("unknown field `{s}`")))?;
        let p = inner
            .trim()
            .parse::<u64>()
            .map_err(|_| AlgebraError::Parse(format!("unknown field `{s}`")))?;
        Field::prime(p)
    }
}

/// An element of a [`Field`].
///
/// Rationals are kept in lowest terms with positive denominator; residues are
/// always reduced. Mixing elements of different fields in an arithmetic
/// operator is an internal invariant violation and panics; polynomial-level
/// operations check fields before reaching here.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElem {
    Rational(BigRational),
    Residue { value: u64, modulus: u64 },
}

impl FieldElem {
    pub fn field(&self) -> Field {
        match self {
            FieldElem::Rational(_) => Field::Rational,
            FieldElem::Residue { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Rational(q) => q.is_zero(),
            FieldElem::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElem::Rational(q) => q.is_one(),
            FieldElem::Residue { value, .. } => *value == 1,
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<FieldElem> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            FieldElem::Rational(q) => FieldElem::Rational(q.recip()),
            FieldElem::Residue { value, modulus } => FieldElem::Residue {
                value: pow_mod(*value, modulus - 2, *modulus),
                modulus: *modulus,
            },
        })
    }

    pub fn pow(&self, mut e: u32) -> FieldElem {
        let mut base = self.clone();
        let mut acc = self.field().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Maps this element into `target`. Rationals map into GF(p) when their
    /// denominator is invertible; residues only map to their own field.
    pub fn convert(&self, target: Field) -> Result<FieldElem, AlgebraError> {
        if self.field() == target {
            return Ok(self.clone());
        }
        match self {
            FieldElem::Rational(q) => target.from_ratio(q.numer(), q.denom()),
            FieldElem::Residue { .. } => Err(AlgebraError::FieldMismatch {
                left: self.field(),
                right: target,
            }),
        }
    }

    /// Numerator and denominator when the element is rational.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            FieldElem::Rational(q) => Some(q),
            FieldElem::Residue { .. } => None,
        }
    }

    /// Integer value if the element is an integer fitting in `i64`
    /// (residues are reported by their canonical representative).
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            FieldElem::Rational(q) if q.is_integer() => q.numer().to_i64(),
            FieldElem::Rational(_) => None,
            FieldElem::Residue { value, .. } => i64::try_from(*value).ok(),
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElem::Rational(q) if q.is_integer() => write!(f, "{}", q.numer()),
            FieldElem::Rational(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            FieldElem::Residue { value, .. } => write!(f, "{value}"),
        }
    }
}

fn same_modulus(a: u64, b: u64) -> u64 {
    assert_eq!(a, b, "field elements from different prime fields");
    a
}

impl<'a> Add<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;

    fn add(self, rhs: &'a FieldElem) -> FieldElem {
        match (self, rhs) {
            (FieldElem::Rational(a), FieldElem::Rational(b)) => FieldElem::Rational(a + b),
            (
                FieldElem::Residue { value: a, modulus: p },
                FieldElem::Residue { value: b, modulus: q },
            ) => {
                let p = same_modulus(*p, *q);
                FieldElem::Residue {
                    value: (a + b) % p,
                    modulus: p,
                }
            }
            _ => panic!("field elements from different fields"),
        }
    }
}

impl<'a> Sub<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;

    fn sub(self, rhs: &'a FieldElem) -> FieldElem {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;

    fn mul(self, rhs: &'a FieldElem) -> FieldElem {
        match (self, rhs) {
            (FieldElem::Rational(a), FieldElem::Rational(b)) => FieldElem::Rational(a * b),
            (
                FieldElem::Residue { value: a, modulus: p },
                FieldElem::Residue { value: b, modulus: q },
            ) => {
                let p = same_modulus(*p, *q);
                FieldElem::Residue {
                    value: a * b % p,
                    modulus: p,
                }
            }
            _ => panic!("field elements from different fields"),
        }
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;

    fn neg(self) -> FieldElem {
        match self {
            FieldElem::Rational(a) => FieldElem::Rational(-a),
            FieldElem::Residue { value, modulus } => FieldElem::Residue {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, rhs: FieldElem) -> FieldElem {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, rhs: &'a FieldElem) -> FieldElem {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        -&self
    }
}

fn reduce_bigint(v: &BigInt, p: u64) -> u64 {
    let m = BigInt::from(p);
    let r = v.mod_floor(&m);
    r.to_u64().expect("residue fits in u64")
}

fn pow_mod(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
