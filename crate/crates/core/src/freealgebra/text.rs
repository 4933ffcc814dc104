//! Line-oriented text form of a polynomial:
//!
//! ```text
//! field: GF(101)
//! 1 * x1.x2 + 100 * x2.x1 + 3
//! ```

use super::{AlgebraError, Alphabet, Field, NcPoly, Var, Word};

impl NcPoly {
    /// Header line plus the term line, newline-terminated.
    pub fn to_text(&self) -> String {
        format!("field: {}\n{}\n", self.field(), self)
    }

    /// Parses the output of [`NcPoly::to_text`]. Every variable must belong
    /// to `alphabet`.
    pub fn parse_text(text: &str, alphabet: Alphabet) -> Result<NcPoly, AlgebraError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| AlgebraError::Parse("empty polynomial document".into()))?;
        let field: Field = header
            .strip_prefix("field:")
            .ok_or_else(|| AlgebraError::Parse(format!("expected `field:` header, got `{header}`")))?
            .parse()?;
        let body: Vec<&str> = lines.collect();
        let body = body.join(" ");
        parse_terms(&body, field, alphabet)
    }
}

/// Parses a term line such as `2 * x1.x2 + -1/3 * z1 + 5`.
pub fn parse_terms(body: &str, field: Field, alphabet: Alphabet) -> Result<NcPoly, AlgebraError> {
    let body = body.trim();
    if body.is_empty() || body == "0" {
        return Ok(NcPoly::zero(field, alphabet));
    }
    let mut terms = Vec::new();
    for raw in body.split(" + ") {
        let raw = raw.trim();
        let (coeff, word) = match raw.split_once('*') {
            Some((c, w)) => (c.trim(), parse_word(w.trim())?),
            None => (raw, Word::empty()),
        };
        terms.push((word, field.parse_elem(coeff)?));
    }
    NcPoly::from_terms(field, alphabet, terms)
}

fn parse_word(s: &str) -> Result<Word, AlgebraError> {
    s.split('.')
        .map(|v| v.trim().parse::<Var>())
        .collect::<Result<Vec<_>, _>>()
        .map(Word::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let f = Field::Rational;
        let a = Alphabet::new(2, 1);
        let p = NcPoly::from_terms(
            f,
            a,
            [
                (Word::from_x(&[0, 1]), f.parse_elem("-2/3").unwrap()),
                (Word::new(vec![Var::Z(0), Var::X(1)]), f.from_i64(4)),
                (Word::empty(), f.from_i64(7)),
            ],
        )
        .unwrap();
        let text = p.to_text();
        assert_eq!(text, "field: Q\n7 + -2/3 * x1.x2 + 4 * x2.z1\n".replace("x2.z1", "z1.x2"));
        assert_eq!(NcPoly::parse_text(&text, a).unwrap(), p);
    }

    #[test]
    fn zero_and_prime_header() {
        let f = Field::Prime(5);
        let zero = NcPoly::zero(f, Alphabet::x_only(1));
        assert_eq!(zero.to_text(), "field: GF(5)\n0\n");
        assert_eq!(NcPoly::parse_text("field: GF(5)\n0\n", Alphabet::x_only(1)).unwrap(), zero);
    }

    #[test]
    fn rejects_foreign_variable() {
        assert!(NcPoly::parse_text("field: Q\n1 * x3\n", Alphabet::x_only(2)).is_err());
        assert!(NcPoly::parse_text("1 * x1\n", Alphabet::x_only(2)).is_err());
    }
}
