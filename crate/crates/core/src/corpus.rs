//! Deterministic pseudo-random circuits for property testing. Circuit `i`
//! of seed `s` depends only on `(s, i)` and the limits.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{classify_gates, node_polynomials, Circuit, CircuitBuilder, CircuitError, GateCounts, NodeId};
use crate::freealgebra::{Alphabet, Degree, Field};
use crate::ringtrans::with_cancelling_noise;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("corpus limits out of range: {0}")]
    Limits(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusLimits {
    pub max_n: u32,
    pub max_degree: usize,
    pub max_nodes: usize,
}

impl Default for CorpusLimits {
    fn default() -> Self {
        CorpusLimits {
            max_n: 4,
            max_degree: 6,
            max_nodes: 40,
        }
    }
}

impl CorpusLimits {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if !(1..=8).contains(&self.max_n) {
            return Err(CorpusError::Limits(format!("max_n = {} not in 1..=8", self.max_n)));
        }
        if !(1..=12).contains(&self.max_degree) {
            return Err(CorpusError::Limits(format!(
                "max_degree = {} not in 1..=12",
                self.max_degree
            )));
        }
        let min_nodes = self.max_n as usize + 4;
        if !(min_nodes..=400).contains(&self.max_nodes) {
            return Err(CorpusError::Limits(format!(
                "max_nodes = {} not in {min_nodes}..=400",
                self.max_nodes
            )));
        }
        Ok(())
    }
}

/// Fields cycle with the index: Q, GF(101), GF(2).
pub fn corpus_field(index: usize) -> Field {
    match index % 3 {
        0 => Field::Rational,
        1 => Field::Prime(101),
        _ => Field::Prime(2),
    }
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Circuit `index` of the corpus for `seed`. Its positive part is never 0.
pub fn generate_circuit(seed: u64, index: usize, limits: CorpusLimits) -> Result<Circuit, CorpusError> {
    limits.validate()?;
    let mut rng = rng_for(seed, index);
    let field = corpus_field(index);
    loop {
        let c = random_circuit(&mut rng, field, limits)?;
        let polys = node_polynomials(&c)?;
        if !polys[c.output()].positive_part().is_zero() {
            return Ok(c);
        }
    }
}

pub fn generate(seed: u64, count: usize, limits: CorpusLimits) -> Result<Vec<Circuit>, CorpusError> {
    (0..count).map(|i| generate_circuit(seed, i, limits)).collect()
}

/// A ring circuit computing the same polynomial as circuit `index`, with
/// one or two `Z` variables of cancelling noise.
pub fn generate_ring_circuit(seed: u64, index: usize, limits: CorpusLimits) -> Result<Circuit, CorpusError> {
    let c = generate_circuit(seed, index, limits)?;
    let mut rng = rng_for(seed ^ 0x5e_ed0f_2a9e, index);
    let m = rng.gen_range(1..=2);
    let rounds = rng.gen_range(1..=2);
    Ok(with_cancelling_noise(&c, m, rounds, &mut rng))
}

fn random_circuit(rng: &mut ChaCha8Rng, field: Field, limits: CorpusLimits) -> Result<Circuit, CorpusError> {
    let n = rng.gen_range(1..=limits.max_n);
    let target = rng.gen_range(n as usize + 3..limits.max_nodes);
    let mut b = CircuitBuilder::new(field, Alphabet::x_only(n));
    // Upper bounds on node degrees, 0 for scalars.
    let mut degree: Vec<usize> = Vec::new();
    for i in 0..n {
        b.input(i);
        degree.push(1);
    }
    let scalars = rng.gen_range(1..=2);
    for _ in 0..scalars {
        let v = random_scalar(rng);
        b.scalar(field.from_i64(v));
    }
    degree.resize(degree.len() + scalars, 0);
    if field == Field::Rational && rng.gen_bool(0.3) {
        b.scalar(field.parse_elem("1/2").expect("valid"));
        degree.push(0);
    }
    while b.len() < target {
        let ids: Vec<NodeId> = (0..b.len()).collect();
        if rng.gen_bool(0.45) {
            let l = *ids.choose(rng).expect("nonempty");
            let fits: Vec<NodeId> = ids
                .iter()
                .copied()
                .filter(|&r| degree[l] + degree[r] <= limits.max_degree)
                .collect();
            let Some(&r) = fits.choose(rng) else { continue };
            b.prod(l, r);
            degree.push(degree[l] + degree[r]);
        } else {
            let k = rng.gen_range(1..=3);
            let args: Vec<(NodeId, _)> = (0..k)
                .map(|_| {
                    let u = *ids.choose(rng).expect("nonempty");
                    (u, field.from_i64(random_scalar(rng)))
                })
                .collect();
            let d = args.iter().map(|(u, _)| degree[*u]).max().unwrap_or(0);
            b.linear(args);
            degree.push(d);
        }
    }
    // Every node that nothing consumes feeds the output sum.
    let mut used = vec![false; b.len()];
    for id in 0..b.len() {
        for ch in b.node(id).children() {
            used[ch] = true;
        }
    }
    let sinks: Vec<NodeId> = (0..b.len()).filter(|&i| !used[i]).collect();
    let out = if sinks.len() == 1 { sinks[0] } else { b.sum(&sinks) };
    Ok(b.finish(out)?)
}

fn random_scalar(rng: &mut ChaCha8Rng) -> i64 {
    let v = rng.gen_range(1..=3);
    if rng.gen_bool(0.5) {
        -v
    } else {
        v
    }
}

/// One line of the corpus ledger.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusEntry {
    pub index: usize,
    pub field: String,
    pub n: u32,
    pub degree: Option<usize>,
    pub counts: GateCounts,
    /// Text form of the computed polynomial.
    pub polynomial: String,
}

pub fn describe(index: usize, c: &Circuit) -> Result<CorpusEntry, CorpusError> {
    let polys = node_polynomials(c)?;
    let counts = classify_gates(c, &polys).counts;
    let f = &polys[c.output()];
    Ok(CorpusEntry {
        index,
        field: c.field().to_string(),
        n: c.alphabet().x,
        degree: match f.degree() {
            Degree::NegInfinity => None,
            Degree::Finite(k) => Some(k),
        },
        counts,
        polynomial: f.to_text(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{compute_polynomial, to_json};

    #[test]
    fn deterministic_and_within_limits() {
        let limits = CorpusLimits::default();
        let a = generate(0, 12, limits).unwrap();
        let b = generate(0, 12, limits).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(to_json(x), to_json(y));
        }
        for (i, c) in a.iter().enumerate() {
            assert!(c.len() <= limits.max_nodes);
            assert!(c.alphabet().x <= limits.max_n);
            assert_eq!(c.field(), corpus_field(i));
            let f = compute_polynomial(c).unwrap();
            assert!(f.degree() <= Degree::Finite(limits.max_degree));
            assert!(!f.positive_part().is_zero());
        }
        assert_ne!(to_json(&a[0]), to_json(&generate(1, 1, limits).unwrap()[0]));
    }

    #[test]
    fn ring_corpus_has_z_constants() {
        let rc = generate_ring_circuit(3, 0, CorpusLimits::default()).unwrap();
        assert!(rc.alphabet().z >= 1);
        assert!(!rc.is_field_circuit());
    }

    #[test]
    fn limits_are_checked() {
        let bad = CorpusLimits {
            max_n: 0,
            ..CorpusLimits::default()
        };
        assert!(generate(0, 1, bad).is_err());
        assert!(generate(0, 0, CorpusLimits::default()).unwrap().is_empty());
    }
}
