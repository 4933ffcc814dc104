//! Circuits over the ring `R = F<Z>`: constant leaves may hold any element
//! of `F<Z>`. Translation to an `F`-circuit keeps every gate and replaces
//! each constant by its constant term; the `x_i -> z_i^D` substitution
//! check certifies that a ring circuit computing `f` as a function computes
//! it after translation too.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{
    compute_polynomial, evaluate_function, Circuit, CircuitBuilder, CircuitError, Node, NodeId,
    SumArg,
};
use crate::freealgebra::{AlgebraError, Alphabet, Degree, Field, NcPoly, Var, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("exponent D = {d} must exceed deg {what} = {degree}")]
    ExponentTooSmall {
        d: usize,
        what: &'static str,
        degree: usize,
    },
    #[error("{0}")]
    Mismatch(String),
    /// A postcondition of the translation failed.
    #[error("translation defect: {0}")]
    Defect(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `g(z, x)`: the ring circuit evaluated in `F<Z, X>`.
pub fn ring_circuit_polynomial(rc: &Circuit) -> Result<NcPoly, RingError> {
    Ok(compute_polynomial(rc)?)
}

/// `g⁰`: the terms of `g` without any `Z` letter, over `X` alone.
pub fn restrict_g0(g: &NcPoly) -> NcPoly {
    g.filter(|w| !w.has_z())
        .with_alphabet(Alphabet::x_only(g.alphabet().x))
        .expect("Z-free words fit the X alphabet")
}

/// `g′ = g - g⁰`: the terms that mention `Z`.
pub fn g_prime(g: &NcPoly) -> NcPoly {
    g.filter(|w| w.has_z())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountPair {
    pub before: usize,
    pub after: usize,
}

impl CountPair {
    fn new(before: usize, after: usize) -> Self {
        CountPair { before, after }
    }

    fn equal(&self) -> bool {
        self.before == self.after
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranslationReport {
    pub sums: CountPair,
    pub products: CountPair,
    pub size: CountPair,
    pub depth: CountPair,
    pub polynomial_matches: bool,
}

/// Replaces every constant `p ∈ F<Z>` by `p⁰`; the result lives over `X`
/// alone. Gate counts, size, depth and `restrict_g0` of the ring polynomial
/// are checked before returning.
pub fn translate(rc: &Circuit) -> Result<(Circuit, TranslationReport), RingError> {
    let field = rc.field();
    let target = Alphabet::x_only(rc.alphabet().x);
    let out = rc.map_consts(field, target, |p| {
        NcPoly::constant(field, target, p.constant_term()).expect("scalar constant")
    })?;
    let report = TranslationReport {
        sums: CountPair::new(rc.sum_count(), out.sum_count()),
        products: CountPair::new(rc.product_count(), out.product_count()),
        size: CountPair::new(rc.size(), out.size()),
        depth: CountPair::new(rc.depth(), out.depth()),
        polynomial_matches: compute_polynomial(&out)? == restrict_g0(&ring_circuit_polynomial(rc)?),
    };
    let counts = [
        ("sum gates", &report.sums),
        ("product gates", &report.products),
        ("size", &report.size),
        ("depth", &report.depth),
    ];
    if let Some((what, pair)) = counts.iter().find(|(_, p)| !p.equal()) {
        return Err(RingError::Defect(format!(
            "{what} changed from {} to {}",
            pair.before, pair.after
        )));
    }
    if !report.polynomial_matches {
        return Err(RingError::Defect(
            "translated polynomial differs from g0".into(),
        ));
    }
    Ok((out, report))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubstitutionCheck {
    pub d: usize,
    pub g: String,
    pub f: String,
    pub g0: String,
    pub g_prime: String,
    /// Every term of `g′` has between 1 and `D-1` letters from `Z`, so its
    /// image has degree not divisible by `D`.
    pub structural: bool,
    /// `g(z, z^D) = f(z^D)`.
    pub hypothesis_holds: bool,
    /// `g′(z, z^D) = 0`.
    pub g_prime_vanishes: bool,
    /// `g⁰(z^D) = f(z^D)`.
    pub substituted_match: bool,
    /// `g⁰ = f` in `F<X>`.
    pub g0_equals_f: bool,
    /// Reading `g⁰(z^D)` back block by block yields `f`; `None` when some
    /// word is not a concatenation of `z_i^D` blocks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoded_equals_f: Option<bool>,
    /// The flags agree with each other as the substitution argument predicts.
    pub consistent: bool,
    pub passed: bool,
}

fn degree_value(p: &NcPoly) -> usize {
    match p.degree() {
        Degree::NegInfinity => 0,
        Degree::Finite(k) => k,
    }
}

/// `x_i ↦ z_i^D` over `target`, for every `x` letter of `n`.
fn power_images(field: Field, n: u32, d: usize, target: Alphabet) -> Result<BTreeMap<Var, NcPoly>, RingError> {
    (0..n)
        .map(|i| {
            let w = Word::from_z(&vec![i; d]);
            let p = NcPoly::monomial(field, target, w, field.one())?;
            Ok((Var::X(i), p))
        })
        .collect()
}

/// Inverts the word map `x_i ↦ z_i^D`.
fn decode_blocks(p: &NcPoly, n: u32, d: usize) -> Option<NcPoly> {
    let mut terms = Vec::with_capacity(p.len());
    for (w, c) in p.terms() {
        if w.len() % d != 0 {
            return None;
        }
        let mut xs = Vec::with_capacity(w.len() / d);
        for block in w.letters().chunks(d) {
            let Var::Z(i) = block[0] else { return None };
            if i >= n || block.iter().any(|v| *v != Var::Z(i)) {
                return None;
            }
            xs.push(i);
        }
        terms.push((Word::from_x(&xs), c.clone()));
    }
    NcPoly::from_terms(p.field(), Alphabet::x_only(n), terms).ok()
}

pub fn verify_substitution(g: &NcPoly, f: &NcPoly, d: usize) -> Result<SubstitutionCheck, RingError> {
    if g.field() != f.field() {
        return Err(RingError::Mismatch(format!(
            "g is over {} but f over {}",
            g.field(),
            f.field()
        )));
    }
    if f.alphabet().z != 0 || f.alphabet().x != g.alphabet().x {
        return Err(RingError::Mismatch(format!(
            "f must be over the X alphabet of g ({} variables), got {}",
            g.alphabet().x,
            f.alphabet()
        )));
    }
    for (what, p) in [("g", g), ("f", f)] {
        let degree = degree_value(p);
        if d <= degree {
            return Err(RingError::ExponentTooSmall { d, what, degree });
        }
    }
    let field = g.field();
    let n = g.alphabet().x;
    let target = Alphabet::z_only(g.alphabet().z.max(n));
    let images = power_images(field, n, d, target)?;
    let guard = (degree_value(g).max(degree_value(f)) * d).max(crate::freealgebra::DEFAULT_WORD_LEN_GUARD);

    let g0 = restrict_g0(g);
    let gp = g_prime(g);
    let g_sub = g.substitute_guarded(&images, target, guard)?;
    let gp_sub = gp.substitute_guarded(&images, target, guard)?;
    let g0_sub = g0.substitute_guarded(&images, target, guard)?;
    let f_sub = f.substitute_guarded(&images, target, guard)?;

    let structural = gp.terms().all(|(w, _)| (1..d).contains(&w.z_count()))
        && gp_sub.terms().all(|(w, _)| w.len() % d != 0);
    let hypothesis_holds = g_sub == f_sub;
    let g_prime_vanishes = gp_sub.is_zero();
    let substituted_match = g0_sub == f_sub;
    let g0_equals_f = g0 == *f;
    let decoded_equals_f = decode_blocks(&g0_sub, n, d).map(|p| p == *f);
    let consistent = hypothesis_holds == (g_prime_vanishes && substituted_match)
        && substituted_match == g0_equals_f
        && decoded_equals_f == Some(g0_equals_f);
    Ok(SubstitutionCheck {
        d,
        g: g.to_string(),
        f: f.to_string(),
        g0: g0.to_string(),
        g_prime: gp.to_string(),
        structural,
        hypothesis_holds,
        g_prime_vanishes,
        substituted_match,
        g0_equals_f,
        decoded_equals_f,
        consistent,
        passed: structural && hypothesis_holds && g_prime_vanishes && g0_equals_f && consistent,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub agrees: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit_value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgreementReport {
    pub samples: Vec<SampleOutcome>,
    /// The sample `h_i = z_i^D`.
    pub structured: SampleOutcome,
    pub substitution: SubstitutionCheck,
    pub agrees: bool,
}

/// Compares the ring circuit with `f` as functions `R^n -> R` on `samples`
/// and on the structured sample `z_i^D` with `D = deg g + 1` (raised past
/// `deg f` when needed).
pub fn check_function_agreement(
    rc: &Circuit,
    f: &NcPoly,
    samples: &[Vec<NcPoly>],
) -> Result<AgreementReport, RingError> {
    let compare = |index: usize, h: &[NcPoly]| -> Result<SampleOutcome, RingError> {
        let ring = h
            .first()
            .map_or(Alphabet::z_only(rc.alphabet().z), |p| p.alphabet());
        let images: BTreeMap<Var, NcPoly> = h
            .iter()
            .enumerate()
            .map(|(i, p)| (Var::X(i as u32), p.clone()))
            .collect();
        let got = evaluate_function(rc, h)?;
        let want = f.substitute(&images, ring)?;
        let agrees = got == want;
        Ok(SampleOutcome {
            index,
            agrees,
            circuit_value: (!agrees).then(|| got.to_string()),
            expected: (!agrees).then(|| want.to_string()),
        })
    };
    let outcomes = samples
        .iter()
        .enumerate()
        .map(|(i, h)| compare(i, h))
        .collect::<Result<Vec<_>, _>>()?;

    let g = ring_circuit_polynomial(rc)?;
    let d = degree_value(&g).max(degree_value(f)) + 1;
    let n = rc.alphabet().x;
    let target = Alphabet::z_only(rc.alphabet().z.max(n));
    let powers: Vec<NcPoly> = power_images(rc.field(), n, d, target)?
        .into_values()
        .collect();
    let structured = compare(samples.len(), &powers)?;
    let substitution = verify_substitution(&g, f, d)?;
    let agrees = outcomes.iter().all(|o| o.agrees) && structured.agrees && substitution.passed;
    Ok(AgreementReport {
        samples: outcomes,
        structured,
        substitution,
        agrees,
    })
}

/// `count` random input tuples over `F<z_1..z_m>`: one to three terms per
/// entry, words of length at most 3, small integer coefficients.
pub fn random_samples<R: Rng>(
    rng: &mut R,
    field: Field,
    n: u32,
    m: u32,
    count: usize,
) -> Vec<Vec<NcPoly>> {
    let ring = Alphabet::z_only(m.max(1));
    (0..count)
        .map(|_| (0..n).map(|_| random_z_poly(rng, field, ring, 3)).collect())
        .collect()
}

/// [`random_samples`] from a ChaCha stream seeded with `seed`.
pub fn seeded_samples(seed: u64, field: Field, n: u32, m: u32, count: usize) -> Vec<Vec<NcPoly>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    random_samples(&mut rng, field, n, m, count)
}

fn random_z_poly<R: Rng>(rng: &mut R, field: Field, ring: Alphabet, max_len: usize) -> NcPoly {
    loop {
        let terms: Vec<(Word, _)> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let len = rng.gen_range(0..=max_len);
                let w: Vec<u32> = (0..len).map(|_| rng.gen_range(0..ring.z)).collect();
                (Word::from_z(&w), field.from_i64(rng.gen_range(-3..=3)))
            })
            .collect();
        let p = NcPoly::from_terms(field, ring, terms).expect("Z words in range");
        if !p.is_zero() {
            return p;
        }
    }
}

/// Turns an `F`-circuit into a ring circuit over `m ≥ 1` `Z` variables that
/// computes the same polynomial: `rounds` output noise terms `p·u - p·u`
/// (or `u·p - u·p`) and, for some scalar leaves `c`, a split into
/// `(c + p) + (-p)`, with random `p ∈ F<Z>`.
pub fn with_cancelling_noise<R: Rng>(c: &Circuit, m: u32, rounds: usize, rng: &mut R) -> Circuit {
    let field = c.field();
    let alphabet = Alphabet::new(c.alphabet().x, m.max(c.alphabet().z).max(1));
    let ring = Alphabet::z_only(alphabet.z);
    let noise = |rng: &mut R| {
        random_z_poly(rng, field, ring, 2)
            .with_alphabet(alphabet)
            .expect("Z-only noise")
    };
    let mut b = CircuitBuilder::new(field, alphabet);
    let mut map: Vec<NodeId> = Vec::with_capacity(c.len());
    for node in c.nodes() {
        let id = match node {
            Node::Const(p) => {
                let p = p.with_alphabet(alphabet).expect("alphabet grows");
                if rng.gen_bool(0.5) {
                    let q = noise(rng);
                    let shifted = b.constant(p.add(&q).expect("same alphabet"));
                    let minus = b.constant(q.neg());
                    b.sum(&[shifted, minus])
                } else {
                    b.constant(p)
                }
            }
            Node::Input(i) => b.input(*i),
            Node::Sum(args) => b.push(Node::Sum(
                args.iter()
                    .map(|a| SumArg {
                        node: map[a.node],
                        scalar: a.scalar.clone(),
                    })
                    .collect(),
            )),
            Node::Prod { left, right } => b.prod(map[*left], map[*right]),
        };
        map.push(id);
    }
    let mut out = map[c.output()];
    let interior = b.len();
    for _ in 0..rounds {
        let u = rng.gen_range(0..interior);
        let p = b.constant(noise(rng));
        let (t1, t2) = if rng.gen_bool(0.5) {
            (b.prod(p, u), b.prod(p, u))
        } else {
            (b.prod(u, p), b.prod(u, p))
        };
        out = b.linear(vec![(out, field.one()), (t1, field.one()), (t2, field.from_i64(-1))]);
    }
    b.finish_allow_dead(out).expect("noise keeps the circuit valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    fn q() -> Field {
        Field::Rational
    }

    fn zx(x: u32, z: u32, text: &str) -> NcPoly {
        NcPoly::parse_text(&format!("field: Q\n{text}\n"), Alphabet::new(x, z)).unwrap()
    }

    fn xs(x: u32, text: &str) -> NcPoly {
        zx(x, 0, text)
    }

    #[test]
    fn ring_polynomials_keep_order() {
        let a = Alphabet::new(2, 2);
        let mut b = CircuitBuilder::new(q(), a);
        let z1 = b.constant(zx(2, 2, "1 * z1"));
        let x1 = b.input(0);
        let p = b.prod(z1, x1);
        let c = b.finish(p).unwrap();
        let g = ring_circuit_polynomial(&c).unwrap();
        assert_eq!(g, zx(2, 2, "1 * z1.x1"));
        assert_ne!(g, zx(2, 2, "1 * x1.z1"));

        let mut b = CircuitBuilder::new(q(), a);
        let x1 = b.input(0);
        let x2 = b.input(1);
        let m = b.prod(x1, x2);
        let k = b.constant(zx(2, 2, "1 * z1.z2"));
        let s = b.sum(&[m, k]);
        let c = b.finish(s).unwrap();
        assert_eq!(ring_circuit_polynomial(&c).unwrap().to_string(), "1 * x1.x2 + 1 * z1.z2");
    }

    #[test]
    fn restriction_partitions() {
        let g = zx(2, 1, "1 * x1.x2 + 1 * z1.x1");
        assert_eq!(restrict_g0(&g), xs(2, "1 * x1.x2"));
        assert!(restrict_g0(&zx(1, 1, "1 * z1.x1 + 2 * z1")).is_zero());
        let back = restrict_g0(&g)
            .with_alphabet(g.alphabet())
            .unwrap()
            .add(&g_prime(&g))
            .unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn translation_drops_z_parts() {
        let a = Alphabet::new(2, 1);
        let mut b = CircuitBuilder::new(q(), a);
        let x1 = b.input(0);
        let x2 = b.input(1);
        let k = b.constant(zx(2, 1, "3 + 1 * z1"));
        let m = b.prod(x1, x2);
        let zx1 = b.prod(k, x1);
        let s = b.sum(&[m, zx1]);
        let c = b.finish(s).unwrap();
        let (t, report) = translate(&c).unwrap();
        assert_eq!(t.node(k), &Node::Const(xs(2, "3")));
        assert!(report.polynomial_matches);
        assert_eq!(report.size.before, report.size.after);
        assert_eq!(compute_polynomial(&t).unwrap(), xs(2, "1 * x1.x2 + 3 * x1"));
    }

    #[test]
    fn translation_without_z_is_identity() {
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(2));
        let x1 = b.input(0);
        let x2 = b.input(1);
        let m = b.prod(x1, x2);
        let c = b.finish(m).unwrap();
        let (t, _) = translate(&c).unwrap();
        assert_eq!(compute_polynomial(&t).unwrap(), compute_polynomial(&c).unwrap());
    }

    #[test]
    fn cancelling_z_terms_pass_substitution() {
        let g = zx(2, 1, "1 * x1.x2 + 1 * z1.x1 + -1 * z1.x1");
        let f = xs(2, "1 * x1.x2");
        let chk = verify_substitution(&g, &f, 3).unwrap();
        assert!(chk.passed && chk.consistent);
        assert_eq!(chk.decoded_equals_f, Some(true));
    }

    #[test]
    fn surviving_z_term_fails_substitution() {
        let g = zx(1, 1, "1 * x1 + 1 * z1");
        let f = xs(1, "1 * x1");
        let chk = verify_substitution(&g, &f, 2).unwrap();
        assert!(!chk.hypothesis_holds && !chk.g_prime_vanishes);
        assert!(chk.g0_equals_f && chk.consistent && !chk.passed);
    }

    #[test]
    fn substitution_without_z_and_small_exponent() {
        let f = xs(2, "1 * x2.x1 + 2 * x1");
        let g = f.with_alphabet(Alphabet::new(2, 1)).unwrap();
        assert!(verify_substitution(&g, &f, 3).unwrap().passed);
        assert!(matches!(
            verify_substitution(&g, &f, 2),
            Err(RingError::ExponentTooSmall { d: 2, .. })
        ));
    }

    #[test]
    fn function_agreement() {
        let a = Alphabet::new(2, 2);
        let ring = Alphabet::z_only(2);
        let mut b = CircuitBuilder::new(q(), a);
        let x1 = b.input(0);
        let x2 = b.input(1);
        let m = b.prod(x1, x2);
        let z = b.constant(zx(2, 2, "1 * z1"));
        let s = b.linear(vec![(m, q().one()), (z, q().one()), (z, q().from_i64(-1))]);
        let c = b.finish(s).unwrap();
        let v = |t: &str| NcPoly::parse_text(&format!("field: Q\n{t}\n"), ring).unwrap();
        let samples = vec![
            vec![v("1 * z1"), v("1 * z2")],
            vec![v("1 * z2"), v("1 * z1")],
            vec![v("1 * z1.z1"), v("1 * z2")],
        ];
        let report = check_function_agreement(&c, &xs(2, "1 * x1.x2"), &samples).unwrap();
        assert!(report.agrees);
        assert_eq!(report.samples.len(), 3);

        let wrong = check_function_agreement(&c, &xs(2, "1 * x2.x1"), &samples[..1]).unwrap();
        assert!(!wrong.samples[0].agrees && !wrong.agrees);

        let structured_only = check_function_agreement(&c, &xs(2, "1 * x1.x2"), &[]).unwrap();
        assert!(structured_only.agrees && structured_only.structured.agrees);
    }

    #[test]
    fn noise_preserves_the_polynomial() {
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(2));
        let x1 = b.input(0);
        let two = b.scalar_i64(2);
        let x2 = b.input(1);
        let p = b.prod(x1, x2);
        let s = b.linear(vec![(p, q().one()), (two, q().one())]);
        let c = b.finish(s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rc = with_cancelling_noise(&c, 2, 2, &mut rng);
            let g = ring_circuit_polynomial(&rc).unwrap();
            assert_eq!(restrict_g0(&g), compute_polynomial(&c).unwrap());
            let (t, _) = translate(&rc).unwrap();
            assert_eq!(compute_polynomial(&t).unwrap(), compute_polynomial(&c).unwrap());
        }
    }
}
