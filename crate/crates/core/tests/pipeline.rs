use ncclab::circuit::{classify_gates, compute_polynomial, node_polynomials, parse_circuit, to_json, CircuitBuilder};
use ncclab::corpus::{generate, generate_circuit, generate_ring_circuit, CorpusLimits};
use ncclab::freealgebra::{Alphabet, NcPoly};
use ncclab::normalize::normalize;
use ncclab::pathtrace::{trace_path, verify_trace, TraceConfig};
use ncclab::ringtrans::{check_function_agreement, random_samples, ring_circuit_polynomial, translate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn normalize_is_idempotent_on_the_corpus() {
    for (i, c) in generate(5, 60, CorpusLimits::default()).unwrap().iter().enumerate() {
        let (once, report) = normalize(c).unwrap();
        assert!(report.semantics_preserved && report.properties.all(), "#{i}");
        let (twice, _) = normalize(&once).unwrap();
        assert_eq!(
            compute_polynomial(&twice).unwrap(),
            compute_polynomial(&once).unwrap(),
            "#{i}"
        );
        let n1 = classify_gates(&once, &node_polynomials(&once).unwrap()).counts;
        let n2 = classify_gates(&twice, &node_polynomials(&twice).unwrap()).counts;
        assert_eq!(n1.nonscalar_products, n2.nonscalar_products, "#{i}");
    }
}

#[test]
fn corpus_circuits_round_trip_through_json() {
    for c in generate(2, 30, CorpusLimits::default()).unwrap() {
        let text = to_json(&c);
        let back = parse_circuit(&text).unwrap();
        assert_eq!(to_json(&back), text);
        assert_eq!(compute_polynomial(&back).unwrap(), compute_polynomial(&c).unwrap());
    }
}

#[test]
fn traces_are_reproducible() {
    for i in 0..40 {
        let c = generate_circuit(4, i, CorpusLimits::default()).unwrap();
        let (c, _) = normalize(&c).unwrap();
        let cfg = TraceConfig::new(2, c.alphabet().x).unwrap();
        let a = trace_path(&c, &cfg).unwrap();
        let b = trace_path(&c, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(verify_trace(&a, &c, &cfg).unwrap().passed);
    }
}

#[test]
fn substitution_check_never_passes_against_a_random_counterexample() {
    let limits = CorpusLimits {
        max_n: 3,
        max_degree: 4,
        max_nodes: 16,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut certified = 0;
    for i in 0..1000 {
        let field_circuit = generate_circuit(13, i, limits).unwrap();
        let mut rc = generate_ring_circuit(13, i, limits).unwrap();
        let f = compute_polynomial(&field_circuit).unwrap();
        if i % 4 == 3 {
            // A surviving Z term: the circuit no longer computes f.
            rc = add_z_constant(&rc);
        }
        let samples = random_samples(&mut rng, rc.field(), rc.alphabet().x, rc.alphabet().z, 2);
        let report = check_function_agreement(&rc, &f, &samples).unwrap();
        if report.substitution.passed && report.structured.agrees {
            certified += 1;
            assert!(report.samples.iter().all(|s| s.agrees), "#{i}: certified but a sample disagrees");
            assert_eq!(translated_polynomial(&rc), f, "#{i}");
        }
        if i % 4 == 3 {
            assert!(!report.agrees, "#{i}: surviving Z term went unnoticed");
        }
    }
    assert!(certified >= 700, "only {certified} constructions certified");
}

fn translated_polynomial(rc: &ncclab::circuit::Circuit) -> NcPoly {
    compute_polynomial(&translate(rc).unwrap().0).unwrap()
}

fn add_z_constant(rc: &ncclab::circuit::Circuit) -> ncclab::circuit::Circuit {
    let mut b = CircuitBuilder::new(rc.field(), rc.alphabet());
    for node in rc.nodes() {
        b.push(node.clone());
    }
    let z = NcPoly::parse_text(&format!("field: {}\n1 * z1\n", rc.field()), Alphabet::z_only(rc.alphabet().z))
        .unwrap()
        .with_alphabet(rc.alphabet())
        .unwrap();
    let k = b.constant(z);
    let out = b.sum(&[rc.output(), k]);
    let c = b.finish_allow_dead(out).unwrap();
    assert_ne!(ring_circuit_polynomial(&c).unwrap(), ring_circuit_polynomial(rc).unwrap());
    c
}
