use std::collections::BTreeMap;

use ncclab::circuit::{
    classify_gates, compute_polynomial, evaluate_function, node_polynomials, parse_circuit, to_json, Node,
};
use ncclab::corpus::{generate_circuit, generate_ring_circuit, CorpusLimits};
use ncclab::freealgebra::{Alphabet, NcPoly, Var};
use ncclab::normalize::{check_properties, normalize};
use ncclab::ringtrans::{restrict_g0, ring_circuit_polynomial, translate};
use proptest::prelude::*;

fn small() -> CorpusLimits {
    CorpusLimits {
        max_n: 3,
        max_degree: 5,
        max_nodes: 24,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn children_precede_parents(seed in any::<u64>(), index in 0usize..64) {
        let c = generate_circuit(seed, index, small()).unwrap();
        for (id, node) in c.nodes().iter().enumerate() {
            prop_assert!(node.children().iter().all(|&ch| ch < id));
        }
        prop_assert!(c.output() < c.len());
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>(), index in 0usize..64) {
        let c = generate_ring_circuit(seed, index, small()).unwrap();
        let text = to_json(&c);
        let back = parse_circuit(&text).unwrap();
        prop_assert_eq!(to_json(&back), text);
    }

    #[test]
    fn evaluating_at_renamed_variables_matches_substitution(seed in any::<u64>(), index in 0usize..64) {
        let c = generate_circuit(seed, index, small()).unwrap();
        let f = compute_polynomial(&c).unwrap();
        let ring = Alphabet::z_only(c.alphabet().x);
        let images: BTreeMap<Var, NcPoly> = (0..c.alphabet().x)
            .map(|i| (Var::X(i), NcPoly::var(c.field(), ring, Var::Z(i)).unwrap()))
            .collect();
        let inputs: Vec<NcPoly> = images.values().cloned().collect();
        prop_assert_eq!(evaluate_function(&c, &inputs).unwrap(), f.substitute(&images, ring).unwrap());
    }

    #[test]
    fn normalization_preserves_the_positive_part(seed in any::<u64>(), index in 0usize..64) {
        let c = generate_circuit(seed, index, small()).unwrap();
        let (out, _) = normalize(&c).unwrap();
        prop_assert_eq!(
            compute_polynomial(&out).unwrap(),
            compute_polynomial(&c).unwrap().positive_part()
        );
        prop_assert!(check_properties(&out).unwrap().all());
        let before = classify_gates(&c, &node_polynomials(&c).unwrap()).counts;
        let after = classify_gates(&out, &node_polynomials(&out).unwrap()).counts;
        prop_assert!(after.nonscalar_products <= before.nonscalar_products);
        prop_assert_eq!(after.scalar_products, 0);
        prop_assert!(out.nodes().iter().all(|n| !matches!(n, Node::Const(_))));
    }

    #[test]
    fn translation_keeps_shape_and_constant_terms(seed in any::<u64>(), index in 0usize..64) {
        let rc = generate_ring_circuit(seed, index, small()).unwrap();
        let (fc, report) = translate(&rc).unwrap();
        prop_assert!(fc.is_field_circuit());
        prop_assert_eq!(report.size.before, report.size.after);
        prop_assert_eq!(report.depth.before, report.depth.after);
        prop_assert_eq!(
            compute_polynomial(&fc).unwrap(),
            restrict_g0(&ring_circuit_polynomial(&rc).unwrap())
        );
    }
}
