mod common;

use std::collections::BTreeMap;

use common::gen;
use ncclab::freealgebra::{Alphabet, Degree, Field, NcPoly, Var};
use proptest::prelude::*;

fn triple() -> impl Strategy<Value = (NcPoly, NcPoly, NcPoly)> {
    gen::field().prop_flat_map(|f| (gen::poly(f, 3, 3, 5), gen::poly(f, 3, 3, 5), gen::poly(f, 3, 3, 5)))
}

proptest! {
    #[test]
    fn ring_axioms((a, b, c) in triple()) {
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);

        let left = a.mul(&b.add(&c).unwrap()).unwrap();
        prop_assert_eq!(left, a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
        let right = a.add(&b).unwrap().mul(&c).unwrap();
        prop_assert_eq!(right, a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap());

        prop_assert!(a.add(&a.neg()).unwrap().is_zero());
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        let one = NcPoly::constant(a.field(), a.alphabet(), a.field().one()).unwrap();
        prop_assert_eq!(a.mul(&one).unwrap(), a.clone());
        prop_assert_eq!(one.mul(&a).unwrap(), a);
    }

    #[test]
    fn degree_is_additive((a, b, _) in triple()) {
        let expected = match (a.degree(), b.degree()) {
            (Degree::Finite(x), Degree::Finite(y)) => Degree::Finite(x + y),
            _ => Degree::NegInfinity,
        };
        prop_assert_eq!(a.mul(&b).unwrap().degree(), expected);
    }

    #[test]
    fn homogeneous_parts_sum_back((a, _, _) in triple()) {
        let top = a.degree().finite().unwrap_or(0);
        let mut acc = NcPoly::zero(a.field(), a.alphabet());
        for r in 0..=top {
            let h = a.homogeneous_part(r);
            prop_assert!(h.terms().all(|(w, _)| w.len() == r));
            acc = acc.add(&h).unwrap();
        }
        prop_assert_eq!(acc, a.clone());
        prop_assert_eq!(a.positive_part().add(&a.homogeneous_part(0)).unwrap(), a);
    }

    #[test]
    fn substitution_is_a_homomorphism(
        (a, b, _) in triple(),
        imgs in prop::collection::vec(prop::collection::vec((prop::collection::vec(0u32..2, 0..=2), -2i64..=2), 1..=2), 3),
    ) {
        let field = a.field();
        let target = Alphabet::z_only(2);
        let images: BTreeMap<Var, NcPoly> = imgs
            .into_iter()
            .enumerate()
            .map(|(i, terms)| {
                let p = NcPoly::from_terms(
                    field,
                    target,
                    terms.into_iter().map(|(w, c)| (ncclab::freealgebra::Word::from_z(&w), field.from_i64(c))),
                )
                .unwrap();
                (Var::X(i as u32), p)
            })
            .collect();
        let s = |p: &NcPoly| p.substitute(&images, target).unwrap();
        prop_assert_eq!(s(&a.mul(&b).unwrap()), s(&a).mul(&s(&b)).unwrap());
        prop_assert_eq!(s(&a.add(&b).unwrap()), s(&a).add(&s(&b)).unwrap());
    }

    #[test]
    fn text_round_trip((a, _, _) in triple()) {
        let back = NcPoly::parse_text(&a.to_text(), a.alphabet()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn reduction_mod_p_is_a_homomorphism(
        a in gen::poly(Field::Rational, 2, 3, 4),
        b in gen::poly(Field::Rational, 2, 3, 4),
    ) {
        let gf = Field::prime(101).unwrap();
        let r = |p: &NcPoly| p.convert(gf).unwrap();
        prop_assert_eq!(r(&a.mul(&b).unwrap()), r(&a).mul(&r(&b)).unwrap());
        prop_assert_eq!(r(&a.add(&b).unwrap()), r(&a).add(&r(&b)).unwrap());
    }
}

#[test]
fn mixing_fields_is_an_error() {
    let a = NcPoly::zero(Field::Rational, Alphabet::x_only(1));
    let b = NcPoly::zero(Field::prime(2).unwrap(), Alphabet::x_only(1));
    assert!(a.add(&b).is_err());
    assert!(a.mul(&b).is_err());
}
