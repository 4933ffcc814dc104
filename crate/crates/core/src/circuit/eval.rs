use crate::freealgebra::{Alphabet, NcPoly, Var, DEFAULT_WORD_LEN_GUARD};

use super::{Circuit, CircuitError, Node};

/// `f_v` for every node, with the default word-length guard.
pub fn node_polynomials(c: &Circuit) -> Result<Vec<NcPoly>, CircuitError> {
    node_polynomials_guarded(c, DEFAULT_WORD_LEN_GUARD)
}

/// Bottom-up evaluation in `F<Z, X>`; one polynomial per node id.
pub fn node_polynomials_guarded(c: &Circuit, max_len: usize) -> Result<Vec<NcPoly>, CircuitError> {
    let (field, alphabet) = (c.field(), c.alphabet());
    let mut polys: Vec<NcPoly> = Vec::with_capacity(c.len());
    for node in c.nodes() {
        let p = match node {
            Node::Input(v) => NcPoly::var(field, alphabet, Var::X(*v))?,
            Node::Const(p) => p.clone(),
            Node::Sum(args) => {
                let mut acc = NcPoly::zero(field, alphabet);
                for a in args {
                    acc = acc.add(&polys[a.node].scale(&a.scalar)?)?;
                }
                acc
            }
            Node::Prod { left, right } => polys[*left].mul_guarded(&polys[*right], max_len)?,
        };
        polys.push(p);
    }
    Ok(polys)
}

/// The polynomial computed at the output node.
pub fn compute_polynomial(c: &Circuit) -> Result<NcPoly, CircuitError> {
    Ok(node_polynomials(c)?.swap_remove(c.output()))
}

/// Evaluates the circuit as a function `R^n -> R` for `R = F<Z>`: input
/// leaf `x_i` takes `inputs[i]`, constant leaves their ring element.
///
/// All inputs must share one `Z`-only alphabet containing the circuit's `Z`.
pub fn evaluate_function(c: &Circuit, inputs: &[NcPoly]) -> Result<NcPoly, CircuitError> {
    let n = c.alphabet().x as usize;
    if inputs.len() != n {
        return Err(CircuitError::MissingInput {
            expected: n,
            got: inputs.len(),
        });
    }
    let field = c.field();
    let ring = match inputs.first() {
        Some(h) => h.alphabet(),
        None => Alphabet::z_only(c.alphabet().z),
    };
    if ring.x != 0 || ring.z < c.alphabet().z {
        return Err(CircuitError::Malformed(format!(
            "inputs must live in F<Z> with at least {} Z variables, got {ring}",
            c.alphabet().z
        )));
    }
    for h in inputs {
        if h.alphabet() != ring || h.field() != field {
            return Err(CircuitError::Malformed(
                "inputs must share one field and alphabet".into(),
            ));
        }
    }
    let mut vals: Vec<NcPoly> = Vec::with_capacity(c.len());
    for node in c.nodes() {
        let v = match node {
            Node::Input(i) => inputs[*i as usize].clone(),
            Node::Const(p) => p.with_alphabet(ring)?,
            Node::Sum(args) => {
                let mut acc = NcPoly::zero(field, ring);
                for a in args {
                    acc = acc.add(&vals[a.node].scale(&a.scalar)?)?;
                }
                acc
            }
            Node::Prod { left, right } => vals[*left].mul(&vals[*right])?,
        };
        vals.push(v);
    }
    Ok(vals.swap_remove(c.output()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;
    use crate::freealgebra::{Field, Word};

    #[test]
    fn product_order_matters() {
        let q = Field::Rational;
        for (l, r, want) in [(0, 1, "1 * x1.x2"), (1, 0, "1 * x2.x1")] {
            let mut b = CircuitBuilder::new(q, Alphabet::x_only(2));
            let x1 = b.input(0);
            let x2 = b.input(1);
            let ids = [x1, x2];
            let p = b.prod(ids[l], ids[r]);
            let c = b.finish(p).unwrap();
            assert_eq!(compute_polynomial(&c).unwrap().to_string(), want);
        }
    }

    #[test]
    fn labeled_sum() {
        let q = Field::Rational;
        let mut b = CircuitBuilder::new(q, Alphabet::x_only(1));
        let x = b.input(0);
        let s = b.linear(vec![(x, q.from_i64(2)), (x, q.from_i64(3))]);
        let c = b.finish(s).unwrap();
        assert_eq!(compute_polynomial(&c).unwrap().to_string(), "5 * x1");
    }

    #[test]
    fn step_one_gadget_expands() {
        // v^{>0} of (1 + x1)(2 + x2), built from the three-product gadget.
        let q = Field::Rational;
        let mut b = CircuitBuilder::new(q, Alphabet::x_only(2));
        let one = b.scalar_i64(1);
        let x1 = b.input(0);
        let two = b.scalar_i64(2);
        let x2 = b.input(1);
        let p1 = b.prod(one, x2);
        let p2 = b.prod(x1, two);
        let p3 = b.prod(x1, x2);
        let s = b.sum(&[p1, p2, p3]);
        let c = b.finish(s).unwrap();
        assert_eq!(
            compute_polynomial(&c).unwrap().to_string(),
            "2 * x1 + 1 * x1.x2 + 1 * x2"
        );
    }

    #[test]
    fn function_semantics() {
        let q = Field::Rational;
        let z = Alphabet::z_only(2);
        let zv = |i| NcPoly::var(q, z, Var::Z(i)).unwrap();

        let mut b = CircuitBuilder::new(q, Alphabet::new(2, 2));
        let x1 = b.input(0);
        let x2 = b.input(1);
        let p = b.prod(x1, x2);
        let r = b.prod(x2, x1);
        let s = b.linear(vec![(p, q.one()), (r, q.from_i64(-1))]);
        let c = b.finish(s).unwrap();
        assert!(evaluate_function(&c, &[zv(0), zv(0)]).unwrap().is_zero());
        let v = evaluate_function(&c, &[zv(0), zv(1)]).unwrap();
        assert_eq!(v.coeff(&Word::from_z(&[0, 1])), q.one());
        assert!(matches!(
            evaluate_function(&c, &[zv(0)]),
            Err(CircuitError::MissingInput { .. })
        ));
    }
}
