//! Rewrites a field circuit computing `f` into one computing `f^{>0}` that
//! satisfies five structural properties:
//!
//! * P1: no scalar-product gates; scalars live only on sum-gate edges,
//! * P2: every node computes a nonzero polynomial without constant term,
//! * P3: every edge out of a leaf enters a sum gate,
//! * P4: the output is a sum gate,
//! * P5: sum and product gates alternate along every edge,
//!
//! without increasing the number of non-scalar product gates.
//!
//! The pipeline is a fixed sequence of passes: degree splitting (step 1),
//! output selection (2), constant replacement (3.1), dead-node removal (3.2),
//! scalar-product folding (3.3), constant-leaf removal (3.4), alternation (4),
//! and a final dead-node removal.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::circuit::{
    classify_gates, node_polynomials, Circuit, CircuitBuilder, CircuitError, GateClass,
    GateCounts, Node, NodeId, SumArg,
};
use crate::freealgebra::{FieldElem, NcPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("precondition violated: the circuit computes a constant (f^{{>0}} = 0)")]
    ZeroPositivePart,
    #[error("normalization needs a field circuit; node {0} is a ring constant")]
    NotFieldCircuit(NodeId),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("invariant violation during normalization: {0}")]
    Defect(String),
}

/// The pipeline step that created (or last rewrote) a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Step {
    Split,
    SetOutput,
    ReplaceConstants,
    RemoveDead,
    FoldScalars,
    RemoveConstLeaves,
    Alternate,
}

impl Step {
    pub fn label(self) -> &'static str {
        match self {
            Step::Split => "1",
            Step::SetOutput => "2",
            Step::ReplaceConstants => "3.1",
            Step::RemoveDead => "3.2",
            Step::FoldScalars => "3.3",
            Step::RemoveConstLeaves => "3.4",
            Step::Alternate => "4",
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Step {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// Where a node of the normalized circuit came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub node: NodeId,
    /// Node of the input circuit this one derives from.
    pub source: Option<NodeId>,
    pub step: Step,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PropertyFlags {
    pub p1: bool,
    pub p2: bool,
    pub p3: bool,
    pub p4: bool,
    pub p5: bool,
}

impl PropertyFlags {
    pub fn all(&self) -> bool {
        self.p1 && self.p2 && self.p3 && self.p4 && self.p5
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalizationReport {
    pub before: GateCounts,
    pub after: GateCounts,
    pub properties: PropertyFlags,
    /// The output circuit computes exactly the positive part of the input.
    pub semantics_preserved: bool,
    /// Node count after each pass, in pipeline order.
    pub pass_sizes: Vec<(String, usize)>,
    pub provenance: Vec<Provenance>,
}

#[derive(Clone, Copy, Debug)]
struct Origin {
    source: Option<NodeId>,
    step: Step,
}

type Pass = fn(Stage) -> Result<Stage, NormalizeError>;

#[derive(Clone, Debug)]
struct Stage {
    circuit: Circuit,
    origins: Vec<Origin>,
}

/// Result of degree splitting: the split circuit plus, for every node `v`
/// of the input, the ids of `v^0` and `v^{>0}`.
#[derive(Clone, Debug)]
pub struct DegreeSplit {
    pub circuit: Circuit,
    pub zero_part: Vec<NodeId>,
    pub positive_part: Vec<NodeId>,
    origins: Vec<Origin>,
}

/// Evaluates P1..P5 independently on any circuit.
pub fn check_properties(c: &Circuit) -> Result<PropertyFlags, CircuitError> {
    let polys = node_polynomials(c)?;
    let classes = classify_gates(c, &polys).classes;
    let nodes = c.nodes();
    let p1 = classes.values().all(|k| *k == GateClass::NonScalar);
    let p2 = polys
        .iter()
        .all(|p| !p.is_zero() && p.constant_term().is_zero());
    let mut p3 = true;
    let mut p5 = true;
    for node in nodes {
        for ch in node.children() {
            let child = &nodes[ch];
            if child.is_leaf() && !node.is_sum() {
                p3 = false;
            }
            if (child.is_prod() && node.is_prod()) || (child.is_sum() && node.is_sum()) {
                p5 = false;
            }
        }
    }
    let p4 = nodes[c.output()].is_sum();
    Ok(PropertyFlags { p1, p2, p3, p4, p5 })
}

/// Step 1: splits every node into its degree-zero and positive-degree parts.
///
/// Non-scalar products get the three-product gadget
/// `v^{>0} = v1^0·v2^{>0} + v1^{>0}·v2^0 + v1^{>0}·v2^{>0}`, so exactly one
/// non-scalar product appears per original one. The returned circuit's
/// output is `out^{>0}`; the zero parts may be dead.
pub fn split_degree_parts(c: &Circuit) -> Result<DegreeSplit, NormalizeError> {
    if let Some(id) = c.nodes().iter().position(|n| matches!(n, Node::Const(p) if p.degree().at_least(1))) {
        return Err(NormalizeError::NotFieldCircuit(id));
    }
    let polys = node_polynomials(c)?;
    let field = c.field();
    let mut b = CircuitBuilder::new(field, c.alphabet());
    let mut origins = Vec::new();
    let mut zero = Vec::with_capacity(c.len());
    let mut pos = Vec::with_capacity(c.len());
    let push = |b: &mut CircuitBuilder, node: Node, origins: &mut Vec<Origin>, v: NodeId| {
        origins.push(Origin {
            source: Some(v),
            step: Step::Split,
        });
        b.push(node)
    };
    let alphabet = c.alphabet();
    let constant = |v: FieldElem| Node::Const(NcPoly::constant(field, alphabet, v).expect("scalar"));

    for (v, node) in c.nodes().iter().enumerate() {
        let (z, p) = match node {
            Node::Input(x) => {
                let z = push(&mut b, constant(field.zero()), &mut origins, v);
                let p = push(&mut b, Node::Input(*x), &mut origins, v);
                (z, p)
            }
            Node::Const(k) => {
                let z = push(&mut b, Node::Const(k.clone()), &mut origins, v);
                let p = push(&mut b, constant(field.zero()), &mut origins, v);
                (z, p)
            }
            Node::Sum(args) => {
                let remap = |ids: &[NodeId]| -> Node {
                    Node::Sum(
                        args.iter()
                            .map(|a| SumArg {
                                node: ids[a.node],
                                scalar: a.scalar.clone(),
                            })
                            .collect(),
                    )
                };
                let z = push(&mut b, remap(&zero), &mut origins, v);
                let p = push(&mut b, remap(&pos), &mut origins, v);
                (z, p)
            }
            Node::Prod { left, right } => {
                let (l, r) = (*left, *right);
                let z = push(
                    &mut b,
                    Node::Prod {
                        left: zero[l],
                        right: zero[r],
                    },
                    &mut origins,
                    v,
                );
                let nonscalar = polys[l].degree().at_least(1) && polys[r].degree().at_least(1);
                let p = if nonscalar {
                    let p1 = push(
                        &mut b,
                        Node::Prod {
                            left: zero[l],
                            right: pos[r],
                        },
                        &mut origins,
                        v,
                    );
                    let p2 = push(
                        &mut b,
                        Node::Prod {
                            left: pos[l],
                            right: zero[r],
                        },
                        &mut origins,
                        v,
                    );
                    let p3 = push(
                        &mut b,
                        Node::Prod {
                            left: pos[l],
                            right: pos[r],
                        },
                        &mut origins,
                        v,
                    );
                    let one = field.one();
                    let sum = Node::Sum(
                        [p1, p2, p3]
                            .into_iter()
                            .map(|node| SumArg {
                                node,
                                scalar: one.clone(),
                            })
                            .collect(),
                    );
                    push(&mut b, sum, &mut origins, v)
                } else if polys[l].positive_part().is_zero() {
                    push(
                        &mut b,
                        Node::Prod {
                            left: zero[l],
                            right: pos[r],
                        },
                        &mut origins,
                        v,
                    )
                } else {
                    push(
                        &mut b,
                        Node::Prod {
                            left: pos[l],
                            right: zero[r],
                        },
                        &mut origins,
                        v,
                    )
                };
                (z, p)
            }
        };
        zero.push(z);
        pos.push(p);
    }
    let circuit = b.finish_allow_dead(pos[c.output()])?;
    Ok(DegreeSplit {
        circuit,
        zero_part: zero,
        positive_part: pos,
        origins,
    })
}

/// Runs the full pipeline. Fails when the input computes a constant.
pub fn normalize(c: &Circuit) -> Result<(Circuit, NormalizationReport), NormalizeError> {
    let polys = node_polynomials(c)?;
    let before = classify_gates(c, &polys).counts;
    let target = polys[c.output()].positive_part();
    if target.is_zero() {
        return Err(NormalizeError::ZeroPositivePart);
    }

    let mut pass_sizes = Vec::new();
    let split = split_degree_parts(c)?;
    let mut stage = Stage {
        circuit: split.circuit,
        origins: split.origins,
    };
    pass_sizes.push((Step::Split.label().to_string(), stage.circuit.len()));

    let passes: [(Step, Pass); 7] = [
        (Step::SetOutput, set_output),
        (Step::ReplaceConstants, replace_constants),
        (Step::RemoveDead, remove_dead),
        (Step::FoldScalars, fold_scalar_products),
        (Step::RemoveConstLeaves, remove_const_leaves),
        (Step::Alternate, alternate),
        (Step::RemoveDead, remove_dead),
    ];
    for (step, pass) in passes {
        stage = pass(stage)?;
        pass_sizes.push((step.label().to_string(), stage.circuit.len()));
    }

    let out = stage.circuit;
    let out_polys = node_polynomials(&out)?;
    let after = classify_gates(&out, &out_polys).counts;
    let properties = check_properties(&out)?;
    let semantics_preserved = out_polys[out.output()] == target;
    if !semantics_preserved {
        return Err(NormalizeError::Defect(
            "normalized circuit does not compute the positive part".into(),
        ));
    }
    if !properties.all() {
        return Err(NormalizeError::Defect(format!(
            "normalized circuit violates properties: {properties:?}"
        )));
    }
    if after.nonscalar_products > before.nonscalar_products {
        return Err(NormalizeError::Defect(format!(
            "non-scalar product gates grew from {} to {}",
            before.nonscalar_products, after.nonscalar_products
        )));
    }
    let provenance = stage
        .origins
        .iter()
        .enumerate()
        .map(|(node, o)| Provenance {
            node,
            source: o.source,
            step: o.step,
        })
        .collect();
    let report = NormalizationReport {
        before,
        after,
        properties,
        semantics_preserved,
        pass_sizes,
        provenance,
    };
    Ok((out, report))
}

/// Step 2: the positive part of the old output becomes the output, wrapped
/// in a unary sum gate when it is not already a sum.
fn set_output(stage: Stage) -> Result<Stage, NormalizeError> {
    let c = stage.circuit;
    if c.node(c.output()).is_sum() {
        return Ok(Stage {
            circuit: c,
            origins: stage.origins,
        });
    }
    let mut nodes = c.nodes().to_vec();
    let mut origins = stage.origins;
    let out = c.output();
    nodes.push(Node::Sum(vec![SumArg {
        node: out,
        scalar: c.field().one(),
    }]));
    origins.push(Origin {
        source: origins[out].source,
        step: Step::SetOutput,
    });
    let output = nodes.len() - 1;
    let circuit = Circuit::new_allow_dead(c.field(), c.alphabet(), nodes, output)?;
    Ok(Stage { circuit, origins })
}

/// Step 3.1: every node whose positive part vanishes becomes a constant leaf.
fn replace_constants(stage: Stage) -> Result<Stage, NormalizeError> {
    let c = stage.circuit;
    let polys = node_polynomials(&c)?;
    let mut origins = stage.origins;
    let mut nodes = Vec::with_capacity(c.len());
    for (id, node) in c.nodes().iter().enumerate() {
        if !matches!(node, Node::Const(_)) && !polys[id].degree().at_least(1) {
            let k = NcPoly::constant(c.field(), c.alphabet(), polys[id].constant_term())
                .expect("scalar in circuit field");
            nodes.push(Node::Const(k));
            origins[id].step = Step::ReplaceConstants;
        } else {
            nodes.push(node.clone());
        }
    }
    let circuit = Circuit::new_allow_dead(c.field(), c.alphabet(), nodes, c.output())?;
    Ok(Stage { circuit, origins })
}

/// Step 3.2: drops every node without a path to the output.
fn remove_dead(stage: Stage) -> Result<Stage, NormalizeError> {
    let (circuit, map) = stage.circuit.prune();
    let mut origins = vec![None; circuit.len()];
    for (old, new) in map.iter().enumerate() {
        if let Some(new) = new {
            origins[*new] = Some(stage.origins[old]);
        }
    }
    Ok(Stage {
        circuit,
        origins: origins.into_iter().map(|o| o.expect("every kept node has an origin")).collect(),
    })
}

fn const_value(node: &Node) -> Option<FieldElem> {
    match node {
        Node::Const(p) => Some(p.constant_term()),
        _ => None,
    }
}

/// Step 3.3: removes scalar-product gates `u·c` / `c·u`, wiring `u` to the
/// gate's parents with `c` folded into the edge label. Labels that would
/// land on product-gate inputs are pushed onto that product's out-edges, in
/// one bottom-up pass.
fn fold_scalar_products(stage: Stage) -> Result<Stage, NormalizeError> {
    let c = stage.circuit;
    let field = c.field();
    let n = c.len();
    let mut new_id: Vec<Option<NodeId>> = vec![None; n];
    let mut folded: Vec<Option<(NodeId, FieldElem)>> = vec![None; n];
    // Factor multiplying every out-edge of a kept product gate.
    let mut pending: Vec<FieldElem> = vec![field.one(); n];
    let mut nodes = Vec::new();
    let mut origins = Vec::new();

    for (v, node) in c.nodes().iter().enumerate() {
        let resolve = |ch: NodeId| -> (NodeId, FieldElem) {
            match &folded[ch] {
                Some((u, k)) => (*u, k.clone()),
                None => (ch, pending[ch].clone()),
            }
        };
        let kept = match node {
            Node::Input(_) | Node::Const(_) => node.clone(),
            Node::Sum(args) => Node::Sum(
                args.iter()
                    .map(|a| {
                        let (u, k) = resolve(a.node);
                        SumArg {
                            node: new_id[u].expect("resolved children are kept"),
                            scalar: &a.scalar * &k,
                        }
                    })
                    .collect(),
            ),
            Node::Prod { left, right } => {
                let (l, kl) = resolve(*left);
                let (r, kr) = resolve(*right);
                let factor = &kl * &kr;
                match (const_value(c.node(l)), const_value(c.node(r))) {
                    (Some(_), Some(_)) => {
                        return Err(NormalizeError::Defect(format!(
                            "product {v} of two constants survived constant replacement"
                        )))
                    }
                    (Some(k), None) => {
                        folded[v] = Some((r, &k * &factor));
                        continue;
                    }
                    (None, Some(k)) => {
                        folded[v] = Some((l, &k * &factor));
                        continue;
                    }
                    (None, None) => {
                        pending[v] = factor;
                        Node::Prod {
                            left: new_id[l].expect("kept"),
                            right: new_id[r].expect("kept"),
                        }
                    }
                }
            }
        };
        new_id[v] = Some(nodes.len());
        nodes.push(kept);
        let mut o = stage.origins[v];
        if node.is_sum() && node.children().iter().any(|&ch| folded[ch].is_some()) {
            o.step = Step::FoldScalars;
        }
        origins.push(o);
    }
    let output = new_id[c.output()]
        .ok_or_else(|| NormalizeError::Defect("output was folded away".into()))?;
    if !c.node(c.output()).is_sum() {
        return Err(NormalizeError::Defect("output is not a sum gate".into()));
    }
    let circuit = Circuit::new_allow_dead(field, c.alphabet(), nodes, output)?;
    Ok(Stage { circuit, origins })
}

/// Step 3.4: removes every constant leaf and its edges (all of which now
/// enter sum gates). Zero-labeled edges are dropped as well.
fn remove_const_leaves(stage: Stage) -> Result<Stage, NormalizeError> {
    let c = stage.circuit;
    let mut new_id: Vec<Option<NodeId>> = vec![None; c.len()];
    let mut nodes = Vec::new();
    let mut origins = Vec::new();
    for (v, node) in c.nodes().iter().enumerate() {
        let kept = match node {
            Node::Const(_) => continue,
            Node::Input(_) => node.clone(),
            Node::Sum(args) => {
                let args: Vec<SumArg> = args
                    .iter()
                    .filter(|a| !matches!(c.node(a.node), Node::Const(_)) && !a.scalar.is_zero())
                    .map(|a| SumArg {
                        node: new_id[a.node].expect("non-constant children are kept"),
                        scalar: a.scalar.clone(),
                    })
                    .collect();
                if args.is_empty() {
                    return Err(NormalizeError::Defect(format!(
                        "sum gate {v} lost all of its children"
                    )));
                }
                Node::Sum(args)
            }
            Node::Prod { left, right } => {
                let map = |ch: NodeId| {
                    new_id[ch].ok_or_else(|| {
                        NormalizeError::Defect(format!("product {v} still reads a constant leaf"))
                    })
                };
                Node::Prod {
                    left: map(*left)?,
                    right: map(*right)?,
                }
            }
        };
        new_id[v] = Some(nodes.len());
        nodes.push(kept);
        let mut o = stage.origins[v];
        if node.children().iter().any(|&ch| matches!(c.node(ch), Node::Const(_))) {
            o.step = Step::RemoveConstLeaves;
        }
        origins.push(o);
    }
    let output = new_id[c.output()].ok_or_else(|| NormalizeError::Defect("output removed".into()))?;
    let circuit = Circuit::new_allow_dead(c.field(), c.alphabet(), nodes, output)?;
    Ok(Stage { circuit, origins })
}

/// Step 4: unary sum gates between leaves/products and product parents;
/// sum-into-sum edges contracted by multiplying labels.
fn alternate(stage: Stage) -> Result<Stage, NormalizeError> {
    let c = stage.circuit;
    let field = c.field();
    let mut new_id: Vec<NodeId> = vec![usize::MAX; c.len()];
    let mut nodes: Vec<Node> = Vec::new();
    let mut origins: Vec<Origin> = Vec::new();
    for (v, node) in c.nodes().iter().enumerate() {
        let mut o = stage.origins[v];
        let kept = match node {
            Node::Input(_) | Node::Const(_) => node.clone(),
            Node::Prod { left, right } => {
                let wrap = |ch: NodeId, nodes: &mut Vec<Node>, origins: &mut Vec<Origin>| {
                    if c.node(ch).is_sum() {
                        return new_id[ch];
                    }
                    nodes.push(Node::Sum(vec![SumArg {
                        node: new_id[ch],
                        scalar: field.one(),
                    }]));
                    origins.push(Origin {
                        source: stage.origins[v].source,
                        step: Step::Alternate,
                    });
                    nodes.len() - 1
                };
                let l = wrap(*left, &mut nodes, &mut origins);
                let r = wrap(*right, &mut nodes, &mut origins);
                if c.node(*left).is_leaf()
                    || c.node(*left).is_prod()
                    || c.node(*right).is_leaf()
                    || c.node(*right).is_prod()
                {
                    o.step = Step::Alternate;
                }
                Node::Prod { left: l, right: r }
            }
            Node::Sum(args) => {
                let mut flat = Vec::with_capacity(args.len());
                for a in args {
                    match &nodes[new_id[a.node]] {
                        Node::Sum(inner) if c.node(a.node).is_sum() => {
                            o.step = Step::Alternate;
                            flat.extend(inner.iter().map(|b| SumArg {
                                node: b.node,
                                scalar: &b.scalar * &a.scalar,
                            }));
                        }
                        _ => flat.push(SumArg {
                            node: new_id[a.node],
                            scalar: a.scalar.clone(),
                        }),
                    }
                }
                Node::Sum(flat)
            }
        };
        new_id[v] = nodes.len();
        nodes.push(kept);
        origins.push(o);
    }
    let circuit = Circuit::new_allow_dead(field, c.alphabet(), nodes, new_id[c.output()])?;
    Ok(Stage { circuit, origins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{compute_polynomial, CircuitBuilder};
    use crate::freealgebra::{Alphabet, Field};

    fn q() -> Field {
        Field::Rational
    }

    #[test]
    fn split_of_leaf() {
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(1));
        let x = b.input(0);
        let c = b.finish(x).unwrap();
        let s = split_degree_parts(&c).unwrap();
        let polys = node_polynomials(&s.circuit).unwrap();
        assert!(polys[s.zero_part[x]].is_zero());
        assert!(matches!(s.circuit.node(s.zero_part[x]), Node::Const(_)));
        assert_eq!(polys[s.positive_part[x]].to_string(), "1 * x1");
    }

    #[test]
    fn split_of_product_of_affine_factors() {
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(2));
        let one = b.scalar_i64(1);
        let x1 = b.input(0);
        let x2 = b.input(1);
        let a = b.sum(&[one, x1]);
        let bb = b.sum(&[one, x2]);
        let p = b.prod(a, bb);
        let c = b.finish(p).unwrap();
        let s = split_degree_parts(&c).unwrap();
        let polys = node_polynomials(&s.circuit).unwrap();
        assert_eq!(polys[s.zero_part[p]].to_string(), "1");
        assert_eq!(
            polys[s.positive_part[p]].to_string(),
            "1 * x1 + 1 * x1.x2 + 1 * x2"
        );
        let orig = node_polynomials(&c).unwrap();
        for v in 0..c.len() {
            let sum = polys[s.zero_part[v]].add(&polys[s.positive_part[v]]).unwrap();
            assert_eq!(sum, orig[v]);
        }
        let counts = classify_gates(&s.circuit, &polys).counts;
        assert_eq!(counts.nonscalar_products, 1);
    }

    #[test]
    fn split_of_constant_sum() {
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(1));
        let two = b.scalar_i64(2);
        let three = b.scalar_i64(3);
        let s = b.sum(&[two, three]);
        let c = b.finish(s).unwrap();
        let sp = split_degree_parts(&c).unwrap();
        let polys = node_polynomials(&sp.circuit).unwrap();
        assert_eq!(polys[sp.zero_part[s]].to_string(), "5");
        assert!(polys[sp.positive_part[s]].is_zero());
    }

    #[test]
    fn drops_constant_term() {
        // 3 + x1·x2
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(2));
        let three = b.scalar_i64(3);
        let x1 = b.input(0);
        let x2 = b.input(1);
        let p = b.prod(x1, x2);
        let s = b.sum(&[three, p]);
        let c = b.finish(s).unwrap();
        let (n, report) = normalize(&c).unwrap();
        assert_eq!(compute_polynomial(&n).unwrap().to_string(), "1 * x1.x2");
        assert!(report.properties.all());
        assert!(report.semantics_preserved);
        assert_eq!(report.after.nonscalar_products, 1);
    }

    #[test]
    fn scalar_product_becomes_edge_label() {
        // 5·x1 through prod(const 5, x1)
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(1));
        let five = b.scalar_i64(5);
        let x1 = b.input(0);
        let p = b.prod(five, x1);
        let c = b.finish(p).unwrap();
        let (n, report) = normalize(&c).unwrap();
        assert_eq!(n.product_count(), 0);
        assert_eq!(n.len(), 2);
        match n.node(n.output()) {
            Node::Sum(args) => {
                assert_eq!(args.len(), 1);
                assert_eq!(args[0].scalar, q().from_i64(5));
                assert_eq!(*n.node(args[0].node), Node::Input(0));
            }
            other => panic!("expected sum output, got {other:?}"),
        }
        assert!(report.properties.all());
    }

    #[test]
    fn constant_circuit_is_rejected() {
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(1));
        let seven = b.scalar_i64(7);
        let c = b.finish(seven).unwrap();
        assert_eq!(normalize(&c).unwrap_err(), NormalizeError::ZeroPositivePart);
    }

    #[test]
    fn labels_on_product_inputs_move_to_outputs() {
        // (2·x1)·(3·x2) + x1, scalars pushed through the product.
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(2));
        let two = b.scalar_i64(2);
        let three = b.scalar_i64(3);
        let x1 = b.input(0);
        let x2 = b.input(1);
        let a = b.prod(two, x1);
        let bb = b.prod(x2, three);
        let p = b.prod(a, bb);
        let pp = b.prod(p, p);
        let s = b.sum(&[pp, x1]);
        let c = b.finish(s).unwrap();
        let (n, report) = normalize(&c).unwrap();
        assert!(report.properties.all());
        assert_eq!(
            compute_polynomial(&n).unwrap(),
            compute_polynomial(&c).unwrap().positive_part()
        );
        assert_eq!(report.after.nonscalar_products, 2);
    }

    #[test]
    fn raw_circuits_fail_properties() {
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(1));
        let k = b.scalar_i64(3);
        let x = b.input(0);
        let p = b.prod(k, x);
        let c = b.finish(p).unwrap();
        let flags = check_properties(&c).unwrap();
        assert!(!flags.p1);
        assert!(!flags.p4);

        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(1));
        let x = b.input(0);
        let p = b.prod(x, x);
        let s = b.sum(&[p]);
        let c = b.finish(s).unwrap();
        let flags = check_properties(&c).unwrap();
        assert!(flags.p1 && flags.p2 && flags.p4 && flags.p5);
        assert!(!flags.p3);
    }

    #[test]
    fn normalizing_twice_keeps_properties() {
        let mut b = CircuitBuilder::new(q(), Alphabet::x_only(2));
        let one = b.scalar_i64(1);
        let x1 = b.input(0);
        let x2 = b.input(1);
        let a = b.sum(&[one, x1]);
        let p = b.prod(a, x2);
        let pp = b.prod(p, a);
        let c = b.finish(pp).unwrap();
        let (n1, _) = normalize(&c).unwrap();
        let (n2, r2) = normalize(&n1).unwrap();
        assert!(r2.properties.all());
        assert_eq!(compute_polynomial(&n2).unwrap(), compute_polynomial(&n1).unwrap());
        assert!(r2.after.nonscalar_products <= r2.before.nonscalar_products);
    }

    #[test]
    fn ring_constants_are_refused() {
        let alph = Alphabet::new(1, 1);
        let mut b = CircuitBuilder::new(q(), alph);
        let z = NcPoly::var(q(), alph, crate::freealgebra::Var::Z(0)).unwrap();
        let k = b.constant(z);
        let x = b.input(0);
        let p = b.prod(k, x);
        let c = b.finish(p).unwrap();
        assert!(matches!(normalize(&c), Err(NormalizeError::NotFieldCircuit(_))));
    }
}
