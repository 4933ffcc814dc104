use std::collections::BTreeMap;

use serde::Serialize;

use crate::freealgebra::NcPoly;

use super::{Circuit, Node, NodeId};

/// Product gates are non-scalar when both children have degree at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateClass {
    NonScalar,
    Scalar,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub nonscalar_products: usize,
    pub scalar_products: usize,
    pub sums: usize,
    pub inputs: usize,
    pub consts: usize,
    /// Sum and product gates.
    pub gates: usize,
    pub nodes: usize,
    /// Number of wires.
    pub size: usize,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub classes: BTreeMap<NodeId, GateClass>,
    pub counts: GateCounts,
}

/// Classifies every product gate using the node polynomials `polys`
/// (as returned by [`super::node_polynomials`]).
pub fn classify_gates(c: &Circuit, polys: &[NcPoly]) -> Classification {
    let mut classes = BTreeMap::new();
    let mut counts = GateCounts {
        nodes: c.len(),
        size: c.size(),
        depth: c.depth(),
        ..GateCounts::default()
    };
    for (id, node) in c.nodes().iter().enumerate() {
        match node {
            Node::Input(_) => counts.inputs += 1,
            Node::Const(_) => counts.consts += 1,
            Node::Sum(_) => counts.sums += 1,
            Node::Prod { left, right } => {
                let class = if polys[*left].degree().at_least(1) && polys[*right].degree().at_least(1)
                {
                    counts.nonscalar_products += 1;
                    GateClass::NonScalar
                } else {
                    counts.scalar_products += 1;
                    GateClass::Scalar
                };
                classes.insert(id, class);
            }
        }
    }
    counts.gates = counts.sums + counts.nonscalar_products + counts.scalar_products;
    Classification { classes, counts }
}
