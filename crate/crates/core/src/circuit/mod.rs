//! The circuit IR: a DAG of input leaves, constant leaves, scalar-labeled
//! sum gates and ordered binary product gates, with a single output.
//!
//! Node ids are dense and topologically ordered: every child id is smaller
//! than its parent's id, so ascending id order is a bottom-up traversal.

mod classify;
mod eval;
mod json;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::freealgebra::{AlgebraError, Alphabet, Field, FieldElem, NcPoly};

pub use classify::{classify_gates, Classification, GateClass, GateCounts};
pub use eval::{compute_polynomial, evaluate_function, node_polynomials, node_polynomials_guarded};
pub use json::{parse_circuit, to_json, CircuitDoc};

pub type NodeId = usize;

/// One incoming edge of a sum gate; the scalar multiplies the child's value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SumArg {
    pub node: NodeId,
    pub scalar: FieldElem,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    /// The input variable `x_{var+1}`.
    Input(u32),
    /// A constant: a field scalar, or for ring circuits an element of `F<Z>`.
    Const(NcPoly),
    Sum(Vec<SumArg>),
    Prod { left: NodeId, right: NodeId },
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Input(_) | Node::Const(_))
    }

    pub fn is_sum(&self) -> bool {
        matches!(self, Node::Sum(_))
    }

    pub fn is_prod(&self) -> bool {
        matches!(self, Node::Prod { .. })
    }

    /// Children in edge order, with multiplicity.
    pub fn children(&self) -> Vec<NodeId> {
        match self {
            Node::Input(_) | Node::Const(_) => Vec::new(),
            Node::Sum(args) => args.iter().map(|a| a.node).collect(),
            Node::Prod { left, right } => vec![*left, *right],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("cycle detected through node {node}")]
    Cycle { node: i64 },
    #[error("node {node} references missing node {missing}")]
    DanglingReference { node: i64, missing: i64 },
    #[error("product node {node} has {found} children, expected exactly 2")]
    ProductArity { node: i64, found: usize },
    #[error("sum node {node} has no children")]
    EmptySum { node: i64 },
    #[error("output {output} must be the only node of out-degree 0, found sinks {sinks:?}")]
    MultipleSinks { output: i64, sinks: Vec<i64> },
    #[error("duplicate node id {0}")]
    DuplicateId(i64),
    #[error("output node {0} does not exist")]
    MissingOutput(i64),
    #[error("node {node}: field mismatch: {detail}")]
    FieldMismatch { node: i64, detail: String },
    #[error("node {node}: input variable index {var} out of range")]
    InputOutOfRange { node: i64, var: i64 },
    #[error("node {node}: constant must only use Z variables")]
    ConstUsesX { node: i64 },
    #[error("node {node}: child {child} does not precede it")]
    NotTopological { node: NodeId, child: NodeId },
    #[error("missing input assignment: expected {expected} inputs, got {got}")]
    MissingInput { expected: usize, got: usize },
    #[error("malformed circuit document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A validated circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    field: Field,
    alphabet: Alphabet,
    nodes: Vec<Node>,
    output: NodeId,
}

impl Circuit {
    /// Validates and builds a circuit whose output is its only sink.
    pub fn new(
        field: Field,
        alphabet: Alphabet,
        nodes: Vec<Node>,
        output: NodeId,
    ) -> Result<Circuit, CircuitError> {
        let c = Circuit::new_allow_dead(field, alphabet, nodes, output)?;
        let sinks = c.sinks();
        if sinks != [output] {
            return Err(CircuitError::MultipleSinks {
                output: output as i64,
                sinks: sinks.into_iter().map(|s| s as i64).collect(),
            });
        }
        Ok(c)
    }

    /// Like [`Circuit::new`] but tolerates nodes that do not reach the output.
    pub fn new_allow_dead(
        field: Field,
        alphabet: Alphabet,
        nodes: Vec<Node>,
        output: NodeId,
    ) -> Result<Circuit, CircuitError> {
        if output >= nodes.len() {
            return Err(CircuitError::MissingOutput(output as i64));
        }
        for (id, node) in nodes.iter().enumerate() {
            let nid = id as i64;
            match node {
                Node::Input(v) => {
                    if *v >= alphabet.x {
                        return Err(CircuitError::InputOutOfRange {
                            node: nid,
                            var: *v as i64,
                        });
                    }
                }
                Node::Const(p) => {
                    if p.field() != field {
                        return Err(CircuitError::FieldMismatch {
                            node: nid,
                            detail: format!("constant over {} in a circuit over {field}", p.field()),
                        });
                    }
                    if p.alphabet() != alphabet {
                        return Err(CircuitError::Algebra(AlgebraError::AlphabetMismatch {
                            left: alphabet,
                            right: p.alphabet(),
                        }));
                    }
                    if p.terms().any(|(w, _)| w.has_x()) {
                        return Err(CircuitError::ConstUsesX { node: nid });
                    }
                }
                Node::Sum(args) => {
                    if args.is_empty() {
                        return Err(CircuitError::EmptySum { node: nid });
                    }
                    for a in args {
                        if a.scalar.field() != field {
                            return Err(CircuitError::FieldMismatch {
                                node: nid,
                                detail: format!("edge label over {}", a.scalar.field()),
                            });
                        }
                    }
                }
                Node::Prod { .. } => {}
            }
            for ch in node.children() {
                if ch >= id {
                    return Err(CircuitError::NotTopological { node: id, child: ch });
                }
            }
        }
        Ok(Circuit {
            field,
            alphabet,
            nodes,
            output,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn output(&self) -> NodeId {
        self.output
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when every constant leaf is a field scalar (no `Z` variables).
    pub fn is_field_circuit(&self) -> bool {
        self.nodes.iter().all(|n| match n {
            Node::Const(p) => p.degree().finite().unwrap_or(0) == 0,
            _ => true,
        })
    }

    /// Out-degree of every node, counting parallel edges.
    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for n in &self.nodes {
            for ch in n.children() {
                deg[ch] += 1;
            }
        }
        deg
    }

    /// Distinct parents of every node, ascending.
    pub fn parents(&self) -> Vec<Vec<NodeId>> {
        let mut ps: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate() {
            for ch in n.children() {
                ps[ch].insert(id);
            }
        }
        ps.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    pub fn sinks(&self) -> Vec<NodeId> {
        self.out_degrees()
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of wires.
    pub fn size(&self) -> usize {
        self.nodes.iter().map(|n| n.children().len()).sum()
    }

    /// Longest leaf-to-output path, counted in edges.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate() {
            depth[id] = n.children().iter().map(|&c| depth[c] + 1).max().unwrap_or(0);
        }
        depth[self.output]
    }

    pub fn sum_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_sum()).count()
    }

    pub fn product_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_prod()).count()
    }

    /// Strict descendants of `id` (the node itself excluded).
    pub fn descendants(&self, id: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack = self.nodes[id].children();
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(self.nodes[v].children());
            }
        }
        seen
    }

    /// Nodes with a directed path to the output (the output included).
    pub fn live_nodes(&self) -> BTreeSet<NodeId> {
        let mut live = self.descendants(self.output);
        live.insert(self.output);
        live
    }

    /// Removes every node without a path to the output. Returns the pruned
    /// circuit and the map from old ids to new ids.
    pub fn prune(&self) -> (Circuit, Vec<Option<NodeId>>) {
        let live = self.live_nodes();
        let mut map = vec![None; self.nodes.len()];
        let mut nodes = Vec::with_capacity(live.len());
        for &old in &live {
            map[old] = Some(nodes.len());
            let remap = |c: NodeId| map[c].expect("children of live nodes are live");
            nodes.push(match &self.nodes[old] {
                Node::Sum(args) => Node::Sum(
                    args.iter()
                        .map(|a| SumArg {
                            node: remap(a.node),
                            scalar: a.scalar.clone(),
                        })
                        .collect(),
                ),
                Node::Prod { left, right } => Node::Prod {
                    left: remap(*left),
                    right: remap(*right),
                },
                other => other.clone(),
            });
        }
        let output = map[self.output].expect("output is live");
        let pruned = Circuit::new(self.field, self.alphabet, nodes, output)
            .expect("pruning preserves validity");
        (pruned, map)
    }

    /// Same structure with a different payload for the constant leaves.
    pub(crate) fn map_consts(
        &self,
        field: Field,
        alphabet: Alphabet,
        f: impl Fn(&NcPoly) -> NcPoly,
    ) -> Result<Circuit, CircuitError> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Const(p) => Node::Const(f(p)),
                other => other.clone(),
            })
            .collect();
        Circuit::new_allow_dead(field, alphabet, nodes, self.output)
    }
}

/// Incremental construction of circuits in topological order.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    field: Field,
    alphabet: Alphabet,
    nodes: Vec<Node>,
}

impl CircuitBuilder {
    pub fn new(field: Field, alphabet: Alphabet) -> Self {
        CircuitBuilder {
            field,
            alphabet,
            nodes: Vec::new(),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn input(&mut self, var: u32) -> NodeId {
        self.push(Node::Input(var))
    }

    /// A scalar constant leaf.
    pub fn scalar(&mut self, c: FieldElem) -> NodeId {
        let p = NcPoly::constant(self.field, self.alphabet, c).expect("scalar in builder field");
        self.push(Node::Const(p))
    }

    pub fn scalar_i64(&mut self, c: i64) -> NodeId {
        self.scalar(self.field.from_i64(c))
    }

    pub fn constant(&mut self, p: NcPoly) -> NodeId {
        self.push(Node::Const(p))
    }

    /// Sum with all edge labels 1.
    pub fn sum(&mut self, children: &[NodeId]) -> NodeId {
        let one = self.field.one();
        self.push(Node::Sum(
            children
                .iter()
                .map(|&node| SumArg {
                    node,
                    scalar: one.clone(),
                })
                .collect(),
        ))
    }

    pub fn linear(&mut self, args: Vec<(NodeId, FieldElem)>) -> NodeId {
        self.push(Node::Sum(
            args.into_iter()
                .map(|(node, scalar)| SumArg { node, scalar })
                .collect(),
        ))
    }

    pub fn prod(&mut self, left: NodeId, right: NodeId) -> NodeId {
        self.push(Node::Prod { left, right })
    }

    /// Validates with the single-sink requirement.
    pub fn finish(self, output: NodeId) -> Result<Circuit, CircuitError> {
        Circuit::new(self.field, self.alphabet, self.nodes, output)
    }

    pub fn finish_allow_dead(self, output: NodeId) -> Result<Circuit, CircuitError> {
        Circuit::new_allow_dead(self.field, self.alphabet, self.nodes, output)
    }
}
