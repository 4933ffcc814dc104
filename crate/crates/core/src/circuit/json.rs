//! JSON circuit documents.
//!
//! ```json
//! {"field": "Q" | {"GF": p}, "x_vars": n, "z_vars": m,
//!  "nodes": [{"id": 0, "kind": "input", "var": 0},
//!            {"id": 1, "kind": "const", "poly": [[coeff, [z indices]], ...]},
//!            {"id": 2, "kind": "sum", "args": [{"node": 0, "scalar": coeff}, ...]},
//!            {"id": 3, "kind": "prod", "left": 0, "right": 2}],
//!  "output": 3}
//! ```
//!
//! Coefficients are JSON integers or strings `"a/b"`. Variable indices are
//! zero-based. Ids in a document may be arbitrary distinct integers; parsing
//! renumbers them densely in a topological order that keeps the document
//! order wherever possible. Serialization always emits dense ids.

use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::cmp::Reverse;

use serde::Serialize;
use serde_json::Value;

use crate::freealgebra::{Alphabet, Field, FieldElem, NcPoly, Word};

use super::{Circuit, CircuitError, Node, SumArg};

#[derive(Serialize)]
enum FieldDoc {
    Q,
    GF(u64),
}

#[derive(Serialize)]
#[serde(untagged)]
enum CoeffDoc {
    Int(i64),
    Str(String),
}

impl From<&FieldElem> for CoeffDoc {
    fn from(c: &FieldElem) -> Self {
        match c.to_i64() {
            Some(v) => CoeffDoc::Int(v),
            None => CoeffDoc::Str(c.to_string()),
        }
    }
}

#[derive(Serialize)]
struct ArgDoc {
    node: usize,
    scalar: CoeffDoc,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum KindDoc {
    Input { var: u32 },
    Const { poly: Vec<(CoeffDoc, Vec<u32>)> },
    Sum { args: Vec<ArgDoc> },
    Prod { left: usize, right: usize },
}

#[derive(Serialize)]
struct NodeDoc {
    id: usize,
    #[serde(flatten)]
    kind: KindDoc,
}

/// Serializable mirror of a [`Circuit`].
#[derive(Serialize)]
pub struct CircuitDoc {
    field: FieldDoc,
    x_vars: u32,
    z_vars: u32,
    nodes: Vec<NodeDoc>,
    output: usize,
}

impl From<&Circuit> for CircuitDoc {
    fn from(c: &Circuit) -> Self {
        let nodes = c
            .nodes()
            .iter()
            .enumerate()
            .map(|(id, n)| NodeDoc {
                id,
                kind: match n {
                    Node::Input(v) => KindDoc::Input { var: *v },
                    Node::Const(p) => KindDoc::Const {
                        poly: p
                            .terms()
                            .map(|(w, coef)| {
                                (
                                    CoeffDoc::from(coef),
                                    w.letters().iter().map(|v| v.index()).collect(),
                                )
                            })
                            .collect(),
                    },
                    Node::Sum(args) => KindDoc::Sum {
                        args: args
                            .iter()
                            .map(|a| ArgDoc {
                                node: a.node,
                                scalar: CoeffDoc::from(&a.scalar),
                            })
                            .collect(),
                    },
                    Node::Prod { left, right } => KindDoc::Prod {
                        left: *left,
                        right: *right,
                    },
                },
            })
            .collect();
        CircuitDoc {
            field: match c.field() {
                Field::Rational => FieldDoc::Q,
                Field::Prime(p) => FieldDoc::GF(p),
            },
            x_vars: c.alphabet().x,
            z_vars: c.alphabet().z,
            nodes,
            output: c.output(),
        }
    }
}

/// Pretty-printed JSON document, newline-terminated. Byte-stable.
pub fn to_json(c: &Circuit) -> String {
    let mut s = serde_json::to_string_pretty(&CircuitDoc::from(c)).expect("circuit serializes");
    s.push('\n');
    s
}

fn malformed(msg: impl Into<String>) -> CircuitError {
    CircuitError::Malformed(msg.into())
}

fn get_int(obj: &Value, key: &str, ctx: &str) -> Result<i64, CircuitError> {
    obj.get(key)
        .and_then(Value::as_i64)
        .ok_or_else(|| malformed(format!("{ctx}: missing or non-integer `{key}`")))
}

fn parse_field(v: &Value) -> Result<Field, CircuitError> {
    match v {
        Value::String(s) if s == "Q" => Ok(Field::Rational),
        Value::Object(m) if m.len() == 1 && m.contains_key("GF") => {
            let p = m["GF"]
                .as_u64()
                .ok_or_else(|| malformed("`GF` modulus must be a positive integer"))?;
            Ok(Field::prime(p)?)
        }
        other => Err(malformed(format!("unknown field {other}"))),
    }
}

fn parse_coeff(v: &Value, field: Field, node: i64) -> Result<FieldElem, CircuitError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(malformed(format!("node {node}: bad coefficient {other}"))),
    };
    field.parse_elem(&text).map_err(|e| CircuitError::FieldMismatch {
        node,
        detail: e.to_string(),
    })
}

enum RawKind {
    Input(u32),
    Const(NcPoly),
    Sum(Vec<(i64, FieldElem)>),
    Prod(i64, i64),
}

impl RawKind {
    fn children(&self) -> Vec<i64> {
        match self {
            RawKind::Input(_) | RawKind::Const(_) => Vec::new(),
            RawKind::Sum(args) => args.iter().map(|a| a.0).collect(),
            RawKind::Prod(l, r) => vec![*l, *r],
        }
    }
}

fn parse_node(v: &Value, field: Field, alphabet: Alphabet) -> Result<(i64, RawKind), CircuitError> {
    let id = get_int(v, "id", "node")?;
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed(format!("node {id}: missing `kind`")))?;
    let raw = match kind {
        "input" => {
            let var = get_int(v, "var", &format!("node {id}"))?;
            if var < 0 || var >= alphabet.x as i64 {
                return Err(CircuitError::InputOutOfRange { node: id, var });
            }
            RawKind::Input(var as u32)
        }
        "const" => {
            let terms = v
                .get("poly")
                .and_then(Value::as_array)
                .ok_or_else(|| malformed(format!("node {id}: missing `poly`")))?;
            let mut parsed = Vec::with_capacity(terms.len());
            for t in terms {
                let pair = t
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| malformed(format!("node {id}: poly term must be [coeff, [vars]]")))?;
                let coeff = parse_coeff(&pair[0], field, id)?;
                let vars = pair[1]
                    .as_array()
                    .ok_or_else(|| malformed(format!("node {id}: poly word must be an array")))?
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .filter(|&i| i < alphabet.z as u64)
                            .map(|i| i as u32)
                            .ok_or_else(|| malformed(format!("node {id}: bad z-variable index {x}")))
                    })
                    .collect::<Result<Vec<u32>, _>>()?;
                parsed.push((Word::from_z(&vars), coeff));
            }
            RawKind::Const(NcPoly::from_terms(field, alphabet, parsed)?)
        }
        "sum" => {
            let args = v
                .get("args")
                .and_then(Value::as_array)
                .ok_or_else(|| malformed(format!("node {id}: missing `args`")))?;
            if args.is_empty() {
                return Err(CircuitError::EmptySum { node: id });
            }
            let mut out = Vec::with_capacity(args.len());
            for a in args {
                let child = get_int(a, "node", &format!("node {id} argument"))?;
                let scalar = match a.get("scalar") {
                    Some(s) => parse_coeff(s, field, id)?,
                    None => field.one(),
                };
                out.push((child, scalar));
            }
            RawKind::Sum(out)
        }
        "prod" => {
            if let Some(args) = v.get("args").and_then(Value::as_array) {
                return Err(CircuitError::ProductArity {
                    node: id,
                    found: args.len(),
                });
            }
            let l = v.get("left").and_then(Value::as_i64);
            let r = v.get("right").and_then(Value::as_i64);
            match (l, r) {
                (Some(l), Some(r)) => RawKind::Prod(l, r),
                (l, r) => {
                    return Err(CircuitError::ProductArity {
                        node: id,
                        found: l.is_some() as usize + r.is_some() as usize,
                    })
                }
            }
        }
        other => return Err(malformed(format!("node {id}: unknown kind `{other}`"))),
    };
    Ok((id, raw))
}

/// Parses and validates a circuit document.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let field = parse_field(doc.get("field").ok_or_else(|| malformed("missing `field`"))?)?;
    let x_vars = get_int(&doc, "x_vars", "document")?;
    let z_vars = match doc.get("z_vars") {
        None => 0,
        Some(_) => get_int(&doc, "z_vars", "document")?,
    };
    let to_u32 = |v: i64, k: &str| u32::try_from(v).map_err(|_| malformed(format!("bad `{k}`")));
    let alphabet = Alphabet::new(to_u32(x_vars, "x_vars")?, to_u32(z_vars, "z_vars")?);
    let nodes = doc
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing `nodes` array"))?;
    let output = get_int(&doc, "output", "document")?;

    let mut raw = Vec::with_capacity(nodes.len());
    let mut position: HashMap<i64, usize> = HashMap::new();
    for v in nodes {
        let (id, kind) = parse_node(v, field, alphabet)?;
        if position.insert(id, raw.len()).is_some() {
            return Err(CircuitError::DuplicateId(id));
        }
        raw.push((id, kind));
    }
    for (id, kind) in &raw {
        for ch in kind.children() {
            if !position.contains_key(&ch) {
                return Err(CircuitError::DanglingReference {
                    node: *id,
                    missing: ch,
                });
            }
        }
    }
    let out_pos = *position.get(&output).ok_or(CircuitError::MissingOutput(output))?;

    // Kahn's algorithm, always taking the earliest ready node in document order.
    let n = raw.len();
    let mut pending = vec![0usize; n];
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (pos, (_, kind)) in raw.iter().enumerate() {
        for ch in kind.children() {
            pending[pos] += 1;
            parents[position[&ch]].push(pos);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&p| pending[p] == 0).map(Reverse).collect();
    let mut dense = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(p)) = ready.pop() {
        dense[p] = order.len();
        order.push(p);
        for &q in &parents[p] {
            pending[q] -= 1;
            if pending[q] == 0 {
                ready.push(Reverse(q));
            }
        }
    }
    if order.len() < n {
        // Every unplaced node has an unplaced child; walk until a repeat.
        let mut seen = BTreeMap::new();
        let mut cur = (0..n).find(|&p| dense[p] == usize::MAX).expect("unplaced node");
        while seen.insert(cur, ()).is_none() {
            cur = raw[cur]
                .1
                .children()
                .into_iter()
                .map(|ch| position[&ch])
                .find(|&q| dense[q] == usize::MAX)
                .expect("unplaced nodes have unplaced children");
        }
        return Err(CircuitError::Cycle { node: raw[cur].0 });
    }

    let map = |ch: i64| dense[position[&ch]];
    let mut built = Vec::with_capacity(n);
    for &p in &order {
        let (_, kind) = &raw[p];
        built.push(match kind {
            RawKind::Input(v) => Node::Input(*v),
            RawKind::Const(poly) => Node::Const(poly.clone()),
            RawKind::Sum(args) => Node::Sum(
                args.iter()
                    .map(|(ch, s)| SumArg {
                        node: map(*ch),
                        scalar: s.clone(),
                    })
                    .collect(),
            ),
            RawKind::Prod(l, r) => Node::Prod {
                left: map(*l),
                right: map(*r),
            },
        });
    }
    let circuit = Circuit::new_allow_dead(field, alphabet, built, dense[out_pos])?;
    let sinks = circuit.sinks();
    if sinks != [dense[out_pos]] {
        return Err(CircuitError::MultipleSinks {
            output,
            sinks: sinks.into_iter().map(|s| raw[order[s]].0).collect(),
        });
    }
    Ok(circuit)
}
