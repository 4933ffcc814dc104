use std::collections::HashMap;

use serde::Serialize;

use crate::circuit::{Circuit, Node, NodeId};
use crate::freealgebra::NcPoly;

use super::{build_matrix, rank, NisanError, NisanMatrix};

/// Memoized `rank(M_v^{a,b})` over the node polynomials of one circuit.
pub struct RankCache<'a> {
    polys: &'a [NcPoly],
    ranks: HashMap<(NodeId, usize, usize), usize>,
}

impl<'a> RankCache<'a> {
    pub fn new(polys: &'a [NcPoly]) -> Self {
        RankCache {
            polys,
            ranks: HashMap::new(),
        }
    }

    pub fn polys(&self) -> &'a [NcPoly] {
        self.polys
    }

    pub fn matrix(&self, v: NodeId, a: usize, b: usize) -> Result<NisanMatrix, NisanError> {
        let p = self.polys.get(v).ok_or(NisanError::NoSuchNode(v))?;
        build_matrix(p, a, b)
    }

    pub fn rank(&mut self, v: NodeId, a: usize, b: usize) -> Result<usize, NisanError> {
        if let Some(r) = self.ranks.get(&(v, a, b)) {
            return Ok(*r);
        }
        let r = rank(&self.matrix(v, a, b)?).rank;
        self.ranks.insert((v, a, b), r);
        Ok(r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeRank {
    pub child: NodeId,
    pub scalar: String,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SumCheck {
    pub node: NodeId,
    pub a: usize,
    pub b: usize,
    pub lhs: usize,
    pub rhs: usize,
    pub holds: bool,
    /// `M_v = Σ c_i · M_{v_i}` as an exact matrix equality.
    pub identity_holds: bool,
    pub edges: Vec<EdgeRank>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermRank {
    pub i: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductCheck {
    pub node: NodeId,
    pub a: usize,
    pub b: usize,
    pub lhs: usize,
    pub rhs: usize,
    pub holds: bool,
    /// The Kronecker decomposition of `M_v^{a,b}` as an exact matrix equality.
    pub identity_holds: bool,
    /// `rank(M_{right}^{a-i,b})` for `i = 1..=a`.
    pub right_terms: Vec<TermRank>,
    /// `rank(M_{left}^{a,b-i})` for `i = 1..b`.
    pub left_terms: Vec<TermRank>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GateCheck {
    Sum(SumCheck),
    Product(ProductCheck),
}

impl GateCheck {
    pub fn node(&self) -> NodeId {
        match self {
            GateCheck::Sum(s) => s.node,
            GateCheck::Product(p) => p.node,
        }
    }

    /// Inequality and matrix identity both hold.
    pub fn ok(&self) -> bool {
        match self {
            GateCheck::Sum(s) => s.holds && s.identity_holds,
            GateCheck::Product(p) => p.holds && p.identity_holds,
        }
    }
}

pub fn check_sum_inequality(
    c: &Circuit,
    cache: &mut RankCache<'_>,
    v: NodeId,
    a: usize,
    b: usize,
) -> Result<SumCheck, NisanError> {
    let Some(Node::Sum(args)) = c.nodes().get(v) else {
        return Err(NisanError::NotSumGate(v));
    };
    let mv = cache.matrix(v, a, b)?;
    let mut combo = NisanMatrix::zero(mv.field(), mv.alphabet_size(), a, b);
    let mut edges = Vec::with_capacity(args.len());
    for arg in args {
        combo = combo.add(&cache.matrix(arg.node, a, b)?.scale(&arg.scalar))?;
        edges.push(EdgeRank {
            child: arg.node,
            scalar: arg.scalar.to_string(),
            rank: cache.rank(arg.node, a, b)?,
        });
    }
    let lhs = cache.rank(v, a, b)?;
    let rhs = edges.iter().map(|e| e.rank).sum();
    Ok(SumCheck {
        node: v,
        a,
        b,
        lhs,
        rhs,
        holds: lhs <= rhs,
        identity_holds: combo == mv,
        edges,
    })
}

/// Needs both children to have zero constant term. The decomposition and
/// the bound are checked for every `a, b ≥ 0`.
pub fn check_product_inequality(
    c: &Circuit,
    cache: &mut RankCache<'_>,
    v: NodeId,
    a: usize,
    b: usize,
) -> Result<ProductCheck, NisanError> {
    let Some(Node::Prod { left, right }) = c.nodes().get(v) else {
        return Err(NisanError::NotProductGate(v));
    };
    let (left, right) = (*left, *right);
    for child in [left, right] {
        if !cache.polys()[child].constant_term().is_zero() {
            return Err(NisanError::NonzeroConstantTerm { node: v, child });
        }
    }
    let mv = cache.matrix(v, a, b)?;
    let mut decomposition = NisanMatrix::zero(mv.field(), mv.alphabet_size(), a, b);
    let mut right_terms = Vec::with_capacity(a);
    for i in 1..=a {
        let k = cache.matrix(left, i, 0)?.kronecker(&cache.matrix(right, a - i, b)?)?;
        decomposition = decomposition.add(&k)?;
        right_terms.push(TermRank {
            i,
            rank: cache.rank(right, a - i, b)?,
        });
    }
    let mut left_terms = Vec::new();
    for i in 1..b {
        let k = cache.matrix(left, a, b - i)?.kronecker(&cache.matrix(right, 0, i)?)?;
        decomposition = decomposition.add(&k)?;
        left_terms.push(TermRank {
            i,
            rank: cache.rank(left, a, b - i)?,
        });
    }
    let lhs = cache.rank(v, a, b)?;
    let rhs = right_terms.iter().chain(&left_terms).map(|t| t.rank).sum();
    Ok(ProductCheck {
        node: v,
        a,
        b,
        lhs,
        rhs,
        holds: lhs <= rhs,
        identity_holds: decomposition == mv,
        right_terms,
        left_terms,
    })
}

/// Runs the matching check at every sum and product gate, in id order.
pub fn check_all_gates(
    c: &Circuit,
    cache: &mut RankCache<'_>,
    a: usize,
    b: usize,
) -> Result<Vec<GateCheck>, NisanError> {
    let mut out = Vec::new();
    for (id, node) in c.nodes().iter().enumerate() {
        match node {
            Node::Sum(_) => out.push(GateCheck::Sum(check_sum_inequality(c, cache, id, a, b)?)),
            Node::Prod { .. } => out.push(GateCheck::Product(check_product_inequality(
                c, cache, id, a, b,
            )?)),
            Node::Input(_) | Node::Const(_) => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{node_polynomials, CircuitBuilder};
    use crate::freealgebra::{Alphabet, Field};

    fn run_sum(c: &Circuit, v: NodeId) -> SumCheck {
        let polys = node_polynomials(c).unwrap();
        check_sum_inequality(c, &mut RankCache::new(&polys), v, 1, 1).unwrap()
    }

    fn run_prod(c: &Circuit, v: NodeId) -> ProductCheck {
        let polys = node_polynomials(c).unwrap();
        check_product_inequality(c, &mut RankCache::new(&polys), v, 1, 1).unwrap()
    }

    #[test]
    fn doubled_edge() {
        let mut b = CircuitBuilder::new(Field::Rational, Alphabet::x_only(2));
        let x1 = b.input(0);
        let x2 = b.input(1);
        let u = b.prod(x1, x2);
        let s = b.sum(&[u, u]);
        let c = b.finish(s).unwrap();
        let r = run_sum(&c, s);
        assert_eq!((r.lhs, r.rhs), (1, 2));
        assert!(r.holds && r.identity_holds);
    }

    #[test]
    fn unary_and_disjoint_sums_are_tight() {
        let mut b = CircuitBuilder::new(Field::Rational, Alphabet::x_only(2));
        let x1 = b.input(0);
        let x2 = b.input(1);
        let u = b.prod(x1, x1);
        let w = b.prod(x2, x2);
        let unary = b.sum(&[u]);
        let s = b.sum(&[unary, w]);
        let c = b.finish(s).unwrap();
        let r = run_sum(&c, unary);
        assert_eq!((r.lhs, r.rhs), (1, 1));
        let r = run_sum(&c, s);
        assert_eq!((r.lhs, r.rhs), (2, 2));
    }

    #[test]
    fn product_of_two_inputs() {
        let mut b = CircuitBuilder::new(Field::Rational, Alphabet::x_only(2));
        let x1 = b.input(0);
        let x2 = b.input(1);
        let p = b.prod(x1, x2);
        let c = b.finish(p).unwrap();
        let r = run_prod(&c, p);
        assert_eq!((r.lhs, r.rhs), (1, 1));
        assert_eq!(r.right_terms, vec![TermRank { i: 1, rank: 1 }]);
        assert!(r.left_terms.is_empty());
        assert!(r.identity_holds);
    }

    #[test]
    fn product_with_sum_child() {
        let mut b = CircuitBuilder::new(Field::Rational, Alphabet::x_only(2));
        let x1 = b.input(0);
        let x2 = b.input(1);
        let s = b.sum(&[x1, x2]);
        let p = b.prod(s, x1);
        let c = b.finish(p).unwrap();
        let r = run_prod(&c, p);
        assert!(r.lhs <= 1 && r.holds && r.identity_holds);
    }

    #[test]
    fn degree_too_small_for_cut() {
        let mut b = CircuitBuilder::new(Field::Rational, Alphabet::x_only(2));
        let x1 = b.input(0);
        let x2 = b.input(1);
        let p = b.prod(x1, x2);
        let c = b.finish(p).unwrap();
        let polys = node_polynomials(&c).unwrap();
        let r = check_product_inequality(&c, &mut RankCache::new(&polys), p, 2, 2).unwrap();
        assert_eq!(r.lhs, 0);
        assert!(r.holds && r.identity_holds);
    }

    #[test]
    fn constant_term_is_refused() {
        let mut b = CircuitBuilder::new(Field::Rational, Alphabet::x_only(1));
        let x = b.input(0);
        let one = b.scalar_i64(1);
        let s = b.sum(&[x, one]);
        let p = b.prod(s, x);
        let c = b.finish(p).unwrap();
        let polys = node_polynomials(&c).unwrap();
        let err = check_product_inequality(&c, &mut RankCache::new(&polys), p, 1, 1).unwrap_err();
        assert_eq!(err, NisanError::NonzeroConstantTerm { node: p, child: s });
        assert!(matches!(
            check_sum_inequality(&c, &mut RankCache::new(&polys), p, 1, 1),
            Err(NisanError::NotSumGate(_))
        ));
    }
}
