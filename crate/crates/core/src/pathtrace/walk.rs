use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use crate::circuit::{node_polynomials, Circuit, Node, NodeId};
use crate::nisan::RankCache;
use crate::normalize::check_properties;

use super::{Move, PathTrace, Side, StopReason, Threshold, TraceConfig, TraceError, TraceStep};

/// Walks backward from the output of a normalized circuit with
/// `a₀ = b₀ = d/2`. Ties are broken deterministically: smallest `k`, then
/// smallest admissible id; at products the smallest `j`, right child first.
pub fn trace_path(c: &Circuit, cfg: &TraceConfig) -> Result<PathTrace, TraceError> {
    let props = check_properties(c)?;
    if !props.all() {
        let failing: Vec<&str> = [
            ("P1", props.p1),
            ("P2", props.p2),
            ("P3", props.p3),
            ("P4", props.p4),
            ("P5", props.p5),
        ]
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| *name)
        .collect();
        return Err(TraceError::NotNormalized(format!(
            "{} fail; run normalize first",
            failing.join(", ")
        )));
    }
    if cfg.n != c.alphabet().x {
        return Err(TraceError::Config(format!(
            "n = {} but the circuit has {} input variables",
            cfg.n,
            c.alphabet().x
        )));
    }
    let polys = node_polynomials(c)?;
    let mut cache = RankCache::new(&polys);
    let (mut v, mut a, mut b) = (c.output(), cfg.d / 2, cfg.d / 2);
    let mut steps: Vec<TraceStep> = Vec::new();
    let stop = loop {
        let index = steps.len();
        let r = cache.rank(v, a, b)?;
        let node = c.node(v);
        let stop = if node.is_leaf() {
            Some(StopReason::Leaf)
        } else if a == 0 || b == 0 {
            Some(StopReason::EmptyCut)
        } else if r <= 1 {
            Some(StopReason::Rank)
        } else {
            None
        };
        if let Some(reason) = stop {
            steps.push(TraceStep {
                index,
                node: v,
                a,
                b,
                rank: r,
                step: None,
            });
            break reason;
        }
        let mv = match node {
            Node::Sum(args) => {
                let children: BTreeSet<NodeId> = args.iter().map(|e| e.node).collect();
                sum_move(c, cfg, &mut cache, index, &children, a, b, r)?
            }
            Node::Prod { left, right } => product_move(&mut cache, index, *left, *right, a, b, r)?,
            Node::Input(_) | Node::Const(_) => unreachable!("leaves stop the walk"),
        };
        steps.push(TraceStep {
            index,
            node: v,
            a,
            b,
            rank: r,
            step: Some(mv.clone()),
        });
        if let Move::Product { j, side, .. } = mv {
            match side {
                Side::RightKept => a -= j,
                Side::LeftKept => b -= j,
            }
        }
        v = mv.chosen();
    };

    let mut rule1_steps = Vec::new();
    let mut rule2_steps = Vec::new();
    let mut product_steps = Vec::new();
    let mut witness = BTreeSet::new();
    for s in &steps {
        match &s.step {
            Some(Move::SumRule1 { .. }) => rule1_steps.push(s.index),
            Some(Move::SumRule2 { band, .. }) => {
                rule2_steps.push(s.index);
                witness.extend(band.iter().copied());
            }
            Some(Move::Product { .. }) => product_steps.push(s.index),
            None => {}
        }
    }
    Ok(PathTrace {
        config: cfg.clone(),
        t: steps.len() - 1,
        steps,
        stop,
        rule1_steps,
        rule2_steps,
        product_steps,
        witness: witness.into_iter().collect(),
    })
}

#[allow(clippy::too_many_arguments)]
fn sum_move(
    c: &Circuit,
    cfg: &TraceConfig,
    cache: &mut RankCache<'_>,
    index: usize,
    children: &BTreeSet<NodeId>,
    a: usize,
    b: usize,
    r: usize,
) -> Result<Move, TraceError> {
    let threshold = Threshold {
        scaled_rank: (BigInt::from(cfg.c) * BigInt::from(r)).to_string(),
        sqrt_of: cfg.n,
    };
    let mut ranks = Vec::with_capacity(children.len());
    for &u in children {
        ranks.push((u, cache.rank(u, a, b)?));
    }
    if let Some(&(u, _)) = ranks.iter().find(|(_, ru)| cfg.meets_rule1(*ru, r)) {
        return Ok(Move::SumRule1 {
            threshold,
            chosen: u,
        });
    }
    let mut bands: BTreeMap<u32, Vec<(NodeId, usize)>> = BTreeMap::new();
    for &(u, ru) in &ranks {
        if ru > 0 {
            bands.entry(cfg.band(r, ru)).or_default().push((u, ru));
        }
    }
    let target = BigInt::from(r);
    let picked = bands.iter().find(|(k, members)| {
        let rk: usize = members.iter().map(|(_, ru)| ru).sum();
        BigInt::from(rk) << (**k as usize + 1) >= target
    });
    let Some((&k, members)) = picked else {
        return Err(TraceError::Defect {
            step: index,
            detail: format!("no band k with r_k >= 2^-(k+1)·{r} at sum gate"),
        });
    };
    let band: Vec<NodeId> = members.iter().map(|(u, _)| *u).collect();
    let chosen = band
        .iter()
        .copied()
        .find(|&u| {
            let below = c.descendants(u);
            band.iter().all(|w| !below.contains(w))
        })
        .expect("a finite DAG has a minimal element");
    Ok(Move::SumRule2 {
        threshold,
        k,
        band_rank: members.iter().map(|(_, ru)| ru).sum(),
        band,
        chosen,
    })
}

fn product_move(
    cache: &mut RankCache<'_>,
    index: usize,
    left: NodeId,
    right: NodeId,
    a: usize,
    b: usize,
    r: usize,
) -> Result<Move, TraceError> {
    let target = BigInt::from(r);
    let admissible = |rank: usize, j: usize| BigInt::from(rank) << (j + 1) >= target;
    for j in 1..=a.max(b.saturating_sub(1)) {
        if j <= a && admissible(cache.rank(right, a - j, b)?, j) {
            return Ok(Move::Product {
                j,
                side: Side::RightKept,
                chosen: right,
            });
        }
        if j < b && admissible(cache.rank(left, a, b - j)?, j) {
            return Ok(Move::Product {
                j,
                side: Side::LeftKept,
                chosen: left,
            });
        }
    }
    Err(TraceError::Defect {
        step: index,
        detail: format!("no admissible j at product gate with r = {r}"),
    })
}
