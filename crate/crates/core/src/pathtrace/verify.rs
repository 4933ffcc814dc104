use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::circuit::{classify_gates, node_polynomials, Circuit, GateClass, Node, NodeId};
use crate::nisan::RankCache;

use super::{ratio, Move, PathTrace, Side, StopReason, TraceConfig, TraceError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// The end-of-path accounting, meaningful when `r₀ = n^{d/2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosedForm {
    pub applicable: bool,
    pub note: String,
    pub k_sum: u64,
    pub d: usize,
    /// `n ≥ (αc)²`: only then does the chain force `Σk ≥ d`.
    pub large_n_regime: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_sum_at_least_d: Option<bool>,
    pub witness_size: usize,
    /// `|S| > (√n/2c)·Σ (2α)^{-k_i}`.
    pub witness_bound_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceVerification {
    pub passed: bool,
    pub checks: Vec<Check>,
    pub j_sum: usize,
    pub sum_steps: usize,
    pub rank_ratio: String,
    pub closed_form: ClosedForm,
}

impl TraceVerification {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

struct Ledger(Vec<Check>);

impl Ledger {
    fn record(&mut self, step: Option<usize>, name: &str, holds: bool, detail: String) {
        self.0.push(Check {
            step,
            name: name.to_string(),
            holds,
            detail: if holds { String::new() } else { detail },
        });
    }
}

/// Re-derives every quantity from the circuit (fresh ranks, fresh
/// classification) and checks the recorded trace against it.
pub fn verify_trace(
    tr: &PathTrace,
    c: &Circuit,
    cfg: &TraceConfig,
) -> Result<TraceVerification, TraceError> {
    let polys = node_polynomials(c)?;
    let classes = classify_gates(c, &polys).classes;
    let mut cache = RankCache::new(&polys);
    let mut log = Ledger(Vec::new());
    let steps = &tr.steps;
    let d = cfg.d;
    let n = BigInt::from(cfg.n);
    let (p, q) = (cfg.alpha.numer().clone(), cfg.alpha.denom().clone());
    let c2 = BigInt::from(cfg.c).pow(2u32);
    let sq = |v: usize| BigInt::from(v) * BigInt::from(v);

    let well_formed = !steps.is_empty()
        && tr.t + 1 == steps.len()
        && steps.iter().enumerate().all(|(i, s)| s.index == i && s.node < c.len())
        && steps[tr.t].step.is_none()
        && steps[..tr.t].iter().all(|s| s.step.is_some());
    log.record(None, "well-formed", well_formed, "step list is not a path".into());
    if !well_formed {
        return Ok(finish(log, tr, cfg, 0, 0, false));
    }
    log.record(
        Some(0),
        "start",
        steps[0].node == c.output() && steps[0].a == d / 2 && steps[0].b == d / 2,
        format!("expected output {} with a = b = {}", c.output(), d / 2),
    );

    for s in steps {
        let r = cache.rank(s.node, s.a, s.b)?;
        log.record(
            Some(s.index),
            "rank",
            r == s.rank,
            format!("recorded {} but rank is {r}", s.rank),
        );
    }

    for (i, s) in steps.iter().enumerate().take(tr.t) {
        let mv = s.step.as_ref().expect("checked above");
        let next = &steps[i + 1];
        let (r, r1) = (s.rank, next.rank);
        let node = c.node(s.node);
        log.record(
            Some(i),
            "continues",
            r > 1 && s.a > 0 && s.b > 0 && !node.is_leaf(),
            "walk should have stopped here".into(),
        );
        log.record(
            Some(i),
            "child",
            node.children().contains(&next.node) && mv.chosen() == next.node,
            format!("{} is not the chosen child of {}", next.node, s.node),
        );
        match mv {
            Move::SumRule1 { chosen, .. } => {
                log.record(Some(i), "sum-gate", node.is_sum(), "Rule-1 at a non-sum".into());
                log.record(Some(i), "lengths", next.a == s.a && next.b == s.b, "a, b changed".into());
                // I1: r' ≥ (c/√n)·r
                log.record(
                    Some(i),
                    "I1",
                    n.clone() * sq(r1) >= c2.clone() * sq(r),
                    format!("rank {r1} < (c/sqrt n)·{r}"),
                );
                let smaller_fires = sum_children(node)
                    .into_iter()
                    .filter(|u| u < chosen)
                    .map(|u| cache.rank(u, s.a, s.b))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .any(|ru| cfg.meets_rule1(ru, r));
                log.record(Some(i), "rule1-choice", !smaller_fires, "a smaller id qualifies".into());
            }
            Move::SumRule2 { k, band, chosen, .. } => {
                log.record(Some(i), "sum-gate", node.is_sum(), "Rule-2 at a non-sum".into());
                log.record(Some(i), "lengths", next.a == s.a && next.b == s.b, "a, b changed".into());
                let e = 2 * (*k + 1);
                // I2: r' ≥ α^{k+1}·(c/√n)·r
                log.record(
                    Some(i),
                    "I2",
                    q.pow(e) * n.clone() * sq(r1) >= p.pow(e) * c2.clone() * sq(r),
                    format!("rank {r1} < alpha^{}·(c/sqrt n)·{r}", k + 1),
                );
                let mut fires = false;
                let mut expected = Vec::new();
                for u in sum_children(node) {
                    let ru = cache.rank(u, s.a, s.b)?;
                    fires |= cfg.meets_rule1(ru, r);
                    if ru > 0 && cfg.band(r, ru) == *k {
                        expected.push((u, ru));
                    }
                }
                log.record(Some(i), "rule1-absent", !fires, "Rule-1 should have fired".into());
                let expected_ids: Vec<NodeId> = expected.iter().map(|(u, _)| *u).collect();
                log.record(
                    Some(i),
                    "band",
                    *band == expected_ids,
                    format!("S = {band:?} but N_(i,k) = {expected_ids:?}"),
                );
                let weight: usize = expected.iter().map(|(_, ru)| ru).sum();
                log.record(
                    Some(i),
                    "band-weight",
                    BigInt::from(weight) << (*k as usize + 1) >= BigInt::from(r),
                    format!("r_(i,k) = {weight} < 2^-({})·{r}", k + 1),
                );
                let below_next = c.descendants(next.node);
                let members_ok = band.iter().all(|&m| {
                    node.children().contains(&m)
                        && classes.get(&m) == Some(&GateClass::NonScalar)
                        && !below_next.contains(&m)
                });
                log.record(
                    Some(i),
                    "members",
                    members_ok && band.contains(chosen),
                    "S must hold non-scalar product children of v_i, none below v_(i+1)".into(),
                );
                // |S| > (√n/2c)·(2α)^{-k}  ⇔  (|S|·2c·(2p)^k)² > n·q^{2k}
                let lhs: BigInt = BigInt::from(band.len()) * 2 * BigInt::from(cfg.c) * (p.clone() * BigInt::from(2)).pow(*k);
                log.record(
                    Some(i),
                    "set-bound",
                    lhs.pow(2u32) > n.clone() * q.pow(2 * *k),
                    format!("|S| = {} too small for k = {k}", band.len()),
                );
            }
            Move::Product { j, side, chosen } => {
                let Node::Prod { left, right } = node else {
                    log.record(Some(i), "product-gate", false, "product move at a non-product".into());
                    continue;
                };
                let (want_child, want_a, want_b) = match side {
                    Side::RightKept => (*right, s.a.checked_sub(*j), Some(s.b)),
                    Side::LeftKept => (*left, Some(s.a), s.b.checked_sub(*j)),
                };
                log.record(
                    Some(i),
                    "lengths",
                    *j >= 1 && *chosen == want_child && want_a == Some(next.a) && want_b == Some(next.b),
                    format!("side {side:?} with j = {j} does not match the next step"),
                );
                // I3: r' ≥ 2^{-2j}·r
                log.record(
                    Some(i),
                    "I3",
                    BigInt::from(r1) << (2 * j) >= BigInt::from(r),
                    format!("rank {r1} < 2^-{}·{r}", 2 * j),
                );
            }
        }
    }

    let last = &steps[tr.t];
    let expected_stop = if c.node(last.node).is_leaf() {
        StopReason::Leaf
    } else if last.a == 0 || last.b == 0 {
        StopReason::EmptyCut
    } else {
        StopReason::Rank
    };
    log.record(
        Some(tr.t),
        "stop",
        last.rank <= 1 && tr.stop == expected_stop,
        format!("terminal rank {} with reason {:?}", last.rank, tr.stop),
    );
    if tr.stop == StopReason::Rank {
        log.record(Some(tr.t), "terminal-length", last.a + last.b >= 1, "a_t + b_t = 0".into());
    }

    let mut monotone = true;
    for w in steps.windows(2) {
        let drop = (w[0].a + w[0].b).checked_sub(w[1].a + w[1].b);
        monotone &= match &w[0].step {
            Some(Move::Product { j, .. }) => drop == Some(*j),
            _ => drop == Some(0),
        };
    }
    log.record(None, "monotone", monotone, "a + b must drop by j exactly at products".into());

    let j_sum = tr.j_sum();
    log.record(None, "j-sum", j_sum <= d, format!("sum of j = {j_sum} > d = {d}"));
    let sum_steps = tr.rule1_steps.len() + tr.rule2_steps.len();
    log.record(None, "sum-steps", sum_steps <= d, format!("|I1|+|I2| = {sum_steps} > d"));

    let classify = |kind: fn(&Option<Move>) -> bool| -> Vec<usize> {
        steps.iter().filter(|s| kind(&s.step)).map(|s| s.index).collect()
    };
    log.record(
        None,
        "index-sets",
        tr.rule1_steps == classify(|m| matches!(m, Some(Move::SumRule1 { .. })))
            && tr.rule2_steps == classify(|m| matches!(m, Some(Move::SumRule2 { .. })))
            && tr.product_steps == classify(|m| matches!(m, Some(Move::Product { .. }))),
        "I1, I2, I3 disagree with the steps".into(),
    );

    let sets = tr.witness_sets();
    let mut disjoint = true;
    let mut nested = true;
    for (x, (i, si)) in sets.iter().enumerate() {
        let below = c.descendants(steps[i + 1].node);
        for (_, sj) in &sets[x + 1..] {
            disjoint &= sj.iter().all(|m| !si.contains(m));
            nested &= sj.iter().all(|m| below.contains(m));
        }
    }
    log.record(None, "disjoint", disjoint, "two witness sets share a gate".into());
    log.record(None, "nested", nested, "a later witness set escapes v_(i+1)".into());
    let union: BTreeSet<NodeId> = sets.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    let total: usize = sets.iter().map(|(_, s)| s.len()).sum();
    log.record(
        None,
        "witness",
        tr.witness == union.iter().copied().collect::<Vec<_>>() && union.len() == total,
        "witness set is not the disjoint union of the Rule-2 sets".into(),
    );

    let r0 = steps[0].rank;
    let rt = steps[tr.t].rank;
    let mut product = BigRational::one();
    for w in steps.windows(2) {
        product *= ratio(w[1].rank, w[0].rank);
    }
    let telescopes = r0 == 0 || product == ratio(rt, r0);
    log.record(None, "telescoping", telescopes, format!("product {product} != r_t/r_0"));

    let full_rank = BigInt::from(r0) == BigInt::from(cfg.n).pow((d / 2) as u32);
    if full_rank {
        // n^{-d/2} ≥ r_t/r_0 ≥ (αc/√n)^{|I1|+|I2|}·α^{Σk}·4^{-d}, squared.
        let m = sum_steps as u32;
        let k_sum = tr.k_sum() as u32;
        let lhs = q.pow(2 * (m + k_sum)) * n.pow(m) * BigInt::from(16).pow(d as u32);
        let rhs = n.pow(d as u32) * p.pow(2 * (m + k_sum)) * c2.pow(m);
        log.record(None, "chain", lhs >= rhs, "per-step bounds exceed n^(-d/2)".into());
    }
    Ok(finish(log, tr, cfg, j_sum, sum_steps, full_rank))
}

fn sum_children(node: &Node) -> BTreeSet<NodeId> {
    node.children().into_iter().collect()
}

fn finish(
    mut log: Ledger,
    tr: &PathTrace,
    cfg: &TraceConfig,
    j_sum: usize,
    sum_steps: usize,
    full_rank: bool,
) -> TraceVerification {
    let k_sum = tr.k_sum();
    let ac = &cfg.alpha * BigRational::from_integer(cfg.c.into());
    let large_n_regime = BigRational::from_integer(cfg.n.into()) >= &ac * &ac;
    let k_sum_at_least_d = full_rank.then_some(k_sum >= cfg.d as u64);
    if full_rank && large_n_regime {
        log.record(
            None,
            "k-sum",
            k_sum >= cfg.d as u64,
            format!("sum of k = {k_sum} < d = {}", cfg.d),
        );
    }
    // |S|·2c > √n·Σ (2α)^{-k}, squared.
    let inv2a = (BigRational::from_integer(2.into()) * &cfg.alpha).recip();
    let weight: BigRational = tr
        .witness_sets()
        .iter()
        .filter_map(|(i, _)| match &tr.steps[*i].step {
            Some(Move::SumRule2 { k, .. }) => Some(num_traits::Pow::pow(&inv2a, *k)),
            _ => None,
        })
        .sum();
    let lhs = BigRational::from_integer((tr.witness.len() * 2) as u64 * BigInt::from(cfg.c));
    let witness_bound_holds = &lhs * &lhs > BigRational::from_integer(cfg.n.into()) * &weight * &weight;
    if !tr.rule2_steps.is_empty() {
        log.record(
            None,
            "witness-bound",
            witness_bound_holds,
            "|S| does not exceed the summed per-set bounds".into(),
        );
    }
    let note = match (full_rank, large_n_regime) {
        (false, _) => "not applicable: r_0 != n^(d/2)".to_string(),
        (true, true) => "r_0 = n^(d/2) and n >= (alpha c)^2: sum of k must reach d".to_string(),
        (true, false) => {
            "r_0 = n^(d/2) but n < (alpha c)^2: sum of k is reported, not forced".to_string()
        }
    };
    let r0 = tr.steps.first().map_or(0, |s| s.rank);
    let rt = tr.steps.last().map_or(0, |s| s.rank);
    let passed = log.0.iter().all(|c| c.holds);
    TraceVerification {
        passed,
        checks: log.0,
        j_sum,
        sum_steps,
        rank_ratio: if r0 == 0 {
            "undefined".into()
        } else {
            ratio(rt, r0).to_string()
        },
        closed_form: ClosedForm {
            applicable: full_rank,
            note,
            k_sum,
            d: cfg.d,
            large_n_regime,
            k_sum_at_least_d,
            witness_size: tr.witness.len(),
            witness_bound_holds,
        },
    }
}
