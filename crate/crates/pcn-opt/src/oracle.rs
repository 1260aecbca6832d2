//! Brute-force reference implementations used to certify the fast
//! engines: exhaustive simple-path enumeration for path counts and
//! betweenness, an exhaustive fee scan, and an exhaustive single
//! channel-selection step.
//!
//! Nothing here shares shortest-path code with `centrality` or
//! `fee_opt`; agreement between the two routes is what the test suite
//! checks, so a disagreement is always a failure, never auto-resolved.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::centrality::{EbcTable, PairFilter};
use crate::error::{Error, Result};
use crate::fee_opt::FeeSearchResult;
use crate::graph::{edge_fee, ChannelPolicy, EdgeId, NodeId, PcnGraph, TxAmount};

/// Enumeration limits. The oracle refuses oversized inputs instead of
/// running unboundedly.
#[derive(Debug, Clone)]
pub struct OracleBudget {
    pub max_nodes: usize,
    /// DFS step limit per (source, target) pair.
    pub max_steps_per_pair: u64,
    pub max_fee_span: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_nodes: 12,
            max_steps_per_pair: 20_000_000,
            max_fee_span: 8192,
        }
    }
}

struct Adjacency {
    n: usize,
    // (head, weight, edge id)
    out: Vec<Vec<(usize, u64, EdgeId)>>,
}

impl Adjacency {
    fn build(graph: &PcnGraph, tx: TxAmount) -> Result<Self> {
        let n = graph.node_count();
        let mut out = vec![Vec::new(); n];
        for (id, e) in graph.edges() {
            out[e.src.0].push((e.dst.0, edge_fee(&e.policy, tx)?, id));
        }
        Ok(Self { n, out })
    }
}

fn check_nodes(graph: &PcnGraph, budget: &OracleBudget) -> Result<()> {
    if graph.node_count() > budget.max_nodes {
        return Err(Error::BudgetExceeded(format!(
            "{} nodes exceeds oracle limit {}",
            graph.node_count(),
            budget.max_nodes
        )));
    }
    Ok(())
}

/// Statistics of the minimum-cost simple paths for one (s, t) pair.
#[derive(Debug, Clone, Default)]
struct PairStats {
    /// (cost, number of minimum-cost paths), None when unreachable.
    min: Option<(u64, u64)>,
    per_edge: HashMap<EdgeId, u64>,
    per_interior: HashMap<usize, u64>,
}

/// Depth-first enumeration of all simple s->t paths, two passes: find
/// the minimum cost, then count every path attaining it.
fn pair_stats(adj: &Adjacency, s: usize, t: usize, budget: &OracleBudget) -> Result<PairStats> {
    if adj.n > 64 {
        return Err(Error::BudgetExceeded("more than 64 nodes".into()));
    }
    let mut steps = 0u64;
    let mut best = u64::MAX;
    find_min(adj, s, t, 1u64 << s, 0, &mut best, &mut steps, budget)?;
    let mut stats = PairStats::default();
    if best == u64::MAX {
        return Ok(stats);
    }
    let mut edge_stack = Vec::new();
    let mut node_stack = vec![s];
    count_min(
        adj,
        s,
        t,
        1u64 << s,
        0,
        best,
        &mut edge_stack,
        &mut node_stack,
        &mut stats,
        &mut steps,
        budget,
    )?;
    stats.min = Some((best, stats.min.map(|(_, c)| c).unwrap_or(0)));
    Ok(stats)
}

fn tick(steps: &mut u64, budget: &OracleBudget) -> Result<()> {
    *steps += 1;
    if *steps > budget.max_steps_per_pair {
        return Err(Error::BudgetExceeded(format!(
            "path enumeration exceeded {} steps",
            budget.max_steps_per_pair
        )));
    }
    Ok(())
}

fn find_min(
    adj: &Adjacency,
    v: usize,
    t: usize,
    visited: u64,
    cost: u64,
    best: &mut u64,
    steps: &mut u64,
    budget: &OracleBudget,
) -> Result<()> {
    tick(steps, budget)?;
    if v == t {
        if cost < *best {
            *best = cost;
        }
        return Ok(());
    }
    for &(head, w, _) in &adj.out[v] {
        if visited & (1u64 << head) != 0 {
            continue;
        }
        let c = cost.saturating_add(w);
        if c > *best {
            continue;
        }
        find_min(adj, head, t, visited | (1u64 << head), c, best, steps, budget)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn count_min(
    adj: &Adjacency,
    v: usize,
    t: usize,
    visited: u64,
    cost: u64,
    target_cost: u64,
    edge_stack: &mut Vec<EdgeId>,
    node_stack: &mut Vec<usize>,
    stats: &mut PairStats,
    steps: &mut u64,
    budget: &OracleBudget,
) -> Result<()> {
    tick(steps, budget)?;
    if v == t {
        if cost == target_cost {
            let c = stats.min.map(|(_, c)| c).unwrap_or(0);
            stats.min = Some((target_cost, c + 1));
            for &e in edge_stack.iter() {
                *stats.per_edge.entry(e).or_insert(0) += 1;
            }
            for &n in &node_stack[1..node_stack.len() - 1] {
                *stats.per_interior.entry(n).or_insert(0) += 1;
            }
        }
        return Ok(());
    }
    for &(head, w, id) in &adj.out[v] {
        if visited & (1u64 << head) != 0 {
            continue;
        }
        let c = cost.saturating_add(w);
        if c > target_cost {
            continue;
        }
        edge_stack.push(id);
        node_stack.push(head);
        count_min(
            adj,
            head,
            t,
            visited | (1u64 << head),
            c,
            target_cost,
            edge_stack,
            node_stack,
            stats,
            steps,
            budget,
        )?;
        edge_stack.pop();
        node_stack.pop();
    }
    Ok(())
}

/// Minimum cost and path count for one pair, by enumeration.
pub fn enumerate_pair(
    graph: &PcnGraph,
    tx: TxAmount,
    s: NodeId,
    t: NodeId,
    budget: &OracleBudget,
) -> Result<Option<(u64, u64)>> {
    check_nodes(graph, budget)?;
    let adj = Adjacency::build(graph, tx)?;
    Ok(pair_stats(&adj, s.0, t.0, budget)?.min)
}

/// Edge betweenness of every edge computed literally from the
/// definition, one pair at a time.
pub fn enumerate_ebc(
    graph: &PcnGraph,
    tx: TxAmount,
    filter: &PairFilter,
    budget: &OracleBudget,
) -> Result<EbcTable> {
    check_nodes(graph, budget)?;
    let adj = Adjacency::build(graph, tx)?;
    let mut table = EbcTable::zeros(graph.edge_bound());
    for s in filter.sources(graph) {
        for t in graph.node_ids() {
            if !filter.include_target(s, t) {
                continue;
            }
            let stats = pair_stats(&adj, s.0, t.0, budget)?;
            let Some((_, sigma)) = stats.min else {
                continue;
            };
            for (e, cnt) in stats.per_edge {
                table.add(e, BigRational::new(BigInt::from(cnt), BigInt::from(sigma)));
            }
        }
    }
    Ok(table)
}

/// Vertex betweenness of one node computed from the definition:
/// pairs s != t != node, fraction of minimum-cost paths with the node
/// strictly interior.
pub fn enumerate_bc(
    graph: &PcnGraph,
    node: NodeId,
    tx: TxAmount,
    budget: &OracleBudget,
) -> Result<BigRational> {
    check_nodes(graph, budget)?;
    let adj = Adjacency::build(graph, tx)?;
    let mut total = BigRational::zero();
    for s in graph.node_ids() {
        for t in graph.node_ids() {
            if s == t || s == node || t == node {
                continue;
            }
            let stats = pair_stats(&adj, s.0, t.0, budget)?;
            let Some((_, sigma)) = stats.min else {
                continue;
            };
            if let Some(&cnt) = stats.per_interior.get(&node.0) {
                total += BigRational::new(BigInt::from(cnt), BigInt::from(sigma));
            }
        }
    }
    Ok(total)
}

/// All simple s->t paths split by candidate usage. Only the cheapest
/// entry of each group can ever lie on a shortest path, so only those
/// are retained: path cost for the "thru" group is `base + fee`.
#[derive(Debug, Clone, Default)]
struct PairGroups {
    /// (cost, count, per-prior counts) of the best paths avoiding the candidate.
    avoid: Option<(u64, u64, Vec<u64>)>,
    /// (base cost, count, per-prior counts) of the best paths using it.
    thru: Option<(u64, u64, Vec<u64>)>,
}

#[allow(clippy::too_many_arguments)]
fn group_paths(
    adj: &Adjacency,
    v: usize,
    t: usize,
    visited: u64,
    cost: u64,
    cand: EdgeId,
    priors: &[EdgeId],
    used_cand: bool,
    prior_mask: u64,
    groups: &mut PairGroups,
    steps: &mut u64,
    budget: &OracleBudget,
) -> Result<()> {
    tick(steps, budget)?;
    if v == t {
        let slot = if used_cand {
            &mut groups.thru
        } else {
            &mut groups.avoid
        };
        match slot {
            Some((best, count, per_prior)) if cost == *best => {
                *count += 1;
                for (j, c) in per_prior.iter_mut().enumerate() {
                    if prior_mask & (1u64 << j) != 0 {
                        *c += 1;
                    }
                }
            }
            Some((best, _, _)) if cost > *best => {}
            _ => {
                let mut per_prior = vec![0u64; priors.len()];
                for (j, c) in per_prior.iter_mut().enumerate() {
                    if prior_mask & (1u64 << j) != 0 {
                        *c = 1;
                    }
                }
                *slot = Some((cost, 1, per_prior));
            }
        }
        return Ok(());
    }
    // A partial strictly above both group minima cannot improve either.
    let bound = match (&groups.avoid, &groups.thru) {
        (Some((a, _, _)), Some((b, _, _))) => Some((*a).max(*b)),
        _ => None,
    };
    if let Some(b) = bound {
        if cost > b {
            return Ok(());
        }
    }
    for &(head, w, id) in &adj.out[v] {
        if visited & (1u64 << head) != 0 {
            continue;
        }
        let mut mask = prior_mask;
        if let Some(j) = priors.iter().position(|&p| p == id) {
            mask |= 1u64 << j;
        }
        group_paths(
            adj,
            head,
            t,
            visited | (1u64 << head),
            cost.saturating_add(w),
            cand,
            priors,
            used_cand || id == cand,
            mask,
            groups,
            steps,
            budget,
        )?;
    }
    Ok(())
}

/// Ground truth for the fee search: add the candidate channel
/// `a -> peer`, then evaluate the total expected reward at every integer
/// fee in `[lo, hi]` and return the maximum, smallest fee on ties.
#[allow(clippy::too_many_arguments)]
pub fn exhaustive_fee_scan(
    graph: &PcnGraph,
    a: NodeId,
    peer: NodeId,
    in_policy: ChannelPolicy,
    lo: u64,
    hi: u64,
    tx: TxAmount,
    budget: &OracleBudget,
) -> Result<FeeSearchResult> {
    check_nodes(graph, budget)?;
    if lo < 1 || lo > hi {
        return Err(Error::InvalidInterval { lo, hi, d: 0 });
    }
    if hi - lo + 1 > budget.max_fee_span {
        return Err(Error::BudgetExceeded(format!(
            "fee span {} exceeds limit {}",
            hi - lo + 1,
            budget.max_fee_span
        )));
    }
    // Candidate out-edge carries weight zero during enumeration; its fee
    // is added per scanned value.
    let g = graph.add_channel(a, peer, ChannelPolicy::flat(0), in_policy, tx.get())?;
    let (_, cand_edge, _) = g
        .strategic_channels(a)
        .into_iter()
        .find(|&(p, _, _)| p == peer)
        .expect("candidate channel just added");
    let priors: Vec<(EdgeId, u64)> = g
        .out_edges(a)
        .filter(|&(id, _)| id != cand_edge)
        .map(|(id, e)| Ok((id, edge_fee(&e.policy, tx)?)))
        .collect::<Result<_>>()?;
    let prior_ids: Vec<EdgeId> = priors.iter().map(|&(id, _)| id).collect();
    if prior_ids.len() > 60 {
        return Err(Error::BudgetExceeded("more than 60 prior channels".into()));
    }
    let adj = Adjacency::build(&g, tx)?;

    let mut summaries: Vec<PairGroups> = Vec::new();
    for s in g.node_ids() {
        for t in g.node_ids() {
            if s == t || s == a || t == a {
                continue;
            }
            let mut groups = PairGroups::default();
            let mut steps = 0u64;
            group_paths(
                &adj,
                s.0,
                t.0,
                1u64 << s.0,
                0,
                cand_edge,
                &prior_ids,
                false,
                0,
                &mut groups,
                &mut steps,
                budget,
            )?;
            if groups.avoid.is_some() || groups.thru.is_some() {
                summaries.push(groups);
            }
        }
    }

    // Pairs the candidate can never serve contribute a fee-independent
    // amount through the prior channels.
    let mut constant = BigRational::zero();
    let mut dynamic: Vec<&PairGroups> = Vec::new();
    for groups in &summaries {
        match (&groups.avoid, &groups.thru) {
            (Some((_, sigma, per_prior)), None) => {
                constant += prior_share(per_prior, *sigma, &priors);
            }
            _ => dynamic.push(groups),
        }
    }

    let mut best_fee = lo;
    let mut best_reward: Option<BigRational> = None;
    for fee in lo..=hi {
        let mut reward = constant.clone();
        for groups in &dynamic {
            let thru = groups.thru.as_ref().expect("dynamic pairs have a thru group");
            let (thru_base, thru_sigma, thru_priors) = thru;
            let thru_cost = thru_base.saturating_add(fee);
            match &groups.avoid {
                Some((avoid_cost, avoid_sigma, avoid_priors)) => {
                    if thru_cost < *avoid_cost {
                        reward += cand_share(fee, *thru_sigma, *thru_sigma);
                        reward += prior_share_scaled(thru_priors, *thru_sigma, &priors);
                    } else if thru_cost == *avoid_cost {
                        let total = avoid_sigma + thru_sigma;
                        reward += cand_share(fee, *thru_sigma, total);
                        let mut merged = avoid_priors.clone();
                        for (m, t) in merged.iter_mut().zip(thru_priors) {
                            *m += t;
                        }
                        reward += prior_share_scaled(&merged, total, &priors);
                    } else {
                        reward += prior_share(avoid_priors, *avoid_sigma, &priors);
                    }
                }
                None => {
                    reward += cand_share(fee, *thru_sigma, *thru_sigma);
                    reward += prior_share_scaled(thru_priors, *thru_sigma, &priors);
                }
            }
        }
        if best_reward.as_ref().is_none_or(|b| reward > *b) {
            best_reward = Some(reward);
            best_fee = fee;
        }
    }
    Ok(FeeSearchResult {
        best_fee,
        best_reward: best_reward.unwrap_or_else(BigRational::zero),
        evaluations: (hi - lo + 1) as usize,
        pruned_intervals: 0,
    })
}

fn cand_share(fee: u64, sigma_thru: u64, sigma_total: u64) -> BigRational {
    BigRational::from(BigInt::from(fee))
        * BigRational::new(BigInt::from(sigma_thru), BigInt::from(sigma_total))
}

fn prior_share(per_prior: &[u64], sigma: u64, priors: &[(EdgeId, u64)]) -> BigRational {
    prior_share_scaled(per_prior, sigma, priors)
}

fn prior_share_scaled(per_prior: &[u64], sigma_total: u64, priors: &[(EdgeId, u64)]) -> BigRational {
    let mut sum = BigRational::zero();
    for (count, &(_, w)) in per_prior.iter().zip(priors) {
        if *count == 0 {
            continue;
        }
        sum += BigRational::from(BigInt::from(w))
            * BigRational::new(BigInt::from(*count), BigInt::from(sigma_total));
    }
    sum
}

/// One exhaustive step of channel selection: the true argmax over every
/// (non-neighbor peer, integer fee) pair for a single added channel.
pub fn exhaustive_step(
    graph: &PcnGraph,
    a: NodeId,
    in_policy: ChannelPolicy,
    f_max: u64,
    tx: TxAmount,
    budget: &OracleBudget,
) -> Result<(NodeId, u64, BigRational)> {
    check_nodes(graph, budget)?;
    let taken = graph.neighbors(a);
    let candidates: Vec<NodeId> = graph
        .node_ids()
        .filter(|&v| v != a && !taken.contains(&v))
        .collect();
    if candidates.is_empty() {
        return Err(Error::NotEnoughCandidates {
            needed: 1,
            found: 0,
        });
    }
    let mut best: Option<(NodeId, u64, BigRational)> = None;
    for peer in candidates {
        let scan = exhaustive_fee_scan(graph, a, peer, in_policy, 1, f_max, tx, budget)?;
        if best
            .as_ref()
            .is_none_or(|(_, _, r)| scan.best_reward > *r)
        {
            best = Some((peer, scan.best_fee, scan.best_reward));
        }
    }
    Ok(best.expect("at least one candidate"))
}
