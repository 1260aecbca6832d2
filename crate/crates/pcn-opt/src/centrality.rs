//! Exact shortest-path counting, vertex and edge betweenness centrality,
//! the expected-reward functions built on them, and the degree/pagerank
//! baselines.
//!
//! Betweenness scores are exact rationals: path counts are big integers
//! and tie fractions are never rounded, so two independent computations
//! of the same quantity can be compared with `==`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{edge_fee, EdgeId, NodeId, PcnGraph, TxAmount};
use crate::paths::{dijkstra_counts, Csr, INF};

/// Per-source shortest-path distances, path counts, and predecessor
/// lists — the substrate both betweenness flavors are summed from.
#[derive(Debug, Clone)]
pub struct PathCountTable {
    pub source: NodeId,
    dist: Vec<u64>,
    sigma: Vec<BigUint>,
    preds: Vec<Vec<EdgeId>>,
}

impl PathCountTable {
    /// Minimum total fee from the source, `None` when unreachable.
    pub fn dist(&self, v: NodeId) -> Option<u64> {
        (self.dist[v.0] != INF).then(|| self.dist[v.0])
    }

    /// Number of distinct minimum-cost paths from the source.
    pub fn sigma(&self, v: NodeId) -> &BigUint {
        &self.sigma[v.0]
    }

    /// Edges that end a minimum-cost path into `v`.
    pub fn predecessors(&self, v: NodeId) -> &[EdgeId] {
        &self.preds[v.0]
    }
}

/// Which (source, target) pairs a betweenness sum ranges over.
///
/// The definitional form counts every ordered pair; the reward form
/// excludes pairs touching the strategic node; tests can pin an explicit
/// pair list.
#[derive(Debug, Clone)]
pub struct PairFilter {
    kind: FilterKind,
}

#[derive(Debug, Clone)]
enum FilterKind {
    All,
    Excluding(BTreeSet<NodeId>),
    Pairs(BTreeMap<NodeId, BTreeSet<NodeId>>),
}

impl PairFilter {
    /// Every ordered pair (s, t), s != t.
    pub fn all() -> Self {
        Self {
            kind: FilterKind::All,
        }
    }

    /// Pairs where neither endpoint is in `excluded`.
    pub fn excluding<I: IntoIterator<Item = NodeId>>(excluded: I) -> Self {
        Self {
            kind: FilterKind::Excluding(excluded.into_iter().collect()),
        }
    }

    /// Exactly the listed ordered pairs.
    pub fn pairs<I: IntoIterator<Item = (NodeId, NodeId)>>(pairs: I) -> Self {
        let mut map: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for (s, t) in pairs {
            if s != t {
                map.entry(s).or_default().insert(t);
            }
        }
        Self {
            kind: FilterKind::Pairs(map),
        }
    }

    pub fn sources(&self, graph: &PcnGraph) -> Vec<NodeId> {
        match &self.kind {
            FilterKind::All => graph.node_ids().collect(),
            FilterKind::Excluding(ex) => graph.node_ids().filter(|n| !ex.contains(n)).collect(),
            FilterKind::Pairs(map) => map.keys().copied().collect(),
        }
    }

    pub fn include_target(&self, s: NodeId, t: NodeId) -> bool {
        if s == t {
            return false;
        }
        match &self.kind {
            FilterKind::All => true,
            FilterKind::Excluding(ex) => !ex.contains(&t),
            FilterKind::Pairs(map) => map.get(&s).is_some_and(|set| set.contains(&t)),
        }
    }
}

/// Edge betweenness scores, indexed by edge id.
#[derive(Debug, Clone)]
pub struct EbcTable {
    scores: Vec<BigRational>,
}

impl EbcTable {
    pub(crate) fn zeros(bound: usize) -> Self {
        Self {
            scores: vec![BigRational::zero(); bound],
        }
    }

    pub fn get(&self, e: EdgeId) -> &BigRational {
        &self.scores[e.0]
    }

    pub(crate) fn add(&mut self, e: EdgeId, v: BigRational) {
        self.scores[e.0] += v;
    }

    /// Debug dump: one row per live edge with the score as an exact
    /// numerator/denominator pair.
    pub fn write_csv<W: Write>(&self, graph: &PcnGraph, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["src", "dst", "numerator", "denominator"])?;
        for (id, e) in graph.edges() {
            let score = self.get(id);
            w.write_record([
                graph.key(e.src),
                graph.key(e.dst),
                &score.numer().to_string(),
                &score.denom().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest-path distances and exact path counts from one source.
/// Edge weights are the per-edge fees at `tx`; ties accumulate.
pub fn shortest_path_counts(
    graph: &PcnGraph,
    source: NodeId,
    tx: TxAmount,
) -> Result<PathCountTable> {
    let csr = Csr::build(graph, tx, None, false)?;
    let tree = dijkstra_counts::<BigUint>(&csr, source.0, &[], true)?;
    let preds = tree
        .preds
        .expect("requested predecessors")
        .into_iter()
        .map(|slots| {
            slots
                .into_iter()
                .map(|s| EdgeId(csr.edge_ids[s as usize] as usize))
                .collect()
        })
        .collect();
    Ok(PathCountTable {
        source,
        dist: tree.dist,
        sigma: tree.sigma,
        preds,
    })
}

fn ratio(n: &BigUint, d: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(n.clone()), BigInt::from(d.clone()))
}

/// Edge betweenness centrality of every edge: for each admissible
/// (s, t) pair, the fraction of minimum-cost s->t paths using the edge.
pub fn edge_betweenness(graph: &PcnGraph, tx: TxAmount, filter: &PairFilter) -> Result<EbcTable> {
    let csr = Csr::build(graph, tx, None, false)?;
    let mut table = EbcTable::zeros(graph.edge_bound());
    for s in filter.sources(graph) {
        let tree = dijkstra_counts::<BigUint>(&csr, s.0, &[], true)?;
        let preds = tree.preds.as_ref().expect("requested predecessors");
        let mut delta = vec![BigRational::zero(); csr.n];
        for &w in tree.order.iter().rev() {
            let w = w as usize;
            let inc = filter.include_target(s, NodeId(w));
            if !inc && delta[w].is_zero() {
                continue;
            }
            let mut weight = delta[w].clone();
            if inc {
                weight += BigRational::one();
            }
            for &slot in &preds[w] {
                let slot = slot as usize;
                let v = tail_of(&csr, slot);
                let c = ratio(&tree.sigma[v], &tree.sigma[w]) * &weight;
                table.add(EdgeId(csr.edge_ids[slot] as usize), c.clone());
                delta[v] += c;
            }
        }
    }
    Ok(table)
}

/// Tail node of a CSR slot, recovered from the offsets table.
fn tail_of(csr: &Csr, slot: usize) -> usize {
    // Binary search: the node whose out-slot range contains `slot`.
    match csr.offsets.binary_search(&slot) {
        Ok(mut i) => {
            // Skip empty ranges that share the same offset.
            while csr.offsets[i + 1] == slot {
                i += 1;
            }
            i
        }
        Err(i) => i - 1,
    }
}

/// Betweenness centrality of every node: pairs (s, t) with s != t != v,
/// fraction of minimum-cost paths with v strictly interior.
pub fn vertex_betweenness_all(graph: &PcnGraph, tx: TxAmount) -> Result<Vec<BigRational>> {
    let csr = Csr::build(graph, tx, None, false)?;
    let mut bc = vec![BigRational::zero(); csr.n];
    for s in graph.node_ids() {
        let tree = dijkstra_counts::<BigUint>(&csr, s.0, &[], true)?;
        let preds = tree.preds.as_ref().expect("requested predecessors");
        let mut delta = vec![BigRational::zero(); csr.n];
        for &w in tree.order.iter().rev() {
            let w = w as usize;
            let weight = delta[w].clone() + BigRational::one();
            for &slot in &preds[w] {
                let v = tail_of(&csr, slot as usize);
                delta[v] += ratio(&tree.sigma[v], &tree.sigma[w]) * &weight;
            }
            if w != s.0 {
                bc[w] += &delta[w];
            }
        }
    }
    Ok(bc)
}

pub fn vertex_betweenness(graph: &PcnGraph, node: NodeId, tx: TxAmount) -> Result<BigRational> {
    Ok(vertex_betweenness_all(graph, tx)?.swap_remove(node.0))
}

/// Expected routing reward of a single channel edge: its fee at `tx`
/// times its edge betweenness over the admissible pairs. Unnormalized —
/// the uniform pair-probability constant is dropped.
pub fn expected_reward_channel(
    graph: &PcnGraph,
    edge: EdgeId,
    tx: TxAmount,
    filter: &PairFilter,
) -> Result<BigRational> {
    let e = graph
        .edge(edge)
        .ok_or_else(|| Error::InvalidConfig(format!("edge {} not in graph", edge.0)))?;
    let fee = edge_fee(&e.policy, tx)?;
    let ebc = edge_betweenness(graph, tx, filter)?;
    Ok(BigRational::from(BigInt::from(fee)) * ebc.get(edge))
}

/// Total expected reward of a set of channels owned by `a`, under one
/// consistent shortest-path computation with pairs excluding `a`.
pub fn expected_reward_total(
    graph: &PcnGraph,
    a: NodeId,
    channels: &[EdgeId],
    tx: TxAmount,
) -> Result<BigRational> {
    for &id in channels {
        match graph.edge(id) {
            Some(e) if e.src == a => {}
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "channel edge {} does not originate at {}",
                    id.0,
                    graph.key(a)
                )))
            }
        }
    }
    let ebc = edge_betweenness(graph, tx, &PairFilter::excluding([a]))?;
    let mut total = BigRational::zero();
    for &id in channels {
        let e = graph.edge(id).expect("checked above");
        let fee = edge_fee(&e.policy, tx)?;
        total += BigRational::from(BigInt::from(fee)) * ebc.get(id);
    }
    Ok(total)
}

const PAGERANK_DAMPING: f64 = 0.85;
const PAGERANK_TOL: f64 = 1e-10;
const PAGERANK_MAX_ITERS: usize = 200;

/// Standard power-iteration pagerank over the directed multigraph.
/// Damping 0.85, convergence when the L1 change drops below 1e-10 or
/// after 200 iterations; dangling mass is spread uniformly.
pub fn pagerank(graph: &PcnGraph) -> Vec<f64> {
    let n = graph.node_count();
    if n == 0 {
        return Vec::new();
    }
    let out_deg: Vec<usize> = graph.node_ids().map(|v| graph.out_edges(v).count()).collect();
    let mut rank = vec![1.0 / n as f64; n];
    for _ in 0..PAGERANK_MAX_ITERS {
        let mut next = vec![(1.0 - PAGERANK_DAMPING) / n as f64; n];
        let mut dangling = 0.0;
        for v in graph.node_ids() {
            if out_deg[v.0] == 0 {
                dangling += rank[v.0];
                continue;
            }
            let share = PAGERANK_DAMPING * rank[v.0] / out_deg[v.0] as f64;
            for (_, e) in graph.out_edges(v) {
                next[e.dst.0] += share;
            }
        }
        let dangling_share = PAGERANK_DAMPING * dangling / n as f64;
        for x in &mut next {
            *x += dangling_share;
        }
        let l1: f64 = rank
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        rank = next;
        if l1 < PAGERANK_TOL {
            break;
        }
    }
    rank
}

/// Nodes ordered by total (in + out) edge count, ties by id.
pub fn degree_ranking(graph: &PcnGraph) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = graph.node_ids().collect();
    nodes.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ChannelPolicy;

    fn tx(v: u64) -> TxAmount {
        TxAmount::new(v).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn line_path_counts() {
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let a = g.add_node("a");
        let r = g.add_node("r");
        g.push_edge(s, a, ChannelPolicy::flat(10), 1).unwrap();
        g.push_edge(a, r, ChannelPolicy::flat(5), 1).unwrap();
        let t = shortest_path_counts(&g, s, tx(1)).unwrap();
        assert_eq!(t.dist(r), Some(15));
        assert_eq!(t.sigma(r), &BigUint::from(1u32));
        assert_eq!(t.predecessors(r).len(), 1);
        assert_eq!(t.dist(s), Some(0));
        assert_eq!(t.sigma(s), &BigUint::from(1u32));
    }

    fn diamond() -> (PcnGraph, [NodeId; 4], EdgeId) {
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let x = g.add_node("x");
        let y = g.add_node("y");
        let r = g.add_node("r");
        g.push_edge(s, x, ChannelPolicy::flat(1), 1).unwrap();
        g.push_edge(s, y, ChannelPolicy::flat(1), 1).unwrap();
        let xr = g.push_edge(x, r, ChannelPolicy::flat(1), 1).unwrap();
        g.push_edge(y, r, ChannelPolicy::flat(1), 1).unwrap();
        (g, [s, x, y, r], xr)
    }

    #[test]
    fn diamond_tie_splits() {
        let (g, [s, _, _, r], xr) = diamond();
        let t = shortest_path_counts(&g, s, tx(1)).unwrap();
        assert_eq!(t.dist(r), Some(2));
        assert_eq!(t.sigma(r), &BigUint::from(2u32));
        // (s, r) contributes 1/2 through x->r, (x, r) contributes 1.
        let ebc = edge_betweenness(&g, tx(1), &PairFilter::all()).unwrap();
        assert_eq!(ebc.get(xr), &rat(3, 2));
    }

    #[test]
    fn star_edge_betweenness_counts_endpoint_pairs() {
        // Center c, leaves l1..l3, every leaf <-> center edge weight 1.
        let mut g = PcnGraph::new();
        let c = g.add_node("c");
        let leaves: Vec<NodeId> = (1..=3).map(|i| g.add_node(&format!("l{i}"))).collect();
        let mut l1_to_c = None;
        for &l in &leaves {
            let id = g.push_edge(l, c, ChannelPolicy::flat(1), 1).unwrap();
            g.push_edge(c, l, ChannelPolicy::flat(1), 1).unwrap();
            if l == leaves[0] {
                l1_to_c = Some(id);
            }
        }
        let ebc = edge_betweenness(&g, tx(1), &PairFilter::all()).unwrap();
        // Pairs (l1,c), (l1,l2), (l1,l3) each route through l1->c.
        assert_eq!(ebc.get(l1_to_c.unwrap()), &rat(3, 1));
    }

    #[test]
    fn off_path_edge_has_zero_ebc() {
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let r = g.add_node("r");
        let cheap = g.push_edge(s, r, ChannelPolicy::flat(1), 1).unwrap();
        let dear = g.push_edge(s, r, ChannelPolicy::flat(9), 1).unwrap();
        let ebc = edge_betweenness(&g, tx(1), &PairFilter::all()).unwrap();
        assert_eq!(ebc.get(cheap), &rat(1, 1));
        assert!(ebc.get(dear).is_zero());
    }

    #[test]
    fn path_interior_bc_is_one() {
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let a = g.add_node("a");
        let r = g.add_node("r");
        g.push_edge(s, a, ChannelPolicy::flat(1), 1).unwrap();
        g.push_edge(a, r, ChannelPolicy::flat(1), 1).unwrap();
        assert_eq!(vertex_betweenness(&g, a, tx(1)).unwrap(), rat(1, 1));
        assert!(vertex_betweenness(&g, s, tx(1)).unwrap().is_zero());
    }

    #[test]
    fn isolated_node_bc_zero() {
        let mut g = PcnGraph::new();
        let v = g.add_node("v");
        g.add_node("w");
        assert!(vertex_betweenness(&g, v, tx(1)).unwrap().is_zero());
    }

    #[test]
    fn reward_three_node_instance() {
        // s -> a weight 10, candidate a -> r fee f, alternative s -> r
        // weight 100. With pairs excluding a, only (s, r) contributes.
        for (fee, expect) in [(89u64, rat(89, 1)), (90, rat(45, 1)), (91, rat(0, 1))] {
            let mut g = PcnGraph::new();
            let s = g.add_node("s");
            let a = g.add_node("a");
            let r = g.add_node("r");
            g.push_edge(s, a, ChannelPolicy::flat(10), 1).unwrap();
            let cand = g.push_edge(a, r, ChannelPolicy::flat(fee), 1).unwrap();
            g.push_edge(s, r, ChannelPolicy::flat(100), 1).unwrap();
            let er =
                expected_reward_channel(&g, cand, tx(1), &PairFilter::excluding([a])).unwrap();
            assert_eq!(er, expect, "fee {fee}");
        }
    }

    #[test]
    fn reward_zero_ebc_edge() {
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let a = g.add_node("a");
        let r = g.add_node("r");
        g.push_edge(s, r, ChannelPolicy::flat(1), 1).unwrap();
        let dead = g.push_edge(a, r, ChannelPolicy::flat(500), 1).unwrap();
        let er = expected_reward_channel(&g, dead, tx(1), &PairFilter::excluding([a])).unwrap();
        assert!(er.is_zero());
    }

    #[test]
    fn reward_total_empty_and_single() {
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let a = g.add_node("a");
        let r = g.add_node("r");
        g.push_edge(s, a, ChannelPolicy::flat(10), 1).unwrap();
        let cand = g.push_edge(a, r, ChannelPolicy::flat(89), 1).unwrap();
        g.push_edge(s, r, ChannelPolicy::flat(100), 1).unwrap();
        assert!(expected_reward_total(&g, a, &[], tx(1)).unwrap().is_zero());
        let single = expected_reward_total(&g, a, &[cand], tx(1)).unwrap();
        let direct =
            expected_reward_channel(&g, cand, tx(1), &PairFilter::excluding([a])).unwrap();
        assert_eq!(single, direct);
    }

    #[test]
    fn pagerank_symmetric_complete_graph() {
        let mut g = PcnGraph::new();
        let nodes: Vec<NodeId> = (0..4).map(|i| g.add_node(&format!("n{i}"))).collect();
        for &u in &nodes {
            for &v in &nodes {
                if u != v {
                    g.push_edge(u, v, ChannelPolicy::default(), 1).unwrap();
                }
            }
        }
        let pr = pagerank(&g);
        for score in &pr {
            assert!((score - 0.25).abs() < 1e-12);
        }
        let sum: f64 = pr.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pagerank_single_node() {
        let mut g = PcnGraph::new();
        g.add_node("only");
        let pr = pagerank(&g);
        assert_eq!(pr.len(), 1);
        assert!((pr[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degree_ranking_star_and_ties() {
        let mut g = PcnGraph::new();
        let c = g.add_node("c");
        for i in 0..3 {
            let l = g.add_node(&format!("l{i}"));
            g.push_edge(c, l, ChannelPolicy::default(), 1).unwrap();
            g.push_edge(l, c, ChannelPolicy::default(), 1).unwrap();
        }
        let ranked = degree_ranking(&g);
        assert_eq!(ranked[0], c);
        // Leaves tie on degree and fall back to id order.
        assert_eq!(&ranked[1..], &[NodeId(1), NodeId(2), NodeId(3)]);

        let mut empty = PcnGraph::new();
        for i in 0..3 {
            empty.add_node(&format!("i{i}"));
        }
        assert_eq!(
            degree_ranking(&empty),
            vec![NodeId(0), NodeId(1), NodeId(2)]
        );
    }

    #[test]
    fn ebc_csv_dump() {
        let (g, _, _) = diamond();
        let ebc = edge_betweenness(&g, tx(1), &PairFilter::all()).unwrap();
        let mut buf = Vec::new();
        ebc.write_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("src,dst,numerator,denominator\n"));
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("x,r,3,2"));
    }
}
