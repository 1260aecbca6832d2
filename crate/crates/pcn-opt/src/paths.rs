//! Shortest-path substrate shared by the centrality and fee-search
//! engines: a CSR projection of the graph at a fixed transaction amount,
//! and Dijkstra with exact shortest-path counting.
//!
//! Counting runs in two phases: Dijkstra fixes the distances, then sigma
//! propagates along the shortest-path DAG in topological order. The
//! second phase keeps counts exact in the presence of zero-weight edges;
//! a zero-cost cycle on shortest paths (where counts are undefined) is
//! detected and reported instead of looping.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::graph::{edge_fee, NodeId, PcnGraph, TxAmount};

pub(crate) const INF: u64 = u64::MAX;

/// Graph in compressed sparse row form with fee weights baked in.
/// `edge_ids` maps each CSR slot back to the source graph's edge table.
#[derive(Debug, Clone)]
pub(crate) struct Csr {
    pub n: usize,
    pub offsets: Vec<usize>,
    pub heads: Vec<u32>,
    pub weights: Vec<u64>,
    pub edge_ids: Vec<u32>,
}

impl Csr {
    /// Forward CSR of `graph` at `tx`. `skip` drops every edge incident
    /// to that node (used to project the network without the strategic
    /// node); `reversed` swaps edge direction.
    pub fn build(
        graph: &PcnGraph,
        tx: TxAmount,
        skip: Option<NodeId>,
        reversed: bool,
    ) -> Result<Csr> {
        let n = graph.node_count();
        let mut deg = vec![0usize; n];
        let mut kept: Vec<(usize, usize, u64, u32)> = Vec::with_capacity(graph.edge_count());
        for (id, e) in graph.edges() {
            if skip == Some(e.src) || skip == Some(e.dst) {
                continue;
            }
            let w = edge_fee(&e.policy, tx)?;
            let (tail, head) = if reversed {
                (e.dst.0, e.src.0)
            } else {
                (e.src.0, e.dst.0)
            };
            deg[tail] += 1;
            kept.push((tail, head, w, id.0 as u32));
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let m = kept.len();
        let mut heads = vec![0u32; m];
        let mut weights = vec![0u64; m];
        let mut edge_ids = vec![0u32; m];
        let mut cursor = offsets.clone();
        for (tail, head, w, id) in kept {
            let slot = cursor[tail];
            cursor[tail] += 1;
            heads[slot] = head as u32;
            weights[slot] = w;
            edge_ids[slot] = id;
        }
        Ok(Csr {
            n,
            offsets,
            heads,
            weights,
            edge_ids,
        })
    }

    fn out(&self, v: usize) -> impl Iterator<Item = (usize, u64, u32)> + '_ {
        (self.offsets[v]..self.offsets[v + 1])
            .map(move |i| (self.heads[i] as usize, self.weights[i], self.edge_ids[i]))
    }
}

/// Path-count accumulator. `u64` is the fast engine representation with
/// overflow detection; `BigUint` backs the definitional tables.
pub(crate) trait PathCount: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    /// Returns false when the addition cannot be represented.
    fn checked_add_assign(&mut self, rhs: &Self) -> bool;
    fn is_zero(&self) -> bool;
}

impl PathCount for u64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn checked_add_assign(&mut self, rhs: &Self) -> bool {
        match self.checked_add(*rhs) {
            Some(v) => {
                *self = v;
                true
            }
            None => false,
        }
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
}

impl PathCount for BigUint {
    fn zero() -> Self {
        BigUint::from(0u32)
    }
    fn one() -> Self {
        BigUint::from(1u32)
    }
    fn checked_add_assign(&mut self, rhs: &Self) -> bool {
        *self += rhs;
        true
    }
    fn is_zero(&self) -> bool {
        *self == BigUint::from(0u32)
    }
}

/// Single-source shortest-path tree with counts.
#[derive(Debug, Clone)]
pub(crate) struct SpTree<C> {
    pub dist: Vec<u64>,
    pub sigma: Vec<C>,
    /// Reachable nodes in shortest-path-DAG topological order
    /// (non-decreasing distance; source first).
    pub order: Vec<u32>,
    /// Per node, the CSR slots of incoming shortest-path-DAG edges.
    /// Slots `>= csr.weights.len()` refer to `extra` edges.
    pub preds: Option<Vec<Vec<u32>>>,
}

/// Dijkstra from `source` over `csr`, counting all minimum-cost paths.
///
/// `extra` holds additional edges out of the source only — `(head,
/// weight)` pairs layered on top of the CSR. They let the fee engine try
/// a candidate channel without materializing a new graph.
pub(crate) fn dijkstra_counts<C: PathCount>(
    csr: &Csr,
    source: usize,
    extra: &[(usize, u64)],
    want_preds: bool,
) -> Result<SpTree<C>> {
    let n = csr.n;
    let mut dist = vec![INF; n];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    dist[source] = 0;
    heap.push(Reverse((0, source)));
    let mut settled = vec![false; n];
    while let Some(Reverse((d, v))) = heap.pop() {
        if settled[v] {
            continue;
        }
        settled[v] = true;
        let relax = |heap: &mut BinaryHeap<_>, dist: &mut Vec<u64>, head: usize, w: u64| {
            let nd = d.saturating_add(w);
            if nd < dist[head] {
                dist[head] = nd;
                heap.push(Reverse((nd, head)));
            }
        };
        for (head, w, _) in csr.out(v) {
            relax(&mut heap, &mut dist, head, w);
        }
        if v == source {
            for &(head, w) in extra {
                relax(&mut heap, &mut dist, head, w);
            }
        }
    }

    // Shortest-path DAG: edge (u -> v) is on it iff dist[u] + w == dist[v].
    let on_dag = |du: u64, w: u64, dv: u64| du != INF && dv != INF && du.saturating_add(w) == dv;
    let mut indeg = vec![0u32; n];
    for u in 0..n {
        if dist[u] == INF {
            continue;
        }
        for (head, w, _) in csr.out(u) {
            if on_dag(dist[u], w, dist[head]) {
                indeg[head] += 1;
            }
        }
    }
    for &(head, w) in extra {
        if on_dag(dist[source], w, dist[head]) {
            indeg[head] += 1;
        }
    }

    // Kahn over the DAG propagates sigma in topological order.
    let mut sigma = vec![C::zero(); n];
    sigma[source] = C::one();
    let mut preds = want_preds.then(|| vec![Vec::new(); n]);
    let reachable = dist.iter().filter(|&&d| d != INF).count();
    let mut order: Vec<u32> = Vec::with_capacity(reachable);
    let mut queue: Vec<usize> = (0..n).filter(|&v| dist[v] != INF && indeg[v] == 0).collect();
    // Only the source can lack DAG in-edges among reachable nodes.
    while let Some(u) = queue.pop() {
        order.push(u as u32);
        let mut visit = |head: usize, w: u64, slot: u32| -> Result<()> {
            if !on_dag(dist[u], w, dist[head]) {
                return Ok(());
            }
            let su = sigma[u].clone();
            if !sigma[head].checked_add_assign(&su) {
                return Err(Error::PathCountOverflow);
            }
            if let Some(p) = preds.as_mut() {
                p[head].push(slot);
            }
            indeg[head] -= 1;
            if indeg[head] == 0 {
                queue.push(head);
            }
            Ok(())
        };
        for i in csr.offsets[u]..csr.offsets[u + 1] {
            visit(csr.heads[i] as usize, csr.weights[i], i as u32)?;
        }
        if u == source {
            for (k, &(head, w)) in extra.iter().enumerate() {
                visit(head, w, (csr.weights.len() + k) as u32)?;
            }
        }
    }
    if order.len() != reachable {
        return Err(Error::ZeroCostCycle);
    }
    Ok(SpTree {
        dist,
        sigma,
        order,
        preds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ChannelPolicy;

    fn tx(v: u64) -> TxAmount {
        TxAmount::new(v).unwrap()
    }

    fn line_graph() -> PcnGraph {
        // s -> a (10), a -> r (5)
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let a = g.add_node("a");
        let r = g.add_node("r");
        g.push_edge(s, a, ChannelPolicy::flat(10), 1).unwrap();
        g.push_edge(a, r, ChannelPolicy::flat(5), 1).unwrap();
        g
    }

    #[test]
    fn line_distances_and_counts() {
        let g = line_graph();
        let csr = Csr::build(&g, tx(1), None, false).unwrap();
        let t = dijkstra_counts::<u64>(&csr, 0, &[], false).unwrap();
        assert_eq!(t.dist[2], 15);
        assert_eq!(t.sigma[2], 1);
        assert_eq!(t.sigma[0], 1);
    }

    #[test]
    fn diamond_tie_counts() {
        // s -> {x, y} -> r, all weight 1
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let x = g.add_node("x");
        let y = g.add_node("y");
        let r = g.add_node("r");
        for (u, v) in [(s, x), (s, y), (x, r), (y, r)] {
            g.push_edge(u, v, ChannelPolicy::flat(1), 1).unwrap();
        }
        let csr = Csr::build(&g, tx(1), None, false).unwrap();
        let t = dijkstra_counts::<u64>(&csr, 0, &[], false).unwrap();
        assert_eq!(t.dist[r.0], 2);
        assert_eq!(t.sigma[r.0], 2);
    }

    #[test]
    fn unreachable_is_zero_sigma() {
        let mut g = PcnGraph::new();
        g.add_node("s");
        g.add_node("island");
        let csr = Csr::build(&g, tx(1), None, false).unwrap();
        let t = dijkstra_counts::<u64>(&csr, 0, &[], false).unwrap();
        assert_eq!(t.dist[1], INF);
        assert_eq!(t.sigma[1], 0);
    }

    #[test]
    fn parallel_edges_count_as_distinct_paths() {
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let r = g.add_node("r");
        g.push_edge(s, r, ChannelPolicy::flat(3), 1).unwrap();
        g.push_edge(s, r, ChannelPolicy::flat(3), 1).unwrap();
        let csr = Csr::build(&g, tx(1), None, false).unwrap();
        let t = dijkstra_counts::<u64>(&csr, 0, &[], false).unwrap();
        assert_eq!(t.dist[1], 3);
        assert_eq!(t.sigma[1], 2);
    }

    #[test]
    fn zero_weight_edges_are_counted_via_dag_order() {
        // s -> a (0), a -> b (0), s -> b (0): two paths of cost 0.
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let a = g.add_node("a");
        let b = g.add_node("b");
        g.push_edge(s, a, ChannelPolicy::flat(0), 1).unwrap();
        g.push_edge(a, b, ChannelPolicy::flat(0), 1).unwrap();
        g.push_edge(s, b, ChannelPolicy::flat(0), 1).unwrap();
        let csr = Csr::build(&g, tx(1), None, false).unwrap();
        let t = dijkstra_counts::<u64>(&csr, 0, &[], false).unwrap();
        assert_eq!(t.sigma[b.0], 2);
    }

    #[test]
    fn zero_cost_cycle_is_detected() {
        let mut g = PcnGraph::new();
        let s = g.add_node("s");
        let a = g.add_node("a");
        let b = g.add_node("b");
        g.push_edge(s, a, ChannelPolicy::flat(1), 1).unwrap();
        g.push_edge(a, b, ChannelPolicy::flat(0), 1).unwrap();
        g.push_edge(b, a, ChannelPolicy::flat(0), 1).unwrap();
        let csr = Csr::build(&g, tx(1), None, false).unwrap();
        assert!(matches!(
            dijkstra_counts::<u64>(&csr, 0, &[], false),
            Err(Error::ZeroCostCycle)
        ));
    }

    #[test]
    fn extra_source_edges_participate() {
        let g = line_graph();
        let csr = Csr::build(&g, tx(1), None, false).unwrap();
        // Virtual s -> r edge of weight 15 ties the existing route.
        let t = dijkstra_counts::<u64>(&csr, 0, &[(2, 15)], true).unwrap();
        assert_eq!(t.dist[2], 15);
        assert_eq!(t.sigma[2], 2);
        assert_eq!(t.preds.as_ref().unwrap()[2].len(), 2);
    }
}
