//! Payment channel network data model.
//!
//! A network is a directed multigraph: every channel contributes two
//! directed edges with independent fee policies and a shared capacity.
//! Edge weights are the routing fees at a fixed transaction amount,
//! computed in exact integer satoshi.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index, stable for the lifetime of a graph instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

/// Index into the edge table. Removal tombstones the slot, so ids of
/// surviving edges never move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// Per-direction fee policy: fixed base fee plus a proportional rate in
/// parts-per-million of the transferred amount.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelPolicy {
    pub base_fee: u64,
    pub fee_rate_ppm: u64,
}

impl ChannelPolicy {
    pub fn new(base_fee: u64, fee_rate_ppm: u64) -> Self {
        Self {
            base_fee,
            fee_rate_ppm,
        }
    }

    /// A scalar fee: the whole fee as a base amount, no proportional part.
    pub fn flat(fee: u64) -> Self {
        Self {
            base_fee: fee,
            fee_rate_ppm: 0,
        }
    }
}

/// Network-wide defaults: 1000 satoshi base fee, rate 0.001 (1000 ppm).
impl Default for ChannelPolicy {
    fn default() -> Self {
        Self {
            base_fee: 1000,
            fee_rate_ppm: 1000,
        }
    }
}

/// Transaction amount in satoshi; always at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct TxAmount(u64);

impl TxAmount {
    pub fn new(amount: u64) -> Result<Self> {
        if amount == 0 {
            return Err(Error::ZeroTxAmount);
        }
        Ok(Self(amount))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for TxAmount {
    type Error = Error;
    fn try_from(v: u64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TxAmount> for u64 {
    fn from(v: TxAmount) -> u64 {
        v.0
    }
}

/// Routing fee charged by one directed edge for a given amount:
/// `base_fee + floor(fee_rate_ppm * amount / 1_000_000)`.
///
/// Exact integer arithmetic; overflow of the u64 range is reported.
pub fn edge_fee(policy: &ChannelPolicy, tx: TxAmount) -> Result<u64> {
    let prop = (policy.fee_rate_ppm as u128 * tx.get() as u128) / 1_000_000;
    let total = policy.base_fee as u128 + prop;
    u64::try_from(total).map_err(|_| Error::FeeOverflow {
        base_fee: policy.base_fee,
        fee_rate_ppm: policy.fee_rate_ppm,
        tx: tx.get(),
    })
}

/// One direction of a channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub policy: ChannelPolicy,
    pub capacity: u64,
}

/// Directed multigraph of payment channels.
///
/// Parallel edges between the same node pair are allowed (snapshots
/// contain them); channels added through [`PcnGraph::add_channel`] are
/// capped at one per `(a, peer)` pair and tracked so they can be removed
/// again. Graphs are value types: mutating operations return a new graph.
#[derive(Debug, Clone, Default)]
pub struct PcnGraph {
    keys: Vec<String>,
    key_lookup: HashMap<String, NodeId>,
    edges: Vec<Option<DirectedEdge>>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    live_edges: usize,
    added: BTreeMap<(NodeId, NodeId), (EdgeId, EdgeId)>,
}

impl PcnGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a node by key, returning its id. Existing keys map to the
    /// already-assigned id, so insertion order fixes the dense indices.
    pub fn add_node(&mut self, key: &str) -> NodeId {
        if let Some(&id) = self.key_lookup.get(key) {
            return id;
        }
        let id = NodeId(self.keys.len());
        self.keys.push(key.to_string());
        self.key_lookup.insert(key.to_string(), id);
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        id
    }

    pub fn node(&self, key: &str) -> Option<NodeId> {
        self.key_lookup.get(key).copied()
    }

    pub fn key(&self, id: NodeId) -> &str {
        &self.keys[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.keys.len()).map(NodeId)
    }

    pub fn edge_count(&self) -> usize {
        self.live_edges
    }

    pub fn edge(&self, id: EdgeId) -> Option<&DirectedEdge> {
        self.edges.get(id.0).and_then(|slot| slot.as_ref())
    }

    /// Upper bound over edge ids ever allocated (including tombstones).
    pub fn edge_bound(&self) -> usize {
        self.edges.len()
    }

    /// All live edges with their ids, in id order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &DirectedEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, slot)| slot.as_ref().map(|e| (EdgeId(i), e)))
    }

    pub fn out_edges(&self, n: NodeId) -> impl Iterator<Item = (EdgeId, &DirectedEdge)> {
        self.out_adj[n.0]
            .iter()
            .map(move |&id| (id, self.edges[id.0].as_ref().expect("live edge in adjacency")))
    }

    pub fn in_edges(&self, n: NodeId) -> impl Iterator<Item = (EdgeId, &DirectedEdge)> {
        self.in_adj[n.0]
            .iter()
            .map(move |&id| (id, self.edges[id.0].as_ref().expect("live edge in adjacency")))
    }

    /// Total number of incident edges (in + out, parallels counted).
    pub fn degree(&self, n: NodeId) -> usize {
        self.out_adj[n.0].len() + self.in_adj[n.0].len()
    }

    /// Nodes adjacent to `n` through any live edge, either direction.
    pub fn neighbors(&self, n: NodeId) -> BTreeSet<NodeId> {
        let mut set = BTreeSet::new();
        for (_, e) in self.out_edges(n) {
            set.insert(e.dst);
        }
        for (_, e) in self.in_edges(n) {
            set.insert(e.src);
        }
        set
    }

    /// Append a directed edge. Used while building graphs from snapshots
    /// or generators; algorithmic mutation goes through `add_channel`.
    pub fn push_edge(
        &mut self,
        src: NodeId,
        dst: NodeId,
        policy: ChannelPolicy,
        capacity: u64,
    ) -> Result<EdgeId> {
        if src == dst {
            return Err(Error::SelfChannel(self.key(src).to_string()));
        }
        let id = EdgeId(self.edges.len());
        self.edges.push(Some(DirectedEdge {
            src,
            dst,
            policy,
            capacity,
        }));
        self.out_adj[src.0].push(id);
        self.in_adj[dst.0].push(id);
        self.live_edges += 1;
        Ok(id)
    }

    /// Graph with only the edges whose capacity supports `tx`.
    /// The node set is unchanged; edge ids are reassigned compactly.
    pub fn filter_by_capacity(&self, tx: TxAmount) -> PcnGraph {
        let mut g = PcnGraph::new();
        for key in &self.keys {
            g.add_node(key);
        }
        let mut id_map: HashMap<EdgeId, EdgeId> = HashMap::new();
        for (old_id, e) in self.edges() {
            if e.capacity >= tx.get() {
                let new_id = g
                    .push_edge(e.src, e.dst, e.policy, e.capacity)
                    .expect("edge endpoints already valid");
                id_map.insert(old_id, new_id);
            }
        }
        for (&pair, &(out_id, in_id)) in &self.added {
            if let (Some(&o), Some(&i)) = (id_map.get(&out_id), id_map.get(&in_id)) {
                g.added.insert(pair, (o, i));
            }
        }
        g
    }

    /// Open a channel between `a` and `peer`: adds `a -> peer` with
    /// `out_policy` and `peer -> a` with `in_policy`, both at `capacity`.
    /// At most one such channel per `(a, peer)` pair.
    pub fn add_channel(
        &self,
        a: NodeId,
        peer: NodeId,
        out_policy: ChannelPolicy,
        in_policy: ChannelPolicy,
        capacity: u64,
    ) -> Result<PcnGraph> {
        if a == peer {
            return Err(Error::SelfChannel(self.key(a).to_string()));
        }
        if self.added.contains_key(&(a, peer)) {
            return Err(Error::DuplicateChannel {
                a: self.key(a).to_string(),
                peer: self.key(peer).to_string(),
            });
        }
        let mut g = self.clone();
        let out_id = g.push_edge(a, peer, out_policy, capacity)?;
        let in_id = g.push_edge(peer, a, in_policy, capacity)?;
        g.added.insert((a, peer), (out_id, in_id));
        Ok(g)
    }

    /// Close a channel previously created by `add_channel`. Both directed
    /// edges are removed; the edge multiset returns to its prior state.
    pub fn remove_channel(&self, a: NodeId, peer: NodeId) -> Result<PcnGraph> {
        let &(out_id, in_id) = self.added.get(&(a, peer)).ok_or(Error::MissingChannel {
            a: self.key(a).to_string(),
            peer: self.key(peer).to_string(),
        })?;
        let mut g = self.clone();
        g.remove_edge_slot(out_id);
        g.remove_edge_slot(in_id);
        g.added.remove(&(a, peer));
        Ok(g)
    }

    fn remove_edge_slot(&mut self, id: EdgeId) {
        let e = self.edges[id.0].take().expect("removing a live edge");
        self.out_adj[e.src.0].retain(|&x| x != id);
        self.in_adj[e.dst.0].retain(|&x| x != id);
        self.live_edges -= 1;
    }

    /// Channels created by `add_channel` originating at `a`, as
    /// `(peer, out_edge, in_edge)` in peer order.
    pub fn strategic_channels(&self, a: NodeId) -> Vec<(NodeId, EdgeId, EdgeId)> {
        self.added
            .range((a, NodeId(0))..=(a, NodeId(usize::MAX)))
            .map(|(&(_, peer), &(o, i))| (peer, o, i))
            .collect()
    }

    /// Sorted multiset of live edges; lets tests compare graphs without
    /// depending on edge id assignment.
    pub fn edge_multiset(&self) -> Vec<(NodeId, NodeId, ChannelPolicy, u64)> {
        let mut v: Vec<_> = self
            .edges()
            .map(|(_, e)| (e.src, e.dst, e.policy, e.capacity))
            .collect();
        v.sort();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(amount: u64) -> TxAmount {
        TxAmount::new(amount).unwrap()
    }

    #[test]
    fn fee_default_policy_medium() {
        let p = ChannelPolicy::default();
        assert_eq!(edge_fee(&p, tx(10_000)).unwrap(), 1010);
    }

    #[test]
    fn fee_default_policy_macro() {
        let p = ChannelPolicy::default();
        assert_eq!(edge_fee(&p, tx(1_000_000)).unwrap(), 2000);
    }

    #[test]
    fn fee_zero_policy() {
        let p = ChannelPolicy::new(0, 0);
        assert_eq!(edge_fee(&p, tx(500)).unwrap(), 0);
    }

    #[test]
    fn fee_floor_rounding() {
        // 999_999 ppm of 1 satoshi floors to zero.
        let p = ChannelPolicy::new(7, 999_999);
        assert_eq!(edge_fee(&p, tx(1)).unwrap(), 7);
    }

    #[test]
    fn fee_overflow_is_reported() {
        let p = ChannelPolicy::new(u64::MAX, 1_000_000);
        assert!(matches!(
            edge_fee(&p, tx(u64::MAX)),
            Err(Error::FeeOverflow { .. })
        ));
    }

    #[test]
    fn tx_amount_must_be_positive() {
        assert!(TxAmount::new(0).is_err());
        assert_eq!(TxAmount::new(1).unwrap().get(), 1);
    }

    fn two_edge_graph() -> (PcnGraph, NodeId, NodeId) {
        let mut g = PcnGraph::new();
        let a = g.add_node("a");
        let b = g.add_node("b");
        g.push_edge(a, b, ChannelPolicy::flat(5), 50).unwrap();
        g.push_edge(b, a, ChannelPolicy::flat(5), 10_000).unwrap();
        (g, a, b)
    }

    #[test]
    fn filter_by_capacity_keeps_node_set() {
        let (g, _, _) = two_edge_graph();
        let f = g.filter_by_capacity(tx(100));
        assert_eq!(f.node_count(), 2);
        assert_eq!(f.edge_count(), 1);
        assert_eq!(f.edges().next().unwrap().1.capacity, 10_000);
    }

    #[test]
    fn filter_by_capacity_identity_when_all_pass() {
        let (g, _, _) = two_edge_graph();
        let f = g.filter_by_capacity(tx(1));
        assert_eq!(f.edge_multiset(), g.edge_multiset());
    }

    #[test]
    fn filter_by_capacity_idempotent() {
        let (g, _, _) = two_edge_graph();
        let once = g.filter_by_capacity(tx(100));
        let twice = once.filter_by_capacity(tx(100));
        assert_eq!(once.edge_multiset(), twice.edge_multiset());
    }

    #[test]
    fn add_channel_both_directions() {
        let mut g = PcnGraph::new();
        let a = g.add_node("a");
        let b = g.add_node("b");
        let g2 = g
            .add_channel(a, b, ChannelPolicy::flat(42), ChannelPolicy::default(), 10_000)
            .unwrap();
        assert_eq!(g2.edge_count(), 2);
        let (_, in_edge) = g2.in_edges(a).next().unwrap();
        assert_eq!(edge_fee(&in_edge.policy, tx(10_000)).unwrap(), 1010);
    }

    #[test]
    fn duplicate_channel_rejected() {
        let mut g = PcnGraph::new();
        let a = g.add_node("a");
        let b = g.add_node("b");
        let g2 = g
            .add_channel(a, b, ChannelPolicy::flat(1), ChannelPolicy::default(), 100)
            .unwrap();
        assert!(matches!(
            g2.add_channel(a, b, ChannelPolicy::flat(2), ChannelPolicy::default(), 100),
            Err(Error::DuplicateChannel { .. })
        ));
    }

    #[test]
    fn add_then_remove_is_identity() {
        let (g, a, b) = two_edge_graph();
        let before = g.edge_multiset();
        let g2 = g
            .add_channel(a, b, ChannelPolicy::flat(9), ChannelPolicy::default(), 77)
            .unwrap();
        let g3 = g2.remove_channel(a, b).unwrap();
        assert_eq!(g3.edge_multiset(), before);
    }

    #[test]
    fn remove_missing_channel_errors() {
        let (g, a, b) = two_edge_graph();
        assert!(matches!(
            g.remove_channel(a, b),
            Err(Error::MissingChannel { .. })
        ));
    }

    #[test]
    fn stacked_add_remove_in_reverse() {
        let mut g = PcnGraph::new();
        let a = g.add_node("a");
        let peers: Vec<NodeId> = (0..4).map(|i| g.add_node(&format!("p{i}"))).collect();
        let before = g.edge_multiset();
        let mut cur = g;
        for &p in &peers {
            cur = cur
                .add_channel(a, p, ChannelPolicy::flat(3), ChannelPolicy::default(), 10)
                .unwrap();
        }
        for &p in peers.iter().rev() {
            cur = cur.remove_channel(a, p).unwrap();
        }
        assert_eq!(cur.edge_multiset(), before);
    }

    #[test]
    fn strategic_channels_listed_in_peer_order() {
        let mut g = PcnGraph::new();
        let a = g.add_node("a");
        let b = g.add_node("b");
        let c = g.add_node("c");
        let g2 = g
            .add_channel(a, c, ChannelPolicy::flat(1), ChannelPolicy::default(), 10)
            .unwrap()
            .add_channel(a, b, ChannelPolicy::flat(2), ChannelPolicy::default(), 10)
            .unwrap();
        let chans = g2.strategic_channels(a);
        assert_eq!(chans.len(), 2);
        assert_eq!(chans[0].0, b);
        assert_eq!(chans[1].0, c);
    }
}
