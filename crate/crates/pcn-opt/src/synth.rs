//! Graph generators: a scale-free snapshot generator for experiments
//! that must run without real network data, and small seeded random
//! digraphs for tests and verification harnesses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::graph::{ChannelPolicy, PcnGraph};
use crate::snapshot::{self, ChannelRecord, NodeRecord, SnapshotDoc, SnapshotStats};

/// Knobs for the scale-free generator.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub nodes: usize,
    /// Target channel count; realized count is close, never above.
    pub channels: usize,
    pub seed: u64,
    /// Fraction of edge directions that keep the default policy,
    /// mirroring how common default fees are in the wild.
    pub default_policy_fraction: f64,
    /// Capacities are log-uniform over this range, so transaction-class
    /// filtering removes a meaningful share of edges.
    pub capacity_range: (u64, u64),
    pub base_fee_range: (u64, u64),
    pub fee_rate_range: (u64, u64),
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            nodes: 200,
            channels: 600,
            seed: 1,
            default_policy_fraction: 0.5,
            capacity_range: (1_000, 100_000_000),
            base_fee_range: (1, 3_000),
            fee_rate_range: (0, 5_000),
        }
    }
}

fn sample_policy(rng: &mut ChaCha20Rng, cfg: &SynthConfig) -> PolicySample {
    if rng.gen_bool(cfg.default_policy_fraction) {
        PolicySample::Default
    } else {
        let (blo, bhi) = cfg.base_fee_range;
        let (rlo, rhi) = cfg.fee_rate_range;
        PolicySample::Custom(ChannelPolicy::new(
            rng.gen_range(blo..=bhi),
            rng.gen_range(rlo..=rhi),
        ))
    }
}

enum PolicySample {
    Default,
    Custom(ChannelPolicy),
}

impl PolicySample {
    fn record(self) -> Option<crate::snapshot::PolicyRecord> {
        match self {
            // Omitted policies default at ingestion, like real exports.
            PolicySample::Default => None,
            PolicySample::Custom(p) => Some(p.into()),
        }
    }
}

fn sample_capacity(rng: &mut ChaCha20Rng, range: (u64, u64)) -> u64 {
    let (lo, hi) = range;
    if lo >= hi {
        return lo;
    }
    let (llo, lhi) = ((lo as f64).ln(), (hi as f64).ln());
    let v = (rng.gen_range(llo..lhi)).exp();
    (v as u64).clamp(lo, hi)
}

/// Preferential-attachment snapshot: each new node opens channels to
/// existing nodes picked proportionally to their degree.
pub fn scale_free_doc(cfg: &SynthConfig) -> Result<SnapshotDoc> {
    if cfg.nodes < 2 {
        return Err(Error::InvalidConfig("need at least 2 nodes".into()));
    }
    if cfg.channels + 1 < cfg.nodes {
        return Err(Error::InvalidConfig(
            "need at least nodes - 1 channels to attach every node".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let width = cfg.nodes.to_string().len().max(4);
    let key = |i: usize| format!("n{i:0width$}");
    let nodes: Vec<NodeRecord> = (0..cfg.nodes).map(|i| NodeRecord { id: key(i) }).collect();

    let m = (cfg.channels / (cfg.nodes - 1)).max(1);
    let mut endpoint_bag: Vec<usize> = vec![0, 1];
    let mut channels: Vec<ChannelRecord> = Vec::with_capacity(cfg.channels);
    let mut add_channel = |rng: &mut ChaCha20Rng, bag: &mut Vec<usize>, a: usize, b: usize| {
        channels.push(ChannelRecord {
            node1: key(a),
            node2: key(b),
            capacity_sat: sample_capacity(rng, cfg.capacity_range),
            policy1: sample_policy(rng, cfg).record(),
            policy2: sample_policy(rng, cfg).record(),
        });
        bag.push(a);
        bag.push(b);
    };
    add_channel(&mut rng, &mut endpoint_bag, 0, 1);

    for new in 2..cfg.nodes {
        let want = m.min(new);
        let mut picked = Vec::with_capacity(want);
        let mut attempts = 0;
        while picked.len() < want && attempts < 50 * want {
            attempts += 1;
            let target = endpoint_bag[rng.gen_range(0..endpoint_bag.len())];
            if target != new && !picked.contains(&target) {
                picked.push(target);
            }
        }
        for target in picked {
            add_channel(&mut rng, &mut endpoint_bag, new, target);
        }
    }
    // Fill remaining budget with extra preferential channels.
    let mut attempts = 0;
    while channels.len() < cfg.channels && attempts < 100 * cfg.channels {
        attempts += 1;
        let a = endpoint_bag[rng.gen_range(0..endpoint_bag.len())];
        let b = endpoint_bag[rng.gen_range(0..endpoint_bag.len())];
        if a != b {
            add_channel(&mut rng, &mut endpoint_bag, a, b);
        }
    }
    Ok(SnapshotDoc { nodes, channels })
}

/// Scale-free graph, built through the snapshot schema so generated
/// files and in-memory graphs cannot drift apart.
pub fn scale_free_graph(cfg: &SynthConfig) -> Result<(PcnGraph, SnapshotStats)> {
    let doc = scale_free_doc(cfg)?;
    snapshot::graph_from_doc(&doc, ChannelPolicy::default())
}

/// Small seeded random digraph with flat integer fees; the workhorse of
/// the verification suites. Edge pairs are distinct, capacities ample.
pub fn random_digraph(seed: u64, nodes: usize, edges: usize, weights: (u64, u64)) -> PcnGraph {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut g = PcnGraph::new();
    let ids: Vec<_> = (0..nodes).map(|i| g.add_node(&format!("v{i}"))).collect();
    let mut pairs: Vec<(usize, usize)> = (0..nodes)
        .flat_map(|u| (0..nodes).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v)
        .collect();
    // Partial Fisher-Yates: the first `edges` slots become the edge set.
    let take = edges.min(pairs.len());
    for i in 0..take {
        let j = rng.gen_range(i..pairs.len());
        pairs.swap(i, j);
    }
    let (wlo, whi) = weights;
    for &(u, v) in pairs.iter().take(take) {
        let w = rng.gen_range(wlo..=whi);
        g.push_edge(ids[u], ids[v], ChannelPolicy::flat(w), 1_000_000_000)
            .expect("distinct endpoints");
    }
    g
}
