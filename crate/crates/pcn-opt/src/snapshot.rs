//! Normalized snapshot JSON: the on-disk network format the experiment
//! harness ingests and the synthetic generator emits.
//!
//! Schema: a top-level object with `nodes: [{"id": string}]` and
//! `channels: [{node1, node2, capacity_sat, policy1?, policy2?}]`,
//! where `policy1` governs the `node1 -> node2` direction. Missing
//! policies fall back to the default policy and are counted.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ChannelPolicy, PcnGraph};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PolicyRecord {
    pub base_fee: u64,
    pub fee_rate_ppm: u64,
}

impl From<ChannelPolicy> for PolicyRecord {
    fn from(p: ChannelPolicy) -> Self {
        Self {
            base_fee: p.base_fee,
            fee_rate_ppm: p.fee_rate_ppm,
        }
    }
}

impl From<PolicyRecord> for ChannelPolicy {
    fn from(p: PolicyRecord) -> Self {
        ChannelPolicy::new(p.base_fee, p.fee_rate_ppm)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: String,
}

/// One channel as written by generators and converters. Both directions
/// share the capacity; `policy1` is the `node1 -> node2` direction.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ChannelRecord {
    pub node1: String,
    pub node2: String,
    pub capacity_sat: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy1: Option<PolicyRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy2: Option<PolicyRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SnapshotDoc {
    pub nodes: Vec<NodeRecord>,
    pub channels: Vec<ChannelRecord>,
}

/// Lenient mirror of `ChannelRecord` for ingestion: individual channels
/// with missing fields are skipped and counted, not fatal.
#[derive(Debug, Deserialize)]
struct RawChannel {
    #[serde(default)]
    node1: Option<String>,
    #[serde(default)]
    node2: Option<String>,
    #[serde(default)]
    capacity_sat: Option<u64>,
    #[serde(default)]
    policy1: Option<PolicyRecord>,
    #[serde(default)]
    policy2: Option<PolicyRecord>,
}

#[derive(Debug, Deserialize)]
struct RawDoc {
    #[serde(default)]
    nodes: Vec<NodeRecord>,
    #[serde(default)]
    channels: Vec<RawChannel>,
}

/// Ingestion summary: what was read, what was defaulted, what was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotStats {
    pub nodes: usize,
    pub directed_edges: usize,
    /// Channels that had at least one missing policy defaulted.
    pub defaulted_policy_channels: usize,
    /// Channels dropped as malformed (missing fields, unknown nodes, loops).
    pub skipped_channels: usize,
}

fn graph_from_raw(doc: RawDoc, default_policy: ChannelPolicy) -> Result<(PcnGraph, SnapshotStats)> {
    let mut graph = PcnGraph::new();
    for node in &doc.nodes {
        graph.add_node(&node.id);
    }
    if graph.node_count() == 0 {
        return Err(Error::EmptySnapshot);
    }
    let mut defaulted = 0usize;
    let mut skipped = 0usize;
    for ch in doc.channels {
        let (Some(n1), Some(n2), Some(cap)) = (ch.node1, ch.node2, ch.capacity_sat) else {
            skipped += 1;
            continue;
        };
        let (Some(a), Some(b)) = (graph.node(&n1), graph.node(&n2)) else {
            skipped += 1;
            continue;
        };
        if a == b {
            skipped += 1;
            continue;
        }
        if ch.policy1.is_none() || ch.policy2.is_none() {
            defaulted += 1;
        }
        let p1 = ch.policy1.map_or(default_policy, Into::into);
        let p2 = ch.policy2.map_or(default_policy, Into::into);
        graph.push_edge(a, b, p1, cap)?;
        graph.push_edge(b, a, p2, cap)?;
    }
    let stats = SnapshotStats {
        nodes: graph.node_count(),
        directed_edges: graph.edge_count(),
        defaulted_policy_channels: defaulted,
        skipped_channels: skipped,
    };
    Ok((graph, stats))
}

/// Parse a snapshot from JSON text.
pub fn parse_snapshot(
    json: &str,
    default_policy: ChannelPolicy,
) -> Result<(PcnGraph, SnapshotStats)> {
    let raw: RawDoc = serde_json::from_str(json)?;
    graph_from_raw(raw, default_policy)
}

/// Read and parse a snapshot file.
pub fn ingest_snapshot(
    path: &Path,
    default_policy: ChannelPolicy,
) -> Result<(PcnGraph, SnapshotStats)> {
    let raw: RawDoc = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    graph_from_raw(raw, default_policy)
}

/// Build a graph from an in-memory document (generator output).
pub fn graph_from_doc(
    doc: &SnapshotDoc,
    default_policy: ChannelPolicy,
) -> Result<(PcnGraph, SnapshotStats)> {
    let raw = RawDoc {
        nodes: doc.nodes.clone(),
        channels: doc
            .channels
            .iter()
            .map(|c| RawChannel {
                node1: Some(c.node1.clone()),
                node2: Some(c.node2.clone()),
                capacity_sat: Some(c.capacity_sat),
                policy1: c.policy1.clone(),
                policy2: c.policy2.clone(),
            })
            .collect(),
    };
    graph_from_raw(raw, default_policy)
}

pub fn write_snapshot<W: Write>(doc: &SnapshotDoc, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, doc)?;
    out.write_all(b"\n")?;
    Ok(())
}
