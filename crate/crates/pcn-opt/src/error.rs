//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fee arithmetic overflowed: base_fee={base_fee}, fee_rate_ppm={fee_rate_ppm}, tx={tx}")]
    FeeOverflow {
        base_fee: u64,
        fee_rate_ppm: u64,
        tx: u64,
    },
    #[error("transaction amount must be at least 1 satoshi")]
    ZeroTxAmount,
    #[error("unknown node: {0}")]
    UnknownNode(String),
    #[error("channel endpoints must differ: {0}")]
    SelfChannel(String),
    #[error("strategic channel already exists: {a} -> {peer}")]
    DuplicateChannel { a: String, peer: String },
    #[error("strategic channel not found: {a} -> {peer}")]
    MissingChannel { a: String, peer: String },
    #[error("path count exceeded the u64 range; tie structure too degenerate")]
    PathCountOverflow,
    #[error("zero-cost cycle on shortest paths; path counts are undefined")]
    ZeroCostCycle,
    #[error("strategic edges must have positive weight at the configured amount")]
    ZeroWeightStrategicEdge,
    #[error("fee {fee} outside search domain [{lo}, {hi}]")]
    FeeOutOfRange { fee: u64, lo: u64, hi: u64 },
    #[error("invalid fee interval: lo={lo}, hi={hi}, d={d}")]
    InvalidInterval { lo: u64, hi: u64, d: u64 },
    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("snapshot contains no usable nodes")]
    EmptySnapshot,
    #[error("need at least {needed} candidate nodes, found {found}")]
    NotEnoughCandidates { needed: usize, found: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("snapshot parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv write error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
