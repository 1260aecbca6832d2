pub mod centrality;
pub mod error;
pub mod graph;
mod paths;

pub use error::{Error, Result};
