//! Graph restructuring for GCN inference plus a traffic/cycle/energy model of
//! a two-pronged accelerator, verified against a functional oracle:
//!
//! - `graph`: ingestion, synthesis, degrees, adjacency normalization
//! - `sparse`: COO/CSR/CSC storage, conversion, permutation, polarization
//! - `partition`: degree classes, edge-balanced subgraphs, groups, layout,
//!   denser/sparser workload split
//! - `sparsify`: loss terms, ratio pruning, patch pruning, the pipeline
//! - `gcn`: the double-precision reference model every schedule is checked
//!   against
//! - `sim`: the two-pronged engine, gathered/distributed baselines, resource
//!   allocation, reports
//! - `render`: PGM heatmaps of adjacency structure

pub mod error;
pub mod gcn;
pub mod graph;
pub mod partition;
pub mod render;
pub mod sim;
pub mod sparse;
pub mod sparsify;

pub use error::{Error, Result};
