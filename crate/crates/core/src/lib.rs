//! Flexibility structure of bipartite supply/demand networks.
//!
//! A [`ProblemInstance`] pairs demand rates `nu` and supply rates `mu` with
//! a compatibility edge set `E`. The crate computes which edges can never
//! carry flow, decomposes the rest into maximal *complete resource pooling*
//! (CRP) subgraphs, designs minimum-edge graphs with a prescribed number of
//! such subgraphs, plans edge additions, measures robustness to demand
//! shifts, and simulates MaxWeight queues on the result.

pub mod augmentation;
pub mod cli;
pub mod decomposition;
pub mod design;
pub mod error;
pub mod flow;
pub mod instance;
pub mod oracle;
pub mod planning;
pub mod polytope;
pub mod rational;
pub mod robustness;
pub mod sim;
pub mod unionfind;

pub use error::{Error, Result};
pub use instance::{Assignment, Edge, ProblemInstance};
pub use rational::Q;
