//! Load-balanced deployment of service function chains onto an edge computing
//! over FiWi access network.
//!
//! Chain stages can be realized as several VNF instances on distinct edge
//! computing nodes (ECNs), with traffic split across them and across multiple
//! optical paths. The crate provides the substrate model ([`topology`]), chain
//! accounting and load-balance metrics ([`chain`]), the numeric kernels
//! ([`solvers`]), the four deployment algorithms ([`placement`]) and the
//! experiment engine ([`simulator`]).

pub mod topology;
pub mod chain;
pub mod placement;
pub mod simulator;
pub mod solvers;
