//! Train routing with headways and min-max arc-disjoint paths.
//!
//! A train instance routes `d` identical trains from source to sink; two trains entering the
//! same arc must be at least `Δ` apart. Convoy routings (disjoint paths, trains in single file)
//! are produced by uncrossing, by flows over time, or by a reduction to the problem of finding
//! `k` arc-disjoint paths with small maximum length, which is solved on series-parallel graphs
//! by a dynamic program over the decomposition tree.

pub mod bench;
pub mod dp;
pub mod error;
pub mod flow;
pub mod gen;
pub mod graph;
pub mod io;
pub mod maxflow;
pub mod oracle;
pub mod profile;
pub mod ratio;
pub mod reduction;
pub mod spdecomp;
pub mod tmo;
pub mod uncross;

pub use error::{Error, Result};
pub use graph::{Arc, ArcId, ArcPath, Digraph, NodeId};
pub use profile::PathProfile;
pub use tmo::{ConvoyRouting, TmoInstance, TrainRouting, TrainSchedule};
