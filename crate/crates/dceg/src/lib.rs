//! N time-slice dynamic chain event graphs.
//!
//! Build a staged tree from a time-invariant tree and a per-slice template,
//! fold it into a finite NT-DCEG, project it onto a Markov chain, rebuild the
//! CEG of any finite horizon and read context-specific independences.

pub mod graph_transform;
pub mod interface;
pub mod markov;
pub mod query;
pub mod staging;
pub mod tree_core;
