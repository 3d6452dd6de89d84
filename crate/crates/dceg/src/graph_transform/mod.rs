//! Positions, the NT-DCEG construction and the subgraph algebra.

pub mod algebra;
pub mod graph;
pub mod ntdceg;
pub mod positions;

pub use algebra::{ceg_at, contract_phi, decompose, direct_ceg, direct_ceg_at, isomorphic, AGraph, Decomposition, VKey};
pub use graph::{tree_graph, ColouredGraph, Edge, Marker, Node, NodeKind};
pub use ntdceg::{build_ntdceg, from_staged, BuildError, Ntdceg, Truncation};
pub use positions::{compute_positions, refines, PositionMode};
