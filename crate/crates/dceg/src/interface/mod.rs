//! Spec files, serializers and the command line.

pub mod cli;
pub mod csv;
pub mod dot;
pub mod model;
pub mod spec;
