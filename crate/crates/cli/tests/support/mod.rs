//! Oracles and generators shared by the acceptance suite.

pub mod graph;
pub mod programs;
