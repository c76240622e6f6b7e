//! Flux-charge symmetric analysis of embedded superconducting circuits.

pub mod analysis;
pub mod checks;
pub mod cli;
pub mod duality;
pub mod dynamics;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod reduction;
