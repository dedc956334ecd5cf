//! Exact certification of slope/weight combinatorics for crystalline
//! Galois representations attached to symplectic and orthogonal groups.

pub mod admissibility;
pub mod conj_trace;
pub mod lattice_core;
pub mod local_symbols;
pub mod principal_series;
pub mod replay;
pub mod report;
pub mod satake;
pub mod scalar;

pub use scalar::{Rat, Scalar, SmallRat};
