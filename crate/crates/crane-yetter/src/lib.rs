//! Crane–Yetter state sums for triangulated closed oriented 4-manifolds,
//! computed exactly over cyclotomic rings at quantum sl(2) level `r`, together
//! with a simplicial homology oracle and closed-form topological predictions.

pub mod scalars;
mod fixed;
pub mod qcategory;
pub mod network;
pub mod simplicial;
pub mod homology;
pub mod statesum;
pub mod tqft;
