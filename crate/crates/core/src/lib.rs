//! Numerical tensor calculus for recursion operators: Nijenhuis and
//! Haantjes torsion, the Yano-Ako bracket, the `d_K` differential, and
//! certification of Haantjes manifolds with their WDVV structure, induced
//! flat metric and hydrodynamic flows.

pub mod certifier;
pub mod concomitants;
pub mod error;
pub mod expr;
pub mod geom;
pub mod hydro;
pub mod jet;
pub mod linalg;
pub mod manifest;
pub mod report;
pub mod symmetry;

pub use error::{Error, Result};
