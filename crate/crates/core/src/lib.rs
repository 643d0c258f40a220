//! Tautological classes on moduli of stable curves and Hurwitz loci of
//! admissible G-covers.

pub mod covers;
pub mod error;
pub mod ggraph;
pub mod graph;
pub mod hurwitz;
pub mod rational;
pub mod strata;
pub mod taut;
pub mod witten;

pub use error::{Error, Result};
pub use rational::Q;
