//! Dual-unitary and 2-unitary bipartite gates: construction by nonlinear
//! polar-projection maps, two-qubit Cartan analytics, combinatorial designs
//! and local-unitary equivalence tests.

pub mod cartan;
pub mod config;
pub mod designs;
pub mod equivalence;
pub mod error;
pub mod linalg;
pub mod maps;
pub mod measures;
pub mod verify;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use linalg::{BipartiteUnitary, ComplexMatrix, RngStream, C64};
