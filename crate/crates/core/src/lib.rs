//! Tree-guided regression with compositional covariates.

pub mod error;
pub mod face;
pub mod io;
pub mod penalty;
pub mod recovery;
pub mod selection;
pub mod sim;
pub mod solver;
pub mod tree;

pub use error::{Error, Result};
pub use penalty::{build_d, PenaltyMatrix};
pub use recovery::{build_q, QSystem};
pub use solver::{center_alpha, kkt_check, solve, SolverConfig, SolverSolution};
pub use tree::{build_tree, CompositionalTree};
