//! Persistent homology of point clouds at a fixed scale, computed by cutting
//! the cloud into overlapping grid cells, solving each cell independently and
//! gluing the answers back together with exact sequences.
//!
//! The main entry point is [`engine::run`]; [`reduction::persistence_barcode`]
//! gives the global answer for comparison.

// NaN-rejecting comparisons like `!(x > 0.0)` are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod cloud;
pub mod complex;
pub mod covering;
pub mod engine;
pub mod error;
pub mod field;
pub mod mv;
pub mod reduction;
pub mod scheduler;
pub mod solver;
pub mod sparse;

pub use chain::{Chain, Simplex};
pub use cloud::{NeighborGraph, PointCloud};
pub use complex::RipsComplex;
pub use covering::{choose_k, Covering, KChoice, Region};
pub use engine::{BettiReport, Engine, EngineConfig};
pub use error::{Error, Result};
pub use field::PrimeField;
pub use mv::{AssemblyOptions, MvNode};
pub use reduction::{persistence_barcode, Bar, BarcodeOptions, LeafSolver};
pub use solver::Solver;
