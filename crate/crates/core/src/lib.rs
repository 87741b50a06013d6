//! Sums of dilates `lambda_1 . A + ... + lambda_h . A`: exact sumset arithmetic,
//! binary digit graphs of coefficient tuples, biclique partitions of those
//! graphs, the exponent bounds they induce, and an empirical verifier for the
//! underlying sumset inequalities.

pub mod biclique;
pub mod digits;
pub mod exponents;
pub mod graph;
pub mod rng;
pub mod sets;
pub mod verify;

pub use biclique::{Algo, Biclique, Decomposition, SolverParams};
pub use digits::{build_digit_graph, DigitGraph};
pub use exponents::{exponent_report, Exponent, ExponentReport};
pub use graph::BipartiteGraph;
pub use sets::{IntSet, Rational};
