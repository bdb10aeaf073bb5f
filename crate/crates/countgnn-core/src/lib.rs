//! Counting logics over graphs and message-passing GNNs over exact rationals.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command-line
//! front end and anything touching the filesystem live in the `countgnn`
//! companion crate.
//!
//! Layout:
//! - [`graph`]: labelled graphs, signals, enumeration, Color Refinement.
//! - [`logic`]: the two-sorted counting logic (syntax, fragments, degrees,
//!   simple form, evaluation) and the two formula translators.
//! - [`gnn`]: feed-forward networks and 1-/2-sided GNN layers.
//! - [`compile`]: GNN-to-GNN transformations.
//! - [`lab`]: the complete-bipartite separation toolkit.
#![no_std]

extern crate alloc;

pub mod compile;
pub mod gnn;
pub mod graph;
pub mod lab;
pub mod logic;
pub mod nat;
pub mod rational;

pub use nat::Nat;
pub use rational::Q;
