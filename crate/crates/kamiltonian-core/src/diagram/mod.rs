//! Mixing diagrams: tree skeletons, plane decorations and rooted evaluation.
//!
//! The pipeline mirrors the way diagrams are written down by hand:
//! [`enumerate_unrooted_trees`] lists skeletons, [`decorate`] assigns external
//! excitations, cyclic input orders and internal arrow directions (removing
//! diagrams whose net frequency is non-zero or whose internal excitations are
//! resonant), [`root_at`] turns an outgoing resonant excitation into the
//! output, and [`evaluate_bare`] composes the mixers with the star product.

pub mod decorate;
pub mod rooted;
pub mod tree;

pub use decorate::{decorate, Diagram, Dir, ExtKind, ExtLeg};
pub use rooted::{
    classical_part, evaluate_bare, evaluate_class, propagate, quantum_part, root_at, rootings, symmetrised_product, Leg,
    Node, RootedDiagram,
};
pub use tree::{enumerate_unrooted_trees, UnrootedTree};
