//! Stable-graph sums for the ancestor and descendent potentials.

pub mod enumerate;
pub mod genus_one;
pub mod potential;
pub mod weights;

pub use enumerate::{enumerate_stable_graphs, Edge, Leaf, StableGraph, Vertex};
pub use genus_one::{
    f10_closed_form, f10_graph_check, genus_one_ancestor, three_graph_contributions, OneForm,
};
pub use potential::{
    ancestor_potential, basis_input, descendent_potential, potential, EvalOptions, GraphSum, Mode,
    PotentialTable,
};
pub use weights::{LeafInput, WeightContext};
