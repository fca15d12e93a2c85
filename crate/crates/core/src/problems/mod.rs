//! Problem instances and reference data structures for each adaptivity class.

mod counterexamples;
mod disjointness;
mod indexing;
mod prefix;

pub use counterexamples::{BinarySearchDs, CopyCellDs, CopyCellUpdate, DroppedUpdate};
pub use disjointness::{disjointness_bitset, DisjointnessBitset, DisjointnessInstance};
pub use indexing::{
    indexing_baseline_colcopy, indexing_baseline_register, IndexingColCopy, IndexingInstance,
    IndexingRegister,
};
pub use prefix::{dyadic_decomposition, prefix_sum_range_tree, Dyadic};
