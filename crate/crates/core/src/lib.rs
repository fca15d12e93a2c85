//! A laboratory for the cell probe model over GF(2).
//!
//! - [`cellprobe`]: word memory with full probe logs, and checkers for
//!   non-adaptive queries and memoryless updates.
//! - [`problems`]: indexing, set disjointness and prefix sums, with reference
//!   structures at both ends of each trade-off.
//! - [`encodings`]: encode/decode protocols whose message lengths witness
//!   information-theoretic lower bounds.
//! - [`circuits`]: depth-2 circuits, the compiler between linear structures
//!   and linear circuits, and minimum-wire factorization.
//! - [`operators`]: incidence operators and their discrepancy, spectrum and
//!   overlap profiles.

pub mod cellprobe;
pub mod circuits;
pub mod encodings;
pub mod error;
pub mod gf2;
pub mod operators;
pub mod problems;

pub use error::{Error, Result};
pub use gf2::BitMatrix;
