//! Encoding arguments as runnable compression protocols. Each round trip is a
//! concrete witness that the structure's probes carry enough information to
//! rebuild its input.

mod disjointness;
mod indexing;
mod matmul;
mod message;

use std::fmt;

pub use disjointness::{
    audit_single_inserts, decode_disjointness, encode_disjointness, verify_disjointness,
    MAX_DISJOINTNESS_N,
};
pub use indexing::{decode_indexing, encode_indexing, query_union, verify_indexing};
pub use matmul::{mm_column_decode, mm_column_encode, verify_mm_column, MmColumnReport};
pub(crate) use matmul::{column_message_bound, encode_column_unchecked, decode_column_unchecked};
pub use message::{Message, MessageReader, Record, RecordKind, Section};

/// Outcome of one encode/decode round trip.
#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub protocol: &'static str,
    pub details: Vec<(&'static str, String)>,
    pub length_bits: usize,
    /// Length predicted by the protocol's accounting formula.
    pub formula_bits: usize,
    /// Entropy of a uniformly random input.
    pub entropy_bits: usize,
    pub roundtrip: bool,
    pub failure: Option<String>,
    pub message: Message,
}

impl ProtocolReport {
    pub(crate) fn failed(protocol: &'static str, entropy_bits: usize, failure: String) -> Self {
        ProtocolReport {
            protocol,
            details: Vec::new(),
            length_bits: 0,
            formula_bits: 0,
            entropy_bits,
            roundtrip: false,
            failure: Some(failure),
            message: Message::new(),
        }
    }

    /// A lossless round trip using fewer bits than the input entropy.
    pub fn sub_entropy(&self) -> bool {
        self.roundtrip && self.length_bits < self.entropy_bits
    }

    pub fn passed(&self) -> bool {
        self.roundtrip
            && self.failure.is_none()
            && self.length_bits == self.formula_bits
            && !self.sub_entropy()
    }
}

impl fmt::Display for ProtocolReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "protocol={}", self.protocol)?;
        for (k, v) in &self.details {
            writeln!(f, "{k}={v}")?;
        }
        writeln!(f, "length_bits={}", self.length_bits)?;
        writeln!(f, "formula_bits={}", self.formula_bits)?;
        writeln!(f, "entropy_bits={}", self.entropy_bits)?;
        writeln!(f, "roundtrip={}", self.roundtrip)?;
        if let Some(why) = &self.failure {
            writeln!(f, "failure={why}")?;
        }
        write!(f, "result={}", if self.passed() { "PASS" } else { "FAIL" })
    }
}
