//! Column protocol for a depth-2 circuit computing `P = A·B` over GF(2).
//!
//! With `A = M`, column `ℓ` of `P` under `B = e_{k,ℓ}` is column `k` of `M`.
//! The encoder records the interior gates feeding column `ℓ` of the output
//! with `B = 0`, then for every `k` the gates fed by `B[k,ℓ]` with
//! `B = e_{k,ℓ}`. That is enough to evaluate column `ℓ` of `P` for every `k`.

use std::collections::BTreeMap;

use super::message::{Message, RecordKind};
use crate::circuits::{verify_mm_circuit, Depth2Circuit, MmLayout};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Seed and trial count for the spot check run before encoding.
const SPOT_CHECK_SEED: u64 = 0x6d6d;
const SPOT_CHECK_TRIALS: usize = 32;

/// Interior gates wired into any output of column `l`, ascending.
fn gates_into_column(c: &Depth2Circuit, layout: MmLayout, l: usize) -> Vec<usize> {
    let mut gates: Vec<usize> = (0..layout.d)
        .flat_map(|i| c.outputs()[layout.p(i, l)].inputs.iter().copied())
        .collect();
    gates.sort_unstable();
    gates.dedup();
    gates
}

/// `(t_u, t_q)` for column `l`: wires leaving `B[·,l]` and wires entering `P[·,l]`.
pub(crate) fn column_message_bound(c: &Depth2Circuit, layout: MmLayout, l: usize) -> (usize, usize) {
    let tu = (0..layout.d).map(|k| c.input_fanout(layout.b(k, l))).sum();
    let tq = (0..layout.d).map(|i| c.outputs()[layout.p(i, l)].fanin()).sum();
    (tu, tq)
}

fn check_args(c: &Depth2Circuit, d: usize, m: &BitMatrix, l: usize) -> Result<()> {
    if m.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            op: "column protocol",
            left_rows: d,
            left_cols: d,
            right_rows: m.rows(),
            right_cols: m.cols(),
        });
    }
    if l >= d {
        return Err(Error::Domain(format!("column {l} outside [0, {d})")));
    }
    verify_mm_circuit(c, d, SPOT_CHECK_TRIALS, SPOT_CHECK_SEED)
}

pub(crate) fn encode_column_unchecked(
    c: &Depth2Circuit,
    layout: MmLayout,
    m: &BitMatrix,
    l: usize,
) -> Result<Message> {
    let d = layout.d;
    let zero = BitMatrix::zeros(d, d);
    let mut msg = Message::new();
    msg.begin_section("column_gates");
    let (mid, _) = c.evaluate_layers(&layout.inputs(m, &zero))?;
    for g in gates_into_column(c, layout, l) {
        msg.push_bit(RecordKind::GateValue, mid[g]);
    }
    msg.begin_section("unit_columns");
    for k in 0..d {
        let mut e = BitMatrix::zeros(d, d);
        e.set(k, l, true);
        let (mid, _) = c.evaluate_layers(&layout.inputs(m, &e))?;
        for g in c.gates_fed_by_input(layout.b(k, l)) {
            msg.push_bit(RecordKind::GateValue, mid[g]);
        }
    }
    Ok(msg)
}

pub(crate) fn decode_column_unchecked(
    msg: &Message,
    c: &Depth2Circuit,
    layout: MmLayout,
    l: usize,
) -> Result<BitMatrix> {
    let d = layout.d;
    let mut reader = msg.reader();
    let mut base = BTreeMap::new();
    for g in gates_into_column(c, layout, l) {
        base.insert(g, reader.take_bit()?);
    }
    let mut m = BitMatrix::zeros(d, d);
    for k in 0..d {
        let mut unit = BTreeMap::new();
        for g in c.gates_fed_by_input(layout.b(k, l)) {
            unit.insert(g, reader.take_bit()?);
        }
        for i in 0..d {
            let v = c.output_value(layout.p(i, l), |g| {
                unit.get(&g).or_else(|| base.get(&g)).copied().unwrap_or(false)
            });
            m.set(i, k, v);
        }
    }
    reader.finish()?;
    Ok(m)
}

pub fn mm_column_encode(c: &Depth2Circuit, d: usize, m: &BitMatrix, l: usize) -> Result<Message> {
    check_args(c, d, m, l)?;
    encode_column_unchecked(c, MmLayout::new(d), m, l)
}

pub fn mm_column_decode(msg: &Message, c: &Depth2Circuit, d: usize, l: usize) -> Result<BitMatrix> {
    if l >= d {
        return Err(Error::Domain(format!("column {l} outside [0, {d})")));
    }
    verify_mm_circuit(c, d, SPOT_CHECK_TRIALS, SPOT_CHECK_SEED)?;
    decode_column_unchecked(msg, c, MmLayout::new(d), l)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmColumnReport {
    pub column: usize,
    pub length_bits: usize,
    pub t_u: usize,
    pub t_q: usize,
    pub entropy_bits: usize,
    pub roundtrip: bool,
}

impl MmColumnReport {
    pub fn passed(&self) -> bool {
        self.roundtrip
            && self.length_bits <= self.t_u + self.t_q
            && self.length_bits >= self.entropy_bits
    }
}

pub fn verify_mm_column(
    c: &Depth2Circuit,
    d: usize,
    m: &BitMatrix,
    l: usize,
) -> Result<MmColumnReport> {
    let msg = mm_column_encode(c, d, m, l)?;
    let layout = MmLayout::new(d);
    let (t_u, t_q) = column_message_bound(c, layout, l);
    let roundtrip = matches!(decode_column_unchecked(&msg, c, layout, l), Ok(ref out) if out == m);
    Ok(MmColumnReport {
        column: l,
        length_bits: msg.bit_len(),
        t_u,
        t_q,
        entropy_bits: d * d,
        roundtrip,
    })
}
