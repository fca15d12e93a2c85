use std::fmt;

use super::{Depth2Circuit, Gate, GateKind};
use crate::cellprobe::{Cells, DynamicDs};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// A linear data structure in matrix form. Cell `c` holds row `c` of `V`
/// dotted with the input array; query `j` XORs the cells in row `j` of `Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearDs {
    v: BitMatrix,
    q: BitMatrix,
}

impl LinearDs {
    pub fn new(v: BitMatrix, q: BitMatrix) -> Result<Self> {
        if q.cols() != v.rows() {
            return Err(Error::DimensionMismatch {
                op: "linear structure",
                left_rows: q.rows(),
                left_cols: q.cols(),
                right_rows: v.rows(),
                right_cols: v.cols(),
            });
        }
        Ok(LinearDs { v, q })
    }

    pub fn cells(&self) -> usize {
        self.v.rows()
    }

    pub fn inputs(&self) -> usize {
        self.v.cols()
    }

    pub fn queries(&self) -> usize {
        self.q.rows()
    }

    pub fn v(&self) -> &BitMatrix {
        &self.v
    }

    pub fn q(&self) -> &BitMatrix {
        &self.q
    }

    /// The operator `Q·V` this structure answers.
    pub fn operator(&self) -> BitMatrix {
        self.q.mat_mul(&self.v).expect("shapes checked at construction")
    }

    pub fn update_times(&self) -> Vec<usize> {
        self.v.col_weights()
    }

    pub fn query_times(&self) -> Vec<usize> {
        self.q.row_weights()
    }

    pub fn wires(&self) -> usize {
        self.v.total_weight() + self.q.total_weight()
    }

    pub fn wire_bounds(&self) -> WireBounds {
        let ut = self.update_times();
        let qt = self.query_times();
        WireBounds {
            n: self.inputs(),
            m: self.queries(),
            cells: self.cells(),
            v_weight: self.v.total_weight(),
            q_weight: self.q.total_weight(),
            max_tu: ut.iter().copied().max().unwrap_or(0),
            max_tq: qt.iter().copied().max().unwrap_or(0),
        }
    }

    fn address_bits(&self) -> u32 {
        let s = self.cells() as u64;
        (u64::BITS - s.saturating_sub(1).leading_zeros()).max(1)
    }
}

/// Wire accounting of a linear structure against the depth-2 compiler bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireBounds {
    pub n: usize,
    pub m: usize,
    pub cells: usize,
    pub v_weight: usize,
    pub q_weight: usize,
    pub max_tu: usize,
    pub max_tq: usize,
}

impl WireBounds {
    pub fn wires(&self) -> usize {
        self.v_weight + self.q_weight
    }

    /// `n·t_u + m·t_q` with worst-case times.
    pub fn worst_case_bound(&self) -> usize {
        self.n * self.max_tu + self.m * self.max_tq
    }

    pub fn avg_tu(&self) -> f64 {
        ratio(self.v_weight, self.n)
    }

    pub fn avg_tq(&self) -> f64 {
        ratio(self.q_weight, self.m)
    }

    /// Upper bounds on the averages implied by the circuit size: `s/n` and `s/m`.
    pub fn avg_tu_bound(&self) -> f64 {
        ratio(self.wires(), self.n)
    }

    pub fn avg_tq_bound(&self) -> f64 {
        ratio(self.wires(), self.m)
    }

    /// Every inequality checked on integers: `s <= n·t_u + m·t_q`,
    /// `Σt_u <= s` and `Σt_q <= s` (the averaged forms multiplied through).
    pub fn holds(&self) -> bool {
        self.wires() <= self.worst_case_bound()
            && self.v_weight <= self.wires()
            && self.q_weight <= self.wires()
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl fmt::Display for WireBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inputs={}", self.n)?;
        writeln!(f, "outputs={}", self.m)?;
        writeln!(f, "cells={}", self.cells)?;
        writeln!(f, "wires={}", self.wires())?;
        writeln!(f, "weight_v={}", self.v_weight)?;
        writeln!(f, "weight_q={}", self.q_weight)?;
        writeln!(f, "max_tu={}", self.max_tu)?;
        writeln!(f, "max_tq={}", self.max_tq)?;
        writeln!(f, "bound_n_tu_plus_m_tq={}", self.worst_case_bound())?;
        writeln!(f, "avg_tu={:.6}", self.avg_tu())?;
        writeln!(f, "avg_tu_bound={:.6}", self.avg_tu_bound())?;
        writeln!(f, "avg_tq={:.6}", self.avg_tq())?;
        write!(f, "avg_tq_bound={:.6}", self.avg_tq_bound())
    }
}

/// Cells hold single bits; the word size is just wide enough to address every
/// cell.
impl DynamicDs for LinearDs {
    type Input = Vec<bool>;
    /// Flip input position `i`.
    type Update = usize;
    type Query = usize;
    type Answer = bool;

    fn word_bits(&self) -> u32 {
        self.address_bits()
    }

    fn preprocess(&self, input: &Vec<bool>, cells: &mut dyn Cells) -> Result<()> {
        let stored = self.v.mul_vec(input)?;
        for (c, b) in stored.into_iter().enumerate() {
            cells.write(c as u64, b as u64)?;
        }
        Ok(())
    }

    fn update(&self, &i: &usize, cells: &mut dyn Cells) -> Result<()> {
        if i >= self.inputs() {
            return Err(Error::Domain(format!(
                "update position {i} outside [0, {})",
                self.inputs()
            )));
        }
        for c in self.v.col_support(i) {
            let old = cells.read(c as u64)?;
            cells.write(c as u64, (old ^ 1) & 1)?;
        }
        Ok(())
    }

    fn query(&self, &j: &usize, cells: &mut dyn Cells) -> Result<bool> {
        if j >= self.queries() {
            return Err(Error::Domain(format!(
                "query {j} outside [0, {})",
                self.queries()
            )));
        }
        let mut acc = 0;
        for c in self.q.row_support(j) {
            acc ^= cells.read(c as u64)? & 1;
        }
        Ok(acc == 1)
    }

    fn query_schedule(&self, &j: &usize) -> Option<Vec<u64>> {
        (j < self.queries()).then(|| self.q.row_support(j).into_iter().map(|c| c as u64).collect())
    }

    fn update_schedule(&self, &i: &usize) -> Option<Vec<u64>> {
        (i < self.inputs()).then(|| self.v.col_support(i).into_iter().map(|c| c as u64).collect())
    }
}

/// Input `i` feeds every cell it updates; output `j` reads every cell it queries.
pub fn ds_to_circuit(ds: &LinearDs) -> Depth2Circuit {
    let middle = (0..ds.cells()).map(|c| Gate::xor(ds.v.row_support(c))).collect();
    let outputs = (0..ds.queries()).map(|j| Gate::xor(ds.q.row_support(j))).collect();
    Depth2Circuit::new(ds.inputs(), middle, outputs).expect("supports are in range")
}

pub fn circuit_to_ds(circuit: &Depth2Circuit) -> Result<LinearDs> {
    if let Some((layer, idx)) = circuit
        .middle()
        .iter()
        .enumerate()
        .map(|(i, g)| ("middle", i, g))
        .chain(circuit.outputs().iter().enumerate().map(|(i, g)| ("output", i, g)))
        .find(|(_, _, g)| g.kind != GateKind::Xor)
        .map(|(l, i, _)| (l, i))
    {
        return Err(Error::InvalidParameter(format!(
            "{layer} gate {idx} is not XOR; only linear circuits become linear structures"
        )));
    }
    let s = circuit.middle().len();
    let mut v = BitMatrix::zeros(s, circuit.n_inputs());
    for (c, g) in circuit.middle().iter().enumerate() {
        for &i in &g.inputs {
            v.set(c, i, true);
        }
    }
    let mut q = BitMatrix::zeros(circuit.outputs().len(), s);
    for (j, g) in circuit.outputs().iter().enumerate() {
        for &c in &g.inputs {
            q.set(j, c, true);
        }
    }
    LinearDs::new(v, q)
}
