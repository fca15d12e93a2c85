use std::collections::HashSet;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Depth2Circuit, Gate, GateKind, Wire};
use crate::encodings::{column_message_bound, decode_column_unchecked, encode_column_unchecked};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Wire numbering for `d×d` matrix multiplication: inputs are `A` then `B`,
/// each row-major; output `P[i][l]` is number `i·d + l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MmLayout {
    pub d: usize,
}

impl MmLayout {
    pub fn new(d: usize) -> Self {
        MmLayout { d }
    }

    pub fn a(&self, i: usize, k: usize) -> usize {
        i * self.d + k
    }

    pub fn b(&self, k: usize, l: usize) -> usize {
        self.d * self.d + k * self.d + l
    }

    pub fn p(&self, i: usize, l: usize) -> usize {
        i * self.d + l
    }

    pub fn inputs(&self, a: &BitMatrix, b: &BitMatrix) -> Vec<bool> {
        let d = self.d;
        let mut x = vec![false; 2 * d * d];
        for i in 0..d {
            for k in 0..d {
                x[self.a(i, k)] = a.get(i, k);
                x[self.b(i, k)] = b.get(i, k);
            }
        }
        x
    }
}

/// One AND gate per `(i, k, l)`, one XOR per output entry. `s(C) = 3d³`.
pub fn naive_mm_circuit(d: usize) -> Result<Depth2Circuit> {
    if d == 0 {
        return Err(Error::InvalidParameter("matrix dimension must be at least 1".into()));
    }
    let lay = MmLayout::new(d);
    let gate = |i: usize, k: usize, l: usize| (i * d + k) * d + l;
    let mut middle = Vec::with_capacity(d * d * d);
    for i in 0..d {
        for k in 0..d {
            for l in 0..d {
                middle.push(Gate::new(GateKind::And, [lay.a(i, k), lay.b(k, l)]));
            }
        }
    }
    let mut outputs = Vec::with_capacity(d * d);
    for i in 0..d {
        for l in 0..d {
            outputs.push(Gate::xor((0..d).map(|k| gate(i, k, l))));
        }
    }
    Depth2Circuit::new(2 * d * d, middle, outputs)
}

fn check_product(c: &Depth2Circuit, lay: MmLayout, a: &BitMatrix, b: &BitMatrix) -> Result<()> {
    let expected = a.mat_mul(b)?;
    let out = c.evaluate(&lay.inputs(a, b))?;
    for i in 0..lay.d {
        for l in 0..lay.d {
            if out[lay.p(i, l)] != expected.get(i, l) {
                return Err(Error::Correctness(format!(
                    "circuit gives P[{i}][{l}] = {} for A = {a:?}, B = {b:?}",
                    out[lay.p(i, l)] as u8
                )));
            }
        }
    }
    Ok(())
}

/// Checks `c` against the GF(2) product on fixed corner cases, every pair of
/// matching unit matrices, and `trials` random pairs.
pub fn verify_mm_circuit(c: &Depth2Circuit, d: usize, trials: usize, seed: u64) -> Result<()> {
    if c.n_inputs() != 2 * d * d || c.outputs().len() != d * d {
        return Err(Error::InvalidParameter(format!(
            "a {d}x{d} multiplier needs {} inputs and {} outputs, circuit has {} and {}",
            2 * d * d,
            d * d,
            c.n_inputs(),
            c.outputs().len()
        )));
    }
    let lay = MmLayout::new(d);
    let zero = BitMatrix::zeros(d, d);
    let ones = BitMatrix::ones(d, d);
    check_product(c, lay, &zero, &zero)?;
    check_product(c, lay, &ones, &zero)?;
    check_product(c, lay, &zero, &ones)?;
    check_product(c, lay, &ones, &ones)?;
    for i in 0..d {
        for k in 0..d {
            let mut ea = BitMatrix::zeros(d, d);
            ea.set(i, k, true);
            for l in 0..d {
                let mut eb = BitMatrix::zeros(d, d);
                eb.set(k, l, true);
                check_product(c, lay, &ea, &eb)?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let a = BitMatrix::random(d, d, &mut rng);
        let b = BitMatrix::random(d, d, &mut rng);
        check_product(c, lay, &a, &b)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmColumnAudit {
    pub column: usize,
    pub t_u: usize,
    pub t_q: usize,
    pub message_bits: usize,
    pub roundtrips: usize,
    pub trials: usize,
}

impl MmColumnAudit {
    pub fn sum(&self) -> usize {
        self.t_u + self.t_q
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmAudit {
    pub d: usize,
    pub wires: usize,
    pub columns: Vec<MmColumnAudit>,
    /// Per-column wire sets never share a wire.
    pub pairwise_disjoint: bool,
    pub union_size: usize,
}

impl MmAudit {
    /// Input entropy per column protocol run: `d²` bits.
    pub fn entries(&self) -> usize {
        self.d * self.d
    }

    /// `(d²)^{3/2} = d³`.
    pub fn size_bound(&self) -> usize {
        self.d * self.d * self.d
    }

    pub fn passed(&self) -> bool {
        self.pairwise_disjoint
            && self.union_size <= self.wires
            && self.wires >= self.size_bound()
            && self.columns.iter().all(|c| {
                c.sum() >= self.entries()
                    && c.roundtrips == c.trials
                    && c.message_bits <= c.sum()
            })
    }
}

impl fmt::Display for MmAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "d={}", self.d)?;
        for c in &self.columns {
            writeln!(
                f,
                "column={} t_u={} t_q={} sum={} needed={} message_bits={} roundtrips={}/{}",
                c.column,
                c.t_u,
                c.t_q,
                c.sum(),
                self.entries(),
                c.message_bits,
                c.roundtrips,
                c.trials
            )?;
        }
        writeln!(f, "column_wire_total={}", self.columns.iter().map(MmColumnAudit::sum).sum::<usize>())?;
        writeln!(f, "column_wire_union={}", self.union_size)?;
        writeln!(f, "pairwise_disjoint={}", self.pairwise_disjoint)?;
        writeln!(f, "wires={}", self.wires)?;
        writeln!(f, "size_bound={}", self.size_bound())?;
        write!(f, "result={}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Verifies `c`, then for every column `l` counts the wires leaving `B[·,l]`
/// and entering `P[·,l]`, checks these sets are disjoint across columns, and
/// runs the column protocol on `trials` random matrices.
pub fn mm_partition_audit(c: &Depth2Circuit, d: usize, trials: usize, seed: u64) -> Result<MmAudit> {
    verify_mm_circuit(c, d, 100, seed)?;
    let lay = MmLayout::new(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut seen: HashSet<Wire> = HashSet::new();
    let mut pairwise_disjoint = true;
    let mut columns = Vec::with_capacity(d);
    for l in 0..d {
        let wires: Vec<Wire> = c
            .wires()
            .filter(|w| match *w {
                Wire::InputToMiddle { input, .. } => (0..d).any(|k| lay.b(k, l) == input),
                Wire::MiddleToOutput { output, .. } => (0..d).any(|i| lay.p(i, l) == output),
            })
            .collect();
        for w in &wires {
            pairwise_disjoint &= seen.insert(*w);
        }
        let (t_u, t_q) = column_message_bound(c, lay, l);
        debug_assert_eq!(t_u + t_q, wires.len());
        let mut roundtrips = 0;
        let mut message_bits = 0;
        for _ in 0..trials {
            let m = BitMatrix::random(d, d, &mut rng);
            let msg = encode_column_unchecked(c, lay, &m, l)?;
            message_bits = message_bits.max(msg.bit_len());
            if matches!(decode_column_unchecked(&msg, c, lay, l), Ok(ref out) if *out == m) {
                roundtrips += 1;
            }
        }
        columns.push(MmColumnAudit {
            column: l,
            t_u,
            t_q,
            message_bits,
            roundtrips,
            trials,
        });
    }
    Ok(MmAudit {
        d,
        wires: c.size(),
        columns,
        pairwise_disjoint,
        union_size: seen.len(),
    })
}
