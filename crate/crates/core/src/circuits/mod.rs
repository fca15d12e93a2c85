//! Depth-2 circuits: inputs feed interior (middle) gates, middle gates feed
//! outputs. Gates have unbounded fan-in and the size of a circuit is its wire
//! count.

mod factorize;
mod linear;
mod matmul;

use std::fmt;
use std::fmt::Write as _;

pub use factorize::{exhaustive_factorize, greedy_cse_factorize, Factorization};
pub use linear::{circuit_to_ds, ds_to_circuit, LinearDs, WireBounds};
pub use matmul::{
    mm_partition_audit, naive_mm_circuit, verify_mm_circuit, MmAudit, MmColumnAudit, MmLayout,
};

use crate::error::{Error, Result};

/// Largest fan-in a truth-table gate may have.
pub const MAX_TABLE_FANIN: usize = 16;

/// Truth table over `fanin` inputs; entry `t` is the output when input `k` of
/// the gate (in wiring order) carries bit `k` of `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    fanin: usize,
    bits: Vec<u64>,
}

impl TruthTable {
    pub fn new(fanin: usize, entries: &[bool]) -> Result<Self> {
        if fanin > MAX_TABLE_FANIN {
            return Err(Error::InvalidParameter(format!(
                "table fan-in {fanin} exceeds {MAX_TABLE_FANIN}"
            )));
        }
        if entries.len() != 1 << fanin {
            return Err(Error::InvalidParameter(format!(
                "table over {fanin} inputs needs {} entries, got {}",
                1usize << fanin,
                entries.len()
            )));
        }
        let mut bits = vec![0u64; (1usize << fanin).div_ceil(64)];
        for (t, &e) in entries.iter().enumerate() {
            if e {
                bits[t / 64] |= 1 << (t % 64);
            }
        }
        Ok(TruthTable { fanin, bits })
    }

    pub fn from_fn(fanin: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        if fanin > MAX_TABLE_FANIN {
            return Err(Error::InvalidParameter(format!(
                "table fan-in {fanin} exceeds {MAX_TABLE_FANIN}"
            )));
        }
        let entries: Vec<bool> = (0..1usize << fanin).map(f).collect();
        Self::new(fanin, &entries)
    }

    pub fn fanin(&self) -> usize {
        self.fanin
    }

    pub fn lookup(&self, t: usize) -> bool {
        (self.bits[t / 64] >> (t % 64)) & 1 == 1
    }

    /// Hex digits, most significant entry first, `ceil(2^fanin / 4)` digits.
    fn to_hex(&self) -> String {
        let entries = 1usize << self.fanin;
        let digits = entries.div_ceil(4);
        (0..digits)
            .rev()
            .map(|d| {
                let nib = (0..4)
                    .filter(|b| d * 4 + b < entries && self.lookup(d * 4 + b))
                    .fold(0u32, |acc, b| acc | 1 << b);
                char::from_digit(nib, 16).unwrap().to_ascii_uppercase()
            })
            .collect()
    }

    fn from_hex(fanin: usize, hex: &str) -> std::result::Result<Self, String> {
        let entries = 1usize << fanin;
        if hex.len() != entries.div_ceil(4) {
            return Err(format!(
                "table for fan-in {fanin} needs {} hex digits, got {}",
                entries.div_ceil(4),
                hex.len()
            ));
        }
        let mut values = vec![false; entries];
        for (pos, ch) in hex.chars().rev().enumerate() {
            let nib = ch.to_digit(16).ok_or_else(|| format!("bad hex digit `{ch}`"))?;
            for b in 0..4 {
                let t = pos * 4 + b;
                if (nib >> b) & 1 == 1 {
                    if t >= entries {
                        return Err("table has bits past its last entry".into());
                    }
                    values[t] = true;
                }
            }
        }
        TruthTable::new(fanin, &values).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GateKind {
    Xor,
    And,
    Or,
    Table(TruthTable),
}

impl GateKind {
    fn apply(&self, values: impl Iterator<Item = bool>) -> bool {
        match self {
            GateKind::Xor => values.fold(false, |a, b| a ^ b),
            GateKind::And => values.fold(true, |a, b| a & b),
            GateKind::Or => values.fold(false, |a, b| a | b),
            GateKind::Table(t) => t.lookup(
                values
                    .enumerate()
                    .fold(0usize, |acc, (k, b)| acc | (b as usize) << k),
            ),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::Xor => f.write_str("XOR"),
            GateKind::And => f.write_str("AND"),
            GateKind::Or => f.write_str("OR"),
            GateKind::Table(t) => write!(f, "TABLE={}", t.to_hex()),
        }
    }
}

/// A gate and the nodes wired into it, without repeats. Order matters only
/// for table gates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub inputs: Vec<usize>,
    pub kind: GateKind,
}

impl Gate {
    pub fn new(kind: GateKind, inputs: impl IntoIterator<Item = usize>) -> Self {
        Gate {
            inputs: inputs.into_iter().collect(),
            kind,
        }
    }

    pub fn xor(inputs: impl IntoIterator<Item = usize>) -> Self {
        Self::new(GateKind::Xor, inputs)
    }

    pub fn fanin(&self) -> usize {
        self.inputs.len()
    }
}

/// One wire of a depth-2 circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Wire {
    InputToMiddle { input: usize, gate: usize },
    MiddleToOutput { gate: usize, output: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Depth2Circuit {
    n_inputs: usize,
    middle: Vec<Gate>,
    outputs: Vec<Gate>,
}

fn validate_layer(layer: &[Gate], sources: usize, what: &str) -> Result<()> {
    for (g, gate) in layer.iter().enumerate() {
        if let Some(&bad) = gate.inputs.iter().find(|&&i| i >= sources) {
            return Err(Error::InvalidParameter(format!(
                "{what} gate {g} references node {bad}, only {sources} exist"
            )));
        }
        let mut sorted = gate.inputs.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidParameter(format!(
                "{what} gate {g} has a duplicate wire"
            )));
        }
        if let GateKind::Table(t) = &gate.kind {
            if t.fanin() != gate.fanin() {
                return Err(Error::InvalidParameter(format!(
                    "{what} gate {g} has {} wires but a {}-input table",
                    gate.fanin(),
                    t.fanin()
                )));
            }
        }
    }
    Ok(())
}

impl Depth2Circuit {
    pub fn new(n_inputs: usize, middle: Vec<Gate>, outputs: Vec<Gate>) -> Result<Self> {
        validate_layer(&middle, n_inputs, "middle")?;
        validate_layer(&outputs, middle.len(), "output")?;
        Ok(Depth2Circuit {
            n_inputs,
            middle,
            outputs,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn middle(&self) -> &[Gate] {
        &self.middle
    }

    pub fn outputs(&self) -> &[Gate] {
        &self.outputs
    }

    /// s(C): total number of wires.
    pub fn size(&self) -> usize {
        self.middle.iter().chain(&self.outputs).map(Gate::fanin).sum()
    }

    pub fn is_linear(&self) -> bool {
        self.middle
            .iter()
            .chain(&self.outputs)
            .all(|g| g.kind == GateKind::Xor)
    }

    pub fn wires(&self) -> impl Iterator<Item = Wire> + '_ {
        let first = self.middle.iter().enumerate().flat_map(|(g, gate)| {
            gate.inputs
                .iter()
                .map(move |&input| Wire::InputToMiddle { input, gate: g })
        });
        let second = self.outputs.iter().enumerate().flat_map(|(o, gate)| {
            gate.inputs
                .iter()
                .map(move |&g| Wire::MiddleToOutput { gate: g, output: o })
        });
        first.chain(second)
    }

    /// Middle gates wired to input `i`, ascending.
    pub fn gates_fed_by_input(&self, i: usize) -> Vec<usize> {
        (0..self.middle.len())
            .filter(|&g| self.middle[g].inputs.contains(&i))
            .collect()
    }

    pub fn input_fanout(&self, i: usize) -> usize {
        self.gates_fed_by_input(i).len()
    }

    /// Values of all middle gates and all outputs on input `x`.
    pub fn evaluate_layers(&self, x: &[bool]) -> Result<(Vec<bool>, Vec<bool>)> {
        if x.len() != self.n_inputs {
            return Err(Error::DimensionMismatch {
                op: "evaluate",
                left_rows: self.n_inputs,
                left_cols: 1,
                right_rows: x.len(),
                right_cols: 1,
            });
        }
        let mid: Vec<bool> = self
            .middle
            .iter()
            .map(|g| g.kind.apply(g.inputs.iter().map(|&i| x[i])))
            .collect();
        let out = self.outputs_from_middle(&mid);
        Ok((mid, out))
    }

    pub fn outputs_from_middle(&self, mid: &[bool]) -> Vec<bool> {
        self.outputs
            .iter()
            .map(|g| g.kind.apply(g.inputs.iter().map(|&m| mid[m])))
            .collect()
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<Vec<bool>> {
        self.evaluate_layers(x).map(|(_, out)| out)
    }

    /// Evaluates a single output gate given values for the middle gates it reads.
    pub(crate) fn output_value(&self, o: usize, mid_value: impl Fn(usize) -> bool) -> bool {
        let g = &self.outputs[o];
        g.kind.apply(g.inputs.iter().map(|&m| mid_value(m)))
    }

    /// Text form: a `D2` header line, then one line per middle gate and per output.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "D2 inputs={} middle={} outputs={}\n",
            self.n_inputs,
            self.middle.len(),
            self.outputs.len()
        );
        for (prefix, layer) in [("M", &self.middle), ("O", &self.outputs)] {
            for (i, g) in layer.iter().enumerate() {
                let _ = write!(s, "{prefix}{i} {} :", g.kind);
                for idx in &g.inputs {
                    let _ = write!(s, " {idx}");
                }
                s.push('\n');
            }
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, 1, "missing `D2` header"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("D2") {
            return Err(Error::parse(hl, 1, "header must start with `D2`"));
        }
        let mut counts = [0usize; 3];
        for (slot, key) in ["inputs", "middle", "outputs"].iter().enumerate() {
            let tok = fields
                .next()
                .ok_or_else(|| Error::parse(hl, header.len() + 1, format!("missing `{key}=`")))?;
            let col = column_of(header, tok);
            let val = tok
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| Error::parse(hl, col, format!("expected `{key}=<count>`")))?;
            counts[slot] = val
                .parse()
                .map_err(|_| Error::parse(hl, col + key.len() + 1, format!("`{val}` is not a count")))?;
        }
        let [n_inputs, n_middle, n_outputs] = counts;
        let mut middle = Vec::with_capacity(n_middle);
        let mut outputs = Vec::with_capacity(n_outputs);
        for (lineno, line) in lines {
            let (prefix, layer, expected) = if line.starts_with('M') {
                ('M', &mut middle, n_middle)
            } else if line.starts_with('O') {
                ('O', &mut outputs, n_outputs)
            } else {
                return Err(Error::parse(lineno, 1, "expected a line starting with `M` or `O`"));
            };
            let gate = parse_gate_line(line, lineno, prefix, layer.len())?;
            if layer.len() == expected {
                return Err(Error::parse(lineno, 1, format!("more `{prefix}` lines than declared")));
            }
            layer.push(gate);
        }
        if middle.len() != n_middle || outputs.len() != n_outputs {
            return Err(Error::parse(
                text.lines().count() + 1,
                1,
                format!(
                    "header declares {n_middle} middle and {n_outputs} output gates, found {} and {}",
                    middle.len(),
                    outputs.len()
                ),
            ));
        }
        Depth2Circuit::new(n_inputs, middle, outputs)
    }
}

fn column_of(line: &str, tok: &str) -> usize {
    tok.as_ptr() as usize - line.as_ptr() as usize + 1
}

fn parse_gate_line(line: &str, lineno: usize, prefix: char, index: usize) -> Result<Gate> {
    let (head, tail) = line
        .split_once(':')
        .ok_or_else(|| Error::parse(lineno, line.len() + 1, "missing `:`"))?;
    let mut head_fields = head.split_whitespace();
    let label = head_fields.next().unwrap_or("");
    let expected_label = format!("{prefix}{index}");
    if label != expected_label {
        return Err(Error::parse(
            lineno,
            1,
            format!("expected `{expected_label}`, found `{label}`"),
        ));
    }
    let kind_tok = head_fields
        .next()
        .ok_or_else(|| Error::parse(lineno, head.len() + 1, "missing gate kind"))?;
    let kind_col = column_of(line, kind_tok);
    let mut inputs = Vec::new();
    for tok in tail.split_whitespace() {
        inputs.push(tok.parse::<usize>().map_err(|_| {
            Error::parse(lineno, column_of(line, tok), format!("`{tok}` is not an index"))
        })?);
    }
    let kind = match kind_tok {
        "XOR" => GateKind::Xor,
        "AND" => GateKind::And,
        "OR" => GateKind::Or,
        t if t.starts_with("TABLE=") => {
            if inputs.len() > MAX_TABLE_FANIN {
                return Err(Error::parse(
                    lineno,
                    kind_col,
                    format!("table fan-in {} exceeds {MAX_TABLE_FANIN}", inputs.len()),
                ));
            }
            GateKind::Table(
                TruthTable::from_hex(inputs.len(), &t["TABLE=".len()..])
                    .map_err(|msg| Error::parse(lineno, kind_col + "TABLE=".len(), msg))?,
            )
        }
        other => {
            return Err(Error::parse(lineno, kind_col, format!("unknown gate kind `{other}`")))
        }
    };
    if head_fields.next().is_some() {
        return Err(Error::parse(lineno, 1, "unexpected field before `:`"));
    }
    Ok(Gate { inputs, kind })
}
