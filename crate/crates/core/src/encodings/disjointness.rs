//! Compressing a set S ⊆ [n] through a structure with memoryless inserts.
//!
//! The encoder inserts the complement of S and runs the query, which probes
//! a cell set C. The message holds the addresses of C, their contents before
//! the inserts and their contents after. The decoder tries every candidate
//! set, replays its inserts restricted to C, and keeps the largest one that
//! lands on the logged contents.

use std::collections::{BTreeMap, BTreeSet};

use super::message::{Message, RecordKind};
use super::ProtocolReport;
use crate::cellprobe::{check_word, probe_query, run_instrumented, Cells, DynamicDs, Memory, Op};
use crate::error::{Error, Result};
use crate::problems::DisjointnessInstance;

/// Largest universe the exponential decoder accepts.
pub const MAX_DISJOINTNESS_N: usize = 20;

fn check_n(n: usize) -> Result<()> {
    if n > MAX_DISJOINTNESS_N {
        return Err(Error::InvalidParameter(format!(
            "universe {n} too large for the exhaustive decoder (max {MAX_DISJOINTNESS_N})"
        )));
    }
    Ok(())
}

pub fn encode_disjointness<D>(ds: &D, instance: &DisjointnessInstance) -> Result<Message>
where
    D: DynamicDs<Input = DisjointnessInstance, Update = usize, Query = (), Answer = bool> + ?Sized,
{
    check_n(instance.n())?;
    let w = ds.word_bits();
    let mut mem = Memory::new(w)?;
    ds.preprocess(instance, &mut mem)?;
    let before = mem.clone();
    for x in instance.complement() {
        ds.update(&x, &mut mem)?;
    }
    let (log, answer) = probe_query(ds, &(), &mut mem.clone());
    if !answer? {
        return Err(Error::Correctness(
            "query reports S intersecting its complement".into(),
        ));
    }
    let c = log.distinct_cells();
    let mut msg = Message::new();
    msg.begin_section("addresses");
    for &a in &c {
        msg.push(RecordKind::Address, a, w);
    }
    msg.begin_section("before_inserts");
    for &a in &c {
        msg.push(RecordKind::Content, before.peek(a), w);
    }
    msg.begin_section("after_inserts");
    for &a in &c {
        msg.push(RecordKind::Content, mem.peek(a), w);
    }
    Ok(msg)
}

/// Memory restricted to C: other cells read as zero and writes to them vanish.
struct Restricted<'a> {
    w: u32,
    cells: &'a mut BTreeMap<u64, u64>,
}

impl Cells for Restricted<'_> {
    fn word_bits(&self) -> u32 {
        self.w
    }

    fn read(&mut self, addr: u64) -> Result<u64> {
        check_word(self.w, addr, None)?;
        Ok(self.cells.get(&addr).copied().unwrap_or(0))
    }

    fn write(&mut self, addr: u64, value: u64) -> Result<()> {
        check_word(self.w, addr, Some(value))?;
        if let Some(slot) = self.cells.get_mut(&addr) {
            *slot = value;
        }
        Ok(())
    }
}

pub fn decode_disjointness<D>(msg: &Message, ds: &D, n: usize) -> Result<BTreeSet<usize>>
where
    D: DynamicDs<Input = DisjointnessInstance, Update = usize, Query = (), Answer = bool> + ?Sized,
{
    check_n(n)?;
    let w = ds.word_bits() as usize;
    if !msg.bit_len().is_multiple_of(3 * w) {
        return Err(Error::ProtocolViolation(format!(
            "message length {} is not a multiple of 3w = {}",
            msg.bit_len(),
            3 * w
        )));
    }
    let t = msg.bit_len() / (3 * w);
    let mut reader = msg.reader();
    let mut addrs = Vec::with_capacity(t);
    for _ in 0..t {
        addrs.push(reader.take(w as u32)?);
    }
    if addrs.iter().collect::<BTreeSet<_>>().len() != t {
        return Err(Error::ProtocolViolation("repeated address in part one".into()));
    }
    let mut start = BTreeMap::new();
    for &a in &addrs {
        start.insert(a, reader.take(w as u32)?);
    }
    let mut target = BTreeMap::new();
    for &a in &addrs {
        target.insert(a, reader.take(w as u32)?);
    }
    reader.finish()?;

    let mut best: Option<(u32, u64)> = None;
    let mut tied = false;
    for mask in 0u64..1 << n {
        let size = mask.count_ones();
        if best.is_some_and(|(b, _)| size < b) {
            continue;
        }
        let mut cells = start.clone();
        let mut view = Restricted {
            w: w as u32,
            cells: &mut cells,
        };
        for x in (0..n).filter(|&x| (mask >> x) & 1 == 1) {
            ds.update(&x, &mut view)?;
        }
        if cells != target {
            continue;
        }
        match best {
            Some((b, _)) if b == size => tied = true,
            _ => {
                best = Some((size, mask));
                tied = false;
            }
        }
    }
    match best {
        None => Err(Error::ProtocolViolation(
            "no candidate set reproduces the logged contents".into(),
        )),
        Some((size, _)) if tied => Err(Error::ProtocolViolation(format!(
            "several candidate sets of size {size} reproduce the logged contents"
        ))),
        Some((_, mask)) => Ok((0..n).filter(|&x| (mask >> x) & 1 == 0).collect()),
    }
}

/// Runs each single insert against a fresh copy of S and checks the answer.
/// Returns the elements whose answer was wrong.
pub fn audit_single_inserts<D>(ds: &D, instance: &DisjointnessInstance) -> Result<Vec<usize>>
where
    D: DynamicDs<Input = DisjointnessInstance, Update = usize, Query = (), Answer = bool> + ?Sized,
{
    let mut wrong = Vec::new();
    for x in 0..instance.n() {
        let script = vec![Op::Preprocess(instance.clone()), Op::Update(x), Op::Query(())];
        let run = run_instrumented(ds, &script, Memory::new(ds.word_bits())?)?;
        if run.answers().next() != Some(&!instance.contains(x)) {
            wrong.push(x);
        }
    }
    Ok(wrong)
}

/// Round trip plus the single-insert audit. Protocol errors, a decode
/// mismatch and audit failures are reported, not returned.
pub fn verify_disjointness<D>(ds: &D, instance: &DisjointnessInstance) -> Result<ProtocolReport>
where
    D: DynamicDs<Input = DisjointnessInstance, Update = usize, Query = (), Answer = bool> + ?Sized,
{
    let n = instance.n();
    let w = ds.word_bits() as usize;
    let msg = match encode_disjointness(ds, instance) {
        Ok(m) => m,
        Err(e @ Error::Correctness(_)) => {
            return Ok(ProtocolReport::failed("disjointness", n, e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let tq = msg.bit_len() / (3 * w);
    let mut report = ProtocolReport {
        protocol: "disjointness",
        length_bits: msg.bit_len(),
        formula_bits: 3 * tq * w,
        entropy_bits: n,
        details: vec![
            ("n", n.to_string()),
            ("w", w.to_string()),
            ("t_q", tq.to_string()),
        ],
        roundtrip: false,
        failure: None,
        message: msg,
    };
    match decode_disjointness(&report.message, ds, n) {
        Ok(s) if s == *instance.set() => report.roundtrip = true,
        Ok(s) => {
            report.failure = Some(format!(
                "decode mismatch: stored {:?}, decoded {:?}",
                instance.set(),
                s
            ))
        }
        Err(e) => report.failure = Some(e.to_string()),
    }
    let wrong = audit_single_inserts(ds, instance)?;
    if let Some(&x) = wrong.first() {
        report.roundtrip = false;
        let note = format!("correctness failure: insert {{{x}}} answered wrongly");
        report.failure = Some(match report.failure.take() {
            Some(f) => format!("{f}; {note}"),
            None => note,
        });
    }
    Ok(report)
}
