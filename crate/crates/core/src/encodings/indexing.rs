//! Compressing an indexing instance through a structure with non-adaptive
//! queries.
//!
//! Part 1 holds the contents of every cell any query may probe, right after
//! preprocessing. Part 2 replays updates `0..n` in order and, for each one,
//! holds the content each probed cell had just before the update touched it.
//! The decoder re-runs every update on those logged contents and answers all
//! `k` queries after each one.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::message::{Message, MessageReader, RecordKind};
use super::ProtocolReport;
use crate::cellprobe::{check_word, probe_query, probe_update, Cells, DynamicDs, Memory};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::problems::IndexingInstance;

/// Cells query `i` may probe: its declared schedule, or failing that the
/// cells it probes on all-zero memory.
fn query_cells<D>(ds: &D, i: usize) -> Result<Vec<u64>>
where
    D: DynamicDs<Query = usize> + ?Sized,
{
    if let Some(s) = ds.query_schedule(&i) {
        return Ok(s);
    }
    let mut mem = Memory::new(ds.word_bits())?;
    let (log, res) = probe_query(ds, &i, &mut mem);
    res?;
    Ok(log.distinct_cells())
}

/// `C`: the union of all query probe sets, ascending.
pub fn query_union<D>(ds: &D, k: usize) -> Result<Vec<u64>>
where
    D: DynamicDs<Query = usize> + ?Sized,
{
    let mut c = BTreeSet::new();
    for i in 0..k {
        c.extend(query_cells(ds, i)?);
    }
    Ok(c.into_iter().collect())
}

pub fn encode_indexing<D>(ds: &D, instance: &IndexingInstance) -> Result<Message>
where
    D: DynamicDs<Input = IndexingInstance, Update = usize, Query = usize, Answer = bool> + ?Sized,
{
    let w = ds.word_bits();
    let c = query_union(ds, instance.k())?;
    let mut mem = Memory::new(w)?;
    ds.preprocess(instance, &mut mem)?;

    let allowed: HashSet<u64> = c.iter().copied().collect();
    for i in 0..instance.k() {
        let (log, res) = probe_query(ds, &i, &mut mem.clone());
        res?;
        if let Some(a) = log.distinct_cells().into_iter().find(|a| !allowed.contains(a)) {
            return Err(Error::ContractViolation(format!(
                "query {i} probed @{a}, outside the union of query schedules"
            )));
        }
    }

    let mut msg = Message::new();
    msg.begin_section("query_cells");
    for &a in &c {
        msg.push(RecordKind::Content, mem.peek(a), w);
    }
    msg.begin_section("update_reads");
    for j in 0..instance.n() {
        let (log, res) = probe_update(ds, &j, &mut mem);
        res?;
        let mut seen = HashSet::new();
        for p in &log.entries {
            if seen.insert(p.addr) {
                msg.push(RecordKind::Content, p.before, w);
            }
        }
    }
    Ok(msg)
}

/// Decoder-side memory: cell contents known so far. An update pulls the
/// content of each cell it touches for the first time from the message.
struct UpdateReplay<'a, 'm> {
    w: u32,
    known: &'a mut BTreeMap<u64, u64>,
    touched: HashSet<u64>,
    reader: &'a mut MessageReader<'m>,
    update: usize,
}

impl UpdateReplay<'_, '_> {
    fn first_touch(&mut self, addr: u64) -> Result<()> {
        if !self.touched.insert(addr) {
            return Ok(());
        }
        let logged = self.reader.take(self.w)?;
        match self.known.insert(addr, logged) {
            Some(prev) if prev != logged => Err(Error::ProtocolViolation(format!(
                "update {} logs @{addr} = {logged:#x}, decoder holds {prev:#x}",
                self.update
            ))),
            _ => Ok(()),
        }
    }
}

impl Cells for UpdateReplay<'_, '_> {
    fn word_bits(&self) -> u32 {
        self.w
    }

    fn read(&mut self, addr: u64) -> Result<u64> {
        check_word(self.w, addr, None)?;
        self.first_touch(addr)?;
        Ok(self.known[&addr])
    }

    fn write(&mut self, addr: u64, value: u64) -> Result<()> {
        check_word(self.w, addr, Some(value))?;
        self.first_touch(addr)?;
        self.known.insert(addr, value);
        Ok(())
    }
}

/// Read-only view for simulated queries; writes land in a scratch overlay.
struct QueryView<'a> {
    w: u32,
    known: &'a BTreeMap<u64, u64>,
    scratch: BTreeMap<u64, u64>,
    query: usize,
}

impl Cells for QueryView<'_> {
    fn word_bits(&self) -> u32 {
        self.w
    }

    fn read(&mut self, addr: u64) -> Result<u64> {
        check_word(self.w, addr, None)?;
        self.scratch
            .get(&addr)
            .or_else(|| self.known.get(&addr))
            .copied()
            .ok_or_else(|| {
                Error::ProtocolViolation(format!(
                    "query {} reads @{addr}, which the decoder cannot reconstruct",
                    self.query
                ))
            })
    }

    fn write(&mut self, addr: u64, value: u64) -> Result<()> {
        check_word(self.w, addr, Some(value))?;
        self.scratch.insert(addr, value);
        Ok(())
    }
}

pub fn decode_indexing<D>(msg: &Message, ds: &D, k: usize, n: usize) -> Result<IndexingInstance>
where
    D: DynamicDs<Input = IndexingInstance, Update = usize, Query = usize, Answer = bool> + ?Sized,
{
    let w = ds.word_bits();
    let c = query_union(ds, k)?;
    let mut reader = msg.reader();
    let mut known = BTreeMap::new();
    for &a in &c {
        known.insert(a, reader.take(w)?);
    }
    let mut strings = BitMatrix::zeros(k, n);
    for j in 0..n {
        let mut replay = UpdateReplay {
            w,
            known: &mut known,
            touched: HashSet::new(),
            reader: &mut reader,
            update: j,
        };
        ds.update(&j, &mut replay)?;
        for i in 0..k {
            let mut view = QueryView {
                w,
                known: &known,
                scratch: BTreeMap::new(),
                query: i,
            };
            strings.set(i, j, ds.query(&i, &mut view)?);
        }
    }
    reader.finish()?;
    Ok(IndexingInstance::new(strings))
}

/// Encodes, decodes and compares. Protocol errors and decode mismatches are
/// reported as failures, not returned as errors.
pub fn verify_indexing<D>(ds: &D, instance: &IndexingInstance) -> Result<ProtocolReport>
where
    D: DynamicDs<Input = IndexingInstance, Update = usize, Query = usize, Answer = bool> + ?Sized,
{
    let (k, n) = (instance.k(), instance.n());
    let w = ds.word_bits();
    let msg = encode_indexing(ds, instance)?;
    let c = query_union(ds, k)?.len();
    let update_part = msg.bit_len() - c * w as usize;
    let mut report = ProtocolReport {
        protocol: "indexing",
        length_bits: msg.bit_len(),
        formula_bits: msg.bit_len(),
        entropy_bits: k * n,
        details: vec![
            ("k", k.to_string()),
            ("n", n.to_string()),
            ("w", w.to_string()),
            ("query_cells", c.to_string()),
            ("update_probes", (update_part / w as usize).to_string()),
        ],
        roundtrip: false,
        failure: None,
        message: msg,
    };
    match decode_indexing(&report.message, ds, k, n) {
        Ok(decoded) if decoded == *instance => report.roundtrip = true,
        Ok(decoded) => {
            let (i, j) = first_difference(instance.strings(), decoded.strings());
            report.failure = Some(format!(
                "decode mismatch at string {i}, bit {j}: stored {}, decoded {}",
                instance.bit(i, j) as u8,
                decoded.bit(i, j) as u8
            ));
        }
        Err(e) => report.failure = Some(e.to_string()),
    }
    Ok(report)
}

fn first_difference(a: &BitMatrix, b: &BitMatrix) -> (usize, usize) {
    (0..a.rows())
        .flat_map(|i| (0..a.cols()).map(move |j| (i, j)))
        .find(|&(i, j)| a.get(i, j) != b.get(i, j))
        .unwrap_or((0, 0))
}
