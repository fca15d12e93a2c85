//! Randomized checks for non-adaptive queries and memoryless updates.
//!
//! Both checks run each operation against several memories filled with
//! independent pseudo-random contents. Agreement across trials is evidence,
//! not proof: a structure could probe identically on every sampled memory and
//! still be adaptive. Declared probe schedules are checked exactly.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{probe_query, probe_update, DynamicDs, Fill, Memory, ProbeLog};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum AdaptivityFailure {
    /// Two trials probed different address sequences for the same operation.
    AddressDivergence {
        op: String,
        trial_a: usize,
        trial_b: usize,
        position: usize,
        addr_a: Option<u64>,
        addr_b: Option<u64>,
    },
    /// An operation probed an address outside its declared schedule.
    ScheduleEscape { op: String, trial: usize, addr: u64 },
    /// The value an update wrote to `cell` changed although the cell's prior
    /// content was held fixed, so it depends on other cells.
    NonLocalWrite {
        op: String,
        cell: u64,
        held: u64,
        trial_a: usize,
        trial_b: usize,
        written_a: Option<u64>,
        written_b: Option<u64>,
        depends_on: Vec<u64>,
    },
}

impl fmt::Display for AdaptivityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: &Option<u64>| v.map_or("none".to_string(), |x| format!("{x:#x}"));
        match self {
            AdaptivityFailure::AddressDivergence {
                op,
                trial_a,
                trial_b,
                position,
                addr_a,
                addr_b,
            } => write!(
                f,
                "violation=address_divergence op={op} trials={trial_a},{trial_b} probe#{position} \
                 addr_a={} addr_b={}",
                addr_a.map_or("none".into(), |a| a.to_string()),
                addr_b.map_or("none".into(), |a| a.to_string()),
            ),
            AdaptivityFailure::ScheduleEscape { op, trial, addr } => write!(
                f,
                "violation=schedule_escape op={op} trial={trial} addr={addr}"
            ),
            AdaptivityFailure::NonLocalWrite {
                op,
                cell,
                held,
                trial_a,
                trial_b,
                written_a,
                written_b,
                depends_on,
            } => {
                write!(
                    f,
                    "violation=non_local_write op={op} cell=@{cell} held={held:#x} \
                     trials={trial_a},{trial_b} written={},{}",
                    opt(written_a),
                    opt(written_b)
                )?;
                let deps: Vec<String> = depends_on.iter().map(|a| format!("@{a}")).collect();
                write!(f, " depends_on={}", if deps.is_empty() { "?".into() } else { deps.join(",") })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptivityReport {
    pub check: &'static str,
    pub trials: usize,
    pub ops_checked: usize,
    pub failure: Option<AdaptivityFailure>,
}

impl AdaptivityReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for AdaptivityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "check={}", self.check)?;
        writeln!(f, "trials={}", self.trials)?;
        writeln!(f, "ops_checked={}", self.ops_checked)?;
        writeln!(f, "result={}", if self.passed() { "PASS" } else { "FAIL" })?;
        if let Some(fail) = &self.failure {
            writeln!(f, "{fail}")?;
        }
        Ok(())
    }
}

fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.next_u64()).collect()
}

fn random_memory(w: u32, seed: u64) -> Result<Memory> {
    Memory::with_fill(w, Fill::Random(seed))
}

fn first_divergence(a: &[u64], b: &[u64]) -> Option<(usize, Option<u64>, Option<u64>)> {
    let n = a.len().max(b.len());
    (0..n)
        .find(|&i| a.get(i) != b.get(i))
        .map(|i| (i, a.get(i).copied(), b.get(i).copied()))
}

fn schedule_escape(log: &ProbeLog, declared: Option<&Vec<u64>>) -> Option<u64> {
    let declared = declared?;
    log.entries
        .iter()
        .map(|p| p.addr)
        .find(|a| !declared.contains(a))
}

/// Compares probe address sequences of one operation across trials.
fn check_sequences(
    op: String,
    logs: &[ProbeLog],
    declared: Option<&Vec<u64>>,
) -> Option<AdaptivityFailure> {
    let base = logs[0].address_sequence();
    for (t, log) in logs.iter().enumerate() {
        if let Some(addr) = schedule_escape(log, declared) {
            return Some(AdaptivityFailure::ScheduleEscape { op, trial: t, addr });
        }
        if t == 0 {
            continue;
        }
        if let Some((position, addr_a, addr_b)) =
            first_divergence(&base, &log.address_sequence())
        {
            return Some(AdaptivityFailure::AddressDivergence {
                op,
                trial_a: 0,
                trial_b: t,
                position,
                addr_a,
                addr_b,
            });
        }
    }
    None
}

/// PASS iff every query probes the same address sequence on `trials`
/// independently randomized memories (and stays inside its declared schedule).
pub fn check_query_nonadaptive<D: DynamicDs + ?Sized>(
    ds: &D,
    queries: &[D::Query],
    trials: usize,
    seed: u64,
) -> Result<AdaptivityReport> {
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least 2 trials".into()));
    }
    let seeds = trial_seeds(seed, trials);
    let mut report = AdaptivityReport {
        check: "query_nonadaptive",
        trials,
        ops_checked: 0,
        failure: None,
    };
    for q in queries {
        let mut logs = Vec::with_capacity(trials);
        for &s in &seeds {
            let mut mem = random_memory(ds.word_bits(), s)?;
            logs.push(probe_query(ds, q, &mut mem).0);
        }
        report.ops_checked += 1;
        let declared = ds.query_schedule(q);
        if let Some(fail) = check_sequences(format!("query({q:?})"), &logs, declared.as_ref()) {
            report.failure = Some(fail);
            return Ok(report);
        }
    }
    Ok(report)
}

/// PASS iff every update is non-adaptive and each value it writes to a cell
/// depends only on the update and that cell's previous content.
pub fn check_memoryless<D: DynamicDs + ?Sized>(
    ds: &D,
    updates: &[D::Update],
    trials: usize,
    seed: u64,
) -> Result<AdaptivityReport> {
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least 2 trials".into()));
    }
    let w = ds.word_bits();
    let seeds = trial_seeds(seed, trials);
    let mut report = AdaptivityReport {
        check: "memoryless",
        trials,
        ops_checked: 0,
        failure: None,
    };
    for u in updates {
        report.ops_checked += 1;
        let op = format!("update({u:?})");

        // (a) content-independent address sequence
        let mut logs = Vec::with_capacity(trials);
        for &s in &seeds {
            let mut mem = random_memory(w, s)?;
            logs.push(probe_update(ds, u, &mut mem).0);
        }
        let declared = ds.update_schedule(u);
        if let Some(fail) = check_sequences(op.clone(), &logs, declared.as_ref()) {
            report.failure = Some(fail);
            return Ok(report);
        }

        // (b) each written cell is a function of (update, its own old content)
        let base_mem = random_memory(w, seeds[0])?;
        let base_log = &logs[0];
        let probed = base_log.distinct_cells();
        let mut written: Vec<u64> = base_log.writes().map(|p| p.addr).collect();
        written.sort_unstable();
        written.dedup();
        for &cell in &written {
            let held = base_mem.peek(cell);
            let expected = base_log.last_write(cell);
            for (t, &s) in seeds.iter().enumerate().skip(1) {
                let mut mem = random_memory(w, s)?;
                mem.poke(cell, held)?;
                let got = probe_update(ds, u, &mut mem).0.last_write(cell);
                if got == expected {
                    continue;
                }
                let mut depends_on = Vec::new();
                for &other in probed.iter().filter(|&&a| a != cell) {
                    let mut mem = random_memory(w, s)?;
                    mem.poke(cell, held)?;
                    mem.poke(other, base_mem.peek(other))?;
                    if probe_update(ds, u, &mut mem).0.last_write(cell) == expected {
                        depends_on.push(other);
                    }
                }
                report.failure = Some(AdaptivityFailure::NonLocalWrite {
                    op,
                    cell,
                    held,
                    trial_a: 0,
                    trial_b: t,
                    written_a: expected,
                    written_b: got,
                    depends_on,
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}
