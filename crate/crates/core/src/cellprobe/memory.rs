use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Word-level access to a cell store. Data structures only ever see memory
/// through this trait, which lets the same code run on real memory, on
/// instrumented memory and inside encoders/decoders.
pub trait Cells {
    fn word_bits(&self) -> u32;
    fn read(&mut self, addr: u64) -> Result<u64>;
    fn write(&mut self, addr: u64, value: u64) -> Result<()>;
}

pub(crate) fn word_mask(w: u32) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

/// Checks `addr < 2^w` and `value < 2^w`.
pub(crate) fn check_word(w: u32, addr: u64, value: Option<u64>) -> Result<()> {
    let mask = word_mask(w);
    if addr & !mask != 0 {
        return Err(Error::ContractViolation(format!(
            "address {addr} does not fit in a {w}-bit word"
        )));
    }
    if let Some(v) = value {
        if v & !mask != 0 {
            return Err(Error::ContractViolation(format!(
                "value {v:#x} written to @{addr} exceeds {w} bits"
            )));
        }
    }
    Ok(())
}

/// What an address that was never written reads as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fill {
    Zero,
    /// Pseudo-random content, a fixed function of (seed, address).
    Random(u64),
}

impl Fill {
    fn value(self, w: u32, addr: u64) -> u64 {
        match self {
            Fill::Zero => 0,
            Fill::Random(seed) => {
                let mut key = [0u8; 32];
                key[..8].copy_from_slice(&seed.to_le_bytes());
                key[8..16].copy_from_slice(&addr.to_le_bytes());
                ChaCha8Rng::from_seed(key).next_u64() & word_mask(w)
            }
        }
    }
}

/// Word-addressed memory of `w`-bit cells.
#[derive(Debug, Clone)]
pub struct Memory {
    w: u32,
    cells: BTreeMap<u64, u64>,
    fill: Fill,
    max_written: Option<u64>,
}

impl Memory {
    pub fn new(w: u32) -> Result<Self> {
        Self::with_fill(w, Fill::Zero)
    }

    pub fn with_fill(w: u32, fill: Fill) -> Result<Self> {
        if !(1..=64).contains(&w) {
            return Err(Error::InvalidParameter(format!(
                "word size must be in 1..=64, got {w}"
            )));
        }
        Ok(Memory {
            w,
            cells: BTreeMap::new(),
            fill,
            max_written: None,
        })
    }

    pub fn fill(&self) -> Fill {
        self.fill
    }

    pub fn peek(&self, addr: u64) -> u64 {
        self.cells
            .get(&addr)
            .copied()
            .unwrap_or_else(|| self.fill.value(self.w, addr))
    }

    /// Sets a cell without counting toward space; used to stage test memories.
    pub fn poke(&mut self, addr: u64, value: u64) -> Result<()> {
        check_word(self.w, addr, Some(value))?;
        self.cells.insert(addr, value);
        Ok(())
    }

    /// Space in cells: the largest address ever written plus one.
    pub fn space(&self) -> u64 {
        self.max_written.map_or(0, |a| a + 1)
    }

    /// Explicitly stored cells in address order.
    pub fn stored(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.cells.iter().map(|(&a, &v)| (a, v))
    }

    /// Content equality, taking each side's fill into account.
    pub fn same_contents(&self, other: &Memory) -> bool {
        if self.w != other.w || self.fill != other.fill {
            return false;
        }
        let addrs: HashSet<u64> = self.cells.keys().chain(other.cells.keys()).copied().collect();
        addrs.into_iter().all(|a| self.peek(a) == other.peek(a))
    }
}

impl Cells for Memory {
    fn word_bits(&self) -> u32 {
        self.w
    }

    fn read(&mut self, addr: u64) -> Result<u64> {
        check_word(self.w, addr, None)?;
        Ok(self.peek(addr))
    }

    fn write(&mut self, addr: u64, value: u64) -> Result<()> {
        check_word(self.w, addr, Some(value))?;
        self.cells.insert(addr, value);
        self.max_written = Some(self.max_written.map_or(addr, |m| m.max(addr)));
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    pub kind: ProbeKind,
    pub addr: u64,
    pub before: u64,
    pub after: u64,
}

/// Every probe of one operation, in execution order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProbeLog {
    pub entries: Vec<Probe>,
}

impl ProbeLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The probed address sequence, repeats included.
    pub fn address_sequence(&self) -> Vec<u64> {
        self.entries.iter().map(|p| p.addr).collect()
    }

    /// Distinct cells in order of first probe.
    pub fn distinct_cells(&self) -> Vec<u64> {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .filter(|p| seen.insert(p.addr))
            .map(|p| p.addr)
            .collect()
    }

    /// The cost of the operation: number of distinct cells probed.
    pub fn probe_count(&self) -> usize {
        self.distinct_cells().len()
    }

    pub fn writes(&self) -> impl Iterator<Item = &Probe> {
        self.entries.iter().filter(|p| p.kind == ProbeKind::Write)
    }

    pub fn reads(&self) -> impl Iterator<Item = &Probe> {
        self.entries.iter().filter(|p| p.kind == ProbeKind::Read)
    }

    /// Final value written to `addr` during the operation, if any.
    pub fn last_write(&self, addr: u64) -> Option<u64> {
        self.writes().filter(|p| p.addr == addr).last().map(|p| p.after)
    }

    /// Applies the logged writes to `mem`, in order.
    pub fn replay_onto(&self, mem: &mut Memory) -> Result<()> {
        for p in self.writes() {
            mem.write(p.addr, p.after)?;
        }
        Ok(())
    }

    /// One line per probe: `op#<k> <R|W> @<addr> <before> -> <after>`.
    pub fn trace(&self, op: usize) -> String {
        let mut s = String::new();
        for p in &self.entries {
            let k = match p.kind {
                ProbeKind::Read => 'R',
                ProbeKind::Write => 'W',
            };
            let _ = writeln!(s, "op#{op} {k} @{} {:#x} -> {:#x}", p.addr, p.before, p.after);
        }
        s
    }
}

/// Memory view that records every probe into a log.
pub struct Probed<'a> {
    mem: &'a mut Memory,
    log: &'a mut ProbeLog,
}

impl<'a> Probed<'a> {
    pub fn new(mem: &'a mut Memory, log: &'a mut ProbeLog) -> Self {
        Probed { mem, log }
    }
}

impl Cells for Probed<'_> {
    fn word_bits(&self) -> u32 {
        self.mem.word_bits()
    }

    fn read(&mut self, addr: u64) -> Result<u64> {
        let v = self.mem.read(addr)?;
        self.log.entries.push(Probe {
            kind: ProbeKind::Read,
            addr,
            before: v,
            after: v,
        });
        Ok(v)
    }

    fn write(&mut self, addr: u64, value: u64) -> Result<()> {
        check_word(self.mem.word_bits(), addr, Some(value))?;
        let before = self.mem.peek(addr);
        self.mem.write(addr, value)?;
        self.log.entries.push(Probe {
            kind: ProbeKind::Write,
            addr,
            before,
            after: value,
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unset_cells_read_zero() {
        let mut m = Memory::new(8).unwrap();
        assert_eq!(m.read(17).unwrap(), 0);
        assert_eq!(m.space(), 0);
    }

    #[test]
    fn word_size_is_enforced() {
        let mut m = Memory::new(8).unwrap();
        assert!(matches!(m.write(3, 256), Err(Error::ContractViolation(_))));
        assert!(matches!(m.write(256, 1), Err(Error::ContractViolation(_))));
        assert!(matches!(m.read(300), Err(Error::ContractViolation(_))));
        m.write(255, 255).unwrap();
        assert_eq!(m.space(), 256);
        assert!(Memory::new(0).is_err());
        assert!(Memory::new(65).is_err());
        let mut wide = Memory::new(64).unwrap();
        wide.write(u64::MAX, u64::MAX).unwrap();
    }

    #[test]
    fn random_fill_is_stable_per_address() {
        let m = Memory::with_fill(16, Fill::Random(5)).unwrap();
        let n = Memory::with_fill(16, Fill::Random(6)).unwrap();
        assert_eq!(m.peek(9), m.peek(9));
        assert!((0..32).any(|a| m.peek(a) != n.peek(a)));
        assert!((0..32).all(|a| m.peek(a) < 1 << 16));
    }

    #[test]
    fn probed_logs_and_replays() {
        let mut mem = Memory::new(8).unwrap();
        mem.write(1, 7).unwrap();
        let before = mem.clone();
        let mut log = ProbeLog::default();
        {
            let mut p = Probed::new(&mut mem, &mut log);
            let v = p.read(1).unwrap();
            p.write(2, v + 1).unwrap();
            p.write(1, 0).unwrap();
            p.read(2).unwrap();
        }
        assert_eq!(log.len(), 4);
        assert_eq!(log.probe_count(), 2);
        assert_eq!(log.address_sequence(), vec![1, 2, 1, 2]);
        assert_eq!(log.entries[2].before, 7);
        let mut replayed = before;
        log.replay_onto(&mut replayed).unwrap();
        assert!(replayed.same_contents(&mem));
        assert_eq!(log.trace(3).lines().next().unwrap(), "op#3 R @1 0x7 -> 0x7");
    }
}
