//! The cell probe machine: `w`-bit word memory, probe instrumentation, and
//! checkers for the adaptivity classes a data structure may claim.
//!
//! A data structure keeps no state of its own between operations. Everything
//! it knows lives in the [`Cells`] it is handed, so the instrumented run, the
//! contract checkers and the encoding protocols can all drive the same code
//! against different views of memory.

mod checks;
mod memory;

use std::fmt::Debug;

pub use checks::{
    check_memoryless, check_query_nonadaptive, AdaptivityFailure, AdaptivityReport,
};
pub use memory::{Cells, Fill, Memory, Probe, ProbeKind, ProbeLog, Probed};
pub(crate) use memory::{check_word, word_mask};

use crate::error::Result;

/// A dynamic data structure in the cell probe model.
pub trait DynamicDs {
    type Input;
    type Update: Clone + Debug;
    type Query: Clone + Debug;
    type Answer: Clone + Debug + PartialEq;

    fn word_bits(&self) -> u32;

    fn preprocess(&self, input: &Self::Input, cells: &mut dyn Cells) -> Result<()>;

    fn update(&self, update: &Self::Update, cells: &mut dyn Cells) -> Result<()>;

    fn query(&self, query: &Self::Query, cells: &mut dyn Cells) -> Result<Self::Answer>;

    /// Addresses a query may probe, when the structure declares them up front.
    fn query_schedule(&self, _query: &Self::Query) -> Option<Vec<u64>> {
        None
    }

    fn update_schedule(&self, _update: &Self::Update) -> Option<Vec<u64>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op<I, U, Q> {
    Preprocess(I),
    Update(U),
    Query(Q),
}

pub type ScriptOp<D> =
    Op<<D as DynamicDs>::Input, <D as DynamicDs>::Update, <D as DynamicDs>::Query>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Preprocess,
    Update,
    Query,
}

#[derive(Debug, Clone)]
pub struct OpRecord<A> {
    pub kind: OpKind,
    pub log: ProbeLog,
    pub answer: Option<A>,
}

/// Max and mean distinct-cell probe counts over one kind of operation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProbeStats {
    pub ops: usize,
    pub max: usize,
    pub mean: f64,
}

impl ProbeStats {
    fn from_counts(counts: impl Iterator<Item = usize>) -> Self {
        let mut s = ProbeStats::default();
        let mut total = 0;
        for c in counts {
            s.ops += 1;
            s.max = s.max.max(c);
            total += c;
        }
        if s.ops > 0 {
            s.mean = total as f64 / s.ops as f64;
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct Run<A> {
    pub records: Vec<OpRecord<A>>,
    pub memory: Memory,
}

impl<A> Run<A> {
    pub fn answers(&self) -> impl Iterator<Item = &A> {
        self.records.iter().filter_map(|r| r.answer.as_ref())
    }

    pub fn query_stats(&self) -> ProbeStats {
        self.stats(OpKind::Query)
    }

    pub fn update_stats(&self) -> ProbeStats {
        self.stats(OpKind::Update)
    }

    fn stats(&self, kind: OpKind) -> ProbeStats {
        ProbeStats::from_counts(
            self.records
                .iter()
                .filter(|r| r.kind == kind)
                .map(|r| r.log.probe_count()),
        )
    }

    pub fn space(&self) -> u64 {
        self.memory.space()
    }

    pub fn trace(&self) -> String {
        self.records
            .iter()
            .enumerate()
            .map(|(k, r)| r.log.trace(k))
            .collect()
    }
}

/// Executes `script` against `mem`, logging every probe of every operation.
pub fn run_instrumented<D: DynamicDs + ?Sized>(
    ds: &D,
    script: &[ScriptOp<D>],
    mut mem: Memory,
) -> Result<Run<D::Answer>> {
    let mut records = Vec::with_capacity(script.len());
    for op in script {
        let mut log = ProbeLog::default();
        let mut cells = Probed::new(&mut mem, &mut log);
        let (kind, answer) = match op {
            Op::Preprocess(input) => {
                ds.preprocess(input, &mut cells)?;
                (OpKind::Preprocess, None)
            }
            Op::Update(u) => {
                ds.update(u, &mut cells)?;
                (OpKind::Update, None)
            }
            Op::Query(q) => (OpKind::Query, Some(ds.query(q, &mut cells)?)),
        };
        records.push(OpRecord { kind, log, answer });
    }
    Ok(Run {
        records,
        memory: mem,
    })
}

/// Runs one query on `mem` and returns its log, even if the query errored.
pub(crate) fn probe_query<D: DynamicDs + ?Sized>(
    ds: &D,
    q: &D::Query,
    mem: &mut Memory,
) -> (ProbeLog, Result<D::Answer>) {
    let mut log = ProbeLog::default();
    let res = ds.query(q, &mut Probed::new(mem, &mut log));
    (log, res)
}

pub(crate) fn probe_update<D: DynamicDs + ?Sized>(
    ds: &D,
    u: &D::Update,
    mem: &mut Memory,
) -> (ProbeLog, Result<()>) {
    let mut log = ProbeLog::default();
    let res = ds.update(u, &mut Probed::new(mem, &mut log));
    (log, res)
}
