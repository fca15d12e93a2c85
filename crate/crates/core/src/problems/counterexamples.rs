//! Structures that deliberately break an adaptivity or correctness contract,
//! used to show that the checkers and protocols notice.

use crate::cellprobe::{word_mask, Cells, DynamicDs};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopyCellUpdate {
    /// Adds one to cell 1.
    Increment,
    /// Copies cell 1 into cell 2.
    Copy,
}

/// Two non-adaptive updates where the second moves information written by
/// the first into a cell the first never touches. Non-adaptive, not memoryless.
#[derive(Debug, Clone)]
pub struct CopyCellDs {
    w: u32,
}

impl CopyCellDs {
    pub const COUNTER: u64 = 1;
    pub const COPY: u64 = 2;

    pub fn new(w: u32) -> Result<Self> {
        if !(2..=64).contains(&w) {
            return Err(Error::InvalidParameter(format!(
                "copy-cell structure needs 2 <= w <= 64, got {w}"
            )));
        }
        Ok(CopyCellDs { w })
    }
}

impl DynamicDs for CopyCellDs {
    type Input = ();
    type Update = CopyCellUpdate;
    type Query = ();
    /// Content of the copy cell.
    type Answer = u64;

    fn word_bits(&self) -> u32 {
        self.w
    }

    fn preprocess(&self, _: &(), cells: &mut dyn Cells) -> Result<()> {
        cells.write(Self::COUNTER, 0)?;
        cells.write(Self::COPY, 0)
    }

    fn update(&self, u: &CopyCellUpdate, cells: &mut dyn Cells) -> Result<()> {
        let v = cells.read(Self::COUNTER)?;
        match u {
            CopyCellUpdate::Increment => {
                cells.write(Self::COUNTER, v.wrapping_add(1) & word_mask(self.w))
            }
            CopyCellUpdate::Copy => cells.write(Self::COPY, v),
        }
    }

    fn query(&self, _: &(), cells: &mut dyn Cells) -> Result<u64> {
        cells.read(Self::COPY)
    }

    fn query_schedule(&self, _: &()) -> Option<Vec<u64>> {
        Some(vec![Self::COPY])
    }

    fn update_schedule(&self, u: &CopyCellUpdate) -> Option<Vec<u64>> {
        Some(match u {
            CopyCellUpdate::Increment => vec![Self::COUNTER],
            CopyCellUpdate::Copy => vec![Self::COUNTER, Self::COPY],
        })
    }
}

/// Static sorted array in cells `[0, len)`; a query binary-searches for the
/// number of stored values `<= x`, so which cells it probes depends on what
/// it reads.
#[derive(Debug, Clone)]
pub struct BinarySearchDs {
    w: u32,
    len: usize,
}

impl BinarySearchDs {
    pub fn new(len: usize, w: u32) -> Result<Self> {
        if len > 0 && w < 64 && (len as u64 - 1) >> w != 0 {
            return Err(Error::InvalidParameter(format!(
                "{len} cells do not fit in a {w}-bit address space"
            )));
        }
        Ok(BinarySearchDs { w, len })
    }
}

impl DynamicDs for BinarySearchDs {
    type Input = Vec<u64>;
    type Update = ();
    type Query = u64;
    type Answer = usize;

    fn word_bits(&self) -> u32 {
        self.w
    }

    fn preprocess(&self, input: &Vec<u64>, cells: &mut dyn Cells) -> Result<()> {
        if input.len() != self.len {
            return Err(Error::Domain(format!(
                "expected {} values, got {}",
                self.len,
                input.len()
            )));
        }
        let mut sorted = input.clone();
        sorted.sort_unstable();
        for (a, v) in sorted.into_iter().enumerate() {
            cells.write(a as u64, v)?;
        }
        Ok(())
    }

    fn update(&self, _: &(), _: &mut dyn Cells) -> Result<()> {
        Ok(())
    }

    fn query(&self, &x: &u64, cells: &mut dyn Cells) -> Result<usize> {
        let (mut lo, mut hi) = (0usize, self.len);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if cells.read(mid as u64)? <= x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

/// Wraps a structure and silently discards every write made by one chosen
/// update. Reads still happen, so the probe pattern barely changes.
#[derive(Debug, Clone)]
pub struct DroppedUpdate<D: DynamicDs> {
    inner: D,
    dropped: D::Update,
}

impl<D: DynamicDs> DroppedUpdate<D> {
    pub fn new(inner: D, dropped: D::Update) -> Self {
        DroppedUpdate { inner, dropped }
    }

    pub fn dropped(&self) -> &D::Update {
        &self.dropped
    }

    pub fn inner(&self) -> &D {
        &self.inner
    }
}

struct DiscardWrites<'a> {
    inner: &'a mut dyn Cells,
}

impl Cells for DiscardWrites<'_> {
    fn word_bits(&self) -> u32 {
        self.inner.word_bits()
    }

    fn read(&mut self, addr: u64) -> Result<u64> {
        self.inner.read(addr)
    }

    fn write(&mut self, _addr: u64, _value: u64) -> Result<()> {
        Ok(())
    }
}

impl<D> DynamicDs for DroppedUpdate<D>
where
    D: DynamicDs,
    D::Update: PartialEq,
{
    type Input = D::Input;
    type Update = D::Update;
    type Query = D::Query;
    type Answer = D::Answer;

    fn word_bits(&self) -> u32 {
        self.inner.word_bits()
    }

    fn preprocess(&self, input: &D::Input, cells: &mut dyn Cells) -> Result<()> {
        self.inner.preprocess(input, cells)
    }

    fn update(&self, u: &D::Update, cells: &mut dyn Cells) -> Result<()> {
        if *u == self.dropped {
            self.inner.update(u, &mut DiscardWrites { inner: cells })
        } else {
            self.inner.update(u, cells)
        }
    }

    fn query(&self, q: &D::Query, cells: &mut dyn Cells) -> Result<D::Answer> {
        self.inner.query(q, cells)
    }

    fn query_schedule(&self, q: &D::Query) -> Option<Vec<u64>> {
        self.inner.query_schedule(q)
    }

    fn update_schedule(&self, u: &D::Update) -> Option<Vec<u64>> {
        self.inner.update_schedule(u)
    }
}
