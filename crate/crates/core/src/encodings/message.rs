use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Address,
    Content,
    GateValue,
}

/// One fixed-width field of a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Record {
    pub kind: RecordKind,
    pub offset: usize,
    pub width: u32,
}

/// A named run of records. Markers carry no bits; the decoder knows every
/// section length from the protocol parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub name: &'static str,
    pub start: usize,
    pub len: usize,
}

/// A transcript produced by an encoder. Words are stored most significant bit
/// first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Message {
    bits: Vec<bool>,
    records: Vec<Record>,
    sections: Vec<Section>,
}

impl Message {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn begin_section(&mut self, name: &'static str) {
        self.sections.push(Section {
            name,
            start: self.bits.len(),
            len: 0,
        });
    }

    pub fn push(&mut self, kind: RecordKind, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0);
        self.records.push(Record {
            kind,
            offset: self.bits.len(),
            width,
        });
        self.bits
            .extend((0..width).rev().map(|b| (value >> b) & 1 == 1));
        if let Some(s) = self.sections.last_mut() {
            s.len = self.bits.len() - s.start;
        }
    }

    pub fn push_bit(&mut self, kind: RecordKind, bit: bool) {
        self.push(kind, bit as u64, 1);
    }

    pub fn bit_len(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn flip_bit(&mut self, pos: usize) {
        self.bits[pos] ^= true;
    }

    /// Bits packed into bytes, first bit in the high position, zero padded.
    pub fn to_hex(&self) -> String {
        self.bits
            .chunks(8)
            .map(|chunk| {
                let byte = chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | (b as u8) << (7 - i));
                format!("{byte:02x}")
            })
            .collect()
    }

    pub fn reader(&self) -> MessageReader<'_> {
        MessageReader { msg: self, pos: 0 }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.bits.len())?;
        for s in &self.sections {
            write!(f, ", {}={}", s.name, s.len)?;
        }
        Ok(())
    }
}

pub struct MessageReader<'a> {
    msg: &'a Message,
    pos: usize,
}

impl MessageReader<'_> {
    pub fn take(&mut self, width: u32) -> Result<u64> {
        let end = self.pos + width as usize;
        if end > self.msg.bits.len() {
            return Err(Error::ProtocolViolation(format!(
                "message ends at bit {}, needed {width} more bits at {}",
                self.msg.bits.len(),
                self.pos
            )));
        }
        let v = self.msg.bits[self.pos..end]
            .iter()
            .fold(0u64, |acc, &b| acc << 1 | b as u64);
        self.pos = end;
        Ok(v)
    }

    pub fn take_bit(&mut self) -> Result<bool> {
        self.take(1).map(|v| v == 1)
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.msg.bits.len() - self.pos
    }

    /// Errors unless every bit has been consumed.
    pub fn finish(self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::ProtocolViolation(format!(
                "{} unread bits after decoding",
                self.remaining()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_words() {
        let mut m = Message::new();
        m.begin_section("a");
        m.push(RecordKind::Address, 0xA5, 8);
        m.push(RecordKind::Content, 3, 2);
        m.begin_section("b");
        m.push_bit(RecordKind::GateValue, true);
        m.push(RecordKind::Content, u64::MAX, 64);
        assert_eq!(m.bit_len(), 8 + 2 + 1 + 64);
        assert_eq!(m.sections()[0].len, 10);
        assert_eq!(m.sections()[1].len, 65);
        assert_eq!(m.records().len(), 4);
        let mut r = m.reader();
        assert_eq!(r.take(8).unwrap(), 0xA5);
        assert_eq!(r.take(2).unwrap(), 3);
        assert!(r.take_bit().unwrap());
        assert_eq!(r.take(64).unwrap(), u64::MAX);
        r.finish().unwrap();
    }

    #[test]
    fn underrun_and_leftovers() {
        let mut m = Message::new();
        m.push(RecordKind::Content, 1, 4);
        let mut r = m.reader();
        assert!(matches!(r.take(5), Err(Error::ProtocolViolation(_))));
        let mut r = m.reader();
        r.take(2).unwrap();
        assert!(r.finish().is_err());
    }

    #[test]
    fn hex_and_flip() {
        let mut m = Message::new();
        m.push(RecordKind::Content, 0xA5, 8);
        m.push(RecordKind::Content, 1, 1);
        assert_eq!(m.to_hex(), "a580");
        m.flip_bit(0);
        assert_eq!(m.to_hex(), "2580");
        assert_eq!(Message::new().to_hex(), "");
    }
}
