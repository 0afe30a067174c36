//! Enhanced compressed matching statistics of the collection against the
//! reference.
//!
//! The collection is streamed left to right while the current matching
//! factor is kept as an interval of reference suffix-array rows. Only
//! insert-heads are recorded; every other position is recovered from the
//! head governing it by the decrement formula in [`derived_ems`].

use std::io::{Read, Write};

use crate::error::{CmsError, Result};
use crate::refindex::ReferenceIndex;
use crate::textmodel::{Collection, Symbol, END};

/// Whether factor-plus-mismatch sorts before (`S`) or after (`L`) the
/// reference suffix at the insert point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    S,
    L,
}

/// Rows `start..=end` of the reference suffix array whose suffixes share the
/// current factor of length `len` as a prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorRange {
    pub start: usize,
    pub end: usize,
    pub len: usize,
}

impl FactorRange {
    /// Interval of the empty factor.
    pub fn full(index: &ReferenceIndex) -> Self {
        Self {
            start: 0,
            end: index.len() - 1,
            len: 0,
        }
    }

    pub fn is_singleton(&self) -> bool {
        self.start == self.end
    }
}

/// One eCMS record. Positions are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InsertHead {
    /// Start position in the concatenated collection.
    pub pos: usize,
    /// 1-based document id.
    pub doc: u32,
    /// Reference text position at the insert point, `SA_R[ip]`.
    pub ref_pos: usize,
    /// Matching factor length.
    pub len: usize,
    pub flag: Flag,
    pub mismatch: Symbol,
}

/// Enhanced matching statistics of a single position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ems {
    /// Insert point (suffix array row).
    pub ip: usize,
    pub ref_pos: usize,
    pub len: usize,
    pub flag: Flag,
    pub mismatch: Symbol,
}

/// Byte key that places a collection symbol among reference bytes: the
/// terminator is 0, a sentinel 1, and regular bytes stay as they are.
pub(crate) fn probe_key(symbol: Symbol) -> u8 {
    match symbol {
        Symbol::Terminator => 0,
        Symbol::Sentinel(_) => 1,
        Symbol::Regular(b) => b,
    }
}

#[inline]
fn collection_key(byte: u8) -> u8 {
    if byte == END {
        1
    } else {
        byte
    }
}

/// Rows in `start..end` are sorted by the byte at offset `off`; returns the
/// first row whose byte is not `< key` (or `<= key` when `inclusive`).
#[inline]
fn lower_row(
    index: &ReferenceIndex,
    start: usize,
    end: usize,
    off: usize,
    key: u8,
    inclusive: bool,
) -> usize {
    let text = index.text();
    let rows = &index.sa()[start..end];
    start
        + rows.partition_point(|&p| {
            let b = text[p + off];
            if inclusive {
                b <= key
            } else {
                b < key
            }
        })
}

/// Narrows `range` to suffixes continuing with `key` at offset `range.len`.
/// On failure returns the first row whose byte there exceeds `key`.
#[inline]
fn extend_by_key(
    index: &ReferenceIndex,
    range: FactorRange,
    key: u8,
) -> std::result::Result<FactorRange, usize> {
    let lo = lower_row(index, range.start, range.end + 1, range.len, key, false);
    let hi = lower_row(index, lo, range.end + 1, range.len, key, true);
    if lo == hi {
        Err(lo)
    } else {
        Ok(FactorRange {
            start: lo,
            end: hi - 1,
            len: range.len + 1,
        })
    }
}

/// A failed extension leaves a gap between two adjacent rows. The gap is
/// named by the row above it with `S` when that row still carries the
/// factor, otherwise by the row below it with `L`. The empty factor always
/// lands right after the terminator row.
#[inline]
fn insert_point_from(range: FactorRange, first_greater: usize) -> (usize, Flag) {
    if range.len > 0 && first_greater <= range.end {
        (first_greater, Flag::S)
    } else {
        (first_greater - 1, Flag::L)
    }
}

/// Extends the factor by one symbol. `None` means the factor cannot be
/// extended: `symbol` is the mismatch character.
pub fn right_extend(
    range: FactorRange,
    symbol: Symbol,
    index: &ReferenceIndex,
) -> Option<FactorRange> {
    match symbol {
        Symbol::Regular(b) => extend_by_key(index, range, b).ok(),
        _ => None,
    }
}

/// Drops the first symbol of the factor and widens the interval to every
/// reference suffix prefixed by what remains.
///
/// With `leaf_branch`, a factor longer than every LCP value around its new
/// row is known to stay a singleton and no smaller-value queries are made.
pub fn left_contract(
    range: FactorRange,
    index: &ReferenceIndex,
    leaf_branch: bool,
) -> Result<FactorRange> {
    if range.len == 0 {
        return Err(CmsError::Precondition(
            "cannot contract an empty factor".into(),
        ));
    }
    let len = range.len - 1;
    if len == 0 {
        return Ok(FactorRange::full(index));
    }
    let row = index.isa()[index.sa()[range.start] + 1];
    let n = index.len();
    if leaf_branch && len > index.lcp_bound(row) && (row + 1 == n || len > index.lcp_bound(row + 1))
    {
        return Ok(FactorRange {
            start: row,
            end: row,
            len,
        });
    }
    let support = index
        .smaller_values()
        .ok_or_else(|| CmsError::Precondition("LCP support was released from this index".into()))?;
    let lcp = index.lcp();
    let start = support.prev_smaller_than(lcp, row + 1, len).unwrap_or(0);
    let end = support
        .next_smaller_than(lcp, row, len)
        .map_or(n - 1, |next| next - 1);
    Ok(FactorRange { start, end, len })
}

/// Insert point and flag of a suffix whose factor has interval `range` and
/// whose next symbol is `mismatch`.
pub fn insert_point_and_flag(
    range: FactorRange,
    mismatch: Symbol,
    index: &ReferenceIndex,
) -> Result<(usize, Flag)> {
    if matches!(mismatch, Symbol::Terminator) {
        return Err(CmsError::Precondition(
            "the reference terminator cannot be a mismatch symbol".into(),
        ));
    }
    match extend_by_key(index, range, probe_key(mismatch)) {
        Ok(_) => Err(CmsError::Precondition(format!(
            "factor extended by {mismatch} still occurs in the reference"
        ))),
        Err(first_greater) => Ok(insert_point_from(range, first_greater)),
    }
}

/// Switches for [`compute_ecms`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EcmsOptions {
    pub leaf_branch: bool,
}

impl Default for EcmsOptions {
    fn default() -> Self {
        Self { leaf_branch: true }
    }
}

/// Insert-heads in text order plus per-bucket suffix counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ECms {
    pub heads: Vec<InsertHead>,
    /// Number of collection suffixes per insert point, indexed by row.
    pub bucket_counters: Vec<u64>,
}

/// The tuple of position `pos`, which must lie in the run of `head`.
pub fn derived_ems(head: &InsertHead, pos: usize, index: &ReferenceIndex) -> Result<Ems> {
    if pos < head.pos || pos - head.pos > head.len {
        return Err(CmsError::Precondition(format!(
            "position {pos} is outside the run of the head at {}",
            head.pos
        )));
    }
    let offset = pos - head.pos;
    let ref_pos = head.ref_pos + offset;
    Ok(Ems {
        ip: index.isa()[ref_pos],
        ref_pos,
        len: head.len - offset,
        flag: head.flag,
        mismatch: head.mismatch,
    })
}

impl InsertHead {
    /// The head's own tuple.
    #[inline]
    pub fn ems(&self, isa: &[usize]) -> Ems {
        Ems {
            ip: isa[self.ref_pos],
            ref_pos: self.ref_pos,
            len: self.len,
            flag: self.flag,
            mismatch: self.mismatch,
        }
    }
}

impl ECms {
    /// Index of the head whose run covers `pos`.
    pub fn governing_head(&self, pos: usize) -> usize {
        self.heads.partition_point(|h| h.pos <= pos) - 1
    }

    pub fn ems_at(&self, pos: usize, index: &ReferenceIndex) -> Ems {
        let head = &self.heads[self.governing_head(pos)];
        let offset = pos - head.pos;
        let ref_pos = head.ref_pos + offset;
        Ems {
            ip: index.isa()[ref_pos],
            ref_pos,
            len: head.len - offset,
            flag: head.flag,
            mismatch: head.mismatch,
        }
    }

    pub fn is_head(&self, pos: usize) -> bool {
        self.heads.binary_search_by_key(&pos, |h| h.pos).is_ok()
    }

    /// `N`, recovered from the counters.
    pub fn total_suffixes(&self) -> u64 {
        self.bucket_counters.iter().sum()
    }

    /// Number of distinct `(ref_pos, len, flag, mismatch)` tuples.
    pub fn unique_tuples(&self) -> usize {
        let mut tuples: Vec<(usize, usize, Flag, Symbol)> = self
            .heads
            .iter()
            .map(|h| (h.ref_pos, h.len, h.flag, h.mismatch))
            .collect();
        tuples.sort_unstable();
        tuples.dedup();
        tuples.len()
    }

    /// Writes the heads as a record count followed by fixed-width records:
    /// pos u64, ref_pos u64, len u64, flag u8, mismatch u8 (0 for the
    /// sentinel), doc u32, all little-endian.
    pub fn write_heads<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.heads.len() as u64).to_le_bytes())?;
        let mut record = [0u8; HEAD_RECORD_BYTES];
        for h in &self.heads {
            record[0..8].copy_from_slice(&(h.pos as u64).to_le_bytes());
            record[8..16].copy_from_slice(&(h.ref_pos as u64).to_le_bytes());
            record[16..24].copy_from_slice(&(h.len as u64).to_le_bytes());
            record[24] = match h.flag {
                Flag::S => 0,
                Flag::L => 1,
            };
            record[25] = match h.mismatch {
                Symbol::Sentinel(_) => END,
                Symbol::Regular(b) => b,
                Symbol::Terminator => {
                    return Err(CmsError::Precondition(
                        "head with terminator mismatch".into(),
                    ))
                }
            };
            record[26..30].copy_from_slice(&h.doc.to_le_bytes());
            out.write_all(&record)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads heads written by [`ECms::write_heads`].
    pub fn read_heads<R: Read>(mut input: R) -> Result<Vec<InsertHead>> {
        let mut count = [0u8; 8];
        input.read_exact(&mut count)?;
        let count = u64::from_le_bytes(count) as usize;
        let mut heads = Vec::with_capacity(count);
        let mut record = [0u8; HEAD_RECORD_BYTES];
        let le64 = |b: &[u8]| u64::from_le_bytes(b.try_into().unwrap()) as usize;
        for _ in 0..count {
            input.read_exact(&mut record)?;
            let doc = u32::from_le_bytes(record[26..30].try_into().unwrap());
            let flag = match record[24] {
                0 => Flag::S,
                1 => Flag::L,
                other => {
                    return Err(CmsError::Malformed {
                        what: "head record",
                        reason: format!("flag byte {other}"),
                    })
                }
            };
            let mismatch = match record[25] {
                END => Symbol::Sentinel(doc),
                b => Symbol::Regular(b),
            };
            heads.push(InsertHead {
                pos: le64(&record[0..8]),
                doc,
                ref_pos: le64(&record[8..16]),
                len: le64(&record[16..24]),
                flag,
                mismatch,
            });
        }
        Ok(heads)
    }
}

/// Size in bytes of one spilled head record.
pub const HEAD_RECORD_BYTES: usize = 30;

/// Streams the collection against the reference and records insert-heads and
/// bucket counters.
pub fn compute_ecms(
    collection: &Collection,
    index: &ReferenceIndex,
    options: EcmsOptions,
) -> Result<ECms> {
    if collection.is_empty() {
        return Err(CmsError::EmptyCollection);
    }
    let text = collection.raw();
    let sa = index.sa();
    let mut bucket_counters = vec![0u64; index.len()];
    let mut heads = Vec::new();

    for (d, &doc_start) in collection.starts().iter().enumerate() {
        let doc = d as u32 + 1;
        let doc_end = collection.doc_range(doc).end;
        let mut range = FactorRange::full(index);
        let mut prev_ref_pos = usize::MAX;
        for pos in doc_start..doc_end {
            // Grow the factor C[pos .. pos + len) until it stops occurring in R.
            let (ip, flag) = loop {
                let byte = text[pos + range.len];
                match extend_by_key(index, range, collection_key(byte)) {
                    Ok(next) => range = next,
                    Err(first_greater) => break insert_point_from(range, first_greater),
                }
            };
            let ref_pos = sa[ip];
            bucket_counters[ip] += 1;
            if pos == doc_start || ref_pos != prev_ref_pos.wrapping_add(1) {
                let mismatch_byte = text[pos + range.len];
                heads.push(InsertHead {
                    pos,
                    doc,
                    ref_pos,
                    len: range.len,
                    flag,
                    mismatch: if mismatch_byte == END {
                        Symbol::Sentinel(doc)
                    } else {
                        Symbol::Regular(mismatch_byte)
                    },
                });
            }
            prev_ref_pos = ref_pos;
            if pos + 1 < doc_end {
                range = left_contract(range, index, options.leaf_branch)?;
            }
        }
    }
    Ok(ECms {
        heads,
        bucket_counters,
    })
}
