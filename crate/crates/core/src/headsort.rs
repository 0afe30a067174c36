//! Total order of the insert-heads.
//!
//! Two suffixes with different insert points are ordered by insert point.
//! Inside a bucket the `(len, flag, mismatch)` part of their tuples decides,
//! and when the tuples agree both suffixes read the same factor and mismatch
//! symbol, so the comparison continues right after the mismatch.

use std::cmp::Ordering;
use std::io::{Read, Write};
use std::ops::Range;

use crate::error::{CmsError, Result};
use crate::mstats::{ECms, Ems, Flag, InsertHead};
use crate::refindex::ReferenceIndex;
use crate::sais;

/// Sort key of the `(len, flag)` pair inside one bucket: `S` keys ascend
/// with the length, `L` keys descend, and every `S` key precedes every `L`.
#[inline]
pub fn length_flag_key(len: usize, flag: Flag) -> u64 {
    match flag {
        Flag::S => len as u64,
        Flag::L => u64::MAX - len as u64,
    }
}

/// Orders two tuples by insert point, then `(len, flag)`, then mismatch
/// symbol. `Equal` is a tie that only the continuation can break.
#[inline]
pub fn compare_heads(a: &Ems, b: &Ems) -> Ordering {
    a.ip.cmp(&b.ip)
        .then_with(|| length_flag_key(a.len, a.flag).cmp(&length_flag_key(b.len, b.flag)))
        .then_with(|| a.mismatch.cmp(&b.mismatch))
}

/// Compares arbitrary collection suffixes using only the eCMS.
#[derive(Clone, Copy)]
pub struct SuffixComparator<'a> {
    heads: &'a [InsertHead],
    isa: &'a [usize],
    ranks: Option<&'a [usize]>,
}

impl<'a> SuffixComparator<'a> {
    pub fn new(heads: &'a [InsertHead], isa: &'a [usize]) -> Self {
        Self {
            heads,
            isa,
            ranks: None,
        }
    }

    /// Lets comparisons between two head starts use their final ranks.
    pub fn with_ranks(mut self, ranks: &'a [usize]) -> Self {
        self.ranks = Some(ranks);
        self
    }

    #[inline]
    fn governing(&self, pos: usize) -> usize {
        self.heads.partition_point(|h| h.pos <= pos) - 1
    }

    #[inline]
    fn ems(&self, head: usize, pos: usize) -> Ems {
        let h = &self.heads[head];
        let offset = pos - h.pos;
        let ref_pos = h.ref_pos + offset;
        Ems {
            ip: self.isa[ref_pos],
            ref_pos,
            len: h.len - offset,
            flag: h.flag,
            mismatch: h.mismatch,
        }
    }

    /// Lexicographic order of the suffixes starting at `p1` and `p2`.
    pub fn compare_positions(&self, mut p1: usize, mut p2: usize) -> Ordering {
        loop {
            if p1 == p2 {
                return Ordering::Equal;
            }
            let (k1, k2) = (self.governing(p1), self.governing(p2));
            if let Some(ranks) = self.ranks {
                if self.heads[k1].pos == p1 && self.heads[k2].pos == p2 {
                    return ranks[k1].cmp(&ranks[k2]);
                }
            }
            let (e1, e2) = (self.ems(k1, p1), self.ems(k2, p2));
            match compare_heads(&e1, &e2) {
                Ordering::Equal => {
                    // Equal tuples imply equal factor lengths.
                    p1 += e1.len + 1;
                    p2 += e2.len + 1;
                }
                other => return other,
            }
        }
    }

    /// Order of the suffix at `pos` (tuple `ems`) relative to head `head`.
    #[inline]
    pub fn compare_with_head(&self, pos: usize, ems: &Ems, head: usize) -> Ordering {
        let h = &self.heads[head];
        let he = self.ems(head, h.pos);
        match compare_heads(ems, &he) {
            Ordering::Equal => self.compare_positions(pos + ems.len + 1, h.pos + he.len + 1),
            other => other,
        }
    }

    /// Order of heads `a` and `b` (indices in text order).
    pub fn compare_head_indices(&self, a: usize, b: usize) -> Ordering {
        let (ha, hb) = (&self.heads[a], &self.heads[b]);
        self.compare_with_head(ha.pos, &self.ems(a, ha.pos), b)
            .then_with(|| ha.pos.cmp(&hb.pos))
    }
}

/// Sorted insert-heads with per-bucket views.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadOrder {
    /// Head indices (text order) in ascending suffix order.
    pub order: Vec<usize>,
    /// `rank[h]` is the position of head `h` in `order`.
    pub rank: Vec<usize>,
    bucket_start: Vec<usize>,
}

impl HeadOrder {
    fn from_order(order: Vec<usize>, heads: &[InsertHead], isa: &[usize]) -> Self {
        let mut rank = vec![0; order.len()];
        for (r, &h) in order.iter().enumerate() {
            rank[h] = r;
        }
        let mut bucket_start = vec![0usize; isa.len() + 1];
        for h in heads {
            bucket_start[isa[h.ref_pos] + 1] += 1;
        }
        for b in 1..bucket_start.len() {
            bucket_start[b] += bucket_start[b - 1];
        }
        Self {
            order,
            rank,
            bucket_start,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Ranks of the heads with insert point `ip`.
    pub fn bucket(&self, ip: usize) -> Range<usize> {
        self.bucket_start[ip]..self.bucket_start[ip + 1]
    }

    /// Head indices of bucket `ip`, ascending.
    pub fn bucket_heads(&self, ip: usize) -> &[usize] {
        &self.order[self.bucket(ip)]
    }

    pub fn has_heads(&self, ip: usize) -> bool {
        self.bucket_start[ip] != self.bucket_start[ip + 1]
    }

    pub fn occupied_buckets(&self) -> usize {
        self.bucket_start
            .windows(2)
            .filter(|w| w[0] != w[1])
            .count()
    }
}

/// Sorts the heads with the tuple comparator and continuation tie-break.
pub fn sort_insert_heads(ecms: &ECms, index: &ReferenceIndex) -> HeadOrder {
    let isa = index.isa();
    let heads = &ecms.heads;
    let cmp = SuffixComparator::new(heads, isa);
    let keys: Vec<Ems> = heads.iter().map(|h| h.ems(isa)).collect();
    let mut order: Vec<usize> = (0..heads.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        compare_heads(&keys[a], &keys[b]).then_with(|| {
            cmp.compare_positions(
                heads[a].pos + keys[a].len + 1,
                heads[b].pos + keys[b].len + 1,
            )
        })
    });
    HeadOrder::from_order(order, heads, isa)
}

/// Heads renamed by the rank of their tuple and laid out in text order, one
/// separator per document.
///
/// Symbol 0 terminates the string, `d` separates document `d`, and tuple
/// ranks start at `documents + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metastring {
    pub symbols: Vec<u32>,
    pub alphabet_size: usize,
}

impl Metastring {
    pub fn build(heads: &[InsertHead], isa: &[usize]) -> Result<Self> {
        let documents = heads.last().map_or(0, |h| h.doc as usize);
        let keys: Vec<Ems> = heads.iter().map(|h| h.ems(isa)).collect();
        let mut by_tuple: Vec<usize> = (0..heads.len()).collect();
        by_tuple.sort_unstable_by(|&a, &b| compare_heads(&keys[a], &keys[b]));
        let mut meta = vec![0u32; heads.len()];
        let mut next = documents + 1;
        for (i, &h) in by_tuple.iter().enumerate() {
            if i > 0 && compare_heads(&keys[by_tuple[i - 1]], &keys[h]) != Ordering::Equal {
                next += 1;
            }
            meta[h] = u32::try_from(next).map_err(|_| {
                CmsError::Precondition("too many distinct head tuples for a metastring".into())
            })?;
        }
        let alphabet_size = next + 1;

        let mut symbols = Vec::with_capacity(heads.len() + documents + 1);
        for (i, h) in heads.iter().enumerate() {
            symbols.push(meta[i]);
            if heads.get(i + 1).is_none_or(|n| n.doc != h.doc) {
                symbols.push(h.doc);
            }
        }
        symbols.push(0);
        Ok(Self {
            symbols,
            alphabet_size,
        })
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.alphabet_size as u64).to_le_bytes())?;
        out.write_all(&(self.symbols.len() as u64).to_le_bytes())?;
        for s in &self.symbols {
            out.write_all(&s.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut word = [0u8; 8];
        input.read_exact(&mut word)?;
        let alphabet_size = u64::from_le_bytes(word) as usize;
        input.read_exact(&mut word)?;
        let len = u64::from_le_bytes(word) as usize;
        let mut symbols = Vec::with_capacity(len);
        let mut sym = [0u8; 4];
        for _ in 0..len {
            input.read_exact(&mut sym)?;
            let s = u32::from_le_bytes(sym);
            if s as usize >= alphabet_size {
                return Err(CmsError::Malformed {
                    what: "metastring",
                    reason: format!("symbol {s} outside alphabet of size {alphabet_size}"),
                });
            }
            symbols.push(s);
        }
        Ok(Self {
            symbols,
            alphabet_size,
        })
    }

    /// Head order read off the suffix array of the metastring, or `None`
    /// if it disagrees with the suffix comparator anywhere.
    pub fn head_order(&self, heads: &[InsertHead], isa: &[usize]) -> Option<HeadOrder> {
        let sa = sais::suffix_array(&self.symbols, self.alphabet_size);
        let documents = heads.last().map_or(0, |h| h.doc);
        let mut meta_to_head = vec![usize::MAX; self.symbols.len()];
        let mut h = 0;
        for (t, &s) in self.symbols.iter().enumerate() {
            if s > documents {
                meta_to_head[t] = h;
                h += 1;
            }
        }
        if h != heads.len() {
            return None;
        }
        let order: Vec<usize> = sa
            .into_iter()
            .map(|t| meta_to_head[t])
            .filter(|&h| h != usize::MAX)
            .collect();
        let cmp = SuffixComparator::new(heads, isa);
        let consistent = order
            .windows(2)
            .all(|w| cmp.compare_positions(heads[w[0]].pos, heads[w[1]].pos) == Ordering::Less);
        consistent.then(|| HeadOrder::from_order(order, heads, isa))
    }
}

/// Head order via the metastring, validated against the comparator.
/// `None` when validation fails.
pub fn metastring_order(ecms: &ECms, index: &ReferenceIndex) -> Result<Option<HeadOrder>> {
    let meta = Metastring::build(&ecms.heads, index.isa())?;
    Ok(meta.head_order(&ecms.heads, index.isa()))
}

/// Metastring head sort with fallback to [`sort_insert_heads`].
pub fn sort_insert_heads_metastring(ecms: &ECms, index: &ReferenceIndex) -> Result<HeadOrder> {
    match metastring_order(ecms, index)? {
        Some(order) => Ok(order),
        None => {
            log::warn!("metastring head order failed validation; using comparator sort");
            Ok(sort_insert_heads(ecms, index))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mstats::{compute_ecms, EcmsOptions};
    use crate::textmodel::{AugmentedReference, Collection, Symbol};

    fn example() -> (ReferenceIndex, ECms) {
        let idx =
            ReferenceIndex::build(AugmentedReference::new(b"CATTAGATTAG").unwrap(), 256).unwrap();
        let c = Collection::from_bodies([b"TAGAGATTATT".as_slice(), b"GATTACATTAG"]).unwrap();
        let ecms = compute_ecms(&c, &idx, EcmsOptions::default()).unwrap();
        (idx, ecms)
    }

    fn sorted_positions(order: &HeadOrder, ecms: &ECms) -> Vec<usize> {
        order.order.iter().map(|&h| ecms.heads[h].pos + 1).collect()
    }

    #[test]
    fn tuple_comparison_cases() {
        let e = |len, flag, c: u8| Ems {
            ip: 4,
            ref_pos: 0,
            len,
            flag,
            mismatch: Symbol::Regular(c),
        };
        // shorter with S is smaller, shorter with L is larger
        assert_eq!(
            compare_heads(&e(2, Flag::S, b'A'), &e(5, Flag::L, b'A')),
            Ordering::Less
        );
        assert_eq!(
            compare_heads(&e(2, Flag::S, b'A'), &e(5, Flag::S, b'A')),
            Ordering::Less
        );
        assert_eq!(
            compare_heads(&e(2, Flag::L, b'A'), &e(5, Flag::S, b'A')),
            Ordering::Greater
        );
        assert_eq!(
            compare_heads(&e(2, Flag::L, b'A'), &e(5, Flag::L, b'A')),
            Ordering::Greater
        );
        assert_eq!(
            compare_heads(&e(3, Flag::S, b'T'), &e(3, Flag::L, b'A')),
            Ordering::Less
        );
        assert_eq!(
            compare_heads(&e(3, Flag::L, b'C'), &e(3, Flag::L, b'G')),
            Ordering::Less
        );
        assert_eq!(
            compare_heads(&e(3, Flag::L, b'C'), &e(3, Flag::L, b'C')),
            Ordering::Equal
        );
        let mut other_bucket = e(9, Flag::S, b'A');
        other_bucket.ip = 3;
        assert_eq!(
            compare_heads(&other_bucket, &e(0, Flag::S, b'A')),
            Ordering::Less
        );
    }

    #[test]
    fn sentinel_heads_order_by_document() {
        let s = |d| Ems {
            ip: 0,
            ref_pos: 11,
            len: 0,
            flag: Flag::L,
            mismatch: Symbol::Sentinel(d),
        };
        assert_eq!(compare_heads(&s(1), &s(2)), Ordering::Less);
        assert_eq!(compare_heads(&s(2), &s(1)), Ordering::Greater);
    }

    #[test]
    fn two_document_sorted_heads() {
        let (idx, ecms) = example();
        let order = sort_insert_heads(&ecms, &idx);
        assert_eq!(
            sorted_positions(&order, &ecms),
            vec![12, 24, 4, 9, 6, 18, 13, 1]
        );
        assert_eq!(order.occupied_buckets(), 7);
        assert_eq!(order.bucket_heads(0).len(), 2);
        assert!(!order.has_heads(6));

        let meta = sort_insert_heads_metastring(&ecms, &idx).unwrap();
        assert_eq!(meta, order);
        assert!(metastring_order(&ecms, &idx).unwrap().is_some());
    }

    #[test]
    fn two_document_position_comparisons() {
        let (idx, ecms) = example();
        let cmp = SuffixComparator::new(&ecms.heads, idx.isa());
        // suffix 19 vs head 6
        assert_eq!(cmp.compare_positions(18, 5), Ordering::Less);
        assert_eq!(cmp.compare_positions(5, 18), Ordering::Greater);
        assert_eq!(cmp.compare_positions(7, 7), Ordering::Equal);
    }

    #[test]
    fn single_head() {
        let idx = ReferenceIndex::build(AugmentedReference::new(b"A").unwrap(), 4).unwrap();
        let c = Collection::from_bodies([b"".as_slice()]).unwrap();
        let ecms = compute_ecms(&c, &idx, EcmsOptions::default()).unwrap();
        let order = sort_insert_heads(&ecms, &idx);
        assert_eq!(order.order, vec![0]);
        assert_eq!(order.rank, vec![0]);
    }

    #[test]
    fn metastring_layout_and_spill() {
        let (idx, ecms) = example();
        let meta = Metastring::build(&ecms.heads, idx.isa()).unwrap();
        // 8 heads, 2 separators, terminator
        assert_eq!(meta.symbols.len(), 11);
        assert_eq!(meta.symbols[5], 1);
        assert_eq!(meta.symbols[9], 2);
        assert_eq!(*meta.symbols.last().unwrap(), 0);
        assert!(meta.symbols.iter().filter(|&&s| s > 2).all(|&s| s >= 3));
        let mut buf = Vec::new();
        meta.write_to(&mut buf).unwrap();
        assert_eq!(Metastring::read_from(buf.as_slice()).unwrap(), meta);
    }
}
