//! Data structures over the augmented reference: suffix array, its inverse,
//! the LCP array with previous/next-smaller-value support, the reference BWT
//! and blockwise LCP maxima.
//!
//! Rows and text positions are 0-based throughout.

use crate::error::{CmsError, Result};
use crate::sais;
use crate::textmodel::{AugmentedReference, END};

/// Default number of LCP entries per block for the leaf-branch bound.
pub const DEFAULT_LCP_BLOCK_SIZE: usize = 256;

/// Entries scanned linearly by [`SmallerValues`] before consulting the
/// block-minimum table.
const SCAN_BLOCK: usize = 64;

/// Suffix array of a text that ends with its unique smallest byte.
pub fn build_suffix_array(text: &[u8]) -> Vec<usize> {
    let mapped: Vec<u32> = text.iter().map(|&b| b as u32).collect();
    sais::suffix_array(&mapped, 256)
}

pub fn build_inverse(sa: &[usize]) -> Vec<usize> {
    let mut isa = vec![0; sa.len()];
    for (rank, &pos) in sa.iter().enumerate() {
        isa[pos] = rank;
    }
    isa
}

/// LCP array by the permuted-LCP (Φ) method. `lcp[0] = 0`; `lcp[i]` is the
/// common prefix length of the suffixes at rows `i - 1` and `i`.
pub fn build_lcp(text: &[u8], sa: &[usize]) -> Vec<usize> {
    let n = sa.len();
    if n == 0 {
        return Vec::new();
    }
    let mut phi = vec![usize::MAX; n];
    for i in 1..n {
        phi[sa[i]] = sa[i - 1];
    }
    let mut plcp = vec![0; n];
    let mut l = 0;
    for i in 0..n {
        let j = phi[i];
        if j == usize::MAX {
            plcp[i] = 0;
            l = 0;
            continue;
        }
        while i + l < n && j + l < n && text[i + l] == text[j + l] {
            l += 1;
        }
        plcp[i] = l;
        l = l.saturating_sub(1);
    }
    sa.iter().map(|&p| plcp[p]).collect()
}

/// Maximum of `lcp` over consecutive blocks of `block_size` entries.
pub fn block_maxima(lcp: &[usize], block_size: usize) -> Vec<usize> {
    assert!(block_size > 0, "block size must be positive");
    lcp.chunks(block_size)
        .map(|block| block.iter().copied().max().unwrap_or(0))
        .collect()
}

/// Previous/next smaller value queries over an integer array.
///
/// Short linear scans inside a block of [`SCAN_BLOCK`] entries, and a sparse
/// table over block minima to jump to the nearest block that can contain an
/// answer. Queries take the array they were built for.
#[derive(Debug, Clone)]
pub struct SmallerValues {
    len: usize,
    /// `table[k][b]` is the minimum of blocks `b .. b + 2^k`.
    table: Vec<Vec<usize>>,
}

impl SmallerValues {
    pub fn new(values: &[usize]) -> Self {
        let mins: Vec<usize> = values
            .chunks(SCAN_BLOCK)
            .map(|b| b.iter().copied().min().unwrap_or(usize::MAX))
            .collect();
        let mut table = vec![mins];
        let mut width = 1;
        while 2 * width <= table[0].len() {
            let prev = table.last().unwrap();
            let next: Vec<usize> = (0..prev.len() - width)
                .map(|b| prev[b].min(prev[b + width]))
                .collect();
            table.push(next);
            width *= 2;
        }
        Self {
            len: values.len(),
            table,
        }
    }

    /// Largest `i' < i` with `values[i'] < threshold`.
    pub fn prev_smaller_than(&self, values: &[usize], i: usize, threshold: usize) -> Option<usize> {
        debug_assert_eq!(values.len(), self.len);
        let i = i.min(self.len);
        let block = i / SCAN_BLOCK;
        let block_start = block * SCAN_BLOCK;
        if let Some(hit) = (block_start..i).rev().find(|&j| values[j] < threshold) {
            return Some(hit);
        }
        // Blocks [0, cur) remain; shrink cur while the tail segment is all >= threshold.
        let mut cur = block;
        for k in (0..self.table.len()).rev() {
            let width = 1 << k;
            if cur >= width && self.table[k][cur - width] >= threshold {
                cur -= width;
            }
        }
        if cur == 0 {
            return None;
        }
        let b = cur - 1;
        let range = b * SCAN_BLOCK..((b + 1) * SCAN_BLOCK).min(self.len);
        range.rev().find(|&j| values[j] < threshold)
    }

    /// Smallest `i' > i` with `values[i'] < threshold`.
    pub fn next_smaller_than(&self, values: &[usize], i: usize, threshold: usize) -> Option<usize> {
        debug_assert_eq!(values.len(), self.len);
        let from = i + 1;
        if from >= self.len {
            return None;
        }
        let block = from / SCAN_BLOCK;
        let block_end = ((block + 1) * SCAN_BLOCK).min(self.len);
        if let Some(hit) = (from..block_end).find(|&j| values[j] < threshold) {
            return Some(hit);
        }
        let blocks = self.table[0].len();
        let mut cur = block + 1;
        for k in (0..self.table.len()).rev() {
            let width = 1 << k;
            if cur + width <= blocks && self.table[k][cur] >= threshold {
                cur += width;
            }
        }
        if cur >= blocks {
            return None;
        }
        let range = cur * SCAN_BLOCK..((cur + 1) * SCAN_BLOCK).min(self.len);
        range.into_iter().find(|&j| values[j] < threshold)
    }

    /// `max{i' < i : values[i'] < values[i]}`, `None` for the empty set.
    pub fn psv(&self, values: &[usize], i: usize) -> Result<Option<usize>> {
        check_index(i, self.len)?;
        Ok(self.prev_smaller_than(values, i, values[i]))
    }

    /// `min{i' > i : values[i'] < values[i]}`, `None` for the empty set.
    pub fn nsv(&self, values: &[usize], i: usize) -> Result<Option<usize>> {
        check_index(i, self.len)?;
        Ok(self.next_smaller_than(values, i, values[i]))
    }
}

fn check_index(index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(CmsError::OutOfRange { index, len });
    }
    Ok(())
}

/// All per-reference structures needed to compute matching statistics and to
/// expand the reference BWT.
#[derive(Debug, Clone)]
pub struct ReferenceIndex {
    reference: AugmentedReference,
    sa: Vec<usize>,
    isa: Vec<usize>,
    lcp: Vec<usize>,
    smaller: Option<SmallerValues>,
    bwt: Vec<u8>,
    block_max: Vec<usize>,
    block_size: usize,
}

impl ReferenceIndex {
    pub fn build(reference: AugmentedReference, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(CmsError::Precondition(
                "LCP block size must be positive".into(),
            ));
        }
        let text = reference.text();
        let sa = build_suffix_array(text);
        let isa = build_inverse(&sa);
        let lcp = build_lcp(text, &sa);
        let smaller = SmallerValues::new(&lcp);
        let bwt = sa
            .iter()
            .map(|&p| if p == 0 { END } else { text[p - 1] })
            .collect();
        let block_max = block_maxima(&lcp, block_size);
        Ok(Self {
            reference,
            sa,
            isa,
            lcp,
            smaller: Some(smaller),
            bwt,
            block_max,
            block_size,
        })
    }

    pub fn reference(&self) -> &AugmentedReference {
        &self.reference
    }

    /// Reference text with the terminator stored as [`END`].
    pub fn text(&self) -> &[u8] {
        self.reference.text()
    }

    /// `|R|`, terminator included.
    pub fn len(&self) -> usize {
        self.sa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sa.is_empty()
    }

    pub fn sa(&self) -> &[usize] {
        &self.sa
    }

    pub fn isa(&self) -> &[usize] {
        &self.isa
    }

    pub fn lcp(&self) -> &[usize] {
        &self.lcp
    }

    /// Reference BWT; the row of the whole text holds [`END`] (the `#`).
    pub fn bwt(&self) -> &[u8] {
        &self.bwt
    }

    pub fn block_max(&self) -> &[usize] {
        &self.block_max
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Upper bound on `lcp[row]` from its block maximum.
    pub fn lcp_bound(&self, row: usize) -> usize {
        self.block_max[row / self.block_size]
    }

    pub fn smaller_values(&self) -> Option<&SmallerValues> {
        self.smaller.as_ref()
    }

    pub fn psv(&self, i: usize) -> Result<Option<usize>> {
        self.support()?.psv(&self.lcp, i)
    }

    pub fn nsv(&self, i: usize) -> Result<Option<usize>> {
        self.support()?.nsv(&self.lcp, i)
    }

    fn support(&self) -> Result<&SmallerValues> {
        self.smaller.as_ref().ok_or_else(|| {
            CmsError::Precondition("LCP support was released from this index".into())
        })
    }

    /// Whether the LCP array and its query support are still held.
    pub fn has_matching_support(&self) -> bool {
        self.smaller.is_some()
    }

    /// Drops the LCP array and everything built on it. Only SA, ISA and the
    /// reference BWT are needed once matching statistics are computed.
    pub fn release_matching_support(&mut self) {
        self.smaller = None;
        self.lcp = Vec::new();
        self.block_max = Vec::new();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_reference() -> AugmentedReference {
        AugmentedReference::new(b"CATTAGATTAG").unwrap()
    }

    fn naive_sa(text: &[u8]) -> Vec<usize> {
        let mut sa: Vec<usize> = (0..text.len()).collect();
        sa.sort_by(|&a, &b| text[a..].cmp(&text[b..]));
        sa
    }

    fn naive_lcp(text: &[u8], sa: &[usize]) -> Vec<usize> {
        (0..sa.len())
            .map(|i| {
                if i == 0 {
                    return 0;
                }
                text[sa[i - 1]..]
                    .iter()
                    .zip(&text[sa[i]..])
                    .take_while(|(a, b)| a == b)
                    .count()
            })
            .collect()
    }

    fn scan_prev(values: &[usize], i: usize, thr: usize) -> Option<usize> {
        (0..i).rev().find(|&j| values[j] < thr)
    }

    fn scan_next(values: &[usize], i: usize, thr: usize) -> Option<usize> {
        (i + 1..values.len()).find(|&j| values[j] < thr)
    }

    #[test]
    fn example_suffix_array() {
        let sa = build_suffix_array(example_reference().text());
        let one_based: Vec<usize> = sa.iter().map(|p| p + 1).collect();
        assert_eq!(one_based, vec![12, 10, 5, 7, 2, 1, 11, 6, 9, 4, 8, 3]);
    }

    #[test]
    fn terminator_only() {
        assert_eq!(build_suffix_array(&[END]), vec![0]);
        assert_eq!(build_inverse(&[0]), vec![0]);
        assert_eq!(build_lcp(&[END], &[0]), vec![0]);
    }

    #[test]
    fn example_inverse() {
        let sa = build_suffix_array(example_reference().text());
        let isa = build_inverse(&sa);
        // 1-based: isa[12] = 1, isa[4] = 10
        assert_eq!(isa[11], 0);
        assert_eq!(isa[3], 9);
        assert_eq!(build_inverse(&isa), sa);
    }

    #[test]
    fn example_lcp_spot_values() {
        let text = example_reference().text().to_vec();
        let sa = build_suffix_array(&text);
        let lcp = build_lcp(&text, &sa);
        assert_eq!(lcp, naive_lcp(&text, &sa));
        assert_eq!(lcp[0], 0);
        // "#" vs "AG#"
        assert_eq!(lcp[1], 0);
        // "AG#" vs "AGATTAG#"
        assert_eq!(lcp[2], 2);
    }

    #[test]
    fn example_reference_bwt() {
        let idx = ReferenceIndex::build(example_reference(), DEFAULT_LCP_BLOCK_SIZE).unwrap();
        let bwt: String = idx
            .bwt()
            .iter()
            .map(|&b| if b == END { '#' } else { b as char })
            .collect();
        assert_eq!(bwt, "GTTGC#AATTAA");
    }

    #[test]
    fn block_maxima_examples() {
        let idx = ReferenceIndex::build(example_reference(), 100).unwrap();
        assert_eq!(idx.block_max(), &[*idx.lcp().iter().max().unwrap()]);

        let idx = ReferenceIndex::build(example_reference(), 4).unwrap();
        let text = example_reference().text().to_vec();
        let lcp = naive_lcp(&text, &naive_sa(&text));
        let expected: Vec<usize> = lcp.chunks(4).map(|c| *c.iter().max().unwrap()).collect();
        assert_eq!(idx.block_max(), expected.as_slice());
        // lcp = [0,0,2,1,5,0,0,1,0,3,1,4]
        assert_eq!(expected, vec![2, 5, 4]);
    }

    #[test]
    fn psv_nsv_small() {
        let lcp = [0, 0, 2, 1];
        let sv = SmallerValues::new(&lcp);
        assert_eq!(sv.psv(&lcp, 2).unwrap(), Some(1));
        assert_eq!(sv.nsv(&lcp, 2).unwrap(), Some(3));
        assert_eq!(sv.psv(&lcp, 0).unwrap(), None);
        assert_eq!(sv.nsv(&lcp, 1).unwrap(), None);
        assert!(matches!(sv.psv(&lcp, 4), Err(CmsError::OutOfRange { .. })));
    }

    #[test]
    fn released_support_reports_error() {
        let mut idx = ReferenceIndex::build(example_reference(), 4).unwrap();
        idx.release_matching_support();
        assert!(!idx.has_matching_support());
        assert!(idx.psv(1).is_err());
    }

    #[test]
    fn lf_inversion_recovers_reference() {
        let reference = AugmentedReference::new(b"GATTACAGATTACCA").unwrap();
        let idx = ReferenceIndex::build(reference.clone(), 4).unwrap();
        let bwt = idx.bwt();
        let n = bwt.len();
        let mut counts = [0usize; 256];
        for &b in bwt {
            counts[b as usize] += 1;
        }
        let mut first = [0usize; 256];
        let mut sum = 0;
        for c in 0..256 {
            first[c] = sum;
            sum += counts[c];
        }
        let mut seen = [0usize; 256];
        let lf: Vec<usize> = bwt
            .iter()
            .map(|&b| {
                let r = first[b as usize] + seen[b as usize];
                seen[b as usize] += 1;
                r
            })
            .collect();
        // row 0 is the terminator suffix; walk backwards from it.
        let mut out = Vec::with_capacity(n);
        let mut row = 0;
        for _ in 0..n - 1 {
            out.push(bwt[row]);
            row = lf[row];
        }
        out.reverse();
        assert_eq!(out, reference.body());
    }

    proptest! {
        #[test]
        fn index_matches_naive(body in proptest::collection::vec(0u8..4, 1..200), alpha in 2u8..7) {
            let body: Vec<u8> = body.iter().map(|b| b"ACGTNX"[(*b % alpha) as usize]).collect();
            let reference = AugmentedReference::new(&body).unwrap();
            let text = reference.text().to_vec();
            let idx = ReferenceIndex::build(reference, 8).unwrap();
            let sa = naive_sa(&text);
            prop_assert_eq!(idx.sa(), sa.as_slice());
            for (i, &p) in idx.sa().iter().enumerate() {
                prop_assert_eq!(idx.isa()[p], i);
                prop_assert_eq!(idx.sa()[idx.isa()[i]], i);
            }
            let expected = naive_lcp(&text, &sa);
            prop_assert_eq!(idx.lcp(), expected.as_slice());
            prop_assert_eq!(idx.block_max().iter().max(), idx.lcp().iter().max());
        }

        #[test]
        fn smaller_values_match_scan(values in proptest::collection::vec(0usize..12, 1..600)) {
            let sv = SmallerValues::new(&values);
            for i in 0..values.len() {
                prop_assert_eq!(sv.psv(&values, i).unwrap(), scan_prev(&values, i, values[i]));
                prop_assert_eq!(sv.nsv(&values, i).unwrap(), scan_next(&values, i, values[i]));
            }
            for thr in [0, 1, 3, 7, 13] {
                for i in (0..=values.len()).step_by(7) {
                    prop_assert_eq!(sv.prev_smaller_than(&values, i, thr), scan_prev(&values, i, thr));
                }
                for i in (0..values.len()).step_by(5) {
                    prop_assert_eq!(sv.next_smaller_than(&values, i, thr), scan_next(&values, i, thr));
                }
            }
        }
    }
}
