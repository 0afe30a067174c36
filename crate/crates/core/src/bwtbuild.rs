//! Second pass and output: count, for every insert-head, the non-head
//! suffixes of its bucket that fall just before it, then expand the
//! reference BWT bucket by bucket.
//!
//! Non-head suffixes sharing an insert point are all preceded by the same
//! symbol, the reference BWT symbol of that row. Heads are the only places
//! inside a bucket where a different symbol can appear, so a bucket is
//! written as runs of the reference symbol separated by head symbols.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufReader, BufWriter, Seek, SeekFrom};
use std::ops::Range;
use std::path::PathBuf;

use crate::error::{CmsError, Result};
use crate::headsort::{self, length_flag_key, HeadOrder, Metastring, SuffixComparator};
use crate::mstats::{self, ECms, EcmsOptions, Ems};
use crate::refindex::{ReferenceIndex, DEFAULT_LCP_BLOCK_SIZE};
use crate::rle;
use crate::textmodel::{augment_reference, Collection, Symbol, END};

/// A suffix queued for locating among its bucket's heads.
#[derive(Clone, Copy, Debug)]
struct QueuedSuffix {
    ip: usize,
    pos: usize,
    head: usize,
}

/// Buffer size used when none is given: 2 GiB of queued suffixes.
pub const DEFAULT_BUFFER_BYTES: usize = 2 << 30;

/// Number of queued suffixes that fit in `bytes`.
pub fn buffer_capacity_for_bytes(bytes: usize) -> usize {
    (bytes / std::mem::size_of::<QueuedSuffix>()).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HeadSortMethod {
    #[default]
    Comparator,
    Metastring,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmsConfig {
    pub lcp_block_size: usize,
    pub leaf_branch: bool,
    pub head_sort: HeadSortMethod,
    /// Suffixes queued before a bucket-ordered flush.
    pub buffer_capacity: usize,
    pub two_layer_search: bool,
    /// Spill heads and the metastring to disk between phases.
    pub memory_saving: bool,
    /// Directory for spill files; the system temp dir when unset.
    pub spill_dir: Option<PathBuf>,
}

impl Default for CmsConfig {
    fn default() -> Self {
        Self {
            lcp_block_size: DEFAULT_LCP_BLOCK_SIZE,
            leaf_branch: true,
            head_sort: HeadSortMethod::Comparator,
            buffer_capacity: buffer_capacity_for_bytes(DEFAULT_BUFFER_BYTES),
            two_layer_search: true,
            memory_saving: false,
            spill_dir: None,
        }
    }
}

/// Bucket-counters and head-counters. `head_counters` is indexed by head
/// rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterSet {
    pub bucket_counters: Vec<u64>,
    pub head_counters: Vec<u64>,
}

impl CounterSet {
    /// Suffixes of bucket `ip` greater than all of its heads.
    pub fn residual(&self, ip: usize, order: &HeadOrder) -> Result<u64> {
        let used: u64 = order.bucket(ip).map(|r| self.head_counters[r] + 1).sum();
        let total = self.bucket_counters[ip];
        total.checked_sub(used).ok_or(CmsError::CounterMismatch {
            bucket: ip,
            used,
            total,
        })
    }

    /// Checks `sum(head_counter + 1) + residual = bucket_counter` for every
    /// bucket with a non-negative residual.
    pub fn check(&self, order: &HeadOrder) -> Result<()> {
        for ip in 0..self.bucket_counters.len() {
            self.residual(ip, order)?;
        }
        Ok(())
    }
}

/// Distinct `(len, flag)` keys of each bucket with the rank range of the
/// heads carrying them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniqueHeadLayer {
    keys: Vec<u64>,
    /// Rank of the first head of each group, plus a final `κ`.
    group_start: Vec<usize>,
    /// Index into `keys` of each bucket's first group, plus a final total.
    bucket_start: Vec<usize>,
}

impl UniqueHeadLayer {
    pub fn build(ecms: &ECms, order: &HeadOrder) -> Self {
        let buckets = ecms.bucket_counters.len();
        let mut keys = Vec::new();
        let mut group_start = Vec::new();
        let mut bucket_start = Vec::with_capacity(buckets + 1);
        for ip in 0..buckets {
            bucket_start.push(keys.len());
            let mut last = None;
            for r in order.bucket(ip) {
                let h = &ecms.heads[order.order[r]];
                let key = length_flag_key(h.len, h.flag);
                if last != Some(key) {
                    keys.push(key);
                    group_start.push(r);
                    last = Some(key);
                }
            }
        }
        bucket_start.push(keys.len());
        group_start.push(order.len());
        Self {
            keys,
            group_start,
            bucket_start,
        }
    }

    pub fn bucket_keys(&self, ip: usize) -> &[u64] {
        &self.keys[self.bucket_start[ip]..self.bucket_start[ip + 1]]
    }

    /// Rank range of group `g` of bucket `ip`.
    pub fn group(&self, ip: usize, g: usize) -> Range<usize> {
        let i = self.bucket_start[ip] + g;
        self.group_start[i]..self.group_start[i + 1]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Rank of the first head of bucket `ems.ip` greater than the suffix at
/// `pos`, by plain binary search over the bucket.
pub fn single_layer_locate(
    pos: usize,
    ems: &Ems,
    order: &HeadOrder,
    cmp: &SuffixComparator<'_>,
) -> Option<usize> {
    let bucket = order.bucket(ems.ip);
    let heads = &order.order[bucket.clone()];
    let below = heads.partition_point(|&h| cmp.compare_with_head(pos, ems, h) == Ordering::Greater);
    let r = bucket.start + below;
    (r < bucket.end).then_some(r)
}

/// Same result as [`single_layer_locate`], searching the bucket's distinct
/// `(len, flag)` keys first and touching individual heads only when the
/// query key matches a group.
pub fn two_layer_locate(
    pos: usize,
    ems: &Ems,
    layer: &UniqueHeadLayer,
    order: &HeadOrder,
    cmp: &SuffixComparator<'_>,
) -> Option<usize> {
    let bucket = order.bucket(ems.ip);
    let keys = layer.bucket_keys(ems.ip);
    let key = length_flag_key(ems.len, ems.flag);
    let g = keys.partition_point(|&k| k < key);
    let r = if keys.get(g) == Some(&key) {
        let group = layer.group(ems.ip, g);
        let heads = &order.order[group.clone()];
        group.start
            + heads.partition_point(|&h| cmp.compare_with_head(pos, ems, h) == Ordering::Greater)
    } else if g < keys.len() {
        layer.group(ems.ip, g).start
    } else {
        bucket.end
    };
    (r < bucket.end).then_some(r)
}

/// Counts, for every head, the non-head suffixes of its bucket lying between
/// the previous head and it. Suffixes in buckets without heads are skipped.
pub fn count_head_precedence(
    ecms: &ECms,
    order: &HeadOrder,
    index: &ReferenceIndex,
    buffer_capacity: usize,
    two_layer: bool,
) -> CounterSet {
    let heads = &ecms.heads;
    let isa = index.isa();
    let cmp = SuffixComparator::new(heads, isa).with_ranks(&order.rank);
    let layer = two_layer.then(|| UniqueHeadLayer::build(ecms, order));
    let total = ecms.total_suffixes() as usize;
    let capacity = buffer_capacity.max(1);
    let mut head_counters = vec![0u64; heads.len()];
    let mut buffer: Vec<QueuedSuffix> = Vec::new();

    let mut flush = |buffer: &mut Vec<QueuedSuffix>| {
        buffer.sort_unstable_by_key(|q| q.ip);
        for q in buffer.drain(..) {
            let ems = ems_in_run(ecms, q.head, q.pos, isa);
            let hit = match &layer {
                Some(layer) => two_layer_locate(q.pos, &ems, layer, order, &cmp),
                None => single_layer_locate(q.pos, &ems, order, &cmp),
            };
            if let Some(r) = hit {
                head_counters[r] += 1;
            }
        }
    };

    for (k, h) in heads.iter().enumerate() {
        let run_end = heads.get(k + 1).map_or(total, |n| n.pos);
        for pos in h.pos + 1..run_end {
            let ip = isa[h.ref_pos + (pos - h.pos)];
            if !order.has_heads(ip) {
                continue;
            }
            buffer.push(QueuedSuffix { ip, pos, head: k });
            if buffer.len() >= capacity {
                flush(&mut buffer);
            }
        }
    }
    flush(&mut buffer);

    CounterSet {
        bucket_counters: ecms.bucket_counters.clone(),
        head_counters,
    }
}

#[inline]
fn ems_in_run(ecms: &ECms, head: usize, pos: usize, isa: &[usize]) -> Ems {
    let h = &ecms.heads[head];
    let offset = pos - h.pos;
    let ref_pos = h.ref_pos + offset;
    Ems {
        ip: isa[ref_pos],
        ref_pos,
        len: h.len - offset,
        flag: h.flag,
        mismatch: h.mismatch,
    }
}

/// BWT of a collection. Every sentinel is stored as `$`; `sentinels` keeps
/// the document each one belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Bwt {
    pub bytes: Vec<u8>,
    /// `(row, document id)` of every sentinel, by row.
    pub sentinels: Vec<(usize, u32)>,
}

impl Bwt {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(n),
            sentinels: Vec::new(),
        }
    }

    pub fn push(&mut self, symbol: Symbol) {
        if let Symbol::Sentinel(d) = symbol {
            self.sentinels.push((self.bytes.len(), d));
        }
        self.bytes.push(symbol.to_byte());
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn to_symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.bytes.iter().map(|&b| Symbol::Regular(b)).collect();
        for &(row, d) in &self.sentinels {
            out[row] = Symbol::Sentinel(d);
        }
        out
    }

    pub fn from_symbols(symbols: &[Symbol]) -> Self {
        let mut bwt = Self::with_capacity(symbols.len());
        for &s in symbols {
            bwt.push(s);
        }
        bwt
    }
}

/// Interleaves bucket-counters, head-counters and head preceding symbols.
pub fn emit_bwt(
    index: &ReferenceIndex,
    ecms: &ECms,
    order: &HeadOrder,
    counters: &CounterSet,
    collection: &Collection,
) -> Result<Bwt> {
    let mut out = Bwt::with_capacity(collection.len());
    let ref_bwt = index.bwt();
    for (ip, &ch) in ref_bwt.iter().enumerate() {
        let total = counters.bucket_counters[ip];
        if total == 0 {
            continue;
        }
        let mut remaining = total;
        let repeat = |out: &mut Bwt, count: u64, remaining: &mut u64| -> Result<()> {
            if count == 0 {
                return Ok(());
            }
            if ch == END || count > *remaining {
                return Err(CmsError::CounterMismatch {
                    bucket: ip,
                    used: total - *remaining + count,
                    total,
                });
            }
            out.bytes.extend(std::iter::repeat_n(ch, count as usize));
            *remaining -= count;
            Ok(())
        };
        for r in order.bucket(ip) {
            repeat(&mut out, counters.head_counters[r], &mut remaining)?;
            if remaining == 0 {
                return Err(CmsError::CounterMismatch {
                    bucket: ip,
                    used: total + 1,
                    total,
                });
            }
            let head = &ecms.heads[order.order[r]];
            out.push(collection.preceding_symbol(head.pos));
            remaining -= 1;
        }
        let rest = remaining;
        repeat(&mut out, rest, &mut remaining)?;
    }
    if out.len() != collection.len() {
        return Err(CmsError::Precondition(format!(
            "emitted {} symbols for a collection of length {}",
            out.len(),
            collection.len()
        )));
    }
    Ok(out)
}

/// Summary numbers of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmsStats {
    /// `N`, sentinels included.
    pub collection_length: usize,
    pub documents: usize,
    /// `|R|` after augmentation, terminator included.
    pub reference_length: usize,
    pub augmented_symbols: usize,
    /// `κ`.
    pub insert_heads: usize,
    pub unique_insert_heads: usize,
    pub occupied_buckets: usize,
    /// Number of runs `r` of the output.
    pub runs: usize,
    /// Set when the metastring order failed validation.
    pub metastring_fallback: bool,
}

/// Everything one pipeline run produces.
#[derive(Debug)]
pub struct CmsOutput {
    pub index: ReferenceIndex,
    pub ecms: ECms,
    pub order: HeadOrder,
    pub counters: CounterSet,
    pub bwt: Bwt,
    pub stats: CmsStats,
}

fn spill_file(config: &CmsConfig) -> Result<File> {
    Ok(match &config.spill_dir {
        Some(dir) => tempfile::tempfile_in(dir)?,
        None => tempfile::tempfile()?,
    })
}

fn spill_heads(ecms: &mut ECms, config: &CmsConfig) -> Result<()> {
    let mut file = spill_file(config)?;
    ecms.write_heads(BufWriter::new(&mut file))?;
    let count = ecms.heads.len();
    ecms.heads = Vec::new();
    log::debug!("spilled {count} heads");
    file.seek(SeekFrom::Start(0))?;
    ecms.heads = ECms::read_heads(BufReader::new(file))?;
    Ok(())
}

fn spill_metastring(meta: Metastring, config: &CmsConfig) -> Result<Metastring> {
    let mut file = spill_file(config)?;
    meta.write_to(BufWriter::new(&mut file))?;
    drop(meta);
    file.seek(SeekFrom::Start(0))?;
    Metastring::read_from(BufReader::new(file))
}

/// Runs every phase and keeps the intermediate structures.
pub fn run_pipeline(
    reference: &[u8],
    collection: &Collection,
    config: &CmsConfig,
) -> Result<CmsOutput> {
    let augmented = augment_reference(reference, collection)?;
    let augmented_symbols = augmented.body().len() - augmented.original_length();
    let mut index = ReferenceIndex::build(augmented, config.lcp_block_size)?;
    log::debug!("reference index built, |R| = {}", index.len());

    let mut ecms = mstats::compute_ecms(
        collection,
        &index,
        EcmsOptions {
            leaf_branch: config.leaf_branch,
        },
    )?;
    log::debug!("eCMS computed, κ = {}", ecms.heads.len());

    if config.memory_saving {
        index.release_matching_support();
        spill_heads(&mut ecms, config)?;
    }

    let mut metastring_fallback = false;
    let order = match config.head_sort {
        HeadSortMethod::Comparator => headsort::sort_insert_heads(&ecms, &index),
        HeadSortMethod::Metastring => {
            let mut meta = Metastring::build(&ecms.heads, index.isa())?;
            if config.memory_saving {
                meta = spill_metastring(meta, config)?;
            }
            match meta.head_order(&ecms.heads, index.isa()) {
                Some(order) => order,
                None => {
                    log::warn!("metastring head order failed validation; using comparator sort");
                    metastring_fallback = true;
                    headsort::sort_insert_heads(&ecms, &index)
                }
            }
        }
    };
    log::debug!("heads sorted");

    let counters = count_head_precedence(
        &ecms,
        &order,
        &index,
        config.buffer_capacity,
        config.two_layer_search,
    );
    counters.check(&order)?;
    let bwt = emit_bwt(&index, &ecms, &order, &counters, collection)?;

    let stats = CmsStats {
        collection_length: collection.len(),
        documents: collection.num_documents(),
        reference_length: index.len(),
        augmented_symbols,
        insert_heads: ecms.heads.len(),
        unique_insert_heads: ecms.unique_tuples(),
        occupied_buckets: order.occupied_buckets(),
        runs: rle::count_runs(&bwt.bytes),
        metastring_fallback,
    };
    Ok(CmsOutput {
        index,
        ecms,
        order,
        counters,
        bwt,
        stats,
    })
}

/// BWT of `collection`, computed against `reference`.
pub fn cms_bwt(reference: &[u8], collection: &Collection, config: &CmsConfig) -> Result<Bwt> {
    Ok(run_pipeline(reference, collection, config)?.bwt)
}
