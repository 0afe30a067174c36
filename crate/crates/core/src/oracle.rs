//! Brute-force versions of the quantities the pipeline computes, for tests
//! and `--validate`. Nothing here calls into the pipeline; every routine
//! works straight from the definitions on small inputs.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{CmsError, Result};
use crate::mstats::Flag;
use crate::textmodel::{Collection, Symbol, END};

/// Largest collection the oracles accept.
pub const ORACLE_LIMIT: usize = 200_000;

fn check_size(size: usize) -> Result<()> {
    if size > ORACLE_LIMIT {
        return Err(CmsError::OracleLimit {
            size,
            limit: ORACLE_LIMIT,
        });
    }
    Ok(())
}

/// The collection as symbols, with each sentinel tagged by its document.
pub fn collection_symbols(collection: &Collection) -> Vec<Symbol> {
    let mut doc = 1u32;
    collection
        .raw()
        .iter()
        .map(|&b| {
            if b == END {
                doc += 1;
                Symbol::Sentinel(doc - 1)
            } else {
                Symbol::Regular(b)
            }
        })
        .collect()
}

/// A reference text (terminator included) as symbols.
pub fn reference_symbols(text: &[u8]) -> Vec<Symbol> {
    text.iter()
        .map(|&b| {
            if b == END {
                Symbol::Terminator
            } else {
                Symbol::Regular(b)
            }
        })
        .collect()
}

/// All suffix start positions of `text`, sorted by full comparison.
pub fn naive_suffix_array(text: &[Symbol]) -> Vec<usize> {
    let mut sa: Vec<usize> = (0..text.len()).collect();
    sa.sort_by(|&a, &b| text[a..].cmp(&text[b..]));
    sa
}

/// Direct comparison of two collection suffixes.
pub fn compare_suffixes(text: &[Symbol], a: usize, b: usize) -> Ordering {
    text[a..].cmp(&text[b..])
}

/// Sorted suffixes of the collection.
pub fn naive_collection_sa(collection: &Collection) -> Result<Vec<usize>> {
    check_size(collection.len())?;
    Ok(naive_suffix_array(&collection_symbols(collection)))
}

/// BWT by sorting every suffix. A suffix starting a document is preceded by
/// that document's own sentinel.
pub fn naive_bwt(collection: &Collection) -> Result<Vec<Symbol>> {
    check_size(collection.len())?;
    let text = collection_symbols(collection);
    let sa = naive_suffix_array(&text);
    let mut doc_end = vec![0usize; text.len()];
    let mut end = text.len();
    for i in (0..text.len()).rev() {
        if matches!(text[i], Symbol::Sentinel(_)) {
            end = i;
        }
        doc_end[i] = end;
    }
    Ok(sa
        .iter()
        .map(|&p| {
            if p == 0 || matches!(text[p - 1], Symbol::Sentinel(_)) {
                text[doc_end[p]]
            } else {
                text[p - 1]
            }
        })
        .collect())
}

/// Recovers the documents from a collection BWT by LF walks.
pub fn invert_bwt(bwt: &[Symbol]) -> Result<Vec<Vec<u8>>> {
    let mut counts: BTreeMap<Symbol, usize> = BTreeMap::new();
    for &s in bwt {
        *counts.entry(s).or_default() += 1;
    }
    let mut first: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut sum = 0;
    for (&s, &c) in &counts {
        first.insert(s, sum);
        sum += c;
    }
    let mut seen: BTreeMap<Symbol, usize> = BTreeMap::new();
    let lf: Vec<usize> = bwt
        .iter()
        .map(|&s| {
            let k = seen.entry(s).or_default();
            *k += 1;
            first[&s] + *k - 1
        })
        .collect();

    let docs = bwt.iter().filter(|s| s.is_sentinel()).count();
    let mut out = Vec::with_capacity(docs);
    for d in 0..docs {
        // the suffix "$_d" sits at row d-1
        let mut row = d;
        let mut body = Vec::new();
        loop {
            match bwt[row] {
                Symbol::Sentinel(_) => break,
                Symbol::Regular(b) => body.push(b),
                Symbol::Terminator => {
                    return Err(CmsError::Malformed {
                        what: "collection BWT",
                        reason: "terminator in a collection BWT".into(),
                    })
                }
            }
            if body.len() > bwt.len() {
                return Err(CmsError::Malformed {
                    what: "collection BWT",
                    reason: "LF walk does not terminate".into(),
                });
            }
            row = lf[row];
        }
        body.reverse();
        out.push(body);
    }
    Ok(out)
}

/// One row of brute-force matching statistics. `p` is `None` when nothing
/// matches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NaiveMs {
    pub p: Option<usize>,
    pub len: usize,
    pub head: bool,
}

fn longest_common_prefix(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Matching statistics of `s` against `r`. A head reports the leftmost
/// occurrence of its factor; other positions continue the head's position.
pub fn naive_ms(s: &[Symbol], r: &[Symbol]) -> Result<Vec<NaiveMs>> {
    check_size(s.len())?;
    check_size(r.len())?;
    let mut out: Vec<NaiveMs> = Vec::with_capacity(s.len());
    for i in 0..s.len() {
        let (mut best, mut at) = (0, None);
        for j in 0..r.len() {
            let l = longest_common_prefix(&s[i..], &r[j..]);
            if l > best {
                best = l;
                at = Some(j);
            }
        }
        let head = i == 0 || best >= out[i - 1].len;
        let p = if best == 0 {
            None
        } else if head {
            at
        } else {
            out[i - 1].p.map(|p| p + 1)
        };
        out.push(NaiveMs { p, len: best, head });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NaiveInsertPoint {
    /// Row among the sorted reference suffixes.
    pub ip: usize,
    /// Reference position at that row.
    pub q: usize,
    pub len: usize,
    pub flag: Flag,
    pub mismatch: Symbol,
}

/// How the gap between two adjacent reference rows is named.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapRule {
    /// The largest row below the suffix with `L`, else the smallest row
    /// carrying the factor with `S`.
    Literal,
    /// The smallest row above the suffix that carries the factor with `S`,
    /// else the largest such row with `L`. This is what the pipeline uses.
    PreferAbove,
}

/// Insert point, flag and mismatch symbol of every suffix of `s`, where `s`
/// is one document ending in its sentinel and `r` ends in the terminator.
pub fn naive_insert_points(
    s: &[Symbol],
    r: &[Symbol],
    rule: GapRule,
) -> Result<Vec<NaiveInsertPoint>> {
    let ms = naive_ms(s, r)?;
    let sa = naive_suffix_array(r);
    ms.iter()
        .enumerate()
        .map(|(i, m)| {
            let factor = &s[i..i + m.len];
            let mismatch = s[i + m.len];
            let (ip, flag) = if factor.is_empty() && mismatch.is_sentinel() {
                (0, Flag::L)
            } else {
                let mut probe = factor.to_vec();
                probe.push(mismatch);
                let rows: Vec<usize> = (0..sa.len())
                    .filter(|&t| r[sa[t]..].starts_with(factor))
                    .collect();
                let (first, last) = match (rows.first(), rows.last()) {
                    (Some(&f), Some(&l)) => (f, l),
                    _ => {
                        return Err(CmsError::Precondition(format!(
                            "factor at {i} does not occur in the reference"
                        )))
                    }
                };
                let below = rows
                    .iter()
                    .copied()
                    .filter(|&t| r[sa[t]..] < probe[..])
                    .max();
                let above = rows
                    .iter()
                    .copied()
                    .filter(|&t| r[sa[t]..] > probe[..])
                    .min();
                match rule {
                    GapRule::Literal => below.map_or((first, Flag::S), |t| (t, Flag::L)),
                    GapRule::PreferAbove => above.map_or((last, Flag::L), |t| (t, Flag::S)),
                }
            };
            Ok(NaiveInsertPoint {
                ip,
                q: sa[ip],
                len: m.len,
                flag,
                mismatch,
            })
        })
        .collect()
}

/// Positions where the chain `q` does not advance by one.
pub fn naive_insert_heads(points: &[NaiveInsertPoint]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| i == 0 || points[i].q != points[i - 1].q + 1)
        .collect()
}
