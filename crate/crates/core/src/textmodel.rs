//! Input model: symbols, documents, the concatenated collection and the
//! augmented reference.
//!
//! Both texts are stored as raw bytes. Byte `0` marks the end of a string:
//! the reference terminator `#` in [`AugmentedReference`], a document
//! sentinel `$_d` in [`Collection`]. Printable input bytes never collide with
//! it, so byte order on the raw storage already agrees with [`Symbol`] order
//! everywhere except between sentinels of different documents.

use std::fmt;
use std::io::BufRead;
use std::ops::Range;

use crate::error::{CmsError, Result};

/// Raw byte used for both the reference terminator and collection sentinels.
pub const END: u8 = 0;

/// Byte written in place of every sentinel when a BWT is serialized.
pub const SENTINEL_BYTE: u8 = b'$';

/// A symbol of the internal ordered alphabet.
///
/// The derived order is the one the whole construction relies on:
/// `# < $_1 < $_2 < ... < $_m <` regular symbols in byte order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Reference terminator `#`.
    Terminator,
    /// End-of-document marker `$_d`, carrying the 1-based document id.
    Sentinel(u32),
    Regular(u8),
}

impl Symbol {
    /// Byte used on output. All sentinels map to `$`.
    pub fn to_byte(self) -> u8 {
        match self {
            Symbol::Terminator => b'#',
            Symbol::Sentinel(_) => SENTINEL_BYTE,
            Symbol::Regular(b) => b,
        }
    }

    pub fn is_sentinel(self) -> bool {
        matches!(self, Symbol::Sentinel(_))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Terminator => f.write_str("#"),
            Symbol::Sentinel(d) => write!(f, "${d}"),
            Symbol::Regular(b) => write!(f, "{}", *b as char),
        }
    }
}

/// One record of a multi-FASTA file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastaRecord {
    pub name: String,
    pub sequence: Vec<u8>,
}

/// Parses multi-FASTA input. Line breaks are stripped and sequence bytes are
/// passed through unchanged (no case folding, no filtering).
pub fn parse_fasta<R: BufRead>(mut reader: R) -> Result<Vec<FastaRecord>> {
    let mut records: Vec<FastaRecord> = Vec::new();
    let mut line = Vec::new();
    let mut line_no = 0;
    loop {
        line.clear();
        if reader.read_until(b'\n', &mut line)? == 0 {
            break;
        }
        line_no += 1;
        if line.last() == Some(&b'\n') {
            line.pop();
        }
        if line.last() == Some(&b'\r') {
            line.pop();
        }
        if line.is_empty() {
            continue;
        }
        if line[0] == b'>' {
            let name = String::from_utf8_lossy(&line[1..]).trim().to_string();
            records.push(FastaRecord {
                name,
                sequence: Vec::new(),
            });
            continue;
        }
        let Some(record) = records.last_mut() else {
            return Err(CmsError::MissingHeader { line: line_no });
        };
        for &byte in &line {
            if !(0x21..=0x7e).contains(&byte) {
                return Err(CmsError::NonPrintable {
                    record: record.name.clone(),
                    byte,
                });
            }
            if byte == SENTINEL_BYTE {
                return Err(CmsError::ReservedByte {
                    record: record.name.clone(),
                    byte,
                });
            }
        }
        record.sequence.extend_from_slice(&line);
    }
    if records.is_empty() {
        return Err(CmsError::EmptyInput);
    }
    if let Some(empty) = records.iter().find(|r| r.sequence.is_empty()) {
        return Err(CmsError::EmptySequence {
            record: empty.name.clone(),
        });
    }
    Ok(records)
}

/// Picks the reference body out of parsed records: only the first record is
/// used.
pub fn reference_body(records: &[FastaRecord]) -> Result<&[u8]> {
    let first = records.first().ok_or(CmsError::EmptyInput)?;
    if records.len() > 1 {
        log::warn!(
            "reference file holds {} records; using only {:?}",
            records.len(),
            first.name
        );
    }
    Ok(&first.sequence)
}

/// A document of the collection. Its sentinel `$_id` is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Document<'a> {
    /// 1-based document index.
    pub id: u32,
    pub body: &'a [u8],
}

/// The collection viewed as one concatenated string
/// `S_1 $_1 S_2 $_2 ... S_m $_m` of length `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collection {
    text: Vec<u8>,
    starts: Vec<usize>,
}

impl Collection {
    pub fn from_bodies<I, B>(bodies: I) -> Result<Self>
    where
        I: IntoIterator<Item = B>,
        B: AsRef<[u8]>,
    {
        let mut text = Vec::new();
        let mut starts = Vec::new();
        for body in bodies {
            let body = body.as_ref();
            if body.contains(&END) {
                return Err(CmsError::Precondition(format!(
                    "document {} contains the reserved end byte",
                    starts.len() + 1
                )));
            }
            starts.push(text.len());
            text.extend_from_slice(body);
            text.push(END);
        }
        if starts.is_empty() {
            return Err(CmsError::EmptyCollection);
        }
        if u32::try_from(starts.len()).is_err() {
            return Err(CmsError::Precondition("too many documents".into()));
        }
        Ok(Self { text, starts })
    }

    pub fn from_records(records: &[FastaRecord]) -> Result<Self> {
        Self::from_bodies(records.iter().map(|r| &r.sequence))
    }

    /// Total length `N`, one sentinel per document included.
    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    pub fn num_documents(&self) -> usize {
        self.starts.len()
    }

    /// Raw concatenated bytes, sentinels stored as [`END`].
    pub fn raw(&self) -> &[u8] {
        &self.text
    }

    /// Start offsets (0-based) of every document.
    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    /// Positions `[start, sentinel]` of document `id` (1-based).
    pub fn doc_range(&self, id: u32) -> Range<usize> {
        let d = id as usize - 1;
        let end = self.starts.get(d + 1).copied().unwrap_or(self.text.len());
        self.starts[d]..end
    }

    /// 1-based id of the document covering `pos`.
    pub fn doc_of(&self, pos: usize) -> u32 {
        self.starts.partition_point(|&s| s <= pos) as u32
    }

    pub fn is_doc_start(&self, pos: usize) -> bool {
        self.starts.binary_search(&pos).is_ok()
    }

    pub fn symbol(&self, pos: usize) -> Symbol {
        match self.text[pos] {
            END => Symbol::Sentinel(self.doc_of(pos)),
            b => Symbol::Regular(b),
        }
    }

    /// The symbol cyclically preceding `pos` within its own document: the
    /// document's own sentinel for a document start.
    pub fn preceding_symbol(&self, pos: usize) -> Symbol {
        if self.is_doc_start(pos) {
            Symbol::Sentinel(self.doc_of(pos))
        } else {
            self.symbol(pos - 1)
        }
    }

    pub fn documents(&self) -> impl Iterator<Item = Document<'_>> + '_ {
        (1..=self.starts.len() as u32).map(move |id| {
            let range = self.doc_range(id);
            Document {
                id,
                body: &self.text[range.start..range.end - 1],
            }
        })
    }

    /// Sorted distinct regular bytes.
    pub fn alphabet(&self) -> Vec<u8> {
        byte_set(self.text.iter().copied().filter(|&b| b != END))
    }
}

/// The reference `R` with every collection symbol present, terminated by `#`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedReference {
    text: Vec<u8>,
    original_length: usize,
}

impl AugmentedReference {
    /// Reference with no augmentation; the body must not contain [`END`].
    pub fn new(body: &[u8]) -> Result<Self> {
        if body.is_empty() {
            return Err(CmsError::EmptyReference);
        }
        if body.contains(&END) {
            return Err(CmsError::Precondition(
                "reference contains the reserved end byte".into(),
            ));
        }
        let mut text = Vec::with_capacity(body.len() + 1);
        text.extend_from_slice(body);
        text.push(END);
        Ok(Self {
            text,
            original_length: body.len(),
        })
    }

    /// Text including the trailing terminator (stored as [`END`]).
    pub fn text(&self) -> &[u8] {
        &self.text
    }

    pub fn body(&self) -> &[u8] {
        &self.text[..self.text.len() - 1]
    }

    /// `|R|`, terminator included.
    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Body length before augmentation.
    pub fn original_length(&self) -> usize {
        self.original_length
    }

    pub fn symbol(&self, pos: usize) -> Symbol {
        match self.text[pos] {
            END => Symbol::Terminator,
            b => Symbol::Regular(b),
        }
    }

    pub fn alphabet(&self) -> Vec<u8> {
        byte_set(self.body().iter().copied())
    }
}

fn byte_set(bytes: impl Iterator<Item = u8>) -> Vec<u8> {
    let mut seen = [false; 256];
    for b in bytes {
        seen[b as usize] = true;
    }
    (0..=255u8).filter(|&b| seen[b as usize]).collect()
}

/// Appends every regular symbol of `collection` that is missing from
/// `reference` once, in ascending order, just before the terminator.
pub fn augment_reference(reference: &[u8], collection: &Collection) -> Result<AugmentedReference> {
    let base = AugmentedReference::new(reference)?;
    let present = base.alphabet();
    let missing: Vec<u8> = collection
        .alphabet()
        .into_iter()
        .filter(|b| present.binary_search(b).is_err())
        .collect();
    if missing.is_empty() {
        return Ok(base);
    }
    let mut body = reference.to_vec();
    body.extend_from_slice(&missing);
    let mut augmented = AugmentedReference::new(&body)?;
    augmented.original_length = reference.len();
    Ok(augmented)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(input: &str) -> Result<Vec<FastaRecord>> {
        parse_fasta(input.as_bytes())
    }

    #[test]
    fn single_record() {
        let records = parse(">r\nCATTAGATTAG\n").unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].name, "r");
        assert_eq!(records[0].sequence, b"CATTAGATTAG");
    }

    #[test]
    fn two_records_give_n_24() {
        let records = parse(">a\nTAGAGATTATT\n>b\nGATTACATTAG\n").unwrap();
        let c = Collection::from_records(&records).unwrap();
        assert_eq!(c.num_documents(), 2);
        assert_eq!(c.len(), 24);
        assert_eq!(c.symbol(11), Symbol::Sentinel(1));
        assert_eq!(c.symbol(23), Symbol::Sentinel(2));
        assert_eq!(c.doc_of(12), 2);
    }

    #[test]
    fn multi_line_and_crlf() {
        let records = parse(">x desc\r\nAC\r\nGT\r\n\r\n>y\nNN\n").unwrap();
        assert_eq!(records[0].sequence, b"ACGT");
        assert_eq!(records[0].name, "x desc");
        assert_eq!(records[1].sequence, b"NN");
    }

    #[test]
    fn case_is_preserved() {
        let records = parse(">x\nacgtNRY\n").unwrap();
        assert_eq!(records[0].sequence, b"acgtNRY");
    }

    #[test]
    fn rejects_empty_sequence() {
        assert!(matches!(
            parse(">a\n\n"),
            Err(CmsError::EmptySequence { .. })
        ));
        assert!(matches!(
            parse(">a\n>b\nAC\n"),
            Err(CmsError::EmptySequence { .. })
        ));
    }

    #[test]
    fn rejects_empty_file() {
        assert!(matches!(parse(""), Err(CmsError::EmptyInput)));
        assert!(matches!(parse("\n\n"), Err(CmsError::EmptyInput)));
    }

    #[test]
    fn rejects_bad_bytes() {
        assert!(matches!(
            parse(">a\nAC\tGT\n"),
            Err(CmsError::NonPrintable { byte: b'\t', .. })
        ));
        assert!(matches!(
            parse(">a\nAC GT\n"),
            Err(CmsError::NonPrintable { byte: b' ', .. })
        ));
        assert!(matches!(
            parse(">a\nAC$GT\n"),
            Err(CmsError::ReservedByte { .. })
        ));
        assert!(matches!(
            parse("ACGT\n"),
            Err(CmsError::MissingHeader { line: 1 })
        ));
    }

    #[test]
    fn symbol_order() {
        let mut symbols = vec![
            Symbol::Regular(b'T'),
            Symbol::Sentinel(2),
            Symbol::Regular(b'A'),
            Symbol::Terminator,
            Symbol::Sentinel(1),
            Symbol::Regular(b'!'),
        ];
        symbols.sort();
        assert_eq!(
            symbols,
            vec![
                Symbol::Terminator,
                Symbol::Sentinel(1),
                Symbol::Sentinel(2),
                Symbol::Regular(b'!'),
                Symbol::Regular(b'A'),
                Symbol::Regular(b'T'),
            ]
        );
    }

    #[test]
    fn augment_without_missing_symbols() {
        let c = Collection::from_bodies([b"GATTACA".as_slice(), b"TTAG"]).unwrap();
        let r = augment_reference(b"CATTAG", &c).unwrap();
        assert_eq!(r.body(), b"CATTAG");
        assert_eq!(r.len(), 7);
        assert_eq!(r.symbol(6), Symbol::Terminator);
    }

    #[test]
    fn augment_appends_missing_in_order() {
        let c = Collection::from_bodies([b"CANTAG".as_slice()]).unwrap();
        let r = augment_reference(b"CATTAG", &c).unwrap();
        assert_eq!(r.body(), b"CATTAGN");
        assert_eq!(r.original_length(), 6);

        let c = Collection::from_bodies([b"GATC".as_slice(), b"CCGA"]).unwrap();
        let r = augment_reference(b"AT", &c).unwrap();
        assert_eq!(r.body(), b"ATCG");
        assert_eq!(r.text(), b"ATCG\0");
    }

    #[test]
    fn augmented_alphabet_covers_collection() {
        let c = Collection::from_bodies([b"xyzACGT".as_slice(), b"QQ"]).unwrap();
        let r = augment_reference(b"AAAA", &c).unwrap();
        let ra = r.alphabet();
        assert!(c.alphabet().iter().all(|b| ra.contains(b)));
    }

    #[test]
    fn preceding_symbol_wraps_within_document() {
        let c = Collection::from_bodies([b"AC".as_slice(), b"GT"]).unwrap();
        assert_eq!(c.preceding_symbol(0), Symbol::Sentinel(1));
        assert_eq!(c.preceding_symbol(1), Symbol::Regular(b'A'));
        assert_eq!(c.preceding_symbol(3), Symbol::Sentinel(2));
        let docs: Vec<_> = c.documents().collect();
        assert_eq!(docs[1].body, b"GT");
        assert_eq!(docs[1].id, 2);
    }

    #[test]
    fn parse_then_serialize_is_identity_on_content() {
        let input = ">a\nACGTN\nRY\n>b\nggg\n";
        let records = parse(input).unwrap();
        let c = Collection::from_records(&records).unwrap();
        let bodies: Vec<&[u8]> = c.documents().map(|d| d.body).collect();
        assert_eq!(bodies, vec![b"ACGTNRY".as_slice(), b"ggg"]);
    }
}
