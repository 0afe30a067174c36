//! Run-length encoding of a BWT.
//!
//! Binary layout: run count as u64 LE, then per run one symbol byte and its
//! length as u64 LE.

use std::io::{Read, Write};

use crate::error::{CmsError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RunLengthBwt {
    pub runs: Vec<(u8, u64)>,
}

/// Number of maximal runs in `bytes`.
pub fn count_runs(bytes: &[u8]) -> usize {
    match bytes.first() {
        None => 0,
        Some(_) => 1 + bytes.windows(2).filter(|w| w[0] != w[1]).count(),
    }
}

impl RunLengthBwt {
    pub fn encode(bytes: &[u8]) -> Self {
        let mut runs: Vec<(u8, u64)> = Vec::with_capacity(count_runs(bytes));
        for &b in bytes {
            match runs.last_mut() {
                Some((sym, len)) if *sym == b => *len += 1,
                _ => runs.push((b, 1)),
            }
        }
        Self { runs }
    }

    pub fn decode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.total_length()? as usize);
        for (index, &(sym, len)) in self.runs.iter().enumerate() {
            if len == 0 {
                return Err(CmsError::ZeroLengthRun { index });
            }
            out.extend(std::iter::repeat_n(sym, len as usize));
        }
        Ok(out)
    }

    pub fn num_runs(&self) -> usize {
        self.runs.len()
    }

    pub fn total_length(&self) -> Result<u64> {
        self.runs.iter().try_fold(0u64, |acc, &(_, len)| {
            acc.checked_add(len).ok_or_else(|| CmsError::Malformed {
                what: "run-length BWT",
                reason: "total length overflows u64".into(),
            })
        })
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.runs.len() as u64).to_le_bytes())?;
        for &(sym, len) in &self.runs {
            out.write_all(&[sym])?;
            out.write_all(&len.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut word = [0u8; 8];
        input.read_exact(&mut word)?;
        let count = u64::from_le_bytes(word);
        let mut runs = Vec::new();
        for index in 0..count {
            let mut sym = [0u8; 1];
            input.read_exact(&mut sym)?;
            input.read_exact(&mut word)?;
            let len = u64::from_le_bytes(word);
            if len == 0 {
                return Err(CmsError::ZeroLengthRun {
                    index: index as usize,
                });
            }
            runs.push((sym[0], len));
        }
        let mut trailing = [0u8; 1];
        if input.read(&mut trailing)? != 0 {
            return Err(CmsError::Malformed {
                what: "run-length BWT",
                reason: "trailing bytes after the last run".into(),
            });
        }
        Ok(Self { runs })
    }
}
