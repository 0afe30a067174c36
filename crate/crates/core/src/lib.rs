//! Burrows-Wheeler Transform of a collection of highly similar strings,
//! computed against a reference without sorting every suffix.
//!
//! The collection is matched against the reference to get enhanced
//! compressed matching statistics; only the insert-heads are sorted, and the
//! output is produced by expanding the reference BWT bucket by bucket with
//! per-head counters.

pub mod bwtbuild;
pub mod error;
pub mod headsort;
pub mod mstats;
pub mod oracle;
pub mod refindex;
pub mod rle;
mod sais;
pub mod textmodel;

pub use bwtbuild::{cms_bwt, Bwt, CmsConfig, CmsOutput, HeadSortMethod};
pub use error::{CmsError, Result};
pub use mstats::{ECms, Flag, InsertHead};
pub use refindex::ReferenceIndex;
pub use textmodel::{AugmentedReference, Collection, Symbol};
