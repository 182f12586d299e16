//! Dynamic strings with optimal update and query times.
//!
//! A [`Collection`] maintains a growing set of strings under `make`,
//! `concat` and `split`, and answers equality in `O(1)` and longest common
//! prefix and lexicographic comparison in `O(log n)` time. Every string is
//! represented by the root signature of its parse tree in a shared
//! [`Grammar`]: consistent local decisions, driven by seeded random bits,
//! make equal strings receive equal signatures, and parse trees have
//! logarithmic depth with high probability. Updates touch only `O(depth)`
//! nodes through context-insensitive decompositions.
//!
//! On top of the collection:
//! * [`MatchIndex`] reports occurrences of a pattern in an activatable
//!   subset of the strings;
//! * [`History`] reports, for a single edited text, every occurrence of a
//!   pattern in the version where it first appeared;
//! * [`Slp`] reads straight-line programs into the collection.
//!
//! ```
//! use dynstr::Collection;
//!
//! let mut c = Collection::with_seed(7);
//! let ab = c.make_str("abracad").unwrap();
//! let ra = c.make_str("abra").unwrap();
//! let whole = c.concat(ab, ra).unwrap();
//! let (left, _) = c.split(whole, 4).unwrap();
//! assert!(c.eq(left, ra).unwrap());
//! assert_eq!(c.lcp(ab, ra).unwrap(), 4);
//! ```

#![warn(missing_docs)]

pub mod collection;
pub mod cursor;
pub mod decompose;
pub mod error;
pub mod grammar;
pub mod history;
pub mod match_index;
pub mod order;
pub mod range_index;
pub mod slp;

pub use collection::{collapse, Collection, Config, Handle, Update};
pub use cursor::{At, Cursor};
pub use decompose::{ci_decomposition, ci_range, Mode, RleSeq, Run};
pub use error::{Error, Failure, Result};
pub use grammar::{Char, Grammar, GrammarConfig, Kind, Side, Sig};
pub use history::{Edit, History, Occurrence};
pub use match_index::MatchIndex;
pub use range_index::{OrderedKey, Point, RangeIndex};
pub use slp::{Fold, Slp};
