//! Run-length encoded signature sequences and context-insensitive
//! decompositions.
//!
//! A decomposition of `str(s)` is a sequence of signatures whose expansions
//! concatenate to `str(s)`. A context-insensitive one survives, node for
//! node, in the parse tree of every extension `x·str(s)·y`, which is what
//! lets `concat` and `split` rebuild only `O(depth)` new signatures.

use crate::cursor::{At, Cursor};
use crate::grammar::{Grammar, Sig};

/// One run `sig^count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Run {
    /// Signature.
    pub sig: Sig,
    /// Multiplicity, at least 1.
    pub count: u64,
}

/// A maximal run-length encoding of a signature sequence.
///
/// Backed by a vector; the sequences built here have `O(depth)` runs, so
/// concatenation by appending is as cheap as splicing linked lists.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RleSeq {
    runs: Vec<Run>,
}

impl RleSeq {
    /// The empty sequence.
    pub fn new() -> Self {
        Self::default()
    }

    /// Encodes a plain sequence.
    pub fn from_sigs(sigs: impl IntoIterator<Item = Sig>) -> Self {
        let mut out = Self::new();
        for s in sigs {
            out.push(s, 1);
        }
        out
    }

    /// Appends `sig^count`, merging with the last run if equal.
    pub fn push(&mut self, sig: Sig, count: u64) {
        if count == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some(last) if last.sig == sig => last.count += count,
            _ => self.runs.push(Run { sig, count }),
        }
    }

    /// The runs, left to right.
    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    /// Number of runs.
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    /// True if there are no runs.
    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Total number of signatures (with multiplicity).
    pub fn total(&self) -> u64 {
        self.runs.iter().map(|r| r.count).sum()
    }

    /// Total expanded string length.
    pub fn expanded_len(&self, g: &Grammar) -> u64 {
        self.runs.iter().map(|r| r.count * g.length(r.sig)).sum()
    }

    /// Concatenation, merging the boundary runs when they agree.
    pub fn concat(mut self, other: RleSeq) -> RleSeq {
        for r in other.runs {
            self.push(r.sig, r.count);
        }
        self
    }

    /// Splits after `k` signatures (counting multiplicity).
    pub fn split_at(&self, mut k: u64) -> (RleSeq, RleSeq) {
        let mut left = RleSeq::new();
        let mut right = RleSeq::new();
        for r in &self.runs {
            let take = k.min(r.count);
            left.push(r.sig, take);
            right.push(r.sig, r.count - take);
            k -= take;
        }
        (left, right)
    }

    /// Iterates over every signature with multiplicity.
    pub fn iter_sigs(&self) -> impl Iterator<Item = Sig> + '_ {
        self.runs
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.sig, r.count as usize))
    }
}

impl FromIterator<Run> for RleSeq {
    fn from_iter<I: IntoIterator<Item = Run>>(iter: I) -> Self {
        let mut out = RleSeq::new();
        for r in iter {
            out.push(r.sig, r.count);
        }
        out
    }
}

/// Which extensions the decomposition must be insensitive to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Both sides.
    Full,
    /// Extensions on the left only.
    LeftCI,
    /// Extensions on the right only.
    RightCI,
}

/// Context-insensitive decomposition of `str(s)`.
pub fn ci_decomposition(g: &Grammar, s: Sig, mode: Mode) -> RleSeq {
    let p = Cursor::new(g, s, At::Begin);
    let q = Cursor::new(g, s, At::End);
    layer(g, p, q, mode)
}

/// Context-insensitive decomposition of `str(s)[i..=j]` (1-based).
///
/// # Panics
/// Unless `1 <= i <= j <= length(s)`.
pub fn ci_range(g: &Grammar, s: Sig, i: u64, j: u64) -> RleSeq {
    assert!(1 <= i && i <= j && j <= g.length(s), "range {i}..={j} invalid");
    let p = Cursor::new(g, s, At::LeafAt(i));
    let q = Cursor::new(g, s, At::LeafAt(j));
    layer(g, p, q, Mode::Full)
}

fn same_parent(g: &Grammar, a: &Cursor, b: &Cursor) -> bool {
    match (a.parent(g), b.parent(g)) {
        (Some(x), Some(y)) => x.same_node(&y),
        _ => false,
    }
}

// Walks the two boundary cursors up level by level, emitting the runs that
// leave the shrinking window on either side.
fn layer(g: &Grammar, mut p: Cursor, mut q: Cursor, mode: Mode) -> RleSeq {
    let mut front = RleSeq::new();
    let mut back: Vec<Run> = Vec::new();
    while !p.same_node(&q) && !same_parent(g, &p, &q) {
        p = if mode == Mode::RightCI {
            p.parent(g).expect("window below root")
        } else {
            match p.right(g) {
                Some(r) if r.sig() != p.sig() && same_parent(g, &p, &r) => {
                    p.parent(g).expect("window below root")
                }
                _ => {
                    front.push(p.sig(), p.rext(g) + 1);
                    p.parent(g)
                        .and_then(|x| x.right(g))
                        .expect("window continues right")
                }
            }
        };
        q = if mode == Mode::LeftCI {
            q.parent(g).expect("window below root")
        } else {
            match q.left(g) {
                Some(l) if l.sig() != q.sig() && same_parent(g, &q, &l) => {
                    q.parent(g).expect("window below root")
                }
                _ => {
                    back.push(Run {
                        sig: q.sig(),
                        count: q.lext(g) + 1,
                    });
                    q.parent(g)
                        .and_then(|x| x.left(g))
                        .expect("window continues left")
                }
            }
        };
        // Both sides emitted their whole parents and those were adjacent:
        // the window is empty.
        if p.offset() > q.offset() {
            return finish(front, back);
        }
    }
    if p.sig() == q.sig() {
        front.push(p.sig(), q.index(g) + 1 - p.index(g));
    } else {
        front.push(p.sig(), 1);
        front.push(q.sig(), 1);
    }
    finish(front, back)
}

fn finish(mut front: RleSeq, back: Vec<Run>) -> RleSeq {
    for r in back.into_iter().rev() {
        front.push(r.sig, r.count);
    }
    front
}
