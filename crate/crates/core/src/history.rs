//! Pattern matching over the whole edit history of one text.
//!
//! The text starts empty (version 1) and every edit creates a new version.
//! A query reports, for every version `t`, the occurrences of the pattern in
//! `T_t` that did not exist in `T_(t-1)`: an occurrence survives an edit when
//! the characters it consists of stay contiguous, in order and unchanged.
//!
//! Each edit contributes at most three anchored strings `X|Y` with
//! `XY = T_t`; a new occurrence always crosses one of those anchors, so
//! indexing `(X^R, Y)` as a 2D point timestamped with `t` reduces the query
//! to range reporting in chronological order.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use crate::collection::Collection;
use crate::error::{Error, Failure, Result};
use crate::grammar::{Char, Sig};
use crate::range_index::{Point, RangeIndex};

/// One edit; positions are 1-based and refer to the current text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edit {
    /// Insert `c` so that it becomes the `pos`-th character.
    Insert {
        /// Position of the new character, `1..=len+1`.
        pos: u64,
        /// The character.
        c: Char,
    },
    /// Delete the characters `l..=r`.
    Delete {
        /// First deleted position.
        l: u64,
        /// Last deleted position.
        r: u64,
    },
    /// Move the block `l..=r` in front of the character currently at
    /// position `dest` (`len+1` means the end); `dest` must not be in
    /// `l..=r+1`, which would leave the text unchanged.
    Move {
        /// First moved position.
        l: u64,
        /// Last moved position.
        r: u64,
        /// Insertion point in current coordinates.
        dest: u64,
    },
}

/// A reported occurrence: the pattern starts at `pos` in version `version`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    /// Version in which the occurrence appeared.
    pub version: u64,
    /// 1-based start in that version.
    pub pos: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Text {
    // Signatures of the text and its reverse; `None` for the empty text.
    fwd: Option<(Sig, Sig)>,
}

/// The versioned text and its occurrence index.
#[derive(Debug)]
pub struct History {
    versions: Vec<Text>,
    points: RangeIndex,
    next_key: u64,
    letters: FxHashMap<Char, Vec<Occurrence>>,
}

impl Default for History {
    fn default() -> Self {
        Self::new()
    }
}

impl History {
    /// Version 1, the empty text.
    pub fn new() -> Self {
        History {
            versions: vec![Text::default()],
            points: RangeIndex::new(),
            next_key: 0,
            letters: FxHashMap::default(),
        }
    }

    /// The current version number.
    pub fn version(&self) -> u64 {
        self.versions.len() as u64
    }

    /// Number of indexed anchored strings.
    pub fn anchor_count(&self) -> usize {
        self.points.len()
    }

    fn text(&self, v: u64) -> Result<Text> {
        v.checked_sub(1)
            .and_then(|i| self.versions.get(i as usize))
            .copied()
            .ok_or_else(|| Error::Invalid(format!("no version {v}")))
    }

    /// Length of version `v`.
    pub fn len_at(&self, coll: &Collection, v: u64) -> Result<u64> {
        Ok(self.text(v)?.fwd.map_or(0, |(s, _)| coll.grammar().length(s)))
    }

    /// Contents of version `v`.
    pub fn text_at(&self, coll: &Collection, v: u64) -> Result<Vec<Char>> {
        Ok(self.text(v)?.fwd.map_or_else(Vec::new, |(s, _)| coll.grammar().expand(s)))
    }

    /// Applies an edit and returns the new version number.
    ///
    /// # Errors
    /// `OutOfRange`/`Invalid` for bad positions; a `Failure` leaves the
    /// history unchanged.
    pub fn apply(&mut self, coll: &mut Collection, e: Edit) -> Result<u64> {
        let cur = *self.versions.last().expect("version 1 exists");
        let n = cur.fwd.map_or(0, |(s, _)| coll.grammar().length(s));
        let bad = |pos| Error::OutOfRange { pos, len: n };
        // The new text as pieces of the old one, plus the anchors to index
        // (numbers of characters before each anchor).
        let (pieces, anchors): (Vec<Piece>, Vec<u64>) = match e {
            Edit::Insert { pos, c } => {
                if pos == 0 || pos > n + 1 {
                    return Err(bad(pos));
                }
                let x = pos - 1;
                let mut a = Vec::new();
                if x > 0 {
                    a.push(x);
                }
                if x < n {
                    a.push(x + 1);
                }
                (
                    vec![Piece::Old(1, x), Piece::Char(c), Piece::Old(pos, n)],
                    a,
                )
            }
            Edit::Delete { l, r } => {
                if l == 0 || l > r || r > n {
                    return Err(bad(if l == 0 { l } else { r }));
                }
                let a = if l > 1 && r < n { vec![l - 1] } else { Vec::new() };
                (vec![Piece::Old(1, l - 1), Piece::Old(r + 1, n)], a)
            }
            Edit::Move { l, r, dest } => {
                if l == 0 || l > r || r > n {
                    return Err(bad(if l == 0 { l } else { r }));
                }
                if dest == 0 || dest > n + 1 {
                    return Err(bad(dest));
                }
                if (l..=r + 1).contains(&dest) {
                    return Err(Error::Invalid(format!(
                        "moving {l}..={r} before {dest} changes nothing"
                    )));
                }
                // Normalise to X A B Y -> X B A Y with A, B nonempty.
                let (x, a, b) = if dest < l {
                    (dest - 1, l - dest, r - l + 1)
                } else {
                    (l - 1, r - l + 1, dest - 1 - r)
                };
                let y = n - x - a - b;
                let mut anchors = Vec::new();
                if x > 0 {
                    anchors.push(x);
                }
                anchors.push(x + b);
                if y > 0 {
                    anchors.push(x + b + a);
                }
                (
                    vec![
                        Piece::Old(1, x),
                        Piece::Old(x + a + 1, x + a + b),
                        Piece::Old(x + 1, x + a),
                        Piece::Old(x + a + b + 1, n),
                    ],
                    anchors,
                )
            }
        };
        let next = build(coll, cur, &pieces)?;
        let t = self.version() + 1;
        let mut points = Vec::new();
        if let Some((s, rs)) = next.fwd {
            let m = coll.grammar().length(s);
            for a in anchors {
                let x = coll.substring(rs, m - a + 1, m)?;
                let y = coll.substring(s, a + 1, m)?;
                points.push((x, y, a + 1));
            }
        }
        for (x, y, delta) in points {
            let key = self.next_key;
            self.next_key += 1;
            self.points
                .insert(
                    coll.grammar(),
                    Point {
                        key,
                        x,
                        y,
                        time: t,
                        extra: delta,
                    },
                )
                .expect("fresh key");
        }
        if let Edit::Insert { pos, c } = e {
            self.letters.entry(c).or_default().push(Occurrence {
                version: t,
                pos,
            });
        }
        self.versions.push(next);
        Ok(t)
    }

    /// New occurrences of `p` in chronological order (ties by position),
    /// at most `limit` of them.
    pub fn find(&self, coll: &mut Collection, p: &[Char], limit: Option<usize>) -> Result<Vec<Occurrence>, Failure> {
        let limit = limit.unwrap_or(usize::MAX);
        if p.is_empty() || limit == 0 {
            return Ok(Vec::new());
        }
        if p.len() == 1 {
            let mut v = self.letters.get(&p[0]).cloned().unwrap_or_default();
            v.truncate(limit);
            return Ok(v);
        }
        let n = p.len() as u64;
        let ps = coll.intern_str(p)?;
        let pr: Vec<Char> = p.iter().rev().copied().collect();
        let prs = coll.intern_str(&pr)?;
        let mut splits = Vec::new();
        for l in 1..n {
            splits.push((l, coll.substring(prs, n - l + 1, n)?, coll.substring(ps, l + 1, n)?));
        }
        let g = coll.grammar();
        let mut streams: Vec<_> = splits
            .iter()
            .map(|&(l, x, y)| (l, self.points.query_chrono(g, x, Some(y)).peekable()))
            .collect();
        let mut out = Vec::new();
        while out.len() < limit {
            let Some(t) = streams
                .iter_mut()
                .filter_map(|(_, s)| s.peek().map(|p| p.time))
                .min()
            else {
                break;
            };
            // A move can expose the same new occurrence at two anchors.
            let mut batch = BTreeMap::new();
            for (l, s) in &mut streams {
                while let Some(pt) = s.next_if(|pt| pt.time == t) {
                    batch.insert(pt.extra - *l, ());
                }
            }
            out.extend(batch.into_keys().map(|pos| Occurrence { version: t, pos }));
        }
        out.truncate(limit);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    // Characters `i..=j` of the old text (empty if `i > j`).
    Old(u64, u64),
    Char(Char),
}

fn build(coll: &mut Collection, cur: Text, pieces: &[Piece]) -> Result<Text, Failure> {
    let mut acc: Option<(Sig, Sig)> = None;
    for &piece in pieces {
        let part = match piece {
            Piece::Old(i, j) if i <= j => {
                let (s, rs) = cur.fwd.expect("nonempty range of a nonempty text");
                let n = coll.grammar().length(s);
                Some((coll.substring(s, i, j)?, coll.substring(rs, n - j + 1, n - i + 1)?))
            }
            Piece::Old(..) => None,
            Piece::Char(c) => {
                let t = coll.grammar_mut().intern_terminal(c);
                Some((t, t))
            }
        };
        acc = match (acc, part) {
            (None, p) => p,
            (a, None) => a,
            (Some((a, ra)), Some((b, rb))) => Some((coll.concat_sigs(a, b)?, coll.concat_sigs(rb, ra)?)),
        };
    }
    Ok(Text { fwd: acc })
}
