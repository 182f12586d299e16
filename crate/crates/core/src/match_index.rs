//! Pattern matching over an activatable subset of the collection.
//!
//! Every signature `s` of level above zero splits its string at the first
//! child boundary: `anch(s) = str(l)|str(r)` for a pair and
//! `str(b)|str(b)^(k-1)` for a power. An occurrence of a pattern is reported
//! at its hook, the lowest parse-tree node containing it, where it crosses
//! such a boundary. The index stores one 2D point per distinct signature of
//! the active strings' parse trees: the reversed left part and the right
//! part. A pattern split `p1|p2` then matches exactly the points whose left
//! part ends with `p1` and whose right part starts with `p2`, and only
//! `O(depth)` splits of the pattern need to be tried.
//!
//! Occurrences found inside a signature are mapped to the active strings
//! through the parent lists kept for every indexed signature.

use std::collections::BTreeSet;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::collection::{Collection, Handle};
use crate::decompose::{ci_decomposition, Mode};
use crate::error::{Failure, Result};
use crate::grammar::{Char, Grammar, Kind, Sig};
use crate::range_index::{Point, RangeIndex};

/// Lengths of the two sides of `anch(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchor {
    /// Length of the left part.
    pub left: u64,
    /// Length of the right part.
    pub right: u64,
}

/// `anch(s)`, or `None` for terminals.
pub fn anchor_of(g: &Grammar, s: Sig) -> Option<Anchor> {
    match g.kind(s) {
        Kind::Terminal(_) => None,
        Kind::Pair(l, r) => Some(Anchor {
            left: g.length(l),
            right: g.length(r),
        }),
        Kind::Power(b, k) => Some(Anchor {
            left: g.length(b),
            right: (k - 1) * g.length(b),
        }),
    }
}

/// Candidate lengths of the left part of the main anchor of `p`.
///
/// # Panics
/// If `length(p) < 2`.
pub fn potential_anchors(g: &Grammar, p: Sig) -> Vec<u64> {
    let n = g.length(p);
    assert!(n >= 2, "anchors need at least two characters");
    let d = ci_decomposition(g, p, Mode::Full);
    let runs = d.runs();
    let mut out = BTreeSet::new();
    out.insert(g.length(runs[0].sig));
    let mut sum = 0;
    for r in &runs[..runs.len() - 1] {
        sum += r.count * g.length(r.sig);
        out.insert(sum);
    }
    out.into_iter().filter(|&l| 0 < l && l < n).collect()
}

/// Anchored occurrences of a pattern split `pl|pr` in `s`: the count and
/// the 1-based start of the first one; consecutive ones are `stride` apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchored {
    /// Number of occurrences.
    pub count: u64,
    /// Start of the first occurrence within `str(s)`.
    pub first: u64,
    /// Distance between consecutive starts.
    pub stride: u64,
}

/// Occurrence arithmetic for a split that is known to match `anch(s)`:
/// `pl` a suffix of the left part and `pr` a prefix of the right part.
/// An empty `pr` stands for a single character ending at a boundary.
pub fn anchored_occurrences(g: &Grammar, s: Sig, pl: u64, pr: u64) -> Anchored {
    let a = anchor_of(g, s).expect("terminal has no anchor");
    if pl > a.left || pr > a.right || pl == 0 {
        return Anchored {
            count: 0,
            first: 0,
            stride: 0,
        };
    }
    match g.kind(s) {
        Kind::Power(b, k) => {
            let lb = g.length(b);
            let count = (1 + (a.right - pr) / lb).min(k - 1);
            Anchored {
                count,
                first: 1 + lb - pl,
                stride: lb,
            }
        }
        _ => Anchored {
            count: 1,
            first: 1 + a.left - pl,
            stride: 0,
        },
    }
}

#[derive(Debug, Default)]
struct Entry {
    pars: FxHashSet<Sig>,
    in_w: bool,
}

/// The index.
#[derive(Debug, Default)]
pub struct MatchIndex {
    points: RangeIndex,
    entries: FxHashMap<Sig, Entry>,
    active: BTreeSet<Handle>,
    last: FxHashMap<Char, BTreeSet<Handle>>,
    reversed: FxHashMap<Sig, Sig>,
}

impl MatchIndex {
    /// An empty index.
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of indexed signatures.
    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    /// Number of stored anchor points.
    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    /// True if nothing is active and no auxiliary state remains.
    pub fn is_clear(&self) -> bool {
        self.entries.is_empty()
            && self.points.is_empty()
            && self.active.is_empty()
            && self.last.values().all(BTreeSet::is_empty)
    }

    /// Active handles.
    pub fn active(&self) -> impl Iterator<Item = Handle> + '_ {
        self.active.iter().copied()
    }

    /// True if `h` is active.
    pub fn is_active(&self, h: Handle) -> bool {
        self.active.contains(&h)
    }

    /// Parents recorded for `s`.
    pub fn parents(&self, s: Sig) -> Vec<Sig> {
        let mut v: Vec<Sig> = self
            .entries
            .get(&s)
            .map(|e| e.pars.iter().copied().collect())
            .unwrap_or_default();
        v.sort_unstable();
        v
    }

    /// Makes `str(h)` searchable.
    pub fn activate(&mut self, coll: &mut Collection, h: Handle) -> Result<()> {
        if self.active.contains(&h) {
            return Ok(());
        }
        let s = coll.sig(h)?;
        let rev = coll.rev_sig(h)?;
        let n = coll.grammar().length(s);
        self.add(coll, s, None, 0, rev, n)?;
        self.entries.get_mut(&s).expect("just added").in_w = true;
        self.active.insert(h);
        let c = crate::order::char_at(coll.grammar(), s, n);
        self.last.entry(c).or_default().insert(h);
        Ok(())
    }

    /// Removes `str(h)` from the searchable set.
    pub fn deactivate(&mut self, coll: &Collection, h: Handle) -> Result<()> {
        if !self.active.remove(&h) {
            return Ok(());
        }
        let s = coll.sig(h)?;
        let g = coll.grammar();
        let c = crate::order::char_at(g, s, g.length(s));
        if let Some(set) = self.last.get_mut(&c) {
            set.remove(&h);
            if set.is_empty() {
                self.last.remove(&c);
            }
        }
        self.entries.get_mut(&s).expect("active root indexed").in_w = false;
        self.remove(g, s, None);
        Ok(())
    }

    // Indexes the node `s` found at offset `start` of the string whose
    // reverse is `rev` (length `n`).
    fn add(
        &mut self,
        coll: &mut Collection,
        s: Sig,
        parent: Option<Sig>,
        start: u64,
        rev: Sig,
        n: u64,
    ) -> Result<(), Failure> {
        if let Some(e) = self.entries.get_mut(&s) {
            e.pars.extend(parent);
            return Ok(());
        }
        let mut e = Entry::default();
        e.pars.extend(parent);
        self.entries.insert(s, e);
        let (left, right) = match coll.grammar().kind(s) {
            Kind::Terminal(_) => return Ok(()),
            Kind::Pair(l, r) => {
                let ll = coll.grammar().length(l);
                self.add(coll, l, Some(s), start, rev, n)?;
                self.add(coll, r, Some(s), start + ll, rev, n)?;
                (l, r)
            }
            Kind::Power(b, k) => {
                self.add(coll, b, Some(s), start, rev, n)?;
                let r = if k > 2 {
                    coll.grammar_mut().intern_power(b, k - 1)?
                } else {
                    b
                };
                (b, r)
            }
        };
        let x = match self.reversed.get(&left) {
            Some(&x) => x,
            None => {
                let ll = coll.grammar().length(left);
                let x = coll.substring(rev, n - start - ll + 1, n - start)?;
                self.reversed.insert(left, x);
                self.reversed.insert(x, left);
                x
            }
        };
        self.points
            .insert(
                coll.grammar(),
                Point {
                    key: u64::from(s),
                    x,
                    y: right,
                    time: 0,
                    extra: 0,
                },
            )
            .expect("fresh signature key");
        Ok(())
    }

    fn remove(&mut self, g: &Grammar, s: Sig, parent: Option<Sig>) {
        let e = self.entries.get_mut(&s).expect("indexed node");
        if let Some(p) = parent {
            e.pars.remove(&p);
        }
        if !e.pars.is_empty() || e.in_w {
            return;
        }
        self.entries.remove(&s);
        match g.kind(s) {
            Kind::Terminal(_) => {}
            Kind::Pair(l, r) => {
                self.points.delete(u64::from(s)).expect("anchored");
                self.remove(g, l, Some(s));
                self.remove(g, r, Some(s));
            }
            Kind::Power(b, _) => {
                self.points.delete(u64::from(s)).expect("anchored");
                self.remove(g, b, Some(s));
            }
        }
    }

    // Reports (handle, position) for every active occurrence of the node
    // `s`, shifted by `pos`.
    fn fragments(&self, g: &Grammar, coll: &Collection, s: Sig, pos: u64, out: &mut Vec<(Handle, u64)>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        let e = &self.entries[&s];
        if e.in_w {
            out.push((coll.handle_of(s).expect("active root has a handle"), pos));
        }
        for &p in &e.pars {
            match g.kind(p) {
                Kind::Pair(l, _) => {
                    let shift = if s == l { 0 } else { g.length(l) };
                    self.fragments(g, coll, p, pos + shift, out, limit);
                }
                Kind::Power(b, k) => {
                    for i in 0..k {
                        if out.len() >= limit {
                            return;
                        }
                        self.fragments(g, coll, p, pos + i * g.length(b), out, limit);
                    }
                }
                Kind::Terminal(_) => unreachable!("terminal parent"),
            }
        }
    }

    /// Occurrences `(handle, start)` of `p` in the active strings (1-based
    /// starts), at most `limit` of them; order is unspecified.
    pub fn find(&mut self, coll: &mut Collection, p: &[Char], limit: Option<usize>) -> Result<Vec<(Handle, u64)>> {
        let limit = limit.unwrap_or(usize::MAX);
        let mut out = Vec::new();
        if p.is_empty() || limit == 0 || self.active.is_empty() {
            return Ok(out);
        }
        if p.len() == 1 {
            let Some(t) = coll.grammar().find_terminal(p[0]) else {
                return Ok(out);
            };
            let g = coll.grammar();
            for key in self.points.query(g, t, None, None) {
                let s = key as Sig;
                let hits = anchored_occurrences(g, s, 1, 0);
                for i in 0..hits.count {
                    self.fragments(g, coll, s, hits.first + i * hits.stride, &mut out, limit);
                }
            }
            for &h in self.last.get(&p[0]).into_iter().flatten() {
                out.push((h, coll.length(h)?));
            }
            out.truncate(limit);
            return Ok(out);
        }
        let n = p.len() as u64;
        let ps = coll.intern_str(p)?;
        let pr: Vec<Char> = p.iter().rev().copied().collect();
        let prs = coll.intern_str(&pr)?;
        let mut splits = Vec::new();
        for l in potential_anchors(coll.grammar(), ps) {
            let x = coll.substring(prs, n - l + 1, n)?;
            let y = coll.substring(ps, l + 1, n)?;
            splits.push((l, x, y));
        }
        let g = coll.grammar();
        for (l, x, y) in splits {
            for key in self.points.query(g, x, Some(y), None) {
                let s = key as Sig;
                let hits = anchored_occurrences(g, s, l, n - l);
                for i in 0..hits.count {
                    self.fragments(g, coll, s, hits.first + i * hits.stride, &mut out, limit);
                }
                if out.len() >= limit {
                    out.truncate(limit);
                    return Ok(out);
                }
            }
        }
        out.truncate(limit);
        Ok(out)
    }
}
