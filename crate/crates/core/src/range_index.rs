//! Dynamic two-dimensional range reporting over string coordinates.
//!
//! A point is a pair of signatures `(x, y)`; coordinates are ordered
//! lexicographically by the strings they derive. A query for `(p1, p2)`
//! reports every point with `x` in `[p1, p1·Z]` and `y` in `[p2, p2·Z]`,
//! where `Z` is a letter above the whole alphabet: that is, every point
//! whose `x` starts with `p1` and whose `y` starts with `p2`.
//!
//! Points live in `O(log n)` static levels of doubling capacity (the
//! logarithmic method). A level is a merge-sort tree over its x-sorted
//! points whose nodes list their points in y order. Coordinates are replaced
//! by integer ranks when a level is built, so a query calls the string
//! comparator only for the `O(log n)` binary-search steps per level.
//! Deletions are tombstones; a level is compacted once half of it is dead.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::grammar::{Grammar, Sig};
use crate::order;

/// A coordinate or query bound: `str(sig)`, optionally followed by `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderedKey {
    /// The string.
    pub sig: Sig,
    /// Whether the maximal letter `Z` follows.
    pub sentinel: bool,
}

impl OrderedKey {
    /// `str(sig)`.
    pub fn plain(sig: Sig) -> Self {
        OrderedKey {
            sig,
            sentinel: false,
        }
    }

    /// `str(sig)·Z`.
    pub fn capped(sig: Sig) -> Self {
        OrderedKey {
            sig,
            sentinel: true,
        }
    }
}

/// Total order on [`OrderedKey`]s.
pub trait KeyOrder {
    /// Compares two keys.
    fn cmp_keys(&self, a: OrderedKey, b: OrderedKey) -> Ordering;
}

impl KeyOrder for Grammar {
    fn cmp_keys(&self, a: OrderedKey, b: OrderedKey) -> Ordering {
        if a.sig == b.sig {
            return a.sentinel.cmp(&b.sentinel);
        }
        let l = order::lcp(self, a.sig, b.sig);
        let (la, lb) = (self.length(a.sig), self.length(b.sig));
        if l < la.min(lb) {
            order::char_at(self, a.sig, l + 1).cmp(&order::char_at(self, b.sig, l + 1))
        } else if la < lb {
            // a is a proper prefix of b
            if a.sentinel {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        } else if b.sentinel {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

/// A stored point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Point {
    /// Caller-chosen unique key.
    pub key: u64,
    /// First coordinate.
    pub x: Sig,
    /// Second coordinate.
    pub y: Sig,
    /// Timestamp for chronological reporting.
    pub time: u64,
    /// Opaque payload.
    pub extra: u64,
}

fn cmp_plain(ord: &impl KeyOrder, a: Sig, b: Sig) -> Ordering {
    if a == b {
        Ordering::Equal
    } else {
        ord.cmp_keys(OrderedKey::plain(a), OrderedKey::plain(b))
    }
}

// Points sorted by x together with their y order.
struct Sorted {
    pts: Vec<Point>,
    yord: Vec<u32>,
}

impl Sorted {
    fn merge(a: Sorted, b: Sorted, ord: &impl KeyOrder) -> Sorted {
        let n = a.pts.len() + b.pts.len();
        let mut pts = Vec::with_capacity(n);
        let mut amap = Vec::with_capacity(a.pts.len());
        let mut bmap = Vec::with_capacity(b.pts.len());
        let (mut i, mut j) = (0, 0);
        while i < a.pts.len() || j < b.pts.len() {
            let take_a = j == b.pts.len()
                || (i < a.pts.len() && cmp_plain(ord, a.pts[i].x, b.pts[j].x) != Ordering::Greater);
            if take_a {
                amap.push(pts.len() as u32);
                pts.push(a.pts[i]);
                i += 1;
            } else {
                bmap.push(pts.len() as u32);
                pts.push(b.pts[j]);
                j += 1;
            }
        }
        let mut yord = Vec::with_capacity(n);
        let (mut i, mut j) = (0, 0);
        while i < a.yord.len() || j < b.yord.len() {
            let take_a = j == b.yord.len()
                || (i < a.yord.len()
                    && cmp_plain(
                        ord,
                        a.pts[a.yord[i] as usize].y,
                        b.pts[b.yord[j] as usize].y,
                    ) != Ordering::Greater);
            if take_a {
                yord.push(amap[a.yord[i] as usize]);
                i += 1;
            } else {
                yord.push(bmap[b.yord[j] as usize]);
                j += 1;
            }
        }
        Sorted { pts, yord }
    }
}

struct Level {
    pts: Vec<Point>,
    yord: Vec<u32>,
    yrank: Vec<u32>,
    // idx[d]: point indices; each depth-d block of x positions sorted by y rank
    idx: Vec<Vec<u32>>,
    // rmq[d]: iterative segment tree over idx[d] holding argmin positions
    rmq: Vec<Vec<u32>>,
    dead: Vec<bool>,
    ndead: usize,
}

impl Level {
    fn build(s: Sorted) -> Level {
        let m = s.pts.len();
        let mut yrank = vec![0u32; m];
        for (r, &p) in s.yord.iter().enumerate() {
            yrank[p as usize] = r as u32;
        }
        let depths = m.next_power_of_two().trailing_zeros() as usize + 1;
        let mut idx = vec![Vec::new(); depths];
        idx[depths - 1] = (0..m as u32).collect();
        for d in (0..depths - 1).rev() {
            let half = 1usize << (depths - 2 - d);
            let child = &idx[d + 1];
            let mut out = Vec::with_capacity(m);
            let mut lo = 0;
            while lo < m {
                let mid = (lo + half).min(m);
                let hi = (lo + 2 * half).min(m);
                let (mut i, mut j) = (lo, mid);
                while i < mid || j < hi {
                    if j == hi || (i < mid && yrank[child[i] as usize] < yrank[child[j] as usize]) {
                        out.push(child[i]);
                        i += 1;
                    } else {
                        out.push(child[j]);
                        j += 1;
                    }
                }
                lo = hi;
            }
            idx[d] = out;
        }
        let pts = s.pts;
        let rmq = idx
            .iter()
            .map(|row| {
                let mut t = vec![0u32; 2 * m];
                for i in 0..m {
                    t[m + i] = i as u32;
                }
                for i in (1..m).rev() {
                    let (a, b) = (t[2 * i], t[2 * i + 1]);
                    t[i] = if Self::earlier(&pts, row, a, b) { a } else { b };
                }
                t
            })
            .collect();
        Level {
            dead: vec![false; m],
            ndead: 0,
            pts,
            yord: s.yord,
            yrank,
            idx,
            rmq,
        }
    }

    fn earlier(pts: &[Point], row: &[u32], a: u32, b: u32) -> bool {
        let (p, q) = (&pts[row[a as usize] as usize], &pts[row[b as usize] as usize]);
        (p.time, p.key) <= (q.time, q.key)
    }

    fn len(&self) -> usize {
        self.pts.len()
    }

    fn live(&self) -> usize {
        self.pts.len() - self.ndead
    }

    // Drops dead points; orders are preserved so no comparisons are needed.
    fn compact(self) -> Sorted {
        let mut remap = vec![u32::MAX; self.pts.len()];
        let mut pts = Vec::with_capacity(self.live());
        for (i, p) in self.pts.iter().enumerate() {
            if !self.dead[i] {
                remap[i] = pts.len() as u32;
                pts.push(*p);
            }
        }
        let yord = self
            .yord
            .iter()
            .filter(|&&i| !self.dead[i as usize])
            .map(|&i| remap[i as usize])
            .collect();
        Sorted { pts, yord }
    }

    fn argmin(&self, d: usize, mut l: usize, mut r: usize) -> u32 {
        let m = self.len();
        let (t, row) = (&self.rmq[d], &self.idx[d]);
        let mut best: Option<u32> = None;
        let pick = |c: u32, best: &mut Option<u32>| {
            *best = Some(match *best {
                Some(b) if Self::earlier(&self.pts, row, b, c) => b,
                _ => c,
            });
        };
        l += m;
        r += m;
        while l < r {
            if l & 1 == 1 {
                pick(t[l], &mut best);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                pick(t[r], &mut best);
            }
            l /= 2;
            r /= 2;
        }
        best.expect("nonempty range")
    }

    // Calls `f(depth, lo, hi)` for the y-filtered slice of every canonical
    // node covering x positions [xa, xb).
    fn canonical(&self, xa: usize, xb: usize, ya: u32, yb: u32, f: &mut impl FnMut(usize, usize, usize)) {
        let m = self.len();
        if xa >= xb {
            return;
        }
        let depths = self.idx.len();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((d, b)) = stack.pop() {
            let size = 1usize << (depths - 1 - d);
            let lo = b * size;
            let hi = ((b + 1) * size).min(m);
            if lo >= xb || hi <= xa || lo >= hi {
                continue;
            }
            if xa <= lo && hi <= xb {
                let row = &self.idx[d][lo..hi];
                let s = lo + row.partition_point(|&p| self.yrank[p as usize] < ya);
                let e = lo + row.partition_point(|&p| self.yrank[p as usize] < yb);
                if s < e {
                    f(d, s, e);
                }
                continue;
            }
            stack.push((d + 1, 2 * b + 1));
            stack.push((d + 1, 2 * b));
        }
    }
}

/// The index.
#[derive(Default)]
pub struct RangeIndex {
    levels: Vec<Option<Level>>,
    loc: FxHashMap<u64, (u32, u32)>,
}

impl std::fmt::Debug for RangeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RangeIndex").field("len", &self.len()).finish()
    }
}

impl RangeIndex {
    /// An empty index.
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of live points.
    pub fn len(&self) -> usize {
        self.loc.len()
    }

    /// True if no point is stored.
    pub fn is_empty(&self) -> bool {
        self.loc.is_empty()
    }

    /// True if `key` is stored.
    pub fn contains(&self, key: u64) -> bool {
        self.loc.contains_key(&key)
    }

    /// The stored point of `key`.
    pub fn get(&self, key: u64) -> Option<Point> {
        let &(l, i) = self.loc.get(&key)?;
        Some(self.levels[l as usize].as_ref()?.pts[i as usize])
    }

    fn place(&mut self, slot: usize, level: Level) {
        for (i, p) in level.pts.iter().enumerate() {
            if !level.dead[i] {
                self.loc.insert(p.key, (slot as u32, i as u32));
            }
        }
        if self.levels.len() <= slot {
            self.levels.resize_with(slot + 1, || None);
        }
        self.levels[slot] = Some(level);
    }

    /// Inserts a point.
    ///
    /// # Errors
    /// `Invalid` if the key is already present.
    pub fn insert(&mut self, ord: &impl KeyOrder, p: Point) -> Result<()> {
        if self.loc.contains_key(&p.key) {
            return Err(Error::Invalid(format!("duplicate key {}", p.key)));
        }
        let mut carry = Sorted {
            pts: vec![p],
            yord: vec![0],
        };
        let mut slot = 0;
        loop {
            match self.levels.get_mut(slot).and_then(Option::take) {
                None => break,
                Some(level) => {
                    carry = Sorted::merge(carry, level.compact(), ord);
                    slot += 1;
                }
            }
        }
        // A carry can be smaller than its slot's capacity after compaction;
        // that only makes later merges cheaper.
        self.place(slot, Level::build(carry));
        Ok(())
    }

    /// Deletes the point with `key`.
    ///
    /// # Errors
    /// `Invalid` if the key is absent.
    pub fn delete(&mut self, key: u64) -> Result<Point> {
        let (slot, i) = self
            .loc
            .remove(&key)
            .ok_or_else(|| Error::Invalid(format!("missing key {key}")))?;
        let level = self.levels[slot as usize].as_mut().expect("located level");
        level.dead[i as usize] = true;
        level.ndead += 1;
        let p = level.pts[i as usize];
        if level.ndead * 2 > level.len() {
            let level = self.levels[slot as usize].take().unwrap();
            if level.live() > 0 {
                self.place(slot as usize, Level::build(level.compact()));
            }
        }
        Ok(p)
    }

    // x positions and y ranks of the query box on one level.
    fn bounds(&self, level: &Level, ord: &impl KeyOrder, x: Sig, y: Option<Sig>) -> (usize, usize, u32, u32) {
        let (lo, hi) = (OrderedKey::plain(x), OrderedKey::capped(x));
        let xa = level
            .pts
            .partition_point(|p| ord.cmp_keys(OrderedKey::plain(p.x), lo) == Ordering::Less);
        let xb = level
            .pts
            .partition_point(|p| ord.cmp_keys(OrderedKey::plain(p.x), hi) == Ordering::Less);
        let (ya, yb) = match y {
            None => (0, level.len() as u32),
            Some(y) => {
                let (lo, hi) = (OrderedKey::plain(y), OrderedKey::capped(y));
                let ys = |k: OrderedKey| {
                    level.yord.partition_point(|&i| {
                        ord.cmp_keys(OrderedKey::plain(level.pts[i as usize].y), k) == Ordering::Less
                    }) as u32
                };
                (ys(lo), ys(hi))
            }
        };
        (xa, xb, ya, yb)
    }

    /// Keys of up to `limit` points with `x` starting with `str(x)` and `y`
    /// starting with `str(y)` (`None` leaves `y` unrestricted).
    pub fn query(&self, ord: &impl KeyOrder, x: Sig, y: Option<Sig>, limit: Option<usize>) -> Vec<u64> {
        let limit = limit.unwrap_or(usize::MAX);
        let mut out = Vec::new();
        for level in self.levels.iter().flatten() {
            if out.len() >= limit {
                break;
            }
            let (xa, xb, ya, yb) = self.bounds(level, ord, x, y);
            level.canonical(xa, xb, ya, yb, &mut |d, s, e| {
                for &p in &level.idx[d][s..e] {
                    if out.len() >= limit {
                        return;
                    }
                    if !level.dead[p as usize] {
                        out.push(level.pts[p as usize].key);
                    }
                }
            });
        }
        out
    }

    /// Matching points in nondecreasing timestamp order (ties by key),
    /// produced lazily.
    pub fn query_chrono(&self, ord: &impl KeyOrder, x: Sig, y: Option<Sig>) -> Chrono<'_> {
        let mut heap = BinaryHeap::new();
        for (li, level) in self.levels.iter().enumerate() {
            let Some(level) = level else { continue };
            let (xa, xb, ya, yb) = self.bounds(level, ord, x, y);
            level.canonical(xa, xb, ya, yb, &mut |d, s, e| {
                heap.push(Reverse(Chrono::range(level, li, d, s, e)));
            });
        }
        Chrono { index: self, heap }
    }
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Pending {
    time: u64,
    key: u64,
    level: usize,
    depth: usize,
    lo: usize,
    hi: usize,
    at: usize,
}

/// Lazy chronological stream returned by [`RangeIndex::query_chrono`].
pub struct Chrono<'a> {
    index: &'a RangeIndex,
    heap: BinaryHeap<Reverse<Pending>>,
}

impl Chrono<'_> {
    fn range(level: &Level, li: usize, d: usize, lo: usize, hi: usize) -> Pending {
        let at = level.argmin(d, lo, hi) as usize;
        let p = &level.pts[level.idx[d][at] as usize];
        Pending {
            time: p.time,
            key: p.key,
            level: li,
            depth: d,
            lo,
            hi,
            at,
        }
    }
}

impl Iterator for Chrono<'_> {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        loop {
            let Reverse(top) = self.heap.pop()?;
            let level = self.index.levels[top.level].as_ref().expect("level stays during query");
            for (lo, hi) in [(top.lo, top.at), (top.at + 1, top.hi)] {
                if lo < hi {
                    self.heap
                        .push(Reverse(Chrono::range(level, top.level, top.depth, lo, hi)));
                }
            }
            let i = level.idx[top.depth][top.at] as usize;
            if !level.dead[i] {
                return Some(level.pts[i]);
            }
        }
    }
}
