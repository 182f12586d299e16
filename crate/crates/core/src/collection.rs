//! The persistent string collection.
//!
//! Strings are named by dense [`Handle`]s; equal strings always share one
//! handle because their root signatures coincide. `concat` and `split`
//! never touch their arguments: they compute a context-insensitive
//! decomposition of the result from existing parse trees and [`collapse`]
//! it, creating only the signatures above that decomposition.
//!
//! Updates can fail (see [`Failure`]). With restarts enabled the collection
//! reseeds itself, replays its update log and retries, so callers observe
//! exactly the handle sequence a failure-free run would produce.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::decompose::{ci_decomposition, ci_range, Mode, RleSeq};
use crate::error::{Error, Failure, Result};
use crate::grammar::{Char, Grammar, GrammarConfig, Sig};
use crate::order;

/// Name of a string in the collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Handle(pub u32);

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{}", self.0)
    }
}

/// Collection parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    /// Seed and word size of the grammar.
    pub grammar: GrammarConfig,
    /// Failure constant `c` of the depth guard `8(c ln t + ln n)`.
    pub c: f64,
    /// Maintain reversed strings for every handle.
    pub mirror: bool,
    /// Reseed and replay on failure.
    pub restart: bool,
    /// Restarts attempted per operation before the failure surfaces.
    pub max_retries: u32,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            grammar: GrammarConfig::default(),
            c: 4.0,
            mirror: true,
            restart: true,
            max_retries: 32,
        }
    }
}

/// A logged update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Update {
    /// `make_string(w)`.
    Make(Vec<Char>),
    /// `concat(h1, h2)`.
    Concat(Handle, Handle),
    /// `split(h, k)`.
    Split(Handle, u64),
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Update::Make(w) => {
                f.write_str("M ")?;
                for &c in w {
                    match char::from_u32(c) {
                        Some(ch) => write!(f, "{ch}")?,
                        None => write!(f, "\\u{{{c:x}}}")?,
                    }
                }
                Ok(())
            }
            Update::Concat(a, b) => write!(f, "C {} {}", a.0, b.0),
            Update::Split(h, k) => write!(f, "S {} {}", h.0, k),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    sig: Sig,
    rev: Sig,
}

/// The collection.
#[derive(Debug, Clone)]
pub struct Collection {
    config: Config,
    grammar: Grammar,
    slots: Vec<Slot>,
    by_sig: FxHashMap<Sig, Handle>,
    // Operation count for the depth guard: one per collapse, |w| per new
    // string built from characters.
    t: u64,
    // Total length of registered strings.
    n: f64,
    log: Vec<Update>,
    restarts: u32,
}

impl Collection {
    /// An empty collection.
    pub fn new(config: Config) -> Self {
        Collection {
            config,
            grammar: Grammar::new(config.grammar),
            slots: Vec::new(),
            by_sig: FxHashMap::default(),
            t: 0,
            n: 0.0,
            log: Vec::new(),
            restarts: 0,
        }
    }

    /// An empty collection with default parameters and the given seed.
    pub fn with_seed(seed: u64) -> Self {
        let mut config = Config::default();
        config.grammar.seed = seed;
        Self::new(config)
    }

    /// Parameters.
    pub fn config(&self) -> Config {
        self.config
    }

    /// The underlying grammar.
    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    /// Mutable grammar access for signature-level clients.
    pub fn grammar_mut(&mut self) -> &mut Grammar {
        &mut self.grammar
    }

    /// Number of handles issued.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    /// True if no handle was issued.
    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Successful updates so far, in order.
    pub fn log(&self) -> &[Update] {
        &self.log
    }

    /// How many times the collection reseeded itself.
    pub fn restarts(&self) -> u32 {
        self.restarts
    }

    fn slot(&self, h: Handle) -> Result<Slot> {
        self.slots
            .get(h.0 as usize)
            .copied()
            .ok_or(Error::UnknownHandle(h.0))
    }

    /// Root signature of `h`.
    pub fn sig(&self, h: Handle) -> Result<Sig> {
        Ok(self.slot(h)?.sig)
    }

    /// Root signature of the reversed string of `h`.
    ///
    /// # Errors
    /// `Invalid` if the collection is not in mirror mode.
    pub fn rev_sig(&self, h: Handle) -> Result<Sig> {
        if !self.config.mirror {
            return Err(Error::Invalid("collection is not in mirror mode".into()));
        }
        Ok(self.slot(h)?.rev)
    }

    /// The handle whose string is `str(s)`, if any.
    pub fn handle_of(&self, s: Sig) -> Option<Handle> {
        self.by_sig.get(&s).copied()
    }

    /// Length of `str(h)`.
    pub fn length(&self, h: Handle) -> Result<u64> {
        Ok(self.grammar.length(self.sig(h)?))
    }

    /// Parse depth of `str(h)`.
    pub fn depth(&self, h: Handle) -> Result<u32> {
        Ok(self.grammar.level(self.sig(h)?))
    }

    /// Materializes `str(h)`.
    pub fn string(&self, h: Handle) -> Result<Vec<Char>> {
        Ok(self.grammar.expand(self.sig(h)?))
    }

    /// Equality of strings, i.e. of handles.
    pub fn eq(&self, a: Handle, b: Handle) -> Result<bool> {
        self.slot(a)?;
        self.slot(b)?;
        Ok(a == b)
    }

    /// Lexicographic comparison.
    pub fn compare(&self, a: Handle, b: Handle) -> Result<std::cmp::Ordering> {
        Ok(order::compare(&self.grammar, self.sig(a)?, self.sig(b)?))
    }

    /// Longest common prefix length.
    pub fn lcp(&self, a: Handle, b: Handle) -> Result<u64> {
        Ok(order::lcp(&self.grammar, self.sig(a)?, self.sig(b)?))
    }

    /// The `i`-th character (1-based).
    pub fn char_at(&self, h: Handle, i: u64) -> Result<Char> {
        let s = self.sig(h)?;
        let len = self.grammar.length(s);
        if i == 0 || i > len {
            return Err(Error::OutOfRange { pos: i, len });
        }
        Ok(order::char_at(&self.grammar, s, i))
    }

    // Depth allowed for the current operation. `t` and `n` are clamped to
    // at least 2: at 1 the bound holds with no probability at all and would
    // reject the very first strings.
    fn guard(&self, extra_n: f64) -> u32 {
        let t = self.t.max(2) as f64;
        let n = (self.n + extra_n).max(2.0);
        (8.0 * (self.config.c * t.ln() + n.ln())).floor() as u32
    }

    /// Builds the signature of the string a decomposition spells.
    pub fn collapse(&mut self, d: &RleSeq) -> Result<Sig, Failure> {
        self.t += 1;
        let guard = self.guard(d.expanded_len(&self.grammar) as f64);
        collapse(&mut self.grammar, d, Some(guard))
    }

    /// Signature of `w` without registering a handle.
    pub fn intern_str(&mut self, w: &[Char]) -> Result<Sig, Failure> {
        let d = self.char_rle(w);
        self.t += w.len() as u64;
        let guard = self.guard(w.len() as f64);
        collapse(&mut self.grammar, &d, Some(guard))
    }

    /// Signature of `str(a)·str(b)` without registering a handle.
    pub fn concat_sigs(&mut self, a: Sig, b: Sig) -> Result<Sig, Failure> {
        let d = ci_decomposition(&self.grammar, a, Mode::RightCI)
            .concat(ci_decomposition(&self.grammar, b, Mode::LeftCI));
        self.collapse(&d)
    }

    /// Signature of `str(s)[i..=j]` without registering a handle.
    ///
    /// # Panics
    /// Unless `1 <= i <= j <= length(s)`.
    pub fn substring(&mut self, s: Sig, i: u64, j: u64) -> Result<Sig, Failure> {
        if i == 1 && j == self.grammar.length(s) {
            return Ok(s);
        }
        let d = ci_range(&self.grammar, s, i, j);
        self.collapse(&d)
    }

    fn char_rle(&mut self, w: &[Char]) -> RleSeq {
        let g = &mut self.grammar;
        RleSeq::from_sigs(w.iter().map(|&c| g.intern_terminal(c)))
    }

    fn register(&mut self, sig: Sig, rev: Sig) -> Handle {
        if let Some(&h) = self.by_sig.get(&sig) {
            return h;
        }
        let h = Handle(self.slots.len() as u32);
        self.slots.push(Slot { sig, rev });
        self.by_sig.insert(sig, h);
        self.n += self.grammar.length(sig) as f64;
        h
    }

    fn try_apply(&mut self, u: &Update) -> Result<Vec<Handle>> {
        match u {
            Update::Make(w) => {
                if w.is_empty() {
                    return Err(Error::Empty);
                }
                self.t += w.len() as u64;
                let d = self.char_rle(w);
                let guard = self.guard(w.len() as f64);
                let sig = collapse(&mut self.grammar, &d, Some(guard))?;
                let rev = if self.config.mirror {
                    let r: Vec<Char> = w.iter().rev().copied().collect();
                    let d = self.char_rle(&r);
                    collapse(&mut self.grammar, &d, Some(guard))?
                } else {
                    sig
                };
                Ok(vec![self.register(sig, rev)])
            }
            &Update::Concat(a, b) => {
                let (x, y) = (self.slot(a)?, self.slot(b)?);
                let sig = self.concat_sigs(x.sig, y.sig)?;
                let rev = if self.config.mirror {
                    self.concat_sigs(y.rev, x.rev)?
                } else {
                    sig
                };
                Ok(vec![self.register(sig, rev)])
            }
            &Update::Split(h, k) => {
                let x = self.slot(h)?;
                let n = self.grammar.length(x.sig);
                if k == 0 || k >= n {
                    return Err(Error::OutOfRange { pos: k, len: n });
                }
                let l = self.substring(x.sig, 1, k)?;
                let r = self.substring(x.sig, k + 1, n)?;
                let (lr, rr) = if self.config.mirror {
                    (
                        self.substring(x.rev, n - k + 1, n)?,
                        self.substring(x.rev, 1, n - k)?,
                    )
                } else {
                    (l, r)
                };
                Ok(vec![self.register(l, lr), self.register(r, rr)])
            }
        }
    }

    /// Applies an update, restarting on failure if enabled, and logs it.
    pub fn apply(&mut self, u: Update) -> Result<Vec<Handle>> {
        let mut attempts = 0;
        loop {
            match self.try_apply(&u) {
                Ok(hs) => {
                    self.log.push(u);
                    return Ok(hs);
                }
                Err(Error::Failure(f)) if self.config.restart => {
                    attempts += 1;
                    if attempts > self.config.max_retries {
                        return Err(f.into());
                    }
                    self.restart(&mut attempts)?;
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Reinitializes with the next derived seed and replays the log.
    fn restart(&mut self, attempts: &mut u32) -> Result<()> {
        let log = std::mem::take(&mut self.log);
        loop {
            self.restarts += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.grammar.seed);
            rng.set_stream(u64::from(self.restarts));
            let mut grammar_config = self.config.grammar;
            grammar_config.seed = rng.next_u64();
            let mut fresh = Collection::new(Config {
                grammar: grammar_config,
                restart: false,
                ..self.config
            });
            fresh.restarts = self.restarts;
            let replay = log.iter().try_for_each(|u| fresh.apply(u.clone()).map(|_| ()));
            match replay {
                Ok(()) => {
                    fresh.config = self.config;
                    *self = fresh;
                    return Ok(());
                }
                Err(Error::Failure(f)) => {
                    *attempts += 1;
                    if *attempts > self.config.max_retries {
                        self.log = log;
                        return Err(f.into());
                    }
                }
                Err(e) => {
                    self.log = log;
                    return Err(e);
                }
            }
        }
    }

    /// Adds `w` to the collection.
    pub fn make_string(&mut self, w: &[Char]) -> Result<Handle> {
        Ok(self.apply(Update::Make(w.to_vec()))?[0])
    }

    /// Convenience wrapper over [`Collection::make_string`].
    pub fn make_str(&mut self, w: &str) -> Result<Handle> {
        let w: Vec<Char> = w.chars().map(Char::from).collect();
        self.make_string(&w)
    }

    /// Adds `str(a)·str(b)`.
    pub fn concat(&mut self, a: Handle, b: Handle) -> Result<Handle> {
        Ok(self.apply(Update::Concat(a, b))?[0])
    }

    /// Adds `str(h)[..k]` and `str(h)[k..]`.
    pub fn split(&mut self, h: Handle, k: u64) -> Result<(Handle, Handle)> {
        let hs = self.apply(Update::Split(h, k))?;
        Ok((hs[0], hs[1]))
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    sig: Sig,
    count: u64,
    prev: u32,
    next: u32,
    alive: bool,
}

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
enum Rule {
    Run { at: u32, sig: Sig, count: u64 },
    Adj { left: u32, right: u32, lsig: Sig, rsig: Sig },
}

struct Collapser<'g> {
    g: &'g mut Grammar,
    nodes: Vec<Node>,
    buckets: Vec<Vec<Rule>>,
    alive: usize,
    head: u32,
}

impl Collapser<'_> {
    fn add_rules(&mut self, i: u32) {
        let n = self.nodes[i as usize];
        if n.count >= 2 {
            let level = self.g.level(n.sig) as usize + 1;
            if level < self.buckets.len() {
                self.buckets[level].push(Rule::Run {
                    at: i,
                    sig: n.sig,
                    count: n.count,
                });
            }
        }
        if n.prev != NIL {
            self.add_adj(n.prev, i);
        }
        if n.next != NIL {
            self.add_adj(i, n.next);
        }
    }

    fn add_adj(&mut self, left: u32, right: u32) {
        let (lsig, rsig) = (self.nodes[left as usize].sig, self.nodes[right as usize].sig);
        if let Some(level) = self.g.pair_level(lsig, rsig) {
            self.buckets[level as usize].push(Rule::Adj {
                left,
                right,
                lsig,
                rsig,
            });
        }
    }

    fn unlink(&mut self, i: u32) {
        let Node { prev, next, .. } = self.nodes[i as usize];
        self.nodes[i as usize].alive = false;
        if prev != NIL {
            self.nodes[prev as usize].next = next;
        } else {
            self.head = next;
        }
        if next != NIL {
            self.nodes[next as usize].prev = prev;
        }
        self.alive -= 1;
    }

    // Absorb equal neighbours into `i`, then queue the rules around it.
    fn settle(&mut self, i: u32) {
        for side in [0, 1] {
            let n = self.nodes[i as usize];
            let j = if side == 0 { n.prev } else { n.next };
            if j != NIL && self.nodes[j as usize].sig == n.sig {
                self.nodes[i as usize].count += self.nodes[j as usize].count;
                self.unlink(j);
            }
        }
        self.add_rules(i);
    }

    fn live(&self, r: &Rule) -> bool {
        match *r {
            Rule::Run { at, sig, count } => {
                let n = &self.nodes[at as usize];
                n.alive && n.sig == sig && n.count == count
            }
            Rule::Adj {
                left,
                right,
                lsig,
                rsig,
            } => {
                let (a, b) = (&self.nodes[left as usize], &self.nodes[right as usize]);
                a.alive && b.alive && a.next == right && a.sig == lsig && b.sig == rsig
            }
        }
    }

    fn done(&self) -> bool {
        self.alive == 1 && self.nodes[self.head as usize].count == 1
    }
}

/// Collapses a decomposition into the signature of the string it spells,
/// interning every signature of the parse tree above it.
///
/// `guard` bounds the admissible root level.
///
/// # Panics
/// On an empty decomposition.
pub fn collapse(g: &mut Grammar, d: &RleSeq, guard: Option<u32>) -> Result<Sig, Failure> {
    let runs = d.runs();
    assert!(!runs.is_empty(), "cannot collapse an empty decomposition");
    if runs.len() == 1 && runs[0].count == 1 {
        return Ok(runs[0].sig);
    }
    let max = g.max_level();
    let nodes = runs
        .iter()
        .enumerate()
        .map(|(i, r)| Node {
            sig: r.sig,
            count: r.count,
            prev: if i == 0 { NIL } else { i as u32 - 1 },
            next: if i + 1 == runs.len() { NIL } else { i as u32 + 1 },
            alive: true,
        })
        .collect();
    let mut c = Collapser {
        g,
        nodes,
        buckets: vec![Vec::new(); max as usize + 1],
        alive: runs.len(),
        head: 0,
    };
    for i in 0..runs.len() as u32 {
        let n = c.nodes[i as usize];
        if n.count >= 2 {
            let level = c.g.level(n.sig) as usize + 1;
            if level <= max as usize {
                c.buckets[level].push(Rule::Run {
                    at: i,
                    sig: n.sig,
                    count: n.count,
                });
            }
        }
        if n.next != NIL {
            c.add_adj(i, n.next);
        }
    }
    for level in 1..=max {
        if c.done() {
            break;
        }
        if let Some(guard) = guard.filter(|&gd| level > gd) {
            return Err(Failure::DepthGuard { depth: level, guard });
        }
        while let Some(rule) = c.buckets[level as usize].pop() {
            if !c.live(&rule) {
                continue;
            }
            match rule {
                Rule::Run { at, sig, count } => {
                    let s = c.g.intern_power(sig, count)?;
                    let n = &mut c.nodes[at as usize];
                    n.sig = s;
                    n.count = 1;
                    c.settle(at);
                }
                Rule::Adj {
                    left,
                    right,
                    lsig,
                    rsig,
                } => {
                    assert!(
                        c.nodes[left as usize].count == 1 && c.nodes[right as usize].count == 1,
                        "pair rule fired over a run"
                    );
                    let s = c.g.intern_pair(lsig, rsig)?;
                    debug_assert_eq!(c.g.level(s), level);
                    c.unlink(right);
                    let n = &mut c.nodes[left as usize];
                    n.sig = s;
                    c.settle(left);
                }
            }
        }
    }
    if c.done() {
        Ok(c.nodes[c.head as usize].sig)
    } else {
        Err(Failure::LevelOverflow { max })
    }
}
