//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use dynstr::{Char, Grammar, Kind, Sig};
use rand::distr::uniform::SampleRange;
use rand::{Rng, RngCore};

/// Converts a `&str` to characters.
pub fn chars(s: &str) -> Vec<Char> {
    s.chars().map(Char::from).collect()
}

/// A random string over the first `sigma` lowercase letters with a length
/// drawn from `len`.
pub fn random_string(rng: &mut impl RngCore, len: impl SampleRange<usize>, sigma: u32) -> Vec<Char> {
    let n = rng.random_range(len);
    (0..n).map(|_| Char::from(b'a') + rng.random_range(0..sigma)).collect()
}

/// Bit `j` (1-based) of the random word of `s`.
fn bit(g: &Grammar, s: Sig, j: u32) -> bool {
    (g.hbits(s) >> (j - 1)) & 1 == 1
}

/// The layers of the uncompressed parse tree of `w`, computed by literally
/// running the parsing rounds: layer `l` lists `(signature, start offset)`
/// of every node at level `l` (0-based offsets). The last layer is the root.
///
/// Odd rounds collapse every maximal run of length at least two into a
/// power; even round `2j` merges every adjacent pair whose left symbol has
/// bit `j` clear and whose right symbol has bit `j` set.
pub fn naive_layers(g: &mut Grammar, w: &[Char]) -> Vec<Vec<(Sig, u64)>> {
    assert!(!w.is_empty());
    let mut cur: Vec<(Sig, u64)> = w
        .iter()
        .enumerate()
        .map(|(i, &c)| (g.intern_terminal(c), i as u64))
        .collect();
    let mut layers = vec![cur.clone()];
    let mut level = 0u32;
    while cur.len() > 1 {
        level += 1;
        assert!(level <= g.max_level(), "naive parse ran out of levels");
        let mut next = Vec::new();
        let mut i = 0;
        if level % 2 == 1 {
            while i < cur.len() {
                let mut j = i + 1;
                while j < cur.len() && cur[j].0 == cur[i].0 {
                    j += 1;
                }
                let k = (j - i) as u64;
                if k >= 2 {
                    let s = g.intern_power(cur[i].0, k).expect("power fits");
                    assert_eq!(g.level(s), level);
                    next.push((s, cur[i].1));
                } else {
                    next.push(cur[i]);
                }
                i = j;
            }
        } else {
            let j = level / 2;
            while i < cur.len() {
                if i + 1 < cur.len() && !bit(g, cur[i].0, j) && bit(g, cur[i + 1].0, j) {
                    let s = g.intern_pair(cur[i].0, cur[i + 1].0).expect("pair fits");
                    assert_eq!(g.level(s), level, "pair level disagrees with the round");
                    next.push((s, cur[i].1));
                    i += 2;
                } else {
                    next.push(cur[i]);
                    i += 1;
                }
            }
        }
        layers.push(next.clone());
        cur = next;
    }
    layers
}

/// Root signature of `w` from the literal parse.
pub fn naive_sig(g: &mut Grammar, w: &[Char]) -> Sig {
    naive_layers(g, w).last().unwrap()[0].0
}

/// Naive map from strings to handle numbers, mirroring the dedup contract.
#[derive(Debug, Default)]
pub struct StringMap {
    pub strings: Vec<Vec<Char>>,
    pub ids: HashMap<Vec<Char>, usize>,
}

impl StringMap {
    pub fn add(&mut self, w: Vec<Char>) -> usize {
        if let Some(&h) = self.ids.get(&w) {
            return h;
        }
        let h = self.strings.len();
        self.ids.insert(w.clone(), h);
        self.strings.push(w);
        h
    }
}

/// Length of the longest common prefix.
pub fn naive_lcp(a: &[Char], b: &[Char]) -> u64 {
    a.iter().zip(b).take_while(|(x, y)| x == y).count() as u64
}

/// All 1-based starts of `p` in `w`.
pub fn naive_occurrences(w: &[Char], p: &[Char]) -> Vec<u64> {
    if p.is_empty() || p.len() > w.len() {
        return Vec::new();
    }
    (0..=w.len() - p.len())
        .filter(|&i| &w[i..i + p.len()] == p)
        .map(|i| i as u64 + 1)
        .collect()
}

/// Distinct signatures of the parse tree of `s`.
pub fn tree_sigs(g: &Grammar, s: Sig) -> BTreeSet<Sig> {
    let mut out = BTreeSet::new();
    let mut stack = vec![s];
    while let Some(x) = stack.pop() {
        if !out.insert(x) {
            continue;
        }
        match g.kind(x) {
            Kind::Terminal(_) => {}
            Kind::Pair(l, r) => stack.extend([l, r]),
            Kind::Power(b, _) => stack.push(b),
        }
    }
    out
}

/// The text-editing model with letter identities, answering history
/// queries by brute force: an occurrence (a sequence of letter ids) is new
/// in version `t` if it is present in `T_t` but not in `T_(t-1)`.
#[derive(Debug, Default)]
pub struct IdText {
    pub versions: Vec<Vec<(u64, Char)>>,
    next_id: u64,
}

impl IdText {
    pub fn new() -> Self {
        IdText {
            versions: vec![Vec::new()],
            next_id: 0,
        }
    }

    pub fn current(&self) -> &[(u64, Char)] {
        self.versions.last().unwrap()
    }

    pub fn insert(&mut self, pos: u64, c: Char) {
        let mut t = self.current().to_vec();
        t.insert(pos as usize - 1, (self.next_id, c));
        self.next_id += 1;
        self.versions.push(t);
    }

    pub fn delete(&mut self, l: u64, r: u64) {
        let mut t = self.current().to_vec();
        t.drain(l as usize - 1..r as usize);
        self.versions.push(t);
    }

    /// Moves `l..=r` in front of the character at `dest` (1-based).
    pub fn move_block(&mut self, l: u64, r: u64, dest: u64) {
        let t = self.current().to_vec();
        let (l, r, d) = (l as usize - 1, r as usize, dest as usize - 1);
        let block = t[l..r].to_vec();
        let mut out = Vec::new();
        for (i, &x) in t.iter().enumerate() {
            if i == d {
                out.extend_from_slice(&block);
            }
            if i < l || i >= r {
                out.push(x);
            }
        }
        if d == t.len() {
            out.extend_from_slice(&block);
        }
        self.versions.push(out);
    }

    /// `(version, start)` pairs sorted chronologically then by position.
    pub fn find(&self, p: &[Char]) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut prev: BTreeSet<Vec<u64>> = BTreeSet::new();
        for (v, t) in self.versions.iter().enumerate() {
            let mut here = BTreeMap::new();
            if p.len() <= t.len() {
                for i in 0..=t.len() - p.len() {
                    if t[i..i + p.len()].iter().map(|x| x.1).eq(p.iter().copied()) {
                        let ids: Vec<u64> = t[i..i + p.len()].iter().map(|x| x.0).collect();
                        here.insert(ids, i as u64 + 1);
                    }
                }
            }
            for (ids, pos) in &here {
                if !prev.contains(ids) {
                    out.push((v as u64 + 1, *pos));
                }
            }
            prev = here.into_keys().collect();
        }
        out.sort_unstable();
        out
    }
}
