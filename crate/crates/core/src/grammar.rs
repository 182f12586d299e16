//! The signature store.
//!
//! Every distinct string that ever appears as a node of some parse tree gets
//! exactly one [`Sig`]. Records are append-only: once interned, a signature's
//! production, length, level and random bits never change, so ids handed out
//! to callers stay valid for the lifetime of the grammar.
//!
//! Besides interning, the grammar answers `first_last(s, l, side)`: the node
//! of level at least `l` that is lowest on the leftmost (or rightmost) path
//! from `s`. Those paths form two forests (left child / right child as the
//! parent pointer, terminals as roots). Each node stores a level bitmask of
//! its forest ancestors and one skew-binary jump pointer, which together give
//! a popcount plus a logarithmic level-ancestor walk.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::error::Failure;

/// Signature identifier; dense, assigned in creation order.
pub type Sig = u32;

/// Character code.
pub type Char = u32;

/// Largest supported word size.
pub const MAX_B: u32 = 64;

/// Right-hand side of a production.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `s -> c`.
    Terminal(Char),
    /// `s -> l r`.
    Pair(Sig, Sig),
    /// `s -> b^k`, `k >= 2`.
    Power(Sig, u64),
}

/// An interned symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Record {
    /// Production.
    pub kind: Kind,
    /// Length of the derived string.
    pub length: u64,
    /// Parse level.
    pub level: u32,
    /// Random bits; bit `j - 1` holds `h_j`.
    pub hbits: u64,
}

/// Which spine to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Leftmost children.
    Left,
    /// Rightmost children.
    Right,
}

impl Side {
    fn ix(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

/// Construction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrammarConfig {
    /// Seed of the random-bit stream.
    pub seed: u64,
    /// Word size `B`; levels are capped at `2B`.
    pub b: u32,
}

impl Default for GrammarConfig {
    fn default() -> Self {
        GrammarConfig { seed: 0, b: 64 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Spine {
    jump: Sig,
    // bit (level - 1) for every spine ancestor (including self) of level >= 1
    mask: u128,
}

/// The grammar: records plus the inverse maps and spine forests.
#[derive(Debug, Clone)]
pub struct Grammar {
    config: GrammarConfig,
    rng: ChaCha8Rng,
    records: Vec<Record>,
    spines: Vec<[Spine; 2]>,
    term_map: FxHashMap<Char, Sig>,
    pair_map: FxHashMap<(Sig, Sig), Sig>,
    power_map: FxHashMap<(Sig, u64), Sig>,
}

impl Grammar {
    /// Creates an empty grammar.
    ///
    /// # Panics
    /// If `config.b` is outside `1..=64`.
    pub fn new(config: GrammarConfig) -> Self {
        assert!(
            (1..=MAX_B).contains(&config.b),
            "word size must be in 1..={MAX_B}"
        );
        Grammar {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            records: Vec::new(),
            spines: Vec::new(),
            term_map: FxHashMap::default(),
            pair_map: FxHashMap::default(),
            power_map: FxHashMap::default(),
        }
    }

    /// Construction parameters.
    pub fn config(&self) -> GrammarConfig {
        self.config
    }

    /// Highest admissible level, `2B`.
    pub fn max_level(&self) -> u32 {
        2 * self.config.b
    }

    /// Number of interned signatures.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// True if nothing has been interned.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The record of `s`.
    #[inline]
    pub fn record(&self, s: Sig) -> &Record {
        &self.records[s as usize]
    }

    /// Production of `s`.
    #[inline]
    pub fn kind(&self, s: Sig) -> Kind {
        self.records[s as usize].kind
    }

    /// Length of `str(s)`.
    #[inline]
    pub fn length(&self, s: Sig) -> u64 {
        self.records[s as usize].length
    }

    /// Level of `s`.
    #[inline]
    pub fn level(&self, s: Sig) -> u32 {
        self.records[s as usize].level
    }

    /// Random bits of `s`.
    #[inline]
    pub fn hbits(&self, s: Sig) -> u64 {
        self.records[s as usize].hbits
    }

    /// Number of children in the parse tree (0 for terminals).
    #[inline]
    pub fn degree(&self, s: Sig) -> u64 {
        match self.kind(s) {
            Kind::Terminal(_) => 0,
            Kind::Pair(..) => 2,
            Kind::Power(_, k) => k,
        }
    }

    /// The `k`-th child (1-based).
    #[inline]
    pub fn child(&self, s: Sig, k: u64) -> Sig {
        match self.kind(s) {
            Kind::Pair(l, r) => {
                debug_assert!(k == 1 || k == 2);
                if k == 1 {
                    l
                } else {
                    r
                }
            }
            Kind::Power(b, m) => {
                debug_assert!((1..=m).contains(&k));
                b
            }
            Kind::Terminal(_) => panic!("terminal has no children"),
        }
    }

    /// Spine parent: first child for `Left`, last child for `Right`.
    #[inline]
    pub fn end_child(&self, s: Sig, side: Side) -> Option<Sig> {
        match (self.kind(s), side) {
            (Kind::Terminal(_), _) => None,
            (Kind::Pair(l, _), Side::Left) => Some(l),
            (Kind::Pair(_, r), Side::Right) => Some(r),
            (Kind::Power(b, _), _) => Some(b),
        }
    }

    /// Character of a terminal.
    pub fn terminal_char(&self, s: Sig) -> Option<Char> {
        match self.kind(s) {
            Kind::Terminal(c) => Some(c),
            _ => None,
        }
    }

    /// Looks up a terminal without interning it.
    pub fn find_terminal(&self, c: Char) -> Option<Sig> {
        self.term_map.get(&c).copied()
    }

    /// Looks up a pair without interning it.
    pub fn find_pair(&self, l: Sig, r: Sig) -> Option<Sig> {
        self.pair_map.get(&(l, r)).copied()
    }

    /// Looks up a power without interning it.
    pub fn find_power(&self, b: Sig, k: u64) -> Option<Sig> {
        self.power_map.get(&(b, k)).copied()
    }

    fn fresh_bits(&mut self) -> u64 {
        let w = self.rng.next_u64();
        if self.config.b == 64 {
            w
        } else {
            w & ((1u64 << self.config.b) - 1)
        }
    }

    fn check_length(&self, length: Option<u64>) -> Result<u64, Failure> {
        let length = length.ok_or(Failure::LengthOverflow)?;
        if self.config.b < 64 && length >> self.config.b != 0 {
            return Err(Failure::LengthOverflow);
        }
        Ok(length)
    }

    fn push(&mut self, kind: Kind, length: u64, level: u32) -> Sig {
        let id = Sig::try_from(self.records.len()).expect("signature space exhausted");
        let hbits = self.fresh_bits();
        self.records.push(Record {
            kind,
            length,
            level,
            hbits,
        });
        let spines = match kind {
            Kind::Terminal(_) => [Spine { jump: id, mask: 0 }; 2],
            _ => {
                let own = 1u128 << (level - 1);
                [Side::Left, Side::Right].map(|side| {
                    let p = self.end_child(id, side).unwrap();
                    Spine {
                        jump: self.jump_for(p, side),
                        mask: self.spines[p as usize][side.ix()].mask | own,
                    }
                })
            }
        };
        self.spines.push(spines);
        id
    }

    // Skew-binary jump pointer of a new child of `p`.
    fn jump_for(&self, p: Sig, side: Side) -> Sig {
        let j1 = self.jump(p, side);
        let j2 = self.jump(j1, side);
        if self.depth(p, side) - self.depth(j1, side) == self.depth(j1, side) - self.depth(j2, side) {
            j2
        } else {
            p
        }
    }

    #[inline]
    fn jump(&self, s: Sig, side: Side) -> Sig {
        self.spines[s as usize][side.ix()].jump
    }

    #[inline]
    fn mask(&self, s: Sig, side: Side) -> u128 {
        self.spines[s as usize][side.ix()].mask
    }

    #[inline]
    fn depth(&self, s: Sig, side: Side) -> u32 {
        self.mask(s, side).count_ones()
    }

    /// Interns the terminal `c`.
    pub fn intern_terminal(&mut self, c: Char) -> Sig {
        if let Some(&s) = self.term_map.get(&c) {
            return s;
        }
        let s = self.push(Kind::Terminal(c), 1, 0);
        self.term_map.insert(c, s);
        s
    }

    /// Level a pair `(l, r)` would receive, or `None` if no admissible bit
    /// exists within the word.
    pub fn pair_level(&self, l: Sig, r: Sig) -> Option<u32> {
        let m = self.level(l).max(self.level(r));
        let jmin = m / 2 + 1;
        if jmin > self.config.b {
            return None;
        }
        let bits = (!self.hbits(l) & self.hbits(r)) >> (jmin - 1);
        if bits == 0 {
            return None;
        }
        let j = jmin + bits.trailing_zeros();
        (j <= self.config.b).then_some(2 * j)
    }

    /// Interns the pair `(l, r)`.
    pub fn intern_pair(&mut self, l: Sig, r: Sig) -> Result<Sig, Failure> {
        if let Some(&s) = self.pair_map.get(&(l, r)) {
            return Ok(s);
        }
        let level = self.pair_level(l, r).ok_or(Failure::LevelOverflow {
            max: self.max_level(),
        })?;
        let length = self.check_length(self.length(l).checked_add(self.length(r)))?;
        let s = self.push(Kind::Pair(l, r), length, level);
        self.pair_map.insert((l, r), s);
        Ok(s)
    }

    /// Interns the power `b^k`.
    ///
    /// # Panics
    /// If `k < 2` or `b` has odd level (runs are only formed over
    /// terminals and pairs).
    pub fn intern_power(&mut self, b: Sig, k: u64) -> Result<Sig, Failure> {
        assert!(k >= 2, "power multiplicity must be at least 2");
        if let Some(&s) = self.power_map.get(&(b, k)) {
            return Ok(s);
        }
        let level = self.level(b) + 1;
        assert!(level % 2 == 1, "power over odd-level base");
        if level > self.max_level() {
            return Err(Failure::LevelOverflow {
                max: self.max_level(),
            });
        }
        let length = self.check_length(self.length(b).checked_mul(k))?;
        let s = self.push(Kind::Power(b, k), length, level);
        self.power_map.insert((b, k), s);
        Ok(s)
    }

    /// The spine ancestor of `s` at spine depth `d` (terminal root = 0).
    fn spine_ancestor(&self, mut s: Sig, d: u32, side: Side) -> Sig {
        while self.depth(s, side) > d {
            let j = self.jump(s, side);
            s = if self.depth(j, side) >= d {
                j
            } else {
                self.end_child(s, side).unwrap()
            };
        }
        s
    }

    /// The lowest-level node of level `>= l` on the `side` spine of `s`.
    ///
    /// For `l == 0` this is the first (last) character's terminal.
    pub fn first_last(&self, s: Sig, l: u32, side: Side) -> Sig {
        debug_assert!(l <= self.level(s));
        let d = if l == 0 {
            0
        } else {
            1 + (self.mask(s, side) & ((1u128 << (l - 1)) - 1)).count_ones()
        };
        self.spine_ancestor(s, d, side)
    }

    /// Expands `str(s)`; intended for tests and small strings.
    pub fn expand(&self, s: Sig) -> Vec<Char> {
        let mut out = Vec::with_capacity(self.length(s) as usize);
        let mut stack = vec![s];
        while let Some(s) = stack.pop() {
            match self.kind(s) {
                Kind::Terminal(c) => out.push(c),
                Kind::Pair(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
                Kind::Power(b, k) => stack.extend(std::iter::repeat_n(b, k as usize)),
            }
        }
        out
    }
}
