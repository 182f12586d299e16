//! Persistent cursors over parse trees that are never materialized.
//!
//! A [`Stack`] points at a node of the compressed tree `T(s)` (unary chains
//! dissolved). Ancestors reached from the entry below by following only
//! leftmost (resp. rightmost) children are not stored; a parent step
//! recovers them with one `first_last` query. Stacks share tails, so every
//! move returns a fresh value and leaves the original untouched.
//!
//! A [`Cursor`] adds a level and thereby addresses the uncompressed tree
//! `T̄(s)`, where every level is a full layer of the string. The inner stack
//! points at the highest compressed node whose level does not exceed the
//! cursor's level.

use std::sync::Arc;

use crate::grammar::{Grammar, Kind, Side, Sig};

/// How a stack entry hangs below the entry underneath it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    /// The root.
    Top,
    /// Reached by leftmost-child steps.
    L,
    /// Reached by rightmost-child steps.
    R,
    /// The `j`-th child of a power, strictly between first and last.
    Idx(u64),
}

/// One stack entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    /// Signature of the node.
    pub sig: Sig,
    /// Relation to the entry below.
    pub tag: Tag,
    /// Number of characters preceding the node in the root string.
    pub offset: u64,
}

#[derive(Debug)]
struct Link {
    entry: Entry,
    below: Option<Arc<Link>>,
}

/// A persistent pointer into the compressed tree `T(s)`.
#[derive(Debug, Clone)]
pub struct Stack {
    head: Arc<Link>,
}

impl Stack {
    /// The root of `T(s)`.
    pub fn root(s: Sig) -> Stack {
        Stack {
            head: Arc::new(Link {
                entry: Entry {
                    sig: s,
                    tag: Tag::Top,
                    offset: 0,
                },
                below: None,
            }),
        }
    }

    /// The pointed node.
    #[inline]
    pub fn top(&self) -> Entry {
        self.head.entry
    }

    fn pop(&self) -> Option<Stack> {
        self.head.below.clone().map(|head| Stack { head })
    }

    fn push(&self, entry: Entry) -> Stack {
        Stack {
            head: Arc::new(Link {
                entry,
                below: Some(self.head.clone()),
            }),
        }
    }

    // Push, dropping the current top if it has the same spine tag.
    fn push_collapse(&self, entry: Entry) -> Stack {
        match (self.top().tag, entry.tag) {
            (Tag::L, Tag::L) | (Tag::R, Tag::R) => self.pop().expect("tagged entry above root").push(entry),
            _ => self.push(entry),
        }
    }

    /// The `k`-th child (1-based) of the pointed node.
    pub fn child(&self, g: &Grammar, k: u64) -> Stack {
        let u = self.top();
        let (c, shift, deg) = match g.kind(u.sig) {
            Kind::Pair(l, r) => {
                if k == 1 {
                    (l, 0, 2)
                } else {
                    (r, g.length(l), 2)
                }
            }
            Kind::Power(b, m) => (b, (k - 1) * g.length(b), m),
            Kind::Terminal(_) => panic!("terminal has no children"),
        };
        let tag = if k == 1 {
            Tag::L
        } else if k == deg {
            Tag::R
        } else {
            Tag::Idx(k)
        };
        self.push_collapse(Entry {
            sig: c,
            tag,
            offset: u.offset + shift,
        })
    }

    /// The parent in `T(s)`, `None` at the root.
    pub fn parent(&self, g: &Grammar) -> Option<Stack> {
        let v = self.top();
        let side = match v.tag {
            Tag::Top => return None,
            Tag::Idx(_) => return self.pop(),
            Tag::L => Side::Left,
            Tag::R => Side::Right,
        };
        let below = self.pop()?;
        let u = below.top();
        let p = g.first_last(u.sig, g.level(v.sig) + 1, side);
        if p == u.sig {
            return Some(below);
        }
        let offset = match side {
            Side::Left => v.offset,
            Side::Right => u.offset + g.length(u.sig) - g.length(p),
        };
        Some(below.push_collapse(Entry {
            sig: p,
            tag: v.tag,
            offset,
        }))
    }

    /// Child index of the pointed node below its parent `parent_sig`.
    pub fn index_in(&self, g: &Grammar, parent_sig: Sig) -> u64 {
        match self.top().tag {
            Tag::Top => 0,
            Tag::L => 1,
            Tag::R => g.degree(parent_sig),
            Tag::Idx(j) => j,
        }
    }

    // Highest node on the `side` spine of the top with level <= l.
    fn descend(&self, g: &Grammar, l: u32, side: Side) -> Stack {
        let c = self.top();
        if g.level(c.sig) <= l {
            return self.clone();
        }
        let y = g.first_last(c.sig, l, side);
        let x = if g.level(y) == l {
            y
        } else {
            g.end_child(y, side).expect("nonterminal above level")
        };
        let (tag, offset) = match side {
            Side::Left => (Tag::L, c.offset),
            Side::Right => (Tag::R, c.offset + g.length(c.sig) - g.length(x)),
        };
        self.push_collapse(Entry { sig: x, tag, offset })
    }

    /// The neighbour at uncompressed level `l` (the pointed node must be the
    /// highest compressed node of level at most `l`).
    pub fn step(&self, g: &Grammar, l: u32, side: Side) -> Option<Stack> {
        // `base` is the lowest stored node that is not the outermost child
        // of its parent on `side`.
        let outer = match side {
            Side::Right => Tag::R,
            Side::Left => Tag::L,
        };
        let v = self.top();
        let base = match v.tag {
            Tag::Top => return None,
            t if t == outer => {
                let below = self.pop()?;
                if below.top().tag == Tag::Top {
                    return None;
                }
                debug_assert_ne!(below.top().tag, outer);
                below
            }
            _ => self.clone(),
        };
        let parent = base.parent(g)?;
        let j = base.index_in(g, parent.top().sig);
        let next = match side {
            Side::Right => j + 1,
            Side::Left => j - 1,
        };
        let inward = match side {
            Side::Right => Side::Left,
            Side::Left => Side::Right,
        };
        Some(parent.child(g, next).descend(g, l, inward))
    }
}

/// Where to place a fresh cursor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum At {
    /// Root of `T̄(s)`.
    Root,
    /// Leftmost leaf.
    Begin,
    /// Rightmost leaf.
    End,
    /// Leaf of the given 1-based position.
    LeafAt(u64),
}

/// Snapshot of a cursor's attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inspect {
    /// Signature of the pointed node.
    pub sig: Sig,
    /// Level in `T̄(s)`.
    pub level: u32,
    /// 1-based inclusive character range.
    pub repr: (u64, u64),
    /// Index among siblings (0 at the root).
    pub index: u64,
    /// Number of children.
    pub degree: u64,
    /// Equal-signature siblings to the right (excluding the node).
    pub rext: u64,
    /// Equal-signature siblings to the left (excluding the node).
    pub lext: u64,
}

/// A persistent pointer into the uncompressed tree `T̄(s)`.
#[derive(Debug, Clone)]
pub struct Cursor {
    root: Sig,
    stack: Stack,
    level: u32,
}

impl Cursor {
    /// Creates a cursor in `T̄(s)`.
    ///
    /// # Panics
    /// If a `LeafAt` position is outside `1..=length(s)`.
    pub fn new(g: &Grammar, s: Sig, at: At) -> Cursor {
        let root = Stack::root(s);
        let (stack, level) = match at {
            At::Root => (root, g.level(s)),
            At::Begin => (root.descend(g, 0, Side::Left), 0),
            At::End => (root.descend(g, 0, Side::Right), 0),
            At::LeafAt(pos) => {
                assert!(
                    (1..=g.length(s)).contains(&pos),
                    "leaf position {pos} out of range"
                );
                let mut st = root;
                loop {
                    let u = st.top();
                    let k = match g.kind(u.sig) {
                        Kind::Terminal(_) => break,
                        Kind::Pair(l, _) => {
                            if pos - u.offset <= g.length(l) {
                                1
                            } else {
                                2
                            }
                        }
                        Kind::Power(b, _) => (pos - u.offset - 1) / g.length(b) + 1,
                    };
                    st = st.child(g, k);
                }
                (st, 0)
            }
        };
        Cursor {
            root: s,
            stack,
            level,
        }
    }

    /// Root signature of the tree.
    pub fn root(&self) -> Sig {
        self.root
    }

    /// Signature of the pointed node.
    #[inline]
    pub fn sig(&self) -> Sig {
        self.stack.top().sig
    }

    /// Level of the pointed node.
    #[inline]
    pub fn level(&self) -> u32 {
        self.level
    }

    /// The inner compressed-tree pointer.
    pub fn stack(&self) -> &Stack {
        &self.stack
    }

    /// 1-based inclusive character range.
    pub fn repr(&self, g: &Grammar) -> (u64, u64) {
        let e = self.stack.top();
        (e.offset + 1, e.offset + g.length(e.sig))
    }

    /// Number of characters before the node.
    #[inline]
    pub fn offset(&self) -> u64 {
        self.stack.top().offset
    }

    /// True if both cursors point at the same node of the same tree level.
    pub fn same_node(&self, other: &Cursor) -> bool {
        self.level == other.level && self.offset() == other.offset()
    }

    fn at_root(&self, g: &Grammar) -> bool {
        self.level == g.level(self.root)
    }

    // Compressed parent when it sits directly above this level.
    fn real_parent(&self, g: &Grammar) -> Option<Stack> {
        if self.at_root(g) {
            return None;
        }
        let p = self.stack.parent(g).expect("non-root has a parent");
        (g.level(p.top().sig) == self.level + 1).then_some(p)
    }

    /// Children count in `T̄(s)`.
    pub fn degree(&self, g: &Grammar) -> u64 {
        if g.level(self.sig()) == self.level {
            g.degree(self.sig())
        } else {
            1
        }
    }

    /// Index among siblings; 0 at the root.
    pub fn index(&self, g: &Grammar) -> u64 {
        if self.at_root(g) {
            return 0;
        }
        match self.real_parent(g) {
            Some(p) => self.stack.index_in(g, p.top().sig),
            None => 1,
        }
    }

    fn sibling_run(&self, g: &Grammar) -> Option<(Stack, u64)> {
        if self.level % 2 == 1 {
            return None;
        }
        let p = self.real_parent(g)?;
        let j = self.stack.index_in(g, p.top().sig);
        Some((p, j))
    }

    /// Equal-signature siblings to the right, excluding the node.
    pub fn rext(&self, g: &Grammar) -> u64 {
        self.sibling_run(g)
            .map_or(0, |(p, j)| g.degree(p.top().sig) - j)
    }

    /// Equal-signature siblings to the left, excluding the node.
    pub fn lext(&self, g: &Grammar) -> u64 {
        self.sibling_run(g).map_or(0, |(_, j)| j - 1)
    }

    /// All attributes at once.
    pub fn inspect(&self, g: &Grammar) -> Inspect {
        Inspect {
            sig: self.sig(),
            level: self.level,
            repr: self.repr(g),
            index: self.index(g),
            degree: self.degree(g),
            rext: self.rext(g),
            lext: self.lext(g),
        }
    }

    /// Parent in `T̄(s)`.
    pub fn parent(&self, g: &Grammar) -> Option<Cursor> {
        if self.at_root(g) {
            return None;
        }
        let stack = match self.stack.parent(g) {
            Some(p) if g.level(p.top().sig) == self.level + 1 => p,
            _ => self.stack.clone(),
        };
        Some(Cursor {
            root: self.root,
            stack,
            level: self.level + 1,
        })
    }

    /// The `k`-th child (1-based), `None` if out of range.
    pub fn child(&self, g: &Grammar, k: u64) -> Option<Cursor> {
        if k == 0 || k > self.degree(g) {
            return None;
        }
        let stack = if g.level(self.sig()) == self.level {
            self.stack.child(g, k)
        } else {
            self.stack.clone()
        };
        Some(Cursor {
            root: self.root,
            stack,
            level: self.level - 1,
        })
    }

    fn with_stack(&self, stack: Stack) -> Cursor {
        Cursor {
            root: self.root,
            stack,
            level: self.level,
        }
    }

    /// Next node to the right on the same level.
    pub fn right(&self, g: &Grammar) -> Option<Cursor> {
        self.stack
            .step(g, self.level, Side::Right)
            .map(|s| self.with_stack(s))
    }

    /// Next node to the left on the same level.
    pub fn left(&self, g: &Grammar) -> Option<Cursor> {
        self.stack
            .step(g, self.level, Side::Left)
            .map(|s| self.with_stack(s))
    }

    /// The `k`-th node to the right; constant work regardless of `k` as long
    /// as it stays within one run of equal siblings or just past it.
    pub fn rskip(&self, g: &Grammar, k: u64) -> Option<Cursor> {
        if k == 0 {
            return Some(self.clone());
        }
        let Some((p, j)) = self.sibling_run(g) else {
            return if k == 1 { self.right(g) } else { None };
        };
        let rext = g.degree(p.top().sig) - j;
        if k <= rext {
            Some(self.with_stack(p.child(g, j + k)))
        } else if k == rext + 1 {
            self.with_stack(p.child(g, j + rext)).right(g)
        } else {
            None
        }
    }

    /// Mirror image of [`Cursor::rskip`].
    pub fn lskip(&self, g: &Grammar, k: u64) -> Option<Cursor> {
        if k == 0 {
            return Some(self.clone());
        }
        let Some((p, j)) = self.sibling_run(g) else {
            return if k == 1 { self.left(g) } else { None };
        };
        let lext = j - 1;
        if k <= lext {
            Some(self.with_stack(p.child(g, j - k)))
        } else if k == lext + 1 {
            self.with_stack(p.child(g, j - lext)).left(g)
        } else {
            None
        }
    }
}
