//! Longest common prefix, character access and lexicographic order.

use std::cmp::Ordering;

use crate::cursor::{At, Cursor};
use crate::grammar::{Char, Grammar, Sig};

/// Length of the longest common prefix of `str(a)` and `str(b)`.
///
/// Walks both uncompressed trees top-down in lockstep; at every level the
/// common prefix of the two layers is skipped one run at a time, and at most
/// one run can be shared before the layers disagree.
pub fn lcp(g: &Grammar, a: Sig, b: Sig) -> u64 {
    if a == b {
        return g.length(a);
    }
    let short = g.length(a).min(g.length(b));
    let mut p = Cursor::new(g, a, At::Root);
    let mut q = Cursor::new(g, b, At::Root);
    while p.level() > q.level() {
        p = p.child(g, 1).expect("descent above level 0");
    }
    while q.level() > p.level() {
        q = q.child(g, 1).expect("descent above level 0");
    }
    loop {
        if p.sig() == q.sig() {
            let k = p.rext(g).min(q.rext(g)) + 1;
            match (p.rskip(g, k), q.rskip(g, k)) {
                (Some(x), Some(y)) => {
                    p = x;
                    q = y;
                }
                _ => return short,
            }
            debug_assert_ne!(p.sig(), q.sig(), "a shared run was not skipped whole");
        }
        if p.level() == 0 {
            return p.offset();
        }
        p = p.child(g, 1).expect("internal node");
        q = q.child(g, 1).expect("internal node");
    }
}

/// The `i`-th character of `str(s)` (1-based).
///
/// # Panics
/// If `i` is out of range.
pub fn char_at(g: &Grammar, s: Sig, i: u64) -> Char {
    let leaf = Cursor::new(g, s, At::LeafAt(i));
    g.terminal_char(leaf.sig()).expect("leaf is a terminal")
}

/// Lexicographic order of `str(a)` and `str(b)`.
pub fn compare(g: &Grammar, a: Sig, b: Sig) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let l = lcp(g, a, b);
    let (la, lb) = (g.length(a), g.length(b));
    if l == la.min(lb) {
        return la.cmp(&lb);
    }
    char_at(g, a, l + 1).cmp(&char_at(g, b, l + 1))
}

/// True if `str(p)` is a prefix of `str(w)`.
pub fn is_prefix(g: &Grammar, p: Sig, w: Sig) -> bool {
    lcp(g, p, w) == g.length(p)
}
