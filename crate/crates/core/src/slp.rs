//! Straight-line programs: a small text format for grammar-compressed
//! strings, materialised in a [`Collection`] with `O(depth)` work per rule.
//!
//! ```text
//! # comment
//! #start F5
//! A -> 'a'
//! B -> 'b'
//! F2 -> B A        # two or more symbols are concatenated
//! P -> F2 ^ 1000   # a power of a single symbol
//! ```
//!
//! Rules may appear in any order; every symbol must be defined and the
//! rules must be acyclic. Without `#start`, the last rule is the start.

use rustc_hash::FxHashMap;

use crate::collection::{Collection, Handle};
use crate::error::{Error, Failure, Result};
use crate::grammar::{Char, Sig};

/// Right-hand side of a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    /// A single character.
    Char(Char),
    /// Concatenation of two or more symbols.
    Seq(Vec<String>),
    /// `symbol ^ k` with `k >= 1`.
    Power(String, u64),
}

/// How right-hand sides with more than two symbols are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fold {
    /// `((a b) c) d`.
    #[default]
    Left,
    /// `(a b) (c d)`.
    Balanced,
}

// Concatenates `items` in the requested shape.
fn fold<T: Copy, E>(items: &[T], how: Fold, cat: &mut impl FnMut(T, T) -> Result<T, E>) -> Result<T, E> {
    match how {
        Fold::Left => {
            let mut acc = items[0];
            for &x in &items[1..] {
                acc = cat(acc, x)?;
            }
            Ok(acc)
        }
        Fold::Balanced => {
            if items.len() == 1 {
                return Ok(items[0]);
            }
            let (l, r) = items.split_at(items.len() / 2);
            let l = fold(l, how, cat)?;
            let r = fold(r, how, cat)?;
            cat(l, r)
        }
    }
}

/// A parsed program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slp {
    rules: Vec<(String, Rhs)>,
    start: String,
}

fn invalid(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("line {line}: {msg}"))
}

fn is_symbol(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_alphanumeric() || c == '_')
}

impl Slp {
    /// Parses the text format.
    ///
    /// # Errors
    /// `Invalid` naming the offending line.
    pub fn parse(text: &str) -> Result<Slp> {
        let mut rules = Vec::new();
        let mut start = None;
        let mut seen = FxHashMap::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix("#start") {
                let name = rest.trim();
                if !is_symbol(name) {
                    return Err(invalid(line_no, "bad start symbol"));
                }
                start = Some(name.to_string());
                continue;
            }
            let line = match line.find('#') {
                // A '#' inside a character literal is not a comment.
                Some(p) if !line[..p].ends_with('\'') => line[..p].trim(),
                _ => line,
            };
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| invalid(line_no, "expected `NAME -> ...`"))?;
            let lhs = lhs.trim();
            if !is_symbol(lhs) {
                return Err(invalid(line_no, format!("bad symbol `{lhs}`")));
            }
            if seen.insert(lhs.to_string(), ()).is_some() {
                return Err(invalid(line_no, format!("`{lhs}` defined twice")));
            }
            let rhs = rhs.trim();
            let parsed = if let Some(body) = rhs.strip_prefix('\'') {
                let body = body
                    .strip_suffix('\'')
                    .ok_or_else(|| invalid(line_no, "unterminated character"))?;
                let mut cs = body.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Rhs::Char(Char::from(c)),
                    _ => return Err(invalid(line_no, "expected exactly one character")),
                }
            } else if let Some((base, k)) = rhs.split_once('^') {
                let base = base.trim();
                let k: u64 = k
                    .trim()
                    .parse()
                    .map_err(|_| invalid(line_no, "bad exponent"))?;
                if !is_symbol(base) || k == 0 {
                    return Err(invalid(line_no, "expected `SYMBOL ^ k` with k >= 1"));
                }
                Rhs::Power(base.to_string(), k)
            } else {
                let syms: Vec<String> = rhs.split_whitespace().map(str::to_string).collect();
                if syms.is_empty() || !syms.iter().all(|s| is_symbol(s)) {
                    return Err(invalid(line_no, "expected symbols"));
                }
                Rhs::Seq(syms)
            };
            rules.push((lhs.to_string(), parsed));
        }
        let start = match start {
            Some(s) => s,
            None => rules
                .last()
                .map(|(n, _)| n.clone())
                .ok_or_else(|| Error::Invalid("no rules".into()))?,
        };
        if !seen.contains_key(&start) {
            return Err(Error::Invalid(format!("start symbol `{start}` undefined")));
        }
        Ok(Slp { rules, start })
    }

    /// The start symbol.
    pub fn start(&self) -> &str {
        &self.start
    }

    /// The rules in file order.
    pub fn rules(&self) -> &[(String, Rhs)] {
        &self.rules
    }

    // Rules reachable from the start, dependencies first.
    fn evaluation_order(&self) -> Result<Vec<usize>> {
        let index: FxHashMap<&str, usize> = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.as_str(), i))
            .collect();
        // 0 = unvisited, 1 = on the current path, 2 = finished. Iterative
        // to keep deep programs off the call stack.
        let mut state = vec![0u8; self.rules.len()];
        let mut order = Vec::new();
        let mut stack = vec![(index[self.start.as_str()], false)];
        while let Some((i, expanded)) = stack.pop() {
            if expanded {
                state[i] = 2;
                order.push(i);
                continue;
            }
            if state[i] == 2 {
                continue;
            }
            state[i] = 1;
            stack.push((i, true));
            let deps: Vec<&str> = match &self.rules[i].1 {
                Rhs::Char(_) => Vec::new(),
                Rhs::Seq(s) => s.iter().map(String::as_str).collect(),
                Rhs::Power(b, _) => vec![b.as_str()],
            };
            for d in deps {
                let &j = index
                    .get(d)
                    .ok_or_else(|| Error::Invalid(format!("`{d}` is undefined")))?;
                match state[j] {
                    0 => stack.push((j, false)),
                    1 => return Err(Error::Invalid(format!("`{d}` is defined cyclically"))),
                    _ => {}
                }
            }
        }
        Ok(order)
    }

    /// Builds the signature of every symbol reachable from the start.
    ///
    /// # Errors
    /// `Invalid` for undefined symbols or cycles; `Failure` from the
    /// grammar.
    pub fn signatures(&self, coll: &mut Collection, how: Fold) -> Result<FxHashMap<String, Sig>> {
        let mut done: FxHashMap<String, Sig> = FxHashMap::default();
        for i in self.evaluation_order()? {
            let (name, rhs) = &self.rules[i];
            let sig = match rhs {
                Rhs::Char(c) => coll.grammar_mut().intern_terminal(*c),
                Rhs::Seq(s) => {
                    let items: Vec<Sig> = s.iter().map(|d| done[d]).collect();
                    fold(&items, how, &mut |a, b| coll.concat_sigs(a, b))?
                }
                Rhs::Power(b, k) => power(coll, done[b], *k)?,
            };
            done.insert(name.clone(), sig);
        }
        Ok(done)
    }

    /// Signature of the start symbol.
    pub fn signature(&self, coll: &mut Collection, how: Fold) -> Result<Sig> {
        Ok(self.signatures(coll, how)?[&self.start])
    }

    /// Registers the start symbol's string as a handle, building every
    /// reachable symbol through logged collection updates (so a restart
    /// can replay them).
    pub fn materialize(&self, coll: &mut Collection, how: Fold) -> Result<Handle> {
        let mut done: FxHashMap<String, Handle> = FxHashMap::default();
        for i in self.evaluation_order()? {
            let (name, rhs) = &self.rules[i];
            let h = match rhs {
                Rhs::Char(c) => coll.make_string(&[*c])?,
                Rhs::Seq(s) => {
                    let items: Vec<Handle> = s.iter().map(|d| done[d]).collect();
                    fold(&items, how, &mut |a, b| coll.concat(a, b))?
                }
                Rhs::Power(b, k) => {
                    let mut result: Option<Handle> = None;
                    let mut sq = done[b];
                    let mut k = *k;
                    loop {
                        if k & 1 == 1 {
                            result = Some(match result {
                                None => sq,
                                Some(r) => coll.concat(r, sq)?,
                            });
                        }
                        k >>= 1;
                        if k == 0 {
                            break;
                        }
                        sq = coll.concat(sq, sq)?;
                    }
                    result.expect("k >= 1")
                }
            };
            done.insert(name.clone(), h);
        }
        Ok(done[&self.start])
    }
}

/// Signature of `str(b)^k` by repeated squaring.
///
/// # Panics
/// If `k == 0`.
pub fn power(coll: &mut Collection, b: Sig, k: u64) -> Result<Sig, Failure> {
    assert!(k >= 1, "empty power");
    let mut result: Option<Sig> = None;
    let mut sq = b;
    let mut k = k;
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => sq,
                Some(r) => coll.concat_sigs(r, sq)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        sq = coll.concat_sigs(sq, sq)?;
    }
    Ok(result.expect("k >= 1"))
}
