mod common;

use std::collections::{BTreeSet, HashSet};

use common::{chars, naive_occurrences, random_string, tree_sigs};
use dynstr::match_index::{anchor_of, anchored_occurrences, potential_anchors, Anchor, Anchored};
use dynstr::{Collection, Handle, Kind, MatchIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn naive_find(c: &Collection, active: &BTreeSet<Handle>, p: &[u32]) -> BTreeSet<(Handle, u64)> {
    active
        .iter()
        .flat_map(|&h| {
            naive_occurrences(&c.string(h).unwrap(), p)
                .into_iter()
                .map(move |i| (h, i))
        })
        .collect()
}

fn found(m: &mut MatchIndex, c: &mut Collection, p: &[u32]) -> BTreeSet<(Handle, u64)> {
    let v = m.find(c, p, None).unwrap();
    let set: BTreeSet<_> = v.iter().copied().collect();
    assert_eq!(set.len(), v.len(), "duplicate report for {p:?}");
    set
}

#[test]
fn banana() {
    let mut c = Collection::with_seed(0);
    let h = c.make_str("banana").unwrap();
    let mut m = MatchIndex::new();
    m.activate(&mut c, h).unwrap();
    let set = |v: &[(Handle, u64)]| v.iter().copied().collect::<BTreeSet<_>>();
    assert_eq!(found(&mut m, &mut c, &chars("an")), set(&[(h, 2), (h, 4)]));
    assert_eq!(found(&mut m, &mut c, &chars("nana")), set(&[(h, 3)]));
    assert_eq!(found(&mut m, &mut c, &chars("a")), set(&[(h, 2), (h, 4), (h, 6)]));
    assert!(found(&mut m, &mut c, &chars("q")).is_empty());
    assert!(found(&mut m, &mut c, &chars("bananas")).is_empty());
    let s = c.sig(h).unwrap();
    assert_eq!(m.entry_count(), tree_sigs(c.grammar(), s).len());
    m.deactivate(&c, h).unwrap();
    assert!(m.is_clear());
}

#[test]
fn anchor_arithmetic() {
    let mut c = Collection::with_seed(0);
    let g = c.grammar_mut();
    let (a, b) = (g.intern_terminal(97), g.intern_terminal(98));
    // Under seed 0 the random bits admit the pair `a b`.
    let ab = g.intern_pair(a, b).unwrap();
    let p5 = g.intern_power(ab, 5).unwrap();
    assert_eq!(anchor_of(g, p5), Some(Anchor { left: 2, right: 8 }));
    assert_eq!(anchor_of(g, a), None);
    // "baba" split as "b" | "aba" inside "ababababab".
    assert_eq!(
        anchored_occurrences(g, p5, 1, 3),
        Anchored { count: 3, first: 2, stride: 2 }
    );
    let text = chars("ababababab");
    assert_eq!(naive_occurrences(&text, &chars("baba")), vec![2, 4, 6]);
    assert_eq!(anchored_occurrences(g, p5, 3, 1).count, 0);
    assert_eq!(anchored_occurrences(g, ab, 1, 1), Anchored { count: 1, first: 1, stride: 0 });
    // A single character ending at a boundary: the last copy's end belongs
    // to an ancestor, so only k - 1 boundaries count.
    assert_eq!(anchored_occurrences(g, p5, 1, 0).count, 4);
}

#[test]
fn potential_anchors_cover_every_hook() {
    // For every occurrence of every short pattern, the hook's anchor must
    // split the pattern at one of the potential anchor positions.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..40 {
        let mut c = Collection::with_seed(seed);
        let w = random_string(&mut rng, 2..60, 2);
        let h = c.make_string(&w).unwrap();
        let root = c.sig(h).unwrap();
        for len in 2..=w.len().min(10) {
            for start in 0..=w.len() - len {
                let p = &w[start..start + len];
                let ps = c.intern_str(p).unwrap();
                let g = c.grammar();
                // Hook: descend while a single child contains the window.
                let (mut s, mut off) = (root, 0u64);
                let (lo, hi) = (start as u64, (start + len) as u64);
                let split = loop {
                    match g.kind(s) {
                        Kind::Pair(l, r) => {
                            let m = off + g.length(l);
                            if hi <= m {
                                s = l;
                            } else if lo >= m {
                                s = r;
                                off = m;
                            } else {
                                break m - lo;
                            }
                        }
                        Kind::Power(b, _) => {
                            let lb = g.length(b);
                            let i = (lo - off) / lb;
                            let m = off + (i + 1) * lb;
                            if hi <= m {
                                s = b;
                                off += i * lb;
                            } else {
                                break m - lo;
                            }
                        }
                        Kind::Terminal(_) => unreachable!("window longer than one character"),
                    }
                };
                let cands = potential_anchors(g, ps);
                assert!(cands.contains(&split), "{p:?} in {w:?}: split {split} not in {cands:?}");
            }
        }
    }
}

#[test]
fn fuzz_with_activation_churn() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut c = Collection::with_seed(3);
    let mut m = MatchIndex::new();
    let mut active = BTreeSet::new();
    let mut handles: Vec<Handle> = Vec::new();
    for step in 0..600 {
        match rng.random_range(0..6) {
            0 | 1 => {
                let w = if rng.random_bool(0.3) {
                    chars(&"ab".repeat(rng.random_range(1..30)))
                } else {
                    random_string(&mut rng, 1..60, 3)
                };
                handles.push(c.make_string(&w).unwrap());
            }
            2 if !handles.is_empty() => {
                let a = handles[rng.random_range(0..handles.len())];
                let b = handles[rng.random_range(0..handles.len())];
                if c.length(a).unwrap() + c.length(b).unwrap() < 400 {
                    handles.push(c.concat(a, b).unwrap());
                }
            }
            3 if !handles.is_empty() => {
                let a = handles[rng.random_range(0..handles.len())];
                let n = c.length(a).unwrap();
                if n >= 2 {
                    let (l, r) = c.split(a, rng.random_range(1..n)).unwrap();
                    handles.extend([l, r]);
                }
            }
            4 if !handles.is_empty() => {
                let h = handles[rng.random_range(0..handles.len())];
                m.activate(&mut c, h).unwrap();
                active.insert(h);
            }
            _ if !active.is_empty() => {
                let h = *active.iter().nth(rng.random_range(0..active.len())).unwrap();
                m.deactivate(&c, h).unwrap();
                active.remove(&h);
            }
            _ => {}
        }
        // The index holds exactly the distinct signatures of active trees.
        let distinct: HashSet<_> = active
            .iter()
            .flat_map(|&h| tree_sigs(c.grammar(), c.sig(h).unwrap()))
            .collect();
        assert_eq!(m.entry_count(), distinct.len(), "step {step}");
        if active.is_empty() {
            continue;
        }
        // Patterns: random substrings of active strings (periodic ones
        // included by construction), plus random strings.
        for _ in 0..3 {
            let h = *active.iter().nth(rng.random_range(0..active.len())).unwrap();
            let w = c.string(h).unwrap();
            let p = if rng.random_bool(0.8) {
                let len = rng.random_range(1..=w.len().min(64));
                let i = rng.random_range(0..=w.len() - len);
                w[i..i + len].to_vec()
            } else {
                random_string(&mut rng, 1..5, 3)
            };
            assert_eq!(found(&mut m, &mut c, &p), naive_find(&c, &active, &p), "pattern {p:?}");
        }
    }
    for h in active {
        m.deactivate(&c, h).unwrap();
    }
    assert!(m.is_clear());
}

#[test]
fn limit_truncates() {
    let mut c = Collection::with_seed(5);
    let h = c.make_str(&"ab".repeat(50)).unwrap();
    let mut m = MatchIndex::new();
    m.activate(&mut c, h).unwrap();
    assert_eq!(m.find(&mut c, &chars("aba"), None).unwrap().len(), 49);
    assert_eq!(m.find(&mut c, &chars("aba"), Some(7)).unwrap().len(), 7);
    assert_eq!(m.find(&mut c, &chars("b"), Some(3)).unwrap().len(), 3);
}

#[test]
fn shared_entries_survive_partial_deactivation() {
    let mut c = Collection::with_seed(6);
    let x = c.make_str("abcabcabd").unwrap();
    let y = c.make_str("zzabcabcabdzz").unwrap();
    let mut m = MatchIndex::new();
    m.activate(&mut c, x).unwrap();
    m.activate(&mut c, y).unwrap();
    m.activate(&mut c, y).unwrap();
    m.deactivate(&c, x).unwrap();
    let got = found(&mut m, &mut c, &chars("abd"));
    assert_eq!(got, [(y, 9)].into_iter().collect());
    let distinct = tree_sigs(c.grammar(), c.sig(y).unwrap());
    assert_eq!(m.entry_count(), distinct.len());
}
