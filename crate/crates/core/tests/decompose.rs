mod common;

use std::collections::HashSet;

use common::{chars, naive_layers, naive_sig, random_string};
use dynstr::{ci_decomposition, ci_range, collapse, Collection, Grammar, Mode, RleSeq, Run, Sig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn expand(g: &Grammar, d: &RleSeq) -> Vec<u32> {
    d.iter_sigs().flat_map(|s| g.expand(s)).collect()
}

/// Every signature of `d`, placed at `shift` plus its offset, must be a node
/// of the literal parse tree of `text`.
fn survives(g: &mut Grammar, d: &RleSeq, text: &[u32], shift: u64) -> bool {
    let nodes: HashSet<(Sig, u64)> = naive_layers(g, text).into_iter().flatten().collect();
    let mut off = shift;
    for s in d.iter_sigs() {
        if !nodes.contains(&(s, off)) {
            return false;
        }
        off += g.length(s);
    }
    true
}

#[test]
fn decompositions_spell_the_string_and_collapse_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut c = Collection::with_seed(5);
    for _ in 0..300 {
        let w = random_string(&mut rng, 1..100, 3);
        let h = c.make_string(&w).unwrap();
        let s = c.sig(h).unwrap();
        for mode in [Mode::Full, Mode::LeftCI, Mode::RightCI] {
            let d = ci_decomposition(c.grammar(), s, mode);
            assert_eq!(expand(c.grammar(), &d), w);
            assert_eq!(c.collapse(&d).unwrap(), s);
        }
    }
}

#[test]
fn decompositions_survive_extensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut c = Collection::with_seed(6);
    for _ in 0..300 {
        let x = random_string(&mut rng, 1..40, 2);
        let w = random_string(&mut rng, 1..60, 2);
        let y = random_string(&mut rng, 1..40, 2);
        let h = c.make_string(&w).unwrap();
        let s = c.sig(h).unwrap();
        let g = c.grammar_mut();
        let xwy = [x.clone(), w.clone(), y.clone()].concat();
        let xw = [x.clone(), w.clone()].concat();
        let wy = [w.clone(), y.clone()].concat();
        let full = ci_decomposition(g, s, Mode::Full);
        assert!(survives(g, &full, &xwy, x.len() as u64), "full: {x:?} {w:?} {y:?}");
        let left = ci_decomposition(g, s, Mode::LeftCI);
        assert!(survives(g, &left, &xw, x.len() as u64), "left: {x:?} {w:?}");
        let right = ci_decomposition(g, s, Mode::RightCI);
        assert!(survives(g, &right, &wy, 0), "right: {w:?} {y:?}");
    }
}

#[test]
fn range_decomposition_equals_standalone_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut c = Collection::with_seed(7);
    for _ in 0..300 {
        let x = random_string(&mut rng, 0..30, 3);
        let w = random_string(&mut rng, 1..50, 3);
        let y = random_string(&mut rng, 0..30, 3);
        let hw = c.make_string(&w).unwrap();
        let hxwy = c.make_string(&[x.clone(), w.clone(), y].concat()).unwrap();
        let g = c.grammar();
        let i = x.len() as u64 + 1;
        let j = (x.len() + w.len()) as u64;
        let in_context = ci_range(g, c.sig(hxwy).unwrap(), i, j);
        let alone = ci_decomposition(g, c.sig(hw).unwrap(), Mode::Full);
        assert_eq!(in_context, alone);
    }
}

#[test]
fn run_count_is_bounded_by_depth() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut c = Collection::with_seed(8);
    for _ in 0..300 {
        let sigma = rng.random_range(1..5);
        let w = random_string(&mut rng, 1..300, sigma);
        let h = c.make_string(&w).unwrap();
        let s = c.sig(h).unwrap();
        let depth = u64::from(c.depth(h).unwrap());
        for mode in [Mode::Full, Mode::LeftCI, Mode::RightCI] {
            let d = ci_decomposition(c.grammar(), s, mode);
            assert!(d.len() as u64 <= 2 * depth + 2, "{} runs at depth {depth}", d.len());
        }
    }
}

#[test]
fn concatenated_decompositions_collapse_to_the_concatenation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut c = Collection::with_seed(9);
    for _ in 0..300 {
        let a = random_string(&mut rng, 1..80, 2);
        let b = random_string(&mut rng, 1..80, 2);
        let (ha, hb) = (c.make_string(&a).unwrap(), c.make_string(&b).unwrap());
        let g = c.grammar();
        let d = ci_decomposition(g, c.sig(ha).unwrap(), Mode::RightCI)
            .concat(ci_decomposition(g, c.sig(hb).unwrap(), Mode::LeftCI));
        let s = collapse(c.grammar_mut(), &d, None).unwrap();
        let ab = [a, b].concat();
        assert_eq!(s, naive_sig(c.grammar_mut(), &ab));
    }
}

#[test]
fn collapse_of_plain_characters_is_the_parse() {
    let mut c = Collection::with_seed(10);
    let w = chars("mississippi");
    let g = c.grammar_mut();
    let d = RleSeq::from_sigs(w.iter().map(|&ch| g.intern_terminal(ch)));
    assert_eq!(d.len(), 8, "runs of ss, ss, pp merge");
    let s = collapse(g, &d, None).unwrap();
    assert_eq!(s, naive_sig(g, &w));
}

#[test]
fn split_at_counts_multiplicity() {
    let d = RleSeq::from_iter([Run { sig: 1, count: 3 }, Run { sig: 2, count: 2 }]);
    let (l, r) = d.split_at(4);
    assert_eq!(l.runs(), &[Run { sig: 1, count: 3 }, Run { sig: 2, count: 1 }]);
    assert_eq!(r.runs(), &[Run { sig: 2, count: 1 }]);
    assert_eq!(d.total(), 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ci_range_spells_the_fragment(
        w in proptest::collection::vec(97u32..100, 1..150),
        a in 0usize..150,
        b in 0usize..150,
        seed in 0u64..500,
    ) {
        let (i, j) = (a.min(b) % w.len(), a.max(b) % w.len());
        let (i, j) = (i.min(j), i.max(j));
        let mut c = Collection::with_seed(seed);
        let h = c.make_string(&w).unwrap();
        let s = c.sig(h).unwrap();
        let d = ci_range(c.grammar(), s, i as u64 + 1, j as u64 + 1);
        prop_assert_eq!(expand(c.grammar(), &d), w[i..=j].to_vec());
        let sub = c.collapse(&d).unwrap();
        let direct = naive_sig(c.grammar_mut(), &w[i..=j]);
        prop_assert_eq!(sub, direct);
    }
}
