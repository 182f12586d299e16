mod common;

use common::{chars, naive_layers, random_string};
use dynstr::{At, Collection, Cursor, Grammar, Side, Sig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Layers = Vec<Vec<(Sig, u64)>>;

fn build(seed: u64, w: &[u32]) -> (Collection, Sig, Layers) {
    let mut c = Collection::with_seed(seed);
    let h = c.make_string(w).unwrap();
    let s = c.sig(h).unwrap();
    let layers = naive_layers(c.grammar_mut(), w);
    (c, s, layers)
}

fn locate(g: &Grammar, s: Sig, level: usize, offset: u64) -> Cursor {
    let mut cur = Cursor::new(g, s, At::LeafAt(offset + 1));
    for _ in 0..level {
        cur = cur.parent(g).unwrap();
    }
    cur
}

// Children of `layers[l][i]`: indices into `layers[l-1]`.
fn children(g: &Grammar, layers: &Layers, l: usize, i: usize) -> Vec<usize> {
    let (s, off) = layers[l][i];
    let end = off + g.length(s);
    (0..layers[l - 1].len())
        .filter(|&j| (off..end).contains(&layers[l - 1][j].1))
        .collect()
}

fn parent_index(layers: &Layers, l: usize, off: u64) -> usize {
    layers[l + 1].partition_point(|&(_, o)| o <= off) - 1
}

fn check_all_nodes(seed: u64, w: &[u32]) {
    let (c, s, layers) = build(seed, w);
    let g = c.grammar();
    let top = layers.len() - 1;
    assert_eq!(g.level(s) as usize, top, "root level equals the number of rounds");
    for l in 0..=top {
        for (i, &(sig, off)) in layers[l].iter().enumerate() {
            let cur = locate(g, s, l, off);
            assert_eq!(cur.sig(), sig);
            assert_eq!(cur.offset(), off);
            assert_eq!(cur.level() as usize, l);
            assert_eq!(cur.repr(g), (off + 1, off + g.length(sig)));

            let right = cur.right(g).map(|x| (x.sig(), x.offset()));
            assert_eq!(right, layers[l].get(i + 1).copied());
            let left = cur.left(g).map(|x| (x.sig(), x.offset()));
            assert_eq!(left, i.checked_sub(1).map(|j| layers[l][j]));

            if l == top {
                assert!(cur.parent(g).is_none());
                assert_eq!(cur.index(g), 0);
                assert_eq!(cur.rext(g), 0);
            } else {
                let pi = parent_index(&layers, l, off);
                let p = cur.parent(g).unwrap();
                assert_eq!((p.sig(), p.offset()), layers[l + 1][pi]);
                let sib = children(g, &layers, l + 1, pi);
                let pos = sib.iter().position(|&j| j == i).unwrap();
                assert_eq!(cur.index(g), pos as u64 + 1);
                let rext = sib[pos + 1..]
                    .iter()
                    .take_while(|&&j| layers[l][j].0 == sig)
                    .count() as u64;
                let lext = sib[..pos]
                    .iter()
                    .rev()
                    .take_while(|&&j| layers[l][j].0 == sig)
                    .count() as u64;
                assert_eq!(cur.rext(g), rext);
                assert_eq!(cur.lext(g), lext);
                for k in 0..=rext + 2 {
                    let got = cur.rskip(g, k).map(|x| (x.sig(), x.offset()));
                    if k <= rext + 1 {
                        assert_eq!(got, layers[l].get(i + k as usize).copied(), "rskip {k}");
                    } else {
                        assert_eq!(got, None);
                    }
                }
                for k in 0..=lext + 1 {
                    let got = cur.lskip(g, k).map(|x| (x.sig(), x.offset()));
                    let want = (i as u64).checked_sub(k).map(|j| layers[l][j as usize]);
                    assert_eq!(got, want, "lskip {k}");
                }
                assert!(
                    cur.same_node(&p.child(g, pos as u64 + 1).unwrap()),
                    "child of parent is the node"
                );
            }
            if l > 0 {
                let kids = children(g, &layers, l, i);
                assert_eq!(cur.degree(g), kids.len() as u64);
                for (k, &j) in kids.iter().enumerate() {
                    let ch = cur.child(g, k as u64 + 1).unwrap();
                    assert_eq!((ch.sig(), ch.offset()), layers[l - 1][j]);
                }
                assert!(cur.child(g, kids.len() as u64 + 1).is_none());
            }
        }
    }
    let begin = Cursor::new(g, s, At::Begin);
    assert_eq!((begin.sig(), begin.offset()), layers[0][0]);
    let end = Cursor::new(g, s, At::End);
    assert_eq!((end.sig(), end.offset()), *layers[0].last().unwrap());
    let root = Cursor::new(g, s, At::Root);
    assert_eq!(root.level() as usize, top);
}

#[test]
fn navigation_matches_literal_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..60 {
        let sigma = rng.random_range(1..4);
        let w = random_string(&mut rng, 1..90, sigma);
        check_all_nodes(seed, &w);
    }
}

#[test]
fn navigation_on_periodic_strings() {
    for (seed, w) in [(1, "ab".repeat(40)), (2, "a".repeat(77)), (3, "abaab".repeat(13))] {
        check_all_nodes(seed, &chars(&w));
    }
}

#[test]
fn first_last_match_tree_boundaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..80 {
        let w = random_string(&mut rng, 1..150, 3);
        let (c, s, layers) = build(seed, &w);
        let g = c.grammar();
        // The lowest spine node whose own level is at least `l`.
        for l in 0..layers.len() {
            let lowest = |pick: fn(&Vec<(Sig, u64)>) -> Sig| {
                layers[l..]
                    .iter()
                    .map(pick)
                    .find(|&x| g.level(x) as usize >= l)
                    .unwrap()
            };
            assert_eq!(g.first_last(s, l as u32, Side::Left), lowest(|x| x[0].0));
            assert_eq!(
                g.first_last(s, l as u32, Side::Right),
                lowest(|x| x.last().unwrap().0)
            );
        }
    }
}

#[test]
fn inspect_banana() {
    let (c, s, _) = build(0, &chars("banana"));
    let g = c.grammar();
    let leaf = Cursor::new(g, s, At::LeafAt(2));
    let info = leaf.inspect(g);
    assert_eq!(info.repr, (2, 2));
    assert_eq!(info.level, 0);
    assert_eq!(g.terminal_char(info.sig), Some(u32::from('a')));
}
