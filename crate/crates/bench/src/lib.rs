//! Workload generators and the CSV measurement harness.
//!
//! Every row records one operation: its name, the string length `n` it
//! ran at, the wall-clock time, how many signatures it added to the
//! grammar, and the depth of the resulting string.

use std::fmt;
use std::time::Instant;

use dynstr::{Char, Collection, Handle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// CSV header of [`Row`].
pub const HEADER: &str = "op,n,wall_ns,new_sigs,depth";

/// One measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    /// Operation name.
    pub op: &'static str,
    /// String length the operation ran at.
    pub n: u64,
    /// Wall-clock nanoseconds.
    pub wall_ns: u64,
    /// Signatures added to the grammar.
    pub new_sigs: u64,
    /// Depth of the resulting string.
    pub depth: u32,
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{}", self.op, self.n, self.wall_ns, self.new_sigs, self.depth)
    }
}

/// Benchmark suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Concatenation of two random halves.
    Concat,
    /// Split at a random position.
    Split,
    /// LCP of strings sharing a long prefix.
    Lcp,
    /// Depth of random and periodic strings.
    Depth,
    /// All of the above.
    All,
    /// All of the above at small sizes only.
    Quick,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "concat" => Suite::Concat,
            "split" => Suite::Split,
            "lcp" => Suite::Lcp,
            "depth" => Suite::Depth,
            "all" => Suite::All,
            "quick" => Suite::Quick,
            _ => return Err(format!("unknown suite `{s}` (concat, split, lcp, depth, all, quick)")),
        })
    }
}

/// A random string over the first `sigma` lowercase letters.
pub fn random_text(rng: &mut impl Rng, n: usize, sigma: u32) -> Vec<Char> {
    (0..n).map(|_| Char::from(b'a') + rng.random_range(0..sigma)).collect()
}

/// `n` characters of a periodic string with a random period of length
/// `period`.
pub fn periodic_text(rng: &mut impl Rng, n: usize, period: usize, sigma: u32) -> Vec<Char> {
    let base = random_text(rng, period, sigma);
    base.iter().copied().cycle().take(n).collect()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_nanos() as u64)
}

/// Workload state shared by the suites: one long random text whose
/// fragments serve as operands.
pub struct Workload {
    rng: ChaCha8Rng,
    coll: Collection,
    base: Handle,
    len: u64,
}

impl Workload {
    /// A collection holding a random text of length `len`.
    pub fn new(seed: u64, len: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coll = Collection::with_seed(seed);
        let text = random_text(&mut rng, len, 4);
        let base = coll.make_string(&text).expect("base text");
        Workload {
            rng,
            coll,
            base,
            len: len as u64,
        }
    }

    /// The collection.
    pub fn collection(&mut self) -> &mut Collection {
        &mut self.coll
    }

    /// A random fragment of the base text of length `n`.
    pub fn fragment(&mut self, n: u64) -> Handle {
        assert!(n >= 1 && n <= self.len);
        let start = self.rng.random_range(0..=self.len - n);
        let mut h = self.base;
        if start > 0 {
            h = self.coll.split(h, start).expect("split").1;
        }
        if n < self.len - start {
            h = self.coll.split(h, n).expect("split").0;
        }
        h
    }

    /// Concatenation of two random fragments of length `n / 2`.
    pub fn concat(&mut self, n: u64) -> Row {
        let (x, y) = (self.fragment(n / 2), self.fragment(n - n / 2));
        let before = self.coll.grammar().len();
        let (h, wall_ns) = timed(|| self.coll.concat(x, y).expect("concat"));
        Row {
            op: "concat",
            n,
            wall_ns,
            new_sigs: (self.coll.grammar().len() - before) as u64,
            depth: self.coll.depth(h).expect("handle"),
        }
    }

    /// Split of a random fragment of length `n` at a random position.
    pub fn split(&mut self, n: u64) -> Row {
        let x = self.fragment(n);
        let k = self.rng.random_range(1..n);
        let before = self.coll.grammar().len();
        let ((l, r), wall_ns) = timed(|| self.coll.split(x, k).expect("split"));
        let depth = self.coll.depth(l).unwrap().max(self.coll.depth(r).unwrap());
        Row {
            op: "split",
            n,
            wall_ns,
            new_sigs: (self.coll.grammar().len() - before) as u64,
            depth,
        }
    }

    /// LCP of a fragment of length `n` and a copy with one changed
    /// character near the end.
    pub fn lcp(&mut self, n: u64) -> Row {
        let x = self.fragment(n);
        let mut w = self.coll.string(x).unwrap();
        let i = self.rng.random_range(n as usize / 2..n as usize);
        w[i] = Char::from(b'z');
        let y = self.coll.make_string(&w).unwrap();
        let (l, wall_ns) = timed(|| self.coll.lcp(x, y).unwrap());
        assert_eq!(l, i as u64);
        Row {
            op: "lcp",
            n,
            wall_ns,
            new_sigs: 0,
            depth: self.coll.depth(x).unwrap(),
        }
    }
}

/// Depth of a freshly built string (`op` names the family).
pub fn depth_row(op: &'static str, seed: u64, text: &[Char]) -> Row {
    let mut coll = Collection::with_seed(seed);
    let (h, wall_ns) = timed(|| coll.make_string(text).expect("make"));
    Row {
        op,
        n: text.len() as u64,
        wall_ns,
        new_sigs: coll.grammar().len() as u64,
        depth: coll.depth(h).unwrap(),
    }
}

/// Runs a suite: `reps` measurements per size `2^k`, `k` in `logs`.
pub fn run(suite: Suite, seed: u64, reps: usize) -> Vec<Row> {
    let (lo, hi) = match suite {
        Suite::Quick => (6, 12),
        _ => (10, 18),
    };
    let mut rows = Vec::new();
    let wants = |s: Suite| suite == s || suite == Suite::All || suite == Suite::Quick;
    if wants(Suite::Concat) || wants(Suite::Split) || wants(Suite::Lcp) {
        let mut w = Workload::new(seed, 1 << (hi + 1));
        for k in lo..=hi {
            let n = 1u64 << k;
            for _ in 0..reps {
                if wants(Suite::Concat) {
                    rows.push(w.concat(n));
                }
                if wants(Suite::Split) {
                    rows.push(w.split(n));
                }
                if wants(Suite::Lcp) {
                    rows.push(w.lcp(n));
                }
            }
        }
    }
    if wants(Suite::Depth) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in lo..=hi {
            let n = 1usize << k;
            for r in 0..reps {
                let s = seed.wrapping_mul(1_000_003).wrapping_add(r as u64);
                rows.push(depth_row("depth_random", s, &random_text(&mut rng, n, 4)));
                let period = rng.random_range(2..=16);
                rows.push(depth_row("depth_periodic", s, &periodic_text(&mut rng, n, period, 4)));
            }
        }
    }
    rows
}

/// Least-squares line `y = slope·x + intercept` and its `R²`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_fixed() {
        assert_eq!(HEADER, "op,n,wall_ns,new_sigs,depth");
        let r = Row {
            op: "concat",
            n: 8,
            wall_ns: 5,
            new_sigs: 3,
            depth: 2,
        };
        assert_eq!(r.to_string(), "concat,8,5,3,2");
    }

    #[test]
    fn fit_recovers_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (a, b, r2) = linear_fit(&xs, &ys);
        assert!((a - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quick_suite_runs() {
        let rows = run(Suite::Quick, 1, 2);
        assert!(rows.iter().any(|r| r.op == "concat"));
        assert!(rows.iter().any(|r| r.op == "depth_periodic"));
        assert!(rows.iter().all(|r| r.n >= 64));
    }

    #[test]
    fn suites_parse() {
        assert_eq!("Concat".parse::<Suite>(), Ok(Suite::Concat));
        assert!("nope".parse::<Suite>().is_err());
    }
}
