//! The line protocol: one command per line, one result line per command.
//!
//! ```text
//! SEED u            reset everything under seed u              → OK
//! RESTART ON|OFF    reseed and replay on randomized failures   → OK
//! MAKE s            add the string s                           → Hk
//! CONCAT Hi Hj      add str(Hi)·str(Hj)                        → Hk
//! SPLIT Hi k        add str(Hi)[..k] and str(Hi)[k..]          → Ha Hb
//! EQ Hi Hj          string equality                            → TRUE|FALSE
//! CMP Hi Hj         lexicographic order                        → LESS|EQUAL|GREATER
//! LCP Hi Hj         longest common prefix length               → number
//! ACTIVATE Hi       make Hi searchable                         → OK
//! DEACTIVATE Hi     stop searching Hi                          → OK
//! FIND s [LIMIT k]  occurrences in active strings              → Hi@pos … | -
//! HINS pos c        insert c at pos of the edited text         → V<version>
//! HDEL l r          delete positions l..=r                     → V<version>
//! HMOVE l r d       move l..=r in front of position d          → V<version>
//! HFIND s [LIMIT k] first appearances over the edit history    → V<version>@pos … | -
//! SLPEQ fileA fileB equality of two straight-line programs     → TRUE|FALSE
//! BENCH suite       CSV measurements                           → header + rows
//! ```
//!
//! Positions are 1-based. Blank lines and lines starting with `#` are
//! skipped. A failing command prints `ERR line N: message` and leaves the
//! session unchanged.

use std::cmp::Ordering;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use dynstr::{Char, Collection, Config, Edit, Error, Fold, GrammarConfig, Handle, History, MatchIndex, Slp};
use dynstr_bench::Suite;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A parsed command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// `SEED u`.
    Seed(u64),
    /// `RESTART ON|OFF`.
    Restart(bool),
    /// `MAKE s`.
    Make(Vec<Char>),
    /// `CONCAT Hi Hj`.
    Concat(Handle, Handle),
    /// `SPLIT Hi k`.
    Split(Handle, u64),
    /// `EQ Hi Hj`.
    Eq(Handle, Handle),
    /// `CMP Hi Hj`.
    Cmp(Handle, Handle),
    /// `LCP Hi Hj`.
    Lcp(Handle, Handle),
    /// `ACTIVATE Hi`.
    Activate(Handle),
    /// `DEACTIVATE Hi`.
    Deactivate(Handle),
    /// `FIND s [LIMIT k]`.
    Find(Vec<Char>, Option<usize>),
    /// `HINS pos c`.
    HIns(u64, Char),
    /// `HDEL l r`.
    HDel(u64, u64),
    /// `HMOVE l r d`.
    HMove(u64, u64, u64),
    /// `HFIND s [LIMIT k]`.
    HFind(Vec<Char>, Option<usize>),
    /// `SLPEQ fileA fileB`.
    SlpEq(PathBuf, PathBuf),
    /// `BENCH suite`.
    Bench(Suite),
}

fn chars(s: &str) -> Vec<Char> {
    s.chars().map(Char::from).collect()
}

fn handle(tok: &str) -> anyhow::Result<Handle> {
    tok.strip_prefix('H')
        .and_then(|d| d.parse().ok())
        .map(Handle)
        .ok_or_else(|| anyhow!("expected a handle like H0, got `{tok}`"))
}

fn number<T: std::str::FromStr>(tok: &str) -> anyhow::Result<T> {
    tok.parse().map_err(|_| anyhow!("expected a number, got `{tok}`"))
}

fn limit(rest: &[&str]) -> anyhow::Result<Option<usize>> {
    match rest {
        [] => Ok(None),
        [kw, k] if kw.eq_ignore_ascii_case("LIMIT") => Ok(Some(number(k)?)),
        _ => bail!("expected `LIMIT k`"),
    }
}

impl Command {
    /// Parses one nonblank, non-comment line.
    pub fn parse(line: &str) -> anyhow::Result<Command> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (op, args) = toks.split_first().ok_or_else(|| anyhow!("empty command"))?;
        let op = op.to_ascii_uppercase();
        let arity = |n: usize| -> anyhow::Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                bail!("{op} takes {n} argument(s), got {}", args.len())
            }
        };
        Ok(match op.as_str() {
            "SEED" => {
                arity(1)?;
                Command::Seed(number(args[0])?)
            }
            "RESTART" => {
                arity(1)?;
                match args[0].to_ascii_uppercase().as_str() {
                    "ON" => Command::Restart(true),
                    "OFF" => Command::Restart(false),
                    _ => bail!("expected ON or OFF"),
                }
            }
            "MAKE" => {
                arity(1)?;
                Command::Make(chars(args[0]))
            }
            "CONCAT" | "EQ" | "CMP" | "LCP" => {
                arity(2)?;
                let (a, b) = (handle(args[0])?, handle(args[1])?);
                match op.as_str() {
                    "CONCAT" => Command::Concat(a, b),
                    "EQ" => Command::Eq(a, b),
                    "CMP" => Command::Cmp(a, b),
                    _ => Command::Lcp(a, b),
                }
            }
            "SPLIT" => {
                arity(2)?;
                Command::Split(handle(args[0])?, number(args[1])?)
            }
            "ACTIVATE" => {
                arity(1)?;
                Command::Activate(handle(args[0])?)
            }
            "DEACTIVATE" => {
                arity(1)?;
                Command::Deactivate(handle(args[0])?)
            }
            "FIND" | "HFIND" => {
                let (p, rest) = args.split_first().ok_or_else(|| anyhow!("{op} needs a pattern"))?;
                let k = limit(rest)?;
                if op == "FIND" {
                    Command::Find(chars(p), k)
                } else {
                    Command::HFind(chars(p), k)
                }
            }
            "HINS" => {
                arity(2)?;
                let mut it = args[1].chars();
                let c = match (it.next(), it.next()) {
                    (Some(c), None) => Char::from(c),
                    _ => bail!("HINS inserts a single character"),
                };
                Command::HIns(number(args[0])?, c)
            }
            "HDEL" => {
                arity(2)?;
                Command::HDel(number(args[0])?, number(args[1])?)
            }
            "HMOVE" => {
                arity(3)?;
                Command::HMove(number(args[0])?, number(args[1])?, number(args[2])?)
            }
            "SLPEQ" => {
                arity(2)?;
                Command::SlpEq(args[0].into(), args[1].into())
            }
            "BENCH" => {
                arity(1)?;
                Command::Bench(args[0].parse().map_err(|e: String| anyhow!(e))?)
            }
            _ => bail!("unknown command `{}`", toks[0]),
        })
    }

    /// Whether the command changes state that a restart must replay.
    fn is_logged(&self) -> bool {
        matches!(
            self,
            Command::Make(_)
                | Command::Concat(..)
                | Command::Split(..)
                | Command::Activate(_)
                | Command::Deactivate(_)
                | Command::HIns(..)
                | Command::HDel(..)
                | Command::HMove(..)
        )
    }
}

/// Session parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    /// Initial seed.
    pub seed: u64,
    /// Word size `B`.
    pub word_bits: u32,
    /// Auto-restart initially on.
    pub restart: bool,
    /// Restarts attempted per command.
    pub max_retries: u32,
    /// Repetitions per size for `BENCH`.
    pub bench_reps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 0,
            word_bits: GrammarConfig::default().b,
            restart: true,
            max_retries: 32,
            bench_reps: 3,
        }
    }
}

struct State {
    coll: Collection,
    index: MatchIndex,
    history: History,
}

impl State {
    fn new(seed: u64, word_bits: u32) -> Self {
        let config = Config {
            grammar: GrammarConfig { seed, b: word_bits },
            // The session restarts the whole state, not just the collection.
            restart: false,
            ..Config::default()
        };
        State {
            coll: Collection::new(config),
            index: MatchIndex::new(),
            history: History::new(),
        }
    }
}

/// A command interpreter.
pub struct Session {
    opts: Options,
    restart: bool,
    restarts: u32,
    state: State,
    log: Vec<Command>,
    base_dir: PathBuf,
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    if v.is_empty() {
        "-".into()
    } else {
        v.join(" ")
    }
}

fn is_failure(e: &anyhow::Error) -> bool {
    matches!(e.downcast_ref::<Error>(), Some(Error::Failure(_)))
}

impl Session {
    /// A fresh session; `SLPEQ` paths resolve against `base_dir`.
    pub fn new(opts: Options, base_dir: impl Into<PathBuf>) -> Self {
        Session {
            opts,
            restart: opts.restart,
            restarts: 0,
            state: State::new(opts.seed, opts.word_bits),
            log: Vec::new(),
            base_dir: base_dir.into(),
        }
    }

    /// How many times the session reseeded itself.
    pub fn restarts(&self) -> u32 {
        self.restarts
    }

    /// The collection.
    pub fn collection(&self) -> &Collection {
        &self.state.coll
    }

    /// Runs a script, returning one output line per command (errors
    /// included as `ERR line N: …`).
    pub fn run_script(&mut self, script: &str) -> Vec<String> {
        script
            .lines()
            .enumerate()
            .filter_map(|(i, line)| self.run_line(i + 1, line))
            .collect()
    }

    /// Runs one line; `None` for blank and comment lines.
    pub fn run_line(&mut self, lineno: usize, line: &str) -> Option<String> {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        Some(
            Command::parse(line)
                .and_then(|c| self.execute(c))
                .unwrap_or_else(|e| format!("ERR line {lineno}: {e:#}")),
        )
    }

    /// Executes a command, reseeding and replaying on randomized failure
    /// when restarts are on.
    pub fn execute(&mut self, cmd: Command) -> anyhow::Result<String> {
        let mut attempts = 0;
        loop {
            match self.step(&cmd) {
                Ok(out) => {
                    if cmd.is_logged() {
                        self.log.push(cmd);
                    }
                    return Ok(out);
                }
                Err(e) if self.restart && is_failure(&e) => loop {
                    attempts += 1;
                    if attempts > self.opts.max_retries {
                        return Err(e.context(format!("gave up after {} restarts", self.opts.max_retries)));
                    }
                    match self.reseed() {
                        Ok(()) => break,
                        Err(r) if is_failure(&r) => continue,
                        Err(r) => return Err(r),
                    }
                },
                Err(e) => return Err(e),
            }
        }
    }

    /// Rebuilds the state under the next derived seed by replaying the log.
    fn reseed(&mut self) -> anyhow::Result<()> {
        self.restarts += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        rng.set_stream(u64::from(self.restarts));
        let mut fresh = Session {
            state: State::new(rng.next_u64(), self.opts.word_bits),
            log: Vec::new(),
            restart: false,
            restarts: self.restarts,
            opts: self.opts,
            base_dir: self.base_dir.clone(),
        };
        for cmd in &self.log {
            fresh.step(cmd)?;
        }
        self.state = fresh.state;
        Ok(())
    }

    fn step(&mut self, cmd: &Command) -> anyhow::Result<String> {
        let State { coll, index, history } = &mut self.state;
        Ok(match cmd {
            &Command::Seed(u) => {
                self.opts.seed = u;
                self.restarts = 0;
                self.state = State::new(u, self.opts.word_bits);
                self.log.clear();
                "OK".into()
            }
            &Command::Restart(on) => {
                self.restart = on;
                "OK".into()
            }
            Command::Make(w) => coll.make_string(w)?.to_string(),
            &Command::Concat(a, b) => coll.concat(a, b)?.to_string(),
            &Command::Split(h, k) => {
                let (l, r) = coll.split(h, k)?;
                format!("{l} {r}")
            }
            &Command::Eq(a, b) => if coll.eq(a, b)? { "TRUE" } else { "FALSE" }.into(),
            &Command::Cmp(a, b) => match coll.compare(a, b)? {
                Ordering::Less => "LESS",
                Ordering::Equal => "EQUAL",
                Ordering::Greater => "GREATER",
            }
            .into(),
            &Command::Lcp(a, b) => coll.lcp(a, b)?.to_string(),
            &Command::Activate(h) => {
                index.activate(coll, h)?;
                "OK".into()
            }
            &Command::Deactivate(h) => {
                index.deactivate(coll, h)?;
                "OK".into()
            }
            Command::Find(p, k) => {
                let mut hits = index.find(coll, p, *k)?;
                hits.sort_unstable();
                join(hits.iter().map(|(h, i)| format!("{h}@{i}")))
            }
            &Command::HIns(pos, c) => format!("V{}", history.apply(coll, Edit::Insert { pos, c })?),
            &Command::HDel(l, r) => format!("V{}", history.apply(coll, Edit::Delete { l, r })?),
            &Command::HMove(l, r, dest) => format!("V{}", history.apply(coll, Edit::Move { l, r, dest })?),
            Command::HFind(p, k) => {
                let hits = history.find(coll, p, *k).map_err(Error::from)?;
                join(hits.iter().map(|o| format!("V{}@{}", o.version, o.pos)))
            }
            Command::SlpEq(a, b) => {
                let equal = slp_equal(&self.base_dir.join(a), &self.base_dir.join(b), self.opts)?;
                if equal { "TRUE" } else { "FALSE" }.into()
            }
            &Command::Bench(suite) => {
                let rows = dynstr_bench::run(suite, self.opts.seed, self.opts.bench_reps);
                std::iter::once(dynstr_bench::HEADER.to_string())
                    .chain(rows.iter().map(|r| r.to_string()))
                    .collect::<Vec<_>>()
                    .join("\n")
            }
        })
    }
}

/// Builds both programs in a scratch collection (left fold for the first,
/// balanced fold for the second) and compares the resulting handles.
pub fn slp_equal(a: &Path, b: &Path, opts: Options) -> anyhow::Result<bool> {
    let read = |p: &Path| -> anyhow::Result<Slp> {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        Slp::parse(&text).with_context(|| format!("parsing {}", p.display()))
    };
    let (pa, pb) = (read(a)?, read(b)?);
    let mut coll = Collection::new(Config {
        grammar: GrammarConfig {
            seed: opts.seed,
            b: opts.word_bits,
        },
        restart: true,
        max_retries: opts.max_retries,
        ..Config::default()
    });
    let ha = pa.materialize(&mut coll, Fold::Left)?;
    let hb = pb.materialize(&mut coll, Fold::Balanced)?;
    Ok(coll.eq(ha, hb)?)
}
