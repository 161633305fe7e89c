//! Exhaustive search for bad 2-colorings of `[n]`, and the exact Rado number
//! as the least `n` admitting none.
//!
//! Elements are colored in order `1, 2, ..., n` with element 1 fixed red and
//! red tried before blue, so the first complete bad coloring reached is the
//! lexicographically least one. Each color class keeps a stack of
//! reachability tables (row `j` = sums of exactly `j` class members) that is
//! extended in place when an element joins the class:
//!
//! ```text
//! R'_j = R_j | (R'_{j-1} << v)
//! ```
//!
//! Since the class had no solution before `v` arrived, only `a*s` for members
//! `s` of the enlarged class needs testing against the new top row.
//!
//! For parallel runs the tree is cut at a fixed depth. Every prefix is a
//! self-contained subtree with deterministic node counts, and the answer is
//! read off the subtrees in prefix order, so the outcome never depends on the
//! number of workers.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Color, Coloring, EquationInstance};
use crate::formula::compute_c;
use crate::repr::{self, or_shifted, test_bit, ReprError};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(
        "search accepted {coloring} as bad for {inst} but the independent check found {witness}"
    )]
    WitnessRejected {
        inst: EquationInstance,
        coloring: String,
        witness: String,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Default depth at which the search tree is split into independent subtrees.
pub const DEFAULT_SPLIT_DEPTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of color assignments explored.
    pub budget: u64,
    pub threads: usize,
    pub split_depth: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            budget: u64::MAX,
            threads: 1,
            split_depth: DEFAULT_SPLIT_DEPTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BadSearch {
    Found(Coloring),
    NoneExists,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadSearchOutcome {
    pub verdict: BadSearch,
    pub nodes: u64,
}

enum Executor {
    Sequential,
    Pool(rayon::ThreadPool),
}

impl Executor {
    fn new(threads: usize) -> Result<Self, SearchError> {
        if threads <= 1 {
            return Ok(Executor::Sequential);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map(Executor::Pool)
            .map_err(|e| SearchError::Pool(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Found,
    Exhausted,
    OutOfBudget,
    Aborted,
}

struct SubtreeResult {
    step: Step,
    nodes: u64,
    coloring: Option<Vec<Color>>,
}

/// Reachability tables for one color class, one entry per member added.
struct ClassState {
    members: Vec<u64>,
    tables: Vec<Vec<u64>>,
}

struct Dfs<'a> {
    n: u64,
    a: u64,
    k: usize,
    words: usize,
    classes: [ClassState; 2],
    colors: Vec<Color>,
    nodes: u64,
    cap: u64,
    abort: Option<(&'a AtomicUsize, usize)>,
}

impl<'a> Dfs<'a> {
    fn new(
        inst: &EquationInstance,
        n: u64,
        cap: u64,
        abort: Option<(&'a AtomicUsize, usize)>,
    ) -> Self {
        let k = inst.left_len() as usize;
        let a = inst.a();
        let width = a.min(k as u64) * n + 1;
        let words = width.div_ceil(64) as usize;
        let empty = || {
            let mut t = vec![0u64; (k + 1) * words];
            t[0] = 1;
            ClassState {
                members: Vec::new(),
                tables: vec![t],
            }
        };
        Self {
            n,
            a,
            k,
            words,
            classes: [empty(), empty()],
            colors: Vec::with_capacity(n as usize),
            nodes: 0,
            cap,
            abort,
        }
    }

    /// Adds the next element to `color`'s class; returns true if that class
    /// now holds a monochromatic solution.
    fn push(&mut self, color: Color) -> bool {
        let v = self.colors.len() as u64 + 1;
        self.colors.push(color);
        let (k, words, a) = (self.k, self.words, self.a);
        let class = &mut self.classes[color.index()];
        let mut table = class.tables.last().expect("base table").clone();
        for j in 1..=k {
            let (prev, cur) = table.split_at_mut(j * words);
            or_shifted(&mut cur[..words], &prev[(j - 1) * words..], v as usize);
        }
        class.members.push(v);
        let top = &table[k * words..];
        let hit = class.members.iter().any(|&s| test_bit(top, a * s));
        class.tables.push(table);
        hit
    }

    fn pop(&mut self) {
        let color = self.colors.pop().expect("nonempty assignment");
        let class = &mut self.classes[color.index()];
        class.members.pop();
        class.tables.pop();
    }

    fn aborted(&self) -> bool {
        match self.abort {
            Some((flag, index)) => {
                self.nodes.is_multiple_of(1024) && flag.load(Ordering::Relaxed) < index
            }
            None => false,
        }
    }

    fn dfs(&mut self) -> Step {
        if self.colors.len() as u64 == self.n {
            return Step::Found;
        }
        for color in Color::BOTH {
            if self.nodes >= self.cap {
                return Step::OutOfBudget;
            }
            self.nodes += 1;
            if self.aborted() {
                return Step::Aborted;
            }
            let dead = self.push(color);
            if !dead {
                match self.dfs() {
                    Step::Exhausted => {}
                    other => return other,
                }
            }
            self.pop();
        }
        Step::Exhausted
    }

    /// Replays a fixed prefix (element 1 first), then searches below it.
    fn run(mut self, prefix: &[Color]) -> SubtreeResult {
        for &color in prefix {
            if self.nodes >= self.cap {
                return self.finish(Step::OutOfBudget);
            }
            self.nodes += 1;
            if self.push(color) {
                return self.finish(Step::Exhausted);
            }
        }
        let step = self.dfs();
        self.finish(step)
    }

    fn finish(self, step: Step) -> SubtreeResult {
        SubtreeResult {
            step,
            nodes: self.nodes,
            coloring: (step == Step::Found).then_some(self.colors),
        }
    }
}

fn prefixes(depth: usize) -> Vec<Vec<Color>> {
    (0..1usize << depth)
        .map(|idx| {
            let mut p = Vec::with_capacity(depth + 1);
            p.push(Color::Red);
            for i in 0..depth {
                let bit = (idx >> (depth - 1 - i)) & 1;
                p.push(if bit == 0 { Color::Red } else { Color::Blue });
            }
            p
        })
        .collect()
}

fn search_subtrees(
    inst: &EquationInstance,
    n: u64,
    opts: &SearchOptions,
    exec: &Executor,
) -> BadSearchOutcome {
    let depth = opts.split_depth.min(n as usize - 1);
    let prefixes = prefixes(depth);
    let budget = opts.budget;

    let results: Vec<SubtreeResult> = match exec {
        Executor::Sequential => {
            let mut out = Vec::new();
            let mut used = 0u64;
            for p in &prefixes {
                let r = Dfs::new(inst, n, budget.saturating_sub(used), None).run(p);
                used = used.saturating_add(r.nodes);
                let stop = r.step != Step::Exhausted;
                out.push(r);
                if stop {
                    break;
                }
            }
            out
        }
        Executor::Pool(pool) => {
            let best = AtomicUsize::new(usize::MAX);
            pool.install(|| {
                prefixes
                    .par_iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let r = Dfs::new(inst, n, budget, Some((&best, i))).run(p);
                        if r.step == Step::Found {
                            best.fetch_min(i, Ordering::Relaxed);
                        }
                        r
                    })
                    .collect()
            })
        }
    };

    let mut nodes = 0u64;
    for r in results {
        nodes = nodes.saturating_add(r.nodes);
        if nodes > budget || r.step == Step::OutOfBudget {
            return BadSearchOutcome {
                verdict: BadSearch::BudgetExceeded,
                nodes: nodes.min(budget),
            };
        }
        match r.step {
            Step::Found => {
                let coloring = Coloring::new(r.coloring.expect("found coloring")).expect("n >= 1");
                return BadSearchOutcome {
                    verdict: BadSearch::Found(coloring),
                    nodes,
                };
            }
            Step::Exhausted => {}
            Step::OutOfBudget => unreachable!(),
            Step::Aborted => unreachable!("aborted subtree precedes the decisive one"),
        }
    }
    BadSearchOutcome {
        verdict: BadSearch::NoneExists,
        nodes,
    }
}

fn exists_bad_with(
    inst: &EquationInstance,
    n: u64,
    opts: &SearchOptions,
    exec: &Executor,
) -> Result<BadSearchOutcome, SearchError> {
    assert!(n >= 1, "n must be positive");
    repr::check_capacity(inst, n as usize)?;
    let outcome = search_subtrees(inst, n, opts, exec);
    if let BadSearch::Found(col) = &outcome.verdict {
        if let Some(w) = repr::find_mono_solution(inst, col)? {
            return Err(SearchError::WitnessRejected {
                inst: *inst,
                coloring: col.to_string(),
                witness: w.to_string(),
            });
        }
    }
    Ok(outcome)
}

/// Lexicographically least bad coloring of `[n]` with element 1 red.
pub fn exists_bad_coloring(
    inst: &EquationInstance,
    n: u64,
    budget: u64,
) -> Result<BadSearchOutcome, SearchError> {
    let opts = SearchOptions {
        budget,
        ..SearchOptions::default()
    };
    exists_bad_coloring_with(inst, n, &opts)
}

pub fn exists_bad_coloring_with(
    inst: &EquationInstance,
    n: u64,
    opts: &SearchOptions,
) -> Result<BadSearchOutcome, SearchError> {
    let exec = Executor::new(opts.threads)?;
    exists_bad_with(inst, n, opts, &exec)
}

/// Plain enumeration of all `2^n` colorings in lexicographic order, each
/// judged by [`repr::is_bad_coloring`]. No pruning and no symmetry.
pub fn brute_force_bad_coloring(
    inst: &EquationInstance,
    n: u64,
) -> Result<Option<Coloring>, ReprError> {
    assert!((1..=30).contains(&n), "brute force is limited to n <= 30");
    for mask in 0u64..1 << n {
        let colors = (0..n)
            .map(|i| {
                if (mask >> (n - 1 - i)) & 1 == 0 {
                    Color::Red
                } else {
                    Color::Blue
                }
            })
            .collect();
        let col = Coloring::new(colors).expect("n >= 1");
        if repr::is_bad_coloring(inst, &col)? {
            return Ok(Some(col));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProofStatus {
    Proven,
    ExhaustedBudget { lower_bound: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub nodes: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub inst: EquationInstance,
    /// `R2(m,a)` when proven, otherwise the best lower bound.
    pub value: u64,
    /// Bad coloring of `[value - 1]`; absent when `value = 1`.
    pub witness: Option<Coloring>,
    pub status: ProofStatus,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    pub n_max: u64,
    pub search: SearchOptions,
    /// Start next to `C(m,a)` instead of at 1.
    pub hint: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            n_max: 64,
            search: SearchOptions::default(),
            hint: false,
        }
    }
}

/// Least `n` with no bad coloring of `[n]`, by ascent from `n = 1`.
///
/// Badness is closed under restriction, so a bad coloring at `n - 1` and
/// none at `n` pins the value to `n`.
pub fn exact_rado(
    inst: &EquationInstance,
    opts: &ExactOptions,
) -> Result<ExactResult, SearchError> {
    let started = Instant::now();
    let exec = Executor::new(opts.search.threads)?;
    let mut used = 0u64;
    let mut witness: Option<Coloring> = None;

    let step = |n: u64, used: &mut u64| -> Result<BadSearch, SearchError> {
        let sub = SearchOptions {
            budget: opts.search.budget.saturating_sub(*used),
            ..opts.search
        };
        let out = exists_bad_with(inst, n, &sub, &exec)?;
        *used = used.saturating_add(out.nodes);
        Ok(out.verdict)
    };

    let finish = |value, witness, status, nodes| ExactResult {
        inst: *inst,
        value,
        witness,
        status,
        stats: SearchStats {
            nodes,
            elapsed: started.elapsed(),
        },
    };

    let mut start = 1;
    if opts.hint {
        let guess = compute_c(inst)
            .saturating_sub(1)
            .max(1)
            .min(opts.n_max.max(1));
        match step(guess, &mut used)? {
            BadSearch::Found(col) => {
                witness = Some(col);
                start = guess + 1;
            }
            BadSearch::BudgetExceeded => {
                return Ok(finish(
                    1,
                    None,
                    ProofStatus::ExhaustedBudget { lower_bound: 1 },
                    used,
                ));
            }
            BadSearch::NoneExists => {
                let mut n = guess;
                while n > 1 {
                    match step(n - 1, &mut used)? {
                        BadSearch::Found(col) => {
                            return Ok(finish(n, Some(col), ProofStatus::Proven, used));
                        }
                        BadSearch::NoneExists => n -= 1,
                        BadSearch::BudgetExceeded => {
                            return Ok(finish(
                                1,
                                None,
                                ProofStatus::ExhaustedBudget { lower_bound: 1 },
                                used,
                            ));
                        }
                    }
                }
                return Ok(finish(1, None, ProofStatus::Proven, used));
            }
        }
    }

    for n in start..=opts.n_max {
        match step(n, &mut used)? {
            BadSearch::Found(col) => witness = Some(col),
            BadSearch::NoneExists => {
                return Ok(finish(n, witness, ProofStatus::Proven, used));
            }
            BadSearch::BudgetExceeded => {
                return Ok(finish(
                    n,
                    witness,
                    ProofStatus::ExhaustedBudget { lower_bound: n },
                    used,
                ));
            }
        }
    }
    let lower = opts.n_max.max(start - 1) + 1;
    Ok(finish(
        lower,
        witness,
        ProofStatus::ExhaustedBudget { lower_bound: lower },
        used,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(m: u64, a: u64) -> EquationInstance {
        EquationInstance::new(m, a).unwrap()
    }

    fn exact(m: u64, a: u64) -> ExactResult {
        exact_rado(&inst(m, a), &ExactOptions::default()).unwrap()
    }

    #[test]
    fn bad_coloring_examples() {
        let i = inst(6, 3);
        assert!(matches!(
            exists_bad_coloring(&i, 4, u64::MAX).unwrap().verdict,
            BadSearch::Found(_)
        ));
        assert_eq!(
            exists_bad_coloring(&i, 5, u64::MAX).unwrap().verdict,
            BadSearch::NoneExists
        );
        let out = exists_bad_coloring(&inst(9, 4), 4, u64::MAX).unwrap();
        assert_eq!(out.verdict, BadSearch::Found("RBBR".parse().unwrap()));
    }

    #[test]
    fn exact_examples() {
        for (m, a, v) in [(3, 1, 5), (6, 2, 8), (13, 4, 9), (6, 10, 6), (5, 4, 1)] {
            let r = exact(m, a);
            assert_eq!(r.status, ProofStatus::Proven, "m={m} a={a}");
            assert_eq!(r.value, v, "m={m} a={a}");
        }
        assert_eq!(exact(5, 4).witness, None);
        assert_eq!(exact(6, 10).witness.unwrap().to_string(), "RBBRR");
    }

    #[test]
    fn hint_gives_same_answer() {
        for (m, a) in [(13, 4), (6, 2), (5, 4), (9, 4), (3, 3)] {
            let plain = exact(m, a);
            let hinted = exact_rado(
                &inst(m, a),
                &ExactOptions {
                    hint: true,
                    ..ExactOptions::default()
                },
            )
            .unwrap();
            assert_eq!(plain.value, hinted.value, "m={m} a={a}");
            assert_eq!(plain.witness, hinted.witness, "m={m} a={a}");
        }
    }

    #[test]
    fn budget_exhaustion_reports_lower_bound() {
        let opts = ExactOptions {
            search: SearchOptions {
                budget: 40,
                ..SearchOptions::default()
            },
            ..ExactOptions::default()
        };
        let r = exact_rado(&inst(3, 1), &opts).unwrap();
        match r.status {
            ProofStatus::ExhaustedBudget { lower_bound } => {
                assert!(lower_bound <= 5);
                assert_eq!(r.value, lower_bound);
            }
            ProofStatus::Proven => panic!("budget of 40 nodes should not suffice"),
        }
    }

    #[test]
    fn n_max_exhaustion() {
        let opts = ExactOptions {
            n_max: 3,
            ..ExactOptions::default()
        };
        let r = exact_rado(&inst(3, 1), &opts).unwrap();
        assert_eq!(r.status, ProofStatus::ExhaustedBudget { lower_bound: 4 });
        assert_eq!(r.witness.unwrap().n(), 3);
    }

    #[test]
    fn threads_do_not_change_answer() {
        for (m, a) in [(3, 1), (4, 5), (3, 4), (13, 4)] {
            let one = exact(m, a);
            let many = exact_rado(
                &inst(m, a),
                &ExactOptions {
                    search: SearchOptions {
                        threads: 4,
                        ..SearchOptions::default()
                    },
                    ..ExactOptions::default()
                },
            )
            .unwrap();
            assert_eq!(one.value, many.value);
            assert_eq!(one.witness, many.witness);
            assert_eq!(one.status, many.status);
            assert_eq!(one.stats.nodes, many.stats.nodes);
        }
    }

    #[test]
    fn brute_force_agrees_on_small_cases() {
        let i = inst(9, 4);
        assert!(brute_force_bad_coloring(&i, 4).unwrap().is_some());
        assert!(brute_force_bad_coloring(&i, 5).unwrap().is_none());
    }

    #[test]
    fn prefix_order_is_lexicographic() {
        let p = prefixes(2);
        let s: Vec<String> = p
            .iter()
            .map(|c| c.iter().map(|c| c.as_char()).collect())
            .collect();
        assert_eq!(s, ["RRR", "RRB", "RBR", "RBB"]);
    }
}
