//! Exhaustive backtracking search for maximal Florentine arrays.
//!
//! Rows are added one at a time. A row is built position by position, and a
//! symbol is accepted at position `j` only if none of the `(a, b, step)`
//! adjacencies it creates with positions `< j` is already claimed in the
//! shared occupancy bitset, so each placement costs `O(n)` bit probes.
//!
//! Canonical form:
//! - the first row is the identity (relabel symbols by the inverse of any
//!   row to get there);
//! - rows are strictly increasing in lexicographic order;
//! - in circular mode every row starts with symbol 0, since rotating a row
//!   does not change its circular adjacencies.
//!
//! Reported arrays are therefore equivalent to, but usually not literally
//! equal to, arrays printed elsewhere.
//!
//! The row count is found by iterative deepening: targets `2, 3, ...` are
//! tried in turn, and the search is exhausted once some target `m + 1` is
//! refuted by a complete traversal, or `m` reaches the counting cap (`n`
//! linear, `n - 1` circular: each row uses `n - 1` resp. `n` of the `n(n-1)`
//! step-one pairs).

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Permutation, TuscanArray};
use crate::error::{Error, Result};

/// Node and wall-clock limits. Whichever triggers first ends the search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn nodes(max_nodes: u64) -> Self {
        SearchBudget {
            max_nodes: Some(max_nodes),
            max_time: None,
        }
    }

    pub fn time(max_time: Duration) -> Self {
        SearchBudget {
            max_nodes: None,
            max_time: Some(max_time),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub circular: bool,
    pub budget: SearchBudget,
    /// Worker threads for the first branching level. `1` runs inline.
    pub jobs: usize,
}

impl SearchOptions {
    pub fn linear() -> Self {
        SearchOptions {
            circular: false,
            budget: SearchBudget::unlimited(),
            jobs: 1,
        }
    }

    pub fn circular() -> Self {
        SearchOptions {
            circular: true,
            ..Self::linear()
        }
    }

    pub fn with_budget(mut self, budget: SearchBudget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// Best array found, in canonical form.
    pub array: TuscanArray,
    /// `true` when the row count is proven maximal.
    pub exhausted: bool,
    /// Symbol placements tried.
    pub nodes: u64,
    pub elapsed: Duration,
}

/// Search for a Florentine array (`k = n - 1`) on `n` symbols with as many
/// rows as possible.
///
/// Under an unlimited budget the result is deterministic regardless of
/// `jobs`. Running out of budget is not an error: the best array so far is
/// returned with `exhausted = false`.
pub fn search_max_rows(n: usize, options: &SearchOptions) -> Result<SearchOutcome> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if n > MAX_SEARCH_N {
        return Err(Error::InvalidParameter(format!(
            "search supports n <= {MAX_SEARCH_N}"
        )));
    }
    let start = Instant::now();
    let meter = Meter::new(&options.budget, start);
    let circular = options.circular;
    let cap = row_cap(n, circular);

    let mut best = vec![identity_row(n)];
    let mut exhausted = true;
    for target in 2..=cap {
        match deepen(n, circular, target, &meter, options.jobs) {
            Step::Found(rows) => best = rows,
            Step::Refuted => break,
            Step::Aborted => {
                exhausted = false;
                break;
            }
        }
    }

    let rows = best
        .into_iter()
        .map(|r| Permutation::from_vec_unchecked(r.into_iter().map(usize::from).collect()))
        .collect();
    Ok(SearchOutcome {
        array: TuscanArray::florentine(circular, rows)?,
        exhausted,
        nodes: meter.nodes.load(Ordering::Relaxed),
        elapsed: start.elapsed(),
    })
}

/// Symbols are stored as `u8`; the occupancy table has `n^2 (n-1)` cells.
pub const MAX_SEARCH_N: usize = 64;

fn row_cap(n: usize, circular: bool) -> usize {
    if circular {
        (n - 1).max(1)
    } else {
        n
    }
}

fn identity_row(n: usize) -> Vec<u8> {
    (0..n as u8).collect()
}

enum Step {
    Found(Vec<Vec<u8>>),
    Refuted,
    Aborted,
}

/// Look for `target` rows. With `jobs > 1` the second row is chosen in
/// parallel and the lexicographically first successful branch wins, which
/// is the same branch the sequential traversal would report.
fn deepen(n: usize, circular: bool, target: usize, meter: &Meter, jobs: usize) -> Step {
    let mut root = Dfs::new(n, circular, target, meter);
    root.push_row(&identity_row(n));
    if jobs <= 1 {
        return root.run();
    }

    let seconds = root.collect_next_rows();
    if meter.stopped() {
        return Step::Aborted;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool,
        Err(_) => return root.run(),
    };
    let found = pool.install(|| {
        seconds.par_iter().find_map_first(|second| {
            let mut dfs = root.clone();
            dfs.push_row(second);
            match dfs.run() {
                Step::Found(rows) => Some(rows),
                _ => None,
            }
        })
    });
    match found {
        Some(rows) => Step::Found(rows),
        None if meter.stopped() => Step::Aborted,
        None => Step::Refuted,
    }
}

struct Meter {
    nodes: AtomicU64,
    stop: AtomicBool,
    max_nodes: u64,
    deadline: Option<Instant>,
}

impl Meter {
    fn new(budget: &SearchBudget, start: Instant) -> Self {
        Meter {
            nodes: AtomicU64::new(0),
            stop: AtomicBool::new(false),
            max_nodes: budget.max_nodes.unwrap_or(u64::MAX),
            deadline: budget.max_time.map(|d| start + d),
        }
    }

    /// Count one node; `false` once the budget is spent.
    #[inline]
    fn tick(&self) -> bool {
        let used = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if used > self.max_nodes {
            self.stop.store(true, Ordering::Relaxed);
        }
        if used & 0xfff == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.stop.store(true, Ordering::Relaxed);
                }
            }
        }
        !self.stopped()
    }

    #[inline]
    fn stopped(&self) -> bool {
        self.stop.load(Ordering::Relaxed)
    }
}

/// Claimed `(a, b, step)` adjacencies, one bit each.
#[derive(Clone)]
struct Occupancy {
    n: usize,
    k: usize,
    circular: bool,
    words: Vec<u64>,
}

impl Occupancy {
    fn new(n: usize, circular: bool) -> Self {
        let k = (n - 1).max(1);
        Occupancy {
            n,
            k,
            circular,
            words: vec![0; (n * n * k).div_ceil(64)],
        }
    }

    #[inline]
    fn cell(&self, a: u8, b: u8, step: usize) -> usize {
        (a as usize * self.n + b as usize) * self.k + step - 1
    }

    #[inline]
    fn get(&self, cell: usize) -> bool {
        self.words[cell >> 6] >> (cell & 63) & 1 == 1
    }

    #[inline]
    fn flip(&mut self, cell: usize) {
        self.words[cell >> 6] ^= 1 << (cell & 63);
    }

    /// Can `s` go at position `pos` after `prefix`?
    #[inline]
    fn fits(&self, prefix: &[u8], s: u8) -> bool {
        let pos = prefix.len();
        prefix.iter().enumerate().all(|(q, &a)| {
            let step = pos - q;
            !self.get(self.cell(a, s, step))
                && !(self.circular && self.get(self.cell(s, a, self.n - step)))
        })
    }

    /// Claim (or release) the adjacencies of `s` placed after `prefix`.
    #[inline]
    fn toggle(&mut self, prefix: &[u8], s: u8) {
        let pos = prefix.len();
        for (q, &a) in prefix.iter().enumerate() {
            let step = pos - q;
            let c = self.cell(a, s, step);
            self.flip(c);
            if self.circular {
                let c = self.cell(s, a, self.n - step);
                self.flip(c);
            }
        }
    }
}

#[derive(Clone)]
struct Dfs<'m> {
    n: usize,
    circular: bool,
    target: usize,
    occ: Occupancy,
    rows: Vec<Vec<u8>>,
    meter: &'m Meter,
}

impl<'m> Dfs<'m> {
    fn new(n: usize, circular: bool, target: usize, meter: &'m Meter) -> Self {
        Dfs {
            n,
            circular,
            target,
            occ: Occupancy::new(n, circular),
            rows: Vec::with_capacity(target),
            meter,
        }
    }

    fn push_row(&mut self, row: &[u8]) {
        for pos in 0..row.len() {
            self.occ.toggle(&row[..pos], row[pos]);
        }
        self.rows.push(row.to_vec());
    }

    fn run(&mut self) -> Step {
        match self.extend() {
            Flow::Found => Step::Found(std::mem::take(&mut self.rows)),
            Flow::Exhausted => Step::Refuted,
            Flow::Aborted => Step::Aborted,
        }
    }

    /// Every row that can follow the current ones, in lexicographic order.
    fn collect_next_rows(&mut self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(self.n);
        self.fill(&mut buf, 0, true, &mut |row, _| {
            out.push(row.to_vec());
            Flow::Exhausted
        });
        out
    }

    fn extend(&mut self) -> Flow {
        if self.rows.len() == self.target {
            return Flow::Found;
        }
        let mut buf = Vec::with_capacity(self.n);
        self.fill(&mut buf, 0, true, &mut |row, dfs| {
            dfs.rows.push(row.to_vec());
            let flow = dfs.extend();
            if !matches!(flow, Flow::Found) {
                dfs.rows.pop();
            }
            flow
        })
    }

    /// Enumerate completions of `buf` into a full row, handing each to
    /// `visit` with the row's adjacencies claimed.
    fn fill(
        &mut self,
        buf: &mut Vec<u8>,
        used: u64,
        tight: bool,
        visit: &mut dyn FnMut(&[u8], &mut Self) -> Flow,
    ) -> Flow {
        let pos = buf.len();
        if pos == self.n {
            let row = buf.clone();
            return visit(&row, self);
        }
        let floor = if tight {
            self.rows.last().map_or(0, |prev| prev[pos])
        } else {
            0
        };
        let ceiling = if self.circular && pos == 0 {
            1
        } else {
            self.n as u8
        };
        let mut result = Flow::Exhausted;
        for s in floor..ceiling {
            if used >> s & 1 == 1 {
                continue;
            }
            if !self.meter.tick() {
                return Flow::Aborted;
            }
            if !self.occ.fits(buf, s) {
                continue;
            }
            let still_tight = tight && self.rows.last().is_some_and(|prev| prev[pos] == s);
            self.occ.toggle(buf, s);
            buf.push(s);
            let flow = self.fill(buf, used | 1 << s, still_tight, visit);
            buf.pop();
            match flow {
                Flow::Found => return Flow::Found,
                Flow::Aborted => {
                    self.occ.toggle(buf, s);
                    return Flow::Aborted;
                }
                Flow::Exhausted => {}
            }
            self.occ.toggle(buf, s);
            if self.meter.stopped() {
                result = Flow::Aborted;
                break;
            }
        }
        result
    }
}

enum Flow {
    Found,
    Exhausted,
    Aborted,
}
