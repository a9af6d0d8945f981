//! Tuscan-k, Florentine and circular Florentine arrays.
//!
//! An `m x n` Tuscan-k array has `m` rows, each a permutation of the symbols
//! `0..n`, such that for every ordered pair of symbols `(a, b)` and every step
//! `t` in `1..=k` at most one row places `b` exactly `t` positions to the
//! right of `a`. In a circular array the distance is measured cyclically.
//! A Florentine array is the case `k = n - 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::is_prime;

pub mod search;

pub use search::{search_max_rows, SearchBudget, SearchOptions, SearchOutcome};

/// A bijection on `0..n`, stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        check_permutation(&map).map_err(|reason| Error::NotAPermutation {
            row: 0,
            n: map.len(),
            reason,
        })?;
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// Caller guarantees `map` is a bijection.
    pub(crate) fn from_vec_unchecked(map: Vec<usize>) -> Self {
        debug_assert!(check_permutation(&map).is_ok());
        Permutation { map }
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn apply(&self, t: usize) -> usize {
        self.map[t]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (t, &v) in self.map.iter().enumerate() {
            inv[v] = t;
        }
        Permutation { map: inv }
    }

    /// `self` rotated left so that position `by` becomes position 0.
    pub fn rotate_left(&self, by: usize) -> Permutation {
        let mut map = self.map.clone();
        if !map.is_empty() {
            let len = map.len();
            map.rotate_left(by % len);
        }
        Permutation { map }
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = Vec::<usize>::deserialize(d)?;
        check_permutation(&map).map_err(serde::de::Error::custom)?;
        Ok(Permutation { map })
    }
}

fn check_permutation(map: &[usize]) -> std::result::Result<(), String> {
    let n = map.len();
    if n == 0 {
        return Err("empty row".into());
    }
    let mut seen = vec![false; n];
    for (pos, &v) in map.iter().enumerate() {
        if v >= n {
            return Err(format!("value {v} at position {pos} is out of range"));
        }
        if seen[v] {
            return Err(format!("value {v} repeats at position {pos}"));
        }
        seen[v] = true;
    }
    Ok(())
}

/// A witness that the Tuscan-k condition fails: the two rows both place
/// `pair.1` exactly `step` positions to the right of `pair.0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rows: (usize, usize),
    pub pair: (usize, usize),
    pub step: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rows {} and {} both place {} {} step(s) right of {}",
            self.rows.0, self.rows.1, self.pair.1, self.step, self.pair.0
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verification {
    Pass,
    Fail(Violation),
}

impl Verification {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verification::Pass)
    }

    pub fn violation(&self) -> Option<Violation> {
        match self {
            Verification::Pass => None,
            Verification::Fail(v) => Some(*v),
        }
    }
}

/// Rows of permutations together with the Tuscan-k parameters they are
/// meant to satisfy. Construction only checks structure; use
/// [`verify_tuscan`] for the adjacency condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ArrayFile", into = "ArrayFile")]
pub struct TuscanArray {
    n: usize,
    k: usize,
    circular: bool,
    rows: Vec<Permutation>,
}

/// On-disk layout: `{ "n": int, "k": int, "circular": bool, "rows": [[int, ...], ...] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArrayFile {
    pub n: usize,
    pub k: usize,
    pub circular: bool,
    pub rows: Vec<Vec<usize>>,
}

impl TryFrom<ArrayFile> for TuscanArray {
    type Error = Error;

    fn try_from(f: ArrayFile) -> Result<Self> {
        TuscanArray::new(f.n, f.k, f.circular, f.rows)
    }
}

impl From<TuscanArray> for ArrayFile {
    fn from(a: TuscanArray) -> Self {
        ArrayFile {
            n: a.n,
            k: a.k,
            circular: a.circular,
            rows: a.rows.into_iter().map(|r| r.map).collect(),
        }
    }
}

impl TuscanArray {
    pub fn new(n: usize, k: usize, circular: bool, rows: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::MalformedArray("n must be positive".into()));
        }
        if k > n - 1 || (k == 0 && n > 1) {
            return Err(Error::MalformedArray(format!(
                "k = {k} is outside 1..={} for n = {n}",
                n - 1
            )));
        }
        if rows.is_empty() {
            return Err(Error::MalformedArray("array has no rows".into()));
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(row, map)| {
                if map.len() != n {
                    return Err(Error::NotAPermutation {
                        row,
                        n,
                        reason: format!("row has length {}", map.len()),
                    });
                }
                check_permutation(&map).map_err(|reason| Error::NotAPermutation {
                    row,
                    n,
                    reason,
                })?;
                Ok(Permutation { map })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TuscanArray {
            n,
            k,
            circular,
            rows,
        })
    }

    /// Florentine parameters (`k = n - 1`), taking `n` from the first row.
    pub fn florentine(circular: bool, rows: Vec<Permutation>) -> Result<Self> {
        let n = rows
            .first()
            .map(|r| r.n())
            .ok_or_else(|| Error::MalformedArray("array has no rows".into()))?;
        TuscanArray::new(
            n,
            n - 1,
            circular,
            rows.into_iter().map(|r| r.map).collect(),
        )
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("array serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn circular(&self) -> bool {
        self.circular
    }

    pub fn rows(&self) -> &[Permutation] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn is_florentine(&self) -> bool {
        self.k + 1 == self.n
    }

    pub fn verify(&self) -> Verification {
        verify_tuscan(self)
    }

    /// `N^l_{(i,j)}` for rows `i` and `j` (0-based).
    pub fn coincidence_set(&self, i: usize, j: usize, l: usize) -> Result<ShiftCoincidenceSet> {
        let row = |idx: usize| {
            self.rows.get(idx).ok_or(Error::InvalidParameter(format!(
                "row index {idx} out of range for {} rows",
                self.rows.len()
            )))
        };
        let solutions = coincidences(row(i)?, row(j)?, l)?;
        Ok(ShiftCoincidenceSet { i, j, l, solutions })
    }
}

/// Check the Tuscan-k condition for the array's own `(k, circular)`.
///
/// Every `(a, b, t)` cell of the occupancy table records the first row that
/// used it; a second claimant is reported as the witness. Rows are scanned
/// in order, positions left to right, so the witness is deterministic.
pub fn verify_tuscan(array: &TuscanArray) -> Verification {
    let n = array.n;
    let k = array.k;
    let mut owner: Vec<Option<usize>> = vec![None; n * n * k.max(1)];
    for (r, row) in array.rows.iter().enumerate() {
        let p = row.as_slice();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let step = if array.circular {
                    (j + n - i) % n
                } else if j > i {
                    j - i
                } else {
                    continue;
                };
                if step > k {
                    continue;
                }
                let (a, b) = (p[i], p[j]);
                let cell = (a * n + b) * k + step - 1;
                match owner[cell] {
                    Some(prev) if prev != r => {
                        return Verification::Fail(Violation {
                            rows: (prev, r),
                            pair: (a, b),
                            step,
                        })
                    }
                    _ => owner[cell] = Some(r),
                }
            }
        }
    }
    Verification::Pass
}

/// Verify raw rows, reporting structural problems as errors rather than as
/// constraint violations.
pub fn verify_rows(
    n: usize,
    k: usize,
    circular: bool,
    rows: Vec<Vec<usize>>,
) -> Result<Verification> {
    Ok(verify_tuscan(&TuscanArray::new(n, k, circular, rows)?))
}

/// `N^l_{(i,j)}` together with the indices it was computed for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftCoincidenceSet {
    pub i: usize,
    pub j: usize,
    pub l: usize,
    pub solutions: Vec<usize>,
}

impl ShiftCoincidenceSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }
}

/// All `t` in `Z_n` with `a(t) == b((t + l) mod n)`, ascending.
pub fn coincidences(a: &Permutation, b: &Permutation, l: usize) -> Result<Vec<usize>> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::SizeMismatch {
            what: "permutation length",
            expected: n,
            found: b.n(),
        });
    }
    Ok((0..n)
        .filter(|&t| a.apply(t) == b.apply((t + l) % n))
        .collect())
}

/// The `n x n` Vatican square from the multiplication table modulo the
/// prime `n + 1`: row `i` holds `i * j mod (n + 1)` for `i, j` in `1..=n`,
/// with every entry shifted down by one so the symbols are `0..n`.
pub fn prime_construction(n: usize) -> Result<TuscanArray> {
    let p = n as u64 + 1;
    if n == 0 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let p = p as usize;
    let rows = (1..p)
        .map(|i| (1..p).map(|j| (i * j) % p - 1).collect())
        .collect();
    TuscanArray::new(n, n - 1, false, rows)
}

/// Turn a circular Florentine array on `n` symbols into a linear Florentine
/// array on `n - 1` symbols with the same number of rows.
///
/// Each row is rotated so that `drop_symbol` comes first, the symbol is
/// removed, and the symbols above it are relabeled down by one. Within the
/// remaining segment linear distance equals the original circular distance,
/// so no new coincidences appear.
pub fn circular_to_linear(array: &TuscanArray, drop_symbol: usize) -> Result<TuscanArray> {
    let n = array.n;
    if !array.circular || !array.is_florentine() {
        return Err(Error::InvalidParameter(
            "input must be a circular Florentine array".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(
            "need at least two symbols to drop one".into(),
        ));
    }
    if drop_symbol >= n {
        return Err(Error::SymbolOutOfRange {
            symbol: drop_symbol,
            n,
        });
    }
    if let Verification::Fail(violation) = verify_tuscan(array) {
        return Err(Error::NotTuscan {
            k: array.k,
            circular: true,
            violation,
        });
    }
    let rows = array
        .rows
        .iter()
        .map(|row| {
            let start = row.inverse().apply(drop_symbol);
            row.rotate_left(start).as_slice()[1..]
                .iter()
                .map(|&s| if s > drop_symbol { s - 1 } else { s })
                .collect()
        })
        .collect();
    TuscanArray::new(n - 1, n - 2, false, rows)
}

/// The circular array on `Z_p` with rows `t -> i*t mod p`, `i = 1..p-1`.
pub fn multiplicative_circular(p: usize) -> Result<TuscanArray> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    let rows = (1..p)
        .map(|i| (0..p).map(|t| (i * t) % p).collect())
        .collect();
    TuscanArray::new(p, p - 1, true, rows)
}
