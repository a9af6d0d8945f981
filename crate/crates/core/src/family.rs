//! Families of perfect sequences from Florentine arrays.
//!
//! Row `beta_i` of an `m x N` Florentine array gives the generalized Frank
//! sequence `s_i(t1 + N t2) = w^(N beta_i(t1) t2 + sigma(t1))`, `w` a
//! primitive `N^2`-th root of unity. Every member is perfect, and for
//! `i != j`
//!
//! ```text
//! R_{s_i,s_j}(tau1 + N tau2)
//!   = sum_{t1} w^(N beta_i(t1+tau1)(tau2 + d) + sigma(t1+tau1) - sigma(t1))
//!            * sum_{t2} w_N^((beta_i(t1+tau1) - beta_j(t1)) t2)
//! ```
//!
//! with `d = 1` iff `t1 + tau1 >= N`. The inner sum is `N` when
//! `beta_i(t1 + tau1) = beta_j(t1)` and zero otherwise, and two Florentine
//! rows agree that way for at most two `t1`, so `|R| <= 2N`.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arrays::{coincidences, verify_tuscan, Permutation, TuscanArray, Verification};
use crate::correlation::{
    family_stats, is_perfect, xcorr_at, FamilyStats, Method, RootTable, DEFAULT_PERFECT_EPS,
};
use crate::error::{Error, Result};
use crate::seqgen::{gen_frank, PhaseSeq, SigmaTable};

/// Absolute slack for the `R_c <= 2N` comparisons.
pub const BOUND_TOL: f64 = 1e-6;

/// Everything needed to rebuild a family.
///
/// JSON: `{ "N": int, "array": <array>, "sigma": [int, ...], "rows": [int, ...] }`
/// with 0-based row indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub array: TuscanArray,
    pub sigma: SigmaTable,
    pub rows: Vec<usize>,
}

impl FamilySpec {
    /// All rows of `array`.
    pub fn new(array: TuscanArray, sigma: SigmaTable) -> Self {
        let rows = (0..array.row_count()).collect();
        FamilySpec {
            n: array.n(),
            array,
            sigma,
            rows,
        }
    }

    pub fn with_rows(mut self, rows: Vec<usize>) -> Self {
        self.rows = rows;
        self
    }

    /// Check the invariants: `array` is a linear Florentine array on `N`
    /// symbols, `sigma` has `N` entries, rows are in range and distinct.
    pub fn validate(&self) -> Result<()> {
        if self.array.n() != self.n {
            return Err(Error::SizeMismatch {
                what: "array symbol count",
                expected: self.n,
                found: self.array.n(),
            });
        }
        if self.sigma.n() != self.n {
            return Err(Error::SizeMismatch {
                what: "sigma table length",
                expected: self.n,
                found: self.sigma.n(),
            });
        }
        if self.rows.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let mut seen = vec![false; self.array.row_count()];
        for &r in &self.rows {
            match seen.get_mut(r) {
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "row {r} out of range for {} rows",
                        self.array.row_count()
                    )))
                }
                Some(true) => return Err(Error::InvalidParameter(format!("row {r} repeated"))),
                Some(s) => *s = true,
            }
        }
        // A circular Florentine array is also a linear one, so the check is
        // always made against the linear condition.
        let linear = TuscanArray::new(
            self.n,
            self.n.saturating_sub(1),
            false,
            self.array
                .rows()
                .iter()
                .map(|r| r.as_slice().to_vec())
                .collect(),
        )?;
        if let Verification::Fail(violation) = verify_tuscan(&linear) {
            return Err(Error::NotTuscan {
                k: linear.k(),
                circular: false,
                violation,
            });
        }
        Ok(())
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            n: self.n,
            array_sha256: sha256_json(&self.array),
            sigma_sha256: sha256_json(&self.sigma),
            rows: self.rows.clone(),
        }
    }
}

/// Content hashes of the inputs a result was computed from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(rename = "N")]
    pub n: usize,
    pub array_sha256: String,
    pub sigma_sha256: String,
    pub rows: Vec<usize>,
}

/// SHA-256 of the compact JSON encoding, hex encoded.
pub fn sha256_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Row data a member was generated from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowMeta {
    pub index: usize,
    pub beta: Permutation,
    pub sigma: SigmaTable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyMember {
    pub seq: PhaseSeq,
    pub meta: Option<RowMeta>,
}

impl FamilyMember {
    /// A member whose generating row is unknown, e.g. one read back from CSV.
    pub fn bare(seq: PhaseSeq) -> Self {
        FamilyMember { seq, meta: None }
    }
}

/// One generalized Frank sequence per selected row, in selection order.
pub fn build_family(spec: &FamilySpec) -> Result<Vec<FamilyMember>> {
    spec.validate()?;
    spec.rows
        .par_iter()
        .map(|&index| {
            let beta = spec.array.rows()[index].clone();
            let seq = gen_frank(spec.n, &beta, &spec.sigma)?;
            Ok(FamilyMember {
                seq,
                meta: Some(RowMeta {
                    index,
                    beta,
                    sigma: spec.sigma.clone(),
                }),
            })
        })
        .collect()
}

pub fn sequences(members: &[FamilyMember]) -> Vec<PhaseSeq> {
    members.iter().map(|m| m.seq.clone()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    #[serde(rename = "N")]
    pub n: usize,
    pub period: usize,
    pub m: usize,
    pub all_perfect: bool,
    /// Members failing the perfection test, by position.
    pub imperfect: Vec<usize>,
    pub r_a: f64,
    pub r_c: f64,
    /// `2N`
    pub cross_bound: f64,
    #[serde(rename = "bound_2N_holds")]
    pub bound_2n_holds: bool,
    /// `(i, j, tau)` attaining `r_c`; `None` for a single member.
    pub witness: Option<(usize, usize, usize)>,
    pub welch_bound: f64,
    pub sarwate_bound: f64,
}

/// Check perfection of every member and `R_c <= 2N` for the family.
pub fn verify_theorem1(seqs: &[PhaseSeq], n: usize) -> Result<Theorem1Report> {
    let stats = family_stats(seqs, Method::Auto)?;
    if stats.period != n * n {
        return Err(Error::InvalidParameter(format!(
            "period {} is not N^2 = {}",
            stats.period,
            n * n
        )));
    }
    Ok(theorem1_from_stats(seqs, n, &stats))
}

pub(crate) fn theorem1_from_stats(
    seqs: &[PhaseSeq],
    n: usize,
    stats: &FamilyStats,
) -> Theorem1Report {
    let imperfect: Vec<usize> = seqs
        .par_iter()
        .enumerate()
        .filter(|(_, s)| !is_perfect(s, DEFAULT_PERFECT_EPS).perfect)
        .map(|(i, _)| i)
        .collect();
    let cross_bound = 2.0 * n as f64;
    Theorem1Report {
        n,
        period: stats.period,
        m: stats.m,
        all_perfect: imperfect.is_empty(),
        imperfect,
        r_a: stats.r_a,
        r_c: stats.r_c,
        cross_bound,
        bound_2n_holds: stats.r_c <= cross_bound + BOUND_TOL,
        witness: stats.cross_witness,
        welch_bound: stats.welch_bound,
        sarwate_bound: stats.sarwate_bound,
    }
}

/// Statistics plus the provenance of the spec they were computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub stats: FamilyStats,
    pub provenance: Provenance,
}

/// Build, measure and check a family in one go.
pub fn evaluate(spec: &FamilySpec) -> Result<(StatsReport, Theorem1Report)> {
    let members = build_family(spec)?;
    let seqs = sequences(&members);
    let stats = family_stats(&seqs, Method::Auto)?;
    let report = theorem1_from_stats(&seqs, spec.n, &stats);
    Ok((
        StatsReport {
            stats,
            provenance: spec.provenance(),
        },
        report,
    ))
}

/// `R_{s_i,s_j}(tau)` split along the coincidence set of the two rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub tau: usize,
    /// `t1` with `beta_i((t1 + tau1) mod N) = beta_j(t1)`.
    pub coincidences: Vec<usize>,
    pub coincidence_count: usize,
    /// `N * coincidence_count`
    pub predicted_bound: f64,
    /// `|R(tau)|` by direct summation over all `N^2` terms.
    pub measured: f64,
    /// `N * |sum over coincidences of the outer phase factor|`.
    pub reduced: f64,
}

/// Evaluate one shift of the cross-correlation both directly and through
/// the coincidence-restricted outer sum.
pub fn cross_correlation_decomposition(
    si: &FamilyMember,
    sj: &FamilyMember,
    n: usize,
    tau: usize,
) -> Result<Decomposition> {
    let mi = si
        .meta
        .as_ref()
        .ok_or(Error::MissingRowMetadata { index: 0 })?;
    let mj = sj
        .meta
        .as_ref()
        .ok_or(Error::MissingRowMetadata { index: 1 })?;
    let nn = n * n;
    for s in [&si.seq, &sj.seq] {
        if s.period() != nn || s.modulus() != nn as u64 {
            return Err(Error::SizeMismatch {
                what: "period",
                expected: nn,
                found: s.period(),
            });
        }
    }
    if mi.beta.n() != n || mj.beta.n() != n {
        return Err(Error::SizeMismatch {
            what: "row length",
            expected: n,
            found: mi.beta.n().max(mj.beta.n()),
        });
    }
    if tau >= nn {
        return Err(Error::InvalidParameter(format!(
            "shift {tau} is outside 0..{nn}"
        )));
    }
    let (tau1, tau2) = (tau % n, tau / n);

    // { t1 : beta_j(t1) = beta_i(t1 + tau1) }
    let hits = coincidences(&mj.beta, &mi.beta, tau1)?;

    let modulus = nn as u64;
    let table = RootTable::new(modulus);
    let outer: Complex64 = hits
        .iter()
        .map(|&t1| {
            let shifted = (t1 + tau1) % n;
            let carry = u64::from(t1 + tau1 >= n);
            let linear = n as u64 * mi.beta.apply(shifted) as u64 * (tau2 as u64 + carry);
            let phase = (linear + mi.sigma.get(shifted) + modulus - mj.sigma.get(t1)) % modulus;
            table.root(phase)
        })
        .sum();

    let measured = xcorr_at(&si.seq, &sj.seq, tau)?.norm();
    let count = hits.len();
    Ok(Decomposition {
        tau,
        coincidence_count: count,
        coincidences: hits,
        predicted_bound: (n * count) as f64,
        measured,
        reduced: n as f64 * outer.norm(),
    })
}
