//! Periodic correlation of phase sequences.
//!
//! `R_{u,v}(tau) = sum_t u(t + tau) * conj(v(t))`, indices modulo the period.
//! Phase differences are taken exactly in integers modulo `L`; only the
//! table lookup of `exp(2*pi*i*k/L)` and the summation are floating point.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::lcm;
use crate::seqgen::PhaseSeq;

/// Periods above this use the FFT path under [`Method::Auto`].
pub const NAIVE_MAX_PERIOD: usize = 4096;

/// Default relative tolerance for perfection: `max |R(tau)| < eps * P`.
pub const DEFAULT_PERFECT_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Direct `O(P^2)` summation.
    Naive,
    /// Circular correlation theorem, `O(P log P)`.
    Fft,
    /// Naive up to [`NAIVE_MAX_PERIOD`], FFT above.
    #[default]
    Auto,
}

/// `exp(2*pi*i*k/L)` for `k` in `0..L`.
#[derive(Clone, Debug)]
pub struct RootTable {
    roots: Arc<[Complex64]>,
}

impl RootTable {
    pub fn new(modulus: u64) -> Self {
        let l = modulus as f64;
        let roots = (0..modulus)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / l))
            .collect();
        RootTable { roots }
    }

    pub fn modulus(&self) -> u64 {
        self.roots.len() as u64
    }

    #[inline]
    pub fn root(&self, k: u64) -> Complex64 {
        self.roots[k as usize]
    }

    pub fn expand(&self, seq: &PhaseSeq) -> Vec<Complex64> {
        seq.phases().iter().map(|&p| self.root(p)).collect()
    }
}

/// `R(tau)` for `tau = 0..P`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationProfile {
    values: Vec<Complex64>,
}

impl CorrelationProfile {
    pub fn period(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Largest `|R(tau)|` over the given shifts, with the first shift
    /// attaining it.
    pub fn peak_over(&self, shifts: impl Iterator<Item = usize>) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for tau in shifts {
            let mag = self.values[tau].norm();
            if best.is_none_or(|(_, b)| mag > b) {
                best = Some((tau, mag));
            }
        }
        best
    }

    /// Largest magnitude over all shifts.
    pub fn peak(&self) -> (usize, f64) {
        self.peak_over(0..self.period())
            .expect("profiles are never empty")
    }

    /// Largest magnitude over `tau != 0`; `None` for period 1.
    pub fn off_peak(&self) -> Option<(usize, f64)> {
        self.peak_over(1..self.period())
    }

    /// `tau,re,im,abs` with one line per shift.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,re,im,abs\n");
        for (tau, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{tau},{},{},{}", v.re, v.im, v.norm());
        }
        out
    }
}

/// Bring two sequences to a common period check and common modulus.
fn align(u: &PhaseSeq, v: &PhaseSeq) -> Result<(PhaseSeq, PhaseSeq)> {
    if u.period() != v.period() {
        return Err(Error::SizeMismatch {
            what: "period",
            expected: u.period(),
            found: v.period(),
        });
    }
    if u.modulus() == v.modulus() {
        return Ok((u.clone(), v.clone()));
    }
    let l = lcm(u.modulus(), v.modulus());
    Ok((u.rescaled(l)?, v.rescaled(l)?))
}

/// Correlation routines sharing one root table.
#[derive(Clone, Debug)]
pub struct Correlator {
    table: RootTable,
    method: Method,
}

impl Correlator {
    pub fn new(modulus: u64, method: Method) -> Self {
        Correlator {
            table: RootTable::new(modulus),
            method,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.table.modulus()
    }

    fn check(&self, u: &PhaseSeq, v: &PhaseSeq) -> Result<()> {
        for s in [u, v] {
            if s.modulus() != self.modulus() {
                return Err(Error::SizeMismatch {
                    what: "modulus",
                    expected: self.modulus() as usize,
                    found: s.modulus() as usize,
                });
            }
        }
        if u.period() != v.period() {
            return Err(Error::SizeMismatch {
                what: "period",
                expected: u.period(),
                found: v.period(),
            });
        }
        Ok(())
    }

    pub fn xcorr(&self, u: &PhaseSeq, v: &PhaseSeq) -> Result<CorrelationProfile> {
        self.check(u, v)?;
        let use_fft = match self.method {
            Method::Naive => false,
            Method::Fft => true,
            Method::Auto => u.period() > NAIVE_MAX_PERIOD,
        };
        Ok(if use_fft {
            self.fft_unchecked(u, v)
        } else {
            self.naive_unchecked(u, v)
        })
    }

    fn naive_unchecked(&self, u: &PhaseSeq, v: &PhaseSeq) -> CorrelationProfile {
        let (up, vp) = (u.phases(), v.phases());
        let p = up.len();
        let l = self.modulus();
        let values = (0..p)
            .map(|tau| {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..p {
                    let shifted = up[if t + tau < p { t + tau } else { t + tau - p }];
                    acc += self.table.root((shifted + l - vp[t]) % l);
                }
                acc
            })
            .collect();
        CorrelationProfile { values }
    }

    fn fft_unchecked(&self, u: &PhaseSeq, v: &PhaseSeq) -> CorrelationProfile {
        let p = u.period();
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(p);
        let inverse = planner.plan_fft_inverse(p);
        let mut uu = self.table.expand(u);
        let mut vv = self.table.expand(v);
        forward.process(&mut uu);
        forward.process(&mut vv);
        // DFT(R)(k) = U(k) * conj(V(k))
        let mut spectrum: Vec<Complex64> = uu.iter().zip(&vv).map(|(a, b)| a * b.conj()).collect();
        inverse.process(&mut spectrum);
        let scale = 1.0 / p as f64;
        CorrelationProfile {
            values: spectrum.into_iter().map(|z| z * scale).collect(),
        }
    }
}

/// `R_{u,v}(tau)` at a single shift by direct summation.
pub fn xcorr_at(u: &PhaseSeq, v: &PhaseSeq, tau: usize) -> Result<Complex64> {
    let (u, v) = align(u, v)?;
    let p = u.period();
    if tau >= p {
        return Err(Error::InvalidParameter(format!(
            "shift {tau} is outside 0..{p}"
        )));
    }
    let table = RootTable::new(u.modulus());
    let l = u.modulus();
    let (up, vp) = (u.phases(), v.phases());
    Ok((0..p)
        .map(|t| table.root((up[(t + tau) % p] + l - vp[t]) % l))
        .sum())
}

/// Direct summation.
pub fn xcorr_naive(u: &PhaseSeq, v: &PhaseSeq) -> Result<CorrelationProfile> {
    let (u, v) = align(u, v)?;
    Ok(Correlator::new(u.modulus(), Method::Naive).naive_unchecked(&u, &v))
}

/// Via length-`P` DFTs.
pub fn xcorr_fft(u: &PhaseSeq, v: &PhaseSeq) -> Result<CorrelationProfile> {
    let (u, v) = align(u, v)?;
    Ok(Correlator::new(u.modulus(), Method::Fft).fft_unchecked(&u, &v))
}

pub fn xcorr(u: &PhaseSeq, v: &PhaseSeq, method: Method) -> Result<CorrelationProfile> {
    let (u, v) = align(u, v)?;
    Correlator::new(u.modulus(), method).xcorr(&u, &v)
}

pub fn autocorr(u: &PhaseSeq, method: Method) -> CorrelationProfile {
    Correlator::new(u.modulus(), method)
        .xcorr(u, u)
        .expect("a sequence matches itself")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfectionCheck {
    pub perfect: bool,
    /// Out-of-phase shift with the largest `|R(tau)|`, if the period exceeds 1.
    pub worst: Option<(usize, f64)>,
}

/// `true` iff `max_{tau != 0} |R_u(tau)| < eps * P`.
pub fn is_perfect(u: &PhaseSeq, eps: f64) -> PerfectionCheck {
    let worst = autocorr(u, Method::Auto).off_peak();
    let limit = eps * u.period() as f64;
    PerfectionCheck {
        perfect: worst.is_none_or(|(_, mag)| mag < limit),
        worst,
    }
}

/// `P * sqrt((M - 1) / (M P - 1))`; zero for a single sequence.
pub fn welch_bound(m: usize, period: usize) -> f64 {
    if m <= 1 {
        return 0.0;
    }
    let (m, p) = (m as f64, period as f64);
    p * ((m - 1.0) / (m * p - 1.0)).sqrt()
}

/// `sqrt(P)`: the least possible `R_c` for two or more perfect sequences.
pub fn sarwate_bound(period: usize) -> f64 {
    (period as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub m: usize,
    pub period: usize,
    pub r_a: f64,
    /// `0` when the family has a single member.
    pub r_c: f64,
    pub r_max: f64,
    pub welch_bound: f64,
    pub sarwate_bound: f64,
    /// `(member, tau)` attaining `r_a`.
    pub auto_witness: Option<(usize, usize)>,
    /// `(i, j, tau)` with `i < j` attaining `r_c` for `R_{s_i, s_j}`.
    pub cross_witness: Option<(usize, usize, usize)>,
}

impl FamilyStats {
    pub fn meets_welch(&self, tol: f64) -> bool {
        self.r_max >= self.welch_bound - tol
    }

    pub fn meets_sarwate(&self, tol: f64) -> bool {
        self.r_c >= self.sarwate_bound - tol
    }
}

/// Exact maxima over every member, every pair `i < j` and every shift.
///
/// Pairs are scanned in parallel on the current rayon pool; the reduction
/// keeps the first maximum in `(i, j, tau)` order, so the result does not
/// depend on scheduling. (`|R_{j,i}(tau)| = |R_{i,j}(-tau)|`, so unordered
/// pairs cover the ordered definition.)
pub fn family_stats(seqs: &[PhaseSeq], method: Method) -> Result<FamilyStats> {
    let first = seqs.first().ok_or(Error::EmptyFamily)?;
    let (period, modulus) = (first.period(), first.modulus());
    if let Some(bad) = seqs
        .iter()
        .find(|s| s.period() != period || s.modulus() != modulus)
    {
        return Err(if bad.period() != period {
            Error::SizeMismatch {
                what: "period",
                expected: period,
                found: bad.period(),
            }
        } else {
            Error::SizeMismatch {
                what: "modulus",
                expected: modulus as usize,
                found: bad.modulus() as usize,
            }
        });
    }
    let m = seqs.len();
    let corr = Correlator::new(modulus, method);

    let autos: Vec<Option<(usize, f64)>> = seqs
        .par_iter()
        .map(|s| corr.xcorr(s, s).map(|p| p.off_peak()))
        .collect::<Result<_>>()?;
    let mut r_a = 0.0;
    let mut auto_witness = None;
    for (i, w) in autos.into_iter().enumerate() {
        if let Some((tau, mag)) = w {
            if auto_witness.is_none() || mag > r_a {
                r_a = mag;
                auto_witness = Some((i, tau));
            }
        }
    }

    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let peaks: Vec<(usize, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| corr.xcorr(&seqs[i], &seqs[j]).map(|p| p.peak()))
        .collect::<Result<_>>()?;
    let mut r_c = 0.0;
    let mut cross_witness = None;
    for (&(i, j), &(tau, mag)) in pairs.iter().zip(&peaks) {
        if cross_witness.is_none() || mag > r_c {
            r_c = mag;
            cross_witness = Some((i, j, tau));
        }
    }

    Ok(FamilyStats {
        m,
        period,
        r_a,
        r_c,
        r_max: f64::max(r_a, r_c),
        welch_bound: welch_bound(m, period),
        sarwate_bound: sarwate_bound(period),
        auto_witness,
        cross_witness,
    })
}
