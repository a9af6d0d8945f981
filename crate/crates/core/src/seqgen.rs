//! Polyphase sequences as exact integer phase vectors.
//!
//! Entry `t` of a [`PhaseSeq`] is `exp(2*pi*i * phases[t] / modulus)`. All
//! generators here work in integers; rounding only enters when correlations
//! are evaluated.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arrays::Permutation;
use crate::error::{Error, Result};
use crate::numtheory::is_prime;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PhaseSeqFile", into = "PhaseSeqFile")]
pub struct PhaseSeq {
    modulus: u64,
    phases: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PhaseSeqFile {
    modulus: u64,
    period: usize,
    phases: Vec<u64>,
}

impl TryFrom<PhaseSeqFile> for PhaseSeq {
    type Error = Error;

    fn try_from(f: PhaseSeqFile) -> Result<Self> {
        if f.period != f.phases.len() {
            return Err(Error::SizeMismatch {
                what: "period",
                expected: f.period,
                found: f.phases.len(),
            });
        }
        PhaseSeq::new(f.modulus, f.phases)
    }
}

impl From<PhaseSeq> for PhaseSeqFile {
    fn from(s: PhaseSeq) -> Self {
        PhaseSeqFile {
            modulus: s.modulus,
            period: s.phases.len(),
            phases: s.phases,
        }
    }
}

impl PhaseSeq {
    /// Phases must already be reduced modulo `modulus`.
    pub fn new(modulus: u64, phases: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidParameter("modulus must be positive".into()));
        }
        if phases.is_empty() {
            return Err(Error::InvalidParameter("period must be positive".into()));
        }
        if let Some(&phase) = phases.iter().find(|&&p| p >= modulus) {
            return Err(Error::PhaseOutOfRange { phase, modulus });
        }
        Ok(PhaseSeq { modulus, phases })
    }

    /// Reduce arbitrary integer phases modulo `modulus`.
    pub fn from_unreduced(modulus: u64, phases: impl IntoIterator<Item = i64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidParameter("modulus must be positive".into()));
        }
        let m = modulus as i64;
        PhaseSeq::new(
            modulus,
            phases.into_iter().map(|p| p.rem_euclid(m) as u64).collect(),
        )
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn period(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[u64] {
        &self.phases
    }

    /// The same sequence over modulus `target`, which must be a multiple of
    /// the current one.
    pub fn rescaled(&self, target: u64) -> Result<PhaseSeq> {
        if target == 0 || target % self.modulus != 0 {
            return Err(Error::InvalidParameter(format!(
                "modulus {target} is not a multiple of {}",
                self.modulus
            )));
        }
        let factor = target / self.modulus;
        Ok(PhaseSeq {
            modulus: target,
            phases: self.phases.iter().map(|p| p * factor).collect(),
        })
    }

    /// Every phase shifted by `c` (a global phase rotation).
    pub fn shifted(&self, c: u64) -> PhaseSeq {
        let c = c % self.modulus;
        PhaseSeq {
            modulus: self.modulus,
            phases: self.phases.iter().map(|p| (p + c) % self.modulus).collect(),
        }
    }

    /// `t,phase,modulus` with one line per entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,phase,modulus\n");
        for (t, p) in self.phases.iter().enumerate() {
            let _ = writeln!(out, "{t},{p},{}", self.modulus);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<PhaseSeq> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("t,phase,modulus") => {}
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unexpected CSV header {other:?}"
                )))
            }
        }
        let mut modulus = None;
        let mut phases = Vec::new();
        for (idx, line) in lines.enumerate() {
            let bad = || Error::InvalidParameter(format!("malformed CSV line {}: {line}", idx + 2));
            let fields: Vec<u64> = line
                .split(',')
                .map(|f| f.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            let [t, phase, m] = fields[..] else {
                return Err(bad());
            };
            if t as usize != idx || *modulus.get_or_insert(m) != m {
                return Err(bad());
            }
            phases.push(phase);
        }
        PhaseSeq::new(modulus.unwrap_or(0), phases)
    }
}

/// `sigma: Z_N -> Z_{N^2}`, indexed by `t1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct SigmaTable {
    n: usize,
    values: Vec<u64>,
}

impl TryFrom<Vec<u64>> for SigmaTable {
    type Error = Error;

    fn try_from(values: Vec<u64>) -> Result<Self> {
        SigmaTable::new(values)
    }
}

impl From<SigmaTable> for Vec<u64> {
    fn from(s: SigmaTable) -> Self {
        s.values
    }
}

impl SigmaTable {
    /// `N` is taken from the table length; values must lie below `N^2`.
    pub fn new(values: Vec<u64>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidParameter("sigma table is empty".into()));
        }
        let modulus = (n * n) as u64;
        if let Some(&phase) = values.iter().find(|&&v| v >= modulus) {
            return Err(Error::PhaseOutOfRange { phase, modulus });
        }
        Ok(SigmaTable { n, values })
    }

    pub fn zero(n: usize) -> Self {
        SigmaTable {
            n,
            values: vec![0; n],
        }
    }

    /// Uniform values in `0..N^2` drawn from a ChaCha8 stream seeded by `seed`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modulus = (n * n) as u64;
        SigmaTable {
            n,
            values: (0..n).map(|_| rng.random_range(0..modulus)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, t1: usize) -> u64 {
        self.values[t1]
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Every value shifted by `c` modulo `N^2`.
    pub fn shifted(&self, c: u64) -> SigmaTable {
        let m = (self.n * self.n) as u64;
        SigmaTable {
            n: self.n,
            values: self.values.iter().map(|v| (v + c) % m).collect(),
        }
    }
}

/// Generalized Frank sequence of period `N^2`:
/// `phase(t1 + N*t2) = N * t2 * pi(t1) + sigma(t1) mod N^2`.
pub fn gen_frank(n: usize, pi: &Permutation, sigma: &SigmaTable) -> Result<PhaseSeq> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if pi.n() != n {
        return Err(Error::SizeMismatch {
            what: "permutation length",
            expected: n,
            found: pi.n(),
        });
    }
    if sigma.n() != n {
        return Err(Error::SizeMismatch {
            what: "sigma table length",
            expected: n,
            found: sigma.n(),
        });
    }
    let nn = n as u64;
    let modulus = nn * nn;
    let mut phases = Vec::with_capacity(n * n);
    for t2 in 0..nn {
        for t1 in 0..n {
            phases.push((nn * t2 * pi.apply(t1) as u64 + sigma.get(t1)) % modulus);
        }
    }
    Ok(PhaseSeq { modulus, phases })
}

/// Heimiller's sequence for prime `N`:
/// `phase(t1 + N*t2) = N * pi(t1) * (t2 + h(t1)) mod N^2`.
pub fn gen_heimiller(n: usize, pi: &Permutation, h: &[usize]) -> Result<PhaseSeq> {
    if !is_prime(n as u64) {
        return Err(Error::NotPrime(n as u64));
    }
    if pi.n() != n {
        return Err(Error::SizeMismatch {
            what: "permutation length",
            expected: n,
            found: pi.n(),
        });
    }
    if h.len() != n {
        return Err(Error::SizeMismatch {
            what: "offset table length",
            expected: n,
            found: h.len(),
        });
    }
    if let Some(&symbol) = h.iter().find(|&&v| v >= n) {
        return Err(Error::SymbolOutOfRange { symbol, n });
    }
    let nn = n as u64;
    let modulus = nn * nn;
    let mut phases = Vec::with_capacity(n * n);
    for t2 in 0..nn {
        for t1 in 0..n {
            phases.push(nn * pi.apply(t1) as u64 * (t2 + h[t1] as u64) % modulus);
        }
    }
    Ok(PhaseSeq { modulus, phases })
}

/// The original Frank-Zadoff sequence: identity permutation, zero `sigma`.
pub fn gen_frank_zadoff(n: usize) -> Result<PhaseSeq> {
    gen_frank(n, &Permutation::identity(n), &SigmaTable::zero(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frank_n1() {
        let s = gen_frank(1, &Permutation::identity(1), &SigmaTable::zero(1)).unwrap();
        assert_eq!((s.modulus(), s.phases()), (1, &[0][..]));
    }

    #[test]
    fn frank_n2_by_hand() {
        // t = t1 + 2 t2: (0,0)->0, (1,0)->0, (0,1)->2*1*0=0, (1,1)->2*1*1=2.
        let s = gen_frank(2, &Permutation::identity(2), &SigmaTable::zero(2)).unwrap();
        assert_eq!(s.modulus(), 4);
        assert_eq!(s.phases(), &[0, 0, 0, 2]);
    }

    #[test]
    fn frank_size_mismatch() {
        let pi = Permutation::identity(3);
        assert!(matches!(
            gen_frank(4, &pi, &SigmaTable::zero(4)),
            Err(Error::SizeMismatch { .. })
        ));
        assert!(matches!(
            gen_frank(3, &pi, &SigmaTable::zero(2)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn frank_zadoff_is_frank_with_defaults() {
        assert_eq!(gen_frank_zadoff(1).unwrap().phases(), &[0]);
        assert_eq!(
            gen_frank_zadoff(2).unwrap(),
            gen_frank(2, &Permutation::identity(2), &SigmaTable::zero(2)).unwrap()
        );
        assert_eq!(gen_frank_zadoff(4).unwrap().period(), 16);
    }

    #[test]
    fn heimiller_with_zero_offsets_is_frank() {
        let pi = Permutation::new(vec![2, 4, 0, 1, 3]).unwrap();
        let h = gen_heimiller(5, &pi, &[0; 5]).unwrap();
        let f = gen_frank(5, &pi, &SigmaTable::zero(5)).unwrap();
        assert_eq!(h, f);
    }

    #[test]
    fn heimiller_is_frank_with_folded_sigma() {
        let pi = Permutation::new(vec![1, 2, 0]).unwrap();
        let h = [0, 1, 2];
        let sigma: Vec<u64> = (0..3)
            .map(|t| (3 * pi.apply(t) * h[t]) as u64 % 9)
            .collect();
        assert_eq!(
            gen_heimiller(3, &pi, &h).unwrap(),
            gen_frank(3, &pi, &SigmaTable::new(sigma).unwrap()).unwrap()
        );
    }

    #[test]
    fn heimiller_needs_prime() {
        let pi = Permutation::identity(4);
        assert!(matches!(
            gen_heimiller(4, &pi, &[0; 4]),
            Err(Error::NotPrime(4))
        ));
        assert!(gen_heimiller(2, &Permutation::identity(2), &[0, 1]).is_ok());
        assert!(gen_heimiller(3, &Permutation::identity(3), &[0, 3, 0]).is_err());
    }

    #[test]
    fn sigma_shift_shifts_every_phase() {
        let pi = Permutation::new(vec![3, 1, 0, 2]).unwrap();
        let sigma = SigmaTable::random(4, 7);
        let base = gen_frank(4, &pi, &sigma).unwrap();
        let moved = gen_frank(4, &pi, &sigma.shifted(5)).unwrap();
        assert_eq!(moved, base.shifted(5));
    }

    #[test]
    fn sigma_validation_and_seeding() {
        assert!(SigmaTable::new(vec![0, 4]).is_err());
        assert!(SigmaTable::new(vec![]).is_err());
        assert_eq!(SigmaTable::random(6, 42), SigmaTable::random(6, 42));
        assert_ne!(SigmaTable::random(6, 42), SigmaTable::random(6, 43));
        assert!(SigmaTable::random(6, 1).values().iter().all(|&v| v < 36));
    }

    #[test]
    fn phase_seq_rejects_unreduced() {
        assert!(matches!(
            PhaseSeq::new(4, vec![0, 4]),
            Err(Error::PhaseOutOfRange {
                phase: 4,
                modulus: 4
            })
        ));
        let s = PhaseSeq::from_unreduced(4, [-1, 5, 8]).unwrap();
        assert_eq!(s.phases(), &[3, 1, 0]);
    }

    #[test]
    fn rescale_to_multiple() {
        let s = PhaseSeq::new(4, vec![1, 3]).unwrap();
        assert_eq!(s.rescaled(12).unwrap().phases(), &[3, 9]);
        assert!(s.rescaled(6).is_err());
    }

    #[test]
    fn csv_layout() {
        let s = gen_frank_zadoff(2).unwrap();
        let csv = s.to_csv();
        assert_eq!(csv, "t,phase,modulus\n0,0,4\n1,0,4\n2,0,4\n3,2,4\n");
        assert_eq!(PhaseSeq::from_csv(&csv).unwrap(), s);
        assert!(PhaseSeq::from_csv("t,phase,modulus\n1,0,4\n").is_err());
        assert!(PhaseSeq::from_csv("t,phase,modulus\n0,0,4\n1,0,5\n").is_err());
        assert!(PhaseSeq::from_csv("phase\n0\n").is_err());
    }

    #[test]
    fn json_mirrors_type() {
        let s = gen_frank_zadoff(2).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"modulus":4,"period":4,"phases":[0,0,0,2]}"#);
        let back: PhaseSeq = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(
            serde_json::from_str::<PhaseSeq>(r#"{"modulus":4,"period":3,"phases":[0]}"#).is_err()
        );
    }
}
