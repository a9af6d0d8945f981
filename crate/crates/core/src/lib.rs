//! Florentine arrays and the families of perfect polyphase sequences they
//! generate.
//!
//! - [`arrays`]: Tuscan-k / Florentine arrays, verification, constructions
//!   and exhaustive search.
//! - [`seqgen`]: generalized Frank, Heimiller and Frank-Zadoff sequences as
//!   exact integer phase vectors.
//! - [`correlation`]: periodic correlation (direct and FFT), perfection
//!   checks, family statistics and the Welch and Sarwate bounds.
//! - [`family`]: one sequence per array row, plus the checks that the family
//!   is perfect with cross-correlation at most `2N`.

pub mod arrays;
pub mod correlation;
pub mod error;
pub mod family;
pub mod numtheory;
pub mod seqgen;

pub use arrays::{
    circular_to_linear, coincidences, prime_construction, search_max_rows, verify_tuscan,
    Permutation, SearchBudget, SearchOptions, SearchOutcome, ShiftCoincidenceSet, TuscanArray,
    Verification, Violation,
};
pub use correlation::{
    family_stats, is_perfect, sarwate_bound, welch_bound, xcorr_fft, xcorr_naive,
    CorrelationProfile, FamilyStats, Method,
};
pub use error::{Error, Result};
pub use family::{
    build_family, cross_correlation_decomposition, sequences, verify_theorem1, FamilyMember,
    FamilySpec, Theorem1Report,
};
pub use seqgen::{gen_frank, gen_frank_zadoff, gen_heimiller, PhaseSeq, SigmaTable};
