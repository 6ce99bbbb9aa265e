//! Numerical tolerances shared across the crate.
//!
//! All checks against these constants are on max-modulus entry defects
//! unless a function documents otherwise.

/// Hermiticity defect allowed when accepting an operator.
pub const TOL_HERM: f64 = 1e-10;

/// Eigenvalues above this floor count as nonnegative.
pub const PSD_FLOOR: f64 = -1e-10;

/// Pairwise Gram defect allowed for vectors claimed orthonormal.
pub const TOL_ORTHONORMAL: f64 = 1e-8;

/// Idempotency defect allowed for projectors.
pub const TOL_IDEMPOTENT: f64 = 1e-10;

/// Distance from an integer allowed for a projector trace.
pub const TOL_RANK: f64 = 1e-8;

/// Completeness defect allowed for a Kraus set.
pub const TOL_KRAUS: f64 = 1e-10;

/// Out-of-range slack clamped silently when turning traces into probabilities.
/// Anything worse signals corrupted state and is an error.
pub const PROB_CLAMP: f64 = 1e-12;

/// Relative defect allowed when a state must live inside a projector subspace.
pub const TOL_SUBSPACE: f64 = 1e-10;

/// Looser band-support defect accepted by the oscillator runner before it
/// falls back to projecting the tails away.
pub const TOL_BAND_SUPPORT: f64 = 1e-8;

/// Largest out-of-band trace fraction the oscillator runner will silently
/// project away; above this the initial state is rejected.
pub const MAX_BAND_TAIL: f64 = 1e-6;

/// Per-interval leakage below this is numerically zero and cannot anchor
/// a log-log scaling fit.
pub const LEAKAGE_FLOOR: f64 = 1e-14;

/// Per-interval leakage must stay below this for the small-interval
/// expansion behind the scaling fit to make sense.
pub const LEAKAGE_CEILING: f64 = 0.1;

/// Commutator defect below which a dephasing basis counts as compatible
/// with the questioned projector.
pub const TOL_COMMUTE: f64 = 1e-10;

/// Coherent amplitudes must satisfy |alpha|^2 <= dim * this ratio, keeping
/// truncation error in the discarded tail negligible.
pub const COHERENT_HEADROOM: f64 = 0.25;
