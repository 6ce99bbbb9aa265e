//! Finite-dimensional density-operator dynamics: unitary evolution,
//! projective yes/no questioning, probabilistic reduction, dephasing
//! channels, and repeated-measurement (Zeno) schedules built from them.

pub mod attention;
pub mod eigen;
pub mod error;
pub mod matrix;
pub mod operators;
pub mod oscillator;
pub mod random;
pub mod reduction;
pub mod tol;
pub mod zeno;

pub use attention::{
    deterministic_hold_duration, effort_sweep, run_attention_episode, select_question,
    selection_score, ConsentSequence, EffortPolicy, EffortRow, EpisodeLog, InstantRecord,
    QuestionFamily, DEFAULT_HOLD_THRESHOLD,
};
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, ComplexVector};
pub use oscillator::{
    band_projector, band_quasiclassical_mixture, band_truncated_coherent, build_oscillator,
    coherent_state, quasiclassical_mixture, run_band_zeno, BandSpec, OscillatorSpec,
};
pub use operators::{
    hermitian_propagator, make_band_projector, partial_trace, tensor_product, validate_density,
    DensityOperator, DensityReport, Hamiltonian, Projector, SubsystemPartition,
};
pub use reduction::{
    apply_channel, basis_projectors, dephasing_channel, evolve_unitary, normalize,
    outcome_probabilities, pose_question, reduce, Answer, KrausChannel, ReductionOutcome,
    RngStream,
};
pub use zeno::{
    decoherence_invariance_report, default_interval_ladder, effective_hamiltonian,
    leakage_scaling_exponent, run_zeno_deterministic, run_zeno_sampled, single_interval_leakage,
    zeno_php_deviation, ChannelPlacement, InvarianceReport, MeasurementSchedule, SampledSurvival,
    ZenoTrajectory,
};

/// Crate version, exposed for artifact metadata written by downstream tools.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
