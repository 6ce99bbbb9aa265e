//! Named, self-contained experiment configs. Together they exercise every
//! claim the test suite checks: suppression under frequent questioning, the
//! quadratic leakage law, convergence to the compressed generator,
//! decoherence invariance, the algebra battery, and the effort sweep.

use std::f64::consts::PI;

use crate::config::{
    Analysis, AttentionSpec, ChannelBasis, ChannelSpec, ConsentSpec, ExperimentConfig,
    ExperimentKind, HamiltonianSpec, PlacementSpec, ProjectorSpec, ScheduleSpec, StateSpec,
};

/// A named ready-to-run config.
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

fn empty_config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        experiment: kind,
        dimension: None,
        hamiltonian: None,
        projector: None,
        state: None,
        schedule: None,
        channel: None,
        attention: None,
        analysis: None,
        seed: None,
        trials: 0,
        output: None,
    }
}

fn qubit_benchmark(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        dimension: Some(2),
        hamiltonian: Some(HamiltonianSpec::PauliX { angular_frequency: PI }),
        projector: Some(ProjectorSpec::Basis { indices: vec![0] }),
        state: Some(StateSpec::Basis { index: 0 }),
        ..empty_config(kind)
    }
}

fn schedule(total_time: f64, n_steps: usize, placement: PlacementSpec) -> ScheduleSpec {
    ScheduleSpec {
        total_time,
        n_steps,
        placement,
        channel_strength: 0.0,
    }
}

/// All shipped presets, in listing order.
pub fn all_presets() -> Vec<Preset> {
    vec![
        Preset {
            name: "zeno-qubit",
            description: "Two-level benchmark: 100 questions over unit time against the \
                          ground projector, with the closed-form survival for comparison.",
            config: ExperimentConfig {
                schedule: Some(schedule(1.0, 100, PlacementSpec::Disabled)),
                ..qubit_benchmark(ExperimentKind::ZenoQubit)
            },
        },
        Preset {
            name: "leakage-qubit",
            description: "Per-interval leakage of the two-level benchmark over a dt ladder, \
                          with the fitted log-log exponent (expected 2).",
            config: ExperimentConfig {
                analysis: Some(Analysis::LeakageScaling { intervals: None }),
                ..qubit_benchmark(ExperimentKind::ZenoGeneric)
            },
        },
        Preset {
            name: "leakage-random8",
            description: "Per-interval leakage of a seeded random 8-dimensional instance \
                          (rank-3 question), with the fitted log-log exponent (expected 2).",
            config: ExperimentConfig {
                dimension: Some(8),
                hamiltonian: Some(HamiltonianSpec::Random { seed: 7001, scale: 1.0 }),
                projector: Some(ProjectorSpec::Random { rank: 3, seed: 7002 }),
                state: Some(StateSpec::RandomInBand { seed: 7003 }),
                analysis: Some(Analysis::LeakageScaling { intervals: None }),
                ..empty_config(ExperimentKind::ZenoGeneric)
            },
        },
        Preset {
            name: "php-three-level",
            description: "Distance between the frequently questioned state and propagation \
                          by the compressed generator on a three-level system with a rank-2 \
                          question, halving as the step count doubles.",
            config: ExperimentConfig {
                dimension: Some(3),
                hamiltonian: Some(HamiltonianSpec::Random { seed: 4242, scale: 1.0 }),
                projector: Some(ProjectorSpec::Basis { indices: vec![0, 1] }),
                state: Some(StateSpec::Basis { index: 0 }),
                analysis: Some(Analysis::PhpConvergence {
                    total_time: 1.0,
                    step_counts: vec![5, 10, 20, 40, 80],
                }),
                ..empty_config(ExperimentKind::ZenoGeneric)
            },
        },
        Preset {
            name: "decoherence-qubit",
            description: "Survival curves of the two-level benchmark under computational-basis \
                          dephasing of strength 0, 0.25, 0.5, and 1: the curves coincide.",
            config: ExperimentConfig {
                schedule: Some(schedule(1.0, 50, PlacementSpec::AfterQuestion)),
                channel: Some(ChannelSpec {
                    basis: ChannelBasis::Computational,
                    strengths: Some(vec![0.0, 0.25, 0.5, 1.0]),
                }),
                ..qubit_benchmark(ExperimentKind::DecoherenceInvariance)
            },
        },
        Preset {
            name: "decoherence-oscillator",
            description: "Survival curves of the driven-oscillator band benchmark (dimension \
                          32, drive 0.2, band 8..=16) under answer-recording dephasing of \
                          strength 0, 0.25, 0.5, and 1: the curves coincide.",
            config: ExperimentConfig {
                dimension: Some(32),
                hamiltonian: Some(HamiltonianSpec::Oscillator { omega: 1.0, lambda: 0.2 }),
                projector: Some(ProjectorSpec::Band { n_min: 8, n_max: 16 }),
                state: Some(StateSpec::BandCoherent {
                    alpha_re: 12.0_f64.sqrt(), // mean occupancy 12, mid-band
                    alpha_im: 0.0,
                }),
                schedule: Some(schedule(1.0, 50, PlacementSpec::AfterQuestion)),
                channel: Some(ChannelSpec {
                    basis: ChannelBasis::ProjectorPair,
                    strengths: Some(vec![0.0, 0.25, 0.5, 1.0]),
                }),
                ..empty_config(ExperimentKind::DecoherenceInvariance)
            },
        },
        Preset {
            name: "oscillator-band",
            description: "Band survival of the driven oscillator (dimension 32, drive 0.2, \
                          band 8..=16) under 100 questions over unit time.",
            config: ExperimentConfig {
                dimension: Some(32),
                hamiltonian: Some(HamiltonianSpec::Oscillator { omega: 1.0, lambda: 0.2 }),
                projector: Some(ProjectorSpec::Band { n_min: 8, n_max: 16 }),
                state: Some(StateSpec::BandCoherent {
                    alpha_re: 12.0_f64.sqrt(),
                    alpha_im: 0.0,
                }),
                schedule: Some(schedule(1.0, 100, PlacementSpec::Disabled)),
                ..empty_config(ExperimentKind::OscillatorBand)
            },
        },
        Preset {
            name: "attention-sweep",
            description: "Hold duration of the two-level benchmark versus effort 0, 1, 4, 9: \
                          branch-keeping expectation next to 1000 sampled episodes per effort.",
            config: ExperimentConfig {
                dimension: Some(2),
                hamiltonian: Some(HamiltonianSpec::PauliX { angular_frequency: PI }),
                state: Some(StateSpec::Basis { index: 0 }),
                attention: Some(AttentionSpec {
                    base_interval: 0.25,
                    efforts: vec![0.0, 1.0, 4.0, 9.0],
                    threshold: 0.9,
                    consent: ConsentSpec::Always,
                    total_time: 1.0,
                    candidates: vec![ProjectorSpec::Basis { indices: vec![0] }],
                }),
                seed: Some(5150),
                trials: 1000,
                ..empty_config(ExperimentKind::AttentionSweep)
            },
        },
        Preset {
            name: "algebra-battery",
            description: "Seeded self-checks: reduction statistics, question algebra, \
                          partial-trace oracles, and selection against exhaustive scoring.",
            config: ExperimentConfig {
                seed: Some(90210),
                ..empty_config(ExperimentKind::AlgebraBattery)
            },
        },
    ]
}

/// Looks a preset up by name.
pub fn find_preset(name: &str) -> Option<Preset> {
    all_presets().into_iter().find(|p| p.name == name)
}
