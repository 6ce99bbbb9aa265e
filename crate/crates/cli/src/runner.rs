//! Dispatch from a validated config to the core simulation calls, and the
//! shaping of their results into tables and summaries.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use serde_json::{json, Value};

use zenosim_core::{
    band_projector, band_truncated_coherent, basis_projectors, build_oscillator, coherent_state,
    decoherence_invariance_report, default_interval_ladder, dephasing_channel,
    deterministic_hold_duration, effort_sweep, leakage_scaling_exponent, run_band_zeno,
    run_zeno_deterministic, run_zeno_sampled, single_interval_leakage, zeno_php_deviation,
    BandSpec, ChannelPlacement, ComplexMatrix, ComplexVector, ConsentSequence, DensityOperator,
    EffortPolicy, Hamiltonian, KrausChannel, MeasurementSchedule, OscillatorSpec, Projector,
    QuestionFamily, RngStream,
};

use crate::battery::{run_battery, BatteryCheck};
use crate::config::{
    Analysis, ChannelBasis, ConsentSpec, ExperimentConfig, ExperimentKind, HamiltonianSpec,
    PlacementSpec, ProjectorSpec, ScheduleSpec, StateSpec,
};
use crate::table::{config_digest, ResultTable, RunSummary, TableMetadata};

/// A finished run: the data table and the headline summary.
pub struct RunArtifacts {
    pub table: ResultTable,
    pub summary: RunSummary,
}

impl RunArtifacts {
    /// Battery runs report failed checks here; everything else is `true`.
    pub fn all_checks_pass(&self) -> bool {
        self.summary.flag("all_pass").unwrap_or(true)
    }
}

#[derive(Debug)]
pub enum RunError {
    /// A numerical invariant broke while running.
    Core(zenosim_core::Error),
    /// A config combination the validator should have rejected.
    Unsupported(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Core(e) => write!(f, "numerical invariant violated: {e}"),
            RunError::Unsupported(m) => write!(f, "unsupported configuration: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<zenosim_core::Error> for RunError {
    fn from(e: zenosim_core::Error) -> Self {
        RunError::Core(e)
    }
}

impl From<crate::table::TableError> for RunError {
    fn from(e: crate::table::TableError) -> Self {
        // Table shape is fixed by the runner; a violation means a non-finite
        // value escaped the dynamics.
        RunError::Core(zenosim_core::Error::InvalidParameter(e.to_string()))
    }
}

type RunResult<T> = Result<T, RunError>;

fn unsupported(msg: impl Into<String>) -> RunError {
    RunError::Unsupported(msg.into())
}

/// Runs the experiment a config describes. Deterministic given the config
/// (including its seed): the emitted CSV bytes are identical across runs.
pub fn run_experiment(config: &ExperimentConfig, preset: Option<&str>) -> RunResult<RunArtifacts> {
    let started = Instant::now();
    let digest = config_digest(config);
    let mut summary = RunSummary::new(config.experiment.as_str(), digest.clone());
    summary.preset = preset.map(str::to_owned);
    summary.trials = config.trials;
    // The run seed is echoed only when the run actually draws from it.
    let consumes_rng =
        config.trials > 0 || config.experiment == ExperimentKind::AlgebraBattery;
    summary.seed = if consumes_rng { config.seed } else { None };

    let metadata = TableMetadata::new(digest);
    let mut table = match config.experiment {
        ExperimentKind::ZenoQubit => run_zeno_qubit(config, metadata, &mut summary)?,
        ExperimentKind::ZenoGeneric => run_zeno_generic(config, metadata, &mut summary)?,
        ExperimentKind::OscillatorBand => run_oscillator_band(config, metadata, &mut summary)?,
        ExperimentKind::DecoherenceInvariance => {
            run_decoherence_invariance(config, metadata, &mut summary)?
        }
        ExperimentKind::AttentionSweep => run_attention_sweep(config, metadata, &mut summary)?,
        ExperimentKind::AlgebraBattery => run_algebra_battery(config, metadata, &mut summary)?,
    };
    table.metadata.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(RunArtifacts { table, summary })
}

// ---- spec -> operator builders ------------------------------------------

fn build_hamiltonian(spec: &HamiltonianSpec, dim: usize) -> RunResult<Hamiltonian> {
    match spec {
        HamiltonianSpec::PauliX { angular_frequency } => {
            let half = angular_frequency / 2.0;
            Ok(Hamiltonian::new(ComplexMatrix::from_real(2, &[0.0, half, half, 0.0])?)?)
        }
        HamiltonianSpec::Dense { real, imag } => {
            let mut data = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    let re = real[i][j];
                    let im = imag.as_ref().map_or(0.0, |m| m[i][j]);
                    data.push(Complex64::new(re, im));
                }
            }
            Ok(Hamiltonian::new(ComplexMatrix::new(dim, dim, data)?)?)
        }
        HamiltonianSpec::Random { seed, scale } => {
            let mut rng = RngStream::new(*seed);
            Ok(zenosim_core::random::random_hermitian(dim, *scale, &mut rng)?)
        }
        HamiltonianSpec::Oscillator { omega, lambda } => {
            Ok(build_oscillator(&OscillatorSpec::new(dim, *omega, *lambda)?)?)
        }
    }
}

fn build_projector(spec: &ProjectorSpec, dim: usize) -> RunResult<Projector> {
    match spec {
        ProjectorSpec::Basis { indices } => Ok(Projector::from_basis_indices(dim, indices)?),
        ProjectorSpec::Band { n_min, n_max } => {
            Ok(band_projector(&BandSpec::new(*n_min, *n_max)?, dim)?)
        }
        ProjectorSpec::Random { rank, seed } => {
            let mut rng = RngStream::new(*seed);
            Ok(zenosim_core::random::random_projector(dim, *rank, &mut rng)?)
        }
    }
}

fn build_state(
    spec: &StateSpec,
    dim: usize,
    projector: Option<&Projector>,
    projector_spec: Option<&ProjectorSpec>,
) -> RunResult<DensityOperator> {
    match spec {
        StateSpec::Basis { index } => {
            Ok(DensityOperator::pure(&ComplexVector::basis_state(dim, *index)?)?)
        }
        StateSpec::Plus => {
            let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
            Ok(DensityOperator::pure(&ComplexVector::new(vec![amp; dim])?)?)
        }
        StateSpec::MaximallyMixed => Ok(DensityOperator::maximally_mixed(dim)?),
        StateSpec::RandomInBand { seed } => {
            let p = projector
                .ok_or_else(|| unsupported("random-in-band state without a projector"))?;
            let mut rng = RngStream::new(*seed);
            Ok(zenosim_core::random::random_density_in_subspace(p, &mut rng)?)
        }
        StateSpec::Coherent { alpha_re, alpha_im } => {
            let alpha = Complex64::new(*alpha_re, *alpha_im);
            Ok(DensityOperator::pure(&coherent_state(alpha, dim)?)?)
        }
        StateSpec::BandCoherent { alpha_re, alpha_im } => {
            let Some(ProjectorSpec::Band { n_min, n_max }) = projector_spec else {
                return Err(unsupported("band-coherent state without a band projector"));
            };
            let band = BandSpec::new(*n_min, *n_max)?;
            let alpha = Complex64::new(*alpha_re, *alpha_im);
            Ok(DensityOperator::pure(&band_truncated_coherent(alpha, &band, dim)?)?)
        }
    }
}

fn placement(spec: PlacementSpec) -> ChannelPlacement {
    match spec {
        PlacementSpec::BeforeQuestion => ChannelPlacement::BeforeQuestion,
        PlacementSpec::AfterQuestion => ChannelPlacement::AfterQuestion,
        PlacementSpec::Disabled => ChannelPlacement::Disabled,
    }
}

/// The projector family a dephasing channel is built against.
fn dephasing_basis(
    basis: ChannelBasis,
    dim: usize,
    questioned: &Projector,
) -> RunResult<Vec<Projector>> {
    match basis {
        ChannelBasis::Computational => Ok(basis_projectors(dim)?),
        ChannelBasis::ProjectorPair => {
            if questioned.rank() == dim {
                Ok(vec![questioned.clone()])
            } else {
                Ok(vec![questioned.clone(), questioned.complement()?])
            }
        }
    }
}

fn build_schedule(spec: &ScheduleSpec) -> RunResult<MeasurementSchedule> {
    Ok(MeasurementSchedule::new(
        spec.total_time,
        spec.n_steps,
        spec.channel_strength,
        placement(spec.placement),
    )?)
}

/// Channel for single-strength zeno runs, when the schedule has a slot.
fn build_channel(
    config: &ExperimentConfig,
    dim: usize,
    questioned: &Projector,
) -> RunResult<Option<KrausChannel>> {
    let Some(schedule) = &config.schedule else { return Ok(None) };
    if schedule.placement == PlacementSpec::Disabled {
        return Ok(None);
    }
    let Some(channel) = &config.channel else {
        return Err(unsupported("channel slot without a channel basis"));
    };
    let basis = dephasing_basis(channel.basis, dim, questioned)?;
    Ok(Some(dephasing_channel(&basis, schedule.channel_strength)?))
}

// ---- experiment runners ---------------------------------------------------

struct ZenoSetup {
    h: Hamiltonian,
    p: Projector,
    s0: DensityOperator,
    schedule: MeasurementSchedule,
    channel: Option<KrausChannel>,
}

fn zeno_setup(config: &ExperimentConfig) -> RunResult<ZenoSetup> {
    let dim = config.dim();
    let h = build_hamiltonian(config.hamiltonian.as_ref().unwrap(), dim)?;
    let p = build_projector(config.projector.as_ref().unwrap(), dim)?;
    let s0 = build_state(
        config.state.as_ref().unwrap(),
        dim,
        Some(&p),
        config.projector.as_ref(),
    )?;
    let schedule = build_schedule(config.schedule.as_ref().unwrap())?;
    let channel = build_channel(config, dim, &p)?;
    Ok(ZenoSetup { h, p, s0, schedule, channel })
}

/// Trajectory columns shared by the zeno-family kinds, with optional
/// sampled-survival columns when trials > 0.
fn trajectory_table(
    setup: &ZenoSetup,
    config: &ExperimentConfig,
    metadata: TableMetadata,
    summary: &mut RunSummary,
    oracle: Option<&dyn Fn(usize) -> f64>,
    use_band_runner: bool,
) -> RunResult<ResultTable> {
    let traj = if use_band_runner {
        let Some(HamiltonianSpec::Oscillator { omega, lambda }) = &config.hamiltonian else {
            return Err(unsupported("band runner without an oscillator Hamiltonian"));
        };
        let Some(ProjectorSpec::Band { n_min, n_max }) = &config.projector else {
            return Err(unsupported("band runner without a band projector"));
        };
        let spec = OscillatorSpec::new(config.dim(), *omega, *lambda)?;
        let band = BandSpec::new(*n_min, *n_max)?;
        run_band_zeno(&spec, &band, &setup.s0, &setup.schedule, setup.channel.as_ref())?
    } else {
        run_zeno_deterministic(
            &setup.s0,
            &setup.h,
            &setup.p,
            &setup.schedule,
            setup.channel.as_ref(),
        )?
    };

    let sampled = if config.trials > 0 {
        let seed = config.seed.expect("validated: seed present when trials > 0");
        Some(run_zeno_sampled(
            &setup.s0,
            &setup.h,
            &setup.p,
            &setup.schedule,
            setup.channel.as_ref(),
            &RngStream::new(seed),
            config.trials,
        )?)
    } else {
        None
    };

    let mut columns = vec![
        "time".to_string(),
        "survival".to_string(),
        "in_band_population".to_string(),
    ];
    if oracle.is_some() {
        columns.push("oracle_survival".to_string());
    }
    if sampled.is_some() {
        columns.push("sampled_survival".to_string());
        columns.push("sampled_std_err".to_string());
    }
    let mut table = ResultTable::new(columns, metadata)?;
    let mut max_oracle_dev: f64 = 0.0;
    for k in 0..traj.times.len() {
        let mut row = vec![traj.times[k], traj.survival[k], traj.in_band_population[k]];
        if let Some(f) = oracle {
            let expected = f(k);
            max_oracle_dev = max_oracle_dev.max((traj.survival[k] - expected).abs());
            row.push(expected);
        }
        if let Some(s) = &sampled {
            row.push(s.survival[k]);
            row.push(s.std_err[k]);
        }
        table.push_row(row)?;
    }

    summary.set("final_survival", *traj.survival.last().unwrap());
    summary.set("final_in_band", *traj.in_band_population.last().unwrap());
    if oracle.is_some() {
        summary.set("max_oracle_deviation", max_oracle_dev);
    }
    if let Some(s) = &sampled {
        summary.set("final_sampled_survival", *s.survival.last().unwrap());
        summary.set("final_sampled_std_err", *s.std_err.last().unwrap());
    }
    Ok(table)
}

fn run_zeno_qubit(
    config: &ExperimentConfig,
    metadata: TableMetadata,
    summary: &mut RunSummary,
) -> RunResult<ResultTable> {
    let setup = zeno_setup(config)?;
    let Some(HamiltonianSpec::PauliX { angular_frequency }) = &config.hamiltonian else {
        return Err(unsupported("zeno-qubit without the pauli-x Hamiltonian"));
    };
    // Each yes interval multiplies the survival amplitude by cos(w dt / 2).
    let per_step = (angular_frequency * setup.schedule.dt() / 2.0).cos();
    let oracle = move |k: usize| per_step.powi(2 * k as i32);
    trajectory_table(&setup, config, metadata, summary, Some(&oracle), false)
}

fn run_zeno_generic(
    config: &ExperimentConfig,
    metadata: TableMetadata,
    summary: &mut RunSummary,
) -> RunResult<ResultTable> {
    match config.analysis.as_ref().unwrap_or(&Analysis::Trajectory) {
        Analysis::Trajectory => {
            let setup = zeno_setup(config)?;
            trajectory_table(&setup, config, metadata, summary, None, false)
        }
        Analysis::LeakageScaling { intervals } => {
            run_leakage_scaling(config, intervals.as_deref(), metadata, summary)
        }
        Analysis::PhpConvergence { total_time, step_counts } => {
            run_php_convergence(config, *total_time, step_counts, metadata, summary)
        }
    }
}

fn run_leakage_scaling(
    config: &ExperimentConfig,
    intervals: Option<&[f64]>,
    metadata: TableMetadata,
    summary: &mut RunSummary,
) -> RunResult<ResultTable> {
    let dim = config.dim();
    let h = build_hamiltonian(config.hamiltonian.as_ref().unwrap(), dim)?;
    let p = build_projector(config.projector.as_ref().unwrap(), dim)?;
    let s0 = build_state(config.state.as_ref().unwrap(), dim, Some(&p), config.projector.as_ref())?;

    let ladder = match intervals {
        Some(list) => list.to_vec(),
        None => default_interval_ladder(&h)?,
    };
    let exponent = leakage_scaling_exponent(&s0, &h, &p, &ladder)?;

    let mut table = ResultTable::new(vec!["dt".into(), "leakage".into()], metadata)?;
    for &dt in &ladder {
        table.push_row(vec![dt, single_interval_leakage(&s0, &h, &p, dt)?])?;
    }
    summary.set("fitted_exponent", exponent);
    summary.set("ladder_points", ladder.len());
    Ok(table)
}

fn run_php_convergence(
    config: &ExperimentConfig,
    total_time: f64,
    step_counts: &[usize],
    metadata: TableMetadata,
    summary: &mut RunSummary,
) -> RunResult<ResultTable> {
    let dim = config.dim();
    let h = build_hamiltonian(config.hamiltonian.as_ref().unwrap(), dim)?;
    let p = build_projector(config.projector.as_ref().unwrap(), dim)?;
    let s0 = build_state(config.state.as_ref().unwrap(), dim, Some(&p), config.projector.as_ref())?;

    let mut deviations = Vec::with_capacity(step_counts.len());
    for &n in step_counts {
        deviations.push(zeno_php_deviation(&s0, &h, &p, total_time, n)?);
    }

    let mut table = ResultTable::new(vec!["n_steps".into(), "deviation".into()], metadata)?;
    for (&n, &d) in step_counts.iter().zip(&deviations) {
        table.push_row(vec![n as f64, d])?;
    }

    let mut ratios = Vec::new();
    for i in 0..step_counts.len() - 1 {
        if step_counts[i + 1] == 2 * step_counts[i] && deviations[i + 1] > 0.0 {
            ratios.push(deviations[i] / deviations[i + 1]);
        }
    }
    let monotone = deviations.windows(2).all(|w| w[1] <= w[0]);
    summary.set(
        "deviations",
        Value::Array(deviations.iter().map(|&d| json!(d)).collect()),
    );
    summary.set(
        "doubling_ratios",
        Value::Array(ratios.iter().map(|&r| json!(r)).collect()),
    );
    summary.set("monotone_decreasing", monotone);
    Ok(table)
}

fn run_oscillator_band(
    config: &ExperimentConfig,
    metadata: TableMetadata,
    summary: &mut RunSummary,
) -> RunResult<ResultTable> {
    let setup = zeno_setup(config)?;
    trajectory_table(&setup, config, metadata, summary, None, true)
}

fn run_decoherence_invariance(
    config: &ExperimentConfig,
    metadata: TableMetadata,
    summary: &mut RunSummary,
) -> RunResult<ResultTable> {
    let dim = config.dim();
    let h = build_hamiltonian(config.hamiltonian.as_ref().unwrap(), dim)?;
    let p = build_projector(config.projector.as_ref().unwrap(), dim)?;
    let s0 = build_state(config.state.as_ref().unwrap(), dim, Some(&p), config.projector.as_ref())?;
    let schedule = build_schedule(config.schedule.as_ref().unwrap())?;
    let channel = config.channel.as_ref().unwrap();
    let strengths = channel.strengths.as_ref().unwrap();
    let basis = dephasing_basis(channel.basis, dim, &p)?;

    let report = decoherence_invariance_report(&s0, &h, &p, &schedule, strengths, &basis)?;

    let mut columns = vec!["time".to_string()];
    for &s in strengths {
        columns.push(format!("survival_p{s}"));
    }
    columns.push("max_row_deviation".to_string());
    let mut table = ResultTable::new(columns, metadata)?;
    for (k, &t) in report.times.iter().enumerate() {
        let mut row = vec![t];
        for curve in &report.survival_curves {
            row.push(curve[k]);
        }
        let mut dev: f64 = 0.0;
        for i in 0..report.survival_curves.len() {
            for j in (i + 1)..report.survival_curves.len() {
                dev = dev.max((report.survival_curves[i][k] - report.survival_curves[j][k]).abs());
            }
        }
        row.push(dev);
        table.push_row(row)?;
    }

    summary.set("max_deviation", report.max_pairwise_deviation);
    summary.set("basis_compatible", report.basis_compatible);
    summary.set("commutation_defect", report.commutation_defect);
    Ok(table)
}

fn run_attention_sweep(
    config: &ExperimentConfig,
    metadata: TableMetadata,
    summary: &mut RunSummary,
) -> RunResult<ResultTable> {
    let dim = config.dim();
    let h = build_hamiltonian(config.hamiltonian.as_ref().unwrap(), dim)?;
    let s0 = build_state(config.state.as_ref().unwrap(), dim, None, None)?;
    let spec = config.attention.as_ref().unwrap();

    let candidates: Vec<Projector> = spec
        .candidates
        .iter()
        .map(|c| build_projector(c, dim))
        .collect::<RunResult<_>>()?;
    let fam = QuestionFamily::from_projectors(candidates)?;
    let consent = match &spec.consent {
        ConsentSpec::Always => ConsentSequence::Always,
        ConsentSpec::Never => ConsentSequence::Never,
        ConsentSpec::Pattern(p) => ConsentSequence::Pattern(p.clone()),
    };
    let policy =
        EffortPolicy::with_threshold(spec.base_interval, 0.0, consent, spec.threshold)?;

    let mut columns = vec![
        "effort".to_string(),
        "interval".to_string(),
        "deterministic_hold".to_string(),
    ];
    if config.trials > 0 {
        columns.push("sampled_mean".to_string());
        columns.push("sampled_std_err".to_string());
    }
    let mut table = ResultTable::new(columns, metadata)?;

    let mut det_holds = Vec::with_capacity(spec.efforts.len());
    if config.trials > 0 {
        let seed = config.seed.expect("validated: seed present when trials > 0");
        let rows = effort_sweep(
            &s0,
            &h,
            &fam,
            &policy,
            &spec.efforts,
            spec.total_time,
            config.trials,
            &RngStream::new(seed),
        )?;
        let mut sampled_monotone = true;
        for pair in rows.windows(2) {
            let slack = 2.0 * (pair[0].std_err + pair[1].std_err);
            if pair[1].mean_hold + slack < pair[0].mean_hold {
                sampled_monotone = false;
            }
        }
        for row in &rows {
            let interval = spec.base_interval / (1.0 + row.effort);
            table.push_row(vec![
                row.effort,
                interval,
                row.deterministic_hold,
                row.mean_hold,
                row.std_err,
            ])?;
            det_holds.push(row.deterministic_hold);
        }
        summary.set("sampled_monotone_within_2se", sampled_monotone);
    } else {
        for &effort in &spec.efforts {
            let hold =
                deterministic_hold_duration(&s0, &h, &fam, &policy.with_effort(effort)?, spec.total_time)?;
            let interval = spec.base_interval / (1.0 + effort);
            table.push_row(vec![effort, interval, hold])?;
            det_holds.push(hold);
        }
    }

    let det_monotone = det_holds.windows(2).all(|w| w[1] >= w[0]);
    summary.set(
        "deterministic_holds",
        Value::Array(det_holds.iter().map(|&x| json!(x)).collect()),
    );
    summary.set("deterministic_monotone", det_monotone);
    Ok(table)
}

fn run_algebra_battery(
    config: &ExperimentConfig,
    metadata: TableMetadata,
    summary: &mut RunSummary,
) -> RunResult<ResultTable> {
    let seed = config.seed.expect("validated: battery requires a seed");
    let checks = run_battery(seed);

    let mut table = ResultTable::new(
        vec!["check_id".into(), "measured".into(), "bound".into(), "pass".into()],
        metadata,
    )?;
    let mut all_pass = true;
    let mut named = serde_json::Map::new();
    for BatteryCheck { id, name, measured, bound, pass } in &checks {
        table.push_row(vec![*id as f64, *measured, *bound, if *pass { 1.0 } else { 0.0 }])?;
        all_pass &= pass;
        named.insert(
            (*name).to_string(),
            json!({ "measured": measured, "bound": bound, "pass": pass }),
        );
    }
    summary.set("all_pass", all_pass);
    summary.set("checks", Value::Object(named));
    Ok(table)
}
