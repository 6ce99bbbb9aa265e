//! Repeated questioning at fixed intervals, and how fast probability leaks
//! out of the questioned subspace as the intervals shrink.
//!
//! One step of the cycle is: evolve for dt, optionally decohere, ask "still
//! inside P?", optionally decohere. Tracking the always-yes branch gives the
//! survival probability; tracking the non-selective state gives the leakage
//! diagnostic. As dt -> 0 the per-step leakage is quadratic in dt, so the
//! survival probability over a fixed total time approaches one and the
//! generator is effectively replaced by its compression P H P.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::operators::{hermitian_propagator, DensityOperator, Hamiltonian, Projector};
use crate::reduction::{pose_question_matrix, reduce, Answer, KrausChannel, RngStream};
use crate::tol::{LEAKAGE_CEILING, LEAKAGE_FLOOR, TOL_COMMUTE, TOL_SUBSPACE};

/// Where the decoherence channel acts inside each measurement cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelPlacement {
    /// Evolve, decohere, question.
    BeforeQuestion,
    /// Evolve, question, decohere.
    AfterQuestion,
    /// No channel slot in the cycle.
    Disabled,
}

/// Uniform measurement schedule: `n_steps` questions over `total_time`,
/// every `dt = total_time / n_steps`.
///
/// `channel_strength` is carried for provenance (config layers build the
/// actual channel from it); the runners act on the channel instance they
/// are handed, placed according to `placement`.
#[derive(Clone, Debug)]
pub struct MeasurementSchedule {
    total_time: f64,
    n_steps: usize,
    channel_strength: f64,
    placement: ChannelPlacement,
}

impl MeasurementSchedule {
    pub fn new(
        total_time: f64,
        n_steps: usize,
        channel_strength: f64,
        placement: ChannelPlacement,
    ) -> Result<Self> {
        if !total_time.is_finite() || total_time <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "total_time must be positive and finite, got {total_time}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&channel_strength) {
            return Err(Error::InvalidParameter(format!(
                "channel_strength must lie in [0,1], got {channel_strength}"
            )));
        }
        Ok(Self {
            total_time,
            n_steps,
            channel_strength,
            placement,
        })
    }

    /// Channel-free schedule.
    pub fn without_channel(total_time: f64, n_steps: usize) -> Result<Self> {
        Self::new(total_time, n_steps, 0.0, ChannelPlacement::Disabled)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }

    pub fn channel_strength(&self) -> f64 {
        self.channel_strength
    }

    pub fn placement(&self) -> ChannelPlacement {
        self.placement
    }

    pub fn with_placement(&self, placement: ChannelPlacement) -> Self {
        Self {
            placement,
            ..self.clone()
        }
    }
}

/// Deterministic record of one schedule run. Entry k refers to the state
/// after k questions; entry 0 is the initial state.
#[derive(Clone, Debug)]
pub struct ZenoTrajectory {
    /// Question times, starting at 0.
    pub times: Vec<f64>,
    /// Probability that every question so far answered yes:
    /// Tr(always-yes branch) / Tr(S0). Non-increasing from 1.
    pub survival: Vec<f64>,
    /// Tr(P S) / Tr(S) of the non-selective state, the leakage diagnostic.
    pub in_band_population: Vec<f64>,
}

impl ZenoTrajectory {
    pub fn final_survival(&self) -> f64 {
        *self.survival.last().expect("trajectory is never empty")
    }
}

/// Monte Carlo record of repeated sampled reductions. Entry k is the
/// fraction of trials still answering yes after k questions.
#[derive(Clone, Debug)]
pub struct SampledSurvival {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    /// Binomial standard error sqrt(p(1-p)/trials) per entry.
    pub std_err: Vec<f64>,
    pub trials: usize,
}

struct StepEngine<'a> {
    u: ComplexMatrix,
    u_dag: ComplexMatrix,
    p: &'a ComplexMatrix,
    channel: Option<&'a KrausChannel>,
    placement: ChannelPlacement,
}

impl<'a> StepEngine<'a> {
    fn build(
        s0: &DensityOperator,
        h: &Hamiltonian,
        p: &'a Projector,
        schedule: &MeasurementSchedule,
        channel: Option<&'a KrausChannel>,
    ) -> Result<Self> {
        let dim = s0.dim();
        if h.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: h.dim() });
        }
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
        if let Some(c) = channel {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.dim() });
            }
        }
        let defect = p.support_defect(s0);
        let tol = TOL_SUBSPACE * s0.trace().max(1.0);
        if defect > tol {
            return Err(Error::OutsideSubspace { defect, tol });
        }
        let u = hermitian_propagator(h, schedule.dt())?;
        let u_dag = u.dagger();
        Ok(Self {
            u,
            u_dag,
            p: p.matrix(),
            channel: if schedule.placement() == ChannelPlacement::Disabled {
                None
            } else {
                channel
            },
            placement: schedule.placement(),
        })
    }

    fn evolve(&self, m: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::mul3(&self.u, m, &self.u_dag)
    }

    fn channel_before(&self, m: ComplexMatrix) -> ComplexMatrix {
        match (self.placement, self.channel) {
            (ChannelPlacement::BeforeQuestion, Some(c)) => c.apply_matrix(&m),
            _ => m,
        }
    }

    fn channel_after(&self, m: ComplexMatrix) -> ComplexMatrix {
        match (self.placement, self.channel) {
            (ChannelPlacement::AfterQuestion, Some(c)) => c.apply_matrix(&m),
            _ => m,
        }
    }

    /// Full cycle on the always-yes branch: keep only P..P.
    fn step_selective(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let moved = self.channel_before(self.evolve(m));
        let kept = ComplexMatrix::mul3(self.p, &moved, self.p);
        self.channel_after(kept)
    }

    /// Full cycle on the non-selective state: both branches kept.
    fn step_nonselective(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let moved = self.channel_before(self.evolve(m));
        let posed = pose_question_matrix(&moved, self.p);
        self.channel_after(posed)
    }
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn schedule_times(schedule: &MeasurementSchedule) -> Vec<f64> {
    let n = schedule.n_steps();
    let dt = schedule.dt();
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    times[n] = schedule.total_time();
    times
}

/// Runs the schedule exactly (no sampling): the always-yes branch for the
/// survival curve and the non-selective state for in-band population.
///
/// Requires S0 inside the range of P: P S0 P = S0 within `TOL_SUBSPACE`
/// scaled by Tr(S0).
pub fn run_zeno_deterministic(
    s0: &DensityOperator,
    h: &Hamiltonian,
    p: &Projector,
    schedule: &MeasurementSchedule,
    channel: Option<&KrausChannel>,
) -> Result<ZenoTrajectory> {
    let engine = StepEngine::build(s0, h, p, schedule, channel)?;
    let tr0 = s0.trace();
    let mut yes = s0.matrix().clone();
    let mut ns = s0.matrix().clone();

    let times = schedule_times(schedule);
    let mut survival = Vec::with_capacity(times.len());
    let mut in_band = Vec::with_capacity(times.len());
    survival.push(1.0);
    in_band.push(clamp_unit(engine.p.mul(&ns).trace().re / tr0));

    for _ in 0..schedule.n_steps() {
        yes = engine.step_selective(&yes);
        ns = engine.step_nonselective(&ns);
        survival.push(clamp_unit(yes.trace().re / tr0));
        let ns_trace = ns.trace().re;
        in_band.push(clamp_unit(engine.p.mul(&ns).trace().re / ns_trace));
    }

    Ok(ZenoTrajectory {
        times,
        survival,
        in_band_population: in_band,
    })
}

/// Monte Carlo version: every trial runs its own reduction sequence on an
/// independent substream of `rng`, and a trial ends at its first no answer.
/// The survival estimate converges on the deterministic curve.
pub fn run_zeno_sampled(
    s0: &DensityOperator,
    h: &Hamiltonian,
    p: &Projector,
    schedule: &MeasurementSchedule,
    channel: Option<&KrausChannel>,
    rng: &RngStream,
    trials: usize,
) -> Result<SampledSurvival> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let engine = StepEngine::build(s0, h, p, schedule, channel)?;
    let n = schedule.n_steps();
    let mut alive_counts = vec![0u64; n + 1];
    alive_counts[0] = trials as u64;

    for trial in 0..trials {
        let mut stream = rng.substream(trial as u64);
        let mut m = s0.matrix().clone();
        for k in 1..=n {
            let moved = engine.channel_before(engine.evolve(&m));
            let state = DensityOperator::from_positive_map(moved)?;
            let outcome = reduce(&state, p, &mut stream)?;
            if outcome.answer == Answer::No {
                break;
            }
            m = engine.channel_after(outcome.posterior.matrix().clone());
            alive_counts[k] += 1;
        }
    }

    let times = schedule_times(schedule);
    let survival: Vec<f64> = alive_counts
        .iter()
        .map(|&c| c as f64 / trials as f64)
        .collect();
    let std_err = survival
        .iter()
        .map(|&s| (s * (1.0 - s) / trials as f64).sqrt())
        .collect();
    Ok(SampledSurvival {
        times,
        survival,
        std_err,
        trials,
    })
}

/// The compressed generator P H P that the dynamics approaches in the
/// frequent-questioning limit.
pub fn effective_hamiltonian(h: &Hamiltonian, p: &Projector) -> Result<Hamiltonian> {
    if h.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: p.dim(),
        });
    }
    Hamiltonian::new(ComplexMatrix::mul3(p.matrix(), h.matrix(), p.matrix()))
}

/// Max-entry distance between the normalized always-yes state after
/// `n_steps` questions over `total_time` and the state propagated for the
/// same time by the compressed generator P H P. Shrinks linearly in dt.
pub fn zeno_php_deviation(
    s0: &DensityOperator,
    h: &Hamiltonian,
    p: &Projector,
    total_time: f64,
    n_steps: usize,
) -> Result<f64> {
    let schedule = MeasurementSchedule::without_channel(total_time, n_steps)?;
    let engine = StepEngine::build(s0, h, p, &schedule, None)?;
    let mut yes = s0.matrix().clone();
    for _ in 0..n_steps {
        yes = engine.step_selective(&yes);
    }
    let tr = yes.trace().re;
    if !(tr > 0.0) {
        return Err(Error::NonPositiveTrace(tr));
    }
    let actual = yes.scale_real(1.0 / tr);

    let h_eff = effective_hamiltonian(h, p)?;
    let u_eff = hermitian_propagator(&h_eff, total_time)?;
    let ideal_raw = s0.matrix().conjugate_by(&u_eff);
    let ideal = ideal_raw.scale_real(1.0 / ideal_raw.trace().re);

    Ok(actual.max_abs_diff(&ideal))
}

/// Probability lost out of the range of P over one free-evolution interval,
/// starting from S0 inside the range: 1 - Tr(P U S0 U^dag P) / Tr(S0).
pub fn single_interval_leakage(
    s0: &DensityOperator,
    h: &Hamiltonian,
    p: &Projector,
    dt: f64,
) -> Result<f64> {
    let u = hermitian_propagator(h, dt)?;
    let moved = s0.matrix().conjugate_by(&u);
    let kept = ComplexMatrix::mul3(p.matrix(), &moved, p.matrix());
    Ok(clamp_unit(1.0 - kept.trace().re / s0.trace()))
}

/// Fits leakage(dt) ~ C dt^x over a ladder of interval lengths by least
/// squares on log(leakage) against log(dt) and returns the exponent x.
///
/// The ladder needs at least four positive values spanning at least a
/// decade. Per-interval leakage must stay in (`LEAKAGE_FLOOR`,
/// `LEAKAGE_CEILING`): below the floor the dynamics commutes with P and the
/// fit is degenerate, above the ceiling the intervals are too coarse for a
/// power law to mean anything.
pub fn leakage_scaling_exponent(
    s0: &DensityOperator,
    h: &Hamiltonian,
    p: &Projector,
    intervals: &[f64],
) -> Result<f64> {
    if intervals.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 interval lengths, got {}",
            intervals.len()
        )));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for &dt in intervals {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidParameter(format!("bad interval length {dt}")));
        }
        lo = lo.min(dt);
        hi = hi.max(dt);
    }
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "interval ladder must span at least a decade, got ratio {:.3}",
            hi / lo
        )));
    }
    let defect = p.support_defect(s0);
    let tol = TOL_SUBSPACE * s0.trace().max(1.0);
    if defect > tol {
        return Err(Error::OutsideSubspace { defect, tol });
    }

    let mut points = Vec::with_capacity(intervals.len());
    for &dt in intervals {
        let leak = single_interval_leakage(s0, h, p, dt)?;
        if leak < LEAKAGE_FLOOR {
            return Err(Error::DegenerateFit(format!(
                "leakage {leak:.3e} at dt={dt:.3e} is below the measurable floor; \
                 the dynamics does not leave the subspace"
            )));
        }
        if leak > LEAKAGE_CEILING {
            return Err(Error::InvalidParameter(format!(
                "per-interval leakage {leak:.3} at dt={dt:.3e} exceeds {LEAKAGE_CEILING}; \
                 use shorter intervals"
            )));
        }
        points.push((dt.ln(), leak.ln()));
    }

    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("interval ladder has no spread".into()));
    }
    Ok(sxy / sxx)
}

/// Geometric ladder {0.1, 0.05, 0.025, 0.0125, 0.00625} / spectral_radius(H):
/// five points spanning a 16x range, all well inside the small-leakage
/// regime for generic in-band states.
pub fn default_interval_ladder(h: &Hamiltonian) -> Result<Vec<f64>> {
    let radius = h.spectral_radius()?;
    if radius <= 0.0 {
        return Err(Error::InvalidParameter(
            "Hamiltonian is zero; it sets no time scale".into(),
        ));
    }
    Ok([0.1, 0.05, 0.025, 0.0125, 0.00625]
        .iter()
        .map(|&x| x / radius)
        .collect())
}

/// Survival curves for one schedule swept over dephasing strengths, with
/// the worst pairwise disagreement across the sweep.
#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub strengths: Vec<f64>,
    pub times: Vec<f64>,
    /// One survival curve per strength, same order.
    pub survival_curves: Vec<Vec<f64>>,
    /// Largest |survival_i[k] - survival_j[k]| over strength pairs and steps.
    pub max_pairwise_deviation: f64,
    /// Whether every dephasing projector commutes with the questioned P.
    pub basis_compatible: bool,
    pub commutation_defect: f64,
}

/// Runs the same Zeno schedule under dephasing channels of the given
/// strengths (built against `basis`) and reports how much the survival
/// curves disagree.
///
/// When the dephasing basis commutes with P (pointer decoherence recording
/// the question's answer), the curves coincide: decoherence does not touch
/// the suppression. A non-commuting basis is allowed and simply reported as
/// incompatible; its curves will generally spread.
pub fn decoherence_invariance_report(
    s0: &DensityOperator,
    h: &Hamiltonian,
    p: &Projector,
    schedule: &MeasurementSchedule,
    strengths: &[f64],
    basis: &[Projector],
) -> Result<InvarianceReport> {
    if strengths.is_empty() {
        return Err(Error::EmptyInput("need at least one dephasing strength"));
    }
    if schedule.placement() == ChannelPlacement::Disabled {
        return Err(Error::InvalidParameter(
            "invariance sweep needs a channel slot; schedule placement is disabled".into(),
        ));
    }

    let mut commutation_defect: f64 = 0.0;
    for pi in basis {
        let comm = pi
            .matrix()
            .mul(p.matrix())
            .sub(&p.matrix().mul(pi.matrix()));
        commutation_defect = commutation_defect.max(comm.max_abs());
    }

    let mut survival_curves = Vec::with_capacity(strengths.len());
    let mut times = Vec::new();
    for &strength in strengths {
        let channel = crate::reduction::dephasing_channel(basis, strength)?;
        let traj = run_zeno_deterministic(s0, h, p, schedule, Some(&channel))?;
        times = traj.times;
        survival_curves.push(traj.survival);
    }

    let mut max_dev: f64 = 0.0;
    for i in 0..survival_curves.len() {
        for j in (i + 1)..survival_curves.len() {
            for (a, b) in survival_curves[i].iter().zip(&survival_curves[j]) {
                max_dev = max_dev.max((a - b).abs());
            }
        }
    }

    Ok(InvarianceReport {
        strengths: strengths.to_vec(),
        times,
        survival_curves,
        max_pairwise_deviation: max_dev,
        basis_compatible: commutation_defect <= TOL_COMMUTE,
        commutation_defect,
    })
}
