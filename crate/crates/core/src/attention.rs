//! Question selection and effort-modulated questioning rate: the mind-side
//! policy with exactly two free variables, consent and effort.
//!
//! At each instant the policy scores every candidate question P by
//! Tr(P S_b) / Tr(S_b) (optionally on a reduced subsystem), attends to the
//! argmax, and, when consent is given, actually poses it as a sampled
//! reduction. Effort shortens the spacing of the instants, dt(e) =
//! dt0 / (1 + e), and the Zeno effect turns that higher questioning rate
//! into a longer hold on the attended state.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::operators::{
    hermitian_propagator, partial_trace, DensityOperator, Hamiltonian, Projector,
    SubsystemPartition,
};
use crate::reduction::{Answer, RngStream};

/// Ordered candidate questions, all of one dimension, with display labels.
#[derive(Clone, Debug)]
pub struct QuestionFamily {
    candidates: Vec<Projector>,
    labels: Vec<String>,
}

impl QuestionFamily {
    pub fn new(candidates: Vec<Projector>, labels: Vec<String>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::EmptyInput("question family must be nonempty"));
        }
        if candidates.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: candidates.len(),
                got: labels.len(),
            });
        }
        let dim = candidates[0].dim();
        for p in &candidates {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        Ok(Self { candidates, labels })
    }

    /// Labels generated as q0, q1, ...
    pub fn from_projectors(candidates: Vec<Projector>) -> Result<Self> {
        let labels = (0..candidates.len()).map(|i| format!("q{i}")).collect();
        Self::new(candidates, labels)
    }

    pub fn candidates(&self) -> &[Projector] {
        &self.candidates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.candidates[0].dim()
    }
}

/// Per-instant consent: attend-and-ask, or let the state run free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConsentSequence {
    Always,
    Never,
    /// Cycled over the instants.
    Pattern(Vec<bool>),
}

impl ConsentSequence {
    fn at(&self, instant: usize) -> bool {
        match self {
            ConsentSequence::Always => true,
            ConsentSequence::Never => false,
            ConsentSequence::Pattern(p) => p[instant % p.len()],
        }
    }
}

/// Questioning-rate policy: instants every dt(e) = base_interval / (1 + e),
/// gated by the consent sequence, with the dwell threshold used for
/// hold-duration bookkeeping.
#[derive(Clone, Debug)]
pub struct EffortPolicy {
    base_interval: f64,
    effort: f64,
    consent: ConsentSequence,
    hold_threshold: f64,
    explicit_instants: Option<Vec<f64>>,
}

pub const DEFAULT_HOLD_THRESHOLD: f64 = 0.9;

impl EffortPolicy {
    pub fn new(base_interval: f64, effort: f64, consent: ConsentSequence) -> Result<Self> {
        Self::with_threshold(base_interval, effort, consent, DEFAULT_HOLD_THRESHOLD)
    }

    pub fn with_threshold(
        base_interval: f64,
        effort: f64,
        consent: ConsentSequence,
        hold_threshold: f64,
    ) -> Result<Self> {
        if !base_interval.is_finite() || base_interval <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "base_interval must be positive, got {base_interval}"
            )));
        }
        if !effort.is_finite() || effort < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "effort must be nonnegative, got {effort}"
            )));
        }
        if !(0.0..=1.0).contains(&hold_threshold) {
            return Err(Error::InvalidParameter(format!(
                "hold_threshold must lie in [0,1], got {hold_threshold}"
            )));
        }
        if let ConsentSequence::Pattern(p) = &consent {
            if p.is_empty() {
                return Err(Error::EmptyInput("consent pattern must be nonempty"));
            }
        }
        Ok(Self {
            base_interval,
            effort,
            consent,
            hold_threshold,
            explicit_instants: None,
        })
    }

    /// Replaces the uniform spacing with an explicit increasing list of
    /// question times; the last one must equal the episode length.
    pub fn with_explicit_instants(mut self, instants: Vec<f64>) -> Result<Self> {
        if instants.is_empty() {
            return Err(Error::EmptyInput("instant list must be nonempty"));
        }
        let mut prev = 0.0;
        for &t in &instants {
            if !t.is_finite() || t <= prev {
                return Err(Error::InvalidParameter(format!(
                    "instants must be finite and strictly increasing from 0, got {t} after {prev}"
                )));
            }
            prev = t;
        }
        self.explicit_instants = Some(instants);
        Ok(self)
    }

    pub fn effort(&self) -> f64 {
        self.effort
    }

    pub fn with_effort(&self, effort: f64) -> Result<Self> {
        let mut out = self.clone();
        if !effort.is_finite() || effort < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "effort must be nonnegative, got {effort}"
            )));
        }
        out.effort = effort;
        Ok(out)
    }

    pub fn hold_threshold(&self) -> f64 {
        self.hold_threshold
    }

    pub fn consent(&self) -> &ConsentSequence {
        &self.consent
    }

    /// Spacing under the current effort.
    pub fn interval(&self) -> f64 {
        self.base_interval / (1.0 + self.effort)
    }

    /// Question times over (0, total_time], ending exactly at total_time.
    fn instants(&self, total_time: f64) -> Result<Vec<f64>> {
        if let Some(list) = &self.explicit_instants {
            let last = *list.last().expect("validated nonempty");
            if (last - total_time).abs() > 1e-9 * total_time.max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "explicit instants must end at the episode length {total_time}, got {last}"
                )));
            }
            return Ok(list.clone());
        }
        let dt = self.interval();
        let m = (total_time / dt + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (1..=m).map(|k| k as f64 * dt).collect();
        match times.last() {
            Some(&last) if last >= total_time * (1.0 - 1e-12) => {
                let n = times.len();
                times[n - 1] = total_time;
            }
            _ => times.push(total_time),
        }
        Ok(times)
    }
}

/// What happened at one instant: the question that won the attention
/// contest, its pre-question score, and the sampled answer when consent
/// was given.
#[derive(Clone, Debug)]
pub struct InstantRecord {
    pub time: f64,
    pub consented: bool,
    pub selected: usize,
    /// Tr(P S_b)/Tr(S_b) of the selected candidate just before questioning.
    pub score: f64,
    pub answer: Option<Answer>,
}

/// Full episode record. `hold_duration` is the total time the selected
/// question's score stayed at or above the policy threshold, attributing
/// each inter-instant segment to the score measured at its end.
#[derive(Clone, Debug)]
pub struct EpisodeLog {
    pub records: Vec<InstantRecord>,
    pub hold_duration: f64,
    pub hold_threshold: f64,
    pub final_state: DensityOperator,
}

fn scores_against(state: &ComplexMatrix, fam: &QuestionFamily) -> Result<Vec<f64>> {
    let total = state.trace().re;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::NonPositiveTrace(total));
    }
    fam.candidates()
        .iter()
        .map(|p| {
            let w = p.matrix().mul(state).trace().re / total;
            if !w.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&w) {
                return Err(Error::ProbabilityOutOfRange(w));
            }
            Ok(w.clamp(0.0, 1.0))
        })
        .collect()
}

fn argmax_lowest(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn reduced_state(s: &DensityOperator, part: Option<&SubsystemPartition>) -> Result<DensityOperator> {
    match part {
        Some(p) => partial_trace(s, p),
        None => Ok(s.clone()),
    }
}

/// Index of the candidate maximizing Tr(P S_b)/Tr(S_b); ties go to the
/// lowest index. With a partition, scores are taken on the kept subsystem.
pub fn select_question(
    s: &DensityOperator,
    fam: &QuestionFamily,
    part: Option<&SubsystemPartition>,
) -> Result<usize> {
    let sb = reduced_state(s, part)?;
    if fam.dim() != sb.dim() {
        return Err(Error::DimensionMismatch {
            expected: sb.dim(),
            got: fam.dim(),
        });
    }
    let scores = scores_against(sb.matrix(), fam)?;
    Ok(argmax_lowest(&scores))
}

/// The selection ratio Tr(P S_b)/Tr(S_b) itself.
pub fn selection_score(
    s: &DensityOperator,
    p: &Projector,
    part: Option<&SubsystemPartition>,
) -> Result<f64> {
    let sb = reduced_state(s, part)?;
    if p.dim() != sb.dim() {
        return Err(Error::DimensionMismatch {
            expected: sb.dim(),
            got: p.dim(),
        });
    }
    let fam = QuestionFamily::new(vec![p.clone()], vec!["score".into()])?;
    Ok(scores_against(sb.matrix(), &fam)?[0])
}

struct EpisodeEngine {
    segments: Vec<(f64, ComplexMatrix)>, // (segment length, propagator)
    times: Vec<f64>,
}

impl EpisodeEngine {
    fn build(h: &Hamiltonian, policy: &EffortPolicy, total_time: f64) -> Result<Self> {
        if !total_time.is_finite() || total_time <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "episode length must be positive, got {total_time}"
            )));
        }
        let times = policy.instants(total_time)?;
        let mut segments = Vec::with_capacity(times.len());
        let mut prev = 0.0;
        let mut cache: Vec<(f64, ComplexMatrix)> = Vec::new();
        for &t in &times {
            let len = t - prev;
            prev = t;
            let u = match cache.iter().find(|(l, _)| (l - len).abs() < 1e-15) {
                Some((_, u)) => u.clone(),
                None => {
                    let u = hermitian_propagator(h, len)?;
                    cache.push((len, u.clone()));
                    u
                }
            };
            segments.push((len, u));
        }
        Ok(Self { segments, times })
    }
}

/// Runs one sampled attention episode: evolve to each instant, score the
/// family, and (given consent) reduce on the winning question.
pub fn run_attention_episode(
    s0: &DensityOperator,
    h: &Hamiltonian,
    fam: &QuestionFamily,
    policy: &EffortPolicy,
    total_time: f64,
    rng: &mut RngStream,
) -> Result<EpisodeLog> {
    let dim = s0.dim();
    if h.dim() != dim || fam.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: if h.dim() != dim { h.dim() } else { fam.dim() },
        });
    }
    let engine = EpisodeEngine::build(h, policy, total_time)?;

    let mut m = s0.matrix().clone();
    let mut records = Vec::with_capacity(engine.times.len());
    let mut hold = 0.0;
    for (k, ((len, u), &t)) in engine.segments.iter().zip(&engine.times).enumerate() {
        m = ComplexMatrix::mul3(u, &m, &u.dagger());
        let scores = scores_against(&m, fam)?;
        let selected = argmax_lowest(&scores);
        let score = scores[selected];
        if score >= policy.hold_threshold() {
            hold += len;
        }
        let consented = policy.consent.at(k);
        let mut answer = None;
        if consented {
            let p = fam.candidates()[selected].matrix();
            let draw = rng.next_uniform();
            if draw < score {
                m = ComplexMatrix::mul3(p, &m, p);
                answer = Some(Answer::Yes);
            } else {
                let q = ComplexMatrix::identity(dim).sub(p);
                m = ComplexMatrix::mul3(&q, &m, &q);
                answer = Some(Answer::No);
            }
        }
        records.push(InstantRecord {
            time: t,
            consented,
            selected,
            score,
            answer,
        });
    }

    Ok(EpisodeLog {
        records,
        hold_duration: hold,
        hold_threshold: policy.hold_threshold(),
        final_state: DensityOperator::from_positive_map(m)?,
    })
}

/// Branch-keeping (deterministic) hold duration: the exact expectation of
/// the sampled hold when no-branches never rescore above threshold. Each
/// segment contributes its length weighted by the probability that every
/// answer so far was yes.
pub fn deterministic_hold_duration(
    s0: &DensityOperator,
    h: &Hamiltonian,
    fam: &QuestionFamily,
    policy: &EffortPolicy,
    total_time: f64,
) -> Result<f64> {
    let dim = s0.dim();
    if h.dim() != dim || fam.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: if h.dim() != dim { h.dim() } else { fam.dim() },
        });
    }
    let engine = EpisodeEngine::build(h, policy, total_time)?;
    let tr0 = s0.trace();
    let mut m = s0.matrix().clone();
    let mut hold = 0.0;
    for (k, (len, u)) in engine.segments.iter().enumerate() {
        m = ComplexMatrix::mul3(u, &m, &u.dagger());
        let scores = scores_against(&m, fam)?;
        let selected = argmax_lowest(&scores);
        if scores[selected] >= policy.hold_threshold() {
            hold += len * (m.trace().re / tr0).clamp(0.0, 1.0);
        }
        if policy.consent.at(k) {
            let p = fam.candidates()[selected].matrix();
            m = ComplexMatrix::mul3(p, &m, p);
        }
    }
    Ok(hold)
}

/// One row of an effort sweep.
#[derive(Clone, Debug)]
pub struct EffortRow {
    pub effort: f64,
    pub mean_hold: f64,
    pub std_err: f64,
    pub deterministic_hold: f64,
    pub trials: usize,
}

/// Sweeps effort values, running `trials` sampled episodes per value on
/// independent substreams, next to the branch-keeping expectation.
pub fn effort_sweep(
    s0: &DensityOperator,
    h: &Hamiltonian,
    fam: &QuestionFamily,
    base_policy: &EffortPolicy,
    efforts: &[f64],
    total_time: f64,
    trials: usize,
    rng: &RngStream,
) -> Result<Vec<EffortRow>> {
    if efforts.is_empty() {
        return Err(Error::EmptyInput("effort list must be nonempty"));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(efforts.len());
    for (ei, &effort) in efforts.iter().enumerate() {
        let policy = base_policy.with_effort(effort)?;
        let deterministic = deterministic_hold_duration(s0, h, fam, &policy, total_time)?;
        let mut holds = Vec::with_capacity(trials);
        for trial in 0..trials {
            let mut stream = rng.substream((ei * trials + trial) as u64);
            let log = run_attention_episode(s0, h, fam, &policy, total_time, &mut stream)?;
            holds.push(log.hold_duration);
        }
        let mean = holds.iter().sum::<f64>() / trials as f64;
        let var = if trials > 1 {
            holds.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (trials as f64 - 1.0)
        } else {
            0.0
        };
        rows.push(EffortRow {
            effort,
            mean_hold: mean,
            std_err: (var / trials as f64).sqrt(),
            deterministic_hold: deterministic,
            trials,
        });
    }
    Ok(rows)
}
