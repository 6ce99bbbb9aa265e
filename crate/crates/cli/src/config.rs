//! Declarative experiment configs: a single JSON document per run.
//!
//! Parsing is strict and total: unknown keys are rejected, and validation
//! walks the whole document before reporting, so one pass surfaces every
//! problem instead of the first. The parsed struct carries all defaults
//! filled in (a minimal zeno-qubit config comes back fully populated, with
//! `dt = total_time / n_steps` available on the schedule), and serializing
//! it produces a document that parses back to an equal config.

use std::fmt;

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::{Map, Value};

/// Which experiment the runner dispatches to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ZenoQubit,
    ZenoGeneric,
    OscillatorBand,
    AttentionSweep,
    DecoherenceInvariance,
    AlgebraBattery,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::ZenoQubit => "zeno-qubit",
            ExperimentKind::ZenoGeneric => "zeno-generic",
            ExperimentKind::OscillatorBand => "oscillator-band",
            ExperimentKind::AttentionSweep => "attention-sweep",
            ExperimentKind::DecoherenceInvariance => "decoherence-invariance",
            ExperimentKind::AlgebraBattery => "algebra-battery",
        }
    }

    fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "zeno-qubit" => ExperimentKind::ZenoQubit,
            "zeno-generic" => ExperimentKind::ZenoGeneric,
            "oscillator-band" => ExperimentKind::OscillatorBand,
            "attention-sweep" => ExperimentKind::AttentionSweep,
            "decoherence-invariance" => ExperimentKind::DecoherenceInvariance,
            "algebra-battery" => ExperimentKind::AlgebraBattery,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HamiltonianSpec {
    /// (omega/2) sigma_x on a two-level system.
    PauliX { angular_frequency: f64 },
    /// Dense Hermitian matrix, row-major real and (optional) imaginary parts.
    Dense {
        real: Vec<Vec<f64>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        imag: Option<Vec<Vec<f64>>>,
    },
    /// Seeded random Hermitian matrix with entries of the given scale.
    Random { seed: u64, scale: f64 },
    /// Driven truncated oscillator: omega (n + 1/2) plus lambda (a + a^dag).
    Oscillator { omega: f64, lambda: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProjectorSpec {
    /// Projector onto the listed computational-basis states.
    Basis { indices: Vec<usize> },
    /// Projector onto number states n_min..=n_max.
    Band { n_min: usize, n_max: usize },
    /// Seeded random rank-r projector.
    Random { rank: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateSpec {
    /// Pure basis state |index>.
    Basis { index: usize },
    /// Uniform superposition of all basis states.
    Plus,
    /// Identity / dimension.
    MaximallyMixed,
    /// Seeded random density compressed into the configured projector's range.
    RandomInBand { seed: u64 },
    /// Pure coherent state with amplitude alpha (needs truncation headroom).
    Coherent { alpha_re: f64, alpha_im: f64 },
    /// Coherent amplitudes restricted to the configured band, renormalized.
    BandCoherent { alpha_re: f64, alpha_im: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementSpec {
    BeforeQuestion,
    AfterQuestion,
    Disabled,
}

impl PlacementSpec {
    fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "before-question" => PlacementSpec::BeforeQuestion,
            "after-question" => PlacementSpec::AfterQuestion,
            "disabled" => PlacementSpec::Disabled,
            _ => return None,
        })
    }
}

/// Uniform questioning schedule. Configs may give either `n_steps` or an
/// evenly dividing `dt`; the parsed form always carries `n_steps`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleSpec {
    pub total_time: f64,
    pub n_steps: usize,
    pub placement: PlacementSpec,
    pub channel_strength: f64,
}

impl ScheduleSpec {
    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelBasis {
    /// Rank-one projectors on every computational basis state.
    Computational,
    /// The questioned projector and its complement.
    ProjectorPair,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelSpec {
    pub basis: ChannelBasis,
    /// Strength sweep, used by decoherence-invariance runs only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strengths: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConsentSpec {
    Always,
    Never,
    Pattern(Vec<bool>),
}

impl Serialize for ConsentSpec {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            ConsentSpec::Always => ser.serialize_str("always"),
            ConsentSpec::Never => ser.serialize_str("never"),
            ConsentSpec::Pattern(p) => {
                let mut seq = ser.serialize_seq(Some(p.len()))?;
                for b in p {
                    seq.serialize_element(b)?;
                }
                seq.end()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttentionSpec {
    pub base_interval: f64,
    pub efforts: Vec<f64>,
    pub threshold: f64,
    pub consent: ConsentSpec,
    pub total_time: f64,
    pub candidates: Vec<ProjectorSpec>,
}

/// What a zeno-generic run computes.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Analysis {
    /// Survival and in-band population over the schedule.
    Trajectory,
    /// Per-interval leakage over a dt ladder plus the fitted exponent.
    /// Without an explicit ladder the default one (scaled by the spectral
    /// radius of H) is used at run time.
    LeakageScaling {
        #[serde(skip_serializing_if = "Option::is_none")]
        intervals: Option<Vec<f64>>,
    },
    /// Distance from the compressed-generator propagation at each step count.
    PhpConvergence {
        total_time: f64,
        step_counts: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

/// A fully validated experiment description. All defaults are filled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projector: Option<ProjectorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attention: Option<AttentionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<Analysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    /// Required accessors for sections the validator guarantees per kind.
    pub fn dim(&self) -> usize {
        self.dimension.expect("validated: dimension present")
    }
}

/// Everything wrong with a config document, one message per line.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Canonical serialization of a validated config. Parsing the result gives
/// back an equal config.
pub fn serialize_config(config: &ExperimentConfig) -> String {
    let mut text = serde_json::to_string_pretty(config).expect("config serializes");
    text.push('\n');
    text
}

/// Parses and validates a config document, reporting every error found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| ConfigErrors(vec![format!("invalid JSON: {e}")]))?;
    let mut v = Validator::default();
    let config = v.walk(&value);
    match config {
        Some(c) if v.errors.is_empty() => Ok(c),
        _ => Err(ConfigErrors(v.errors)),
    }
}

#[derive(Default)]
struct Validator {
    errors: Vec<String>,
}

impl Validator {
    fn error(&mut self, path: &str, msg: impl AsRef<str>) {
        self.errors.push(format!("{path}: {}", msg.as_ref()));
    }

    fn check_keys(&mut self, obj: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                self.error(path, format!("unknown key `{key}`"));
            }
        }
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Map<String, Value>> {
        match v.as_object() {
            Some(o) => Some(o),
            None => {
                self.error(path, "must be an object");
                None
            }
        }
    }

    fn str_field<'a>(&mut self, obj: &'a Map<String, Value>, path: &str, key: &str) -> Option<&'a str> {
        match obj.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.error(path, format!("`{key}` must be a string"));
                None
            }
        }
    }

    fn f64_field(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<f64> {
        match obj.get(key) {
            None => None,
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.error(path, format!("`{key}` must be a finite number"));
                    None
                }
            },
        }
    }

    fn u64_field(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<u64> {
        match obj.get(key) {
            None => None,
            Some(v) => match v.as_u64() {
                Some(x) => Some(x),
                None => {
                    self.error(path, format!("`{key}` must be a nonnegative integer"));
                    None
                }
            },
        }
    }

    fn usize_field(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<usize> {
        self.u64_field(obj, path, key).map(|x| x as usize)
    }

    fn require_f64(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<f64> {
        if !obj.contains_key(key) {
            self.error(path, format!("missing required key `{key}`"));
            return None;
        }
        self.f64_field(obj, path, key)
    }

    fn require_u64(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<u64> {
        if !obj.contains_key(key) {
            self.error(path, format!("missing required key `{key}`"));
            return None;
        }
        self.u64_field(obj, path, key)
    }

    fn require_usize(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<usize> {
        self.require_u64(obj, path, key).map(|x| x as usize)
    }

    fn forbid(&mut self, obj: &Map<String, Value>, path: &str, key: &str, why: &str) {
        if obj.contains_key(key) {
            self.error(path, format!("`{key}` is not accepted here: {why}"));
        }
    }

    fn walk(&mut self, value: &Value) -> Option<ExperimentConfig> {
        let obj = self.object(value, "config")?;
        self.check_keys(
            obj,
            "config",
            &[
                "experiment",
                "dimension",
                "hamiltonian",
                "projector",
                "state",
                "schedule",
                "channel",
                "attention",
                "analysis",
                "seed",
                "trials",
                "output",
            ],
        );

        let kind = match self.str_field(obj, "config", "experiment") {
            Some(s) => match ExperimentKind::from_str(s) {
                Some(k) => k,
                None => {
                    self.error(
                        "config.experiment",
                        format!(
                            "unknown experiment `{s}`; expected one of zeno-qubit, zeno-generic, \
                             oscillator-band, attention-sweep, decoherence-invariance, \
                             algebra-battery"
                        ),
                    );
                    return None;
                }
            },
            None => {
                if !obj.contains_key("experiment") {
                    self.error("config", "missing required key `experiment`");
                }
                return None;
            }
        };

        let dimension = self.usize_field(obj, "config", "dimension");
        let hamiltonian = obj
            .get("hamiltonian")
            .and_then(|v| self.hamiltonian(v, "config.hamiltonian"));
        let projector = obj
            .get("projector")
            .and_then(|v| self.projector(v, "config.projector"));
        let state = obj.get("state").and_then(|v| self.state(v, "config.state"));
        let channel = obj
            .get("channel")
            .and_then(|v| self.channel(v, "config.channel"));
        let schedule = obj.get("schedule").and_then(|v| {
            self.schedule(v, "config.schedule", kind, channel.is_some() || obj.contains_key("channel"))
        });
        let attention = obj
            .get("attention")
            .and_then(|v| self.attention(v, "config.attention"));
        let analysis = obj
            .get("analysis")
            .and_then(|v| self.analysis(v, "config.analysis"));
        let seed = self.u64_field(obj, "config", "seed");
        let trials = self.usize_field(obj, "config", "trials").unwrap_or(0);
        let output = obj.get("output").and_then(|v| self.output(v, "config.output"));

        let mut config = ExperimentConfig {
            experiment: kind,
            dimension,
            hamiltonian,
            projector,
            state,
            schedule,
            channel,
            attention,
            analysis,
            seed,
            trials,
            output,
        };
        self.apply_kind_rules(obj, &mut config);
        self.check_dimensions(&config);
        if config.trials > 0 && config.seed.is_none() {
            self.error("config", "`seed` is required whenever trials > 0");
        }
        Some(config)
    }

    fn hamiltonian(&mut self, v: &Value, path: &str) -> Option<HamiltonianSpec> {
        let obj = self.object(v, path)?;
        let kind = self.str_field(obj, path, "kind");
        match kind {
            Some("pauli-x") => {
                self.check_keys(obj, path, &["kind", "angular_frequency"]);
                let w = self.require_f64(obj, path, "angular_frequency")?;
                if w <= 0.0 {
                    self.error(path, "`angular_frequency` must be positive");
                    return None;
                }
                Some(HamiltonianSpec::PauliX { angular_frequency: w })
            }
            Some("dense") => {
                self.check_keys(obj, path, &["kind", "real", "imag"]);
                if !obj.contains_key("real") {
                    self.error(path, "missing required key `real`");
                    return None;
                }
                let real = self.matrix_field(obj, path, "real");
                let imag = if obj.contains_key("imag") {
                    Some(self.matrix_field(obj, path, "imag")?)
                } else {
                    None
                };
                Some(HamiltonianSpec::Dense { real: real?, imag })
            }
            Some("random") => {
                self.check_keys(obj, path, &["kind", "seed", "scale"]);
                let seed = self.require_u64(obj, path, "seed")?;
                let scale = self.f64_field(obj, path, "scale").unwrap_or(1.0);
                if scale <= 0.0 {
                    self.error(path, "`scale` must be positive");
                    return None;
                }
                Some(HamiltonianSpec::Random { seed, scale })
            }
            Some("oscillator") => {
                self.check_keys(obj, path, &["kind", "omega", "lambda"]);
                let omega = self.require_f64(obj, path, "omega")?;
                let lambda = self.f64_field(obj, path, "lambda").unwrap_or(0.0);
                Some(HamiltonianSpec::Oscillator { omega, lambda })
            }
            Some(other) => {
                self.error(
                    path,
                    format!("unknown kind `{other}`; expected pauli-x, dense, random, or oscillator"),
                );
                None
            }
            None => {
                if !obj.contains_key("kind") {
                    self.error(path, "missing required key `kind`");
                }
                None
            }
        }
    }

    fn matrix_field(
        &mut self,
        obj: &Map<String, Value>,
        path: &str,
        key: &str,
    ) -> Option<Vec<Vec<f64>>> {
        let v = obj.get(key)?;
        let rows = match v.as_array() {
            Some(r) => r,
            None => {
                self.error(path, format!("`{key}` must be an array of rows"));
                return None;
            }
        };
        let mut out = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let entries = match row.as_array() {
                Some(e) => e,
                None => {
                    self.error(path, format!("`{key}` row {i} must be an array of numbers"));
                    return None;
                }
            };
            let mut parsed = Vec::with_capacity(entries.len());
            for (j, e) in entries.iter().enumerate() {
                match e.as_f64() {
                    Some(x) if x.is_finite() => parsed.push(x),
                    _ => {
                        self.error(path, format!("`{key}`[{i}][{j}] must be a finite number"));
                        return None;
                    }
                }
            }
            out.push(parsed);
        }
        Some(out)
    }

    fn projector(&mut self, v: &Value, path: &str) -> Option<ProjectorSpec> {
        let obj = self.object(v, path)?;
        match self.str_field(obj, path, "kind") {
            Some("basis") => {
                self.check_keys(obj, path, &["kind", "indices"]);
                let indices = self.usize_list(obj, path, "indices")?;
                if indices.is_empty() {
                    self.error(path, "`indices` must be nonempty");
                    return None;
                }
                Some(ProjectorSpec::Basis { indices })
            }
            Some("band") => {
                self.check_keys(obj, path, &["kind", "n_min", "n_max"]);
                let n_min = self.require_usize(obj, path, "n_min")?;
                let n_max = self.require_usize(obj, path, "n_max")?;
                if n_min > n_max {
                    self.error(path, "`n_min` must not exceed `n_max`");
                    return None;
                }
                Some(ProjectorSpec::Band { n_min, n_max })
            }
            Some("random") => {
                self.check_keys(obj, path, &["kind", "rank", "seed"]);
                let rank = self.require_usize(obj, path, "rank")?;
                let seed = self.require_u64(obj, path, "seed")?;
                if rank == 0 {
                    self.error(path, "`rank` must be at least 1");
                    return None;
                }
                Some(ProjectorSpec::Random { rank, seed })
            }
            Some(other) => {
                self.error(path, format!("unknown kind `{other}`; expected basis, band, or random"));
                None
            }
            None => {
                if !obj.contains_key("kind") {
                    self.error(path, "missing required key `kind`");
                }
                None
            }
        }
    }

    fn usize_list(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<Vec<usize>> {
        let v = match obj.get(key) {
            Some(v) => v,
            None => {
                self.error(path, format!("missing required key `{key}`"));
                return None;
            }
        };
        let arr = match v.as_array() {
            Some(a) => a,
            None => {
                self.error(path, format!("`{key}` must be an array of nonnegative integers"));
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for (i, e) in arr.iter().enumerate() {
            match e.as_u64() {
                Some(x) => out.push(x as usize),
                None => {
                    self.error(path, format!("`{key}`[{i}] must be a nonnegative integer"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn f64_list(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<Vec<f64>> {
        let v = obj.get(key)?;
        let arr = match v.as_array() {
            Some(a) => a,
            None => {
                self.error(path, format!("`{key}` must be an array of numbers"));
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for (i, e) in arr.iter().enumerate() {
            match e.as_f64() {
                Some(x) if x.is_finite() => out.push(x),
                _ => {
                    self.error(path, format!("`{key}`[{i}] must be a finite number"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn state(&mut self, v: &Value, path: &str) -> Option<StateSpec> {
        let obj = self.object(v, path)?;
        match self.str_field(obj, path, "kind") {
            Some("basis") => {
                self.check_keys(obj, path, &["kind", "index"]);
                let index = self.require_usize(obj, path, "index")?;
                Some(StateSpec::Basis { index })
            }
            Some("plus") => {
                self.check_keys(obj, path, &["kind"]);
                Some(StateSpec::Plus)
            }
            Some("maximally-mixed") => {
                self.check_keys(obj, path, &["kind"]);
                Some(StateSpec::MaximallyMixed)
            }
            Some("random-in-band") => {
                self.check_keys(obj, path, &["kind", "seed"]);
                let seed = self.require_u64(obj, path, "seed")?;
                Some(StateSpec::RandomInBand { seed })
            }
            Some(kind @ ("coherent" | "band-coherent")) => {
                self.check_keys(obj, path, &["kind", "alpha_re", "alpha_im"]);
                let re = self.require_f64(obj, path, "alpha_re")?;
                let im = self.f64_field(obj, path, "alpha_im").unwrap_or(0.0);
                Some(if kind == "coherent" {
                    StateSpec::Coherent { alpha_re: re, alpha_im: im }
                } else {
                    StateSpec::BandCoherent { alpha_re: re, alpha_im: im }
                })
            }
            Some(other) => {
                self.error(
                    path,
                    format!(
                        "unknown kind `{other}`; expected basis, plus, maximally-mixed, \
                         random-in-band, coherent, or band-coherent"
                    ),
                );
                None
            }
            None => {
                if !obj.contains_key("kind") {
                    self.error(path, "missing required key `kind`");
                }
                None
            }
        }
    }

    fn schedule(
        &mut self,
        v: &Value,
        path: &str,
        kind: ExperimentKind,
        channel_present: bool,
    ) -> Option<ScheduleSpec> {
        let obj = self.object(v, path)?;
        self.check_keys(obj, path, &["total_time", "n_steps", "dt", "placement", "channel_strength"]);
        let total_time = self.require_f64(obj, path, "total_time")?;
        if total_time <= 0.0 {
            self.error(path, "`total_time` must be positive");
            return None;
        }

        let n_steps = match (obj.contains_key("n_steps"), obj.contains_key("dt")) {
            (true, true) => {
                self.error(path, "give either `n_steps` or `dt`, not both");
                return None;
            }
            (false, false) => {
                self.error(path, "one of `n_steps` or `dt` is required");
                return None;
            }
            (true, false) => {
                let n = self.usize_field(obj, path, "n_steps")?;
                if n == 0 {
                    self.error(path, "`n_steps` must be at least 1");
                    return None;
                }
                n
            }
            (false, true) => {
                let dt = self.f64_field(obj, path, "dt")?;
                if dt <= 0.0 {
                    self.error(path, "`dt` must be positive");
                    return None;
                }
                let ratio = total_time / dt;
                let n = ratio.round();
                if n < 1.0 || (ratio - n).abs() > 1e-9 * n.max(1.0) {
                    self.error(path, "`dt` must divide `total_time` into a whole number of steps");
                    return None;
                }
                n as usize
            }
        };

        let placement = match self.str_field(obj, path, "placement") {
            Some(s) => match PlacementSpec::from_str(s) {
                Some(p) => p,
                None => {
                    self.error(
                        path,
                        format!(
                            "unknown placement `{s}`; expected before-question, after-question, \
                             or disabled"
                        ),
                    );
                    return None;
                }
            },
            None if obj.contains_key("placement") => return None,
            None => {
                // Default: a channel slot when a channel section exists.
                if channel_present || kind == ExperimentKind::DecoherenceInvariance {
                    PlacementSpec::AfterQuestion
                } else {
                    PlacementSpec::Disabled
                }
            }
        };

        let channel_strength = self.f64_field(obj, path, "channel_strength").unwrap_or(0.0);
        if !(0.0..=1.0).contains(&channel_strength) {
            self.error(path, "`channel_strength` must lie in [0, 1]");
            return None;
        }

        Some(ScheduleSpec {
            total_time,
            n_steps,
            placement,
            channel_strength,
        })
    }

    fn channel(&mut self, v: &Value, path: &str) -> Option<ChannelSpec> {
        let obj = self.object(v, path)?;
        self.check_keys(obj, path, &["basis", "strengths"]);
        let basis = match self.str_field(obj, path, "basis") {
            Some("computational") => ChannelBasis::Computational,
            Some("projector-pair") => ChannelBasis::ProjectorPair,
            Some(other) => {
                self.error(
                    path,
                    format!("unknown basis `{other}`; expected computational or projector-pair"),
                );
                return None;
            }
            None => {
                if !obj.contains_key("basis") {
                    self.error(path, "missing required key `basis`");
                }
                return None;
            }
        };
        let strengths = if obj.contains_key("strengths") {
            let list = self.f64_list(obj, path, "strengths")?;
            if list.is_empty() {
                self.error(path, "`strengths` must be nonempty");
                return None;
            }
            for &s in &list {
                if !(0.0..=1.0).contains(&s) {
                    self.error(path, format!("strength {s} must lie in [0, 1]"));
                    return None;
                }
            }
            Some(list)
        } else {
            None
        };
        Some(ChannelSpec { basis, strengths })
    }

    fn attention(&mut self, v: &Value, path: &str) -> Option<AttentionSpec> {
        let obj = self.object(v, path)?;
        self.check_keys(
            obj,
            path,
            &["base_interval", "efforts", "threshold", "consent", "total_time", "candidates"],
        );
        let base_interval = self.require_f64(obj, path, "base_interval");
        let efforts = if obj.contains_key("efforts") {
            self.f64_list(obj, path, "efforts")
        } else {
            self.error(path, "missing required key `efforts`");
            None
        };
        let threshold = self.f64_field(obj, path, "threshold").unwrap_or(0.9);
        let total_time = self.require_f64(obj, path, "total_time");
        let consent = match obj.get("consent") {
            None => ConsentSpec::Always,
            Some(Value::String(s)) if s == "always" => ConsentSpec::Always,
            Some(Value::String(s)) if s == "never" => ConsentSpec::Never,
            Some(Value::Array(arr)) => {
                let mut pattern = Vec::with_capacity(arr.len());
                let mut ok = true;
                for (i, e) in arr.iter().enumerate() {
                    match e.as_bool() {
                        Some(b) => pattern.push(b),
                        None => {
                            self.error(path, format!("`consent`[{i}] must be a boolean"));
                            ok = false;
                        }
                    }
                }
                if pattern.is_empty() {
                    self.error(path, "`consent` pattern must be nonempty");
                    ok = false;
                }
                if !ok {
                    return None;
                }
                ConsentSpec::Pattern(pattern)
            }
            Some(_) => {
                self.error(path, "`consent` must be \"always\", \"never\", or an array of booleans");
                return None;
            }
        };
        let candidates = match obj.get("candidates") {
            None => {
                self.error(path, "missing required key `candidates`");
                None
            }
            Some(Value::Array(arr)) if !arr.is_empty() => {
                let mut specs = Vec::with_capacity(arr.len());
                for (i, e) in arr.iter().enumerate() {
                    specs.push(self.projector(e, &format!("{path}.candidates[{i}]"))?);
                }
                Some(specs)
            }
            Some(_) => {
                self.error(path, "`candidates` must be a nonempty array of projector specs");
                None
            }
        };

        let base_interval = base_interval?;
        let efforts = efforts?;
        let total_time = total_time?;
        let candidates = candidates?;
        if base_interval <= 0.0 {
            self.error(path, "`base_interval` must be positive");
        }
        if total_time <= 0.0 {
            self.error(path, "`total_time` must be positive");
        }
        if efforts.is_empty() {
            self.error(path, "`efforts` must be nonempty");
        }
        for &e in &efforts {
            if e < 0.0 {
                self.error(path, format!("effort {e} must be nonnegative"));
            }
        }
        if !(0.0..=1.0).contains(&threshold) {
            self.error(path, "`threshold` must lie in [0, 1]");
        }
        Some(AttentionSpec {
            base_interval,
            efforts,
            threshold,
            consent,
            total_time,
            candidates,
        })
    }

    fn analysis(&mut self, v: &Value, path: &str) -> Option<Analysis> {
        let obj = self.object(v, path)?;
        match self.str_field(obj, path, "kind") {
            Some("trajectory") => {
                self.check_keys(obj, path, &["kind"]);
                Some(Analysis::Trajectory)
            }
            Some("leakage-scaling") => {
                self.check_keys(obj, path, &["kind", "intervals"]);
                let intervals = if obj.contains_key("intervals") {
                    let list = self.f64_list(obj, path, "intervals")?;
                    for &dt in &list {
                        if dt <= 0.0 {
                            self.error(path, format!("interval {dt} must be positive"));
                            return None;
                        }
                    }
                    Some(list)
                } else {
                    None
                };
                Some(Analysis::LeakageScaling { intervals })
            }
            Some("php-convergence") => {
                self.check_keys(obj, path, &["kind", "total_time", "step_counts"]);
                let total_time = self.f64_field(obj, path, "total_time").unwrap_or(1.0);
                if total_time <= 0.0 {
                    self.error(path, "`total_time` must be positive");
                    return None;
                }
                let step_counts = if obj.contains_key("step_counts") {
                    let list = self.usize_list(obj, path, "step_counts")?;
                    if list.len() < 2 {
                        self.error(path, "`step_counts` needs at least two entries");
                        return None;
                    }
                    for w in list.windows(2) {
                        if w[1] <= w[0] {
                            self.error(path, "`step_counts` must be strictly increasing");
                            return None;
                        }
                    }
                    if list[0] == 0 {
                        self.error(path, "`step_counts` entries must be at least 1");
                        return None;
                    }
                    list
                } else {
                    vec![5, 10, 20, 40, 80]
                };
                Some(Analysis::PhpConvergence { total_time, step_counts })
            }
            Some(other) => {
                self.error(
                    path,
                    format!(
                        "unknown kind `{other}`; expected trajectory, leakage-scaling, or \
                         php-convergence"
                    ),
                );
                None
            }
            None => {
                if !obj.contains_key("kind") {
                    self.error(path, "missing required key `kind`");
                }
                None
            }
        }
    }

    fn output(&mut self, v: &Value, path: &str) -> Option<OutputSpec> {
        let obj = self.object(v, path)?;
        self.check_keys(obj, path, &["csv", "summary"]);
        let csv = self.str_field(obj, path, "csv").map(str::to_owned);
        let summary = self.str_field(obj, path, "summary").map(str::to_owned);
        if csv.as_deref() == Some("") {
            self.error(path, "`csv` must be a nonempty path");
        }
        if summary.as_deref() == Some("") {
            self.error(path, "`summary` must be a nonempty path");
        }
        Some(OutputSpec { csv, summary })
    }

    /// Per-kind requirements, forbidden sections, and benchmark defaults.
    fn apply_kind_rules(&mut self, obj: &Map<String, Value>, config: &mut ExperimentConfig) {
        use ExperimentKind::*;
        let kind = config.experiment;
        match kind {
            ZenoQubit => {
                self.forbid(obj, "config", "attention", "only attention-sweep uses it");
                self.forbid(obj, "config", "analysis", "only zeno-generic takes an analysis");
                // The two-level benchmark: every omitted section defaults to it.
                match config.dimension {
                    None => config.dimension = Some(2),
                    Some(2) => {}
                    Some(d) => self.error(
                        "config.dimension",
                        format!("zeno-qubit runs on a two-level system, got {d}"),
                    ),
                }
                match &config.hamiltonian {
                    None if !obj.contains_key("hamiltonian") => {
                        config.hamiltonian = Some(HamiltonianSpec::PauliX {
                            angular_frequency: std::f64::consts::PI,
                        })
                    }
                    Some(HamiltonianSpec::PauliX { .. }) | None => {}
                    Some(_) => self.error(
                        "config.hamiltonian",
                        "zeno-qubit requires the pauli-x Hamiltonian (its survival oracle \
                         depends on it); use zeno-generic otherwise",
                    ),
                }
                match &config.projector {
                    None if !obj.contains_key("projector") => {
                        config.projector = Some(ProjectorSpec::Basis { indices: vec![0] })
                    }
                    Some(ProjectorSpec::Basis { indices }) if indices.len() == 1 && indices[0] == 0 => {}
                    None => {}
                    Some(_) => self.error(
                        "config.projector",
                        "zeno-qubit questions the ground projector (basis index 0); use \
                         zeno-generic otherwise",
                    ),
                }
                match &config.state {
                    None if !obj.contains_key("state") => {
                        config.state = Some(StateSpec::Basis { index: 0 })
                    }
                    Some(StateSpec::Basis { index: 0 }) | None => {}
                    Some(_) => self.error(
                        "config.state",
                        "zeno-qubit starts from the ground state (basis index 0); use \
                         zeno-generic otherwise",
                    ),
                }
                self.require_section(obj, config.schedule.is_some(), "schedule");
                self.check_single_strength_channel(obj, config);
            }
            ZenoGeneric => {
                self.forbid(obj, "config", "attention", "only attention-sweep uses it");
                if config.analysis.is_none() && !obj.contains_key("analysis") {
                    config.analysis = Some(Analysis::Trajectory);
                }
                self.require_section(obj, config.dimension.is_some(), "dimension");
                self.require_section(obj, config.hamiltonian.is_some(), "hamiltonian");
                self.require_section(obj, config.projector.is_some(), "projector");
                self.require_section(obj, config.state.is_some(), "state");
                match config.analysis {
                    Some(Analysis::Trajectory) | None => {
                        self.require_section(obj, config.schedule.is_some(), "schedule");
                        self.check_single_strength_channel(obj, config);
                    }
                    Some(_) => {
                        self.forbid(obj, "config", "schedule", "this analysis sets its own times");
                        self.forbid(obj, "config", "channel", "this analysis runs channel-free");
                        if config.trials > 0 {
                            self.error("config.trials", "this analysis is deterministic; set trials to 0");
                        }
                    }
                }
            }
            OscillatorBand => {
                self.forbid(obj, "config", "attention", "only attention-sweep uses it");
                self.forbid(obj, "config", "analysis", "only zeno-generic takes an analysis");
                self.require_section(obj, config.dimension.is_some(), "dimension");
                self.require_section(obj, config.hamiltonian.is_some(), "hamiltonian");
                self.require_section(obj, config.projector.is_some(), "projector");
                self.require_section(obj, config.state.is_some(), "state");
                self.require_section(obj, config.schedule.is_some(), "schedule");
                if let Some(h) = &config.hamiltonian {
                    if !matches!(h, HamiltonianSpec::Oscillator { .. }) {
                        self.error(
                            "config.hamiltonian",
                            "oscillator-band requires an oscillator Hamiltonian",
                        );
                    }
                }
                if let Some(p) = &config.projector {
                    if !matches!(p, ProjectorSpec::Band { .. }) {
                        self.error("config.projector", "oscillator-band requires a band projector");
                    }
                }
                if config.trials > 0 {
                    self.error(
                        "config.trials",
                        "oscillator-band runs are deterministic; set trials to 0",
                    );
                }
                self.check_single_strength_channel(obj, config);
            }
            DecoherenceInvariance => {
                self.forbid(obj, "config", "attention", "only attention-sweep uses it");
                self.forbid(obj, "config", "analysis", "only zeno-generic takes an analysis");
                self.require_section(obj, config.dimension.is_some(), "dimension");
                self.require_section(obj, config.hamiltonian.is_some(), "hamiltonian");
                self.require_section(obj, config.projector.is_some(), "projector");
                self.require_section(obj, config.state.is_some(), "state");
                self.require_section(obj, config.schedule.is_some(), "schedule");
                self.require_section(obj, config.channel.is_some(), "channel");
                if let Some(c) = &config.channel {
                    if c.strengths.is_none() {
                        self.error(
                            "config.channel",
                            "decoherence-invariance sweeps `strengths`; the list is required",
                        );
                    }
                }
                if let Some(s) = &config.schedule {
                    if s.placement == PlacementSpec::Disabled {
                        self.error(
                            "config.schedule",
                            "the invariance sweep needs a channel slot; placement must not be \
                             disabled",
                        );
                    }
                    if s.channel_strength != 0.0 {
                        self.error(
                            "config.schedule",
                            "use channel.strengths for the sweep; schedule.channel_strength must \
                             stay 0",
                        );
                    }
                }
                if config.trials > 0 {
                    self.error(
                        "config.trials",
                        "decoherence-invariance runs are deterministic; set trials to 0",
                    );
                }
            }
            AttentionSweep => {
                self.forbid(obj, "config", "projector", "candidates live under `attention`");
                self.forbid(obj, "config", "schedule", "instants come from the effort policy");
                self.forbid(obj, "config", "channel", "attention episodes run channel-free");
                self.forbid(obj, "config", "analysis", "only zeno-generic takes an analysis");
                self.require_section(obj, config.dimension.is_some(), "dimension");
                self.require_section(obj, config.hamiltonian.is_some(), "hamiltonian");
                self.require_section(obj, config.state.is_some(), "state");
                self.require_section(obj, config.attention.is_some(), "attention");
            }
            AlgebraBattery => {
                for key in [
                    "dimension",
                    "hamiltonian",
                    "projector",
                    "state",
                    "schedule",
                    "channel",
                    "attention",
                    "analysis",
                ] {
                    self.forbid(obj, "config", key, "the battery fixes its own instances");
                }
                if config.seed.is_none() {
                    self.error("config", "algebra-battery requires a `seed`");
                }
                if config.trials > 0 {
                    self.error(
                        "config.trials",
                        "battery sample sizes are fixed; remove `trials`",
                    );
                }
            }
        }
    }

    fn require_section(&mut self, obj: &Map<String, Value>, present: bool, key: &str) {
        // Only report the section as missing when it is actually absent;
        // a present-but-invalid section already produced its own errors.
        if !present && !obj.contains_key(key) {
            self.error("config", format!("missing required key `{key}`"));
        }
    }

    /// Zeno-family rule: a channel section needs a slot, a slot needs a basis,
    /// and the sweep list belongs to decoherence-invariance alone.
    fn check_single_strength_channel(&mut self, obj: &Map<String, Value>, config: &ExperimentConfig) {
        if let Some(c) = &config.channel {
            if c.strengths.is_some() {
                self.error(
                    "config.channel",
                    "`strengths` is only for decoherence-invariance; use \
                     schedule.channel_strength here",
                );
            }
            if let Some(s) = &config.schedule {
                if s.placement == PlacementSpec::Disabled {
                    self.error(
                        "config.schedule",
                        "a channel section is present but placement is disabled",
                    );
                }
            }
        } else if !obj.contains_key("channel") {
            if let Some(s) = &config.schedule {
                if s.placement != PlacementSpec::Disabled {
                    self.error(
                        "config.schedule",
                        "placement names a channel slot but no `channel` section gives a basis",
                    );
                }
                if s.channel_strength != 0.0 {
                    self.error(
                        "config.schedule",
                        "`channel_strength` is set but no `channel` section gives a basis",
                    );
                }
            }
        }
    }

    /// Cross-field dimension consistency, checkable without building operators.
    fn check_dimensions(&mut self, config: &ExperimentConfig) {
        let Some(dim) = config.dimension else { return };
        if dim < 2 {
            self.error("config.dimension", "dimension must be at least 2");
            return;
        }
        if let Some(h) = &config.hamiltonian {
            match h {
                HamiltonianSpec::PauliX { .. } if dim != 2 => {
                    self.error("config.hamiltonian", "pauli-x requires dimension 2");
                }
                HamiltonianSpec::Dense { real, imag } => {
                    let square = real.len() == dim && real.iter().all(|r| r.len() == dim);
                    if !square {
                        self.error(
                            "config.hamiltonian",
                            format!("`real` must be a {dim}x{dim} matrix"),
                        );
                    }
                    if let Some(imag) = imag {
                        let square = imag.len() == dim && imag.iter().all(|r| r.len() == dim);
                        if !square {
                            self.error(
                                "config.hamiltonian",
                                format!("`imag` must be a {dim}x{dim} matrix"),
                            );
                        }
                    }
                }
                HamiltonianSpec::Oscillator { omega, .. } => {
                    if dim < 4 {
                        self.error(
                            "config.dimension",
                            "oscillator Hamiltonians need dimension at least 4",
                        );
                    }
                    if *omega <= 0.0 {
                        self.error("config.hamiltonian", "`omega` must be positive");
                    }
                }
                _ => {}
            }
        }
        let check_projector = |spec: &ProjectorSpec, path: &str, v: &mut Validator| match spec {
            ProjectorSpec::Basis { indices } => {
                for &i in indices {
                    if i >= dim {
                        v.error(path, format!("basis index {i} is outside dimension {dim}"));
                    }
                }
                let mut sorted = indices.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != indices.len() {
                    v.error(path, "basis indices must be distinct");
                }
            }
            ProjectorSpec::Band { n_max, .. } => {
                if *n_max >= dim {
                    v.error(path, format!("band top {n_max} is outside dimension {dim}"));
                }
            }
            ProjectorSpec::Random { rank, .. } => {
                if *rank > dim {
                    v.error(path, format!("rank {rank} exceeds dimension {dim}"));
                }
            }
        };
        if let Some(p) = &config.projector {
            check_projector(p, "config.projector", self);
        }
        if let Some(a) = &config.attention {
            for (i, c) in a.candidates.iter().enumerate() {
                check_projector(c, &format!("config.attention.candidates[{i}]"), self);
            }
        }
        if let Some(s) = &config.state {
            match s {
                StateSpec::Basis { index } if *index >= dim => {
                    self.error(
                        "config.state",
                        format!("basis index {index} is outside dimension {dim}"),
                    );
                }
                StateSpec::RandomInBand { .. } if config.projector.is_none() => {
                    self.error(
                        "config.state",
                        "random-in-band needs a `projector` section to define the band",
                    );
                }
                StateSpec::BandCoherent { .. } => {
                    if !matches!(config.projector, Some(ProjectorSpec::Band { .. })) {
                        self.error(
                            "config.state",
                            "band-coherent needs a band projector to define the band",
                        );
                    }
                }
                _ => {}
            }
        }
    }
}
