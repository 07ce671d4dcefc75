//! Seeded telemetry generation with sensor failure injection, and an
//! episode runner that scores display policies against operators.

mod episode;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayesnet::{EvidenceSet, PROB_TOLERANCE};
use crate::decision::{DecisionModel, DecisionModelFile};
use crate::error::{Error, Result};
use crate::metrics::ReviewTimeModel;
use crate::policy::{Context, EvidencePartition, Template};

pub use episode::{
    evaluate_policies, run_episode, Episode, EpisodeResult, EpisodeSummary, FrameRecord, Operator, Outcome,
    PolicyReport, ReportRow,
};

/// How a sensor misbehaves from `onset` on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureMode {
    #[default]
    None,
    /// Emits a fixed state.
    Stuck { state: String, onset: u32 },
    /// Starts from the reading at onset and moves one state up every
    /// `every` frames, saturating at the last state.
    Drift { every: u32, onset: u32 },
    /// Cycles through the states with period `period`.
    Sinusoidal { period: u32, onset: u32 },
}

impl FailureMode {
    pub fn onset(&self) -> Option<u32> {
        match self {
            FailureMode::None => None,
            FailureMode::Stuck { onset, .. }
            | FailureMode::Drift { onset, .. }
            | FailureMode::Sinusoidal { onset, .. } => Some(*onset),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    /// Evidence variable this sensor reports.
    pub id: String,
    /// Emission distribution over the sensor's states, per hypothesis state.
    pub emission: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub failure: FailureMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Hypothesis state in effect from `onset` on. Before onset the first
    /// declared hypothesis state holds.
    pub state: String,
    #[serde(default)]
    pub onset: u32,
}

impl GroundTruth {
    pub fn fault(state: &str, onset: u32) -> Self {
        GroundTruth {
            state: state.to_string(),
            onset,
        }
    }

    pub fn nominal() -> Self {
        Self::fault("nominal", 0)
    }
}

/// Half-open frame range with its operating context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub start: u32,
    pub end: u32,
    pub context: Context,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub model: DecisionModel,
    pub ground_truth: GroundTruth,
    pub sensors: Vec<SensorSpec>,
    pub phases: Vec<Phase>,
    pub horizon: u32,
    pub templates: Vec<Template>,
    pub partition: EvidencePartition,
    /// Review-time costs for displayed evidence, before criticality scaling.
    pub review: ReviewTimeModel,
    /// Status-quo action: choosing it does not end an episode.
    pub default_action: Option<String>,
}

/// A model given inline or as a path relative to the scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ModelRef {
    Path(PathBuf),
    Inline(Box<DecisionModelFile>),
}

#[derive(Debug, Clone, Deserialize)]
struct ScenarioFile {
    #[serde(default)]
    name: Option<String>,
    seed: u64,
    model: ModelRef,
    ground_truth: GroundTruth,
    sensors: Vec<SensorSpec>,
    phases: Vec<Phase>,
    horizon: u32,
    #[serde(default)]
    templates: Vec<Template>,
    #[serde(default)]
    partition: EvidencePartition,
    #[serde(default = "ReviewTimeModel::zero")]
    review: ReviewTimeModel,
    #[serde(default)]
    default_action: Option<String>,
}

/// Inline models only; use [`Scenario::load`] for files that reference a
/// model by path.
impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = ScenarioFile::deserialize(d)?;
        Scenario::from_file(file, None, "scenario").map_err(serde::de::Error::custom)
    }
}

/// One frame of sensor readings: everything available to the manager.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryFrame {
    pub frame: u32,
    pub evidence: EvidenceSet,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let fallback = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Self::from_json_in(&text, path.parent(), fallback)
    }

    /// Parses a scenario; a model path is resolved against `base`.
    pub fn from_json_in(text: &str, base: Option<&Path>, fallback_name: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::parse("scenario", e))?;
        Self::from_file(file, Some(base.unwrap_or(Path::new("."))), fallback_name)
    }

    /// With `base` unset, model paths are rejected.
    fn from_file(file: ScenarioFile, base: Option<&Path>, fallback_name: &str) -> Result<Self> {
        let model = match (file.model, base) {
            (ModelRef::Inline(m), _) => m.into_model()?,
            (ModelRef::Path(p), Some(dir)) => DecisionModel::load(if p.is_relative() { dir.join(p) } else { p })?,
            (ModelRef::Path(p), None) => {
                return Err(Error::InvalidScenario(format!(
                    "model must be given inline here, not as `{}`",
                    p.display()
                )))
            }
        };
        let scenario = Scenario {
            name: file.name.unwrap_or_else(|| fallback_name.to_string()),
            seed: file.seed,
            model,
            ground_truth: file.ground_truth,
            sensors: file.sensors,
            phases: file.phases,
            horizon: file.horizon,
            templates: file.templates,
            partition: file.partition,
            review: file.review,
            default_action: file.default_action,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_in(text, None, "scenario")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        let net = self.model.network();
        let hyp = &net.hypothesis().states;
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        if !hyp.contains(&self.ground_truth.state) {
            return bad(format!("unknown ground-truth state `{}`", self.ground_truth.state));
        }
        if let Some(a) = &self.default_action {
            if !self.model.has_action(a) {
                return bad(format!("unknown default action `{a}`"));
            }
        }
        for s in &self.sensors {
            if !net.is_evidence_var(&s.id) {
                return bad(format!("sensor `{}` is not an evidence variable", s.id));
            }
            if self.sensors.iter().filter(|o| o.id == s.id).count() > 1 {
                return bad(format!("sensor `{}` listed twice", s.id));
            }
            let states = &net.variable(&s.id).expect("evidence var exists").states;
            for h in hyp {
                let Some(row) = s.emission.get(h) else {
                    return bad(format!("sensor `{}` has no emission for `{h}`", s.id));
                };
                if row.len() != states.len()
                    || row.iter().any(|p| !(*p >= 0.0))
                    || (row.iter().sum::<f64>() - 1.0).abs() > PROB_TOLERANCE
                {
                    return bad(format!("sensor `{}` emission for `{h}` is not a distribution", s.id));
                }
            }
            if let Some(extra) = s.emission.keys().find(|k| !hyp.contains(k)) {
                return bad(format!("sensor `{}` has emission for unknown state `{extra}`", s.id));
            }
            match &s.failure {
                FailureMode::Stuck { state, .. } if !states.contains(state) => {
                    return bad(format!("sensor `{}` stuck at unknown state `{state}`", s.id));
                }
                FailureMode::Drift { every: 0, .. } => {
                    return bad(format!("sensor `{}` drift step must be positive", s.id));
                }
                FailureMode::Sinusoidal { period: 0, .. } => {
                    return bad(format!("sensor `{}` period must be positive", s.id));
                }
                _ => {}
            }
        }
        let mut phases: Vec<&Phase> = self.phases.iter().collect();
        phases.sort_by_key(|p| p.start);
        let mut cursor = 0;
        for p in phases {
            if p.start != cursor || p.end <= p.start {
                return bad(format!("phases must tile [0, {}) without gaps or overlaps", self.horizon));
            }
            cursor = p.end;
        }
        if cursor != self.horizon {
            return bad(format!("phases must tile [0, {}) without gaps or overlaps", self.horizon));
        }
        for t in &self.templates {
            t.validate()?;
            for v in t.levels.iter().flatten() {
                if !net.is_evidence_var(v) {
                    return bad(format!("template `{}` names unknown evidence `{v}`", t.subsystem));
                }
            }
        }
        self.partition.validate()?;
        for v in self.partition.core.iter().chain(self.partition.aux_clusters.values().flatten()) {
            if !net.is_evidence_var(v) {
                return bad(format!("partition names unknown evidence `{v}`"));
            }
        }
        self.review.validate()
    }

    /// Context of the phase containing `frame`.
    pub fn context_at(&self, frame: u32) -> &Context {
        self.phases
            .iter()
            .find(|p| p.start <= frame && frame < p.end)
            .or(self.phases.last())
            .map(|p| &p.context)
            .expect("validated scenario has phases")
    }

    /// Hypothesis state in effect at time `t`.
    pub fn truth_at(&self, t: f64) -> &str {
        if t >= self.ground_truth.onset as f64 {
            &self.ground_truth.state
        } else {
            &self.model.hypothesis_states()[0]
        }
    }

    /// Whether the ground truth ever leaves the baseline state.
    pub fn is_anomalous(&self) -> bool {
        self.ground_truth.state != self.model.hypothesis_states()[0]
    }

    /// Copy with a different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Scenario {
            seed,
            ..self.clone()
        }
    }
}

/// 64-bit FNV-1a, used to key the generator by sensor id.
fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Generator keyed by `(seed, frame, stream)`, independent of call order.
pub(crate) fn keyed_rng(seed: u64, frame: u32, stream: &str) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(frame as u64).to_le_bytes());
    key[16..24].copy_from_slice(&fnv1a(stream).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Index drawn from `weights` by inverse CDF.
pub(crate) fn sample_index(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w / total;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn emitted(scenario: &Scenario, sensor: &SensorSpec, frame: u32) -> usize {
    let truth = scenario.truth_at(frame as f64);
    let u: f64 = keyed_rng(scenario.seed, frame, &sensor.id).random();
    sample_index(&sensor.emission[truth], u)
}

fn reading(scenario: &Scenario, sensor: &SensorSpec, states: &[String], frame: u32) -> usize {
    let n = states.len() as u32;
    match &sensor.failure {
        FailureMode::Stuck { state, onset } if frame >= *onset => {
            states.iter().position(|s| s == state).expect("validated stuck state")
        }
        FailureMode::Drift { every, onset } if frame >= *onset => {
            let start = emitted(scenario, sensor, *onset) as u32;
            (start + (frame - onset) / every).min(n - 1) as usize
        }
        FailureMode::Sinusoidal { period, onset } if frame >= *onset => {
            (((frame - onset) % period) * n / period) as usize
        }
        _ => emitted(scenario, sensor, frame),
    }
}

/// Sensor readings for `frame`, a pure function of the scenario and frame.
pub fn step(scenario: &Scenario, frame: u32) -> Result<TelemetryFrame> {
    if frame >= scenario.horizon {
        return Err(Error::FrameOutOfRange {
            frame,
            horizon: scenario.horizon,
        });
    }
    let net = scenario.model.network();
    let evidence = scenario
        .sensors
        .iter()
        .map(|s| {
            let states = &net.variable(&s.id).expect("validated sensor").states;
            (s.id.clone(), states[reading(scenario, s, states, frame)].clone())
        })
        .collect();
    Ok(TelemetryFrame { frame, evidence })
}
