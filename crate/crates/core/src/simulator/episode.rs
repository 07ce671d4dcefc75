use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{keyed_rng, sample_index, step, Scenario};
use crate::bayesnet::EvidenceSet;
use crate::error::{Error, Result};
use crate::metrics::{review_time, MetricContext, MetricKind};
use crate::policy::{DisplayManager, DisplayState, PolicyConfig};
use crate::user_model::{user_action_distribution, UserResponseModel};

/// A simulated operator: a user model plus a fixed reaction latency added
/// on top of the review time.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub user: UserResponseModel,
    pub latency: f64,
}

impl Operator {
    pub fn new(user: UserResponseModel) -> Self {
        Operator { user, latency: 0.0 }
    }

    /// The gold model acting by argmax.
    pub fn gold(model: &crate::decision::DecisionModel) -> Self {
        Self::new(UserResponseModel::gold_argmax(model))
    }

    pub fn with_latency(mut self, latency: f64) -> Self {
        self.latency = latency;
        self
    }

    pub fn label(&self) -> String {
        if self.latency > 0.0 {
            format!("{}+{}", self.user.label(), self.latency)
        } else {
            self.user.label().to_string()
        }
    }
}

/// Log entry for one presented frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: u32,
    pub phase: String,
    pub evidence: EvidenceSet,
    pub displayed: EvidenceSet,
    pub display_state: DisplayState,
    /// Best action under the full frame at zero delay.
    pub gold_action: String,
    /// Net value of the displayed set over showing nothing.
    pub nevri: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator_action: Option<String>,
}

/// How an episode ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub action: String,
    /// Frame the action responded to, or the horizon if none was taken.
    pub frame: u32,
    pub action_time: f64,
    /// Time from fault onset to the action, never negative.
    pub delay: f64,
    pub utility: f64,
    /// False when the horizon was reached without a decisive action.
    pub by_operator: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scenario: String,
    pub seed: u64,
    pub policy: String,
    pub operator: String,
    pub outcome: Outcome,
    pub frames: Vec<FrameRecord>,
}

/// Per-episode numbers that reports aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub scenario: String,
    pub seed: u64,
    pub policy: String,
    pub operator: String,
    pub action: String,
    pub frame: u32,
    pub delay: f64,
    pub utility: f64,
    pub frames: usize,
    pub matches: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum LogLine {
    Frame(Box<FrameRecord>),
    Summary { summary: EpisodeSummary },
}

impl EpisodeResult {
    pub fn summary(&self) -> EpisodeSummary {
        EpisodeSummary {
            scenario: self.scenario.clone(),
            seed: self.seed,
            policy: self.policy.clone(),
            operator: self.operator.clone(),
            action: self.outcome.action.clone(),
            frame: self.outcome.frame,
            delay: self.outcome.delay,
            utility: self.outcome.utility,
            frames: self.frames.len(),
            matches: self
                .frames
                .iter()
                .filter(|f| f.operator_action.as_deref() == Some(f.gold_action.as_str()))
                .count(),
        }
    }

    /// One JSON object per frame, then a closing summary object.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        for f in &self.frames {
            out.push_str(&serde_json::to_string(f).expect("records serialize"));
            out.push('\n');
        }
        let summary = serde_json::json!({ "summary": self.summary() });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

impl EpisodeSummary {
    /// Reads the summary line of an episode log.
    pub fn from_log(text: &str) -> Result<Self> {
        let mut found = None;
        let mut frames = 0;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            match serde_json::from_str(line).map_err(|e| Error::parse("episode log line", e))? {
                LogLine::Summary { summary } => found = Some(summary),
                LogLine::Frame(f) => frames = frames.max(f.frame as usize + 1),
            }
        }
        let summary = found.ok_or_else(|| Error::InvalidScenario("episode log has no summary line".into()))?;
        if frames != summary.frames {
            return Err(Error::InvalidScenario(format!(
                "episode log has {frames} frames but its summary counts {}",
                summary.frames
            )));
        }
        Ok(summary)
    }

    pub fn match_rate(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.matches as f64 / self.frames as f64
        }
    }
}

/// Step-by-step episode. The caller presents frames and reports actions;
/// [`run_episode`] drives it with a simulated operator and the session
/// service drives it from wire messages.
#[derive(Debug, Clone)]
pub struct Episode {
    scenario: Scenario,
    manager: DisplayManager,
    policy: PolicyConfig,
    next: u32,
    frames: Vec<FrameRecord>,
    outcome: Option<Outcome>,
}

impl Episode {
    /// `user` is consulted only by EVDI-based policies.
    pub fn new(scenario: Scenario, policy: PolicyConfig, user: Option<&UserResponseModel>) -> Result<Self> {
        scenario.validate()?;
        let mut manager = DisplayManager::new(
            scenario.model.clone(),
            scenario.review.clone(),
            scenario.templates.clone(),
            scenario.partition.clone(),
            policy,
        )?;
        if let Some(u) = user {
            manager = manager.with_user(u.clone())?;
        } else if policy.metric == MetricKind::Evdi {
            manager = manager.with_user(UserResponseModel::gold_argmax(&scenario.model))?;
        }
        Ok(Episode {
            scenario,
            manager,
            policy,
            next: 0,
            frames: Vec::new(),
            outcome: None,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn policy(&self) -> &PolicyConfig {
        &self.policy
    }

    /// Index of the next frame to present.
    pub fn next_frame(&self) -> u32 {
        self.next
    }

    /// Most recently presented frame.
    pub fn current(&self) -> Option<&FrameRecord> {
        self.frames.last()
    }

    pub fn frames(&self) -> &[FrameRecord] {
        &self.frames
    }

    pub fn outcome(&self) -> Option<&Outcome> {
        self.outcome.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    /// Whether every frame has been presented.
    pub fn at_horizon(&self) -> bool {
        self.next >= self.scenario.horizon
    }

    fn default_action(&self) -> &str {
        self.scenario
            .default_action
            .as_deref()
            .unwrap_or(&self.scenario.model.actions()[0].id)
    }

    /// Review delay for a displayed set in the context of `frame`.
    pub fn review_delay(&self, frame: u32, displayed: &EvidenceSet) -> f64 {
        let criticality = self.scenario.context_at(frame).criticality;
        review_time(&self.scenario.review.scaled(criticality), displayed)
    }

    /// Generates the next frame and decides what to display.
    pub fn present(&mut self) -> Result<&FrameRecord> {
        if self.is_done() {
            return Err(Error::Session("episode has ended".into()));
        }
        let telemetry = step(&self.scenario, self.next)?;
        let context = self.scenario.context_at(self.next).clone();
        let display = self.manager.display(&telemetry.evidence, &context)?;
        debug_assert!(display.displayed.is_subset_of(&telemetry.evidence));
        let review = self.scenario.review.scaled(context.criticality);
        let nevri = MetricContext::new(&self.scenario.model, &review)
            .scorer(&telemetry.evidence)?
            .metric(MetricKind::Nevri, &display.displayed, &EvidenceSet::new())?
            .value;
        let gold_action = display.state.ranked_actions[0].id.clone();
        self.frames.push(FrameRecord {
            frame: self.next,
            phase: context.phase,
            evidence: telemetry.evidence,
            displayed: display.displayed,
            display_state: display.state,
            gold_action,
            nevri,
            operator_action: None,
        });
        self.next += 1;
        Ok(self.frames.last().expect("just pushed"))
    }

    /// Applies an operator action responding to `frame`, taking effect at
    /// `action_time`. The status-quo action is recorded but does not end the
    /// episode; any other action does.
    pub fn act(&mut self, action: &str, frame: u32, action_time: f64) -> Result<Option<&Outcome>> {
        if self.is_done() {
            return Err(Error::Session("episode has ended".into()));
        }
        if !self.scenario.model.has_action(action) {
            return Err(Error::UnknownAction(action.to_string()));
        }
        let record = self
            .frames
            .iter_mut()
            .rev()
            .find(|r| r.frame == frame)
            .ok_or_else(|| Error::Session(format!("frame {frame} was not presented")))?;
        record.operator_action = Some(action.to_string());
        if action == self.default_action() {
            return Ok(None);
        }
        self.outcome = Some(self.realize(action, frame, action_time, true)?);
        Ok(self.outcome.as_ref())
    }

    /// Ends the episode at the horizon holding the status-quo action.
    pub fn finish(&mut self) -> Result<&Outcome> {
        if self.outcome.is_none() {
            let horizon = self.scenario.horizon;
            let action = self.default_action().to_string();
            self.outcome = Some(self.realize(&action, horizon, horizon as f64, false)?);
        }
        Ok(self.outcome.as_ref().expect("set above"))
    }

    fn realize(&self, action: &str, frame: u32, action_time: f64, by_operator: bool) -> Result<Outcome> {
        let delay = (action_time - self.scenario.ground_truth.onset as f64).max(0.0);
        let truth = self.scenario.truth_at(action_time);
        let utility = self.scenario.model.utility().value(action, truth, delay)?;
        Ok(Outcome {
            action: action.to_string(),
            frame,
            action_time,
            delay,
            utility,
            by_operator,
        })
    }

    pub fn into_result(mut self, operator: &str) -> Result<EpisodeResult> {
        self.finish()?;
        Ok(EpisodeResult {
            scenario: self.scenario.name.clone(),
            seed: self.scenario.seed,
            policy: self.policy.to_string(),
            operator: operator.to_string(),
            outcome: self.outcome.expect("finished"),
            frames: self.frames,
        })
    }
}

/// Runs one episode with a simulated operator who, at each frame, draws an
/// action from its response model given the displayed evidence and the
/// review delay, and acts after that delay plus its latency.
pub fn run_episode(scenario: &Scenario, policy: PolicyConfig, operator: &Operator) -> Result<EpisodeResult> {
    operator.user.check_compatible(&scenario.model)?;
    let mut episode = Episode::new(scenario.clone(), policy, Some(&operator.user))?;
    while !episode.at_horizon() {
        let record = episode.present()?;
        let frame = record.frame;
        let displayed = record.displayed.clone();
        let delay = episode.review_delay(frame, &displayed);
        let dist = user_action_distribution(&operator.user, &displayed, delay)?;
        let u: f64 = keyed_rng(scenario.seed, frame, "operator").random();
        let action = dist.actions[sample_index(&dist.probabilities, u)].clone();
        if episode
            .act(&action, frame, frame as f64 + delay + operator.latency)?
            .is_some()
        {
            break;
        }
    }
    episode.into_result(&operator.label())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub policy: String,
    pub episodes: usize,
    pub mean_utility: f64,
    pub mean_delay: f64,
    /// Fraction of presented frames where the operator chose the gold action.
    pub match_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub rows: Vec<ReportRow>,
}

impl PolicyReport {
    /// Groups by scenario and policy, keeping first-seen order.
    pub fn from_summaries(summaries: &[EpisodeSummary]) -> Self {
        let mut order: Vec<(String, String)> = Vec::new();
        let mut groups: BTreeMap<(String, String), Vec<&EpisodeSummary>> = BTreeMap::new();
        for s in summaries {
            let key = (s.scenario.clone(), s.policy.clone());
            if !groups.contains_key(&key) {
                order.push(key.clone());
            }
            groups.entry(key).or_default().push(s);
        }
        let rows = order
            .into_iter()
            .map(|key| {
                let g = &groups[&key];
                let n = g.len() as f64;
                let frames: usize = g.iter().map(|s| s.frames).sum();
                let matches: usize = g.iter().map(|s| s.matches).sum();
                ReportRow {
                    scenario: key.0,
                    policy: key.1,
                    episodes: g.len(),
                    mean_utility: g.iter().map(|s| s.utility).sum::<f64>() / n,
                    mean_delay: g.iter().map(|s| s.delay).sum::<f64>() / n,
                    match_rate: if frames == 0 {
                        0.0
                    } else {
                        matches as f64 / frames as f64
                    },
                }
            })
            .collect();
        PolicyReport { rows }
    }

    pub fn row(&self, scenario: &str, policy: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.scenario == scenario && r.policy == policy)
    }
}

/// Runs every (scenario, policy) pair for `replications` episodes;
/// replication `r` uses the scenario seed plus `r`.
pub fn evaluate_policies(
    scenarios: &[Scenario],
    policies: &[PolicyConfig],
    operator: &Operator,
    replications: u32,
) -> Result<(PolicyReport, Vec<EpisodeResult>)> {
    if replications == 0 {
        return Err(Error::InvalidScenario("replications must be at least 1".into()));
    }
    let jobs: Vec<(&Scenario, &PolicyConfig, u32)> = scenarios
        .iter()
        .flat_map(|s| policies.iter().flat_map(move |p| (0..replications).map(move |r| (s, p, r))))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(s, p, r)| run_episode(&s.reseeded(s.seed.wrapping_add(r as u64)), *p, operator))
        .collect::<Result<Vec<_>>>()?;
    let summaries: Vec<EpisodeSummary> = results.iter().map(EpisodeResult::summary).collect();
    Ok((PolicyReport::from_summaries(&summaries), results))
}
