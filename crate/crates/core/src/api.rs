//! Request and response bodies for the HTTP service, with the handlers that
//! compute them. The CLI calls the same handlers when run without a remote
//! server, so local and remote output are identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bayesnet::{
    enumerate_posterior, posterior, validate_network, Distribution, EvidenceSet, Network, NetworkFile,
    ValidationReport,
};
use crate::decision::DecisionModel;
use crate::error::{Error, Result};
use crate::metrics::{
    best_reveal_subset, MetricContext, MetricKind, MetricResult, ReviewTimeModel, SearchStrategy, SubsetEvaluation,
};
use crate::policy::{
    decide_auxiliary, highlight, minimal_consistent_set, telescope_levels, Context, EvidencePartition, Highlight,
    PolicyConfig, Template,
};
use crate::simulator::{evaluate_policies, EpisodeResult, EpisodeSummary, Operator, PolicyReport, Scenario};
use crate::user_model::{MappingKind, UserModelFile, UserResponseModel};

/// Body of every error response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
}

impl From<&Error> for ApiError {
    fn from(e: &Error) -> Self {
        ApiError {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidateRequest {
    /// A network or decision-model document.
    pub model: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub valid: bool,
    pub violations: ValidationReport,
    /// Problems outside the network itself, such as utility coverage.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub model_errors: Vec<String>,
}

pub fn validate(req: &ValidateRequest) -> Result<ValidateResponse> {
    let file: NetworkFile =
        serde_json::from_value(req.model.clone()).map_err(|e| Error::parse("network", e))?;
    let def = file.to_def()?;
    let violations = validate_network(&def);
    let mut model_errors = Vec::new();
    if violations.is_empty() && req.model.get("actions").is_some() {
        let text = req.model.to_string();
        if let Err(e) = DecisionModel::from_json(&text) {
            model_errors.push(e.to_string());
        }
    }
    Ok(ValidateResponse {
        valid: violations.is_empty() && model_errors.is_empty(),
        violations,
        model_errors,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InferRequest {
    pub model: Network,
    #[serde(default)]
    pub evidence: EvidenceSet,
    /// Defaults to the hypothesis variable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
    /// Use joint enumeration instead of variable elimination.
    #[serde(default)]
    pub enumerate: bool,
}

pub fn infer(req: &InferRequest) -> Result<Distribution> {
    let query = req.query.as_deref().unwrap_or(req.model.hypothesis_var());
    if req.enumerate {
        enumerate_posterior(&req.model, &req.evidence, query)
    } else {
        posterior(&req.model, &req.evidence, query)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UserKind {
    /// The gold model choosing by argmax.
    Gold,
    /// The gold model with a softmax over expected utilities.
    Softmax { temperature: f64 },
}

/// Who the operator is: a built-in variant of the gold model or a user-model
/// document built against the gold model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UserSpec {
    Builtin(UserKind),
    File(Box<UserModelFile>),
}

impl Default for UserSpec {
    fn default() -> Self {
        UserSpec::Builtin(UserKind::Gold)
    }
}

impl UserSpec {
    pub fn build(&self, gold: &DecisionModel) -> Result<UserResponseModel> {
        match self {
            UserSpec::Builtin(UserKind::Gold) => Ok(UserResponseModel::gold_argmax(gold)),
            UserSpec::Builtin(UserKind::Softmax { temperature }) => {
                Ok(UserResponseModel::gold(gold, MappingKind::Monotone, *temperature))
            }
            UserSpec::File(f) => f.build(gold),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRequest {
    pub model: DecisionModel,
    pub kind: MetricKind,
    /// Evidence to reveal.
    pub reveal: EvidenceSet,
    /// Evidence already shown.
    #[serde(default)]
    pub shown: EvidenceSet,
    pub full: EvidenceSet,
    #[serde(default = "ReviewTimeModel::zero")]
    pub review: ReviewTimeModel,
    /// Only used by EVDI.
    #[serde(default)]
    pub user: UserSpec,
}

pub fn metrics(req: &MetricsRequest) -> Result<MetricResult> {
    req.review.validate()?;
    let user;
    let mut ctx = MetricContext::new(&req.model, &req.review);
    if req.kind == MetricKind::Evdi {
        user = req.user.build(&req.model)?;
        ctx = ctx.with_user(&user);
    }
    ctx.scorer(&req.full)?.metric(req.kind, &req.reveal, &req.shown)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "plan", rename_all = "snake_case")]
pub enum PlanRequest {
    Subset {
        model: DecisionModel,
        #[serde(default)]
        shown: EvidenceSet,
        full: EvidenceSet,
        metric: MetricKind,
        strategy: SearchStrategy,
        #[serde(default = "ReviewTimeModel::zero")]
        review: ReviewTimeModel,
        #[serde(default)]
        user: UserSpec,
    },
    Telescope {
        model: DecisionModel,
        templates: Vec<Template>,
        full: EvidenceSet,
        metric: MetricKind,
        context: Context,
        #[serde(default = "ReviewTimeModel::zero")]
        review: ReviewTimeModel,
        #[serde(default)]
        user: UserSpec,
    },
    Aux {
        model: DecisionModel,
        partition: EvidencePartition,
        full: EvidenceSet,
        metric: MetricKind,
        #[serde(default = "ReviewTimeModel::zero")]
        review: ReviewTimeModel,
        #[serde(default)]
        user: UserSpec,
    },
    Minimal {
        model: DecisionModel,
        full: EvidenceSet,
    },
    Highlight {
        model: DecisionModel,
        displayed: EvidenceSet,
        full: EvidenceSet,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plan", rename_all = "snake_case")]
pub enum PlanResponse {
    Subset {
        subset: EvidenceSet,
        result: MetricResult,
        evaluated: Vec<SubsetEvaluation>,
    },
    Telescope {
        levels: BTreeMap<String, usize>,
    },
    Aux {
        clusters: Vec<String>,
    },
    Minimal {
        evidence: EvidenceSet,
    },
    Highlight {
        highlights: Vec<Highlight>,
    },
}

fn with_user<'a>(
    ctx: MetricContext<'a>,
    metric: MetricKind,
    user: &'a Option<UserResponseModel>,
) -> MetricContext<'a> {
    match (metric, user) {
        (MetricKind::Evdi, Some(u)) => ctx.with_user(u),
        _ => ctx,
    }
}

fn user_for(metric: MetricKind, spec: &UserSpec, model: &DecisionModel) -> Result<Option<UserResponseModel>> {
    if metric == MetricKind::Evdi {
        spec.build(model).map(Some)
    } else {
        Ok(None)
    }
}

pub fn plan(req: &PlanRequest) -> Result<PlanResponse> {
    match req {
        PlanRequest::Subset {
            model,
            shown,
            full,
            metric,
            strategy,
            review,
            user,
        } => {
            let u = user_for(*metric, user, model)?;
            let ctx = with_user(MetricContext::new(model, review), *metric, &u);
            let search = best_reveal_subset(&ctx, shown, full, *metric, *strategy)?;
            Ok(PlanResponse::Subset {
                subset: search.subset,
                result: search.result,
                evaluated: search.evaluated,
            })
        }
        PlanRequest::Telescope {
            model,
            templates,
            full,
            metric,
            context,
            review,
            user,
        } => {
            let u = user_for(*metric, user, model)?;
            let ctx = with_user(MetricContext::new(model, review), *metric, &u);
            Ok(PlanResponse::Telescope {
                levels: telescope_levels(&ctx, templates, full, *metric, context)?,
            })
        }
        PlanRequest::Aux {
            model,
            partition,
            full,
            metric,
            review,
            user,
        } => {
            let u = user_for(*metric, user, model)?;
            let ctx = with_user(MetricContext::new(model, review), *metric, &u);
            Ok(PlanResponse::Aux {
                clusters: decide_auxiliary(&ctx, partition, full, *metric)?,
            })
        }
        PlanRequest::Minimal { model, full } => Ok(PlanResponse::Minimal {
            evidence: minimal_consistent_set(model, full)?,
        }),
        PlanRequest::Highlight {
            model,
            displayed,
            full,
            n,
        } => {
            if let Some(v) = displayed.vars().find(|v| !full.contains(v)) {
                return Err(Error::NotInFullEvidence(v.to_string()));
            }
            Ok(PlanResponse::Highlight {
                highlights: highlight(model, displayed, full, *n)?,
            })
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorSpec {
    #[serde(default)]
    pub user: UserSpec,
    /// Extra reaction time on top of the review delay.
    #[serde(default)]
    pub latency: f64,
}

impl Default for OperatorSpec {
    fn default() -> Self {
        OperatorSpec {
            user: UserSpec::default(),
            latency: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateRequest {
    pub scenarios: Vec<Scenario>,
    pub policies: Vec<PolicyConfig>,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default = "one")]
    pub replications: u32,
    /// Also return every episode's frame-by-frame record.
    #[serde(default)]
    pub logs: bool,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateResponse {
    pub report: PolicyReport,
    pub episodes: Vec<EpisodeSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub logs: Vec<EpisodeResult>,
}

/// All scenarios must share one action set so a single operator can play
/// them; the operator is built against each scenario's model.
pub fn simulate(req: &SimulateRequest) -> Result<SimulateResponse> {
    if req.scenarios.is_empty() || req.policies.is_empty() {
        return Err(Error::InvalidScenario("need at least one scenario and one policy".into()));
    }
    if !(req.operator.latency >= 0.0) {
        return Err(Error::InvalidScenario("operator latency must be nonnegative".into()));
    }
    let mut summaries = Vec::new();
    let mut logs = Vec::new();
    for s in &req.scenarios {
        let operator = Operator::new(req.operator.user.build(&s.model)?).with_latency(req.operator.latency);
        let (_, runs) = evaluate_policies(std::slice::from_ref(s), &req.policies, &operator, req.replications)?;
        summaries.extend(runs.iter().map(|r| r.summary()));
        if req.logs {
            logs.extend(runs);
        }
    }
    Ok(SimulateResponse {
        report: PolicyReport::from_summaries(&summaries),
        episodes: summaries,
        logs,
    })
}

/// How a live session advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Pacing {
    /// Only on explicit `frame` messages.
    #[default]
    Lockstep,
    /// On a timer.
    Timer { interval_ms: u64 },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    /// Falls back to the scenario the server was started with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    /// Falls back to the server's default policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyConfig>,
    /// Falls back to the server's default pacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pacing: Option<Pacing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionResponse {
    pub session: String,
    pub hello: crate::protocol::WireMessage,
}
