//! Value of revealing hidden-but-known evidence to a decision maker.
//!
//! All three metrics compare the decision taken with evidence `E` shown to
//! the decision taken with `E + e` shown. Actions are chosen from the
//! posterior given the *shown* evidence; their value is always scored
//! against the posterior given the *full* evidence known to the display
//! manager.
//!
//! * EVRI: both decisions at `t = 0`, no review cost.
//! * NEVRI: each decision taken at the review time of what was shown.
//! * EVDI: the optimal decision replaced by a user model's distribution over
//!   actions, also at review time.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayesnet::{Distribution, EvidenceSet};
use crate::decision::{expected_utility, DecisionModel};
use crate::error::{Error, Result};
use crate::user_model::{user_action_distribution, UserResponseModel};

/// Largest candidate set the exhaustive subset search will enumerate.
pub const EXHAUSTIVE_CAP: usize = 20;

/// Below this many candidates the exhaustive search stays on one thread.
const PARALLEL_THRESHOLD: usize = 10;

/// Deterministic review delay: `base_delay + Σ cost(e)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewTimeModel {
    #[serde(default)]
    pub base_delay: f64,
    #[serde(default)]
    pub default_cost: f64,
    #[serde(default)]
    pub per_item_cost: BTreeMap<String, f64>,
}

impl Default for ReviewTimeModel {
    fn default() -> Self {
        ReviewTimeModel::zero()
    }
}

impl ReviewTimeModel {
    pub fn zero() -> Self {
        ReviewTimeModel {
            base_delay: 0.0,
            default_cost: 0.0,
            per_item_cost: BTreeMap::new(),
        }
    }

    /// Every item costs one time unit.
    pub fn unit() -> Self {
        ReviewTimeModel {
            default_cost: 1.0,
            ..Self::zero()
        }
    }

    pub fn with_cost(mut self, var: &str, cost: f64) -> Self {
        self.per_item_cost.insert(var.to_string(), cost);
        self
    }

    pub fn cost(&self, var: &str) -> f64 {
        self.per_item_cost.get(var).copied().unwrap_or(self.default_cost)
    }

    /// All item costs and the base delay multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ReviewTimeModel {
            base_delay: self.base_delay * factor,
            default_cost: self.default_cost * factor,
            per_item_cost: self
                .per_item_cost
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x >= 0.0 && x.is_finite();
        if ok(self.base_delay) && ok(self.default_cost) && self.per_item_cost.values().all(|&c| ok(c)) {
            Ok(())
        } else {
            Err(Error::InvalidModel("review costs must be finite and nonnegative".into()))
        }
    }
}

pub fn review_time(rtm: &ReviewTimeModel, shown: &EvidenceSet) -> f64 {
    rtm.base_delay + shown.vars().map(|v| rtm.cost(v)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Evri,
    Nevri,
    Evdi,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Evri => "evri",
            MetricKind::Nevri => "nevri",
            MetricKind::Evdi => "evdi",
        })
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "evri" => Ok(MetricKind::Evri),
            "nevri" => Ok(MetricKind::Nevri),
            "evdi" => Ok(MetricKind::Evdi),
            other => Err(format!("unknown metric `{other}` (expected evri, nevri or evdi)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub value: f64,
    /// For EVDI, the most probable user action.
    pub action_before: String,
    pub action_after: String,
    pub delay_before: f64,
    pub delay_after: f64,
    pub eu_before: f64,
    pub eu_after: f64,
}

/// Everything a metric needs besides the evidence sets.
#[derive(Debug, Clone, Copy)]
pub struct MetricContext<'a> {
    pub model: &'a DecisionModel,
    pub review: &'a ReviewTimeModel,
    pub user: Option<&'a UserResponseModel>,
}

impl<'a> MetricContext<'a> {
    pub fn new(model: &'a DecisionModel, review: &'a ReviewTimeModel) -> Self {
        MetricContext {
            model,
            review,
            user: None,
        }
    }

    pub fn with_user(mut self, user: &'a UserResponseModel) -> Self {
        self.user = Some(user);
        self
    }

    /// Binds the full evidence, computing the scoring posterior once.
    pub fn scorer(&self, full: &EvidenceSet) -> Result<Scorer<'a>> {
        let gold = self.model.network().hypothesis_posterior(full)?;
        Ok(Scorer {
            ctx: *self,
            full: full.clone(),
            gold,
        })
    }
}

/// Metric evaluator with the full evidence and its posterior fixed.
#[derive(Debug, Clone)]
pub struct Scorer<'a> {
    ctx: MetricContext<'a>,
    full: EvidenceSet,
    gold: Distribution,
}

impl<'a> Scorer<'a> {
    pub fn full(&self) -> &EvidenceSet {
        &self.full
    }

    pub fn context(&self) -> &MetricContext<'a> {
        &self.ctx
    }

    /// Posterior over hypotheses given all available evidence.
    pub fn gold_posterior(&self) -> &Distribution {
        &self.gold
    }

    fn check(&self, reveal: &EvidenceSet, shown: &EvidenceSet) -> Result<()> {
        if let Some(v) = reveal.vars().find(|v| shown.contains(v)) {
            return Err(Error::OverlappingEvidence(v.to_string()));
        }
        for (v, s) in reveal.iter().chain(shown.iter()) {
            if self.full.get(v) != Some(s) {
                return Err(Error::NotInFullEvidence(v.to_string()));
            }
        }
        Ok(())
    }

    /// Value of revealing `reveal` when `shown` is already displayed.
    pub fn metric(&self, kind: MetricKind, reveal: &EvidenceSet, shown: &EvidenceSet) -> Result<MetricResult> {
        self.check(reveal, shown)?;
        let after = shown.union(reveal);
        let (t_before, t_after) = match kind {
            MetricKind::Evri => (0.0, 0.0),
            MetricKind::Nevri | MetricKind::Evdi => (
                review_time(self.ctx.review, shown),
                review_time(self.ctx.review, &after),
            ),
        };
        let (action_before, eu_before) = self.decide(kind, shown, t_before)?;
        let (action_after, eu_after) = if reveal.is_empty() {
            (action_before.clone(), eu_before)
        } else {
            self.decide(kind, &after, t_after)?
        };
        let value = if kind == MetricKind::Evri && action_before == action_after {
            0.0
        } else {
            eu_after - eu_before
        };
        Ok(MetricResult {
            value,
            action_before,
            action_after,
            delay_before: t_before,
            delay_after: t_after,
            eu_before,
            eu_after,
        })
    }

    /// The decision made with `shown` displayed at delay `t`, and its value
    /// under the full-evidence posterior.
    fn decide(&self, kind: MetricKind, shown: &EvidenceSet, t: f64) -> Result<(String, f64)> {
        let model = self.ctx.model;
        match kind {
            MetricKind::Evri | MetricKind::Nevri => {
                let hyp = model.network().hypothesis_posterior(shown)?;
                let choice = model.best_action(&hyp, t)?;
                let eu = expected_utility(model, &choice.action, &self.gold, t)?;
                Ok((choice.action, eu))
            }
            MetricKind::Evdi => {
                let user = self.ctx.user.ok_or_else(|| {
                    Error::InvalidModel("EVDI needs a user response model".into())
                })?;
                user.check_compatible(model)?;
                let actions = user_action_distribution(user, shown, t)?;
                let mut eu = 0.0;
                for (a, p) in actions.iter() {
                    if p > 0.0 {
                        eu += p * expected_utility(model, a, &self.gold, t)?;
                    }
                }
                Ok((actions.mode().to_string(), eu))
            }
        }
    }

    /// Action chosen from the displayed posterior at `t = 0`.
    pub fn displayed_action(&self, shown: &EvidenceSet) -> Result<String> {
        let hyp = self.ctx.model.network().hypothesis_posterior(shown)?;
        Ok(self.ctx.model.best_action(&hyp, 0.0)?.action)
    }

    /// Gold-standard action at `t = 0`.
    pub fn gold_action(&self) -> Result<String> {
        Ok(self.ctx.model.best_action(&self.gold, 0.0)?.action)
    }
}

pub fn evri(
    model: &DecisionModel,
    reveal: &EvidenceSet,
    shown: &EvidenceSet,
    full: &EvidenceSet,
) -> Result<MetricResult> {
    let rtm = ReviewTimeModel::zero();
    MetricContext::new(model, &rtm)
        .scorer(full)?
        .metric(MetricKind::Evri, reveal, shown)
}

pub fn nevri(
    model: &DecisionModel,
    rtm: &ReviewTimeModel,
    reveal: &EvidenceSet,
    shown: &EvidenceSet,
    full: &EvidenceSet,
) -> Result<MetricResult> {
    MetricContext::new(model, rtm)
        .scorer(full)?
        .metric(MetricKind::Nevri, reveal, shown)
}

pub fn evdi(
    model: &DecisionModel,
    user: &UserResponseModel,
    rtm: &ReviewTimeModel,
    reveal: &EvidenceSet,
    shown: &EvidenceSet,
    full: &EvidenceSet,
) -> Result<MetricResult> {
    MetricContext::new(model, rtm)
        .with_user(user)
        .scorer(full)?
        .metric(MetricKind::Evdi, reveal, shown)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "depth")]
pub enum SearchStrategy {
    Exhaustive,
    Greedy,
    Lookahead(usize),
}

impl fmt::Display for SearchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchStrategy::Exhaustive => f.write_str("exhaustive"),
            SearchStrategy::Greedy => f.write_str("greedy"),
            SearchStrategy::Lookahead(k) => write!(f, "lookahead:{k}"),
        }
    }
}

impl FromStr for SearchStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "exhaustive" => Ok(SearchStrategy::Exhaustive),
            "greedy" => Ok(SearchStrategy::Greedy),
            _ => {
                let depth = lower
                    .strip_prefix("lookahead")
                    .map(|r| r.trim_start_matches([':', '(', '=']).trim_end_matches(')'))
                    .ok_or_else(|| format!("unknown strategy `{s}`"))?;
                let k: usize = depth.parse().map_err(|_| format!("bad lookahead depth in `{s}`"))?;
                if k == 0 {
                    return Err("lookahead depth must be at least 1".into());
                }
                Ok(SearchStrategy::Lookahead(k))
            }
        }
    }
}

/// One subset visited during a search, valued relative to the shown set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetEvaluation {
    pub subset: Vec<String>,
    pub metric: MetricKind,
    pub value: f64,
    pub action_before: String,
    pub action_after: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSearch {
    pub subset: EvidenceSet,
    pub result: MetricResult,
    pub evaluated: Vec<SubsetEvaluation>,
}

/// Orders candidate subsets: higher value first, then fewer items, then
/// lexicographically smaller id list.
pub fn subset_precedes(a_value: f64, a_ids: &[String], b_value: f64, b_ids: &[String]) -> bool {
    if a_value != b_value {
        return a_value > b_value;
    }
    if a_ids.len() != b_ids.len() {
        return a_ids.len() < b_ids.len();
    }
    a_ids < b_ids
}

/// Finds the subset of `full \ shown` whose revelation maximizes the metric.
pub fn best_reveal_subset(
    ctx: &MetricContext<'_>,
    shown: &EvidenceSet,
    full: &EvidenceSet,
    kind: MetricKind,
    strategy: SearchStrategy,
) -> Result<SubsetSearch> {
    let scorer = ctx.scorer(full)?;
    let candidates: Vec<(String, String)> = full
        .iter()
        .filter(|(v, _)| !shown.contains(v))
        .map(|(v, s)| (v.to_string(), s.to_string()))
        .collect();
    match strategy {
        SearchStrategy::Exhaustive => exhaustive(&scorer, shown, &candidates, kind),
        SearchStrategy::Greedy => lookahead(&scorer, shown, &candidates, kind, 1),
        SearchStrategy::Lookahead(k) => lookahead(&scorer, shown, &candidates, kind, k.max(1)),
    }
}

fn subset_of(candidates: &[(String, String)], mask: u64) -> EvidenceSet {
    candidates
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, (v, s))| (v.clone(), s.clone()))
        .collect()
}

fn evaluation(kind: MetricKind, subset: &EvidenceSet, r: &MetricResult) -> SubsetEvaluation {
    SubsetEvaluation {
        subset: subset.vars().map(str::to_string).collect(),
        metric: kind,
        value: r.value,
        action_before: r.action_before.clone(),
        action_after: r.action_after.clone(),
    }
}

fn exhaustive(
    scorer: &Scorer<'_>,
    shown: &EvidenceSet,
    candidates: &[(String, String)],
    kind: MetricKind,
) -> Result<SubsetSearch> {
    if candidates.len() > EXHAUSTIVE_CAP {
        return Err(Error::SearchTooLarge(candidates.len(), EXHAUSTIVE_CAP));
    }
    let masks: Vec<u64> = (0..1u64 << candidates.len()).collect();
    let eval = |&mask: &u64| -> Result<(EvidenceSet, MetricResult)> {
        let subset = subset_of(candidates, mask);
        let r = scorer.metric(kind, &subset, shown)?;
        Ok((subset, r))
    };
    // evaluation may fan out; the reduction below is sequential in mask order
    let results: Vec<(EvidenceSet, MetricResult)> = if candidates.len() >= PARALLEL_THRESHOLD {
        masks.par_iter().map(eval).collect::<Result<_>>()?
    } else {
        masks.iter().map(eval).collect::<Result<_>>()?
    };

    let mut best = 0;
    let mut best_ids: Vec<String> = Vec::new();
    for (i, (subset, r)) in results.iter().enumerate().skip(1) {
        let ids: Vec<String> = subset.vars().map(str::to_string).collect();
        if subset_precedes(r.value, &ids, results[best].1.value, &best_ids) {
            best = i;
            best_ids = ids;
        }
    }
    let evaluated = results.iter().map(|(s, r)| evaluation(kind, s, r)).collect();
    let (subset, result) = results.into_iter().nth(best).expect("empty subset always evaluated");
    Ok(SubsetSearch {
        subset,
        result,
        evaluated,
    })
}

/// Greedy search generalized to extensions of up to `depth` items per step.
/// Stops when no extension strictly improves on the current subset.
fn lookahead(
    scorer: &Scorer<'_>,
    shown: &EvidenceSet,
    candidates: &[(String, String)],
    kind: MetricKind,
    depth: usize,
) -> Result<SubsetSearch> {
    let mut chosen = EvidenceSet::new();
    let mut current = scorer.metric(kind, &chosen, shown)?;
    let mut evaluated = vec![evaluation(kind, &chosen, &current)];

    loop {
        let remaining: Vec<(String, String)> = candidates
            .iter()
            .filter(|(v, _)| !chosen.contains(v))
            .cloned()
            .collect();
        if remaining.is_empty() {
            break;
        }
        let mut best: Option<(Vec<String>, EvidenceSet, MetricResult)> = None;
        for ext in extensions(remaining.len(), depth) {
            let step: EvidenceSet = ext.iter().map(|&i| remaining[i].clone()).collect();
            let trial = chosen.union(&step);
            let r = scorer.metric(kind, &trial, shown)?;
            evaluated.push(evaluation(kind, &trial, &r));
            let ids: Vec<String> = step.vars().map(str::to_string).collect();
            let better = match &best {
                None => true,
                Some((bids, _, br)) => subset_precedes(r.value, &ids, br.value, bids),
            };
            if better {
                best = Some((ids, trial, r));
            }
        }
        match best {
            Some((_, trial, r)) if r.value > current.value => {
                chosen = trial;
                current = r;
            }
            _ => break,
        }
    }
    Ok(SubsetSearch {
        subset: chosen,
        result: current,
        evaluated,
    })
}

/// Nonempty index subsets of `0..n` with at most `depth` elements, by size
/// then lexicographically.
fn extensions(n: usize, depth: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=depth.min(n) {
        combinations(n, size, &mut out);
    }
    out
}

pub(crate) fn combinations(n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ev(pairs: &[(&str, &str)]) -> EvidenceSet {
        pairs.iter().copied().collect()
    }

    fn both_high() -> EvidenceSet {
        ev(&[("S1", "high"), ("S2", "high")])
    }

    #[test]
    fn review_time_examples() {
        let unit = ReviewTimeModel::unit();
        assert_eq!(review_time(&unit, &EvidenceSet::new()), 0.0);
        assert_eq!(review_time(&unit, &both_high()), 2.0);
        let rtm = ReviewTimeModel {
            base_delay: 1.0,
            ..ReviewTimeModel::zero()
        }
        .with_cost("S1", 0.5);
        assert_eq!(review_time(&rtm, &ev(&[("S1", "low")])), 1.5);
    }

    #[test]
    fn evri_examples() {
        let m = fixtures::mini_model();
        let r = evri(&m, &ev(&[("S1", "high")]), &EvidenceSet::new(), &both_high()).unwrap();
        assert_eq!((r.action_before.as_str(), r.action_after.as_str()), ("continue", "halt"));
        assert!((r.value - (0.6 - 4.0 / 85.0)).abs() < 1e-12);
        assert!((r.value - 0.5529).abs() < 1e-4);

        let r = evri(&m, &ev(&[("S2", "high")]), &ev(&[("S1", "high")]), &both_high()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.action_after, "halt");

        let r = evri(&m, &EvidenceSet::new(), &ev(&[("S1", "high")]), &both_high()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn misleading_singleton_has_negative_evri() {
        let m = fixtures::mini_model();
        let full = ev(&[("S1", "high"), ("S2", "low")]);
        let r = evri(&m, &ev(&[("S1", "high")]), &EvidenceSet::new(), &full).unwrap();
        // the posterior equals the prior: halt (0.6) replaces continue (0.8)
        assert!((r.value - (0.6 - 0.8)).abs() < 1e-12);
        assert!(r.value < 0.0);
    }

    #[test]
    fn evri_errors() {
        let m = fixtures::mini_model();
        let e = ev(&[("S1", "high")]);
        assert!(matches!(evri(&m, &e, &e, &both_high()), Err(Error::OverlappingEvidence(_))));
        let wrong = ev(&[("S1", "low")]);
        assert!(matches!(
            evri(&m, &wrong, &EvidenceSet::new(), &both_high()),
            Err(Error::NotInFullEvidence(_))
        ));
    }

    #[test]
    fn nevri_on_time_decaying_fixture() {
        let m = fixtures::mini_t_model();
        let r = nevri(
            &m,
            &ReviewTimeModel::unit(),
            &ev(&[("S2", "high")]),
            &ev(&[("S1", "high")]),
            &both_high(),
        )
        .unwrap();
        assert_eq!((r.action_before.as_str(), r.action_after.as_str()), ("halt", "halt"));
        // 0.6 * (1 - 2/10) - 0.6 * (1 - 1/10)
        assert!((r.value - (-0.06)).abs() < 1e-12);
        assert_eq!((r.delay_before, r.delay_after), (1.0, 2.0));
    }

    #[test]
    fn nevri_equals_evri_for_constant_utilities() {
        let m = fixtures::mini_model();
        let rtm = ReviewTimeModel::unit();
        let a = nevri(&m, &rtm, &ev(&[("S1", "high")]), &EvidenceSet::new(), &both_high()).unwrap();
        let b = evri(&m, &ev(&[("S1", "high")]), &EvidenceSet::new(), &both_high()).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn evdi_degenerate_cases() {
        let m = fixtures::mini_model();
        let zero = ReviewTimeModel::zero();
        let gold_user = crate::user_model::UserResponseModel::gold_argmax(&m);
        let reveal = ev(&[("S1", "high")]);
        let a = evdi(&m, &gold_user, &zero, &reveal, &EvidenceSet::new(), &both_high()).unwrap();
        let b = evri(&m, &reveal, &EvidenceSet::new(), &both_high()).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);

        let novice = fixtures::mini_novice(&m);
        let r = evdi(&m, &novice, &zero, &ev(&[("S2", "high")]), &ev(&[("S1", "high")]), &both_high()).unwrap();
        assert_eq!(r.value, 0.0);

        let uniform = crate::user_model::UserResponseModel::gold(&m, crate::user_model::MappingKind::Monotone, 0.0);
        for reveal in [ev(&[("S1", "high")]), both_high()] {
            let r = evdi(&m, &uniform, &zero, &reveal, &EvidenceSet::new(), &both_high()).unwrap();
            assert!(r.value.abs() < 1e-15);
        }
    }

    #[test]
    fn evdi_requires_matching_actions() {
        let m = fixtures::mini_model();
        let mut user = crate::user_model::UserResponseModel::gold_argmax(&m);
        user.actions.retain(|a| a != "halt");
        let err = evdi(&m, &user, &ReviewTimeModel::zero(), &EvidenceSet::new(), &EvidenceSet::new(), &both_high());
        assert!(matches!(err, Err(Error::ActionSetMismatch)));
    }

    #[test]
    fn exhaustive_subset_on_mini() {
        let m = fixtures::mini_model();
        let rtm = ReviewTimeModel::zero();
        let ctx = MetricContext::new(&m, &rtm);
        let s = best_reveal_subset(&ctx, &EvidenceSet::new(), &both_high(), MetricKind::Evri, SearchStrategy::Exhaustive)
            .unwrap();
        assert_eq!(s.subset, ev(&[("S1", "high")]));
        assert!((s.result.value - 0.5529).abs() < 1e-4);
        assert_eq!(s.evaluated.len(), 4);
    }

    #[test]
    fn nothing_to_reveal() {
        let m = fixtures::mini_model();
        let rtm = ReviewTimeModel::zero();
        let ctx = MetricContext::new(&m, &rtm);
        for strategy in [SearchStrategy::Exhaustive, SearchStrategy::Greedy, SearchStrategy::Lookahead(2)] {
            let s = best_reveal_subset(&ctx, &both_high(), &both_high(), MetricKind::Evri, strategy).unwrap();
            assert!(s.subset.is_empty());
            assert_eq!(s.result.value, 0.0);
        }
    }

    #[test]
    fn greedy_stops_without_gain() {
        let m = fixtures::mini_model();
        let rtm = ReviewTimeModel::zero();
        let ctx = MetricContext::new(&m, &rtm);
        let s = best_reveal_subset(&ctx, &EvidenceSet::new(), &both_high(), MetricKind::Evri, SearchStrategy::Greedy)
            .unwrap();
        assert_eq!(s.subset, ev(&[("S1", "high")]));
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("greedy".parse::<SearchStrategy>(), Ok(SearchStrategy::Greedy));
        assert_eq!("lookahead:3".parse::<SearchStrategy>(), Ok(SearchStrategy::Lookahead(3)));
        assert_eq!("lookahead(2)".parse::<SearchStrategy>(), Ok(SearchStrategy::Lookahead(2)));
        assert!("lookahead:0".parse::<SearchStrategy>().is_err());
        assert!("best".parse::<SearchStrategy>().is_err());
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut out = Vec::new();
        combinations(4, 2, &mut out);
        assert_eq!(out, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }
}
