//! Display decisions built on the revealed-information metrics: ranked
//! fault and action lists, auxiliary clusters, template telescoping,
//! minimal consistent evidence sets and highlighting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bayesnet::EvidenceSet;
use crate::decision::DecisionModel;
use crate::error::{Error, Result};
use crate::metrics::{
    best_reveal_subset, combinations, MetricContext, MetricKind, ReviewTimeModel, SearchStrategy,
};
use crate::user_model::UserResponseModel;

/// Above this many items the minimal-set search falls back to greedy
/// backward elimination.
pub const MINIMAL_SET_EXHAUSTIVE_CAP: usize = 20;

/// Nested detail levels for one subsystem, smallest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub subsystem: String,
    pub levels: Vec<Vec<String>>,
}

impl Template {
    pub fn new(subsystem: &str, levels: &[&[&str]]) -> Self {
        Template {
            subsystem: subsystem.to_string(),
            levels: levels
                .iter()
                .map(|l| l.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidTemplate {
            subsystem: self.subsystem.clone(),
            reason: reason.to_string(),
        };
        match self.levels.first() {
            None => return Err(invalid("no levels")),
            Some(l0) if l0.is_empty() => return Err(invalid("level 0 is empty")),
            _ => {}
        }
        for w in self.levels.windows(2) {
            let lo: BTreeSet<&String> = w[0].iter().collect();
            let hi: BTreeSet<&String> = w[1].iter().collect();
            if !(lo.is_subset(&hi) && hi.len() > lo.len()) {
                return Err(invalid("levels are not strictly nested"));
            }
        }
        Ok(())
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, i: usize) -> &[String] {
        &self.levels[i.min(self.max_level())]
    }

    /// Smallest level containing every variable of this template in `shown`.
    pub fn covering_level(&self, shown: &EvidenceSet) -> usize {
        let mine: Vec<&str> = shown
            .vars()
            .filter(|v| self.levels.last().is_some_and(|top| top.iter().any(|t| t == v)))
            .collect();
        (0..self.levels.len())
            .find(|&i| mine.iter().all(|v| self.levels[i].iter().any(|t| t == v)))
            .unwrap_or(self.max_level())
    }
}

/// Core display set plus optional named clusters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidencePartition {
    pub core: Vec<String>,
    #[serde(default)]
    pub aux_clusters: BTreeMap<String, Vec<String>>,
}

impl EvidencePartition {
    pub fn validate(&self) -> Result<()> {
        let mut seen: BTreeSet<&str> = self.core.iter().map(String::as_str).collect();
        for (name, vars) in &self.aux_clusters {
            for v in vars {
                if !seen.insert(v) {
                    return Err(Error::InvalidPartition(format!(
                        "`{v}` in cluster `{name}` overlaps the core or another cluster"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Operating context for display decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Context {
    pub phase: String,
    /// Level per subsystem that is always shown; missing entries mean 0.
    #[serde(default)]
    pub baseline: BTreeMap<String, usize>,
    /// Multiplier on review-time costs.
    #[serde(default = "one")]
    pub criticality: f64,
    /// How many items may be highlighted at once.
    #[serde(default = "default_highlights")]
    pub highlight_count: usize,
}

fn one() -> f64 {
    1.0
}

fn default_highlights() -> usize {
    5
}

impl Context {
    pub fn new(phase: &str) -> Self {
        Context {
            phase: phase.to_string(),
            baseline: BTreeMap::new(),
            criticality: 1.0,
            highlight_count: default_highlights(),
        }
    }

    pub fn baseline_of(&self, subsystem: &str) -> usize {
        self.baseline.get(subsystem).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Highlight {
    pub id: String,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFault {
    pub state: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAction {
    pub id: String,
    pub eu: f64,
}

/// Everything the console is told to show for one frame, minus the values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DisplayState {
    pub levels: BTreeMap<String, usize>,
    pub aux: Vec<String>,
    pub highlights: Vec<Highlight>,
    pub ranked_faults: Vec<RankedFault>,
    pub ranked_actions: Vec<RankedAction>,
}

/// Hypothesis states by posterior probability, descending; ties keep
/// declaration order.
pub fn rank_faults(model: &DecisionModel, full: &EvidenceSet) -> Result<Vec<RankedFault>> {
    let post = model.network().hypothesis_posterior(full)?;
    let mut ranked: Vec<RankedFault> = post
        .iter()
        .map(|(s, p)| RankedFault {
            state: s.to_string(),
            p,
        })
        .collect();
    ranked.sort_by(|a, b| b.p.total_cmp(&a.p));
    Ok(ranked)
}

/// Actions by expected utility under the full-evidence posterior,
/// descending; ties by id.
pub fn rank_actions(model: &DecisionModel, full: &EvidenceSet, t: f64) -> Result<Vec<RankedAction>> {
    let post = model.network().hypothesis_posterior(full)?;
    let mut ranked: Vec<RankedAction> = model
        .eu_table(&post, t)?
        .into_iter()
        .map(|c| RankedAction { id: c.action, eu: c.eu })
        .collect();
    ranked.sort_by(|a, b| b.eu.total_cmp(&a.eu).then_with(|| a.id.cmp(&b.id)));
    Ok(ranked)
}

fn restrict_to(full: &EvidenceSet, vars: &[String]) -> EvidenceSet {
    full.restrict(|v| vars.iter().any(|w| w == v))
}

/// Clusters whose revelation alongside the core display has strictly
/// positive value. Each cluster is judged on its own against the core.
pub fn decide_auxiliary(
    ctx: &MetricContext<'_>,
    part: &EvidencePartition,
    full: &EvidenceSet,
    kind: MetricKind,
) -> Result<Vec<String>> {
    part.validate()?;
    let scorer = ctx.scorer(full)?;
    let core = restrict_to(full, &part.core);
    let mut shown = Vec::new();
    for (name, vars) in &part.aux_clusters {
        let cluster = restrict_to(full, vars);
        if scorer.metric(kind, &cluster, &core)?.value > 0.0 {
            shown.push(name.clone());
        }
    }
    Ok(shown)
}

/// Escalates each subsystem independently from its baseline level while the
/// next level's extra items have strictly positive value. Other subsystems
/// are held at their baseline while one is evaluated.
pub fn telescope_levels(
    ctx: &MetricContext<'_>,
    templates: &[Template],
    full: &EvidenceSet,
    kind: MetricKind,
    context: &Context,
) -> Result<BTreeMap<String, usize>> {
    for t in templates {
        t.validate()?;
    }
    let review = ctx.review.scaled(context.criticality);
    let scaled = MetricContext {
        review: &review,
        ..*ctx
    };
    let scorer = scaled.scorer(full)?;

    let baseline_vars = |skip: usize| -> Vec<String> {
        templates
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .flat_map(|(_, t)| t.level(context.baseline_of(&t.subsystem)).to_vec())
            .collect()
    };

    let mut levels = BTreeMap::new();
    for (i, t) in templates.iter().enumerate() {
        let others = baseline_vars(i);
        let mut level = context.baseline_of(&t.subsystem).min(t.max_level());
        while level < t.max_level() {
            let mut shown_vars = others.clone();
            shown_vars.extend(t.level(level).iter().cloned());
            let shown = restrict_to(full, &shown_vars);
            let extra: Vec<String> = t
                .level(level + 1)
                .iter()
                .filter(|v| !t.level(level).contains(v))
                .cloned()
                .collect();
            let reveal = restrict_to(full, &extra).restrict(|v| !shown.contains(v));
            if scorer.metric(kind, &reveal, &shown)?.value > 0.0 {
                level += 1;
            } else {
                break;
            }
        }
        levels.insert(t.subsystem.clone(), level);
    }
    Ok(levels)
}

/// Smallest subset of `full` whose display-conditioned action equals the
/// gold-standard action (both at `t = 0`); ties by lexicographic ids.
pub fn minimal_consistent_set(model: &DecisionModel, full: &EvidenceSet) -> Result<EvidenceSet> {
    let rtm = ReviewTimeModel::zero();
    let scorer = MetricContext::new(model, &rtm).scorer(full)?;
    let gold = scorer.gold_action()?;
    let items: Vec<(&str, &str)> = full.iter().collect();

    if items.len() > MINIMAL_SET_EXHAUSTIVE_CAP {
        // greedy backward: drop items in id order while the action holds
        let mut current = full.clone();
        loop {
            let mut dropped = false;
            for (v, _) in &items {
                if !current.contains(v) {
                    continue;
                }
                let mut trial = current.clone();
                trial.remove(v);
                if scorer.displayed_action(&trial)? == gold {
                    current = trial;
                    dropped = true;
                }
            }
            if !dropped {
                return Ok(current);
            }
        }
    }

    for size in 0..=items.len() {
        let mut combos = Vec::new();
        combinations(items.len(), size, &mut combos);
        for combo in combos {
            let subset: EvidenceSet = combo.iter().map(|&i| items[i]).collect();
            if scorer.displayed_action(&subset)? == gold {
                return Ok(subset);
            }
        }
    }
    Ok(full.clone())
}

/// Myopic highlighting: each displayed item is valued as if hidden and then
/// revealed on top of the rest of the display. Items with positive value are
/// returned in descending value (ties by id), at most `n` of them, with
/// intensity relative to the largest value.
pub fn highlight(
    model: &DecisionModel,
    displayed: &EvidenceSet,
    full: &EvidenceSet,
    n: usize,
) -> Result<Vec<Highlight>> {
    let rtm = ReviewTimeModel::zero();
    let scorer = MetricContext::new(model, &rtm).scorer(full)?;
    let mut values = Vec::new();
    for (v, s) in displayed.iter() {
        let rest = displayed.restrict(|w| w != v);
        let single = EvidenceSet::new().with(v, s);
        let value = scorer.metric(MetricKind::Evri, &single, &rest)?.value;
        if value > 0.0 {
            values.push((v.to_string(), value));
        }
    }
    values.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    values.truncate(n);
    let max = values.first().map_or(1.0, |(_, v)| *v);
    Ok(values
        .into_iter()
        .map(|(id, v)| Highlight {
            id,
            intensity: v / max,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Everything available, every template at full detail.
    ShowAll,
    /// The minimal consistent set.
    Minimal,
    /// Core plus decision-relevant clusters, with template telescoping.
    Managed,
    /// Core plus the best reveal subset of everything else.
    Subset,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::ShowAll => "show_all",
            PolicyKind::Minimal => "minimal",
            PolicyKind::Managed => "managed",
            PolicyKind::Subset => "subset",
        })
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "show_all" | "all" => Ok(PolicyKind::ShowAll),
            "minimal" => Ok(PolicyKind::Minimal),
            "managed" => Ok(PolicyKind::Managed),
            "subset" => Ok(PolicyKind::Subset),
            other => Err(format!("unknown policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default = "default_metric")]
    pub metric: MetricKind,
    #[serde(default = "default_strategy")]
    pub strategy: SearchStrategy,
}

fn default_metric() -> MetricKind {
    MetricKind::Evri
}

fn default_strategy() -> SearchStrategy {
    SearchStrategy::Greedy
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        PolicyConfig {
            kind,
            metric: default_metric(),
            strategy: default_strategy(),
        }
    }

    pub fn with_metric(mut self, metric: MetricKind) -> Self {
        self.metric = metric;
        self
    }
}

impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PolicyKind::ShowAll | PolicyKind::Minimal => write!(f, "{}", self.kind),
            PolicyKind::Managed => write!(f, "{}/{}", self.kind, self.metric),
            PolicyKind::Subset => write!(f, "{}/{}/{}", self.kind, self.metric, self.strategy),
        }
    }
}

/// What to show for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Display {
    pub displayed: EvidenceSet,
    pub state: DisplayState,
}

/// Per-session display state machine. Telescoped levels only grow within a
/// phase and fall back to the baseline when the phase changes.
#[derive(Debug, Clone)]
pub struct DisplayManager {
    model: DecisionModel,
    review: ReviewTimeModel,
    user: Option<UserResponseModel>,
    templates: Vec<Template>,
    partition: EvidencePartition,
    config: PolicyConfig,
    phase: Option<String>,
    levels: BTreeMap<String, usize>,
}

impl DisplayManager {
    pub fn new(
        model: DecisionModel,
        review: ReviewTimeModel,
        templates: Vec<Template>,
        partition: EvidencePartition,
        config: PolicyConfig,
    ) -> Result<Self> {
        for t in &templates {
            t.validate()?;
        }
        partition.validate()?;
        review.validate()?;
        Ok(DisplayManager {
            model,
            review,
            user: None,
            templates,
            partition,
            config,
            phase: None,
            levels: BTreeMap::new(),
        })
    }

    /// User model used when the policy metric is EVDI.
    pub fn with_user(mut self, user: UserResponseModel) -> Result<Self> {
        user.check_compatible(&self.model)?;
        self.user = Some(user);
        Ok(self)
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    fn metric_context(&self) -> MetricContext<'_> {
        MetricContext {
            model: &self.model,
            review: &self.review,
            user: self.user.as_ref(),
        }
    }

    fn template_vars(&self, levels: &BTreeMap<String, usize>) -> Vec<String> {
        self.templates
            .iter()
            .flat_map(|t| t.level(levels.get(&t.subsystem).copied().unwrap_or(0)).to_vec())
            .collect()
    }

    fn covering_levels(&self, shown: &EvidenceSet) -> BTreeMap<String, usize> {
        self.templates
            .iter()
            .map(|t| (t.subsystem.clone(), t.covering_level(shown)))
            .collect()
    }

    pub fn display(&mut self, full: &EvidenceSet, context: &Context) -> Result<Display> {
        if self.phase.as_deref() != Some(context.phase.as_str()) {
            self.phase = Some(context.phase.clone());
            self.levels.clear();
        }
        let kind = self.config.metric;
        let (displayed, levels, aux) = match self.config.kind {
            PolicyKind::ShowAll => {
                let levels = self
                    .templates
                    .iter()
                    .map(|t| (t.subsystem.clone(), t.max_level()))
                    .collect();
                (full.clone(), levels, self.partition.aux_clusters.keys().cloned().collect())
            }
            PolicyKind::Minimal => {
                let shown = minimal_consistent_set(&self.model, full)?;
                let levels = self.covering_levels(&shown);
                (shown, levels, Vec::new())
            }
            PolicyKind::Managed => {
                let ctx = self.metric_context();
                let aux = decide_auxiliary(&ctx, &self.partition, full, kind)?;
                let computed = telescope_levels(&ctx, &self.templates, full, kind, context)?;
                let mut levels = BTreeMap::new();
                for (s, l) in computed {
                    let sticky = self.levels.get(&s).copied().unwrap_or(0);
                    levels.insert(s, l.max(sticky));
                }
                self.levels = levels.clone();
                let mut vars = self.partition.core.clone();
                for name in &aux {
                    vars.extend(self.partition.aux_clusters[name].iter().cloned());
                }
                vars.extend(self.template_vars(&levels));
                (restrict_to(full, &vars), levels, aux)
            }
            PolicyKind::Subset => {
                let ctx = self.metric_context();
                let core = restrict_to(full, &self.partition.core);
                let search = best_reveal_subset(&ctx, &core, full, kind, self.config.strategy)?;
                let shown = core.union(&search.subset);
                let levels = self.covering_levels(&shown);
                (shown, levels, Vec::new())
            }
        };
        let state = DisplayState {
            levels,
            aux,
            highlights: highlight(&self.model, &displayed, full, context.highlight_count)?,
            ranked_faults: rank_faults(&self.model, full)?,
            ranked_actions: rank_actions(&self.model, full, 0.0)?,
        };
        Ok(Display { displayed, state })
    }
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
    fn rank_faults_examples() {
        let m = fixtures::mini_model();
        let r = rank_faults(&m, &both_high()).unwrap();
        assert_eq!(r[0].state, "leak");
        assert!((r[0].p - 81.0 / 85.0).abs() < 1e-12);
        assert!((r[1].p - 4.0 / 85.0).abs() < 1e-12);
        let r = rank_faults(&m, &EvidenceSet::new()).unwrap();
        assert_eq!(r.iter().map(|f| f.state.as_str()).collect::<Vec<_>>(), ["nominal", "leak"]);
        assert!((r.iter().map(|f| f.p).sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rank_faults_keeps_declaration_order_on_ties() {
        let mut def = fixtures::mini_network_def();
        def.cpts[0].table = vec![vec![0.5, 0.5]];
        let net = crate::bayesnet::Network::new(def).unwrap();
        let m = fixtures::mini_model();
        let m = DecisionModel::new(net, m.actions().to_vec(), m.utility().clone()).unwrap();
        let r = rank_faults(&m, &EvidenceSet::new()).unwrap();
        assert_eq!(r[0].state, "nominal");
        assert_eq!(r[1].state, "leak");
    }

    #[test]
    fn rank_actions_examples() {
        let m = fixtures::mini_model();
        let r = rank_actions(&m, &both_high(), 0.0).unwrap();
        assert_eq!(r[0].id, "halt");
        assert!((r[0].eu - 0.6).abs() < 1e-12);
        assert!((r[1].eu - 4.0 / 85.0).abs() < 1e-12);
        let r = rank_actions(&m, &EvidenceSet::new(), 0.0).unwrap();
        assert_eq!(r[0].id, "continue");
        assert!((r[0].eu - 0.8).abs() < 1e-12);
        let flat = m.utility().affine(0.0, 0.3);
        let m = m.with_utility(flat).unwrap();
        let r = rank_actions(&m, &both_high(), 0.0).unwrap();
        assert_eq!(r.iter().map(|a| a.id.as_str()).collect::<Vec<_>>(), ["continue", "halt"]);
    }

    #[test]
    fn auxiliary_examples() {
        let m = fixtures::mini_model();
        let rtm = ReviewTimeModel::zero();
        let ctx = MetricContext::new(&m, &rtm);
        let part = EvidencePartition {
            core: vec!["S1".into()],
            aux_clusters: [("trend".to_string(), vec!["S2".to_string()])].into_iter().collect(),
        };
        assert!(decide_auxiliary(&ctx, &part, &both_high(), MetricKind::Evri).unwrap().is_empty());
        let part = EvidencePartition {
            core: vec![],
            aux_clusters: [("pressure".to_string(), vec!["S1".to_string()])].into_iter().collect(),
        };
        assert_eq!(decide_auxiliary(&ctx, &part, &both_high(), MetricKind::Evri).unwrap(), ["pressure"]);
        let part = EvidencePartition::default();
        assert!(decide_auxiliary(&ctx, &part, &both_high(), MetricKind::Evri).unwrap().is_empty());
    }

    #[test]
    fn overlapping_partition_is_rejected() {
        let part = EvidencePartition {
            core: vec!["S1".into()],
            aux_clusters: [("x".to_string(), vec!["S1".to_string()])].into_iter().collect(),
        };
        assert!(matches!(part.validate(), Err(Error::InvalidPartition(_))));
    }

    #[test]
    fn template_nesting_is_checked() {
        assert!(Template::new("a", &[&["S1"], &["S1", "S2"]]).validate().is_ok());
        assert!(Template::new("a", &[&[]]).validate().is_err());
        assert!(Template::new("a", &[&["S1"], &["S2"]]).validate().is_err());
        assert!(Template::new("a", &[&["S1"], &["S1"]]).validate().is_err());
    }

    #[test]
    fn single_level_templates_stay_at_baseline() {
        let m = fixtures::mini_model();
        let rtm = ReviewTimeModel::zero();
        let ctx = MetricContext::new(&m, &rtm);
        let templates = vec![Template::new("a", &[&["S1"]]), Template::new("b", &[&["S2"]])];
        let levels = telescope_levels(&ctx, &templates, &both_high(), MetricKind::Evri, &Context::new("burn")).unwrap();
        assert_eq!(levels.values().copied().collect::<Vec<_>>(), [0, 0]);
    }

    #[test]
    fn oms_left_leak_escalates_only_the_left_pod() {
        let m = fixtures::oms_model();
        let rtm = ReviewTimeModel::zero();
        let ctx = MetricContext::new(&m, &rtm);
        let templates = fixtures::oms_templates();
        let burn = Context::new("burn");
        let levels = telescope_levels(&ctx, &templates, &fixtures::oms_left_leak_evidence(), MetricKind::Evri, &burn).unwrap();
        assert!(levels["left_oms"] >= 1, "{levels:?}");
        assert_eq!(levels["right_oms"], 0);
        let levels = telescope_levels(&ctx, &templates, &fixtures::oms_nominal_evidence(), MetricKind::Evri, &burn).unwrap();
        assert_eq!(levels.values().copied().collect::<Vec<_>>(), [0, 0]);
        let mut raised = burn.clone();
        raised.baseline.insert("right_oms".into(), 2);
        let levels = telescope_levels(&ctx, &templates, &fixtures::oms_nominal_evidence(), MetricKind::Evri, &raised).unwrap();
        assert_eq!(levels["right_oms"], 2);
    }

    #[test]
    fn managed_levels_stick_within_a_phase_and_reset_on_change() {
        let m = fixtures::oms_model();
        let mut dm = DisplayManager::new(
            m,
            ReviewTimeModel::zero(),
            fixtures::oms_templates(),
            fixtures::oms_partition(),
            PolicyConfig::new(PolicyKind::Managed),
        )
        .unwrap();
        let burn = Context::new("burn");
        let leak = dm.display(&fixtures::oms_left_leak_evidence(), &burn).unwrap();
        let escalated = leak.state.levels["left_oms"];
        assert!(escalated >= 1);
        let calm = dm.display(&fixtures::oms_nominal_evidence(), &burn).unwrap();
        assert_eq!(calm.state.levels["left_oms"], escalated);
        let calm = dm.display(&fixtures::oms_nominal_evidence(), &Context::new("coast")).unwrap();
        assert_eq!(calm.state.levels["left_oms"], 0);
        assert!(calm.state.highlights.is_empty());
        assert!(calm.displayed.is_subset_of(&fixtures::oms_nominal_evidence()));
    }

    #[test]
    fn minimal_set_examples() {
        let m = fixtures::mini_model();
        assert_eq!(minimal_consistent_set(&m, &both_high()).unwrap(), ev(&[("S1", "high")]));
        let quiet = ev(&[("S1", "low"), ("S2", "low")]);
        assert!(minimal_consistent_set(&m, &quiet).unwrap().is_empty());
        let single = ev(&[("S1", "high")]);
        assert_eq!(minimal_consistent_set(&m, &single).unwrap(), single);
    }

    #[test]
    fn highlight_on_mini_is_empty_because_each_sensor_is_redundant() {
        // hiding either sensor still leaves the other one, which alone gives halt
        let m = fixtures::mini_model();
        assert!(highlight(&m, &both_high(), &both_high(), 5).unwrap().is_empty());
    }

    #[test]
    fn highlight_with_jointly_needed_sensors() {
        let m = fixtures::mini_weak_model();
        let h = highlight(&m, &both_high(), &both_high(), 5).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h[0].intensity, 1.0);
        assert_eq!(h[1].intensity, 1.0);
        assert_eq!(h[0].id, "S1");
        let h = highlight(&m, &both_high(), &both_high(), 1).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].id, "S1");
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("show-all".parse::<PolicyKind>(), Ok(PolicyKind::ShowAll));
        assert_eq!("minimal".parse::<PolicyKind>(), Ok(PolicyKind::Minimal));
        assert!("fancy".parse::<PolicyKind>().is_err());
    }
}
