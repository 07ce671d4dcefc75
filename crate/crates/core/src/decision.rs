//! Time-dependent expected utility and action selection.
//!
//! Utilities are piecewise-linear in the delay before the action is taken.
//! Actions are always chosen from some posterior over the hypothesis
//! variable; the *gold-standard* action uses the posterior given all
//! available evidence, a *display-conditioned* action uses only what was
//! shown. Equal expected utilities resolve to the lexicographically
//! smallest action id.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bayesnet::{Distribution, EvidenceSet, Network, NetworkFile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDef {
    pub id: String,
    pub name: String,
}

impl ActionDef {
    pub fn new(id: &str, name: &str) -> Self {
        ActionDef {
            id: id.to_string(),
            name: name.to_string(),
        }
    }
}

/// Utility as a function of delay, linear between breakpoints and constant
/// outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    breakpoints: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidModel("utility curve has no breakpoints".into()));
        }
        if breakpoints.iter().any(|(t, u)| !t.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidModel("utility breakpoints must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidModel(
                "utility breakpoints must be strictly increasing in t".into(),
            ));
        }
        Ok(PiecewiseLinear { breakpoints })
    }

    pub fn constant(u: f64) -> Self {
        PiecewiseLinear {
            breakpoints: vec![(0.0, u)],
        }
    }

    /// Straight line from `(0, start)` to `(horizon, end)`, flat afterwards.
    pub fn linear(start: f64, end: f64, horizon: f64) -> Self {
        PiecewiseLinear {
            breakpoints: vec![(0.0, start), (horizon, end)],
        }
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn is_constant(&self) -> bool {
        self.breakpoints.windows(2).all(|w| w[0].1 == w[1].1)
    }

    pub fn at(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        let first = bp[0];
        let last = bp[bp.len() - 1];
        if t <= first.0 {
            return first.1;
        }
        if t >= last.0 {
            return last.1;
        }
        let i = bp.partition_point(|&(x, _)| x <= t);
        let (t0, u0) = bp[i - 1];
        let (t1, u1) = bp[i];
        if t == t0 {
            return u0;
        }
        u0 + (u1 - u0) * (t - t0) / (t1 - t0)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        PiecewiseLinear {
            breakpoints: self.breakpoints.iter().map(|&(t, u)| (t, f(u))).collect(),
        }
    }
}

/// `u(action, hypothesis state, t)` for every action/state pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimedUtility {
    curves: BTreeMap<(String, String), PiecewiseLinear>,
}

impl TimedUtility {
    pub fn new() -> Self {
        TimedUtility::default()
    }

    pub fn set(&mut self, action: &str, state: &str, curve: PiecewiseLinear) {
        self.curves.insert((action.to_string(), state.to_string()), curve);
    }

    pub fn with(mut self, action: &str, state: &str, curve: PiecewiseLinear) -> Self {
        self.set(action, state, curve);
        self
    }

    pub fn curve(&self, action: &str, state: &str) -> Option<&PiecewiseLinear> {
        self.curves.get(&(action.to_string(), state.to_string()))
    }

    pub fn value(&self, action: &str, state: &str, t: f64) -> Result<f64> {
        self.curve(action, state).map(|c| c.at(t)).ok_or_else(|| {
            Error::InvalidModel(format!("no utility for action `{action}` in state `{state}`"))
        })
    }

    pub fn is_time_constant(&self) -> bool {
        self.curves.values().all(PiecewiseLinear::is_constant)
    }

    /// `scale * u + shift` applied to every curve.
    pub fn affine(&self, scale: f64, shift: f64) -> Self {
        TimedUtility {
            curves: self
                .curves
                .iter()
                .map(|(k, c)| (k.clone(), c.map(|u| scale * u + shift)))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &PiecewiseLinear)> {
        self.curves
            .iter()
            .map(|((a, s), c)| (a.as_str(), s.as_str(), c))
    }

    /// Fails unless every `(action, state)` pair has a curve.
    pub fn check_covers<'a>(
        &self,
        actions: impl IntoIterator<Item = &'a str>,
        states: &[String],
    ) -> Result<()> {
        for a in actions {
            for s in states {
                if self.curve(a, s).is_none() {
                    return Err(Error::InvalidModel(format!(
                        "no utility for action `{a}` in state `{s}`"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct UtilityEntry {
    action: String,
    state: String,
    breakpoints: Vec<[f64; 2]>,
}

impl Serialize for TimedUtility {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<UtilityEntry> = self
            .iter()
            .map(|(a, st, c)| UtilityEntry {
                action: a.to_string(),
                state: st.to_string(),
                breakpoints: c.breakpoints().iter().map(|&(t, u)| [t, u]).collect(),
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TimedUtility {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<UtilityEntry>::deserialize(d)?;
        let mut out = TimedUtility::new();
        for e in entries {
            let curve = PiecewiseLinear::new(e.breakpoints.iter().map(|p| (p[0], p[1])).collect())
                .map_err(serde::de::Error::custom)?;
            if out.curve(&e.action, &e.state).is_some() {
                return Err(serde::de::Error::custom(format!(
                    "duplicate utility for ({}, {})",
                    e.action, e.state
                )));
            }
            out.set(&e.action, &e.state, curve);
        }
        Ok(out)
    }
}

/// A diagnostic network together with actions and their timed utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionModel {
    network: Network,
    actions: Vec<ActionDef>,
    utility: TimedUtility,
    /// Action positions sorted by id, the order in which ties are resolved.
    by_id: Vec<usize>,
}

/// An action together with the expected utility it was selected for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionChoice {
    pub action: String,
    pub eu: f64,
}

impl DecisionModel {
    pub fn new(network: Network, actions: Vec<ActionDef>, utility: TimedUtility) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::InvalidModel("no actions".into()));
        }
        let mut seen = BTreeSet::new();
        for a in &actions {
            if !seen.insert(a.id.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate action id `{}`", a.id)));
            }
        }
        utility.check_covers(actions.iter().map(|a| a.id.as_str()), &network.hypothesis().states)?;
        let mut by_id: Vec<usize> = (0..actions.len()).collect();
        by_id.sort_by(|&a, &b| actions[a].id.cmp(&actions[b].id));
        Ok(DecisionModel {
            network,
            actions,
            utility,
            by_id,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DecisionModelFile =
            serde_json::from_str(text).map_err(|e| Error::parse("decision model", e))?;
        file.into_model()
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn actions(&self) -> &[ActionDef] {
        &self.actions
    }

    pub fn action_ids(&self) -> impl Iterator<Item = &str> {
        self.actions.iter().map(|a| a.id.as_str())
    }

    pub fn has_action(&self, id: &str) -> bool {
        self.actions.iter().any(|a| a.id == id)
    }

    pub fn utility(&self) -> &TimedUtility {
        &self.utility
    }

    pub fn hypothesis_states(&self) -> &[String] {
        &self.network.hypothesis().states
    }

    /// Same network and actions with a different utility function.
    pub fn with_utility(&self, utility: TimedUtility) -> Result<Self> {
        DecisionModel::new(self.network.clone(), self.actions.clone(), utility)
    }

    /// Expected utility of every action, in declaration order.
    pub fn eu_table(&self, hyp: &Distribution, t: f64) -> Result<Vec<ActionChoice>> {
        self.actions
            .iter()
            .map(|a| {
                Ok(ActionChoice {
                    action: a.id.clone(),
                    eu: expected_utility(self, &a.id, hyp, t)?,
                })
            })
            .collect()
    }

    /// Argmax action for a hypothesis distribution, ties to the smallest id.
    pub fn best_action(&self, hyp: &Distribution, t: f64) -> Result<ActionChoice> {
        let mut best: Option<ActionChoice> = None;
        for &i in &self.by_id {
            let id = &self.actions[i].id;
            let eu = expected_utility(self, id, hyp, t)?;
            if best.as_ref().is_none_or(|b| eu > b.eu) {
                best = Some(ActionChoice {
                    action: id.clone(),
                    eu,
                });
            }
        }
        Ok(best.expect("model has at least one action"))
    }
}

/// `Σ_j p(H_j) · u(action, H_j, t)`.
pub fn expected_utility(
    model: &DecisionModel,
    action: &str,
    hyp_dist: &Distribution,
    t: f64,
) -> Result<f64> {
    if !model.has_action(action) {
        return Err(Error::UnknownAction(action.to_string()));
    }
    if hyp_dist.variable != model.network.hypothesis_var() {
        return Err(Error::HypothesisMismatch);
    }
    hyp_dist
        .iter()
        .map(|(state, p)| Ok(p * model.utility.value(action, state, t)?))
        .sum()
}

/// Best action given all available evidence, with its expected utility.
pub fn gold_standard_action(
    model: &DecisionModel,
    full_evidence: &EvidenceSet,
    t: f64,
) -> Result<ActionChoice> {
    display_conditioned_action(model, full_evidence, t)
}

/// Best action given only the displayed evidence; the expected utility is
/// the one computed under the displayed posterior.
pub fn display_conditioned_action(
    model: &DecisionModel,
    displayed: &EvidenceSet,
    t: f64,
) -> Result<ActionChoice> {
    let hyp = model.network.hypothesis_posterior(displayed)?;
    model.best_action(&hyp, t)
}

/// Scores `action` against the posterior given all available evidence.
pub fn evaluate_under_gold(
    model: &DecisionModel,
    action: &str,
    full_evidence: &EvidenceSet,
    t: f64,
) -> Result<f64> {
    let hyp = model.network.hypothesis_posterior(full_evidence)?;
    expected_utility(model, action, &hyp, t)
}

/// JSON form: the network fields plus `actions` and `utility`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionModelFile {
    #[serde(flatten)]
    pub network: NetworkFile,
    pub actions: Vec<ActionDef>,
    pub utility: TimedUtility,
}

impl DecisionModelFile {
    pub fn into_model(self) -> Result<DecisionModel> {
        DecisionModel::new(self.network.into_network()?, self.actions, self.utility)
    }
}

impl Serialize for DecisionModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DecisionModelFile {
            network: NetworkFile::from_def(self.network.def()),
            actions: self.actions.clone(),
            utility: self.utility.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DecisionModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        DecisionModelFile::deserialize(d)?
            .into_model()
            .map_err(serde::de::Error::custom)
    }
}
