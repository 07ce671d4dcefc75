//! Models of what an operator believes and does given displayed evidence.
//!
//! A user's beliefs come from a (usually pruned) copy of the gold network;
//! evidence the pruned network cannot represent is silently dropped. Beliefs
//! are turned into a distribution over actions either by maximizing the
//! user's expected utility or by exponential weighting of it.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bayesnet::{prune_network, Distribution, EvidenceSet, Network, PruneSpec};
use crate::decision::{DecisionModel, TimedUtility};
use crate::error::{Error, Result};

/// Default softmax sharpness for monotone mappings.
pub const DEFAULT_TEMPERATURE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct UserBeliefModel {
    pub expertise_label: String,
    pub belief_network: Network,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingKind {
    /// All mass on the user-EU-maximizing action(s).
    Argmax,
    /// `p(a) ∝ exp(temperature · EU(a))`.
    Monotone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionMapping {
    pub kind: MappingKind,
    pub user_utility: TimedUtility,
    pub temperature: f64,
}

impl ActionMapping {
    pub fn argmax(user_utility: TimedUtility) -> Self {
        ActionMapping {
            kind: MappingKind::Argmax,
            user_utility,
            temperature: f64::INFINITY,
        }
    }

    pub fn monotone(user_utility: TimedUtility, temperature: f64) -> Self {
        ActionMapping {
            kind: MappingKind::Monotone,
            user_utility,
            temperature,
        }
    }
}

/// A distribution over action ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDistribution {
    pub actions: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl ActionDistribution {
    pub fn prob(&self, action: &str) -> f64 {
        self.actions
            .iter()
            .position(|a| a == action)
            .map_or(0.0, |i| self.probabilities[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.actions
            .iter()
            .map(String::as_str)
            .zip(self.probabilities.iter().copied())
    }

    /// Most probable action, ties to the smallest id.
    pub fn mode(&self) -> &str {
        let mut best = 0;
        for i in 1..self.actions.len() {
            let (p, q) = (self.probabilities[i], self.probabilities[best]);
            if p > q || (p == q && self.actions[i] < self.actions[best]) {
                best = i;
            }
        }
        &self.actions[best]
    }

    pub fn total_variation(&self, other: &ActionDistribution) -> f64 {
        0.5 * self
            .iter()
            .map(|(a, p)| (p - other.prob(a)).abs())
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserResponseModel {
    pub belief: UserBeliefModel,
    pub mapping: ActionMapping,
    pub actions: Vec<String>,
}

impl UserResponseModel {
    pub fn new(belief: UserBeliefModel, mapping: ActionMapping, actions: Vec<String>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::InvalidModel("user model has no actions".into()));
        }
        if !(mapping.temperature >= 0.0) {
            return Err(Error::InvalidModel("temperature must be nonnegative".into()));
        }
        mapping.user_utility.check_covers(
            actions.iter().map(String::as_str),
            &belief.belief_network.hypothesis().states,
        )?;
        Ok(UserResponseModel {
            belief,
            mapping,
            actions,
        })
    }

    /// The gold model itself as a user, with the gold utilities.
    pub fn gold(model: &DecisionModel, kind: MappingKind, temperature: f64) -> Self {
        UserResponseModel {
            belief: UserBeliefModel {
                expertise_label: "expert".into(),
                belief_network: model.network().clone(),
            },
            mapping: ActionMapping {
                kind,
                user_utility: model.utility().clone(),
                temperature,
            },
            actions: model.action_ids().map(str::to_string).collect(),
        }
    }

    /// Gold model with an argmax mapping.
    pub fn gold_argmax(model: &DecisionModel) -> Self {
        Self::gold(model, MappingKind::Argmax, f64::INFINITY)
    }

    pub fn label(&self) -> &str {
        &self.belief.expertise_label
    }

    /// Checks that this user can be scored against `model`: same action set
    /// and hypothesis states matching by label.
    pub fn check_compatible(&self, model: &DecisionModel) -> Result<()> {
        let ours: BTreeSet<&str> = self.actions.iter().map(String::as_str).collect();
        let theirs: BTreeSet<&str> = model.action_ids().collect();
        if ours != theirs {
            return Err(Error::ActionSetMismatch);
        }
        let gold_states = model.hypothesis_states();
        let user_states = &self.belief.belief_network.hypothesis().states;
        if user_states.iter().any(|s| !gold_states.contains(s)) {
            return Err(Error::HypothesisMismatch);
        }
        Ok(())
    }
}

/// Posterior over the user's hypothesis variable given what was displayed.
pub fn user_belief(user: &UserBeliefModel, displayed: &EvidenceSet) -> Result<Distribution> {
    let net = &user.belief_network;
    let visible = displayed.restrict(|v| net.is_evidence_var(v));
    net.hypothesis_posterior(&visible)
}

/// Predicted distribution over the user's actions at delay `t`.
pub fn user_action_distribution(
    user: &UserResponseModel,
    displayed: &EvidenceSet,
    t: f64,
) -> Result<ActionDistribution> {
    let belief = user_belief(&user.belief, displayed)?;
    let eus = user
        .actions
        .iter()
        .map(|a| {
            belief
                .iter()
                .map(|(s, p)| Ok(p * user.mapping.user_utility.value(a, s, t)?))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<f64>>>()?;
    let probabilities = match user.mapping.kind {
        MappingKind::Argmax => argmax_weights(&eus),
        MappingKind::Monotone => softmax(&eus, user.mapping.temperature),
    };
    Ok(ActionDistribution {
        actions: user.actions.clone(),
        probabilities,
    })
}

fn argmax_weights(eus: &[f64]) -> Vec<f64> {
    let max = eus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let winners = eus.iter().filter(|&&u| u == max).count() as f64;
    eus.iter()
        .map(|&u| if u == max { 1.0 / winners } else { 0.0 })
        .collect()
}

fn softmax(eus: &[f64], temperature: f64) -> Vec<f64> {
    if temperature.is_infinite() {
        return argmax_weights(eus);
    }
    let max = eus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = eus.iter().map(|&u| (temperature * (u - max)).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Prunes the gold network into a belief model labelled with an expertise level.
pub fn build_pruned_user_model(gold: &Network, spec: &PruneSpec, label: &str) -> Result<UserBeliefModel> {
    Ok(UserBeliefModel {
        expertise_label: label.to_string(),
        belief_network: prune_network(gold, spec)?,
    })
}

/// JSON form of a user model. `gold` names the decision model file the
/// pruning applies to, relative to the user-model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserModelFile {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<PathBuf>,
    #[serde(default)]
    pub pruning: PruneSpec,
    pub mapping: MappingFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MappingFile {
    pub kind: MappingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// Falls back to the gold utilities when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<TimedUtility>,
}

impl UserModelFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut file: UserModelFile =
            serde_json::from_str(&text).map_err(|e| Error::parse("user model", e))?;
        if let (Some(gold), Some(dir)) = (&file.gold, path.parent()) {
            if gold.is_relative() {
                file.gold = Some(dir.join(gold));
            }
        }
        Ok(file)
    }

    /// Builds the user model against an explicit gold model.
    pub fn build(&self, gold: &DecisionModel) -> Result<UserResponseModel> {
        let belief = build_pruned_user_model(gold.network(), &self.pruning, &self.label)?;
        let utility = self.mapping.utility.clone().unwrap_or_else(|| gold.utility().clone());
        let temperature = match self.mapping.kind {
            MappingKind::Argmax => f64::INFINITY,
            MappingKind::Monotone => self.mapping.temperature.unwrap_or(DEFAULT_TEMPERATURE),
        };
        let mapping = ActionMapping {
            kind: self.mapping.kind,
            user_utility: utility,
            temperature,
        };
        let user = UserResponseModel::new(belief, mapping, gold.action_ids().map(str::to_string).collect())?;
        user.check_compatible(gold)?;
        Ok(user)
    }

    /// Loads the referenced gold model and builds against it.
    pub fn build_with_referenced_gold(&self) -> Result<(DecisionModel, UserResponseModel)> {
        let gold_path = self
            .gold
            .as_ref()
            .ok_or_else(|| Error::InvalidModel("user model does not reference a gold model".into()))?;
        let gold = DecisionModel::load(gold_path)?;
        let user = self.build(&gold)?;
        Ok((gold, user))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::display_conditioned_action;
    use crate::fixtures;

    fn ev(pairs: &[(&str, &str)]) -> EvidenceSet {
        pairs.iter().copied().collect()
    }

    #[test]
    fn gold_as_user_belief_is_gold_posterior() {
        let m = fixtures::mini_model();
        let user = UserResponseModel::gold_argmax(&m);
        let b = user_belief(&user.belief, &EvidenceSet::new()).unwrap();
        assert!((b.prob("leak").unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn novice_ignores_pruned_sensor() {
        let m = fixtures::mini_model();
        let novice = fixtures::mini_novice(&m);
        let both = user_belief(&novice.belief, &ev(&[("S1", "high"), ("S2", "high")])).unwrap();
        let one = user_belief(&novice.belief, &ev(&[("S1", "high")])).unwrap();
        assert_eq!(both, one);
        assert!((one.prob("leak").unwrap() - 9.0 / 13.0).abs() < 1e-12);
        let blind = user_belief(&novice.belief, &ev(&[("S2", "high")])).unwrap();
        assert!((blind.prob("leak").unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn argmax_mapping_puts_all_mass_on_best() {
        let m = fixtures::mini_model();
        let user = UserResponseModel::gold_argmax(&m);
        let d = user_action_distribution(&user, &ev(&[("S1", "high")]), 0.0).unwrap();
        assert_eq!(d.prob("halt"), 1.0);
        assert_eq!(d.prob("continue"), 0.0);
    }

    #[test]
    fn argmax_ties_split_uniformly() {
        assert_eq!(argmax_weights(&[0.5, 0.2, 0.5]), vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn zero_temperature_is_uniform() {
        let m = fixtures::mini_model();
        let user = UserResponseModel::gold(&m, MappingKind::Monotone, 0.0);
        let d = user_action_distribution(&user, &ev(&[("S1", "high")]), 0.0).unwrap();
        assert_eq!(d.probabilities, vec![0.5, 0.5]);
    }

    #[test]
    fn large_temperature_approaches_argmax() {
        let m = fixtures::mini_model();
        let user = UserResponseModel::gold(&m, MappingKind::Monotone, 1e3);
        let d = user_action_distribution(&user, &ev(&[("S1", "high")]), 0.0).unwrap();
        assert!(d.prob("halt") > 0.999);
    }

    #[test]
    fn softmax_is_strictly_monotone_and_normalized() {
        let p = softmax(&[0.3, 0.9, 0.6], DEFAULT_TEMPERATURE);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[1] > p[2] && p[2] > p[0]);
    }

    #[test]
    fn gold_argmax_user_matches_display_conditioned_action() {
        let m = fixtures::mini_model();
        let user = UserResponseModel::gold_argmax(&m);
        for e in fixtures::all_assignments(m.network().evidence_vars(), m.network()) {
            let d = user_action_distribution(&user, &e, 0.0).unwrap();
            let a = display_conditioned_action(&m, &e, 0.0).unwrap();
            assert_eq!(d.prob(&a.action), 1.0, "{e}");
        }
    }

    #[test]
    fn pruned_models() {
        let m = fixtures::mini_model();
        let expert = build_pruned_user_model(m.network(), &PruneSpec::default(), "expert").unwrap();
        assert_eq!(&expert.belief_network, m.network());
        let novice =
            build_pruned_user_model(m.network(), &PruneSpec::default().remove_var("S2"), "novice").unwrap();
        assert!(!novice.belief_network.contains("S2"));
        assert!(build_pruned_user_model(m.network(), &PruneSpec::default().remove_var("H"), "x").is_err());
    }

    #[test]
    fn action_set_mismatch_detected() {
        let m = fixtures::mini_model();
        let mut user = UserResponseModel::gold_argmax(&m);
        user.actions.pop();
        assert!(matches!(user.check_compatible(&m), Err(Error::ActionSetMismatch)));
    }
}
