//! Discrete Bayesian networks over fault hypotheses and sensor evidence.
//!
//! A [`NetworkDef`] is the raw, possibly invalid description of a network as
//! it comes from a file or a builder. [`validate_network`] reports every
//! broken invariant; [`Network::new`] only accepts definitions with an empty
//! report and precomputes the index tables used by inference.

mod enumerate;
mod factor;
mod file;
mod inference;
mod prune;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerate::{enumerate_posterior, ENUMERATION_CAP};
pub use file::NetworkFile;
pub use inference::posterior;
pub use prune::{prune_network, PruneSpec};
pub use validate::{validate_network, ValidationReport, Violation, ViolationKind};

/// Normalization tolerance used for every probability table and distribution.
pub const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub id: String,
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(id: &str, name: &str, states: impl IntoIterator<Item = S>) -> Self {
        Variable {
            id: id.to_string(),
            name: name.to_string(),
            states: states.into_iter().map(Into::into).collect(),
        }
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// Conditional probability table for one child variable.
///
/// `table` holds one row per parent-state combination, enumerated in
/// mixed-radix order over `parents` with the last parent varying fastest.
/// Each row is a distribution over the child's states.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub child: String,
    pub parents: Vec<String>,
    pub table: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn new(child: &str, parents: &[&str], table: Vec<Vec<f64>>) -> Self {
        Cpt {
            child: child.to_string(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
            table,
        }
    }
}

/// Unvalidated network description.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDef {
    pub variables: Vec<Variable>,
    pub cpts: Vec<Cpt>,
    pub hypothesis_var: String,
    pub evidence_vars: Vec<String>,
}

/// Observed sensor assignments, keyed by variable id.
///
/// Backed by an ordered map so that iteration order, and therefore every
/// computation driven by it, is independent of insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvidenceSet(BTreeMap<String, String>);

impl EvidenceSet {
    pub fn new() -> Self {
        EvidenceSet(BTreeMap::new())
    }

    pub fn insert(&mut self, var: impl Into<String>, state: impl Into<String>) -> Option<String> {
        self.0.insert(var.into(), state.into())
    }

    pub fn with(mut self, var: impl Into<String>, state: impl Into<String>) -> Self {
        self.insert(var, state);
        self
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    pub fn remove(&mut self, var: &str) -> Option<String> {
        self.0.remove(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// Union of two sets; assignments in `other` win on conflict.
    pub fn union(&self, other: &EvidenceSet) -> EvidenceSet {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.insert(k, v);
        }
        out
    }

    /// Keeps only the assignments whose variable satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&str) -> bool) -> EvidenceSet {
        EvidenceSet(
            self.0
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }

    /// True if every assignment here also appears, with the same state, in `other`.
    pub fn is_subset_of(&self, other: &EvidenceSet) -> bool {
        self.iter().all(|(k, v)| other.get(k) == Some(v))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for EvidenceSet {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        EvidenceSet(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl fmt::Display for EvidenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A distribution over the states of a single variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub variable: String,
    pub states: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl Distribution {
    pub fn prob(&self, state: &str) -> Option<f64> {
        self.states
            .iter()
            .position(|s| s == state)
            .map(|i| self.probabilities[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.states
            .iter()
            .map(String::as_str)
            .zip(self.probabilities.iter().copied())
    }

    /// L-infinity distance between two distributions over the same states.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A validated network with precomputed index tables.
#[derive(Debug, Clone)]
pub struct Network {
    def: NetworkDef,
    index: HashMap<String, usize>,
    cards: Vec<usize>,
    /// Parent indices per variable (aligned with `def.variables`).
    parents: Vec<Vec<usize>>,
    /// CPT position per variable.
    cpt_of: Vec<usize>,
    hypothesis: usize,
}

impl Network {
    pub fn new(def: NetworkDef) -> Result<Self> {
        let report = validate_network(&def);
        if !report.is_empty() {
            return Err(Error::InvalidNetwork(report));
        }
        let index: HashMap<String, usize> = def
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.clone(), i))
            .collect();
        let cards = def.variables.iter().map(|v| v.states.len()).collect();
        let mut cpt_of = vec![0; def.variables.len()];
        let mut parents = vec![Vec::new(); def.variables.len()];
        for (ci, cpt) in def.cpts.iter().enumerate() {
            let child = index[&cpt.child];
            cpt_of[child] = ci;
            parents[child] = cpt.parents.iter().map(|p| index[p]).collect();
        }
        let hypothesis = index[&def.hypothesis_var];
        Ok(Network {
            def,
            index,
            cards,
            parents,
            cpt_of,
            hypothesis,
        })
    }

    pub fn def(&self) -> &NetworkDef {
        &self.def
    }

    pub fn into_def(self) -> NetworkDef {
        self.def
    }

    pub fn variables(&self) -> &[Variable] {
        &self.def.variables
    }

    pub fn variable(&self, id: &str) -> Option<&Variable> {
        self.index.get(id).map(|&i| &self.def.variables[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn hypothesis_var(&self) -> &str {
        &self.def.hypothesis_var
    }

    pub fn hypothesis(&self) -> &Variable {
        &self.def.variables[self.hypothesis]
    }

    pub fn evidence_vars(&self) -> &[String] {
        &self.def.evidence_vars
    }

    pub fn is_evidence_var(&self, id: &str) -> bool {
        self.def.evidence_vars.iter().any(|v| v == id)
    }

    pub fn cpt(&self, id: &str) -> Option<&Cpt> {
        self.index.get(id).map(|&i| &self.def.cpts[self.cpt_of[i]])
    }

    pub fn parents_of(&self, id: &str) -> Option<&[String]> {
        self.cpt(id).map(|c| c.parents.as_slice())
    }

    /// Product of all state-space sizes.
    pub fn joint_size(&self) -> u128 {
        self.cards.iter().map(|&c| c as u128).product()
    }

    pub(crate) fn len(&self) -> usize {
        self.cards.len()
    }

    pub(crate) fn var_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(id.to_string()))
    }

    pub(crate) fn card(&self, var: usize) -> usize {
        self.cards[var]
    }

    pub(crate) fn parent_indices(&self, var: usize) -> &[usize] {
        &self.parents[var]
    }

    pub(crate) fn table_of(&self, var: usize) -> &[Vec<f64>] {
        &self.def.cpts[self.cpt_of[var]].table
    }

    /// Resolves evidence into `(variable index, state index)` pairs.
    pub(crate) fn resolve_evidence(&self, evidence: &EvidenceSet) -> Result<Vec<(usize, usize)>> {
        evidence
            .iter()
            .map(|(var, state)| {
                let vi = self.var_index(var)?;
                let si = self.def.variables[vi]
                    .state_index(state)
                    .ok_or_else(|| Error::UnknownState {
                        variable: var.to_string(),
                        state: state.to_string(),
                    })?;
                Ok((vi, si))
            })
            .collect()
    }

    /// Row index into a CPT for the given full assignment of the network.
    pub(crate) fn row_index(&self, var: usize, assignment: &[usize]) -> usize {
        self.parents[var]
            .iter()
            .fold(0, |acc, &p| acc * self.cards[p] + assignment[p])
    }

    /// Prior marginal of the hypothesis variable.
    pub fn prior(&self) -> Result<Distribution> {
        posterior(self, &EvidenceSet::new(), &self.def.hypothesis_var)
    }

    /// Posterior over the hypothesis variable.
    pub fn hypothesis_posterior(&self, evidence: &EvidenceSet) -> Result<Distribution> {
        posterior(self, evidence, &self.def.hypothesis_var)
    }
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.def == other.def
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evidence_set_is_order_independent() {
        let a: EvidenceSet = [("S2", "high"), ("S1", "low")].into_iter().collect();
        let b: EvidenceSet = [("S1", "low"), ("S2", "high")].into_iter().collect();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "{S1=low,S2=high}");
    }

    #[test]
    fn subset_requires_matching_states() {
        let full: EvidenceSet = [("S1", "high"), ("S2", "high")].into_iter().collect();
        assert!(EvidenceSet::new().with("S1", "high").is_subset_of(&full));
        assert!(!EvidenceSet::new().with("S1", "low").is_subset_of(&full));
        assert!(!EvidenceSet::new().with("S3", "low").is_subset_of(&full));
    }
}
