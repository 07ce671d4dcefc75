use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{posterior, Cpt, EvidenceSet, Network, NetworkDef};
use crate::error::{Error, Result};

/// Variables and edges to cut from a network.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneSpec {
    #[serde(default)]
    pub remove_vars: Vec<String>,
    /// `(parent, child)` pairs.
    #[serde(default)]
    pub remove_edges: Vec<(String, String)>,
}

impl PruneSpec {
    pub fn is_empty(&self) -> bool {
        self.remove_vars.is_empty() && self.remove_edges.is_empty()
    }

    pub fn remove_var(mut self, id: &str) -> Self {
        self.remove_vars.push(id.to_string());
        self
    }

    pub fn remove_edge(mut self, parent: &str, child: &str) -> Self {
        self.remove_edges.push((parent.to_string(), child.to_string()));
        self
    }
}

/// Returns a simplified copy of `net` with the given edges and variables cut.
///
/// Every child that loses a parent gets its rows averaged over that parent's
/// prior marginal in the original network. When several parents are dropped
/// from the same child their marginals are combined as a product. Removed
/// variables disappear from the evidence list as well.
pub fn prune_network(net: &Network, spec: &PruneSpec) -> Result<Network> {
    if spec.is_empty() {
        return Ok(net.clone());
    }
    let removed: BTreeSet<&str> = spec.remove_vars.iter().map(String::as_str).collect();
    for v in &removed {
        if !net.contains(v) {
            return Err(Error::UnknownVariable(v.to_string()));
        }
        if *v == net.hypothesis_var() {
            return Err(Error::CannotRemoveHypothesis(v.to_string()));
        }
    }

    // child -> dropped parents
    let mut dropped: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for (parent, child) in &spec.remove_edges {
        for v in [parent, child] {
            if !net.contains(v) {
                return Err(Error::UnknownVariable(v.to_string()));
            }
        }
        if !net.parents_of(child).unwrap_or_default().contains(parent) {
            return Err(Error::InvalidPruneSpec(format!("no edge {parent} -> {child}")));
        }
        dropped.entry(child).or_default().insert(parent);
    }
    for var in net.variables() {
        for p in net.parents_of(&var.id).unwrap_or_default() {
            if removed.contains(p.as_str()) {
                dropped.entry(&var.id).or_default().insert(p);
            }
        }
    }

    let mut marginals: HashMap<&str, Vec<f64>> = HashMap::new();
    for parents in dropped.values() {
        for &p in parents {
            if !marginals.contains_key(p) {
                let d = posterior(net, &EvidenceSet::new(), p)?;
                marginals.insert(p, d.probabilities);
            }
        }
    }

    let def = net.def();
    let mut cpts = Vec::with_capacity(def.cpts.len());
    for cpt in &def.cpts {
        if removed.contains(cpt.child.as_str()) {
            continue;
        }
        match dropped.get(cpt.child.as_str()) {
            Some(gone) if !gone.is_empty() => cpts.push(average_out(net, cpt, gone, &marginals)),
            _ => cpts.push(cpt.clone()),
        }
    }

    let pruned = NetworkDef {
        variables: def
            .variables
            .iter()
            .filter(|v| !removed.contains(v.id.as_str()))
            .cloned()
            .collect(),
        cpts,
        hypothesis_var: def.hypothesis_var.clone(),
        evidence_vars: def
            .evidence_vars
            .iter()
            .filter(|v| !removed.contains(v.as_str()))
            .cloned()
            .collect(),
    };
    Network::new(pruned)
}

fn average_out(
    net: &Network,
    cpt: &Cpt,
    gone: &BTreeSet<&str>,
    marginals: &HashMap<&str, Vec<f64>>,
) -> Cpt {
    let cards: Vec<usize> = cpt
        .parents
        .iter()
        .map(|p| net.variable(p).map_or(0, |v| v.states.len()))
        .collect();
    let kept: Vec<usize> = (0..cpt.parents.len())
        .filter(|&i| !gone.contains(cpt.parents[i].as_str()))
        .collect();
    let new_rows: usize = kept.iter().map(|&i| cards[i]).product();
    let child_card = cpt.table.first().map_or(0, Vec::len);
    let mut table = vec![vec![0.0; child_card]; new_rows];

    // walk every old row, weight it and add it to the row of its kept parents
    let mut assignment = vec![0usize; cpt.parents.len()];
    for old in &cpt.table {
        let mut weight = 1.0;
        for (i, p) in cpt.parents.iter().enumerate() {
            if gone.contains(p.as_str()) {
                weight *= marginals[p.as_str()][assignment[i]];
            }
        }
        let target = kept.iter().fold(0, |acc, &i| acc * cards[i] + assignment[i]);
        for (t, &p) in table[target].iter_mut().zip(old) {
            *t += weight * p;
        }
        for i in (0..assignment.len()).rev() {
            assignment[i] += 1;
            if assignment[i] < cards[i] {
                break;
            }
            assignment[i] = 0;
        }
    }
    // weights sum to one per target row, so rows stay normalized up to rounding
    for row in &mut table {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|p| *p /= s);
        }
    }

    Cpt {
        child: cpt.child.clone(),
        parents: kept.iter().map(|&i| cpt.parents[i].clone()).collect(),
        table,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::{enumerate_posterior, validate_network, Variable};
    use crate::fixtures;

    #[test]
    fn empty_spec_is_identity() {
        let net = fixtures::mini_network();
        assert_eq!(prune_network(&net, &PruneSpec::default()).unwrap(), net);
    }

    #[test]
    fn removing_leaf_sensor_keeps_other_cpts() {
        let net = fixtures::mini_network();
        let pruned = prune_network(&net, &PruneSpec::default().remove_var("S2")).unwrap();
        let ids: Vec<&str> = pruned.variables().iter().map(|v| v.id.as_str()).collect();
        assert_eq!(ids, ["H", "S1"]);
        assert_eq!(pruned.cpt("S1"), net.cpt("S1"));
        assert_eq!(pruned.evidence_vars(), ["S1"]);
    }

    #[test]
    fn hypothesis_cannot_be_removed() {
        let net = fixtures::mini_network();
        let err = prune_network(&net, &PruneSpec::default().remove_var("H")).unwrap_err();
        assert!(matches!(err, Error::CannotRemoveHypothesis(_)));
    }

    #[test]
    fn unknown_references_are_errors() {
        let net = fixtures::mini_network();
        assert!(matches!(
            prune_network(&net, &PruneSpec::default().remove_var("Q")),
            Err(Error::UnknownVariable(_))
        ));
        assert!(matches!(
            prune_network(&net, &PruneSpec::default().remove_edge("Q", "S1")),
            Err(Error::UnknownVariable(_))
        ));
        assert!(matches!(
            prune_network(&net, &PruneSpec::default().remove_edge("S1", "S2")),
            Err(Error::InvalidPruneSpec(_))
        ));
    }

    /// A -> B -> C -> D, all binary.
    fn chain() -> Network {
        let vars = ["A", "B", "C", "D"];
        let variables = vars.iter().map(|v| Variable::new(v, v, ["f", "t"])).collect();
        let cpts = vec![
            Cpt::new("A", &[], vec![vec![0.3, 0.7]]),
            Cpt::new("B", &["A"], vec![vec![0.9, 0.1], vec![0.25, 0.75]]),
            Cpt::new("C", &["B"], vec![vec![0.6, 0.4], vec![0.05, 0.95]]),
            Cpt::new("D", &["C"], vec![vec![0.8, 0.2], vec![0.3, 0.7]]),
        ];
        Network::new(NetworkDef {
            variables,
            cpts,
            hypothesis_var: "A".into(),
            evidence_vars: vec!["D".into()],
        })
        .unwrap()
    }

    #[test]
    fn dropped_edge_averages_over_parent_marginal() {
        let net = chain();
        let pruned = prune_network(&net, &PruneSpec::default().remove_edge("B", "C")).unwrap();
        assert!(validate_network(pruned.def()).is_empty());
        let c = pruned.cpt("C").unwrap();
        assert!(c.parents.is_empty());
        for row in &c.table {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // C's marginal is preserved because B was its only parent
        let before = enumerate_posterior(&net, &EvidenceSet::new(), "C").unwrap();
        let after = enumerate_posterior(&pruned, &EvidenceSet::new(), "C").unwrap();
        assert!(before.max_abs_diff(&after) < 1e-12);
        // p(B=t) = 0.3*0.1 + 0.7*0.75 = 0.555; p(C=t) = 0.445*0.4 + 0.555*0.95
        assert!((after.probabilities[1] - (0.445 * 0.4 + 0.555 * 0.95)).abs() < 1e-12);
        // and D no longer carries information about A
        let e: EvidenceSet = [("D", "t")].into_iter().collect();
        let a = enumerate_posterior(&pruned, &e, "A").unwrap();
        assert!((a.probabilities[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn removing_middle_variable_marginalizes_children() {
        let net = chain();
        let pruned = prune_network(&net, &PruneSpec::default().remove_var("B")).unwrap();
        assert!(pruned.variable("B").is_none());
        assert!(pruned.cpt("C").unwrap().parents.is_empty());
        assert!(validate_network(pruned.def()).is_empty());
    }
}
