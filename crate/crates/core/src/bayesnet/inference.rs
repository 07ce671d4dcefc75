//! Exact inference by variable elimination.

use std::collections::BTreeSet;

use super::factor::Factor;
use super::{Distribution, EvidenceSet, Network};
use crate::error::{Error, Result};

/// Exact conditional distribution of `query` given `evidence`.
///
/// Sum-product variable elimination with a min-degree ordering (ties broken
/// by variable position, so results are deterministic). Variables that are
/// not ancestors of the query or of any evidence variable are barren and
/// dropped before elimination.
pub fn posterior(net: &Network, evidence: &EvidenceSet, query: &str) -> Result<Distribution> {
    let q = net.var_index(query)?;
    let observed = net.resolve_evidence(evidence)?;

    let query_var = &net.variables()[q];
    if let Some(&(_, s)) = observed.iter().find(|(v, _)| *v == q) {
        // conditioning on the query itself still has to be consistent
        let mut reduced = evidence.clone();
        reduced.remove(query);
        let prior = posterior(net, &reduced, query)?;
        if prior.probabilities[s] <= 0.0 {
            return Err(Error::InconsistentEvidence);
        }
        let mut probabilities = vec![0.0; query_var.states.len()];
        probabilities[s] = 1.0;
        return Ok(Distribution {
            variable: query.to_string(),
            states: query_var.states.clone(),
            probabilities,
        });
    }

    let relevant = ancestral_set(net, q, &observed);

    let mut factors: Vec<Factor> = relevant
        .iter()
        .map(|&v| {
            let mut f = cpt_factor(net, v);
            for &(ev, es) in &observed {
                f = f.restrict(ev, es);
            }
            f
        })
        .collect();

    let hidden: Vec<usize> = relevant
        .iter()
        .copied()
        .filter(|&v| v != q && !observed.iter().any(|&(ev, _)| ev == v))
        .collect();

    for var in min_degree_order(&factors, &hidden) {
        let (with, without): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.scope.contains(&var));
        let merged = with
            .iter()
            .fold(Factor::scalar(1.0), |acc, f| acc.product(f));
        factors = without;
        factors.push(merged.sum_out(var));
    }

    let joint = factors
        .iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(f));
    debug_assert_eq!(joint.scope, vec![q]);
    let total: f64 = joint.values.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InconsistentEvidence);
    }
    Ok(Distribution {
        variable: query.to_string(),
        states: query_var.states.clone(),
        probabilities: joint.values.iter().map(|v| v / total).collect(),
    })
}

fn cpt_factor(net: &Network, var: usize) -> Factor {
    let mut scope = net.parent_indices(var).to_vec();
    scope.push(var);
    let cards = scope.iter().map(|&v| net.card(v)).collect();
    Factor {
        scope,
        cards,
        values: net.table_of(var).concat(),
    }
}

/// The query, the evidence variables and all of their ancestors, in index order.
fn ancestral_set(net: &Network, query: usize, observed: &[(usize, usize)]) -> Vec<usize> {
    let mut keep = vec![false; net.len()];
    let mut stack: Vec<usize> = std::iter::once(query)
        .chain(observed.iter().map(|&(v, _)| v))
        .collect();
    while let Some(v) = stack.pop() {
        if keep[v] {
            continue;
        }
        keep[v] = true;
        stack.extend(net.parent_indices(v).iter().copied());
    }
    (0..net.len()).filter(|&v| keep[v]).collect()
}

/// Greedy min-degree elimination ordering over the interaction graph of
/// `factors`, restricted to `hidden`. Eliminating a variable connects its
/// remaining neighbours.
fn min_degree_order(factors: &[Factor], hidden: &[usize]) -> Vec<usize> {
    let n = factors
        .iter()
        .flat_map(|f| f.scope.iter().copied())
        .chain(hidden.iter().copied())
        .max()
        .map_or(0, |m| m + 1);
    let mut neighbors = vec![BTreeSet::new(); n];
    for f in factors {
        for &a in &f.scope {
            for &b in &f.scope {
                if a != b {
                    neighbors[a].insert(b);
                }
            }
        }
    }
    let mut remaining: BTreeSet<usize> = hidden.iter().copied().collect();
    let mut order = Vec::with_capacity(remaining.len());
    while let Some(&next) = remaining
        .iter()
        .min_by_key(|&&v| (neighbors[v].len(), v))
    {
        remaining.remove(&next);
        let nbrs: Vec<usize> = neighbors[next].iter().copied().collect();
        for &a in &nbrs {
            neighbors[a].remove(&next);
            for &b in &nbrs {
                if a != b {
                    neighbors[a].insert(b);
                }
            }
        }
        neighbors[next].clear();
        order.push(next);
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ev(pairs: &[(&str, &str)]) -> EvidenceSet {
        pairs.iter().copied().collect()
    }

    #[test]
    fn empty_evidence_is_prior() {
        let net = fixtures::mini_network();
        let d = posterior(&net, &EvidenceSet::new(), "H").unwrap();
        assert!((d.prob("leak").unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn mini_posteriors() {
        let net = fixtures::mini_network();
        // 0.18 / (0.18 + 0.08)
        let d = posterior(&net, &ev(&[("S1", "high")]), "H").unwrap();
        assert!((d.prob("leak").unwrap() - 9.0 / 13.0).abs() < 1e-12);
        // 0.162 / (0.162 + 0.008)
        let d = posterior(&net, &ev(&[("S1", "high"), ("S2", "high")]), "H").unwrap();
        assert!((d.prob("leak").unwrap() - 81.0 / 85.0).abs() < 1e-12);
        assert!((d.prob("leak").unwrap() - 0.9529).abs() < 1e-4);
        let d = posterior(&net, &ev(&[("S1", "high"), ("S2", "low")]), "H").unwrap();
        assert!((d.prob("leak").unwrap() - 0.018 / 0.09).abs() < 1e-12);
    }

    #[test]
    fn sensor_marginal_and_query_on_evidence() {
        let net = fixtures::mini_network();
        let d = posterior(&net, &EvidenceSet::new(), "S1").unwrap();
        assert!((d.prob("high").unwrap() - 0.26).abs() < 1e-12);
        let d = posterior(&net, &ev(&[("S1", "high")]), "S1").unwrap();
        assert_eq!(d.probabilities, vec![0.0, 1.0]);
    }

    #[test]
    fn zero_probability_evidence_is_an_error() {
        let mut def = fixtures::mini_network_def();
        // S1 can never be high when nominal, and leak is impossible
        def.cpts[0].table = vec![vec![1.0, 0.0]];
        def.cpts[1].table = vec![vec![1.0, 0.0], vec![0.1, 0.9]];
        let net = Network::new(def).unwrap();
        let err = posterior(&net, &ev(&[("S1", "high")]), "H").unwrap_err();
        assert!(matches!(err, Error::InconsistentEvidence));
        let err = posterior(&net, &ev(&[("S1", "high")]), "S1").unwrap_err();
        assert!(matches!(err, Error::InconsistentEvidence));
    }

    #[test]
    fn unknown_names_are_errors() {
        let net = fixtures::mini_network();
        assert!(matches!(
            posterior(&net, &EvidenceSet::new(), "X"),
            Err(Error::UnknownVariable(_))
        ));
        assert!(matches!(
            posterior(&net, &ev(&[("S1", "medium")]), "H"),
            Err(Error::UnknownState { .. })
        ));
    }
}
