use super::{Distribution, EvidenceSet, Network};
use crate::error::{Error, Result};

/// Largest joint state space [`enumerate_posterior`] will walk.
pub const ENUMERATION_CAP: u128 = 1 << 20;

/// Conditional distribution of `query` given `evidence`, computed by
/// summing the full joint distribution.
///
/// Exponential in the number of variables; meant as an
/// independent oracle for [`super::posterior`], not for production use.
pub fn enumerate_posterior(
    net: &Network,
    evidence: &EvidenceSet,
    query: &str,
) -> Result<Distribution> {
    let size = net.joint_size();
    if size > ENUMERATION_CAP {
        return Err(Error::StateSpaceTooLarge {
            size,
            cap: ENUMERATION_CAP,
        });
    }
    let q = net.var_index(query)?;
    let observed = net.resolve_evidence(evidence)?;

    let n = net.len();
    let mut fixed: Vec<Option<usize>> = vec![None; n];
    for &(v, s) in &observed {
        fixed[v] = Some(s);
    }
    let free: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();

    let mut assignment: Vec<usize> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
    let mut mass = vec![0.0; net.card(q)];
    loop {
        let mut p = 1.0;
        for v in 0..n {
            p *= net.table_of(v)[net.row_index(v, &assignment)][assignment[v]];
            if p == 0.0 {
                break;
            }
        }
        mass[assignment[q]] += p;

        // next assignment of the free variables
        let mut carried = true;
        for &v in free.iter().rev() {
            assignment[v] += 1;
            if assignment[v] < net.card(v) {
                carried = false;
                break;
            }
            assignment[v] = 0;
        }
        if carried {
            break;
        }
    }

    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InconsistentEvidence);
    }
    Ok(Distribution {
        variable: query.to_string(),
        states: net.variables()[q].states.clone(),
        probabilities: mass.iter().map(|m| m / total).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::{posterior, Cpt, NetworkDef, Variable};
    use crate::fixtures;

    #[test]
    fn mini_hand_enumeration() {
        let net = fixtures::mini_network();
        let d = enumerate_posterior(&net, &EvidenceSet::new(), "H").unwrap();
        assert!((d.prob("leak").unwrap() - 0.2).abs() < 1e-12);
        // 0.2*0.9*0.1 vs 0.8*0.1*0.9
        let e: EvidenceSet = [("S1", "high"), ("S2", "low")].into_iter().collect();
        let d = enumerate_posterior(&net, &e, "H").unwrap();
        assert!((d.prob("leak").unwrap() - 0.018 / 0.09).abs() < 1e-12);
        let e: EvidenceSet = [("S1", "high")].into_iter().collect();
        let a = enumerate_posterior(&net, &e, "H").unwrap();
        let b = posterior(&net, &e, "H").unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9);
    }

    #[test]
    fn cap_is_enforced() {
        let n = 21;
        let variables: Vec<Variable> = (0..n)
            .map(|i| Variable::new(&format!("v{i:02}"), "", ["a", "b"]))
            .collect();
        let cpts = variables
            .iter()
            .map(|v| Cpt::new(&v.id, &[], vec![vec![0.5, 0.5]]))
            .collect();
        let net = Network::new(NetworkDef {
            variables,
            cpts,
            hypothesis_var: "v00".into(),
            evidence_vars: vec![],
        })
        .unwrap();
        assert!(matches!(
            enumerate_posterior(&net, &EvidenceSet::new(), "v00"),
            Err(Error::StateSpaceTooLarge { .. })
        ));
        // variable elimination has no such cap
        assert!(posterior(&net, &EvidenceSet::new(), "v00").is_ok());
    }
}
