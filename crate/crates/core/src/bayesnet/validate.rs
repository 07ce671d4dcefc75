use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{NetworkDef, PROB_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DuplicateVariable,
    TooFewStates,
    DuplicateState,
    MissingCpt,
    DuplicateCpt,
    UnknownChild,
    UnknownParent,
    DuplicateParent,
    RowCount,
    RowLength,
    NegativeProbability,
    RowSum,
    Cycle,
    UnknownHypothesis,
    UnknownEvidenceVar,
    HypothesisIsEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub variable: String,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    fn push(&mut self, variable: &str, kind: ViolationKind, detail: impl Into<String>) {
        self.violations.push(Violation {
            variable: variable.to_string(),
            kind,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {}: {:?}: {}", v.variable, v.kind, v.detail)?;
        }
        Ok(())
    }
}

/// Checks every structural and numeric invariant of a network definition.
///
/// Never fails; each broken invariant becomes one report entry naming the
/// offending variable.
pub fn validate_network(def: &NetworkDef) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut cards: HashMap<&str, usize> = HashMap::new();
    for var in &def.variables {
        if cards.insert(var.id.as_str(), var.states.len()).is_some() {
            report.push(&var.id, ViolationKind::DuplicateVariable, "variable id declared twice");
        }
        if var.states.len() < 2 {
            report.push(
                &var.id,
                ViolationKind::TooFewStates,
                format!("{} state(s), need at least 2", var.states.len()),
            );
        }
        let mut seen = HashSet::new();
        for s in &var.states {
            if !seen.insert(s) {
                report.push(&var.id, ViolationKind::DuplicateState, format!("state `{s}` repeated"));
            }
        }
    }

    let mut cpt_count: HashMap<&str, usize> = HashMap::new();
    for cpt in &def.cpts {
        let Some(&child_card) = cards.get(cpt.child.as_str()) else {
            report.push(&cpt.child, ViolationKind::UnknownChild, "CPT for undeclared variable");
            continue;
        };
        *cpt_count.entry(cpt.child.as_str()).or_default() += 1;

        let mut seen = HashSet::new();
        let mut rows_expected = Some(1usize);
        for p in &cpt.parents {
            if !seen.insert(p) {
                report.push(&cpt.child, ViolationKind::DuplicateParent, format!("parent `{p}` listed twice"));
            }
            match cards.get(p.as_str()) {
                Some(&c) => rows_expected = rows_expected.map(|r| r * c),
                None => {
                    report.push(&cpt.child, ViolationKind::UnknownParent, format!("parent `{p}` is not declared"));
                    rows_expected = None;
                }
            }
        }
        if let Some(expected) = rows_expected {
            if cpt.table.len() != expected {
                report.push(
                    &cpt.child,
                    ViolationKind::RowCount,
                    format!("{} rows, expected {expected}", cpt.table.len()),
                );
            }
        }
        for (r, row) in cpt.table.iter().enumerate() {
            if row.len() != child_card {
                report.push(
                    &cpt.child,
                    ViolationKind::RowLength,
                    format!("row {r} has {} entries, expected {child_card}", row.len()),
                );
                continue;
            }
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                report.push(&cpt.child, ViolationKind::NegativeProbability, format!("row {r} has an invalid entry"));
                continue;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_TOLERANCE {
                report.push(&cpt.child, ViolationKind::RowSum, format!("row {r} sums to {sum}"));
            }
        }
    }
    for var in &def.variables {
        match cpt_count.get(var.id.as_str()) {
            None => report.push(&var.id, ViolationKind::MissingCpt, "no CPT"),
            Some(&n) if n > 1 => report.push(&var.id, ViolationKind::DuplicateCpt, format!("{n} CPTs")),
            _ => {}
        }
    }

    for cycle in find_cycles(def) {
        report.push(
            &cycle[0],
            ViolationKind::Cycle,
            format!("cycle through {}", cycle.join(" -> ")),
        );
    }

    if !cards.contains_key(def.hypothesis_var.as_str()) {
        report.push(&def.hypothesis_var, ViolationKind::UnknownHypothesis, "hypothesis variable not declared");
    }
    for ev in &def.evidence_vars {
        if !cards.contains_key(ev.as_str()) {
            report.push(ev, ViolationKind::UnknownEvidenceVar, "evidence variable not declared");
        }
        if *ev == def.hypothesis_var {
            report.push(ev, ViolationKind::HypothesisIsEvidence, "hypothesis variable marked observable");
        }
    }

    report
}

/// Strongly connected components of the parent graph that contain a cycle,
/// each sorted by variable id.
fn find_cycles(def: &NetworkDef) -> Vec<Vec<String>> {
    let ids: Vec<&str> = def.variables.iter().map(|v| v.id.as_str()).collect();
    let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let n = ids.len();
    // edges child -> parent; cycles are the same in either direction
    let mut adj = vec![Vec::new(); n];
    let mut self_loop = vec![false; n];
    for cpt in &def.cpts {
        let Some(&c) = pos.get(cpt.child.as_str()) else { continue };
        for p in &cpt.parents {
            if let Some(&pi) = pos.get(p.as_str()) {
                adj[c].push(pi);
                if pi == c {
                    self_loop[c] = true;
                }
            }
        }
    }

    struct Tarjan<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        sccs: Vec<Vec<usize>>,
    }

    impl Tarjan<'_> {
        fn visit(&mut self, v: usize) {
            self.index[v] = Some(self.next);
            self.low[v] = self.next;
            self.next += 1;
            self.stack.push(v);
            self.on_stack[v] = true;
            for i in 0..self.adj[v].len() {
                let w = self.adj[v][i];
                match self.index[w] {
                    None => {
                        self.visit(w);
                        self.low[v] = self.low[v].min(self.low[w]);
                    }
                    Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                    _ => {}
                }
            }
            if Some(self.low[v]) == self.index[v] {
                let mut scc = Vec::new();
                while let Some(w) = self.stack.pop() {
                    self.on_stack[w] = false;
                    scc.push(w);
                    if w == v {
                        break;
                    }
                }
                self.sccs.push(scc);
            }
        }
    }

    let mut t = Tarjan {
        adj: &adj,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        sccs: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    let mut cycles: Vec<Vec<String>> = t
        .sccs
        .into_iter()
        .filter(|scc| scc.len() > 1 || self_loop[scc[0]])
        .map(|scc| {
            let mut names: Vec<String> = scc.into_iter().map(|i| ids[i].to_string()).collect();
            names.sort();
            names
        })
        .collect();
    cycles.sort();
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn mini_is_valid() {
        assert!(validate_network(&fixtures::mini_network_def()).is_empty());
    }

    #[test]
    fn rescaled_row_is_one_row_sum_violation() {
        let mut def = fixtures::mini_network_def();
        let cpt = def.cpts.iter_mut().find(|c| c.child == "S1").unwrap();
        for p in cpt.table[0].iter_mut() {
            *p *= 1.1;
        }
        let report = validate_network(&def);
        assert_eq!(report.len(), 1, "{report}");
        assert_eq!(report.violations[0].kind, ViolationKind::RowSum);
        assert_eq!(report.violations[0].variable, "S1");
    }

    #[test]
    fn self_parent_is_one_cycle_violation() {
        let mut def = fixtures::mini_network_def();
        let cpt = def.cpts.iter_mut().find(|c| c.child == "S1").unwrap();
        cpt.parents.push("S1".into());
        // keep the table shape consistent so the cycle is the only problem
        cpt.table = cpt.table.iter().flat_map(|r| [r.clone(), r.clone()]).collect();
        let report = validate_network(&def);
        assert_eq!(report.len(), 1, "{report}");
        assert_eq!(report.violations[0].kind, ViolationKind::Cycle);
        assert_eq!(report.violations[0].variable, "S1");
    }

    #[test]
    fn two_cycle_reported_once() {
        let mut def = fixtures::mini_network_def();
        // S1 <- S2 and S2 <- S1
        for (child, parent) in [("S1", "S2"), ("S2", "S1")] {
            let cpt = def.cpts.iter_mut().find(|c| c.child == child).unwrap();
            cpt.parents.push(parent.into());
            cpt.table = cpt.table.iter().flat_map(|r| [r.clone(), r.clone()]).collect();
        }
        let report = validate_network(&def);
        assert_eq!(report.count(ViolationKind::Cycle), 1, "{report}");
    }

    #[test]
    fn structural_problems_are_listed() {
        let mut def = fixtures::mini_network_def();
        def.evidence_vars.push("H".into());
        def.evidence_vars.push("S9".into());
        def.cpts.retain(|c| c.child != "S2");
        def.variables[0].states.push("nominal".into());
        let report = validate_network(&def);
        assert_eq!(report.count(ViolationKind::HypothesisIsEvidence), 1);
        assert_eq!(report.count(ViolationKind::UnknownEvidenceVar), 1);
        assert_eq!(report.count(ViolationKind::MissingCpt), 1);
        assert_eq!(report.count(ViolationKind::DuplicateState), 1);
    }
}
