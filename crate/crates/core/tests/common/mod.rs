//! Random models and brute-force oracles shared by the integration suites.
//! The oracles deliberately avoid the library's inference and metric code:
//! they enumerate the joint distribution directly and read utility curves
//! from their breakpoints.
#![allow(dead_code)]

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sightline_core::bayesnet::{Cpt, Variable};
use sightline_core::decision::{ActionDef, PiecewiseLinear};
use sightline_core::{DecisionModel, EvidenceSet, Network, NetworkDef, ReviewTimeModel, TimedUtility};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive but skewed row, so no evidence is ever impossible
/// and most evidence is informative.
fn random_row(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.02 + rng.random::<f64>().powi(3)).collect();
    let total: f64 = raw.iter().sum();
    let mut row: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = row[..n - 1].iter().sum();
    row[n - 1] = 1.0 - head;
    row
}

/// Random DAG over `n` variables `X0..`; `X0` is the hypothesis with
/// `hyp_states` states, the rest are binary. Each variable draws up to
/// `max_parents` parents among earlier variables. The last `n_evidence`
/// variables are designated evidence.
pub fn random_network(
    rng: &mut impl Rng,
    n: usize,
    hyp_states: usize,
    max_parents: usize,
    n_evidence: usize,
) -> NetworkDef {
    assert!(n >= 2 && n_evidence < n);
    let mut variables = Vec::new();
    let mut cpts = Vec::new();
    for i in 0..n {
        let id = format!("X{i}");
        let states: Vec<String> = if i == 0 {
            (0..hyp_states).map(|s| format!("h{s}")).collect()
        } else {
            vec!["off".into(), "on".into()]
        };
        let mut parents: Vec<usize> = Vec::new();
        if i > 0 {
            let k = rng.random_range(0..=max_parents.min(i));
            while parents.len() < k {
                let p = rng.random_range(0..i);
                if !parents.contains(&p) {
                    parents.push(p);
                }
            }
            // evidence should usually depend on the hypothesis somehow
            if parents.is_empty() && rng.random_bool(0.7) {
                parents.push(0);
            }
        }
        parents.sort_unstable();
        let combos: usize = parents
            .iter()
            .map(|&p| if p == 0 { hyp_states } else { 2 })
            .product();
        let table = (0..combos).map(|_| random_row(rng, states.len())).collect();
        let parent_ids: Vec<String> = parents.iter().map(|p| format!("X{p}")).collect();
        let parent_refs: Vec<&str> = parent_ids.iter().map(String::as_str).collect();
        cpts.push(Cpt::new(&id, &parent_refs, table));
        variables.push(Variable::new(&id, &id, states));
    }
    NetworkDef {
        variables,
        cpts,
        hypothesis_var: "X0".into(),
        evidence_vars: (n - n_evidence..n).map(|i| format!("X{i}")).collect(),
    }
}

/// Random decision model: `n_evidence` observable variables, a few latent
/// ones, 2 to 4 hypothesis states and 2 to 4 actions. With `timed`, every
/// utility decays linearly over a random horizon.
pub fn random_model(rng: &mut impl Rng, n_evidence: usize, timed: bool) -> DecisionModel {
    let hyp_states = rng.random_range(2..=4);
    let latent = rng.random_range(0..=2);
    let def = random_network(rng, 1 + latent + n_evidence, hyp_states, 2, n_evidence);
    let network = Network::new(def).expect("generated network is valid");
    let n_actions = rng.random_range(2..=4);
    let actions: Vec<ActionDef> = (0..n_actions)
        .map(|a| ActionDef::new(&format!("a{a}"), &format!("action {a}")))
        .collect();
    let mut utility = TimedUtility::new();
    // each action is best under one hypothesis state, so evidence matters
    for (i, a) in actions.iter().enumerate() {
        for (j, s) in network.hypothesis().states.iter().enumerate() {
            let start = if j == i % hyp_states {
                rng.random_range(0.5..1.0)
            } else {
                rng.random_range(0.0..0.6)
            };
            let curve = if timed {
                let end = start * rng.random::<f64>();
                PiecewiseLinear::linear(start, end, rng.random_range(2.0..12.0))
            } else {
                PiecewiseLinear::constant(start)
            };
            utility.set(&a.id, s, curve);
        }
    }
    DecisionModel::new(network, actions, utility).expect("generated model is valid")
}

/// Uniformly random assignment to every evidence variable.
pub fn random_full(rng: &mut impl Rng, net: &Network) -> EvidenceSet {
    net.evidence_vars()
        .iter()
        .map(|v| {
            let states = &net.variable(v).unwrap().states;
            (v.clone(), states[rng.random_range(0..states.len())].clone())
        })
        .collect()
}

pub fn random_subset(rng: &mut impl Rng, full: &EvidenceSet) -> EvidenceSet {
    full.iter().filter(|_| rng.random_bool(0.5)).collect()
}

pub fn random_review(rng: &mut impl RngCore, full: &EvidenceSet) -> ReviewTimeModel {
    let mut r = ReviewTimeModel::zero();
    r.base_delay = rng.random_range(0.0..1.0);
    for v in full.vars() {
        r = r.with_cost(v, rng.random_range(0.0..2.0));
    }
    r
}

/// `p(query | evidence)` by summing the full joint.
pub fn brute_posterior(net: &Network, evidence: &EvidenceSet, query: &str) -> Vec<f64> {
    let def = net.def();
    let vars = &def.variables;
    let index = |id: &str| vars.iter().position(|v| v.id == id).unwrap();
    let q = index(query);
    let cards: Vec<usize> = vars.iter().map(|v| v.states.len()).collect();
    let fixed: Vec<Option<usize>> = vars
        .iter()
        .map(|v| evidence.get(&v.id).map(|s| v.state_index(s).unwrap()))
        .collect();
    let cpt_parents: Vec<(usize, Vec<usize>)> = def
        .cpts
        .iter()
        .map(|c| (index(&c.child), c.parents.iter().map(|p| index(p)).collect()))
        .collect();
    let mut out = vec![0.0; cards[q]];
    let mut assign = vec![0usize; vars.len()];
    let total: usize = cards.iter().product();
    for mut code in 0..total {
        for i in (0..vars.len()).rev() {
            assign[i] = code % cards[i];
            code /= cards[i];
        }
        if fixed.iter().zip(&assign).any(|(f, a)| f.is_some_and(|f| f != *a)) {
            continue;
        }
        let mut p = 1.0;
        for (cpt, (child, parents)) in def.cpts.iter().zip(&cpt_parents) {
            let mut row = 0;
            for &par in parents {
                row = row * cards[par] + assign[par];
            }
            p *= cpt.table[row][assign[*child]];
        }
        out[assign[q]] += p;
    }
    let z: f64 = out.iter().sum();
    out.iter().map(|x| x / z).collect()
}

/// Piecewise-linear evaluation straight from the breakpoints.
pub fn curve_at(model: &DecisionModel, action: &str, state: &str, t: f64) -> f64 {
    let bp = model.utility().curve(action, state).unwrap().breakpoints();
    if t <= bp[0].0 {
        return bp[0].1;
    }
    for w in bp.windows(2) {
        let ((t0, u0), (t1, u1)) = (w[0], w[1]);
        if t <= t1 {
            return u0 + (u1 - u0) * (t - t0) / (t1 - t0);
        }
    }
    bp[bp.len() - 1].1
}

pub fn eu(model: &DecisionModel, action: &str, hyp: &[f64], t: f64) -> f64 {
    model
        .hypothesis_states()
        .iter()
        .zip(hyp)
        .map(|(s, p)| p * curve_at(model, action, s, t))
        .sum()
}

/// Argmax over actions by id, ties to the smallest id.
pub fn best(model: &DecisionModel, hyp: &[f64], t: f64) -> String {
    let mut ids: Vec<&str> = model.action_ids().collect();
    ids.sort_unstable();
    let mut best = ids[0];
    let mut best_eu = eu(model, best, hyp, t);
    for &a in &ids[1..] {
        let v = eu(model, a, hyp, t);
        if v > best_eu {
            best = a;
            best_eu = v;
        }
    }
    best.to_string()
}

pub fn displayed_action(model: &DecisionModel, shown: &EvidenceSet, t: f64) -> String {
    let hyp = brute_posterior(model.network(), shown, model.network().hypothesis_var());
    best(model, &hyp, t)
}

pub fn review_time(r: &ReviewTimeModel, shown: &EvidenceSet) -> f64 {
    r.base_delay + shown.vars().map(|v| r.per_item_cost.get(v).copied().unwrap_or(r.default_cost)).sum::<f64>()
}

/// Value of revealing `reveal` on top of `shown`, scored under the full
/// posterior. With `review`, both decisions happen at their review delays;
/// without, at time zero.
pub fn oracle_value(
    model: &DecisionModel,
    reveal: &EvidenceSet,
    shown: &EvidenceSet,
    full: &EvidenceSet,
    review: Option<&ReviewTimeModel>,
) -> (f64, String, String) {
    let gold = brute_posterior(model.network(), full, model.network().hypothesis_var());
    let after = shown.union(reveal);
    let (tb, ta) = match review {
        None => (0.0, 0.0),
        Some(r) => (review_time(r, shown), review_time(r, &after)),
    };
    let before_action = displayed_action(model, shown, tb);
    let after_action = displayed_action(model, &after, ta);
    if review.is_none() && before_action == after_action {
        return (0.0, before_action, after_action);
    }
    let v = eu(model, &after_action, &gold, ta) - eu(model, &before_action, &gold, tb);
    (v, before_action, after_action)
}

/// Every subset of `items`, in mask order.
pub fn subsets(items: &EvidenceSet) -> Vec<EvidenceSet> {
    let list: Vec<(&str, &str)> = items.iter().collect();
    (0..1u64 << list.len())
        .map(|mask| {
            list.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, kv)| *kv)
                .collect()
        })
        .collect()
}

pub fn minus(a: &EvidenceSet, b: &EvidenceSet) -> EvidenceSet {
    a.restrict(|v| !b.contains(v))
}

pub fn ids(e: &EvidenceSet) -> Vec<String> {
    e.vars().map(str::to_string).collect()
}
