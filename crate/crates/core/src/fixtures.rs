//! Built-in desk-scale models and scenarios.
//!
//! All numbers here are invented for testing and demonstration. The JSON
//! copies under `fixtures/` are checked against these builders.

use crate::bayesnet::{Cpt, EvidenceSet, Network, NetworkDef, PruneSpec, Variable};
use crate::decision::{ActionDef, DecisionModel, PiecewiseLinear, TimedUtility};
use crate::metrics::ReviewTimeModel;
use crate::policy::{Context, EvidencePartition, PolicyConfig, PolicyKind, Template};
use crate::simulator::{FailureMode, GroundTruth, Phase, Scenario, SensorSpec};
use crate::user_model::{build_pruned_user_model, ActionMapping, UserResponseModel};

/// `nominal` and `leak` are the sensor rows as (low, high).
fn two_sensor_def(nominal: [f64; 2], leak: [f64; 2]) -> NetworkDef {
    let sensor = |id: &str| Cpt::new(id, &["H"], vec![nominal.to_vec(), leak.to_vec()]);
    NetworkDef {
        variables: vec![
            Variable::new("H", "Propellant system", ["nominal", "leak"]),
            Variable::new("S1", "Pressure sensor 1", ["low", "high"]),
            Variable::new("S2", "Pressure sensor 2", ["low", "high"]),
        ],
        cpts: vec![
            Cpt::new("H", &[], vec![vec![0.8, 0.2]]),
            sensor("S1"),
            sensor("S2"),
        ],
        hypothesis_var: "H".into(),
        evidence_vars: vec!["S1".into(), "S2".into()],
    }
}

/// Two conditionally independent sensors over a nominal/leak hypothesis.
pub fn mini_network_def() -> NetworkDef {
    two_sensor_def([0.9, 0.1], [0.1, 0.9])
}

pub fn mini_network() -> Network {
    Network::new(mini_network_def()).expect("fixture is valid")
}

fn mini_actions() -> Vec<ActionDef> {
    vec![ActionDef::new("continue", "Continue"), ActionDef::new("halt", "Halt")]
}

fn mini_utility(halt: PiecewiseLinear) -> TimedUtility {
    TimedUtility::new()
        .with("continue", "nominal", PiecewiseLinear::constant(1.0))
        .with("continue", "leak", PiecewiseLinear::constant(0.0))
        .with("halt", "nominal", halt.clone())
        .with("halt", "leak", halt)
}

/// MINI with time-constant utilities.
pub fn mini_model() -> DecisionModel {
    DecisionModel::new(mini_network(), mini_actions(), mini_utility(PiecewiseLinear::constant(0.6)))
        .expect("fixture is valid")
}

/// MINI where halting loses value linearly from 0.6 to 0 over ten time units.
pub fn mini_t_model() -> DecisionModel {
    DecisionModel::new(
        mini_network(),
        mini_actions(),
        mini_utility(PiecewiseLinear::linear(0.6, 0.0, 10.0)),
    )
    .expect("fixture is valid")
}

/// Weaker sensors: each alone leaves `continue` optimal, both together give
/// `halt`.
pub fn mini_weak_model() -> DecisionModel {
    let net = Network::new(two_sensor_def([0.7, 0.3], [0.3, 0.7])).expect("fixture is valid");
    DecisionModel::new(net, mini_actions(), mini_utility(PiecewiseLinear::constant(0.6)))
        .expect("fixture is valid")
}

/// Operator who only knows about `S1`, choosing by argmax.
pub fn mini_novice(model: &DecisionModel) -> UserResponseModel {
    let belief = build_pruned_user_model(model.network(), &PruneSpec::default().remove_var("S2"), "novice")
        .expect("S2 is removable");
    UserResponseModel::new(
        belief,
        ActionMapping::argmax(model.utility().clone()),
        model.action_ids().map(str::to_string).collect(),
    )
    .expect("fixture is valid")
}

/// Every partial assignment to `vars`: each variable absent or set to one
/// of its states.
pub fn all_assignments(vars: &[String], net: &Network) -> Vec<EvidenceSet> {
    let mut out = vec![EvidenceSet::new()];
    for v in vars {
        let states = &net.variable(v).expect("variable in network").states;
        let mut next = Vec::with_capacity(out.len() * (states.len() + 1));
        for e in &out {
            next.push(e.clone());
            for s in states {
                next.push(e.clone().with(v.as_str(), s.as_str()));
            }
        }
        out = next;
    }
    out
}

/// Every subset of `full`.
pub fn all_subsets(full: &EvidenceSet) -> Vec<EvidenceSet> {
    let items: Vec<(&str, &str)> = full.iter().collect();
    (0u64..1 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &kv)| kv)
                .collect()
        })
        .collect()
}

const OMS_FAULTS: [&str; 4] = ["nominal", "left_leak", "right_leak", "he_reg_fail"];

/// Orbital-maneuvering-style propulsion network with two mirrored pods.
///
/// Helium pressure and tank level per side depend on the fault; each helium
/// sensor also depends on a validity node so a failed transducer reads
/// uniformly at random.
pub fn oms_network_def() -> NetworkDef {
    let mut variables = vec![Variable::new("fault", "Propulsion fault", OMS_FAULTS)];
    let mut cpts = vec![Cpt::new("fault", &[], vec![vec![0.88, 0.04, 0.04, 0.04]])];
    for (side, name, leak) in [("l", "Left", 1usize), ("r", "Right", 2usize)] {
        let upper = side.to_uppercase();
        let he = format!("{side}_he");
        let tank = format!("{side}_tank");
        let valid = format!("{side}_he_valid");
        let he_sensor = format!("{upper}_HE");
        let tank_sensor = format!("{upper}_TANK");
        let trend = format!("{upper}_TREND");

        variables.push(Variable::new(&he, &format!("{name} helium pressure"), ["normal", "low"]));
        variables.push(Variable::new(&tank, &format!("{name} tank quantity"), ["normal", "low"]));
        variables.push(Variable::new(&valid, &format!("{name} helium transducer"), ["ok", "failed"]));
        variables.push(Variable::new(&he_sensor, &format!("{name} He pressure reading"), ["normal", "low"]));
        variables.push(Variable::new(&tank_sensor, &format!("{name} tank reading"), ["normal", "low"]));
        variables.push(Variable::new(&trend, &format!("{name} tank trend"), ["flat", "down"]));

        // rows follow OMS_FAULTS order, as (normal, low)
        let he_rows = (0..4)
            .map(|f| if f == leak || f == 3 { vec![0.1, 0.9] } else { vec![0.98, 0.02] })
            .collect();
        let tank_rows = (0..4)
            .map(|f| match f {
                _ if f == leak => vec![0.15, 0.85],
                3 => vec![0.7, 0.3],
                _ => vec![0.97, 0.03],
            })
            .collect();
        cpts.push(Cpt::new(&he, &["fault"], he_rows));
        cpts.push(Cpt::new(&tank, &["fault"], tank_rows));
        cpts.push(Cpt::new(&valid, &[], vec![vec![0.9, 0.1]]));
        cpts.push(Cpt::new(
            &he_sensor,
            &[he.as_str(), valid.as_str()],
            vec![vec![0.97, 0.03], vec![0.5, 0.5], vec![0.03, 0.97], vec![0.5, 0.5]],
        ));
        cpts.push(Cpt::new(&tank_sensor, &[tank.as_str()], vec![vec![0.95, 0.05], vec![0.05, 0.95]]));
        cpts.push(Cpt::new(&trend, &[tank.as_str()], vec![vec![0.95, 0.05], vec![0.2, 0.8]]));
    }
    NetworkDef {
        variables,
        cpts,
        hypothesis_var: "fault".into(),
        evidence_vars: ["L_HE", "R_HE", "L_TANK", "R_TANK", "L_TREND", "R_TREND"]
            .into_iter()
            .map(String::from)
            .collect(),
    }
}

pub fn oms_network() -> Network {
    Network::new(oms_network_def()).expect("fixture is valid")
}

pub fn oms_model() -> DecisionModel {
    let c = PiecewiseLinear::constant;
    let lin = PiecewiseLinear::linear;
    let mut u = TimedUtility::new();
    for leak in ["left_leak", "right_leak"] {
        u.set("continue", leak, lin(0.2, 0.0, 10.0));
        u.set("crossfeed", leak, lin(0.9, 0.3, 10.0));
        u.set("halt", leak, lin(0.6, 0.2, 10.0));
    }
    u.set("continue", "nominal", c(1.0));
    u.set("crossfeed", "nominal", c(0.6));
    u.set("halt", "nominal", c(0.5));
    u.set("continue", "he_reg_fail", c(0.0));
    u.set("crossfeed", "he_reg_fail", c(0.1));
    u.set("halt", "he_reg_fail", c(0.7));
    DecisionModel::new(
        oms_network(),
        vec![
            ActionDef::new("continue", "Continue burn"),
            ActionDef::new("crossfeed", "Crossfeed"),
            ActionDef::new("halt", "Halt burn"),
        ],
        u,
    )
    .expect("fixture is valid")
}

pub fn oms_templates() -> Vec<Template> {
    vec![
        Template::new("left_oms", &[&["L_HE"], &["L_HE", "L_TANK"], &["L_HE", "L_TANK", "L_TREND"]]),
        Template::new("right_oms", &[&["R_HE"], &["R_HE", "R_TANK"], &["R_HE", "R_TANK", "R_TREND"]]),
    ]
}

pub fn oms_partition() -> EvidencePartition {
    EvidencePartition {
        core: vec!["L_HE".into(), "R_HE".into()],
        aux_clusters: [("trends".to_string(), vec!["L_TREND".to_string(), "R_TREND".to_string()])]
            .into_iter()
            .collect(),
    }
}

/// Full OMS readings for a left-pod leak.
pub fn oms_left_leak_evidence() -> EvidenceSet {
    [
        ("L_HE", "low"),
        ("L_TANK", "low"),
        ("L_TREND", "down"),
        ("R_HE", "normal"),
        ("R_TANK", "normal"),
        ("R_TREND", "flat"),
    ]
    .into_iter()
    .collect()
}

/// Full OMS readings with nothing abnormal.
pub fn oms_nominal_evidence() -> EvidenceSet {
    [
        ("L_HE", "normal"),
        ("L_TANK", "normal"),
        ("L_TREND", "flat"),
        ("R_HE", "normal"),
        ("R_TANK", "normal"),
        ("R_TREND", "flat"),
    ]
    .into_iter()
    .collect()
}

/// Trainee who does not model transducer failures.
pub fn oms_trainee(model: &DecisionModel) -> UserResponseModel {
    let spec = PruneSpec::default().remove_var("l_he_valid").remove_var("r_he_valid");
    let belief = build_pruned_user_model(model.network(), &spec, "trainee").expect("validity nodes are removable");
    UserResponseModel::new(
        belief,
        ActionMapping::argmax(model.utility().clone()),
        model.action_ids().map(str::to_string).collect(),
    )
    .expect("fixture is valid")
}

fn healthy(id: &str, rows: &[(&str, &[f64])]) -> SensorSpec {
    SensorSpec {
        id: id.to_string(),
        emission: rows.iter().map(|(h, p)| (h.to_string(), p.to_vec())).collect(),
        failure: FailureMode::None,
    }
}

fn mini_sensors() -> Vec<SensorSpec> {
    let rows: &[(&str, &[f64])] = &[("nominal", &[0.9, 0.1]), ("leak", &[0.1, 0.9])];
    vec![healthy("S1", rows), healthy("S2", rows)]
}

fn single_phase(horizon: u32, phase: &str) -> Vec<Phase> {
    vec![Phase {
        start: 0,
        end: horizon,
        context: Context::new(phase),
    }]
}

fn mini_scenario_with(name: &str, model: DecisionModel, truth: GroundTruth, review: ReviewTimeModel) -> Scenario {
    Scenario {
        name: name.to_string(),
        seed: 7,
        model,
        ground_truth: truth,
        sensors: mini_sensors(),
        phases: single_phase(20, "burn"),
        horizon: 20,
        templates: vec![Template::new("propellant", &[&["S1"], &["S1", "S2"]])],
        partition: EvidencePartition {
            core: vec!["S1".into()],
            aux_clusters: Default::default(),
        },
        review,
        default_action: Some("continue".into()),
    }
}

/// MINI with a leak from frame 0 and no review cost.
pub fn mini_scenario() -> Scenario {
    mini_scenario_with("mini", mini_model(), GroundTruth::fault("leak", 0), ReviewTimeModel::zero())
}

/// MINI-T with a leak starting at `onset` and unit review costs.
pub fn mini_t_leak_scenario(onset: u32) -> Scenario {
    mini_scenario_with(
        "mini_t_leak",
        mini_t_model(),
        GroundTruth::fault("leak", onset),
        ReviewTimeModel::unit(),
    )
}

/// MINI-T with no fault and unit review costs.
pub fn mini_t_nominal_scenario() -> Scenario {
    mini_scenario_with("mini_t_nominal", mini_t_model(), GroundTruth::nominal(), ReviewTimeModel::unit())
}

/// OMS with a left-pod leak at frame 3, a burn phase followed by a coast
/// phase, and a stuck right tank reading from frame 12.
pub fn oms_scenario() -> Scenario {
    let he: &[(&str, &[f64])] = &[
        ("nominal", &[0.97, 0.03]),
        ("left_leak", &[0.1, 0.9]),
        ("right_leak", &[0.97, 0.03]),
        ("he_reg_fail", &[0.1, 0.9]),
    ];
    let tank: &[(&str, &[f64])] = &[
        ("nominal", &[0.95, 0.05]),
        ("left_leak", &[0.2, 0.8]),
        ("right_leak", &[0.95, 0.05]),
        ("he_reg_fail", &[0.7, 0.3]),
    ];
    let trend: &[(&str, &[f64])] = &[
        ("nominal", &[0.95, 0.05]),
        ("left_leak", &[0.25, 0.75]),
        ("right_leak", &[0.95, 0.05]),
        ("he_reg_fail", &[0.8, 0.2]),
    ];
    let mirror = |rows: &[(&str, &[f64])]| -> Vec<(String, Vec<f64>)> {
        rows.iter()
            .map(|(h, p)| {
                let h = match *h {
                    "left_leak" => "right_leak",
                    "right_leak" => "left_leak",
                    other => other,
                };
                (h.to_string(), p.to_vec())
            })
            .collect()
    };
    let mirrored = |id: &str, rows: &[(&str, &[f64])], failure: FailureMode| SensorSpec {
        id: id.to_string(),
        emission: mirror(rows).into_iter().collect(),
        failure,
    };
    let mut burn = Context::new("burn");
    burn.highlight_count = 3;
    let mut coast = Context::new("coast");
    coast.criticality = 2.0;
    coast.highlight_count = 3;
    Scenario {
        name: "oms_left_leak".into(),
        seed: 11,
        model: oms_model(),
        ground_truth: GroundTruth::fault("left_leak", 3),
        sensors: vec![
            healthy("L_HE", he),
            healthy("L_TANK", tank),
            healthy("L_TREND", trend),
            mirrored("R_HE", he, FailureMode::None),
            mirrored(
                "R_TANK",
                tank,
                FailureMode::Stuck {
                    state: "normal".into(),
                    onset: 12,
                },
            ),
            mirrored("R_TREND", trend, FailureMode::None),
        ],
        phases: vec![
            Phase {
                start: 0,
                end: 15,
                context: burn,
            },
            Phase {
                start: 15,
                end: 30,
                context: coast,
            },
        ],
        horizon: 30,
        templates: oms_templates(),
        partition: oms_partition(),
        review: ReviewTimeModel::unit().scaled(0.5),
        default_action: Some("continue".into()),
    }
}

/// The four display policies compared in reports.
pub fn standard_policies() -> Vec<PolicyConfig> {
    vec![
        PolicyConfig::new(PolicyKind::ShowAll),
        PolicyConfig::new(PolicyKind::Minimal),
        PolicyConfig::new(PolicyKind::Managed),
        PolicyConfig::new(PolicyKind::Subset),
    ]
}
