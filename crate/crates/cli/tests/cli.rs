use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn sightline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sightline")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const OMS_LEFT: &str = "L_HE=low,R_HE=normal,L_TANK=low,R_TANK=normal,L_TREND=down,R_TREND=flat";

#[test]
fn infer_prints_posterior() {
    let o = sightline(&["infer", &fixture("mini.model.json"), r#"{"S1":"high"}"#]);
    assert!(o.status.success());
    // 0.2*0.9 / (0.2*0.9 + 0.8*0.1)
    let expected = 0.18 / 0.26;
    assert!(stdout(&o).contains(&format!("p(leak) = {expected:.6}")), "{}", stdout(&o));
}

#[test]
fn infer_jsonl_matches_enumeration() {
    let m = fixture("mini.model.json");
    let ve = sightline(&["--format", "jsonl", "infer", &m, "S1=high,S2=low"]);
    let en = sightline(&["--format", "jsonl", "infer", &m, "S1=high,S2=low", "--enumerate"]);
    let a: serde_json::Value = serde_json::from_slice(&ve.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&en.stdout).unwrap();
    let pa = a["probabilities"][1].as_f64().unwrap();
    let pb = b["probabilities"][1].as_f64().unwrap();
    assert!((pa - 0.2).abs() < 1e-12 && (pb - 0.2).abs() < 1e-12);
}

#[test]
fn metrics_evri_of_first_sensor() {
    let o = sightline(&[
        "--format",
        "jsonl",
        "metrics",
        "evri",
        &fixture("mini.model.json"),
        "--e",
        "S1",
        "--shown",
        "",
        "--full",
        "S1=high,S2=high",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // Under both readings leak has p = .2*.81/(.2*.81+.8*.01); halt (0.6) replaces continue (1-p).
    let p = 0.2 * 0.81 / (0.2 * 0.81 + 0.8 * 0.01);
    assert!((v["value"].as_f64().unwrap() - (0.6 - (1.0 - p))).abs() < 1e-12);
    assert_eq!(v["subset"], serde_json::json!(["S1"]));
    assert_eq!(v["action_before"], "continue");
    assert_eq!(v["action_after"], "halt");
}

#[test]
fn validate_exit_codes() {
    let ok = sightline(&["validate", &fixture("oms.model.json")]);
    assert!(ok.status.success());
    assert_eq!(stdout(&ok).trim(), "valid");
    let bad = sightline(&["validate", &fixture("broken.model.json")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("RowSum"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(sightline(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(sightline(&["infer"]).status.code(), Some(2));
    assert_eq!(sightline(&["metrics", "evx", "m", "--full", "a=b"]).status.code(), Some(2));
    let m = fixture("mini.model.json");
    let o = sightline(&["metrics", "evri", &m, "--e", "S3", "--full", "S1=high"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_1() {
    let o = sightline(&["infer", &fixture("mini.model.json"), "S1=purple"]);
    assert_eq!(o.status.code(), Some(1));
    let o = sightline(&["infer", "/no/such/model.json", "S1=high"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn plan_commands() {
    let oms = fixture("oms.model.json");
    let scen = fixture("oms.scenario.json");
    let t = sightline(&["plan", "telescope", &oms, "--scenario", &scen, "--full", OMS_LEFT]);
    assert!(t.status.success());
    let text = stdout(&t);
    assert!(text.contains("right_oms\t0"), "{text}");
    assert!(!text.contains("left_oms\t0"), "{text}");

    let h = sightline(&["plan", "highlight", &fixture("mini_weak.model.json"), "--full", "S1=high,S2=high"]);
    assert_eq!(stdout(&h), "S1\t1.000\nS2\t1.000\n");

    let m = sightline(&["plan", "minimal", &fixture("mini.model.json"), "--full", "S1=high,S2=high"]);
    assert_eq!(stdout(&m).trim(), "{S1=high}");

    let s = sightline(&[
        "--format",
        "jsonl",
        "plan",
        "subset",
        &oms,
        "--full",
        OMS_LEFT,
        "--strategy",
        "exhaustive",
    ]);
    assert!(s.status.success());
    let lines: Vec<serde_json::Value> = stdout(&s).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 65, "64 subsets plus the selection");
    for l in &lines[..64] {
        for key in ["subset", "metric", "value", "action_before", "action_after"] {
            assert!(l.get(key).is_some(), "{l}");
        }
    }
    assert!(lines[64].get("selected").is_some());
}

#[test]
fn simulate_logs_and_report_agree() {
    let dir = tempfile::tempdir().unwrap();
    let logs = dir.path().join("logs");
    let sim = sightline(&[
        "--format",
        "jsonl",
        "simulate",
        &fixture("mini_t_leak.scenario.json"),
        "--policy",
        "show-all",
        "--policy",
        "minimal",
        "--reps",
        "4",
        "--logs",
        logs.to_str().unwrap(),
    ]);
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    assert_eq!(std::fs::read_dir(&logs).unwrap().count(), 8);
    let rep = sightline(&["--format", "jsonl", "report", logs.to_str().unwrap()]);
    assert!(rep.status.success());
    let parse = |o: &Output| {
        let mut rows: Vec<serde_json::Value> = stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        rows.sort_by_key(|r| r["policy"].as_str().unwrap().to_string());
        rows
    };
    assert_eq!(parse(&sim), parse(&rep));
}

#[test]
fn scripted_session_replays() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("session.jsonl");
    let scen = fixture("mini.scenario.json");
    let o = sightline(&[
        "--format",
        "jsonl",
        "session",
        &scen,
        "--act",
        "0:continue",
        "--act",
        "2:halt",
        "--log",
        log.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let last: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert_eq!(last["type"], "end");
    assert_eq!(last["n"], 2);
    assert_eq!(last["action"], "halt");

    let r = sightline(&["replay", &scen, log.to_str().unwrap()]);
    assert!(r.status.success());

    let text = std::fs::read_to_string(&log).unwrap();
    let tampered = text.replacen("\"halt\"", "\"continue\"", 1);
    std::fs::write(&log, tampered).unwrap();
    let r = sightline(&["replay", &scen, log.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn remote_matches_local() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    rt.spawn(sightline_server::serve_on(listener, sightline_server::ServerConfig::default()));

    let oms = fixture("oms.model.json");
    let cases: Vec<Vec<String>> = vec![
        vec!["infer".into(), fixture("mini.model.json"), "S1=high".into()],
        vec!["validate".into(), oms.clone()],
        vec![
            "metrics".into(),
            "nevri".into(),
            oms.clone(),
            "--e".into(),
            "L_HE,L_TANK".into(),
            "--full".into(),
            OMS_LEFT.into(),
            "--unit-cost".into(),
        ],
        vec!["plan".into(), "subset".into(), oms.clone(), "--full".into(), OMS_LEFT.into()],
        vec!["simulate".into(), fixture("oms.scenario.json"), "--reps".into(), "2".into()],
        vec!["session".into(), fixture("mini.scenario.json"), "--act".into(), "1:halt".into()],
    ];
    for case in cases {
        let args: Vec<&str> = case.iter().map(String::as_str).collect();
        let local = sightline(&[&["--format", "jsonl"], args.as_slice()].concat());
        let remote = sightline(&[&["--format", "jsonl", "--remote", &url], args.as_slice()].concat());
        assert!(local.status.success(), "{case:?}");
        assert!(remote.status.success(), "{case:?}: {}", String::from_utf8_lossy(&remote.stderr));
        let (l, r) = (stdout(&local), stdout(&remote));
        if case[0] == "session" {
            // Session ids differ; everything after the hello is identical.
            assert_eq!(l.lines().skip(1).collect::<Vec<_>>(), r.lines().skip(1).collect::<Vec<_>>());
        } else {
            assert_eq!(l, r, "{case:?}");
        }
    }
}
