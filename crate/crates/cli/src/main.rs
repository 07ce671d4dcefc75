//! `sightline`: batch commands over the display-management engine, a live
//! session server, and a scripted lockstep console.

mod backend;
mod inputs;

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sightline_core::api::{
    InferRequest, MetricsRequest, OperatorSpec, Pacing, PlanRequest, PlanResponse, SimulateRequest, ValidateRequest,
};
use sightline_core::metrics::SubsetEvaluation;
use sightline_core::session::{replay, SessionLog};
use sightline_core::simulator::{EpisodeSummary, PolicyReport};
use sightline_core::{EvidenceSet, MetricKind, PolicyConfig, PolicyKind, SearchStrategy, WireMessage};

use backend::Backend;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sightline_core::Error),
    #[error(transparent)]
    Remote(#[from] sightline_client::ClientError),
    #[error("failed to read `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("failed to parse {what}: {source}")]
    Json { what: String, source: serde_json::Error },
    /// The command ran but its answer is a failure (invalid model, replay
    /// mismatch).
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Jsonl,
}

#[derive(Debug, Parser)]
#[command(name = "sightline", version, about = "Decision-theoretic display management")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Run against a sightline server instead of in-process.
    #[arg(long, global = true, value_name = "URL")]
    remote: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a network or decision model for structural problems.
    Validate { model: PathBuf },
    /// Posterior of one variable given evidence.
    Infer {
        model: PathBuf,
        /// JSON object, JSON file, or VAR=state,...
        #[arg(default_value = "")]
        evidence: String,
        /// Defaults to the hypothesis variable.
        #[arg(long)]
        query: Option<String>,
        /// Use full joint enumeration.
        #[arg(long)]
        enumerate: bool,
    },
    /// Value of revealing evidence.
    Metrics {
        #[arg(value_parser = parse_metric)]
        kind: MetricKind,
        model: PathBuf,
        /// Evidence to reveal; bare names take their state from --full.
        #[arg(long = "e", visible_alias = "reveal", default_value = "")]
        reveal: String,
        #[arg(long, default_value = "")]
        shown: String,
        #[arg(long)]
        full: String,
        #[command(flatten)]
        cost: CostArgs,
        /// Operator for EVDI: gold, softmax:T, or a user-model file.
        #[arg(long, default_value = "gold")]
        user: String,
    },
    /// Display planning primitives.
    Plan {
        #[command(subcommand)]
        plan: PlanCommand,
    },
    /// Run simulated episodes and report per-policy outcomes.
    Simulate {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[command(flatten)]
        policies: PolicyArgs,
        /// gold, softmax:T, or a user-model file.
        #[arg(long, default_value = "gold")]
        operator: String,
        /// Reaction time added to the review delay.
        #[arg(long, default_value_t = 0.0)]
        latency: f64,
        #[arg(long, default_value_t = 1)]
        reps: u32,
        /// Write one JSONL log per episode into this directory.
        #[arg(long, value_name = "DIR")]
        logs: Option<PathBuf>,
    },
    /// Serve the HTTP/WebSocket API.
    Serve {
        /// Default scenario for sessions that do not bring one.
        scenario: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "managed", value_parser = parse_policy_kind)]
        policy: PolicyKind,
        #[arg(long, default_value = "evri", value_parser = parse_metric)]
        metric: MetricKind,
        #[arg(long, default_value = "greedy", value_parser = parse_strategy)]
        strategy: SearchStrategy,
        /// lockstep or timer:MS.
        #[arg(long, default_value = "timer:1000", value_parser = inputs::pacing)]
        pacing: Pacing,
    },
    /// Aggregate episode logs written by `simulate --logs`.
    Report {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
    /// Drive a lockstep session with scripted actions.
    Session {
        scenario: PathBuf,
        #[arg(long, default_value = "managed", value_parser = parse_policy_kind)]
        policy: PolicyKind,
        #[arg(long, default_value = "evri", value_parser = parse_metric)]
        metric: MetricKind,
        #[arg(long, default_value = "greedy", value_parser = parse_strategy)]
        strategy: SearchStrategy,
        /// FRAME:ACTION, repeatable.
        #[arg(long = "act", value_parser = inputs::scripted_action)]
        actions: Vec<(u32, String)>,
        /// Save the session log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Re-run a logged session and check the output is identical.
    Replay { scenario: PathBuf, log: PathBuf },
}

#[derive(Debug, Args)]
struct CostArgs {
    /// Review-time model file.
    #[arg(long)]
    review: Option<PathBuf>,
    /// Every item costs one time unit to review.
    #[arg(long)]
    unit_cost: bool,
}

#[derive(Debug, Args)]
struct PlanMetricArgs {
    #[arg(long, default_value = "evri", value_parser = parse_metric)]
    metric: MetricKind,
    #[command(flatten)]
    cost: CostArgs,
    #[arg(long, default_value = "gold")]
    user: String,
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// Repeatable; defaults to all of show-all, minimal, managed, subset.
    #[arg(long = "policy", value_parser = parse_policy_kind)]
    kinds: Vec<PolicyKind>,
    #[arg(long, default_value = "evri", value_parser = parse_metric)]
    metric: MetricKind,
    #[arg(long, default_value = "greedy", value_parser = parse_strategy)]
    strategy: SearchStrategy,
}

#[derive(Debug, Subcommand)]
enum PlanCommand {
    /// Best evidence subset to reveal.
    Subset {
        model: PathBuf,
        #[arg(long)]
        full: String,
        #[arg(long, default_value = "")]
        shown: String,
        #[arg(long, default_value = "greedy", value_parser = parse_strategy)]
        strategy: SearchStrategy,
        #[command(flatten)]
        metric: PlanMetricArgs,
    },
    /// Detail level per subsystem template.
    Telescope {
        model: PathBuf,
        #[arg(long)]
        full: String,
        /// Templates, context and review costs come from this scenario.
        #[arg(long)]
        scenario: PathBuf,
        /// Frame whose phase context applies.
        #[arg(long, default_value_t = 0)]
        frame: u32,
        #[command(flatten)]
        metric: PlanMetricArgs,
    },
    /// Which auxiliary clusters to show.
    Aux {
        model: PathBuf,
        #[arg(long)]
        full: String,
        /// Partition and review costs come from this scenario.
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        metric: PlanMetricArgs,
    },
    /// Smallest evidence set that yields the gold action.
    Minimal {
        model: PathBuf,
        #[arg(long)]
        full: String,
    },
    /// Which displayed items to emphasize.
    Highlight {
        model: PathBuf,
        #[arg(long)]
        full: String,
        /// Defaults to the full evidence.
        #[arg(long)]
        displayed: Option<String>,
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse()
}

fn parse_strategy(s: &str) -> Result<SearchStrategy, String> {
    s.parse()
}

fn parse_policy_kind(s: &str) -> Result<PolicyKind, String> {
    s.parse()
}

struct Out {
    format: Format,
    stdout: std::io::StdoutLock<'static>,
}

impl Out {
    fn text(&mut self, line: impl std::fmt::Display) {
        let _ = writeln!(self.stdout, "{line}");
    }

    fn json(&mut self, value: &impl Serialize) {
        let line = serde_json::to_string(value).expect("outputs serialize");
        let _ = writeln!(self.stdout, "{line}");
    }

    fn jsonl(&self) -> bool {
        self.format == Format::Jsonl
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut out = Out {
        format: cli.format,
        stdout: std::io::stdout().lock(),
    };
    match run(cli.command, cli.remote.as_deref(), &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.stdout.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command, remote: Option<&str>, out: &mut Out) -> Result<(), CliError> {
    if let Command::Serve {
        scenario,
        host,
        port,
        policy,
        metric,
        strategy,
        pacing,
    } = command
    {
        return serve(scenario.as_deref(), SocketAddr::new(host, port), policy_config(policy, metric, strategy), pacing);
    }
    let backend = Backend::new(remote)?;
    match command {
        Command::Validate { model } => validate(&backend, &model, out),
        Command::Infer {
            model,
            evidence,
            query,
            enumerate,
        } => {
            let req = InferRequest {
                model: inputs::network(&model)?,
                evidence: inputs::evidence(&evidence, None)?,
                query,
                enumerate,
            };
            let dist = backend.infer(&req)?;
            if out.jsonl() {
                out.json(&dist);
            } else {
                for (state, p) in dist.iter() {
                    out.text(format!("p({state}) = {p:.6}"));
                }
            }
            Ok(())
        }
        Command::Metrics {
            kind,
            model,
            reveal,
            shown,
            full,
            cost,
            user,
        } => {
            let full = inputs::evidence(&full, None)?;
            let req = MetricsRequest {
                model: inputs::model(&model)?,
                kind,
                reveal: inputs::evidence(&reveal, Some(&full))?,
                shown: inputs::evidence(&shown, Some(&full))?,
                full,
                review: inputs::review(cost.review.as_ref(), cost.unit_cost)?,
                user: inputs::user(&user)?,
            };
            let r = backend.metrics(&req)?;
            if out.jsonl() {
                out.json(&SubsetEvaluation {
                    subset: req.reveal.vars().map(str::to_string).collect(),
                    metric: kind,
                    value: r.value,
                    action_before: r.action_before,
                    action_after: r.action_after,
                });
            } else {
                out.text(format!(
                    "{kind} = {:.6} ({} -> {})",
                    r.value, r.action_before, r.action_after
                ));
            }
            Ok(())
        }
        Command::Plan { plan } => run_plan(&backend, plan, out),
        Command::Simulate {
            scenarios,
            policies,
            operator,
            latency,
            reps,
            logs,
        } => {
            let scenarios = scenarios
                .iter()
                .map(|p| inputs::scenario(p))
                .collect::<Result<Vec<_>, _>>()?;
            let kinds = if policies.kinds.is_empty() {
                vec![PolicyKind::ShowAll, PolicyKind::Minimal, PolicyKind::Managed, PolicyKind::Subset]
            } else {
                policies.kinds
            };
            let req = SimulateRequest {
                scenarios,
                policies: kinds
                    .into_iter()
                    .map(|k| policy_config(k, policies.metric, policies.strategy))
                    .collect(),
                operator: OperatorSpec {
                    user: inputs::user(&operator)?,
                    latency,
                },
                replications: reps,
                logs: logs.is_some(),
            };
            let resp = backend.simulate(&req)?;
            if let Some(dir) = logs {
                std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                    path: dir.display().to_string(),
                    source,
                })?;
                for r in &resp.logs {
                    let name = format!("{}-{}-{}.jsonl", r.scenario, r.policy.replace('/', "_"), r.seed);
                    let path = dir.join(name);
                    std::fs::write(&path, r.to_log()).map_err(|source| CliError::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                }
            }
            print_report(&resp.report, out);
            Ok(())
        }
        Command::Report { logs } => {
            let mut files = Vec::new();
            for p in &logs {
                collect_logs(p, &mut files)?;
            }
            if files.is_empty() {
                return Err(CliError::Usage("no episode logs found".into()));
            }
            let summaries = files
                .iter()
                .map(|f| Ok(EpisodeSummary::from_log(&inputs::read(f)?)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            print_report(&PolicyReport::from_summaries(&summaries), out);
            Ok(())
        }
        Command::Session {
            scenario,
            policy,
            metric,
            strategy,
            actions,
            log,
        } => drive_session(
            &backend,
            &scenario,
            policy_config(policy, metric, strategy),
            &actions,
            log.as_deref(),
            out,
        ),
        Command::Replay { scenario, log } => {
            let scenario = inputs::scenario(&scenario)?;
            let recorded = SessionLog::from_jsonl(&inputs::read(&log)?)?;
            let replayed = replay(scenario, &recorded)?;
            let (a, b) = (recorded.to_jsonl(), replayed.to_jsonl());
            if a == b {
                if out.jsonl() {
                    out.json(&serde_json::json!({ "identical": true, "messages": recorded.entries.len() }));
                } else {
                    out.text(format!("identical: {} messages", recorded.entries.len()));
                }
                return Ok(());
            }
            let line = a.lines().zip(b.lines()).position(|(x, y)| x != y).unwrap_or(a.lines().count().min(b.lines().count()));
            Err(CliError::Failed(format!("replay diverges at log line {}", line + 1)))
        }
        Command::Serve { .. } => unreachable!("handled above"),
    }
}

fn policy_config(kind: PolicyKind, metric: MetricKind, strategy: SearchStrategy) -> PolicyConfig {
    PolicyConfig { kind, metric, strategy }
}

fn validate(backend: &Backend, model: &Path, out: &mut Out) -> Result<(), CliError> {
    let req = ValidateRequest {
        model: inputs::read_json(model, "model")?,
    };
    let resp = backend.validate(&req)?;
    if out.jsonl() {
        out.json(&resp);
    } else if resp.valid {
        out.text("valid");
    } else {
        out.text("invalid");
        if !resp.violations.is_empty() {
            out.text(&resp.violations);
        }
        for e in &resp.model_errors {
            out.text(format!("  {e}"));
        }
    }
    if resp.valid {
        Ok(())
    } else {
        Err(CliError::Failed(format!("`{}` is not a valid model", model.display())))
    }
}

fn run_plan(backend: &Backend, plan: PlanCommand, out: &mut Out) -> Result<(), CliError> {
    let req = match plan {
        PlanCommand::Subset {
            model,
            full,
            shown,
            strategy,
            metric,
        } => {
            let full = inputs::evidence(&full, None)?;
            PlanRequest::Subset {
                model: inputs::model(&model)?,
                shown: inputs::evidence(&shown, Some(&full))?,
                full,
                metric: metric.metric,
                strategy,
                review: inputs::review(metric.cost.review.as_ref(), metric.cost.unit_cost)?,
                user: inputs::user(&metric.user)?,
            }
        }
        PlanCommand::Telescope {
            model,
            full,
            scenario,
            frame,
            metric,
        } => {
            let s = inputs::scenario(&scenario)?;
            let review = match (&metric.cost.review, metric.cost.unit_cost) {
                (None, false) => s.review.clone(),
                (r, u) => inputs::review(r.as_ref(), u)?,
            };
            PlanRequest::Telescope {
                model: inputs::model(&model)?,
                templates: s.templates.clone(),
                full: inputs::evidence(&full, None)?,
                metric: metric.metric,
                context: s.context_at(frame).clone(),
                review,
                user: inputs::user(&metric.user)?,
            }
        }
        PlanCommand::Aux {
            model,
            full,
            scenario,
            metric,
        } => {
            let s = inputs::scenario(&scenario)?;
            let review = match (&metric.cost.review, metric.cost.unit_cost) {
                (None, false) => s.review.clone(),
                (r, u) => inputs::review(r.as_ref(), u)?,
            };
            PlanRequest::Aux {
                model: inputs::model(&model)?,
                partition: s.partition.clone(),
                full: inputs::evidence(&full, None)?,
                metric: metric.metric,
                review,
                user: inputs::user(&metric.user)?,
            }
        }
        PlanCommand::Minimal { model, full } => PlanRequest::Minimal {
            model: inputs::model(&model)?,
            full: inputs::evidence(&full, None)?,
        },
        PlanCommand::Highlight {
            model,
            full,
            displayed,
            n,
        } => {
            let full = inputs::evidence(&full, None)?;
            let displayed = match displayed {
                Some(d) => inputs::evidence(&d, Some(&full))?,
                None => full.clone(),
            };
            PlanRequest::Highlight {
                model: inputs::model(&model)?,
                displayed,
                full,
                n,
            }
        }
    };
    let resp = backend.plan(&req)?;
    match (&resp, out.jsonl()) {
        (PlanResponse::Subset { evaluated, subset, result }, true) => {
            for e in evaluated {
                out.json(e);
            }
            out.json(&serde_json::json!({ "selected": subset.vars().collect::<Vec<_>>(), "result": result }));
        }
        (_, true) => out.json(&resp),
        (PlanResponse::Subset { subset, result, evaluated }, false) => {
            out.text(format!(
                "reveal {subset}: {:.6} ({} -> {}), {} subsets evaluated",
                result.value,
                result.action_before,
                result.action_after,
                evaluated.len()
            ));
        }
        (PlanResponse::Telescope { levels }, false) => {
            for (subsystem, level) in levels {
                out.text(format!("{subsystem}\t{level}"));
            }
        }
        (PlanResponse::Aux { clusters }, false) => {
            if clusters.is_empty() {
                out.text("(none)");
            }
            for c in clusters {
                out.text(c);
            }
        }
        (PlanResponse::Minimal { evidence }, false) => out.text(evidence),
        (PlanResponse::Highlight { highlights }, false) => {
            if highlights.is_empty() {
                out.text("(none)");
            }
            for h in highlights {
                out.text(format!("{}\t{:.3}", h.id, h.intensity));
            }
        }
    }
    Ok(())
}

fn print_report(report: &PolicyReport, out: &mut Out) {
    if out.jsonl() {
        for row in &report.rows {
            out.json(row);
        }
        return;
    }
    out.text(format!(
        "{:<20} {:<26} {:>8} {:>12} {:>10} {:>10}",
        "scenario", "policy", "episodes", "utility", "delay", "match"
    ));
    for r in &report.rows {
        out.text(format!(
            "{:<20} {:<26} {:>8} {:>12.4} {:>10.3} {:>10.3}",
            r.scenario, r.policy, r.episodes, r.mean_utility, r.mean_delay, r.match_rate
        ));
    }
}

fn collect_logs(path: &Path, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    if !path.is_dir() {
        files.push(path.to_path_buf());
        return Ok(());
    }
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    entries.sort();
    files.extend(entries.into_iter().filter(|p| p.extension().is_some_and(|x| x == "jsonl")));
    Ok(())
}

fn describe(msg: &WireMessage) -> String {
    match msg {
        WireMessage::Hello {
            session,
            actions,
            subsystems,
            ..
        } => format!(
            "session {session}: actions [{}], subsystems [{}]",
            actions.iter().map(|a| a.id.as_str()).collect::<Vec<_>>().join(", "),
            subsystems.join(", ")
        ),
        WireMessage::Directive {
            n,
            levels,
            aux,
            highlights,
            faults,
            actions,
            values,
        } => {
            let shown: EvidenceSet = values.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
            let levels: Vec<String> = levels.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let top_fault = faults.first().map(|f| format!("{} {:.3}", f.state, f.p)).unwrap_or_default();
            let top_action = actions.first().map(|a| a.id.as_str()).unwrap_or("");
            let hl: Vec<&str> = highlights.iter().map(|h| h.id.as_str()).collect();
            format!(
                "frame {n}: shown {shown} levels [{}] aux [{}] highlight [{}] fault {top_fault} advise {top_action}",
                levels.join(", "),
                aux.join(", "),
                hl.join(", ")
            )
        }
        WireMessage::Ack { n, ok: true, .. } => format!("frame {n}: ack"),
        WireMessage::Ack { n, err, .. } => format!("frame {n}: rejected: {}", err.as_deref().unwrap_or("")),
        WireMessage::End {
            n,
            action,
            delay,
            utility,
        } => format!("end at frame {n}: {action}, delay {delay}, utility {utility:.4}"),
        other => other.to_line(),
    }
}

fn drive_session(
    backend: &Backend,
    scenario: &Path,
    policy: PolicyConfig,
    actions: &[(u32, String)],
    log: Option<&Path>,
    out: &mut Out,
) -> Result<(), CliError> {
    let scenario = inputs::scenario(scenario)?;
    let mut driver = backend.open_session(scenario, policy)?;
    let emit = |out: &mut Out, msg: &WireMessage| {
        if out.jsonl() {
            out.text(msg.to_line());
        } else {
            out.text(describe(msg));
        }
    };
    emit(out, driver.hello());
    let mut n = 0;
    let result = loop {
        let reply = driver.send(WireMessage::Frame { n })?;
        emit(out, &reply);
        match reply {
            WireMessage::End { .. } => break Ok(()),
            WireMessage::Ack { ok: false, err, .. } => {
                break Err(CliError::Failed(err.unwrap_or_else(|| "frame rejected".into())))
            }
            _ => {}
        }
        let mut ended = false;
        for (_, id) in actions.iter().filter(|(f, _)| *f == n) {
            let reply = driver.send(WireMessage::Action { n, id: id.clone() })?;
            emit(out, &reply);
            ended |= matches!(reply, WireMessage::End { .. });
            if ended {
                break;
            }
        }
        if ended {
            break Ok(());
        }
        n += 1;
    };
    if let Some(path) = log {
        std::fs::write(path, driver.log()?.to_jsonl()).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    result
}

fn serve(scenario: Option<&Path>, addr: SocketAddr, policy: PolicyConfig, pacing: Pacing) -> Result<(), CliError> {
    use tracing_subscriber::EnvFilter;
    let _ = tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .try_init();
    let config = sightline_server::ServerConfig {
        scenario: scenario.map(inputs::scenario).transpose()?,
        policy,
        pacing,
    };
    let rt = backend::runtime()?;
    rt.block_on(sightline_server::serve(addr, config))
        .map_err(|source| CliError::Io {
            path: addr.to_string(),
            source,
        })
}
