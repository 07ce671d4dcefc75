//! Live sessions: an episode driven by console messages instead of a
//! simulated operator. A session is a plain state machine; the server gives
//! each one a single task that owns it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::PolicyConfig;
use crate::protocol::WireMessage;
use crate::simulator::{Episode, FrameRecord, Outcome, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub dir: Direction,
    pub msg: WireMessage,
}

/// Everything needed to replay a session against its scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub session: String,
    pub scenario: String,
    pub policy: PolicyConfig,
    pub entries: Vec<LogEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LogHeader {
    session: String,
    scenario: String,
    policy: PolicyConfig,
}

impl SessionLog {
    pub fn outbound(&self) -> impl Iterator<Item = &WireMessage> {
        self.entries.iter().filter(|e| e.dir == Direction::Out).map(|e| &e.msg)
    }

    pub fn inbound(&self) -> impl Iterator<Item = &WireMessage> {
        self.entries.iter().filter(|e| e.dir == Direction::In).map(|e| &e.msg)
    }

    /// Header line followed by one line per message.
    pub fn to_jsonl(&self) -> String {
        let header = LogHeader {
            session: self.session.clone(),
            scenario: self.scenario.clone(),
            policy: self.policy,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: LogHeader = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| Error::Session("empty session log".into()))?,
        )
        .map_err(|e| Error::parse("session log header", e))?;
        let entries = lines
            .map(|l| serde_json::from_str(l).map_err(|e| Error::parse("session log entry", e)))
            .collect::<Result<Vec<LogEntry>>>()?;
        Ok(SessionLog {
            session: header.session,
            scenario: header.scenario,
            policy: header.policy,
            entries,
        })
    }
}

/// Snapshot of a session for observers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session: String,
    pub scenario: String,
    pub policy: String,
    /// Next frame to be presented.
    pub frame: u32,
    pub horizon: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<FrameRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    episode: Episode,
    log: SessionLog,
}

impl Session {
    /// Creates a session paused before frame 0 and returns its hello.
    pub fn start(id: impl Into<String>, scenario: Scenario, policy: PolicyConfig) -> Result<(Self, WireMessage)> {
        let id = id.into();
        let log = SessionLog {
            session: id.clone(),
            scenario: scenario.name.clone(),
            policy,
            entries: Vec::new(),
        };
        let episode = Episode::new(scenario, policy, None)?;
        let mut session = Session { id, episode, log };
        let hello = session.hello();
        session.record(Direction::Out, hello.clone());
        Ok((session, hello))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn hello(&self) -> WireMessage {
        let s = self.episode.scenario();
        WireMessage::Hello {
            session: self.id.clone(),
            actions: s.model.actions().to_vec(),
            subsystems: s.templates.iter().map(|t| t.subsystem.clone()).collect(),
            templates: s.templates.clone(),
            clusters: s.partition.aux_clusters.clone(),
            phases: s.phases.clone(),
        }
    }

    pub fn is_done(&self) -> bool {
        self.episode.is_done()
    }

    pub fn next_frame(&self) -> u32 {
        self.episode.next_frame()
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn episode(&self) -> &Episode {
        &self.episode
    }

    pub fn state(&self) -> SessionState {
        let s = self.episode.scenario();
        SessionState {
            session: self.id.clone(),
            scenario: s.name.clone(),
            policy: self.episode.policy().to_string(),
            frame: self.episode.next_frame(),
            horizon: s.horizon,
            current: self.episode.current().cloned(),
            outcome: self.episode.outcome().cloned(),
        }
    }

    fn record(&mut self, dir: Direction, msg: WireMessage) {
        self.log.entries.push(LogEntry { dir, msg });
    }

    /// Advances to the next frame, as if the console had sent the tick.
    pub fn tick(&mut self) -> WireMessage {
        self.handle(WireMessage::Frame {
            n: self.episode.next_frame(),
        })
    }

    /// Applies one inbound message and returns the single reply.
    pub fn handle(&mut self, msg: WireMessage) -> WireMessage {
        self.record(Direction::In, msg.clone());
        let reply = self.reply(msg);
        self.record(Direction::Out, reply.clone());
        reply
    }

    fn reply(&mut self, msg: WireMessage) -> WireMessage {
        let current = self.episode.current().map(|r| r.frame);
        if self.episode.is_done() {
            return WireMessage::nack(msg.frame().unwrap_or(0), "session has ended");
        }
        match msg {
            WireMessage::Frame { n } => {
                let expected = self.episode.next_frame();
                if n != expected {
                    return WireMessage::nack(n, format!("expected frame {expected}"));
                }
                if self.episode.at_horizon() {
                    return match self.episode.finish() {
                        Ok(o) => end_message(o),
                        Err(e) => WireMessage::nack(n, e.to_string()),
                    };
                }
                match self.episode.present() {
                    Ok(record) => directive(record),
                    Err(e) => WireMessage::nack(n, e.to_string()),
                }
            }
            WireMessage::Action { n, id } => {
                if current != Some(n) {
                    return WireMessage::nack(n, "stale frame");
                }
                match self.episode.act(&id, n, n as f64) {
                    Ok(Some(o)) => end_message(o),
                    Ok(None) => WireMessage::ack(n),
                    Err(e) => WireMessage::nack(n, e.to_string()),
                }
            }
            other => WireMessage::nack(
                other.frame().or(current).unwrap_or(0),
                format!("unexpected `{}` message", other.kind()),
            ),
        }
    }
}

fn end_message(o: &Outcome) -> WireMessage {
    WireMessage::End {
        n: o.frame,
        action: o.action.clone(),
        delay: o.delay,
        utility: o.utility,
    }
}

/// The directive for a presented frame. Only displayed evidence carries
/// values.
pub fn directive(record: &FrameRecord) -> WireMessage {
    let state = &record.display_state;
    WireMessage::Directive {
        n: record.frame,
        levels: state.levels.clone(),
        aux: state.aux.clone(),
        highlights: state.highlights.clone(),
        faults: state.ranked_faults.clone(),
        actions: state.ranked_actions.clone(),
        values: record
            .displayed
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
    }
}

/// Re-runs a logged session's inbound messages against `scenario` and
/// returns the full log of the replay.
pub fn replay(scenario: Scenario, log: &SessionLog) -> Result<SessionLog> {
    if scenario.name != log.scenario {
        return Err(Error::Session(format!(
            "log was recorded against scenario `{}`, not `{}`",
            log.scenario, scenario.name
        )));
    }
    let (mut session, _) = Session::start(log.session.clone(), scenario, log.policy)?;
    for msg in log.inbound() {
        session.handle(msg.clone());
    }
    Ok(session.log)
}
