//! One task per live session. The task owns the [`Session`] and is the only
//! writer; everyone else talks to it through a command channel and watches
//! its output on a broadcast channel.

use std::time::Duration;

use sightline_core::api::Pacing;
use sightline_core::session::{Session, SessionLog, SessionState};
use sightline_core::WireMessage;
use tokio::sync::{broadcast, mpsc, oneshot};

const COMMAND_BUFFER: usize = 64;
const EVENT_BUFFER: usize = 1024;

pub(crate) enum Command {
    Message(WireMessage, oneshot::Sender<WireMessage>),
    State(oneshot::Sender<SessionState>),
    Log(oneshot::Sender<SessionLog>),
}

/// Cheap-to-clone handle to a running session task.
#[derive(Clone)]
pub struct SessionHandle {
    commands: mpsc::Sender<Command>,
    events: broadcast::Sender<WireMessage>,
    hello: WireMessage,
}

impl SessionHandle {
    pub fn spawn(session: Session, hello: WireMessage, pacing: Pacing) -> Self {
        let (commands, rx) = mpsc::channel(COMMAND_BUFFER);
        let (events, _) = broadcast::channel(EVENT_BUFFER);
        tokio::spawn(run(session, rx, events.clone(), pacing));
        SessionHandle { commands, events, hello }
    }

    pub fn hello(&self) -> &WireMessage {
        &self.hello
    }

    /// Every message the session sends from now on.
    pub fn subscribe(&self) -> broadcast::Receiver<WireMessage> {
        self.events.subscribe()
    }

    async fn ask<T>(&self, make: impl FnOnce(oneshot::Sender<T>) -> Command) -> Option<T> {
        let (tx, rx) = oneshot::channel();
        self.commands.send(make(tx)).await.ok()?;
        rx.await.ok()
    }

    /// Sends one inbound message and waits for its reply. `None` once the
    /// session task has stopped.
    pub async fn send(&self, msg: WireMessage) -> Option<WireMessage> {
        self.ask(|tx| Command::Message(msg, tx)).await
    }

    pub async fn state(&self) -> Option<SessionState> {
        self.ask(Command::State).await
    }

    pub async fn log(&self) -> Option<SessionLog> {
        self.ask(Command::Log).await
    }
}

async fn run(
    mut session: Session,
    mut commands: mpsc::Receiver<Command>,
    events: broadcast::Sender<WireMessage>,
    pacing: Pacing,
) {
    let mut ticker = match pacing {
        Pacing::Lockstep => None,
        Pacing::Timer { interval_ms } => {
            let period = Duration::from_millis(interval_ms.max(1));
            let mut t = tokio::time::interval_at(tokio::time::Instant::now() + period, period);
            t.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
            Some(t)
        }
    };
    loop {
        let timed = ticker.is_some() && !session.is_done();
        tokio::select! {
            cmd = commands.recv() => match cmd {
                None => break,
                Some(Command::Message(msg, reply)) => {
                    let out = session.handle(msg);
                    let _ = events.send(out.clone());
                    let _ = reply.send(out);
                }
                Some(Command::State(reply)) => {
                    let _ = reply.send(session.state());
                }
                Some(Command::Log(reply)) => {
                    let _ = reply.send(session.log().clone());
                }
            },
            _ = async { ticker.as_mut().expect("guarded").tick().await }, if timed => {
                let out = session.tick();
                let _ = events.send(out);
            }
        }
    }
    tracing::debug!(session = session.id(), "session task stopped");
}
