//! Runs API calls in-process, or against a server when `--remote` is set.

use sightline_client::Client;
use sightline_core::api::{
    self, CreateSessionRequest, InferRequest, MetricsRequest, Pacing, PlanRequest, PlanResponse, SimulateRequest,
    SimulateResponse, ValidateRequest, ValidateResponse,
};
use sightline_core::session::{Session, SessionLog};
use sightline_core::{Distribution, MetricResult, PolicyConfig, Scenario, WireMessage};
use tokio::runtime::Runtime;

use crate::CliError;

pub enum Backend {
    Local,
    Remote { client: Client, rt: Runtime },
}

impl Backend {
    pub fn new(remote: Option<&str>) -> Result<Self, CliError> {
        Ok(match remote {
            None => Backend::Local,
            Some(url) => Backend::Remote {
                client: Client::new(url),
                rt: runtime()?,
            },
        })
    }

    pub fn validate(&self, req: &ValidateRequest) -> Result<ValidateResponse, CliError> {
        match self {
            Backend::Local => Ok(api::validate(req)?),
            Backend::Remote { client, rt } => Ok(rt.block_on(client.validate(req))?),
        }
    }

    pub fn infer(&self, req: &InferRequest) -> Result<Distribution, CliError> {
        match self {
            Backend::Local => Ok(api::infer(req)?),
            Backend::Remote { client, rt } => Ok(rt.block_on(client.infer(req))?),
        }
    }

    pub fn metrics(&self, req: &MetricsRequest) -> Result<MetricResult, CliError> {
        match self {
            Backend::Local => Ok(api::metrics(req)?),
            Backend::Remote { client, rt } => Ok(rt.block_on(client.metrics(req))?),
        }
    }

    pub fn plan(&self, req: &PlanRequest) -> Result<PlanResponse, CliError> {
        match self {
            Backend::Local => Ok(api::plan(req)?),
            Backend::Remote { client, rt } => Ok(rt.block_on(client.plan(req))?),
        }
    }

    pub fn simulate(&self, req: &SimulateRequest) -> Result<SimulateResponse, CliError> {
        match self {
            Backend::Local => Ok(api::simulate(req)?),
            Backend::Remote { client, rt } => Ok(rt.block_on(client.simulate(req))?),
        }
    }

    pub fn open_session(&self, scenario: Scenario, policy: PolicyConfig) -> Result<SessionDriver<'_>, CliError> {
        match self {
            Backend::Local => {
                let (session, hello) = Session::start("local", scenario, policy)?;
                Ok(SessionDriver::Local {
                    session: Box::new(session),
                    hello,
                })
            }
            Backend::Remote { client, rt } => {
                let created = rt.block_on(client.create_session(&CreateSessionRequest {
                    scenario: Some(scenario),
                    policy: Some(policy),
                    pacing: Some(Pacing::Lockstep),
                }))?;
                Ok(SessionDriver::Remote {
                    client,
                    rt,
                    id: created.session,
                    hello: created.hello,
                })
            }
        }
    }
}

pub fn runtime() -> Result<Runtime, CliError> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|source| CliError::Io {
            path: "tokio runtime".into(),
            source,
        })
}

/// A lockstep session, in-process or on a server.
pub enum SessionDriver<'a> {
    Local {
        session: Box<Session>,
        hello: WireMessage,
    },
    Remote {
        client: &'a Client,
        rt: &'a Runtime,
        id: String,
        hello: WireMessage,
    },
}

impl SessionDriver<'_> {
    pub fn hello(&self) -> &WireMessage {
        match self {
            SessionDriver::Local { hello, .. } | SessionDriver::Remote { hello, .. } => hello,
        }
    }

    pub fn send(&mut self, msg: WireMessage) -> Result<WireMessage, CliError> {
        match self {
            SessionDriver::Local { session, .. } => Ok(session.handle(msg)),
            SessionDriver::Remote { client, rt, id, .. } => Ok(rt.block_on(client.send(id, &msg))?),
        }
    }

    pub fn log(&self) -> Result<SessionLog, CliError> {
        match self {
            SessionDriver::Local { session, .. } => Ok(session.log().clone()),
            SessionDriver::Remote { client, rt, id, .. } => Ok(rt.block_on(client.log(id))?),
        }
    }
}
