//! Decision-theoretic display management.
//!
//! Given a Bayesian diagnostic model, time-dependent utilities and a stream
//! of sensor readings, decide which evidence to show an operator, at what
//! level of detail, and what to highlight, so that the operator's
//! time-critical actions have the highest expected utility.

// `!(x > 0.0)` and friends are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod api;
pub mod bayesnet;
pub mod decision;
pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod policy;
pub mod protocol;
pub mod session;
pub mod simulator;
pub mod user_model;

pub use bayesnet::{Distribution, EvidenceSet, Network, NetworkDef};
pub use decision::{DecisionModel, TimedUtility};
pub use error::{Error, Result};
pub use metrics::{MetricContext, MetricKind, MetricResult, ReviewTimeModel, SearchStrategy};
pub use protocol::WireMessage;
pub use session::Session;
pub use policy::{Context, DisplayState, EvidencePartition, PolicyConfig, PolicyKind, Template};
pub use simulator::{EpisodeResult, Scenario};
pub use user_model::UserResponseModel;
