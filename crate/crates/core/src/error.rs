use thiserror::Error;

use crate::bayesnet::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },

    #[error("evidence has zero probability under the model")]
    InconsistentEvidence,

    #[error("joint state space of {size} exceeds the enumeration cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },

    #[error("invalid network:\n{0}")]
    InvalidNetwork(ValidationReport),

    #[error("invalid pruning spec: {0}")]
    InvalidPruneSpec(String),

    #[error("the hypothesis variable `{0}` cannot be removed")]
    CannotRemoveHypothesis(String),

    #[error("unknown action `{0}`")]
    UnknownAction(String),

    #[error("invalid decision model: {0}")]
    InvalidModel(String),

    #[error("revealed and shown evidence overlap on `{0}`")]
    OverlappingEvidence(String),

    #[error("evidence item `{0}` is not part of the full evidence")]
    NotInFullEvidence(String),

    #[error("user model actions do not match the decision model actions")]
    ActionSetMismatch,

    #[error("user model hypothesis states do not match the gold model")]
    HypothesisMismatch,

    #[error("exhaustive search over {0} candidate items exceeds the cap of {1}")]
    SearchTooLarge(usize, usize),

    #[error("invalid template `{subsystem}`: {reason}")]
    InvalidTemplate { subsystem: String, reason: String },

    #[error("invalid evidence partition: {0}")]
    InvalidPartition(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("frame {frame} is outside the horizon {horizon}")]
    FrameOutOfRange { frame: u32, horizon: u32 },

    #[error("session error: {0}")]
    Session(String),

    #[error("failed to parse {what}: {source}")]
    Parse {
        what: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(what: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Parse {
            what: what.into(),
            source,
        }
    }
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownVariable(_) => "unknown_variable",
            Error::UnknownState { .. } => "unknown_state",
            Error::InconsistentEvidence => "inconsistent_evidence",
            Error::StateSpaceTooLarge { .. } => "state_space_too_large",
            Error::InvalidNetwork(_) => "invalid_network",
            Error::InvalidPruneSpec(_) => "invalid_prune_spec",
            Error::CannotRemoveHypothesis(_) => "cannot_remove_hypothesis",
            Error::UnknownAction(_) => "unknown_action",
            Error::InvalidModel(_) => "invalid_model",
            Error::OverlappingEvidence(_) => "overlapping_evidence",
            Error::NotInFullEvidence(_) => "not_in_full_evidence",
            Error::ActionSetMismatch => "action_set_mismatch",
            Error::HypothesisMismatch => "hypothesis_mismatch",
            Error::SearchTooLarge(..) => "search_too_large",
            Error::InvalidTemplate { .. } => "invalid_template",
            Error::InvalidPartition(_) => "invalid_partition",
            Error::InvalidScenario(_) => "invalid_scenario",
            Error::FrameOutOfRange { .. } => "frame_out_of_range",
            Error::Session(_) => "session",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }
}
