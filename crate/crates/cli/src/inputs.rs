//! Reading models, evidence and operator descriptions from the command line.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use sightline_core::api::{Pacing, UserKind, UserSpec};
use sightline_core::bayesnet::NetworkFile;
use sightline_core::user_model::UserModelFile;
use sightline_core::{DecisionModel, EvidenceSet, Network, ReviewTimeModel, Scenario};

use crate::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Json {
        what: format!("{what} `{}`", path.display()),
        source: e,
    })
}

pub fn model(path: &Path) -> Result<DecisionModel, CliError> {
    Ok(DecisionModel::load(path)?)
}

/// A network file, or the network inside a decision-model file.
pub fn network(path: &Path) -> Result<Network, CliError> {
    let file: NetworkFile = read_json(path, "network")?;
    Ok(file.into_network()?)
}

pub fn scenario(path: &Path) -> Result<Scenario, CliError> {
    Ok(Scenario::load(path)?)
}

/// Evidence as a JSON object, a JSON file, or `VAR=state,...`. Bare `VAR`
/// items take their state from `full`; without it they are usage errors.
pub fn evidence(text: &str, full: Option<&EvidenceSet>) -> Result<EvidenceSet, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(EvidenceSet::new());
    }
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| CliError::Json {
            what: "evidence".into(),
            source: e,
        });
    }
    if text.ends_with(".json") && Path::new(text).is_file() {
        return read_json(Path::new(text), "evidence");
    }
    let mut out = EvidenceSet::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('=') {
            Some((var, state)) => {
                out.insert(var.trim(), state.trim());
            }
            None => {
                let state = full.and_then(|f| f.get(item)).ok_or_else(|| {
                    CliError::Usage(format!("evidence item `{item}` needs a state (VAR=state) or a matching --full entry"))
                })?;
                out.insert(item, state);
            }
        }
    }
    Ok(out)
}

pub fn review(file: Option<&PathBuf>, unit_cost: bool) -> Result<ReviewTimeModel, CliError> {
    match (file, unit_cost) {
        (Some(_), true) => Err(CliError::Usage("--review and --unit-cost are exclusive".into())),
        (Some(path), false) => read_json(path, "review-time model"),
        (None, true) => Ok(ReviewTimeModel::unit()),
        (None, false) => Ok(ReviewTimeModel::zero()),
    }
}

/// `gold`, `softmax:TEMPERATURE`, or a user-model file.
pub fn user(text: &str) -> Result<UserSpec, CliError> {
    if text == "gold" {
        return Ok(UserSpec::Builtin(UserKind::Gold));
    }
    if let Some(t) = text.strip_prefix("softmax:") {
        let temperature: f64 = t
            .parse()
            .map_err(|_| CliError::Usage(format!("bad softmax temperature `{t}`")))?;
        return Ok(UserSpec::Builtin(UserKind::Softmax { temperature }));
    }
    let path = Path::new(text);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "operator `{text}` is not gold, softmax:T, or an existing user-model file"
        )));
    }
    Ok(UserSpec::File(Box::new(UserModelFile::load(path)?)))
}

/// `lockstep` or `timer:MILLISECONDS`.
pub fn pacing(text: &str) -> Result<Pacing, String> {
    if text == "lockstep" {
        return Ok(Pacing::Lockstep);
    }
    let ms = text
        .strip_prefix("timer:")
        .ok_or_else(|| format!("unknown pacing `{text}` (expected lockstep or timer:MS)"))?;
    let interval_ms: u64 = ms.parse().map_err(|_| format!("bad timer interval `{ms}`"))?;
    if interval_ms == 0 {
        return Err("timer interval must be positive".into());
    }
    Ok(Pacing::Timer { interval_ms })
}

/// `FRAME:ACTION`, e.g. `3:halt`.
pub fn scripted_action(text: &str) -> Result<(u32, String), String> {
    let (n, id) = text
        .split_once(':')
        .ok_or_else(|| format!("expected FRAME:ACTION, got `{text}`"))?;
    let n: u32 = n.parse().map_err(|_| format!("bad frame `{n}`"))?;
    Ok((n, id.to_string()))
}
