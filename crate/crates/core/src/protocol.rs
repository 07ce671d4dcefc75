//! Messages exchanged with an operator console, one JSON object per line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decision::ActionDef;
use crate::error::{Error, Result};
use crate::policy::{Highlight, RankedAction, RankedFault, Template};
use crate::simulator::Phase;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    /// Fixed layout for the session, sent once before any frame.
    Hello {
        session: String,
        actions: Vec<ActionDef>,
        subsystems: Vec<String>,
        templates: Vec<Template>,
        clusters: BTreeMap<String, Vec<String>>,
        phases: Vec<Phase>,
    },
    /// Request to advance to frame `n`.
    Frame { n: u32 },
    /// Hypothesis ranking for frame `n` without display decisions.
    Inference { n: u32, faults: Vec<RankedFault> },
    Directive {
        n: u32,
        levels: BTreeMap<String, usize>,
        aux: Vec<String>,
        highlights: Vec<Highlight>,
        faults: Vec<RankedFault>,
        actions: Vec<RankedAction>,
        values: BTreeMap<String, String>,
    },
    /// Operator action responding to the directive for frame `n`.
    Action { n: u32, id: String },
    Ack {
        n: u32,
        ok: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        err: Option<String>,
    },
    End {
        n: u32,
        action: String,
        delay: f64,
        utility: f64,
    },
}

impl WireMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            WireMessage::Hello { .. } => "hello",
            WireMessage::Frame { .. } => "frame",
            WireMessage::Inference { .. } => "inference",
            WireMessage::Directive { .. } => "directive",
            WireMessage::Action { .. } => "action",
            WireMessage::Ack { .. } => "ack",
            WireMessage::End { .. } => "end",
        }
    }

    /// Frame index carried by the message, if any.
    pub fn frame(&self) -> Option<u32> {
        match self {
            WireMessage::Hello { .. } => None,
            WireMessage::Frame { n }
            | WireMessage::Inference { n, .. }
            | WireMessage::Directive { n, .. }
            | WireMessage::Action { n, .. }
            | WireMessage::Ack { n, .. }
            | WireMessage::End { n, .. } => Some(*n),
        }
    }

    pub fn ack(n: u32) -> Self {
        WireMessage::Ack { n, ok: true, err: None }
    }

    pub fn nack(n: u32, err: impl Into<String>) -> Self {
        WireMessage::Ack {
            n,
            ok: false,
            err: Some(err.into()),
        }
    }

    /// Single-line JSON encoding, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("wire messages serialize")
    }

    pub fn from_line(line: &str) -> Result<Self> {
        serde_json::from_str(line.trim()).map_err(|e| Error::parse("wire message", e))
    }
}

/// Splits newline-delimited JSON into messages, skipping blank lines.
pub fn parse_lines(text: &str) -> Result<Vec<WireMessage>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(WireMessage::from_line)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_names_on_the_wire() {
        let m = WireMessage::Action { n: 7, id: "halt".into() };
        assert_eq!(m.to_line(), r#"{"type":"action","n":7,"id":"halt"}"#);
        assert_eq!(WireMessage::ack(3).to_line(), r#"{"type":"ack","n":3,"ok":true}"#);
        assert_eq!(
            WireMessage::nack(3, "stale").to_line(),
            r#"{"type":"ack","n":3,"ok":false,"err":"stale"}"#
        );
        assert_eq!(WireMessage::Frame { n: 0 }.to_line(), r#"{"type":"frame","n":0}"#);
        let end = WireMessage::End {
            n: 3,
            action: "halt".into(),
            delay: 3.0,
            utility: 0.42,
        };
        assert_eq!(end.to_line(), r#"{"type":"end","n":3,"action":"halt","delay":3.0,"utility":0.42}"#);
    }

    #[test]
    fn directive_layout() {
        let d = WireMessage::Directive {
            n: 1,
            levels: [("left".to_string(), 1)].into_iter().collect(),
            aux: vec![],
            highlights: vec![Highlight {
                id: "S1".into(),
                intensity: 1.0,
            }],
            faults: vec![RankedFault {
                state: "leak".into(),
                p: 0.5,
            }],
            actions: vec![RankedAction {
                id: "halt".into(),
                eu: 0.6,
            }],
            values: [("S1".to_string(), "high".to_string())].into_iter().collect(),
        };
        assert_eq!(
            d.to_line(),
            r#"{"type":"directive","n":1,"levels":{"left":1},"aux":[],"highlights":[{"id":"S1","intensity":1.0}],"faults":[{"state":"leak","p":0.5}],"actions":[{"id":"halt","eu":0.6}],"values":{"S1":"high"}}"#
        );
        assert_eq!(WireMessage::from_line(&d.to_line()).unwrap(), d);
    }

    #[test]
    fn malformed_lines_are_errors() {
        assert!(WireMessage::from_line(r#"{"type":"warp","n":1}"#).is_err());
        assert!(WireMessage::from_line(r#"{"type":"action","n":1}"#).is_err());
        assert_eq!(parse_lines("\n{\"type\":\"frame\",\"n\":2}\n\n").unwrap().len(), 1);
    }
}
