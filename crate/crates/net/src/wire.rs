//! One JSON object per line. Every message carries the protocol version `v`;
//! unknown fields are ignored.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{NetError, Result};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Referee,
    Alice,
    Bob,
}

impl Role {
    pub fn is_party(&self) -> bool {
        !matches!(self, Role::Referee)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Hello {
        role: Role,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<String>,
    },
    RoundSetting {
        round_id: u64,
        setting: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        setting_pair: Option<[u8; 2]>,
    },
    RoundOutcome {
        round_id: u64,
        outcome: [i8; 3],
    },
    Summary {
        summary: serde_json::Value,
    },
    Error {
        message: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        round_id: Option<u64>,
    },
}

impl Body {
    pub fn kind(&self) -> &'static str {
        match self {
            Body::Hello { .. } => "hello",
            Body::RoundSetting { .. } => "round_setting",
            Body::RoundOutcome { .. } => "round_outcome",
            Body::Summary { .. } => "summary",
            Body::Error { .. } => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireMessage {
    pub v: u32,
    #[serde(flatten)]
    pub body: Body,
}

impl WireMessage {
    pub fn new(body: Body) -> Self {
        Self { v: PROTOCOL_VERSION, body }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("wire messages serialize");
        s.push('\n');
        s
    }

    pub fn parse(line: &str) -> Result<Self> {
        let msg: WireMessage = serde_json::from_str(line.trim_end()).map_err(|e| NetError::Malformed(format!("{e}: {}", line.trim_end())))?;
        if msg.v != PROTOCOL_VERSION {
            return Err(NetError::Malformed(format!("protocol version {} (expected {PROTOCOL_VERSION})", msg.v)));
        }
        Ok(msg)
    }
}

pub fn send<W: Write>(w: &mut W, msg: &WireMessage) -> Result<()> {
    w.write_all(msg.to_line().as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Next message, or `None` at end of stream.
pub fn receive<R: BufRead>(r: &mut R) -> Result<Option<WireMessage>> {
    let mut line = String::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        if !line.trim().is_empty() {
            return WireMessage::parse(&line).map(Some);
        }
    }
}
