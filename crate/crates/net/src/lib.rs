//! A referee and two parties playing the magic-square game over TCP with
//! newline-delimited JSON.
//!
//! The referee draws independent uniform settings each round and sends each
//! party only its own setting; parties answer only the referee. In LHV mode
//! parties answer from fixed tables. In quantum-emulated mode a trusted
//! source has pre-sampled, for every round, one joint record from `P*` for
//! each of the nine setting pairs, and split the records into one tape per
//! party. The referee then also names the setting pair whose record to open
//! (`setting_pair`). That field is the emulation channel: it carries the
//! other party's setting, which is exactly what a classical emulation of
//! shared entanglement needs and what real parties would never see. The
//! harness reproduces the statistics; it says nothing about loopholes.

pub mod conformance;
pub mod party;
pub mod referee;
pub mod source;
pub mod wire;

use std::io;

pub use wire::{Body, Role, WireMessage, PROTOCOL_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error(transparent)]
    Core(#[from] majorana_core::Error),
}

pub type Result<T> = std::result::Result<T, NetError>;

/// How parties answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    QuantumEmulated,
    Lhv,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::QuantumEmulated => "quantum_emulated",
            Mode::Lhv => "lhv",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" | "quantum_emulated" | "quantum-emulated" => Ok(Mode::QuantumEmulated),
            "lhv" => Ok(Mode::Lhv),
            other => Err(NetError::Protocol(format!("unknown mode `{other}`"))),
        }
    }
}
