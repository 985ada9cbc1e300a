//! Alice and Bob: single-threaded loops that answer the referee.

use std::io::{BufReader, BufWriter};
use std::net::{TcpStream, ToSocketAddrs};
use std::thread;
use std::time::{Duration, Instant};

use majorana_core::games::DeterministicStrategy;

use crate::referee::Summary;
use crate::source::Tape;
use crate::wire::{self, Body, Role, WireMessage};
use crate::{Mode, NetError, Result};

#[derive(Clone, Debug)]
pub enum Strategy {
    /// Open this party's half of the pre-sampled record for the named
    /// setting pair.
    Tape(Tape),
    /// Answer from a fixed table.
    Table(DeterministicStrategy),
}

impl Strategy {
    pub fn mode(&self) -> Mode {
        match self {
            Strategy::Tape(_) => Mode::QuantumEmulated,
            Strategy::Table(_) => Mode::Lhv,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PartyConfig {
    pub role: Role,
    pub strategy: Strategy,
    /// How long to keep retrying the initial connection.
    pub connect_timeout: Duration,
}

impl PartyConfig {
    pub fn new(role: Role, strategy: Strategy) -> Self {
        Self {
            role,
            strategy,
            connect_timeout: Duration::from_secs(10),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartyReport {
    pub answered: u64,
    pub refused: u64,
    pub summary: Summary,
}

fn connect<A: ToSocketAddrs>(addr: A, patience: Duration) -> Result<TcpStream> {
    let start = Instant::now();
    loop {
        match TcpStream::connect(&addr) {
            Ok(s) => return Ok(s),
            Err(e) if start.elapsed() >= patience => return Err(e.into()),
            Err(_) => thread::sleep(Duration::from_millis(20)),
        }
    }
}

/// The answer to one setting message, or the reason it is refused.
pub fn answer(role: Role, strategy: &Strategy, round_id: u64, setting: u8, pair: Option<[u8; 2]>) -> std::result::Result<[i8; 3], String> {
    if !(1..=3).contains(&setting) {
        return Err(format!("unknown setting {setting}"));
    }
    match strategy {
        Strategy::Table(t) => Ok(match role {
            Role::Alice => t.alice_answer(setting as usize),
            _ => t.bob_answer(setting as usize),
        }),
        Strategy::Tape(tape) => {
            let [j, k] = pair.ok_or("quantum-emulated round without a setting pair")?;
            let own = if role == Role::Alice { j } else { k };
            if own != setting {
                return Err(format!("setting {setting} disagrees with setting pair [{j}, {k}]"));
            }
            tape.answer(round_id, j, k)
                .ok_or_else(|| format!("no tape entry for round {round_id} pair [{j}, {k}]"))
        }
    }
}

pub fn run_party<A: ToSocketAddrs>(addr: A, config: &PartyConfig) -> Result<PartyReport> {
    if !config.role.is_party() {
        return Err(NetError::Protocol("run_party needs role alice or bob".into()));
    }
    if let Strategy::Tape(t) = &config.strategy {
        if t.role != config.role {
            return Err(NetError::Protocol(format!("{:?} was given a {:?} tape", config.role, t.role)));
        }
    }
    let stream = connect(addr, config.connect_timeout)?;
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mode = config.strategy.mode();
    wire::send(
        &mut writer,
        &WireMessage::new(Body::Hello {
            role: config.role,
            mode: Some(mode.as_str().into()),
        }),
    )?;
    let (mut answered, mut refused) = (0, 0);
    loop {
        let Some(msg) = wire::receive(&mut reader)? else {
            return Err(NetError::Protocol("referee closed the connection before the summary".into()));
        };
        match msg.body {
            Body::Hello {
                role: Role::Referee,
                mode: m,
            } => {
                if let Some(m) = m {
                    if m.parse::<Mode>()? != mode {
                        let message = format!("referee runs {m}, this party runs {}", mode.as_str());
                        wire::send(
                            &mut writer,
                            &WireMessage::new(Body::Error {
                                message: message.clone(),
                                round_id: None,
                            }),
                        )?;
                        return Err(NetError::Protocol(message));
                    }
                }
            }
            Body::RoundSetting {
                round_id,
                setting,
                setting_pair,
            } => {
                let body = match answer(config.role, &config.strategy, round_id, setting, setting_pair) {
                    Ok(outcome) => {
                        answered += 1;
                        Body::RoundOutcome { round_id, outcome }
                    }
                    Err(message) => {
                        refused += 1;
                        Body::Error {
                            message,
                            round_id: Some(round_id),
                        }
                    }
                };
                wire::send(&mut writer, &WireMessage::new(body))?;
            }
            Body::Summary { summary } => {
                let summary = serde_json::from_value(summary).map_err(|e| NetError::Malformed(format!("summary: {e}")))?;
                return Ok(PartyReport { answered, refused, summary });
            }
            Body::Error { message, .. } => return Err(NetError::Protocol(format!("referee reported: {message}"))),
            other => return Err(NetError::Protocol(format!("unexpected {} from the referee", other.kind()))),
        }
    }
}
