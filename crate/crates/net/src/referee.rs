//! The referee: draws settings, collects outcomes, scores rounds.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use majorana_core::games::magic_square::round_score;
use majorana_core::games::noise::score_summary;
use majorana_core::program::stream_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::wire::{self, Body, Role, WireMessage};
use crate::{Mode, NetError, Result};

/// Settings are drawn from streams `REFEREE_STREAM_BASE + round`, so a
/// referee and a source run with the same seed stay independent.
pub const REFEREE_STREAM_BASE: u64 = 1 << 40;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Clone, Debug)]
pub struct RefereeConfig {
    pub rounds: u64,
    pub mode: Mode,
    pub seed: u64,
    pub timeout: Duration,
    /// Append every message of the session to this file as JSON lines.
    pub capture: Option<PathBuf>,
}

impl RefereeConfig {
    pub fn new(rounds: u64, mode: Mode, seed: u64) -> Self {
        Self {
            rounds,
            mode,
            seed,
            timeout: DEFAULT_TIMEOUT,
            capture: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingTally {
    pub j: u8,
    pub k: u8,
    pub rounds: u64,
    pub wins: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: Mode,
    pub seed: u64,
    pub rounds: u64,
    pub completed: u64,
    pub aborted: u64,
    pub wins: u64,
    /// `None` when no round completed.
    pub g_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub ci95: Option<[f64; 2]>,
    pub per_setting: Vec<SettingTally>,
    /// First few aborted round ids, for the log.
    pub aborted_rounds: Vec<u64>,
}

/// One message as seen by the referee, raw line included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapturedMessage {
    pub from: Role,
    pub to: Role,
    pub line: String,
}

enum Event {
    Line(Role, String),
    Closed(Role),
    Failed(Role, String),
}

struct Capture(Option<BufWriter<File>>);

impl Capture {
    fn record(&mut self, from: Role, to: Role, line: &str) -> Result<()> {
        if let Some(w) = &mut self.0 {
            let m = CapturedMessage {
                from,
                to,
                line: line.trim_end().to_string(),
            };
            serde_json::to_writer(&mut *w, &m).map_err(|e| NetError::Io(e.into()))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

struct Peer {
    role: Role,
    stream: TcpStream,
}

impl Peer {
    fn send(&mut self, msg: &WireMessage, capture: &mut Capture) -> Result<()> {
        let line = msg.to_line();
        capture.record(Role::Referee, self.role, &line)?;
        self.stream.write_all(line.as_bytes())?;
        Ok(())
    }
}

fn spawn_reader(role: Role, stream: TcpStream, tx: Sender<Event>) -> JoinHandle<()> {
    thread::spawn(move || {
        use std::io::BufRead;
        let mut r = BufReader::new(stream);
        let mut line = String::new();
        loop {
            line.clear();
            let ev = match r.read_line(&mut line) {
                Ok(0) => Event::Closed(role),
                Ok(_) => Event::Line(role, line.clone()),
                Err(e) => Event::Failed(role, e.to_string()),
            };
            let stop = !matches!(ev, Event::Line(..));
            if tx.send(ev).is_err() || stop {
                return;
            }
        }
    })
}

/// Waits for a hello on a freshly accepted connection.
fn handshake(stream: &TcpStream, timeout: Duration, capture: &mut Capture) -> Result<Role> {
    stream.set_read_timeout(Some(timeout))?;
    let mut r = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    use std::io::BufRead;
    if r.read_line(&mut line)? == 0 {
        return Err(NetError::Protocol("connection closed before hello".into()));
    }
    let msg = WireMessage::parse(&line)?;
    let role = match msg.body {
        Body::Hello { role, .. } if role.is_party() => role,
        other => return Err(NetError::Protocol(format!("expected a party hello, got {}", other.kind()))),
    };
    capture.record(role, Role::Referee, &line)?;
    stream.set_read_timeout(None)?;
    Ok(role)
}

/// Accepts Alice and Bob on `listener` and plays `config.rounds` rounds.
pub fn run_referee(listener: &TcpListener, config: &RefereeConfig) -> Result<Summary> {
    if config.rounds == 0 {
        return Err(NetError::Protocol("a session needs at least one round".into()));
    }
    let mut capture = Capture(match &config.capture {
        Some(p) => Some(BufWriter::new(File::create(p)?)),
        None => None,
    });
    let mut alice = None;
    let mut bob = None;
    while alice.is_none() || bob.is_none() {
        let (stream, _) = listener.accept()?;
        stream.set_nodelay(true)?;
        let role = handshake(&stream, config.timeout, &mut capture)?;
        let slot = if role == Role::Alice { &mut alice } else { &mut bob };
        if slot.is_some() {
            return Err(NetError::Protocol(format!("second hello for role {role:?}")));
        }
        *slot = Some(Peer { role, stream });
    }
    let mut peers = [alice.unwrap(), bob.unwrap()];
    let (tx, rx) = mpsc::channel();
    let readers: Vec<_> = peers
        .iter()
        .map(|p| p.stream.try_clone().map(|s| spawn_reader(p.role, s, tx.clone())))
        .collect::<std::io::Result<_>>()?;
    drop(tx);

    let hello = WireMessage::new(Body::Hello {
        role: Role::Referee,
        mode: Some(config.mode.as_str().into()),
    });
    for p in &mut peers {
        p.send(&hello, &mut capture)?;
    }
    let outcome = play(&mut peers, &rx, config, &mut capture);
    let result = match outcome {
        Ok(summary) => {
            let value = serde_json::to_value(&summary).expect("summary serializes");
            let msg = WireMessage::new(Body::Summary { summary: value });
            for p in &mut peers {
                p.send(&msg, &mut capture)?;
            }
            Ok(summary)
        }
        Err(e) => {
            let msg = WireMessage::new(Body::Error {
                message: e.to_string(),
                round_id: None,
            });
            for p in &mut peers {
                let _ = p.send(&msg, &mut capture);
            }
            Err(e)
        }
    };
    for p in &peers {
        let _ = p.stream.shutdown(Shutdown::Both);
    }
    for r in readers {
        let _ = r.join();
    }
    if let Some(w) = &mut capture.0 {
        w.flush()?;
    }
    result
}

fn play(peers: &mut [Peer; 2], rx: &Receiver<Event>, config: &RefereeConfig, capture: &mut Capture) -> Result<Summary> {
    let mut tallies: Vec<SettingTally> = crate::source::all_pairs()
        .map(|(j, k)| SettingTally { j, k, rounds: 0, wins: 0 })
        .collect();
    let mut aborted_rounds = Vec::new();
    let mut aborted = 0u64;
    for round in 0..config.rounds {
        let mut rng = stream_rng(config.seed, REFEREE_STREAM_BASE + round);
        let (j, k): (u8, u8) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let pair = (config.mode == Mode::QuantumEmulated).then_some([j, k]);
        peers[0].send(
            &WireMessage::new(Body::RoundSetting {
                round_id: round,
                setting: j,
                setting_pair: pair,
            }),
            capture,
        )?;
        peers[1].send(
            &WireMessage::new(Body::RoundSetting {
                round_id: round,
                setting: k,
                setting_pair: pair,
            }),
            capture,
        )?;
        let deadline = Instant::now() + config.timeout;
        let mut answers: [Option<[i8; 3]>; 2] = [None, None];
        let mut abort_reason = None;
        while answers.iter().any(Option::is_none) && abort_reason.is_none() {
            let wait = deadline.saturating_duration_since(Instant::now());
            let (role, line) = match rx.recv_timeout(wait) {
                Ok(Event::Line(role, line)) => (role, line),
                Ok(Event::Closed(role)) => return Err(NetError::Protocol(format!("{role:?} disconnected in round {round}"))),
                Ok(Event::Failed(role, e)) => return Err(NetError::Protocol(format!("{role:?} connection failed: {e}"))),
                Err(RecvTimeoutError::Timeout) => {
                    abort_reason = Some("timeout".to_string());
                    break;
                }
                Err(RecvTimeoutError::Disconnected) => return Err(NetError::Protocol("both connections closed".into())),
            };
            capture.record(role, Role::Referee, &line)?;
            let slot = if role == Role::Alice { 0 } else { 1 };
            match wire::WireMessage::parse(&line)?.body {
                Body::RoundOutcome { round_id, outcome } if round_id == round => {
                    if outcome.iter().any(|&x| x != 1 && x != -1) {
                        return Err(NetError::Malformed(format!("{role:?} sent outcome {outcome:?}")));
                    }
                    if answers[slot].replace(outcome).is_some() {
                        return Err(NetError::Protocol(format!("{role:?} answered round {round} twice")));
                    }
                }
                // Late answer to an aborted round.
                Body::RoundOutcome { round_id, .. } if round_id < round => {}
                Body::Error { message, round_id: Some(id) } if id == round => {
                    abort_reason = Some(format!("{role:?} reported: {message}"));
                }
                Body::Error { round_id: Some(id), .. } if id < round => {}
                Body::Error { message, .. } => return Err(NetError::Protocol(format!("{role:?} reported: {message}"))),
                other => return Err(NetError::Protocol(format!("unexpected {} from {role:?} in round {round}", other.kind()))),
            }
        }
        match (answers, abort_reason) {
            ([Some(alpha), Some(beta)], None) => {
                let t = &mut tallies[crate::source::pair_index(j, k)];
                t.rounds += 1;
                if round_score(&alpha, &beta, j as usize, k as usize) > 0 {
                    t.wins += 1;
                }
            }
            (_, reason) => {
                eprintln!("referee: round {round} aborted ({})", reason.unwrap_or_default());
                aborted += 1;
                if aborted_rounds.len() < 32 {
                    aborted_rounds.push(round);
                }
            }
        }
    }
    let completed: u64 = tallies.iter().map(|t| t.rounds).sum();
    let wins: u64 = tallies.iter().map(|t| t.wins).sum();
    let (g_hat, stderr) = score_summary(wins, completed);
    let done = completed > 0;
    Ok(Summary {
        mode: config.mode,
        seed: config.seed,
        rounds: config.rounds,
        completed,
        aborted,
        wins,
        g_hat: done.then_some(g_hat),
        stderr: done.then_some(stderr),
        ci95: done.then_some([g_hat - 1.96 * stderr, g_hat + 1.96 * stderr]),
        per_setting: tallies,
        aborted_rounds,
    })
}

/// Binds `addr` and, if asked, writes the bound address (useful with port 0)
/// to `addr_file`.
pub fn bind(addr: &str, addr_file: Option<&std::path::Path>) -> Result<TcpListener> {
    let listener = TcpListener::bind(addr)?;
    if let Some(path) = addr_file {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, listener.local_addr()?.to_string())?;
        std::fs::rename(tmp, path)?;
    }
    Ok(listener)
}
