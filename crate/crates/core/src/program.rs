//! Braid/measure programs and the simulator interface they run against.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

/// One topologically protected operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Instruction {
    /// Exchange `j < k`: `c_j -> c_k`, `c_k -> -c_j`.
    Braid { j: usize, k: usize },
    /// Charge measurement of `i c_j c_k`.
    Measure { j: usize, k: usize },
}

impl Instruction {
    pub fn modes(&self) -> (usize, usize) {
        match *self {
            Instruction::Braid { j, k } | Instruction::Measure { j, k } => (j, k),
        }
    }

    pub fn validate(&self, n_modes: usize) -> Result<()> {
        let (j, k) = self.modes();
        if j == 0 || k == 0 || j > n_modes || k > n_modes || j == k {
            bail!(Argument, "{self:?} is invalid on {n_modes} modes");
        }
        if let Instruction::Braid { j, k } = *self {
            if j > k {
                bail!(Argument, "braid expects j < k, got ({j}, {k})");
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for Instruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Instruction::Braid { j, k } => write!(f, "braid({j},{k})"),
            Instruction::Measure { j, k } => write!(f, "measure(i c{j} c{k})"),
        }
    }
}

/// Outcomes of the measurements in a program, in order.
pub type Transcript = Vec<i8>;

/// A state that supports braids and pairwise charge measurements.
pub trait Backend: Clone {
    fn n_modes(&self) -> usize;
    fn braid(&mut self, j: usize, k: usize) -> Result<()>;
    /// Probability that measuring `i c_j c_k` yields `+1`.
    fn plus_probability(&self, j: usize, k: usize) -> Result<f64>;
    /// Post-measurement state for the given outcome.
    fn condition(&mut self, j: usize, k: usize, outcome: i8) -> Result<()>;

    fn outcome_probability(&self, j: usize, k: usize, outcome: i8) -> Result<f64> {
        let p = self.plus_probability(j, k)?;
        Ok(if outcome > 0 { p } else { 1.0 - p })
    }

    /// Samples an outcome from a uniform draw and conditions on it.
    fn measure<R: Rng + ?Sized>(&mut self, j: usize, k: usize, rng: &mut R) -> Result<i8> {
        let p = self.plus_probability(j, k)?;
        let u: f64 = rng.gen();
        let outcome = if u < p { 1 } else { -1 };
        self.condition(j, k, outcome)?;
        Ok(outcome)
    }
}

/// Below this, a branch is treated as impossible.
pub const BRANCH_CUTOFF: f64 = 1e-12;

pub fn run<B: Backend, R: Rng + ?Sized>(start: &B, program: &[Instruction], rng: &mut R) -> Result<(Transcript, B)> {
    let mut state = start.clone();
    let mut transcript = Vec::new();
    for ins in program {
        ins.validate(state.n_modes())?;
        match *ins {
            Instruction::Braid { j, k } => state.braid(j, k)?,
            Instruction::Measure { j, k } => transcript.push(state.measure(j, k, rng)?),
        }
    }
    Ok((transcript, state))
}

/// Every transcript with nonzero probability, its probability and the
/// resulting state.
pub fn branches<B: Backend>(start: &B, program: &[Instruction]) -> Result<Vec<(Transcript, f64, B)>> {
    let mut current = vec![(Vec::new(), 1.0, start.clone())];
    for ins in program {
        ins.validate(start.n_modes())?;
        let mut next = Vec::with_capacity(current.len() * 2);
        for (transcript, p, mut state) in current {
            match *ins {
                Instruction::Braid { j, k } => {
                    state.braid(j, k)?;
                    next.push((transcript, p, state));
                }
                Instruction::Measure { j, k } => {
                    let plus = state.plus_probability(j, k)?;
                    for (outcome, q) in [(1i8, plus), (-1i8, 1.0 - plus)] {
                        if q <= BRANCH_CUTOFF {
                            continue;
                        }
                        let mut s = state.clone();
                        s.condition(j, k, outcome)?;
                        let mut t = transcript.clone();
                        t.push(outcome);
                        next.push((t, p * q, s));
                    }
                }
            }
        }
        current = next;
    }
    Ok(current)
}

pub fn transcript_distribution<B: Backend>(start: &B, program: &[Instruction]) -> Result<BTreeMap<Transcript, f64>> {
    let mut out = BTreeMap::new();
    for (t, p, _) in branches(start, program)? {
        *out.entry(t).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Total variation distance between two transcript distributions.
pub fn total_variation(a: &BTreeMap<Transcript, f64>, b: &BTreeMap<Transcript, f64>) -> f64 {
    let mut keys: Vec<&Transcript> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// One line of a protocol or simulation log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: usize,
    pub operator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<i8>,
}

pub fn to_json_lines<T: Serialize>(entries: &[T]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("log entries serialize"));
        out.push('\n');
    }
    out
}

/// Generator for trial `stream` of a run seeded with `seed`: ChaCha8 keyed
/// by `seed`, on stream number `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
