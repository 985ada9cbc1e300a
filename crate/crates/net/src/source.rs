//! The trusted source that stands in for shared entanglement.
//!
//! For every round it draws one joint record `(α, β)` from `P*(· | j, k)` for
//! each of the nine setting pairs, then splits the records into an Alice tape
//! (only `α`) and a Bob tape (only `β`). A party that is told the setting
//! pair opens its half of that record.

use std::io::{BufRead, Write};

use majorana_core::games::{decode_outcome, magic_square::quantum_distribution};
use majorana_core::program::stream_rng;
use majorana_core::Rational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::wire::Role;
use crate::{NetError, Result};

/// Index of the setting pair `(j, k)` among the nine, row-major.
pub fn pair_index(j: u8, k: u8) -> usize {
    (j as usize - 1) * 3 + (k as usize - 1)
}

pub fn all_pairs() -> impl Iterator<Item = (u8, u8)> {
    (1..=3).flat_map(|j| (1..=3).map(move |k| (j, k)))
}

/// The eight `(α, β)` pairs carrying mass `1/8` under `P*` for each setting
/// pair, indexed by [`pair_index`].
pub fn support() -> Vec<Vec<([i8; 3], [i8; 3])>> {
    let p = quantum_distribution();
    all_pairs()
        .map(|(j, k)| {
            let mut s = Vec::new();
            for a in 0..8 {
                for b in 0..8 {
                    if *p.at(j as usize, k as usize, a, b) != Rational::from_integer(0) {
                        s.push((to3(&decode_outcome(a, 3)), to3(&decode_outcome(b, 3))));
                    }
                }
            }
            s
        })
        .collect()
}

fn to3(v: &[i8]) -> [i8; 3] {
    [v[0], v[1], v[2]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointRecord {
    pub round: u64,
    pub setting_pair: [u8; 2],
    pub alpha: [i8; 3],
    pub beta: [i8; 3],
}

/// One line of a party's tape. Exactly one of `alpha` / `beta` is present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TapeLine {
    pub round: u64,
    pub setting_pair: [u8; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[i8; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<[i8; 3]>,
}

/// Joint records for `rounds` rounds, nine per round. Round `r` draws from
/// stream `r` of `seed`.
pub fn source_generate(rounds: u64, seed: u64) -> Vec<JointRecord> {
    let support = support();
    let mut out = Vec::with_capacity(rounds as usize * 9);
    for round in 0..rounds {
        let mut rng = stream_rng(seed, round);
        for (j, k) in all_pairs() {
            let (alpha, beta) = support[pair_index(j, k)][rng.gen_range(0..8)];
            out.push(JointRecord {
                round,
                setting_pair: [j, k],
                alpha,
                beta,
            });
        }
    }
    out
}

/// One joint sample from `P*(· | j, k)`.
pub fn sample_direct<R: Rng + ?Sized>(support: &[Vec<([i8; 3], [i8; 3])>], j: u8, k: u8, rng: &mut R) -> ([i8; 3], [i8; 3]) {
    support[pair_index(j, k)][rng.gen_range(0..8)]
}

/// The two tape slices of `records`.
pub fn split(records: &[JointRecord]) -> (Vec<TapeLine>, Vec<TapeLine>) {
    records
        .iter()
        .map(|r| {
            (
                TapeLine {
                    round: r.round,
                    setting_pair: r.setting_pair,
                    alpha: Some(r.alpha),
                    beta: None,
                },
                TapeLine {
                    round: r.round,
                    setting_pair: r.setting_pair,
                    alpha: None,
                    beta: Some(r.beta),
                },
            )
        })
        .unzip()
}

pub fn write_tape<W: Write>(w: &mut W, lines: &[TapeLine]) -> Result<()> {
    for line in lines {
        serde_json::to_writer(&mut *w, line).map_err(|e| NetError::Io(e.into()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// A party's tape, loaded for lookup by `(round, setting pair)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tape {
    pub role: Role,
    answers: Vec<[[i8; 3]; 9]>,
}

impl Tape {
    pub fn rounds(&self) -> u64 {
        self.answers.len() as u64
    }

    pub fn answer(&self, round: u64, j: u8, k: u8) -> Option<[i8; 3]> {
        if !(1..=3).contains(&j) || !(1..=3).contains(&k) {
            return None;
        }
        self.answers.get(round as usize).map(|a| a[pair_index(j, k)])
    }

    pub fn from_lines(role: Role, lines: &[TapeLine]) -> Result<Self> {
        let mut answers: Vec<[[i8; 3]; 9]> = Vec::new();
        let mut filled: Vec<u16> = Vec::new();
        for line in lines {
            let value = match role {
                Role::Alice => line.alpha,
                Role::Bob => line.beta,
                Role::Referee => return Err(NetError::Protocol("the referee has no tape".into())),
            }
            .ok_or_else(|| NetError::Malformed(format!("tape line for round {} lacks this party's outcome", line.round)))?;
            let [j, k] = line.setting_pair;
            if !(1..=3).contains(&j) || !(1..=3).contains(&k) || value.iter().any(|&x| x != 1 && x != -1) {
                return Err(NetError::Malformed(format!("bad tape line for round {}", line.round)));
            }
            let r = line.round as usize;
            if r >= answers.len() {
                answers.resize(r + 1, [[0; 3]; 9]);
                filled.resize(r + 1, 0);
            }
            answers[r][pair_index(j, k)] = value;
            filled[r] |= 1 << pair_index(j, k);
        }
        if let Some(r) = filled.iter().position(|&f| f != 0x1ff) {
            return Err(NetError::Malformed(format!("tape round {r} is incomplete")));
        }
        Ok(Self { role, answers })
    }

    pub fn read<R: BufRead>(role: Role, r: R) -> Result<Self> {
        let mut lines = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            lines.push(serde_json::from_str(&line).map_err(|e| NetError::Malformed(format!("tape: {e}")))?);
        }
        Self::from_lines(role, &lines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use majorana_core::games::magic_square::parity_ok;

    #[test]
    fn support_has_eight_winning_pairs() {
        for (idx, s) in support().iter().enumerate() {
            let (j, k) = (idx / 3 + 1, idx % 3 + 1);
            assert_eq!(s.len(), 8);
            for (a, b) in s {
                assert!(parity_ok(a, b));
                assert_eq!(a[k - 1], b[j - 1]);
            }
        }
    }

    #[test]
    fn tape_lookup() {
        let records = source_generate(3, 1);
        let (a, b) = split(&records);
        let ta = Tape::from_lines(Role::Alice, &a).unwrap();
        let tb = Tape::from_lines(Role::Bob, &b).unwrap();
        for r in &records {
            let [j, k] = r.setting_pair;
            assert_eq!(ta.answer(r.round, j, k), Some(r.alpha));
            assert_eq!(tb.answer(r.round, j, k), Some(r.beta));
        }
        assert!(Tape::from_lines(Role::Alice, &b).is_err());
        assert!(Tape::from_lines(Role::Alice, &a[..8]).is_err());
        assert_eq!(ta.answer(0, 4, 1), None);
    }
}
