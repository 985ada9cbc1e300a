//! Deterministic strategies and the exhaustive classical bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{decode_outcome, encode_outcome, GameFunction, JointDistribution};
use crate::error::{bail, Result};
use crate::prob::Rational;

/// Two 3×3 tables of `±1`. Alice's setting `j` answers column `j` of her
/// table; Bob's setting `k` answers row `k` of his.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub alice_table: [[i8; 3]; 3],
    pub bob_table: [[i8; 3]; 3],
}

impl DeterministicStrategy {
    pub fn new(alice_table: [[i8; 3]; 3], bob_table: [[i8; 3]; 3]) -> Result<Self> {
        if alice_table.iter().chain(&bob_table).flatten().any(|&x| x != 1 && x != -1) {
            bail!(Argument, "strategy tables must contain only ±1");
        }
        Ok(Self { alice_table, bob_table })
    }

    /// The strategy that wins 8 of the 9 setting pairs.
    pub fn table2() -> Self {
        let alice = [[1, 1, -1], [1, -1, 1], [1, -1, -1]];
        let mut bob = alice;
        bob[2][2] = 1;
        Self {
            alice_table: alice,
            bob_table: bob,
        }
    }

    pub fn alice_answer(&self, j: usize) -> [i8; 3] {
        [self.alice_table[0][j - 1], self.alice_table[1][j - 1], self.alice_table[2][j - 1]]
    }

    pub fn bob_answer(&self, k: usize) -> [i8; 3] {
        self.bob_table[k - 1]
    }

    fn from_codes(alice: &[usize], bob: &[usize]) -> Self {
        let mut s = Self {
            alice_table: [[0; 3]; 3],
            bob_table: [[0; 3]; 3],
        };
        for c in 0..3 {
            let column = decode_outcome(alice[c], 3);
            for r in 0..3 {
                s.alice_table[r][c] = column[r];
            }
            let row = decode_outcome(bob[c], 3);
            s.bob_table[c].copy_from_slice(&row);
        }
        s
    }

    pub fn distribution(&self) -> JointDistribution<Rational> {
        let mut p = JointDistribution::zeros(3, 3);
        for j in 1..=3 {
            for k in 1..=3 {
                p.set(
                    j,
                    k,
                    encode_outcome(&self.alice_answer(j)),
                    encode_outcome(&self.bob_answer(k)),
                    Rational::from_integer(1),
                );
            }
        }
        p
    }
}

/// Result of the exhaustive scan. Answers are outcome codes per setting.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalBound {
    pub value: Rational,
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
    pub pairs_checked: u64,
}

impl ClassicalBound {
    /// The maximizer as tables, for games on three settings with 3-bit outcomes.
    pub fn strategy(&self) -> Option<DeterministicStrategy> {
        (self.alice.len() == 3 && self.bob.len() == 3 && self.alice.iter().chain(&self.bob).all(|&c| c < 8))
            .then(|| DeterministicStrategy::from_codes(&self.alice, &self.bob))
    }
}

fn response(index: usize, n_settings: usize, n_out: usize) -> Vec<usize> {
    (0..n_settings).map(|j| index / n_out.pow(j as u32) % n_out).collect()
}

/// `w[k][b] = Σ_j V(a_j, b, j, k)` for a fixed Alice response `a`.
fn partial_scores(v: &GameFunction, alice: &[usize]) -> Vec<Vec<Rational>> {
    let n = v.n_settings();
    let n_out = 1usize << v.outcome_len();
    (1..=n)
        .map(|k| (0..n_out).map(|b| (1..=n).map(|j| *v.at(j, k, alice[j - 1], b)).sum()).collect())
        .collect()
}

/// Maximum of the game value over every pair of deterministic response
/// functions. Ties go to the smallest `(alice, bob)` response index, where a
/// response is read as a base-`2^len` number with setting 1 least significant.
pub fn classical_bound(v: &GameFunction) -> ClassicalBound {
    let n = v.n_settings();
    let n_out = 1usize << v.outcome_len();
    let count = n_out.pow(n as u32);
    let bob_responses: Vec<Vec<usize>> = (0..count).map(|i| response(i, n, n_out)).collect();
    let best = (0..count)
        .into_par_iter()
        .map(|ai| {
            let alice = response(ai, n, n_out);
            let w = partial_scores(v, &alice);
            let mut best: Option<(Rational, usize)> = None;
            for (bi, bob) in bob_responses.iter().enumerate() {
                let score: Rational = bob.iter().enumerate().map(|(k, &b)| w[k][b]).sum();
                if best.as_ref().is_none_or(|(s, _)| score > *s) {
                    best = Some((score, bi));
                }
            }
            let (score, bi) = best.expect("at least one response");
            (score, ai, bi)
        })
        .reduce_with(|x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
        .expect("at least one response");
    ClassicalBound {
        value: best.0,
        alice: response(best.1, n, n_out),
        bob: bob_responses[best.2].clone(),
        pairs_checked: (count as u64) * (count as u64),
    }
}

/// Bound over strategies with `T^A = T^B`. Needs three settings and 3-bit outcomes.
pub fn identical_tables_bound(v: &GameFunction) -> Result<ClassicalBound> {
    if v.n_settings() != 3 || v.outcome_len() != 3 {
        bail!(Argument, "identical tables need a 3×3 game");
    }
    let mut best: Option<ClassicalBound> = None;
    for t in 0u32..512 {
        let mut table = [[1i8; 3]; 3];
        for (cell, entry) in table.iter_mut().flatten().enumerate() {
            if t >> cell & 1 == 1 {
                *entry = -1;
            }
        }
        let s = DeterministicStrategy {
            alice_table: table,
            bob_table: table,
        };
        let alice: Vec<usize> = (1..=3).map(|j| encode_outcome(&s.alice_answer(j))).collect();
        let bob: Vec<usize> = (1..=3).map(|k| encode_outcome(&s.bob_answer(k))).collect();
        let value = super::game_value(v, &s.distribution())?;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(ClassicalBound {
                value,
                alice,
                bob,
                pairs_checked: 512,
            });
        }
    }
    Ok(best.expect("512 tables"))
}
