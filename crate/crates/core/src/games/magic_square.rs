//! The 10-mode magic square: Alice holds `a_l = c_l`, Bob holds `b_l = c_{5+l}`.

use serde::Serialize;

use super::{encode_outcome, exact_from_f64, measurement_distribution, GameFunction, JointDistribution};
use crate::algebra::{MajoranaString, Phase};
use crate::error::{Error, Result};
use crate::prob::Rational;
use crate::program::Backend;
use crate::stabilizer::{AccessibleState, ChargeObservable, SettingPlan};

pub const N_PAIRS: usize = 5;
pub const N_MODES: usize = 10;

// (phase power, local modes) for each cell, row-major
const ALICE: [[(u8, &[usize]); 3]; 3] = [
    [(2, &[1, 3, 4, 5]), (1, &[1, 4]), (1, &[3, 5])],
    [(1, &[3, 4]), (2, &[1, 2, 3, 4]), (3, &[1, 2])],
    [(1, &[1, 5]), (1, &[2, 3]), (0, &[1, 2, 3, 5])],
];
const BOB: [[(u8, &[usize]); 3]; 3] = [
    [(2, &[1, 3, 4, 5]), (3, &[1, 4]), (3, &[3, 5])],
    [(3, &[3, 4]), (2, &[1, 2, 3, 4]), (1, &[1, 2])],
    [(3, &[1, 5]), (3, &[2, 3]), (0, &[1, 2, 3, 5])],
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MagicSquare {
    pub alice: [[MajoranaString; 3]; 3],
    pub bob: [[MajoranaString; 3]; 3],
}

impl MagicSquare {
    /// Alice's setting `j` is column `j`.
    pub fn alice_setting(&self, j: usize) -> [MajoranaString; 3] {
        [self.alice[0][j - 1], self.alice[1][j - 1], self.alice[2][j - 1]]
    }

    /// Bob's setting `k` is row `k`.
    pub fn bob_setting(&self, k: usize) -> [MajoranaString; 3] {
        self.bob[k - 1]
    }
}

fn build(cells: &[[(u8, &[usize]); 3]; 3], offset: usize) -> Result<[[MajoranaString; 3]; 3]> {
    let mut out = [[MajoranaString::identity(N_MODES)?; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let (q, modes) = cells[r][c];
            let modes: Vec<usize> = modes.iter().map(|m| m + offset).collect();
            out[r][c] = MajoranaString::product(N_MODES, Phase::from_power(q as i64), &modes)?;
        }
    }
    Ok(out)
}

fn product_of(ops: &[MajoranaString]) -> Result<MajoranaString> {
    ops.iter().try_fold(MajoranaString::identity(N_MODES)?, |acc, op| acc.multiply(op))
}

/// One symbolic assertion of the table self-check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableCheck {
    pub description: String,
    pub result: String,
    pub ok: bool,
}

/// Column products `+1`, row products `-1` for both tables, and every
/// `A_{r,c} B_{r,c}` a stabilizer of the canonical 5-pair state.
pub fn table_checks(square: &MagicSquare) -> Result<Vec<TableCheck>> {
    let plus = MajoranaString::identity(N_MODES)?;
    let minus = plus.negate();
    let shared = AccessibleState::canonical_shared(N_PAIRS)?;
    let mut checks = Vec::new();
    for (name, table) in [("alice", &square.alice), ("bob", &square.bob)] {
        for c in 0..3 {
            let p = product_of(&[table[0][c], table[1][c], table[2][c]])?;
            checks.push(TableCheck {
                description: format!("{name} column {} product", c + 1),
                ok: p == plus,
                result: p.to_string(),
            });
        }
        for r in 0..3 {
            let p = product_of(&table[r])?;
            checks.push(TableCheck {
                description: format!("{name} row {} product", r + 1),
                ok: p == minus,
                result: p.to_string(),
            });
        }
    }
    for r in 0..3 {
        for c in 0..3 {
            let p = square.alice[r][c].multiply(&square.bob[r][c])?;
            let ok = shared.expectation(&p).map(|e| e == 1).unwrap_or(false);
            checks.push(TableCheck {
                description: format!("cell ({},{}) cross product", r + 1, c + 1),
                ok,
                result: p.to_string(),
            });
        }
    }
    Ok(checks)
}

pub fn magic_square_observables() -> Result<MagicSquare> {
    let square = MagicSquare {
        alice: build(&ALICE, 0)?,
        bob: build(&BOB, N_PAIRS)?,
    };
    if let Some(bad) = table_checks(&square)?.into_iter().find(|c| !c.ok) {
        return Err(Error::Consistency(format!("{} gave `{}`", bad.description, bad.result)));
    }
    Ok(square)
}

fn wins(alpha: &[i8], beta: &[i8], j: usize, k: usize) -> bool {
    alpha[k - 1] == beta[j - 1] && alpha[0] * alpha[1] == alpha[2] && beta[0] * beta[1] == -beta[2]
}

/// `V = +1` when the shared cell agrees and both parity rules hold, else `-1`.
pub fn magic_square_game() -> GameFunction {
    GameFunction::from_fn(3, 3, |a, b, j, k| Rational::from_integer(if wins(a, b, j, k) { 1 } else { -1 }))
}

/// `P*`: mass `1/8` on every winning outcome pair.
pub fn quantum_distribution() -> JointDistribution<Rational> {
    JointDistribution::from_fn(3, 3, |a, b, j, k| {
        if wins(a, b, j, k) {
            Rational::new(1, 8)
        } else {
            Rational::from_integer(0)
        }
    })
}

/// The measured charges and inference plans for one setting pair.
pub fn setting_schedule(square: &MagicSquare, j: usize, k: usize) -> Result<([ChargeObservable; 4], SettingPlan, SettingPlan)> {
    let a = square.alice_setting(j);
    let b = square.bob_setting(k);
    let pa = SettingPlan::new(&a)?;
    let pb = SettingPlan::new(&b)?;
    let charges = [
        ChargeObservable::from_operator(&a[pa.measured[0]])?,
        ChargeObservable::from_operator(&a[pa.measured[1]])?,
        ChargeObservable::from_operator(&b[pb.measured[0]])?,
        ChargeObservable::from_operator(&b[pb.measured[1]])?,
    ];
    Ok((charges, pa, pb))
}

/// Fills in a full answer string from the two measured outcomes.
pub fn complete(plan: &SettingPlan, first: i8, second: i8) -> [i8; 3] {
    let mut out = [0i8; 3];
    out[plan.measured[0]] = first;
    out[plan.measured[1]] = second;
    out[plan.inferred] = plan.relative_sign * first * second;
    out
}

/// Distribution of the magic-square experiment run on any backend holding
/// the 10-mode resource, by exact branching over the four measurements.
pub fn simulated_distribution<B: Backend>(state: &B) -> Result<JointDistribution<f64>> {
    let square = magic_square_observables()?;
    let mut p = JointDistribution::zeros(3, 3);
    for j in 1..=3 {
        for k in 1..=3 {
            let (charges, pa, pb) = setting_schedule(&square, j, k)?;
            for (o, q) in measurement_distribution(state, &charges)? {
                let a = encode_outcome(&complete(&pa, o[0], o[1]));
                let b = encode_outcome(&complete(&pb, o[2], o[3]));
                let prev = *p.at(j, k, a, b);
                p.set(j, k, a, b, prev + q);
            }
        }
    }
    Ok(p)
}

/// `P*` obtained by simulating the measurements on the stabilizer backend.
pub fn simulated_quantum_distribution() -> Result<JointDistribution<Rational>> {
    exact_from_f64(&simulated_distribution(&AccessibleState::canonical_shared(N_PAIRS)?)?)
}

/// Whether an answer pair satisfies the parity rules.
pub fn parity_ok(alpha: &[i8], beta: &[i8]) -> bool {
    alpha[0] * alpha[1] == alpha[2] && beta[0] * beta[1] == -beta[2]
}

/// `V` for one round.
pub fn round_score(alpha: &[i8], beta: &[i8], j: usize, k: usize) -> i8 {
    if wins(alpha, beta, j, k) {
        1
    } else {
        -1
    }
}
