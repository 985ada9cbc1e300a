//! Two-party nonlocal games over joint conditional distributions
//! `P(α, β | j, k)`, with `j, k ∈ {1, 2, 3}` and `α, β` strings of `±1`.
//!
//! Outcome strings are indexed by a bitmask: bit `l` is set when entry
//! `l + 1` of the string is `-1`.

pub mod classical;
pub mod four_pair;
pub mod magic_square;
pub mod noise;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::prob::{Probability, Rational};
use crate::program::Backend;
use crate::stabilizer::ChargeObservable;

pub use classical::{classical_bound, identical_tables_bound, ClassicalBound, DeterministicStrategy};

pub fn encode_outcome(outcome: &[i8]) -> usize {
    outcome
        .iter()
        .enumerate()
        .fold(0, |acc, (l, &x)| if x < 0 { acc | (1 << l) } else { acc })
}

pub fn decode_outcome(code: usize, len: usize) -> Vec<i8> {
    (0..len).map(|l| if code >> l & 1 == 1 { -1 } else { 1 }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution<T = Rational> {
    n_settings: usize,
    outcome_len: usize,
    table: Vec<T>,
}

impl<T: Probability> JointDistribution<T> {
    pub fn zeros(n_settings: usize, outcome_len: usize) -> Self {
        let n_out = 1usize << outcome_len;
        Self {
            n_settings,
            outcome_len,
            table: vec![T::zero(); n_settings * n_settings * n_out * n_out],
        }
    }

    /// Tabulates `f(α, β, j, k)` with 1-based settings.
    pub fn from_fn(n_settings: usize, outcome_len: usize, f: impl Fn(&[i8], &[i8], usize, usize) -> T) -> Self {
        let mut d = Self::zeros(n_settings, outcome_len);
        let n_out = 1usize << outcome_len;
        for j in 1..=n_settings {
            for k in 1..=n_settings {
                for a in 0..n_out {
                    let alpha = decode_outcome(a, outcome_len);
                    for b in 0..n_out {
                        let beta = decode_outcome(b, outcome_len);
                        let idx = d.index(j, k, a, b);
                        d.table[idx] = f(&alpha, &beta, j, k);
                    }
                }
            }
        }
        d
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    pub fn outcome_len(&self) -> usize {
        self.outcome_len
    }

    pub fn n_outcomes(&self) -> usize {
        1 << self.outcome_len
    }

    fn index(&self, j: usize, k: usize, a: usize, b: usize) -> usize {
        let n_out = self.n_outcomes();
        (((j - 1) * self.n_settings + (k - 1)) * n_out + a) * n_out + b
    }

    /// Entry by outcome codes and 1-based settings.
    pub fn at(&self, j: usize, k: usize, a: usize, b: usize) -> &T {
        &self.table[self.index(j, k, a, b)]
    }

    pub fn set(&mut self, j: usize, k: usize, a: usize, b: usize, value: T) {
        let idx = self.index(j, k, a, b);
        self.table[idx] = value;
    }

    pub fn get(&self, alpha: &[i8], beta: &[i8], j: usize, k: usize) -> Result<&T> {
        if alpha.len() != self.outcome_len || beta.len() != self.outcome_len {
            bail!(Dimension, "outcome strings must have length {}", self.outcome_len);
        }
        if j == 0 || k == 0 || j > self.n_settings || k > self.n_settings {
            bail!(Argument, "settings ({j}, {k}) outside 1..={}", self.n_settings);
        }
        Ok(self.at(j, k, encode_outcome(alpha), encode_outcome(beta)))
    }

    pub fn settings_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n_settings;
        (1..=n).flat_map(move |j| (1..=n).map(move |k| (j, k)))
    }

    pub fn alice_marginal(&self, j: usize, k: usize) -> Vec<T> {
        (0..self.n_outcomes())
            .map(|a| (0..self.n_outcomes()).fold(T::zero(), |acc, b| acc.add(self.at(j, k, a, b))))
            .collect()
    }

    pub fn bob_marginal(&self, j: usize, k: usize) -> Vec<T> {
        (0..self.n_outcomes())
            .map(|b| (0..self.n_outcomes()).fold(T::zero(), |acc, a| acc.add(self.at(j, k, a, b))))
            .collect()
    }

    /// Sum of `P(·,·|j,k)` for every setting pair.
    pub fn setting_totals(&self) -> Vec<T> {
        self.settings_pairs()
            .map(|(j, k)| self.alice_marginal(j, k).iter().fold(T::zero(), |acc, x| acc.add(x)))
            .collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.table.iter().all(|x| !x.is_negative())
    }

    /// Compares marginals with `close` (exact equality for rationals).
    pub fn is_non_signalling_by(&self, close: impl Fn(&T, &T) -> bool) -> bool {
        let n = self.n_settings;
        for j in 1..=n {
            let reference = self.alice_marginal(j, 1);
            for k in 2..=n {
                if !self.alice_marginal(j, k).iter().zip(&reference).all(|(a, b)| close(a, b)) {
                    return false;
                }
            }
        }
        for k in 1..=n {
            let reference = self.bob_marginal(1, k);
            for j in 2..=n {
                if !self.bob_marginal(j, k).iter().zip(&reference).all(|(a, b)| close(a, b)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn map<U: Probability>(&self, f: impl Fn(&T) -> U) -> JointDistribution<U> {
        JointDistribution {
            n_settings: self.n_settings,
            outcome_len: self.outcome_len,
            table: self.table.iter().map(f).collect(),
        }
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .fold(0.0, f64::max)
    }
}

impl JointDistribution<Rational> {
    pub fn is_normalized(&self) -> bool {
        self.setting_totals().iter().all(|t| *t == Rational::from_integer(1))
    }

    pub fn is_non_signalling(&self) -> bool {
        self.is_non_signalling_by(|a, b| a == b)
    }

    pub fn to_json(&self) -> DistributionJson {
        let mut entries = Vec::new();
        for (j, k) in self.settings_pairs() {
            for a in 0..self.n_outcomes() {
                for b in 0..self.n_outcomes() {
                    let p = self.at(j, k, a, b);
                    if *p.numer() != 0 {
                        entries.push(DistributionEntry {
                            j,
                            k,
                            alpha: decode_outcome(a, self.outcome_len),
                            beta: decode_outcome(b, self.outcome_len),
                            p_num: *p.numer(),
                            p_den: *p.denom(),
                        });
                    }
                }
            }
        }
        DistributionJson {
            settings: self.n_settings,
            outcomes: self.outcome_len,
            entries,
        }
    }

    pub fn from_json(doc: &DistributionJson) -> Result<Self> {
        let mut d = Self::zeros(doc.settings, doc.outcomes);
        for e in &doc.entries {
            if e.p_den <= 0 {
                bail!(Parse, "non-positive denominator in entry ({}, {})", e.j, e.k);
            }
            d.get(&e.alpha, &e.beta, e.j, e.k)?;
            d.set(
                e.j,
                e.k,
                encode_outcome(&e.alpha),
                encode_outcome(&e.beta),
                Rational::new(e.p_num, e.p_den),
            );
        }
        Ok(d)
    }
}

/// Serialized form: `{settings, outcomes, entries: [{j, k, alpha, beta, p_num, p_den}]}`,
/// listing nonzero entries only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionJson {
    pub settings: usize,
    pub outcomes: usize,
    pub entries: Vec<DistributionEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionEntry {
    pub j: usize,
    pub k: usize,
    pub alpha: Vec<i8>,
    pub beta: Vec<i8>,
    pub p_num: i64,
    pub p_den: i64,
}

/// The payoff `V(α, β, j, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GameFunction {
    shape: JointDistribution<Rational>,
}

impl GameFunction {
    pub fn from_fn(n_settings: usize, outcome_len: usize, f: impl Fn(&[i8], &[i8], usize, usize) -> Rational) -> Self {
        Self {
            shape: JointDistribution::from_fn(n_settings, outcome_len, f),
        }
    }

    /// `V ≡ 1`.
    pub fn constant(n_settings: usize, outcome_len: usize, value: i64) -> Self {
        Self::from_fn(n_settings, outcome_len, |_, _, _, _| Rational::from_integer(value))
    }

    pub fn n_settings(&self) -> usize {
        self.shape.n_settings
    }

    pub fn outcome_len(&self) -> usize {
        self.shape.outcome_len
    }

    pub fn at(&self, j: usize, k: usize, a: usize, b: usize) -> &Rational {
        self.shape.at(j, k, a, b)
    }

    pub fn value(&self, alpha: &[i8], beta: &[i8], j: usize, k: usize) -> Result<Rational> {
        self.shape.get(alpha, beta, j, k).copied()
    }
}

/// `G(P) = Σ V(α, β, j, k) P(α, β | j, k)`.
pub fn game_value<T: Probability>(v: &GameFunction, p: &JointDistribution<T>) -> Result<T> {
    if v.n_settings() != p.n_settings || v.outcome_len() != p.outcome_len {
        bail!(
            Argument,
            "game on {} settings × {}-bit outcomes, distribution on {} × {}",
            v.n_settings(),
            v.outcome_len(),
            p.n_settings,
            p.outcome_len
        );
    }
    Ok(v.shape.table.iter().zip(&p.table).fold(T::zero(), |acc, (w, x)| acc.add(&x.weight(w))))
}

/// Exact branching over sequential measurements of weight-two observables.
/// Returns every outcome string with positive probability.
pub fn measurement_distribution<B: Backend>(state: &B, observables: &[ChargeObservable]) -> Result<Vec<(Vec<i8>, f64)>> {
    let mut current = vec![(Vec::new(), 1.0, state.clone())];
    for obs in observables {
        let mut next = Vec::with_capacity(current.len() * 2);
        for (outcomes, p, s) in current {
            let plus = s.plus_probability(obs.lo, obs.hi)?;
            for (m, q) in [(1i8, plus), (-1i8, 1.0 - plus)] {
                if q <= crate::program::BRANCH_CUTOFF {
                    continue;
                }
                let mut s2 = s.clone();
                s2.condition(obs.lo, obs.hi, m)?;
                let mut o = outcomes.clone();
                o.push(m * obs.sign);
                next.push((o, p * q, s2));
            }
        }
        current = next;
    }
    Ok(current.into_iter().map(|(o, p, _)| (o, p)).collect())
}

/// Converts float probabilities that must be dyadic into exact rationals.
pub fn exact_from_f64(d: &JointDistribution<f64>) -> Result<JointDistribution<Rational>> {
    let mut out = JointDistribution::zeros(d.n_settings, d.outcome_len);
    for (idx, x) in d.table.iter().enumerate() {
        out.table[idx] =
            crate::prob::exact_dyadic(*x, 40).ok_or_else(|| Error::Consistency(format!("probability {x} is not an exact dyadic rational")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_codes() {
        assert_eq!(encode_outcome(&[1, 1, 1]), 0);
        assert_eq!(encode_outcome(&[-1, 1, -1]), 0b101);
        assert_eq!(decode_outcome(0b110, 3), vec![1, -1, -1]);
    }

    #[test]
    fn constant_game_on_normalized_distribution() {
        let uniform = JointDistribution::from_fn(3, 3, |_, _, _, _| Rational::new(1, 64));
        assert!(uniform.is_normalized());
        assert!(uniform.is_non_signalling());
        let v = GameFunction::constant(3, 3, 1);
        assert_eq!(game_value(&v, &uniform).unwrap(), Rational::from_integer(9));
    }

    #[test]
    fn shape_mismatch() {
        let p = JointDistribution::<Rational>::zeros(3, 2);
        let v = GameFunction::constant(3, 3, 1);
        assert!(matches!(game_value(&v, &p), Err(Error::Argument(_))));
    }

    #[test]
    fn signalling_is_detected() {
        // Bob outputs Alice's setting
        let p = JointDistribution::from_fn(3, 2, |a, b, j, _| {
            let bob = decode_outcome(j - 1, 2);
            if a == [1, 1] && b == bob.as_slice() {
                Rational::from_integer(1)
            } else {
                Rational::from_integer(0)
            }
        });
        assert!(p.is_normalized());
        assert!(!p.is_non_signalling());
    }

    #[test]
    fn json_round_trip() {
        let p = JointDistribution::from_fn(3, 2, |a, _, j, k| {
            if a[0] == 1 && j <= k {
                Rational::new(1, 4)
            } else {
                Rational::new(1, 12)
            }
        });
        let doc = p.to_json();
        let text = serde_json::to_string(&doc).unwrap();
        let back: DistributionJson = serde_json::from_str(&text).unwrap();
        assert_eq!(JointDistribution::from_json(&back).unwrap(), p);
    }
}
