//! Accessible states as signed perfect matchings.
//!
//! Starting from `i c_{2j-1} c_{2j}` on every pair, braids and pairwise charge
//! measurements only ever re-pair modes and flip signs, so the whole state is
//! a list of records `(j, k, sign)` meaning `sign · i c_j c_k` stabilizes it.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{MajoranaString, ModeMap, Phase};
use crate::error::{bail, Error, Result};
use crate::prob::{half, Rational};
use crate::program::Backend;

/// `sign · i c_j c_k` with `j < k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatchedPair {
    pub j: usize,
    pub k: usize,
    pub sign: i8,
}

impl MatchedPair {
    pub fn operator(&self, n_modes: usize) -> Result<MajoranaString> {
        let op = MajoranaString::pair(n_modes, self.j, self.k)?;
        Ok(if self.sign < 0 { op.negate() } else { op })
    }
}

impl Serialize for MatchedPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.j, self.k, self.sign).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatchedPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (j, k, sign) = <(usize, usize, i8)>::deserialize(d)?;
        Ok(MatchedPair { j, k, sign })
    }
}

/// A weight-two Hermitian observable `sign · i c_lo c_hi` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChargeObservable {
    pub lo: usize,
    pub hi: usize,
    pub sign: i8,
}

impl ChargeObservable {
    pub fn from_operator(op: &MajoranaString) -> Result<Self> {
        let modes = op.support();
        if modes.len() != 2 {
            bail!(Argument, "`{op}` is not a charge operator (weight {})", modes.len());
        }
        let sign = match op.phase() {
            Phase::I => 1,
            Phase::MINUS_I => -1,
            _ => bail!(Argument, "`{op}` is not Hermitian"),
        };
        Ok(Self {
            lo: modes[0],
            hi: modes[1],
            sign,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct AccessibleState {
    n_pairs: usize,
    pairs: Vec<MatchedPair>,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    n_pairs: usize,
    pairs: Vec<MatchedPair>,
}

impl TryFrom<StateRepr> for AccessibleState {
    type Error = Error;
    fn try_from(r: StateRepr) -> Result<Self> {
        AccessibleState::from_pairs(r.n_pairs, r.pairs)
    }
}

impl From<AccessibleState> for StateRepr {
    fn from(s: AccessibleState) -> Self {
        StateRepr {
            n_pairs: s.n_pairs,
            pairs: s.pairs,
        }
    }
}

impl AccessibleState {
    /// The initialised state stabilized by `i c_{2j-1} c_{2j}`.
    pub fn init(n_pairs: usize) -> Result<Self> {
        if n_pairs < 1 {
            bail!(Argument, "need at least one pair");
        }
        let pairs = (1..=n_pairs)
            .map(|j| MatchedPair {
                j: 2 * j - 1,
                k: 2 * j,
                sign: 1,
            })
            .collect();
        Self::from_pairs(n_pairs, pairs)
    }

    /// Two parties holding `a_l = c_l` and `b_l = c_{n+l}`, sharing the pairs
    /// `i a_l b_l` for `l = 1..n`.
    pub fn canonical_shared(n_pairs: usize) -> Result<Self> {
        if n_pairs < 1 {
            bail!(Argument, "need at least one pair");
        }
        let pairs = (1..=n_pairs)
            .map(|l| MatchedPair {
                j: l,
                k: n_pairs + l,
                sign: 1,
            })
            .collect();
        Self::from_pairs(n_pairs, pairs)
    }

    pub fn from_pairs(n_pairs: usize, pairs: Vec<MatchedPair>) -> Result<Self> {
        let n_modes = 2 * n_pairs;
        if n_pairs < 1 || n_modes > crate::algebra::MAX_MODES {
            bail!(Argument, "unsupported pair count {n_pairs}");
        }
        if pairs.len() != n_pairs {
            bail!(State, "{} records for {n_pairs} pairs", pairs.len());
        }
        let mut seen = vec![false; n_modes + 1];
        let mut canonical = Vec::with_capacity(n_pairs);
        for p in pairs {
            if p.j == 0 || p.k == 0 || p.j > n_modes || p.k > n_modes || p.j == p.k {
                bail!(State, "invalid record ({}, {}, {})", p.j, p.k, p.sign);
            }
            if p.sign != 1 && p.sign != -1 {
                bail!(State, "sign must be ±1, got {}", p.sign);
            }
            for m in [p.j, p.k] {
                if seen[m] {
                    bail!(State, "mode {m} is matched twice");
                }
                seen[m] = true;
            }
            canonical.push(if p.j < p.k {
                p
            } else {
                MatchedPair {
                    j: p.k,
                    k: p.j,
                    sign: -p.sign,
                }
            });
        }
        canonical.sort();
        Ok(Self { n_pairs, pairs: canonical })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_pairs
    }

    pub fn pairs(&self) -> &[MatchedPair] {
        &self.pairs
    }

    fn check_mode(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.n_modes() {
            bail!(Argument, "mode {m} outside 1..={}", self.n_modes());
        }
        Ok(())
    }

    fn record_of(&self, m: usize) -> usize {
        self.pairs
            .iter()
            .position(|p| p.j == m || p.k == m)
            .expect("perfect matching covers every mode")
    }

    /// Partner of mode `m` and the sign of `i c_m c_partner` in the group.
    pub fn partner(&self, m: usize) -> Result<(usize, i8)> {
        self.check_mode(m)?;
        let p = self.pairs[self.record_of(m)];
        Ok(if p.j == m { (p.k, p.sign) } else { (p.j, -p.sign) })
    }

    pub fn generators(&self) -> Vec<MajoranaString> {
        self.pairs
            .iter()
            .map(|p| p.operator(self.n_modes()).expect("records are valid"))
            .collect()
    }

    /// All `2^n` elements of the stabilizer group.
    pub fn stabilizer_group(&self) -> Vec<MajoranaString> {
        let gens = self.generators();
        let mut group = vec![MajoranaString::identity(self.n_modes()).expect("valid size")];
        for g in &gens {
            let extra: Vec<_> = group.iter().map(|s| s.multiply(g).expect("same space")).collect();
            group.extend(extra);
        }
        group
    }

    pub fn braid(&self, j: usize, k: usize) -> Result<Self> {
        let map = ModeMap::braid(self.n_modes(), j, k)?;
        self.apply_map(&map)
    }

    /// Conjugates every stabilizer by a signed mode permutation.
    pub fn apply_map(&self, map: &ModeMap) -> Result<Self> {
        if map.n_modes() != self.n_modes() {
            bail!(Dimension, "map on {} modes, state on {}", map.n_modes(), self.n_modes());
        }
        let mut pairs = Vec::with_capacity(self.n_pairs);
        for p in &self.pairs {
            let image = map.apply(&p.operator(self.n_modes())?)?;
            let obs = ChargeObservable::from_operator(&image)?;
            pairs.push(MatchedPair {
                j: obs.lo,
                k: obs.hi,
                sign: obs.sign,
            });
        }
        Self::from_pairs(self.n_pairs, pairs)
    }

    /// `<i c_j c_k>` in `{-1, 0, 1}` for distinct `j`, `k` in either order.
    pub fn charge_expectation(&self, j: usize, k: usize) -> Result<i8> {
        self.check_mode(j)?;
        self.check_mode(k)?;
        if j == k {
            bail!(Argument, "charge measurement needs distinct modes, got {j} twice");
        }
        let (partner, sign) = self.partner(j)?;
        Ok(if partner == k { sign } else { 0 })
    }

    /// Probability of `outcome` when measuring `i c_j c_k`.
    pub fn outcome_probability(&self, j: usize, k: usize, outcome: i8) -> Result<Rational> {
        let e = self.charge_expectation(j, k)?;
        Ok(match e {
            0 => half(),
            e if e == outcome => Rational::from_integer(1),
            _ => Rational::from_integer(0),
        })
    }

    /// Post-measurement state after observing `outcome` for `i c_j c_k`.
    pub fn project(&self, j: usize, k: usize, outcome: i8) -> Result<Self> {
        if outcome != 1 && outcome != -1 {
            bail!(Argument, "outcome must be ±1, got {outcome}");
        }
        let e = self.charge_expectation(j, k)?;
        if e != 0 {
            if e != outcome {
                bail!(Argument, "outcome {outcome} of i c{j} c{k} has probability zero");
            }
            return Ok(self.clone());
        }
        let n = self.n_modes();
        let (p, _) = self.partner(j)?;
        let (q, _) = self.partner(k)?;
        let s1 = self.pairs[self.record_of(j)].operator(n)?;
        let s2 = self.pairs[self.record_of(k)].operator(n)?;
        let mut measured = MajoranaString::pair(n, j, k)?;
        if outcome < 0 {
            measured = measured.negate();
        }
        // s1·s2 commutes with the measured charge, so it survives; dividing
        // out the new (j,k) stabilizer leaves the new (p,q) stabilizer.
        let rest = measured.multiply(&s1.multiply(&s2)?)?;
        let rest_obs = ChargeObservable::from_operator(&rest)?;
        debug_assert_eq!((rest_obs.lo, rest_obs.hi), (p.min(q), p.max(q)));
        let m = ChargeObservable::from_operator(&measured)?;
        let mut pairs: Vec<MatchedPair> = self
            .pairs
            .iter()
            .filter(|r| ![j, k].contains(&r.j) && ![j, k].contains(&r.k))
            .copied()
            .collect();
        pairs.push(MatchedPair {
            j: m.lo,
            k: m.hi,
            sign: m.sign,
        });
        pairs.push(MatchedPair {
            j: rest_obs.lo,
            k: rest_obs.hi,
            sign: rest_obs.sign,
        });
        Self::from_pairs(self.n_pairs, pairs)
    }

    /// Measures `i c_j c_k`; the outcome is a fair coin unless `j`, `k` are matched.
    pub fn measure_pair<R: Rng + ?Sized>(&self, j: usize, k: usize, coin: &mut R) -> Result<(i8, Self)> {
        let e = self.charge_expectation(j, k)?;
        let outcome = if e != 0 {
            e
        } else if coin.gen::<f64>() < 0.5 {
            1
        } else {
            -1
        };
        Ok((outcome, self.project(j, k, outcome)?))
    }

    /// Measures a Hermitian weight-two observable `±i c_j c_k`.
    pub fn measure_observable<R: Rng + ?Sized>(&self, op: &MajoranaString, coin: &mut R) -> Result<(i8, Self)> {
        let obs = ChargeObservable::from_operator(op)?;
        let (m, next) = self.measure_pair(obs.lo, obs.hi, coin)?;
        Ok((m * obs.sign, next))
    }

    /// `<s>` for a physical Hermitian string: `±1` if `±s` is in the
    /// stabilizer group, otherwise `0`.
    pub fn expectation(&self, s: &MajoranaString) -> Result<i8> {
        if s.n_modes() != self.n_modes() {
            bail!(Dimension, "operator on {} modes, state on {}", s.n_modes(), self.n_modes());
        }
        if !s.is_physical() || !s.is_hermitian() {
            bail!(Argument, "`{s}` is not a physical Hermitian operator");
        }
        let mask = s.support_mask();
        let mut product = MajoranaString::identity(self.n_modes())?;
        for p in &self.pairs {
            let pm = (1u64 << (p.j - 1)) | (1u64 << (p.k - 1));
            match mask & pm {
                0 => {}
                x if x == pm => product = product.multiply(&p.operator(self.n_modes())?)?,
                _ => return Ok(0),
            }
        }
        if product == *s {
            Ok(1)
        } else if product.negate() == *s {
            Ok(-1)
        } else {
            Err(Error::Consistency(format!("stabilizer product `{product}` vs `{s}`")))
        }
    }

    /// Measures one row/column of a magic-square table: the two weight-two
    /// observables are measured and the weight-four one is inferred as their
    /// product. Outcomes are returned in table order.
    pub fn measure_setting<R: Rng + ?Sized>(&self, triple: &[MajoranaString; 3], coin: &mut R) -> Result<([i8; 3], Self)> {
        let plan = SettingPlan::new(triple)?;
        let mut state = self.clone();
        let mut out = [0i8; 3];
        for &idx in &plan.measured {
            let (m, next) = state.measure_observable(&triple[idx], coin)?;
            out[idx] = m;
            state = next;
        }
        out[plan.inferred] = plan.relative_sign * out[plan.measured[0]] * out[plan.measured[1]];
        Ok((out, state))
    }
}

/// Which entries of a setting are measured and how the third is inferred.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SettingPlan {
    pub measured: [usize; 2],
    pub inferred: usize,
    /// `triple[inferred] = relative_sign · triple[measured[0]] · triple[measured[1]]`.
    pub relative_sign: i8,
}

impl SettingPlan {
    pub fn new(triple: &[MajoranaString; 3]) -> Result<Self> {
        let heavy: Vec<usize> = (0..3).filter(|&i| triple[i].weight() != 2).collect();
        if heavy.len() != 1 {
            bail!(Argument, "a setting needs exactly one inferred (weight > 2) entry");
        }
        let inferred = heavy[0];
        let measured: Vec<usize> = (0..3).filter(|&i| i != inferred).collect();
        let (a, b) = (&triple[measured[0]], &triple[measured[1]]);
        ChargeObservable::from_operator(a)?;
        ChargeObservable::from_operator(b)?;
        if !a.commutes(b)? {
            bail!(Argument, "`{a}` and `{b}` do not commute");
        }
        let product = a.multiply(b)?;
        let relative_sign = if product == triple[inferred] {
            1
        } else if product.negate() == triple[inferred] {
            -1
        } else {
            bail!(Argument, "`{}` is not ± the product of `{a}` and `{b}`", triple[inferred]);
        };
        Ok(Self {
            measured: [measured[0], measured[1]],
            inferred,
            relative_sign,
        })
    }
}

impl Backend for AccessibleState {
    fn n_modes(&self) -> usize {
        AccessibleState::n_modes(self)
    }

    fn braid(&mut self, j: usize, k: usize) -> Result<()> {
        *self = AccessibleState::braid(self, j, k)?;
        Ok(())
    }

    fn plus_probability(&self, j: usize, k: usize) -> Result<f64> {
        Ok(crate::prob::to_f64(&self.outcome_probability(j, k, 1)?))
    }

    fn condition(&mut self, j: usize, k: usize, outcome: i8) -> Result<()> {
        *self = self.project(j, k, outcome)?;
        Ok(())
    }
}

impl fmt::Display for AccessibleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, p) in self.pairs.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({},{},{:+})", p.j, p.k, p.sign)?;
        }
        Ok(())
    }
}

impl FromStr for AccessibleState {
    type Err = Error;

    /// Parses `"(1,2,+1) (3,4,-1)"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for token in s.split_whitespace() {
            let inner = token
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("expected `(j,k,sign)`, got `{token}`")))?;
            let fields: Vec<&str> = inner.split(',').collect();
            if fields.len() != 3 {
                bail!(Parse, "expected three fields in `{token}`");
            }
            let num = |x: &str| x.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad number `{x}`")));
            let (j, k, sign) = (num(fields[0])?, num(fields[1])?, num(fields[2])?);
            if j < 1 || k < 1 {
                bail!(Parse, "modes are 1-based in `{token}`");
            }
            pairs.push(MatchedPair {
                j: j as usize,
                k: k as usize,
                sign: sign as i8,
            });
        }
        if pairs.is_empty() {
            bail!(Parse, "empty state");
        }
        Self::from_pairs(pairs.len(), pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(text: &str) -> AccessibleState {
        text.parse().unwrap()
    }

    #[test]
    fn init_examples() {
        assert_eq!(AccessibleState::init(1).unwrap(), state("(1,2,+1)"));
        let five = AccessibleState::init(5).unwrap();
        assert_eq!(five.n_modes(), 10);
        assert_eq!(five.pairs().len(), 5);
        let two = AccessibleState::init(2).unwrap();
        let g = MajoranaString::pair(4, 1, 2).unwrap();
        assert_eq!(two.expectation(&g).unwrap(), 1);
        assert!(matches!(AccessibleState::init(0), Err(Error::Argument(_))));
    }

    #[test]
    fn braid_examples() {
        let s = AccessibleState::init(2).unwrap();
        assert_eq!(s.braid(1, 2).unwrap(), s);
        assert_eq!(s.braid(2, 3).unwrap(), state("(1,3,+1) (2,4,-1)"));
        assert!(s.braid(2, 2).is_err());
        assert!(s.braid(3, 2).is_err());
        assert!(s.braid(1, 5).is_err());
    }

    #[test]
    fn four_braids_restore_the_state() {
        let s = AccessibleState::init(3).unwrap().braid(2, 3).unwrap();
        let twice = s.braid(2, 5).unwrap().braid(2, 5).unwrap();
        // double exchange negates c_2 and c_5
        let negated = ModeMap::braid(6, 2, 5).unwrap().then(&ModeMap::braid(6, 2, 5).unwrap()).unwrap();
        assert_eq!(negated.image(2), (true, 2));
        assert_eq!(negated.image(5), (true, 5));
        assert_eq!(twice, s.apply_map(&negated).unwrap());
        let four = twice.braid(2, 5).unwrap().braid(2, 5).unwrap();
        assert_eq!(four, s);
    }

    #[test]
    fn measuring_a_stabilizer_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = AccessibleState::init(1).unwrap();
        let (m, next) = s.measure_pair(1, 2, &mut rng).unwrap();
        assert_eq!(m, 1);
        assert_eq!(next, s);
        // and in the reversed operator order
        let (m, _) = s.measure_pair(2, 1, &mut rng).unwrap();
        assert_eq!(m, -1);
    }

    #[test]
    fn measuring_across_pairs_is_a_fair_coin() {
        let s = AccessibleState::init(2).unwrap();
        assert_eq!(s.outcome_probability(2, 3, 1).unwrap(), half());
        assert_eq!(s.outcome_probability(2, 3, -1).unwrap(), half());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let plus = (0..4000).filter(|_| s.measure_pair(2, 3, &mut rng).unwrap().0 == 1).count();
        assert!((plus as f64 / 4000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn post_measurement_pairing() {
        let s = AccessibleState::init(2).unwrap();
        let plus = s.project(2, 3, 1).unwrap();
        // (i c1c2)(i c3c4) = -c1c2c3c4 must remain; with i c2c3 = +1 this
        // forces i c1c4 = +1
        assert_eq!(plus, state("(1,4,+1) (2,3,+1)"));
        let minus = s.project(2, 3, -1).unwrap();
        assert_eq!(minus, state("(1,4,-1) (2,3,-1)"));
        let total = MajoranaString::pair(4, 1, 2)
            .unwrap()
            .multiply(&MajoranaString::pair(4, 3, 4).unwrap())
            .unwrap();
        assert_eq!(plus.expectation(&total).unwrap(), 1);
        assert_eq!(minus.expectation(&total).unwrap(), 1);
        assert!(matches!(s.project(1, 2, -1), Err(Error::Argument(_))));
    }

    #[test]
    fn remeasurement_repeats() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = AccessibleState::init(3).unwrap().braid(2, 5).unwrap();
        for _ in 0..50 {
            let (m1, next) = s.measure_pair(1, 6, &mut rng).unwrap();
            let (m2, again) = next.measure_pair(1, 6, &mut rng).unwrap();
            assert_eq!(m1, m2);
            assert_eq!(next, again);
        }
    }

    #[test]
    fn expectation_examples() {
        let s = AccessibleState::init(2).unwrap();
        let prod = MajoranaString::pair(4, 1, 2)
            .unwrap()
            .multiply(&MajoranaString::pair(4, 3, 4).unwrap())
            .unwrap();
        assert_eq!(s.expectation(&prod).unwrap(), 1);
        assert_eq!(s.expectation(&MajoranaString::pair(4, 2, 3).unwrap()).unwrap(), 0);
        // singlet flavour: (i a1 a2)(i b1 b2) on two shared pairs
        let shared = AccessibleState::canonical_shared(2).unwrap();
        let local = MajoranaString::pair(4, 1, 2)
            .unwrap()
            .multiply(&MajoranaString::pair(4, 3, 4).unwrap())
            .unwrap();
        assert_eq!(shared.expectation(&local).unwrap(), -1);
        assert!(shared.expectation(&MajoranaString::mode(4, 1).unwrap()).is_err());
        assert!(shared.expectation(&MajoranaString::product(4, Phase::ONE, &[1, 2]).unwrap()).is_err());
    }

    #[test]
    fn stabilizer_group_has_two_to_the_n_commuting_elements() {
        let s = AccessibleState::init(3).unwrap().braid(1, 4).unwrap().braid(2, 6).unwrap();
        let group = s.stabilizer_group();
        assert_eq!(group.len(), 8);
        for a in &group {
            assert_eq!(s.expectation(a).unwrap(), 1);
            for b in &group {
                assert!(a.commutes(b).unwrap());
            }
        }
    }

    #[test]
    fn rejects_bad_matchings() {
        assert!(AccessibleState::from_pairs(2, vec![MatchedPair { j: 1, k: 2, sign: 1 }]).is_err());
        assert!("(1,2,+1) (2,3,+1)".parse::<AccessibleState>().is_err());
        assert!("(1,2,+2)".parse::<AccessibleState>().is_err());
        assert!("(1,2)".parse::<AccessibleState>().is_err());
    }

    #[test]
    fn text_and_json_forms() {
        let s = AccessibleState::init(3).unwrap().braid(2, 5).unwrap();
        assert_eq!(s.to_string(), "(1,5,+1) (2,6,-1) (3,4,+1)");
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"n_pairs":3,"pairs":[[1,5,1],[2,6,-1],[3,4,1]]}"#);
        assert_eq!(serde_json::from_str::<AccessibleState>(&json).unwrap(), s);
        assert_eq!(s.to_string().parse::<AccessibleState>().unwrap(), s);
        assert!(serde_json::from_str::<AccessibleState>(r#"{"n_pairs":2,"pairs":[[1,2,1],[1,3,1]]}"#).is_err());
    }

    #[test]
    fn setting_plan_rejects_inconsistent_triples() {
        let n = 10;
        let a = MajoranaString::pair(n, 3, 4).unwrap();
        let b = MajoranaString::pair(n, 1, 5).unwrap();
        let good = a.multiply(&b).unwrap();
        assert!(SettingPlan::new(&[good, a, b]).is_ok());
        let bad = MajoranaString::product(n, Phase::ONE, &[1, 2, 3, 4]).unwrap();
        assert!(SettingPlan::new(&[bad, a, b]).is_err());
        assert!(SettingPlan::new(&[a, a, b]).is_err());
    }

    #[test]
    fn braids_preserve_total_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 8;
        let full = MajoranaString::product(n, Phase::ONE, &(1..=n).collect::<Vec<_>>()).unwrap();
        let mut map = ModeMap::identity(n).unwrap();
        let mut s = AccessibleState::init(4).unwrap();
        for _ in 0..200 {
            let j = rng.gen_range(1..n);
            let k = rng.gen_range(j + 1..=n);
            map = map.then(&ModeMap::braid(n, j, k).unwrap()).unwrap();
            s = s.braid(j, k).unwrap();
        }
        assert_eq!(map.apply(&full).unwrap(), full);
        // the product of all generators is ± the total product and never changes sign
        let product = s
            .generators()
            .iter()
            .fold(MajoranaString::identity(n).unwrap(), |acc, g| acc.multiply(g).unwrap());
        let initial = AccessibleState::init(4)
            .unwrap()
            .generators()
            .iter()
            .fold(MajoranaString::identity(n).unwrap(), |acc, g| acc.multiply(g).unwrap());
        assert_eq!(product, initial);
        assert_eq!(s, AccessibleState::init(4).unwrap().apply_map(&map).unwrap());
    }
}
