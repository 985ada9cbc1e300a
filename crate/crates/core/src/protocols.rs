//! Teleportation of four input modes over four shared pairs, and dense
//! coding of two bits over three pairs with two transmitted modes.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::algebra::MajoranaString;
use crate::error::{bail, Error, Result};
use crate::games::measurement_distribution;
use crate::prob::{exact_dyadic, Rational};
use crate::program::{stream_rng, Backend, LogEntry};
use crate::stabilizer::{AccessibleState, ChargeObservable, MatchedPair};

// ---- teleportation: a_l = c_l (l = 1..8), b_l = c_{8+l} (l = 1..4)

pub const TELEPORT_PAIRS: usize = 6;
const TELEPORT_MODES: usize = 12;

fn a(l: usize) -> usize {
    l
}

fn b(l: usize) -> usize {
    8 + l
}

/// How Alice prepares the input register before the protocol starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputScenario {
    /// (I): braid `a6`, `a7`.
    Braided,
    /// (II): leave the input untouched.
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeleportSetup {
    pub input_scenario: InputScenario,
}

impl TeleportSetup {
    pub fn new(input_scenario: InputScenario) -> Self {
        Self { input_scenario }
    }

    /// Shared pairs `i a_l b_l`, input `i a5 a6`, `i a7 a8`, then the input
    /// braid for scenario (I).
    pub fn prepare(&self) -> Result<AccessibleState> {
        let mut pairs: Vec<MatchedPair> = (1..=4).map(|l| MatchedPair { j: a(l), k: b(l), sign: 1 }).collect();
        pairs.push(MatchedPair { j: a(5), k: a(6), sign: 1 });
        pairs.push(MatchedPair { j: a(7), k: a(8), sign: 1 });
        let state = AccessibleState::from_pairs(TELEPORT_PAIRS, pairs)?;
        match self.input_scenario {
            InputScenario::Braided => state.braid(a(6), a(7)),
            InputScenario::Plain => Ok(state),
        }
    }
}

fn charge(j: usize, k: usize) -> Result<ChargeObservable> {
    ChargeObservable::from_operator(&MajoranaString::pair(TELEPORT_MODES, j, k)?)
}

/// Alice's four cross observables `i a5 a1`, `i a6 a2`, `i a7 a3`, `i a8 a4`.
pub fn alice_observables() -> Result<[ChargeObservable; 4]> {
    Ok([charge(a(5), a(1))?, charge(a(6), a(2))?, charge(a(7), a(3))?, charge(a(8), a(4))?])
}

/// Bob's `i b1 b2`, `i b3 b4`.
pub fn bob_observables() -> Result<[ChargeObservable; 2]> {
    Ok([charge(b(1), b(2))?, charge(b(3), b(4))?])
}

/// The input observables `i a5 a6`, `i a7 a8`.
pub fn input_observables() -> Result<[ChargeObservable; 2]> {
    Ok([charge(a(5), a(6))?, charge(a(7), a(8))?])
}

/// Bob's corrected outcomes are `s1 m1 m2 r1` and `s2 m3 m4 r2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CorrectionRule {
    pub signs: [i8; 2],
}

impl CorrectionRule {
    pub fn apply(&self, message: &[i8; 4], raw: &[i8; 2]) -> [i8; 2] {
        [
            self.signs[0] * message[0] * message[1] * raw[0],
            self.signs[1] * message[2] * message[3] * raw[1],
        ]
    }
}

/// Finds `s` with `(i a_p a_x)(i a_q a_y)(i b_x b_y) = s (i a_p a_q)(i a_x b_x)(i a_y b_y)`
/// for each half of the register. The shared-pair factors have value `+1`
/// and commute with the input observable, so `s m m' r` has the statistics
/// of the input observable.
pub fn derive_correction() -> Result<CorrectionRule> {
    let n = TELEPORT_MODES;
    let mut signs = [0i8; 2];
    for (half, (p, q, x, y)) in [(5, 6, 1, 2), (7, 8, 3, 4)].into_iter().enumerate() {
        let measured = MajoranaString::pair(n, a(p), a(x))?
            .multiply(&MajoranaString::pair(n, a(q), a(y))?)?
            .multiply(&MajoranaString::pair(n, b(x), b(y))?)?;
        let target = MajoranaString::pair(n, a(p), a(q))?
            .multiply(&MajoranaString::pair(n, a(x), b(x))?)?
            .multiply(&MajoranaString::pair(n, a(y), b(y))?)?;
        signs[half] = if measured == target {
            1
        } else if measured == target.negate() {
            -1
        } else {
            return Err(Error::Consistency(format!("`{measured}` is not ± `{target}`")));
        };
    }
    Ok(CorrectionRule { signs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeleportRun {
    pub message: [i8; 4],
    pub bob_raw: [i8; 2],
    pub bob_corrected: [i8; 2],
    pub log: Vec<LogEntry>,
}

/// Runs the protocol on an already prepared 12-mode state. Nothing here
/// depends on how the input was prepared.
pub fn run_teleport<B: Backend, R: Rng + ?Sized>(prepared: &B, rng: &mut R) -> Result<TeleportRun> {
    if prepared.n_modes() != TELEPORT_MODES {
        bail!(Argument, "teleportation runs on {TELEPORT_MODES} modes, got {}", prepared.n_modes());
    }
    let rule = derive_correction()?;
    let mut state = prepared.clone();
    let mut log = Vec::new();
    let mut message = [0i8; 4];
    for (slot, obs) in alice_observables()?.iter().enumerate() {
        message[slot] = state.measure(obs.lo, obs.hi, rng)? * obs.sign;
        log.push(LogEntry {
            step: log.len() + 1,
            operator: operator_text(obs),
            outcome: Some(message[slot]),
        });
    }
    let mut raw = [0i8; 2];
    for (slot, obs) in bob_observables()?.iter().enumerate() {
        raw[slot] = state.measure(obs.lo, obs.hi, rng)? * obs.sign;
        log.push(LogEntry {
            step: log.len() + 1,
            operator: operator_text(obs),
            outcome: Some(raw[slot]),
        });
    }
    Ok(TeleportRun {
        message,
        bob_raw: raw,
        bob_corrected: rule.apply(&message, &raw),
        log,
    })
}

fn operator_text(obs: &ChargeObservable) -> String {
    let s = MajoranaString::pair(TELEPORT_MODES, obs.lo, obs.hi).expect("valid pair");
    if obs.sign > 0 { s } else { s.negate() }.to_string()
}

/// Joint distribution of `(message, raw Bob outcomes)`.
pub fn observation_distribution<B: Backend>(prepared: &B) -> Result<BTreeMap<([i8; 4], [i8; 2]), f64>> {
    let [m1, m2, m3, m4] = alice_observables()?;
    let [r1, r2] = bob_observables()?;
    let mut out = BTreeMap::new();
    for (o, p) in measurement_distribution(prepared, &[m1, m2, m3, m4, r1, r2])? {
        *out.entry(([o[0], o[1], o[2], o[3]], [o[4], o[5]])).or_insert(0.0) += p;
    }
    Ok(out)
}

pub fn corrected_distribution<B: Backend>(prepared: &B) -> Result<BTreeMap<[i8; 2], f64>> {
    let rule = derive_correction()?;
    let mut out = BTreeMap::new();
    for ((m, r), p) in observation_distribution(prepared)? {
        *out.entry(rule.apply(&m, &r)).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Outcomes of measuring the input observables directly.
pub fn direct_distribution<B: Backend>(prepared: &B) -> Result<BTreeMap<[i8; 2], f64>> {
    let mut out = BTreeMap::new();
    for (o, p) in measurement_distribution(prepared, &input_observables()?)? {
        *out.entry([o[0], o[1]]).or_insert(0.0) += p;
    }
    Ok(out)
}

pub fn total_variation<K: Ord + Clone>(x: &BTreeMap<K, f64>, y: &BTreeMap<K, f64>) -> f64 {
    let mut keys: Vec<&K> = x.keys().chain(y.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (x.get(k).unwrap_or(&0.0) - y.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

/// Exact total variation for dyadic distributions.
pub fn exact_total_variation<K: Ord + Clone>(x: &BTreeMap<K, f64>, y: &BTreeMap<K, f64>) -> Result<Rational> {
    let exact = |v: f64| exact_dyadic(v, 40).ok_or_else(|| Error::Consistency(format!("{v} is not dyadic")));
    let mut keys: Vec<&K> = x.keys().chain(y.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut sum = Rational::from_integer(0);
    for k in keys {
        let d = exact(*x.get(k).unwrap_or(&0.0))? - exact(*y.get(k).unwrap_or(&0.0))?;
        sum += if d < Rational::from_integer(0) { -d } else { d };
    }
    Ok(sum / 2)
}

/// Best probability of guessing the scenario from everything Bob sees,
/// with equal priors: `(1 + TV) / 2`.
pub fn discrimination_probability<B: Backend>(braided: &B, plain: &B) -> Result<f64> {
    Ok(0.5 * (1.0 + total_variation(&observation_distribution(braided)?, &observation_distribution(plain)?)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoSampleTest {
    pub trials: u64,
    pub teleported: BTreeMap<String, u64>,
    pub direct: BTreeMap<String, u64>,
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

fn outcome_key(o: &[i8; 2]) -> String {
    format!("{:+},{:+}", o[0], o[1])
}

/// Chi-square two-sample test between `trials` teleported outcomes and
/// `trials` direct input measurements. Teleport run `t` uses stream `t` of
/// `seed`, direct sample `t` uses stream `trials + t`.
pub fn sampled_two_sample_test(setup: &TeleportSetup, trials: u64, seed: u64) -> Result<TwoSampleTest> {
    let prepared = setup.prepare()?;
    let inputs = input_observables()?;
    let tally = |results: Vec<[i8; 2]>| {
        let mut m = BTreeMap::new();
        for r in results {
            *m.entry(outcome_key(&r)).or_insert(0u64) += 1;
        }
        m
    };
    let teleported = (0..trials)
        .into_par_iter()
        .map(|t| Ok(run_teleport(&prepared, &mut stream_rng(seed, t))?.bob_corrected))
        .collect::<Result<Vec<_>>>()?;
    let direct = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, trials + t);
            let mut s = prepared.clone();
            let x = s.measure(inputs[0].lo, inputs[0].hi, &mut rng)? * inputs[0].sign;
            let y = s.measure(inputs[1].lo, inputs[1].hi, &mut rng)? * inputs[1].sign;
            Ok([x, y])
        })
        .collect::<Result<Vec<_>>>()?;
    let (teleported, direct) = (tally(teleported), tally(direct));
    let (statistic, dof) = chi_square_two_sample(&teleported, &direct);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).map_err(|e| Error::Argument(e.to_string()))?.cdf(statistic)
    };
    Ok(TwoSampleTest {
        trials,
        teleported,
        direct,
        statistic,
        degrees_of_freedom: dof,
        p_value,
    })
}

/// Homogeneity statistic for two equal-size samples; categories empty in
/// both are dropped.
pub fn chi_square_two_sample(x: &BTreeMap<String, u64>, y: &BTreeMap<String, u64>) -> (f64, usize) {
    let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
    keys.sort();
    keys.dedup();
    let (nx, ny) = (x.values().sum::<u64>() as f64, y.values().sum::<u64>() as f64);
    let mut stat = 0.0;
    let mut used = 0usize;
    for k in keys {
        let (a, b) = (*x.get(k).unwrap_or(&0) as f64, *y.get(k).unwrap_or(&0) as f64);
        if a + b == 0.0 {
            continue;
        }
        used += 1;
        let (ea, eb) = ((a + b) * nx / (nx + ny), (a + b) * ny / (nx + ny));
        stat += (a - ea).powi(2) / ea + (b - eb).powi(2) / eb;
    }
    (stat, used.saturating_sub(1))
}

// ---- dense coding: a_l = c_l (l = 1..4), b_l = c_{4+l} (l = 1, 2)

pub const DENSE_PAIRS: usize = 3;
const DENSE_MODES: usize = 6;
const ALICE_MODES: [usize; 4] = [1, 2, 3, 4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseCodeSetup;

impl DenseCodeSetup {
    /// `i a1 b1`, `i a2 b2`, `i a3 a4`.
    pub fn prepare(&self) -> Result<AccessibleState> {
        AccessibleState::from_pairs(
            DENSE_PAIRS,
            vec![
                MatchedPair { j: 1, k: 5, sign: 1 },
                MatchedPair { j: 2, k: 6, sign: 1 },
                MatchedPair { j: 3, k: 4, sign: 1 },
            ],
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenseEncoding {
    pub state: AccessibleState,
    pub braids: Vec<LogEntry>,
}

/// Modes Alice negates for `(γ1, γ2)`: `a1` if `γ1`, `a2` if `γ2`, `a3` if
/// `γ1 + γ2` is odd. `a4` is never touched.
pub fn flip_pattern(bits: [u8; 2]) -> [bool; 4] {
    let (g1, g2) = (bits[0] == 1, bits[1] == 1);
    [g1, g2, g1 ^ g2, false]
}

/// The double exchanges realizing `flip_pattern`: `(a1, a3)` for `γ1` and
/// `(a2, a3)` for `γ2`, with `a3` absorbing the extra sign.
pub fn flip_braids(bits: [u8; 2]) -> Vec<(usize, usize)> {
    let mut word = Vec::new();
    for (bit, mode) in [(bits[0], 1), (bits[1], 2)] {
        if bit == 1 {
            word.push((mode, 3));
            word.push((mode, 3));
        }
    }
    word
}

pub fn dense_encode(setup: &DenseCodeSetup, bits: [u8; 2]) -> Result<DenseEncoding> {
    if bits.iter().any(|&x| x > 1) {
        bail!(Argument, "message bits must be 0 or 1, got {bits:?}");
    }
    let mut state = setup.prepare()?;
    let mut braids = Vec::new();
    for (j, k) in flip_braids(bits) {
        state = state.braid(j, k)?;
        braids.push(LogEntry {
            step: braids.len() + 1,
            operator: format!("braid(a{j},a{k})"),
            outcome: None,
        });
    }
    // the signs must match the flip pattern; a pattern with an odd number
    // of flips has no braid realization
    let flips = flip_pattern(bits);
    if flips.iter().filter(|&&f| f).count() % 2 == 1 {
        return Err(Error::Consistency(format!("flip pattern {flips:?} has odd parity")));
    }
    let expected = |j: usize, k: usize, f: bool| MatchedPair {
        j,
        k,
        sign: if f { -1 } else { 1 },
    };
    let want = AccessibleState::from_pairs(
        DENSE_PAIRS,
        vec![expected(1, 5, flips[0]), expected(2, 6, flips[1]), expected(3, 4, flips[2] ^ flips[3])],
    )?;
    if state != want {
        return Err(Error::Consistency(format!("encoded state {state} differs from {want}")));
    }
    Ok(DenseEncoding { state, braids })
}

/// Whether every logged braid acts on Alice's modes only.
pub fn braids_are_local(log: &[LogEntry]) -> bool {
    log.iter().all(|e| {
        let modes: Vec<usize> = e
            .operator
            .trim_start_matches("braid(")
            .trim_end_matches(')')
            .split(',')
            .filter_map(|t| t.trim().strip_prefix('a')?.parse().ok())
            .collect();
        modes.len() == 2 && modes.iter().all(|m| ALICE_MODES.contains(m))
    })
}

/// Bob, holding `a1`, `a2`, `b1`, `b2`, measures `i a1 b1` and `i a2 b2`.
pub fn dense_decode(state: &AccessibleState) -> Result<[u8; 2]> {
    if state.n_modes() != DENSE_MODES {
        bail!(Argument, "dense coding uses {DENSE_MODES} modes, got {}", state.n_modes());
    }
    let mut bits = [0u8; 2];
    for (slot, (j, k)) in [(1, 5), (2, 6)].into_iter().enumerate() {
        bits[slot] = match state.charge_expectation(j, k)? {
            1 => 0,
            -1 => 1,
            _ => bail!(State, "i a{} b{} is not determined in {state}", slot + 1, slot + 1),
        };
    }
    Ok(bits)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityReport {
    pub transmitted_modes: usize,
    pub ancilla_modes: usize,
    pub preparations: Vec<String>,
    pub distinguishable_set: Vec<String>,
    pub bits: f64,
}

/// State of the transmitted modes `1..=t`: the records internal to them,
/// and the modes whose partner stayed with Alice (maximally mixed).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Reduced {
    pairs: Vec<MatchedPair>,
    unpaired: Vec<usize>,
}

impl Reduced {
    fn of(state: &AccessibleState, t: usize) -> Self {
        let mut pairs = Vec::new();
        let mut unpaired = Vec::new();
        for p in state.pairs() {
            match (p.j <= t, p.k <= t) {
                (true, true) => pairs.push(*p),
                (true, false) => unpaired.push(p.j),
                (false, true) => unpaired.push(p.k),
                _ => {}
            }
        }
        unpaired.sort();
        Self { pairs, unpaired }
    }

    fn group(&self, t: usize) -> Vec<MajoranaString> {
        let mut group = vec![MajoranaString::identity(t).expect("small")];
        for p in &self.pairs {
            let g = p.operator(t).expect("transmitted modes");
            let extra: Vec<_> = group.iter().map(|s| s.multiply(&g).expect("same space")).collect();
            group.extend(extra);
        }
        group
    }

    fn label(&self) -> String {
        let mut parts: Vec<String> = self.pairs.iter().map(|p| format!("({},{},{:+})", p.j, p.k, p.sign)).collect();
        if !self.unpaired.is_empty() {
            parts.push(format!("mixed{:?}", self.unpaired));
        }
        parts.join(" ")
    }
}

/// Perfectly distinguishable iff some operator stabilizes one with `+1` and
/// the other with `-1`.
fn orthogonal(x: &Reduced, y: &Reduced, t: usize) -> bool {
    let gy = y.group(t);
    x.group(t).iter().any(|s| gy.contains(&s.negate()))
}

/// States of `modes` transmitted modes that Alice can prepare alone, using
/// braids and charge measurements on them together with `ancilla` local
/// modes she keeps, and the largest set of them that can be told apart with
/// certainty.
pub fn unassisted_capacity_check(modes: usize, ancilla: usize) -> Result<CapacityReport> {
    if modes % 2 == 1 || ancilla % 2 == 1 || modes + ancilla > 8 {
        bail!(Argument, "mode counts must be even with at most 8 in total, got {modes} + {ancilla}");
    }
    if modes == 0 {
        return Ok(CapacityReport {
            transmitted_modes: 0,
            ancilla_modes: ancilla,
            preparations: vec!["1".into()],
            distinguishable_set: vec!["1".into()],
            bits: 0.0,
        });
    }
    let total = modes + ancilla;
    let start = AccessibleState::init(total / 2)?;
    let mut seen = std::collections::BTreeSet::from([start.to_string()]);
    let mut frontier = vec![start.clone()];
    let mut reduced = std::collections::BTreeSet::from([Reduced::of(&start, modes)]);
    while let Some(s) = frontier.pop() {
        for j in 1..=total {
            for k in j + 1..=total {
                let mut next = vec![s.braid(j, k)?];
                for outcome in [1, -1] {
                    if s.outcome_probability(j, k, outcome)? > Rational::from_integer(0) {
                        next.push(s.project(j, k, outcome)?);
                    }
                }
                for t in next {
                    if seen.insert(t.to_string()) {
                        reduced.insert(Reduced::of(&t, modes));
                        frontier.push(t);
                    }
                }
            }
        }
    }
    let preps: Vec<Reduced> = reduced.into_iter().collect();
    let n = preps.len();
    if n > 24 {
        bail!(Resource, "{n} preparations is too many for the clique search");
    }
    let mut best: Vec<usize> = Vec::new();
    for subset in 1u32..1 << n {
        if subset.count_ones() as usize <= best.len() {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| subset >> i & 1 == 1).collect();
        if members
            .iter()
            .enumerate()
            .all(|(x, &i)| members[x + 1..].iter().all(|&j| orthogonal(&preps[i], &preps[j], modes)))
        {
            best = members;
        }
    }
    Ok(CapacityReport {
        transmitted_modes: modes,
        ancilla_modes: ancilla,
        preparations: preps.iter().map(Reduced::label).collect(),
        bits: (best.len() as f64).log2(),
        distinguishable_set: best.iter().map(|&i| preps[i].label()).collect(),
    })
}
