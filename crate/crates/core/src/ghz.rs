//! Overlap parities of accessible stabilizer groups and the resulting
//! obstruction to any local encoding of a three-party GHZ state.
//!
//! For a group generated by disjoint pair operators every element has a
//! support that is a union of pairs, so any two or three elements share an
//! even number of modes. The GHZ stabilizers `X1 Z2 Z3`, `Z1 X2 Z3`, `Z1 Z2 X3`
//! share `Σ_j |X_j ∩ Z_j|` modes, which is odd for every valid encoding.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{MajoranaString, Phase};
use crate::error::{bail, Result};
use crate::program::stream_rng;
use crate::stabilizer::AccessibleState;

/// Largest pair count accepted by [`random_accessible_scan`].
pub const MAX_SCAN_PAIRS: usize = 8;
/// Violations kept verbatim in a report; the rest are only counted.
pub const MAX_LISTED_VIOLATIONS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub operators: Vec<String>,
    pub overlap: usize,
}

fn pair_scan(group: &[MajoranaString], limit: usize, out: &mut Vec<Violation>) -> u64 {
    let mut count = 0;
    for (i, a) in group.iter().enumerate() {
        for b in &group[i + 1..] {
            let ov = (a.support_mask() & b.support_mask()).count_ones() as usize;
            if ov % 2 == 1 {
                count += 1;
                if out.len() < limit {
                    out.push(Violation {
                        operators: vec![a.to_string(), b.to_string()],
                        overlap: ov,
                    });
                }
            }
        }
    }
    count
}

fn triple_scan(group: &[MajoranaString], limit: usize, out: &mut Vec<Violation>) -> u64 {
    let masks: Vec<u64> = group.iter().map(|s| s.support_mask()).collect();
    let mut count = 0;
    for i in 0..masks.len() {
        for j in i + 1..masks.len() {
            let ab = masks[i] & masks[j];
            for k in j + 1..masks.len() {
                let ov = (ab & masks[k]).count_ones() as usize;
                if ov % 2 == 1 {
                    count += 1;
                    if out.len() < limit {
                        out.push(Violation {
                            operators: vec![group[i].to_string(), group[j].to_string(), group[k].to_string()],
                            overlap: ov,
                        });
                    }
                }
            }
        }
    }
    count
}

/// Property (i): every two elements share an even number of modes.
pub fn check_pair_parity(group: &[MajoranaString]) -> bool {
    pair_scan(group, 0, &mut Vec::new()) == 0
}

/// Property (ii): every three elements share an even number of modes.
pub fn check_triple_parity(group: &[MajoranaString]) -> bool {
    triple_scan(group, 0, &mut Vec::new()) == 0
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityReport {
    /// False when some pair of elements anticommutes; the group is then not
    /// a stabilizer group and the parities are reported anyway.
    pub commuting: bool,
    pub pair_parity: bool,
    pub triple_parity: bool,
    pub violations: Vec<Violation>,
}

pub fn parity_report(group: &[MajoranaString]) -> Result<ParityReport> {
    let mut commuting = true;
    for (i, a) in group.iter().enumerate() {
        for b in &group[i + 1..] {
            commuting &= a.commutes(b)?;
        }
    }
    let mut violations = Vec::new();
    let pairs = pair_scan(group, MAX_LISTED_VIOLATIONS, &mut violations);
    let triples = triple_scan(group, MAX_LISTED_VIOLATIONS, &mut violations);
    Ok(ParityReport {
        commuting,
        pair_parity: pairs == 0,
        triple_parity: triples == 0,
        violations,
    })
}

/// The group generated by `generators`, assumed independent and commuting.
pub fn full_group(generators: &[MajoranaString]) -> Result<Vec<MajoranaString>> {
    let Some(first) = generators.first() else {
        bail!(Argument, "empty generator list");
    };
    let mut group = vec![MajoranaString::identity(first.n_modes())?];
    for g in generators {
        let extra = group.iter().map(|s| s.multiply(g)).collect::<Result<Vec<_>>>()?;
        group.extend(extra);
    }
    Ok(group)
}

/// Local observables `X_j`, `Z_j` for each party of a GHZ encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EncodingCandidate {
    pub parties: Vec<Vec<usize>>,
    pub x: Vec<MajoranaString>,
    pub z: Vec<MajoranaString>,
}

fn hermitian_phase(weight: usize) -> Phase {
    if (weight * weight.saturating_sub(1) / 2).is_multiple_of(2) {
        Phase::ONE
    } else {
        Phase::I
    }
}

impl EncodingCandidate {
    /// `Z_j = i c_{3j} c_{3j+1}`, `X_j = i c_{3j} c_{3j+2}` for `m` parties.
    pub fn canonical(m: usize) -> Result<Self> {
        let n = 3 * m + 2;
        let mut c = Self {
            parties: Vec::new(),
            x: Vec::new(),
            z: Vec::new(),
        };
        for j in 1..=m {
            c.parties.push(vec![3 * j, 3 * j + 1, 3 * j + 2]);
            c.z.push(MajoranaString::pair(n, 3 * j, 3 * j + 1)?);
            c.x.push(MajoranaString::pair(n, 3 * j, 3 * j + 2)?);
        }
        Ok(c)
    }

    /// Builds the Hermitian strings on the given supports.
    pub fn from_supports(n_modes: usize, parties: Vec<Vec<usize>>, x: &[Vec<usize>], z: &[Vec<usize>]) -> Result<Self> {
        let build = |modes: &Vec<usize>| MajoranaString::product(n_modes, hermitian_phase(modes.len()), modes);
        Ok(Self {
            parties,
            x: x.iter().map(build).collect::<Result<_>>()?,
            z: z.iter().map(build).collect::<Result<_>>()?,
        })
    }

    pub fn n_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.parties.len();
        if m < 3 {
            bail!(Argument, "a GHZ encoding needs at least 3 parties, got {m}");
        }
        if self.x.len() != m || self.z.len() != m {
            bail!(Argument, "{m} parties but {} X and {} Z operators", self.x.len(), self.z.len());
        }
        let mut seen = 0u64;
        for (j, modes) in self.parties.iter().enumerate() {
            let mut mask = 0u64;
            for &mode in modes {
                if mode == 0 || mode > 64 {
                    bail!(Argument, "party {} lists invalid mode {mode}", j + 1);
                }
                mask |= 1 << (mode - 1);
            }
            if mask & seen != 0 {
                bail!(Argument, "party {} shares modes with an earlier party", j + 1);
            }
            seen |= mask;
            for (name, op) in [("X", &self.x[j]), ("Z", &self.z[j])] {
                if op.support_mask() & !mask != 0 {
                    bail!(Argument, "{name}_{} = `{op}` acts outside party {}'s modes", j + 1, j + 1);
                }
                if op.weight() % 2 == 1 || op.weight() == 0 {
                    bail!(
                        Argument,
                        "{name}_{} = `{op}` has weight {}, not a measurable even weight",
                        j + 1,
                        op.weight()
                    );
                }
                if !op.is_hermitian() {
                    bail!(Argument, "{name}_{} = `{op}` is not Hermitian", j + 1);
                }
            }
            if self.x[j].commutes(&self.z[j])? {
                bail!(Argument, "X_{} and Z_{} commute, so they do not encode a qubit", j + 1, j + 1);
            }
        }
        Ok(())
    }

    /// `K_a = X_a Π_{b≠a} Z_b`; for three parties these are `X1 Z2 Z3`,
    /// `Z1 X2 Z3`, `Z1 Z2 X3`.
    pub fn stabilizers(&self) -> Result<Vec<MajoranaString>> {
        let m = self.n_parties();
        (0..m)
            .map(|a| {
                (0..m).try_fold(MajoranaString::identity(self.x[0].n_modes())?, |acc, b| {
                    acc.multiply(if a == b { &self.x[b] } else { &self.z[b] })
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    /// `|X_j ∩ Z_j| mod 2` per party.
    pub anticomm_parity: Vec<u8>,
    /// `γ_1 + γ_2 + γ_3`.
    pub parity_sum: usize,
    pub stabilizers: Vec<String>,
    pub triple_overlap: usize,
    /// For three parties, whether `S''' = S'' S' S` with `S''' = -X1 X2 X3`.
    pub product_identity: Option<bool>,
    pub violates_triple_parity: bool,
    pub obstruction_holds: bool,
}

pub fn ghz_obstruction(candidate: &EncodingCandidate) -> Result<ObstructionReport> {
    candidate.validate()?;
    let gammas: Vec<u8> = candidate
        .x
        .iter()
        .zip(&candidate.z)
        .map(|(x, z)| x.overlap(z).map(|o| (o % 2) as u8))
        .collect::<Result<_>>()?;
    let parity_sum = gammas[..3].iter().map(|&g| g as usize).sum();
    let s = candidate.stabilizers()?;
    let triple_overlap = s[0].triple_overlap(&s[1], &s[2])?;
    let product_identity = if candidate.n_parties() == 3 {
        let xxx = candidate.x[0].multiply(&candidate.x[1])?.multiply(&candidate.x[2])?.negate();
        Some(s[2].multiply(&s[1])?.multiply(&s[0])? == xxx)
    } else {
        None
    };
    let violates = triple_overlap % 2 == 1;
    Ok(ObstructionReport {
        anticomm_parity: gammas,
        parity_sum,
        stabilizers: s.iter().map(|x| x.to_string()).collect(),
        triple_overlap,
        product_identity,
        violates_triple_parity: violates,
        obstruction_holds: violates && parity_sum % 2 == 1 && product_identity != Some(false),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EncodingScanReport {
    pub block_size: usize,
    /// Valid `(X, Z)` choices per party.
    pub local_choices: usize,
    /// Commuting `(X, Z)` choices rejected as not encoding a qubit.
    pub rejected_local_choices: usize,
    pub candidates_checked: u64,
    pub even_parity_candidates: u64,
    pub identity_failures: u64,
    pub verdict: String,
}

fn local_supports(block: usize, offset: usize) -> Vec<u64> {
    (0u64..1 << block)
        .filter(|m| matches!(m.count_ones(), 2 | 4))
        .map(|m| m << offset)
        .collect()
}

/// Every three-party encoding in which each party's `X` and `Z` are
/// Hermitian weight-2 or weight-4 strings on its own block of `block` modes
/// (`block ≤ 6`). Signs are fixed to the Hermitian phase: they change
/// neither overlaps nor the product identity. Smaller mode sets embed in
/// the block, so they are covered too.
pub fn exhaustive_encoding_scan(block: usize) -> Result<EncodingScanReport> {
    if !(2..=6).contains(&block) {
        bail!(Argument, "block size {block} outside 2..=6");
    }
    let n = 3 * block;
    let string = |mask: u64| MajoranaString::from_parts(n, hermitian_phase(mask.count_ones() as usize), mask);
    let mut parties: Vec<Vec<(MajoranaString, MajoranaString)>> = Vec::new();
    let mut rejected = 0;
    for p in 0..3 {
        let supports = local_supports(block, p * block);
        let mut valid = Vec::new();
        for &xs in &supports {
            for &zs in &supports {
                let (x, z) = (string(xs)?, string(zs)?);
                if x.commutes(&z)? {
                    rejected += 1;
                } else {
                    valid.push((x, z));
                }
            }
        }
        parties.push(valid);
    }
    let (even, failures) = parties[0]
        .par_iter()
        .map(|&(x1, z1)| {
            let mut even = 0u64;
            let mut failures = 0u64;
            for &(x2, z2) in &parties[1] {
                for &(x3, z3) in &parties[2] {
                    let s1 = x1.multiply(&z2)?.multiply(&z3)?;
                    let s2 = z1.multiply(&x2)?.multiply(&z3)?;
                    let s3 = z1.multiply(&z2)?.multiply(&x3)?;
                    if (s1.support_mask() & s2.support_mask() & s3.support_mask()).count_ones() % 2 == 0 {
                        even += 1;
                    }
                    if s3.multiply(&s2)?.multiply(&s1)? != x1.multiply(&x2)?.multiply(&x3)?.negate() {
                        failures += 1;
                    }
                }
            }
            Ok((even, failures))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let local = parties[0].len();
    let checked = (local as u64).pow(3);
    Ok(EncodingScanReport {
        block_size: block,
        local_choices: local,
        rejected_local_choices: rejected / 3,
        candidates_checked: checked,
        even_parity_candidates: even,
        identity_failures: failures,
        verdict: if even == 0 && failures == 0 {
            "obstruction holds".into()
        } else {
            "counterexample found".into()
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub checked: u64,
    pub pairs_checked: u64,
    pub triples_checked: u64,
    pub violation_count: u64,
    pub violations: Vec<Violation>,
    pub verdict: String,
}

impl ScanReport {
    fn empty() -> Self {
        Self {
            checked: 0,
            pairs_checked: 0,
            triples_checked: 0,
            violation_count: 0,
            violations: Vec::new(),
            verdict: String::new(),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.checked += other.checked;
        self.pairs_checked += other.pairs_checked;
        self.triples_checked += other.triples_checked;
        self.violation_count += other.violation_count;
        let room = MAX_LISTED_VIOLATIONS.saturating_sub(self.violations.len());
        self.violations.extend(other.violations.into_iter().take(room));
        self
    }

    fn finish(mut self) -> Self {
        self.verdict = if self.violation_count == 0 { "pass".into() } else { "fail".into() };
        self
    }
}

/// Checks properties (i) and (ii) on an explicit list of operators.
pub fn scan_group(group: &[MajoranaString]) -> ScanReport {
    let n = group.len() as u64;
    let mut violations = Vec::new();
    let count = pair_scan(group, MAX_LISTED_VIOLATIONS, &mut violations) + triple_scan(group, MAX_LISTED_VIOLATIONS, &mut violations);
    ScanReport {
        checked: 1,
        pairs_checked: n * n.saturating_sub(1) / 2,
        triples_checked: n * n.saturating_sub(1) * n.saturating_sub(2) / 6,
        violation_count: count,
        violations,
        verdict: String::new(),
    }
    .finish()
}

/// A random accessible state: `4n` random braids and pair measurements
/// applied to `init(n)`.
pub fn random_accessible_state<R: Rng + ?Sized>(n_pairs: usize, rng: &mut R) -> Result<AccessibleState> {
    let n = 2 * n_pairs;
    let mut state = AccessibleState::init(n_pairs)?;
    if n < 2 {
        return Ok(state);
    }
    for _ in 0..4 * n {
        let j = rng.gen_range(1..n);
        let k = rng.gen_range(j + 1..=n);
        state = if rng.gen_bool(0.5) {
            state.braid(j, k)?
        } else {
            state.measure_pair(j, k, rng)?.1
        };
    }
    Ok(state)
}

/// `trials` random accessible states on `n_pairs` pairs; trial `t` draws
/// from stream `t` of `seed`.
pub fn random_accessible_scan(n_pairs: usize, trials: u64, seed: u64) -> Result<ScanReport> {
    random_scan_range(n_pairs, n_pairs, trials, seed)
}

/// As [`random_accessible_scan`], with the pair count of trial `t` cycling
/// through `min_pairs..=max_pairs`.
pub fn random_scan_range(min_pairs: usize, max_pairs: usize, trials: u64, seed: u64) -> Result<ScanReport> {
    if min_pairs < 1 || max_pairs > MAX_SCAN_PAIRS || min_pairs > max_pairs {
        bail!(Argument, "pair counts {min_pairs}..={max_pairs} outside 1..={MAX_SCAN_PAIRS}");
    }
    let span = (max_pairs - min_pairs + 1) as u64;
    let report = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t);
            let n_pairs = min_pairs + (t % span) as usize;
            let state = random_accessible_state(n_pairs, &mut rng)?;
            Ok(scan_group(&state.stabilizer_group()))
        })
        .try_reduce(ScanReport::empty, |a, b| Ok(a.merge(b)))?;
    Ok(report.finish())
}
