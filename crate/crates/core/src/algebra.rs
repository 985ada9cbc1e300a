//! Products of Majorana operators with exact phase bookkeeping.
//!
//! A [`MajoranaString`] is `i^q c_{s_1} c_{s_2} ... c_{s_k}` with
//! `s_1 < s_2 < ... < s_k`. Modes are labelled `1..=2n` in the public API and
//! stored as a bitmask, so at most [`MAX_MODES`] modes are supported.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};

pub const MAX_MODES: usize = 64;

/// A power of `i`, kept modulo 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(q: i64) -> Self {
        Phase(q.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn times(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn negate(self) -> Phase {
        self.times(Phase::MINUS_ONE)
    }

    /// `+1` or `-1` for real phases, `None` for `±i`.
    pub fn as_sign(self) -> Option<i8> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }
}

/// `i^q` times an ascending product of distinct Majorana operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MajoranaString {
    n_modes: usize,
    phase: Phase,
    support: u64,
}

fn check_modes(n_modes: usize) -> Result<()> {
    if n_modes > MAX_MODES {
        bail!(Dimension, "{n_modes} modes exceeds the supported maximum of {MAX_MODES}");
    }
    Ok(())
}

fn bit(mode: usize) -> u64 {
    1u64 << (mode - 1)
}

/// Sign of reordering `a · b` (each ascending) into ascending order with
/// repeated modes cancelled, as the parity of the number of inversions.
fn merge_inversion_parity(a: u64, b: u64) -> u32 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let t = rest.trailing_zeros();
        rest &= rest - 1;
        // modes of `a` strictly above mode t
        let above = if t == 63 { 0 } else { !0u64 << (t + 1) };
        inversions += (a & above).count_ones();
    }
    inversions & 1
}

impl MajoranaString {
    pub fn identity(n_modes: usize) -> Result<Self> {
        check_modes(n_modes)?;
        Ok(Self {
            n_modes,
            phase: Phase::ONE,
            support: 0,
        })
    }

    /// The single mode operator `c_j`.
    pub fn mode(n_modes: usize, j: usize) -> Result<Self> {
        check_modes(n_modes)?;
        if j == 0 || j > n_modes {
            bail!(Argument, "mode {j} outside 1..={n_modes}");
        }
        Ok(Self {
            n_modes,
            phase: Phase::ONE,
            support: bit(j),
        })
    }

    /// `phase · c_{m_1} c_{m_2} ...` for modes in any order, repeats allowed.
    pub fn product(n_modes: usize, phase: Phase, modes: &[usize]) -> Result<Self> {
        let mut acc = Self::identity(n_modes)?;
        acc.phase = phase;
        for &m in modes {
            acc = acc.multiply(&Self::mode(n_modes, m)?)?;
        }
        Ok(acc)
    }

    /// The charge operator `i c_j c_k` (in that order).
    pub fn pair(n_modes: usize, j: usize, k: usize) -> Result<Self> {
        if j == k {
            bail!(Argument, "charge operator needs two distinct modes, got {j} twice");
        }
        Self::product(n_modes, Phase::I, &[j, k])
    }

    /// Builds directly from a bitmask without reordering (bit `m-1` is mode `m`).
    pub fn from_parts(n_modes: usize, phase: Phase, support: u64) -> Result<Self> {
        check_modes(n_modes)?;
        if n_modes < 64 && support >> n_modes != 0 {
            bail!(Argument, "support mask {support:#x} exceeds {n_modes} modes");
        }
        Ok(Self { n_modes, phase, support })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn support_mask(&self) -> u64 {
        self.support
    }

    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        let mut rest = self.support;
        while rest != 0 {
            out.push(rest.trailing_zeros() as usize + 1);
            rest &= rest - 1;
        }
        out
    }

    pub fn weight(&self) -> usize {
        self.support.count_ones() as usize
    }

    pub fn contains(&self, mode: usize) -> bool {
        mode >= 1 && mode <= self.n_modes && self.support & bit(mode) != 0
    }

    pub fn is_identity(&self) -> bool {
        self.support == 0
    }

    /// Even-weight strings span the physical operator algebra.
    pub fn is_physical(&self) -> bool {
        self.weight().is_multiple_of(2)
    }

    pub fn is_hermitian(&self) -> bool {
        let k = self.weight();
        (self.phase.power() as usize + k * (k.saturating_sub(1)) / 2).is_multiple_of(2)
    }

    pub fn dagger(&self) -> Self {
        let k = self.weight();
        let mut phase = self.phase.conj();
        if (k * k.saturating_sub(1) / 2) % 2 == 1 {
            phase = phase.negate();
        }
        Self { phase, ..*self }
    }

    pub fn negate(&self) -> Self {
        Self {
            phase: self.phase.negate(),
            ..*self
        }
    }

    pub fn with_phase(&self, phase: Phase) -> Self {
        Self { phase, ..*self }
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.n_modes != other.n_modes {
            bail!(Dimension, "operators act on {} and {} modes", self.n_modes, other.n_modes);
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        let swaps = merge_inversion_parity(self.support, other.support);
        let mut phase = self.phase.times(other.phase);
        if swaps == 1 {
            phase = phase.negate();
        }
        Ok(Self {
            n_modes: self.n_modes,
            phase,
            support: self.support ^ other.support,
        })
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.same_space(other)?;
        let swaps = self.weight() * other.weight() - self.overlap_unchecked(other);
        Ok(swaps.is_multiple_of(2))
    }

    fn overlap_unchecked(&self, other: &Self) -> usize {
        (self.support & other.support).count_ones() as usize
    }

    /// Number of modes shared by both supports.
    pub fn overlap(&self, other: &Self) -> Result<usize> {
        self.same_space(other)?;
        Ok(self.overlap_unchecked(other))
    }

    /// Number of modes present in all three supports.
    pub fn triple_overlap(&self, second: &Self, third: &Self) -> Result<usize> {
        multi_overlap(&[self, second, third])
    }

    /// Parses the textual form produced by `Display`, e.g. `"-i c1 c3 c4"`.
    /// Modes may appear in any order; the result is canonicalised.
    pub fn parse(n_modes: usize, text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace().peekable();
        let mut phase = Phase::ONE;
        let mut modes = Vec::new();
        if let Some(&first) = tokens.peek() {
            let coefficient = match first {
                "1" | "+1" | "+" => Some(Phase::ONE),
                "-1" | "-" => Some(Phase::MINUS_ONE),
                "i" | "+i" => Some(Phase::I),
                "-i" => Some(Phase::MINUS_I),
                _ => None,
            };
            if let Some(c) = coefficient {
                phase = c;
                tokens.next();
            }
        } else {
            bail!(Parse, "empty operator string");
        }
        for (idx, token) in tokens.enumerate() {
            let mut t = token;
            if idx == 0 && phase == Phase::ONE {
                if let Some(rest) = t.strip_prefix('-') {
                    phase = Phase::MINUS_ONE;
                    t = rest;
                } else if let Some(rest) = t.strip_prefix('+') {
                    t = rest;
                }
            }
            let digits = t
                .strip_prefix('c')
                .ok_or_else(|| Error::Parse(format!("expected a mode like `c3`, got `{token}`")))?;
            let m: usize = digits.parse().map_err(|_| Error::Parse(format!("bad mode index in `{token}`")))?;
            if m == 0 || m > n_modes {
                bail!(Parse, "mode {m} outside 1..={n_modes}");
            }
            modes.push(m);
        }
        Self::product(n_modes, phase, &modes)
    }
}

/// Number of modes common to every string in `ops`.
pub fn multi_overlap(ops: &[&MajoranaString]) -> Result<usize> {
    let Some(first) = ops.first() else {
        return Ok(0);
    };
    let mut mask = first.support;
    for op in &ops[1..] {
        first.same_space(op)?;
        mask &= op.support;
    }
    Ok(mask.count_ones() as usize)
}

/// Serialized as its text form, e.g. `"-i c1 c3"`.
impl serde::Serialize for MajoranaString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for MajoranaString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let modes = self.support();
        if modes.is_empty() {
            let s = match self.phase.power() {
                0 => "1",
                1 => "i",
                2 => "-1",
                _ => "-i",
            };
            return f.write_str(s);
        }
        let prefix = match self.phase.power() {
            0 => "",
            1 => "i ",
            2 => "-",
            _ => "-i ",
        };
        f.write_str(prefix)?;
        for (n, m) in modes.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "c{m}")?;
        }
        Ok(())
    }
}

/// A signed permutation of modes, `c_a -> sign_a c_{target_a}`, acting as an
/// algebra automorphism. Braids compose into these.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeMap {
    images: Vec<(bool, usize)>,
}

impl ModeMap {
    pub fn identity(n_modes: usize) -> Result<Self> {
        check_modes(n_modes)?;
        Ok(Self {
            images: (1..=n_modes).map(|a| (false, a)).collect(),
        })
    }

    /// Exchange of modes `j < k`: `c_j -> c_k`, `c_k -> -c_j`.
    pub fn braid(n_modes: usize, j: usize, k: usize) -> Result<Self> {
        if j >= k || j == 0 || k > n_modes {
            bail!(Argument, "braid needs 1 <= j < k <= {n_modes}, got ({j}, {k})");
        }
        let mut map = Self::identity(n_modes)?;
        map.images[j - 1] = (false, k);
        map.images[k - 1] = (true, j);
        Ok(map)
    }

    pub fn n_modes(&self) -> usize {
        self.images.len()
    }

    /// `(negated, target)` for mode `a`.
    pub fn image(&self, a: usize) -> (bool, usize) {
        self.images[a - 1]
    }

    /// The map that applies `self` first and `next` afterwards.
    pub fn then(&self, next: &ModeMap) -> Result<ModeMap> {
        if self.n_modes() != next.n_modes() {
            bail!(Dimension, "mode maps on {} and {} modes", self.n_modes(), next.n_modes());
        }
        let images = self
            .images
            .iter()
            .map(|&(neg, target)| {
                let (neg2, target2) = next.images[target - 1];
                (neg ^ neg2, target2)
            })
            .collect();
        Ok(ModeMap { images })
    }

    pub fn apply(&self, s: &MajoranaString) -> Result<MajoranaString> {
        if s.n_modes() != self.n_modes() {
            bail!(Dimension, "map on {} modes applied to a {}-mode operator", self.n_modes(), s.n_modes());
        }
        let mut out = MajoranaString::identity(s.n_modes)?.with_phase(s.phase);
        for a in s.support() {
            let (neg, target) = self.images[a - 1];
            let mut image = MajoranaString::mode(s.n_modes, target)?;
            if neg {
                image = image.negate();
            }
            out = out.multiply(&image)?;
        }
        Ok(out)
    }
}
