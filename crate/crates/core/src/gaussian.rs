//! Gaussian states by their covariance matrix `γ_{ab} = <i c_a c_b>`.
//!
//! Only the strict upper triangle is stored, so antisymmetry holds by
//! construction. Braids act as signed-permutation congruences; a charge
//! measurement conditions `γ` with the rank-two Gaussian update.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::algebra::ModeMap;
use crate::error::{bail, Error, Result};
use crate::program::{Backend, BRANCH_CUTOFF};
use crate::stabilizer::AccessibleState;

pub const TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    upper: Vec<f64>,
}

fn upper_index(dim: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < dim);
    a * dim - a * (a + 1) / 2 + (b - a - 1)
}

impl CovarianceMatrix {
    /// The maximally mixed state on `n_modes` modes.
    pub fn zeros(n_modes: usize) -> Result<Self> {
        if n_modes == 0 || n_modes % 2 == 1 {
            bail!(Argument, "need an even, nonzero mode count, got {n_modes}");
        }
        Ok(Self {
            dim: n_modes,
            upper: vec![0.0; n_modes * (n_modes - 1) / 2],
        })
    }

    /// Pure stabilizer covariance: `γ_{jk} = σ` for every record `(j, k, σ)`.
    pub fn from_state(state: &AccessibleState) -> Self {
        let mut g = Self::zeros(state.n_modes()).expect("accessible states have an even mode count");
        for p in state.pairs() {
            g.set(p.j, p.k, f64::from(p.sign));
        }
        g
    }

    /// From a full row-major matrix; rejects anything not antisymmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut g = Self::zeros(dim)?;
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                bail!(Dimension, "row {} has {} entries, expected {dim}", r + 1, row.len());
            }
            if row.iter().any(|x| !x.is_finite()) {
                bail!(Argument, "row {} has a non-finite entry", r + 1);
            }
        }
        for a in 0..dim {
            if rows[a][a].abs() > 1e-12 {
                bail!(Argument, "diagonal entry ({0},{0}) is {1}, not zero", a + 1, rows[a][a]);
            }
            for b in a + 1..dim {
                if (rows[a][b] + rows[b][a]).abs() > 1e-12 {
                    bail!(Argument, "entries ({},{}) and ({},{}) are not antisymmetric", a + 1, b + 1, b + 1, a + 1);
                }
                g.upper[upper_index(dim, a, b)] = rows[a][b];
            }
        }
        Ok(g)
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            bail!(Dimension, "{}x{} matrix is not square", m.nrows(), m.ncols());
        }
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn n_modes(&self) -> usize {
        self.dim
    }

    /// `γ_{ab}` with 1-based modes.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Equal => 0.0,
            Less => self.upper[upper_index(self.dim, a - 1, b - 1)],
            Greater => -self.upper[upper_index(self.dim, b - 1, a - 1)],
        }
    }

    fn set(&mut self, a: usize, b: usize, value: f64) {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Equal => {}
            Less => self.upper[upper_index(self.dim, a - 1, b - 1)] = value,
            Greater => self.upper[upper_index(self.dim, b - 1, a - 1)] = -value,
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.get(r + 1, c + 1))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (1..=self.dim).map(|r| (1..=self.dim).map(|c| self.get(r, c)).collect()).collect()
    }

    fn check_pair(&self, j: usize, k: usize) -> Result<()> {
        if j == 0 || k == 0 || j > self.dim || k > self.dim || j == k {
            bail!(Argument, "modes ({j}, {k}) invalid on {} modes", self.dim);
        }
        Ok(())
    }

    /// `V γ Vᵀ` for orthogonal `V`.
    pub fn apply_rotation(&self, v: &DMatrix<f64>) -> Result<Self> {
        if v.nrows() != self.dim || v.ncols() != self.dim {
            bail!(Dimension, "{}x{} rotation on {} modes", v.nrows(), v.ncols(), self.dim);
        }
        let gram = v * v.transpose();
        let id = DMatrix::<f64>::identity(self.dim, self.dim);
        if (gram - id).abs().max() > TOLERANCE {
            bail!(Argument, "rotation is not orthogonal");
        }
        let rotated = v * self.to_matrix() * v.transpose();
        let mut out = Self::zeros(self.dim)?;
        for a in 0..self.dim {
            for b in a + 1..self.dim {
                out.upper[upper_index(self.dim, a, b)] = rotated[(a, b)];
            }
        }
        Ok(out)
    }

    /// Exact congruence by a signed permutation: `γ'_{π a, π b} = s_a s_b γ_{ab}`.
    pub fn apply_map(&self, map: &ModeMap) -> Result<Self> {
        if map.n_modes() != self.dim {
            bail!(Dimension, "map on {} modes, covariance on {}", map.n_modes(), self.dim);
        }
        let mut out = Self::zeros(self.dim)?;
        for a in 1..=self.dim {
            let (na, ta) = map.image(a);
            for b in a + 1..=self.dim {
                let (nb, tb) = map.image(b);
                let sign = if na ^ nb { -1.0 } else { 1.0 };
                out.set(ta, tb, sign * self.get(a, b));
            }
        }
        Ok(out)
    }

    /// `p(+1)` for `i c_j c_k`, i.e. `(1 + γ_{jk}) / 2`.
    pub fn born_probability(&self, j: usize, k: usize) -> Result<f64> {
        self.check_pair(j, k)?;
        let g = self.get(j, k);
        if g.abs() > 1.0 + TOLERANCE {
            bail!(State, "|γ({j},{k})| = {} exceeds 1; the covariance matrix is unphysical", g.abs());
        }
        Ok(((1.0 + g) / 2.0).clamp(0.0, 1.0))
    }

    /// Covariance after observing `outcome` for `i c_j c_k`.
    pub fn conditional_update(&self, j: usize, k: usize, outcome: i8) -> Result<Self> {
        self.check_pair(j, k)?;
        if outcome != 1 && outcome != -1 {
            bail!(Argument, "outcome must be ±1, got {outcome}");
        }
        let m = f64::from(outcome);
        let gjk = self.get(j, k);
        let norm = 1.0 + m * gjk;
        if norm / 2.0 <= BRANCH_CUTOFF {
            bail!(Argument, "outcome {outcome} of i c{j} c{k} has probability zero");
        }
        let mut out = self.clone();
        for a in 1..=self.dim {
            if a == j || a == k {
                continue;
            }
            for b in a + 1..=self.dim {
                if b == j || b == k {
                    continue;
                }
                let shift = m * (self.get(a, j) * self.get(b, k) - self.get(a, k) * self.get(b, j)) / norm;
                out.set(a, b, self.get(a, b) - shift);
            }
            out.set(a, j, 0.0);
            out.set(a, k, 0.0);
        }
        out.set(j, k, m);
        Ok(out)
    }

    /// `(1 - eps) γ`.
    pub fn depolarize(&self, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            bail!(Argument, "depolarizing strength {eps} outside [0, 1]");
        }
        Ok(Self {
            dim: self.dim,
            upper: self.upper.iter().map(|x| (1.0 - eps) * x).collect(),
        })
    }

    /// Eigenvalues of `-γ²`, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let g = self.to_matrix();
        let neg_sq = -(&g * &g);
        let mut ev: Vec<f64> = SymmetricEigen::new(neg_sq).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `-γ² ≤ 1` within [`TOLERANCE`].
    pub fn is_physical(&self) -> bool {
        self.spectrum().iter().all(|&x| x <= 1.0 + TOLERANCE)
    }

    /// Entries in `{0, ±1}` and `γ² = -1`.
    pub fn is_pure_stabilizer(&self) -> bool {
        if !self.upper.iter().all(|&x| x == 0.0 || x == 1.0 || x == -1.0) {
            return false;
        }
        let g = self.to_matrix();
        let sq = &g * &g + DMatrix::<f64>::identity(self.dim, self.dim);
        sq.iter().all(|&x| x == 0.0)
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.upper.iter().zip(&other.upper).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixJson {
            dim: self.dim,
            rows: self.to_rows(),
        })
        .expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if parsed.rows.len() != parsed.dim {
            bail!(Dimension, "declared dimension {} but {} rows", parsed.dim, parsed.rows.len());
        }
        Self::from_rows(&parsed.rows)
    }

    /// One row per line, comma separated, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.to_rows() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?);
        }
        Self::from_rows(&rows)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

/// `true` iff every eigenvalue of `-γ²` is at most `1 + 1e-10`; errors on
/// input that is not antisymmetric.
pub fn is_physical(gamma: &DMatrix<f64>) -> Result<bool> {
    Ok(CovarianceMatrix::from_matrix(gamma)?.is_physical())
}

/// Orthogonal matrix `R` with `γ ↦ R γ Rᵀ` realising the exchange `j < k`
/// (`c_j -> c_k`, `c_k -> -c_j` on operators): `R_{kj} = 1`, `R_{jk} = -1`.
pub fn braid_rotation(n_modes: usize, j: usize, k: usize) -> Result<DMatrix<f64>> {
    if j >= k || j == 0 || k > n_modes {
        bail!(Argument, "braid needs 1 <= j < k <= {n_modes}, got ({j}, {k})");
    }
    let mut r = DMatrix::<f64>::identity(n_modes, n_modes);
    r[(j - 1, j - 1)] = 0.0;
    r[(k - 1, k - 1)] = 0.0;
    r[(k - 1, j - 1)] = 1.0;
    r[(j - 1, k - 1)] = -1.0;
    Ok(r)
}

impl Backend for CovarianceMatrix {
    fn n_modes(&self) -> usize {
        self.dim
    }

    fn braid(&mut self, j: usize, k: usize) -> Result<()> {
        *self = self.apply_map(&ModeMap::braid(self.dim, j, k)?)?;
        Ok(())
    }

    fn plus_probability(&self, j: usize, k: usize) -> Result<f64> {
        self.born_probability(j, k)
    }

    fn condition(&mut self, j: usize, k: usize, outcome: i8) -> Result<()> {
        *self = self.conditional_update(j, k, outcome)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{DenseState, DensityMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn init(n: usize) -> CovarianceMatrix {
        CovarianceMatrix::from_state(&AccessibleState::init(n).unwrap())
    }

    fn assert_close_rows(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) {
        for (ra, rb) in a.iter().zip(b) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < tol, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn from_state_examples() {
        assert_eq!(init(1).to_rows(), vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let two = init(2).to_rows();
        assert_eq!(two[0][1], 1.0);
        assert_eq!(two[2][3], 1.0);
        assert_eq!(two[1][2], 0.0);
        let scrambled = AccessibleState::init(4).unwrap().braid(2, 7).unwrap().braid(1, 5).unwrap();
        assert!(CovarianceMatrix::from_state(&scrambled).is_pure_stabilizer());
    }

    #[test]
    fn rotation_examples() {
        let g = init(2);
        assert_eq!(g.apply_rotation(&DMatrix::identity(4, 4)).unwrap(), g);
        let one = init(1);
        assert_eq!(one.apply_rotation(&braid_rotation(2, 1, 2).unwrap()).unwrap(), one);
        let mut bad = DMatrix::<f64>::identity(4, 4);
        bad[(0, 1)] = 0.5;
        assert!(matches!(g.apply_rotation(&bad), Err(Error::Argument(_))));
    }

    #[test]
    fn random_braid_words_match_the_stabilizer_backend() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..50 {
            let n = 5;
            let mut s = AccessibleState::init(n).unwrap();
            let mut g = CovarianceMatrix::from_state(&s);
            let mut g_exact = g.clone();
            for _ in 0..20 {
                let j = rng.gen_range(1..2 * n);
                let k = rng.gen_range(j + 1..=2 * n);
                s = s.braid(j, k).unwrap();
                g = g.apply_rotation(&braid_rotation(2 * n, j, k).unwrap()).unwrap();
                g_exact.braid(j, k).unwrap();
            }
            assert_eq!(g, CovarianceMatrix::from_state(&s));
            assert_eq!(g_exact, g);
        }
    }

    #[test]
    fn born_probability_examples() {
        assert_eq!(init(1).born_probability(1, 2).unwrap(), 1.0);
        assert_eq!(init(2).born_probability(2, 3).unwrap(), 0.5);
        let noisy = init(1).depolarize(0.3).unwrap();
        assert!((noisy.born_probability(1, 2).unwrap() - 0.85).abs() < 1e-15);
        let doubled = CovarianceMatrix::from_rows(&[vec![0.0, 2.0], vec![-2.0, 0.0]]).unwrap();
        assert!(matches!(doubled.born_probability(1, 2), Err(Error::State(_))));
        assert!(init(1).born_probability(1, 1).is_err());
    }

    #[test]
    fn conditioning_examples() {
        let g = init(2);
        assert_eq!(g.conditional_update(1, 2, 1).unwrap(), g);
        let s = AccessibleState::init(2).unwrap();
        for m in [1, -1] {
            assert_eq!(
                g.conditional_update(2, 3, m).unwrap(),
                CovarianceMatrix::from_state(&s.project(2, 3, m).unwrap())
            );
        }
        assert!(g.conditional_update(1, 2, -1).is_err());
    }

    #[test]
    fn conditioning_matches_dense_oracle_on_pure_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let n = 4;
            let mut s = AccessibleState::init(n).unwrap();
            for _ in 0..6 {
                let j = rng.gen_range(1..2 * n);
                let k = rng.gen_range(j + 1..=2 * n);
                s = s.braid(j, k).unwrap();
            }
            let g = CovarianceMatrix::from_state(&s);
            let j = rng.gen_range(1..=2 * n);
            let mut k = rng.gen_range(1..=2 * n);
            while k == j {
                k = rng.gen_range(1..=2 * n);
            }
            let dense = DenseState::from_accessible(&s).unwrap();
            for m in [1i8, -1] {
                if g.outcome_probability(j, k, m).unwrap() <= BRANCH_CUTOFF {
                    continue;
                }
                let mut d = dense.clone();
                d.condition(j, k, m).unwrap();
                assert_close_rows(&g.conditional_update(j, k, m).unwrap().to_rows(), &d.covariance().unwrap(), 1e-12);
            }
        }
    }

    #[test]
    fn conditioning_matches_density_matrix_on_mixed_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for trial in 0..30 {
            let n = 3;
            let mut s = AccessibleState::init(n).unwrap();
            for _ in 0..5 {
                let j = rng.gen_range(1..2 * n);
                let k = rng.gen_range(j + 1..=2 * n);
                s = s.braid(j, k).unwrap();
            }
            let contrast = 0.2 + 0.75 * (trial as f64 / 30.0);
            let mut rho = DensityMatrix::with_pair_contrast(&s, contrast).unwrap();
            let mut g = CovarianceMatrix::from_state(&s).depolarize(1.0 - contrast).unwrap();
            assert_close_rows(&g.to_rows(), &rho.covariance().unwrap(), 1e-12);
            // a sequence of measurements keeps the two descriptions in step
            for _ in 0..3 {
                let j = rng.gen_range(1..2 * n);
                let k = rng.gen_range(j + 1..=2 * n);
                let p = g.born_probability(j, k).unwrap();
                assert!((p - rho.plus_probability(j, k).unwrap()).abs() < 1e-12);
                let m = if rng.gen::<f64>() < p { 1 } else { -1 };
                g.condition(j, k, m).unwrap();
                rho.condition(j, k, m).unwrap();
                assert_close_rows(&g.to_rows(), &rho.covariance().unwrap(), 1e-10);
            }
        }
    }

    #[test]
    fn depolarize_examples() {
        let g = init(3).apply_map(&ModeMap::braid(6, 2, 5).unwrap()).unwrap();
        assert_eq!(g.depolarize(0.0).unwrap(), g);
        assert_eq!(g.depolarize(1.0).unwrap(), CovarianceMatrix::zeros(6).unwrap());
        for eps in [0.1, 0.37, 0.9] {
            let d = g.depolarize(eps).unwrap();
            for ev in d.spectrum() {
                assert!((ev - (1.0 - eps) * (1.0 - eps)).abs() < 1e-12);
            }
            assert!(d.is_physical());
        }
        assert!(g.depolarize(1.5).is_err());
        assert!(g.depolarize(-0.1).is_err());
    }

    #[test]
    fn depolarize_commutes_with_rotation() {
        let g = CovarianceMatrix::from_state(&AccessibleState::init(3).unwrap().braid(1, 4).unwrap());
        let v = braid_rotation(6, 2, 6).unwrap() * braid_rotation(6, 1, 3).unwrap();
        let a = g.depolarize(0.25).unwrap().apply_rotation(&v).unwrap();
        let b = g.apply_rotation(&v).unwrap().depolarize(0.25).unwrap();
        assert!(a.max_abs_difference(&b) < 1e-15);
    }

    #[test]
    fn physicality_examples() {
        assert!(init(2).is_physical());
        let doubled = init(2).to_matrix() * 2.0;
        assert!(!is_physical(&doubled).unwrap());
        assert!(is_physical(&DMatrix::zeros(4, 4)).unwrap());
        let mut asym = DMatrix::<f64>::zeros(4, 4);
        asym[(0, 1)] = 0.5;
        assert!(matches!(is_physical(&asym), Err(Error::Argument(_))));
    }

    #[test]
    fn signed_permutations_keep_entries_in_the_unit_set() {
        let g = init(4);
        let map = ModeMap::braid(8, 1, 6).unwrap().then(&ModeMap::braid(8, 3, 8).unwrap()).unwrap();
        let h = g.apply_map(&map).unwrap();
        assert!(h.upper.iter().all(|&x| x == 0.0 || x.abs() == 1.0));
    }

    #[test]
    fn json_and_csv_round_trip() {
        let g = init(2).depolarize(0.125).unwrap();
        assert_eq!(CovarianceMatrix::from_json(&g.to_json()).unwrap(), g);
        assert_eq!(CovarianceMatrix::from_csv(&g.to_csv()).unwrap(), g);
        assert!(CovarianceMatrix::from_csv("0,1\n1,0\n").is_err());
        assert!(CovarianceMatrix::from_json(r#"{"dim":2,"rows":[[0,1]]}"#).is_err());
    }
}
