//! Brute-force reference simulator on the `2^n`-dimensional Fock space.
//!
//! Mode `2q+1` is `Z ⊗ ... ⊗ Z ⊗ X_q` and mode `2q+2` is `Z ⊗ ... ⊗ Z ⊗ Y_q`
//! (qubit `q` is bit `q` of the basis index). Nothing here consults the
//! symbolic algebra: operator products are carried out on vectors or
//! matrices directly, which is what makes it useful as a cross-check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::MajoranaString;
use crate::error::{bail, Result};
use crate::program::{self, Backend, Instruction, Transcript};
use crate::stabilizer::AccessibleState;

pub const MAX_ORACLE_MODES: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn check_size(n_pairs: usize) -> Result<()> {
    if n_pairs == 0 {
        bail!(Argument, "need at least one pair");
    }
    if 2 * n_pairs > MAX_ORACLE_MODES {
        bail!(Resource, "{} modes exceeds the dense oracle limit of {MAX_ORACLE_MODES}", 2 * n_pairs);
    }
    Ok(())
}

fn i_pow(q: u8) -> Complex64 {
    match q % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// Matrix of `s` on `n_pairs` pairs, built from Kronecker products.
pub fn represent(s: &MajoranaString, n_pairs: usize) -> Result<DMatrix<Complex64>> {
    check_size(n_pairs)?;
    if s.n_modes() > 2 * n_pairs {
        bail!(Dimension, "operator on {} modes, space holds {}", s.n_modes(), 2 * n_pairs);
    }
    let dim = 1usize << n_pairs;
    let mut m = DMatrix::<Complex64>::identity(dim, dim) * i_pow(s.phase().power());
    for a in s.support() {
        m *= mode_matrix(a, n_pairs);
    }
    Ok(m)
}

fn mode_matrix(a: usize, n_pairs: usize) -> DMatrix<Complex64> {
    let x = DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let y = DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let z = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    let id = DMatrix::<Complex64>::identity(2, 2);
    let target = (a - 1) / 2;
    let local = if a % 2 == 1 { x } else { y };
    // kron(A_{n-1}, ..., A_0) so that qubit 0 is the least significant bit
    let mut m = DMatrix::<Complex64>::identity(1, 1);
    for q in (0..n_pairs).rev() {
        let factor = match q.cmp(&target) {
            std::cmp::Ordering::Less => &z,
            std::cmp::Ordering::Equal => &local,
            std::cmp::Ordering::Greater => &id,
        };
        m = m.kronecker(factor);
    }
    m
}

/// `c_a |psi>` computed entrywise.
fn apply_mode(a: usize, psi: &[Complex64]) -> Vec<Complex64> {
    let q = (a - 1) / 2;
    let flip = 1usize << q;
    let lower = flip - 1;
    let mut out = vec![ZERO; psi.len()];
    for (x, &amp) in psi.iter().enumerate() {
        if amp == ZERO {
            continue;
        }
        let mut factor = if (x & lower).count_ones() % 2 == 1 { -ONE } else { ONE };
        if a.is_multiple_of(2) {
            factor *= if x & flip == 0 { I } else { -I };
        }
        out[x ^ flip] += factor * amp;
    }
    out
}

fn apply_string(s: &MajoranaString, psi: &[Complex64]) -> Vec<Complex64> {
    // rightmost factor acts first
    let mut v = psi.to_vec();
    for a in s.support().into_iter().rev() {
        v = apply_mode(a, &v);
    }
    let phase = i_pow(s.phase().power());
    v.iter_mut().for_each(|z| *z *= phase);
    v
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Clone, Debug)]
pub struct DenseState {
    n_pairs: usize,
    amplitudes: Vec<Complex64>,
}

impl DenseState {
    /// Unique joint `+1` eigenvector of `i c_{2j-1} c_{2j}`.
    pub fn init(n_pairs: usize) -> Result<Self> {
        Self::from_accessible(&AccessibleState::init(n_pairs)?)
    }

    /// Projects basis vectors onto the stabilizer space of `state` until one
    /// has a non-negligible component (some basis vector has weight at least
    /// `1/dim`).
    pub fn from_accessible(state: &AccessibleState) -> Result<Self> {
        let n_pairs = state.n_pairs();
        check_size(n_pairs)?;
        let dim = 1usize << n_pairs;
        let generators = state.generators();
        for x in 0..dim {
            let mut psi = vec![ZERO; dim];
            psi[x] = ONE;
            for g in &generators {
                let gpsi = apply_string(g, &psi);
                psi = psi.iter().zip(&gpsi).map(|(a, b)| (a + b) * 0.5).collect();
            }
            let weight = norm_sqr(&psi);
            if weight > 0.5 / dim as f64 {
                let norm = weight.sqrt();
                psi.iter_mut().for_each(|z| *z /= norm);
                return Ok(Self { n_pairs, amplitudes: psi });
            }
        }
        bail!(State, "stabilizers of {state} have no common +1 eigenvector")
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn expectation(&self, s: &MajoranaString) -> Result<Complex64> {
        if s.n_modes() > 2 * self.n_pairs {
            bail!(Dimension, "operator on {} modes, state on {}", s.n_modes(), 2 * self.n_pairs);
        }
        let spsi = apply_string(s, &self.amplitudes);
        Ok(self.amplitudes.iter().zip(&spsi).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &DenseState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }

    /// Covariance `γ_{ab} = <i c_a c_b>` for `a ≠ b`, row-major.
    pub fn covariance(&self) -> Result<Vec<Vec<f64>>> {
        let n = 2 * self.n_pairs;
        let mut out = vec![vec![0.0; n]; n];
        for a in 1..=n {
            for b in 1..=n {
                if a != b {
                    let v = apply_mode(a, &apply_mode(b, &self.amplitudes));
                    let e: Complex64 = self.amplitudes.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    out[a - 1][b - 1] = (e * I).re;
                }
            }
        }
        Ok(out)
    }

    fn projected(&self, j: usize, k: usize, outcome: i8) -> Result<Vec<Complex64>> {
        let n = 2 * self.n_pairs;
        if j == 0 || k == 0 || j > n || k > n || j == k {
            bail!(Argument, "charge measurement of modes ({j}, {k}) on {n} modes");
        }
        // i c_j c_k |psi>
        let cpsi = apply_mode(j, &apply_mode(k, &self.amplitudes));
        let m = Complex64::new(0.0, f64::from(outcome));
        Ok(self.amplitudes.iter().zip(&cpsi).map(|(a, b)| (a + b * m) * 0.5).collect())
    }
}

impl Backend for DenseState {
    fn n_modes(&self) -> usize {
        2 * self.n_pairs
    }

    /// Applies `(1 + c_k c_j)/√2 = exp((π/4) c_k c_j)`.
    fn braid(&mut self, j: usize, k: usize) -> Result<()> {
        let n = self.n_modes();
        if j >= k || j == 0 || k > n {
            bail!(Argument, "braid needs 1 <= j < k <= {n}, got ({j}, {k})");
        }
        let cj = apply_mode(j, &self.amplitudes);
        let ckcj = apply_mode(k, &cj);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        self.amplitudes = self.amplitudes.iter().zip(&ckcj).map(|(a, b)| (a + b) * r).collect();
        Ok(())
    }

    fn plus_probability(&self, j: usize, k: usize) -> Result<f64> {
        Ok(norm_sqr(&self.projected(j, k, 1)?))
    }

    fn condition(&mut self, j: usize, k: usize, outcome: i8) -> Result<()> {
        let v = self.projected(j, k, outcome)?;
        let p = norm_sqr(&v);
        if p <= program::BRANCH_CUTOFF {
            bail!(Argument, "outcome {outcome} of i c{j} c{k} has probability zero");
        }
        let norm = p.sqrt();
        self.amplitudes = v.into_iter().map(|z| z / norm).collect();
        Ok(())
    }
}

/// Runs a program from the initialised state with Born-rule sampling.
pub fn oracle_run(n_pairs: usize, program: &[Instruction], seed: u64) -> Result<(Transcript, DenseState)> {
    let start = DenseState::init(n_pairs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    program::run(&start, program, &mut rng)
}

/// Mixed states, for noisy experiments.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n_pairs: usize,
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &DenseState) -> Self {
        let v = nalgebra::DVector::from_column_slice(&state.amplitudes);
        Self {
            n_pairs: state.n_pairs,
            rho: &v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(n_pairs: usize) -> Result<Self> {
        check_size(n_pairs)?;
        let dim = 1usize << n_pairs;
        Ok(Self {
            n_pairs,
            rho: DMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        })
    }

    /// `Π_pairs (1 + λ σ i c_j c_k) / 2^n`: every matched pair of `state`
    /// independently has its charge expectation shrunk to `λ`.
    pub fn with_pair_contrast(state: &AccessibleState, contrast: f64) -> Result<Self> {
        let n_pairs = state.n_pairs();
        check_size(n_pairs)?;
        let dim = 1usize << n_pairs;
        let id = DMatrix::<Complex64>::identity(dim, dim);
        let mut rho = id.clone();
        for g in state.generators() {
            rho *= &id + represent(&g, n_pairs)? * Complex64::new(contrast, 0.0);
        }
        rho /= Complex64::new(dim as f64, 0.0);
        Ok(Self { n_pairs, rho })
    }

    /// `(1 - eps) ρ + eps · 1/d`.
    pub fn globally_depolarized(&self, eps: f64) -> Self {
        let dim = self.rho.nrows();
        let id = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(eps / dim as f64, 0.0);
        Self {
            n_pairs: self.n_pairs,
            rho: &self.rho * Complex64::new(1.0 - eps, 0.0) + id,
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn expectation(&self, s: &MajoranaString) -> Result<f64> {
        Ok((&self.rho * represent(s, self.n_pairs)?).trace().re)
    }

    pub fn covariance(&self) -> Result<Vec<Vec<f64>>> {
        let n = 2 * self.n_pairs;
        let mut out = vec![vec![0.0; n]; n];
        for a in 1..=n {
            for b in 1..=n {
                if a != b {
                    let op = mode_matrix(a, self.n_pairs) * mode_matrix(b, self.n_pairs) * I;
                    out[a - 1][b - 1] = (&self.rho * op).trace().re;
                }
            }
        }
        Ok(out)
    }

    fn projector(&self, j: usize, k: usize, outcome: i8) -> Result<DMatrix<Complex64>> {
        let n = 2 * self.n_pairs;
        if j == 0 || k == 0 || j > n || k > n || j == k {
            bail!(Argument, "charge measurement of modes ({j}, {k}) on {n} modes");
        }
        let dim = self.rho.nrows();
        let charge = mode_matrix(j, self.n_pairs) * mode_matrix(k, self.n_pairs) * I;
        Ok((DMatrix::identity(dim, dim) + charge * Complex64::new(f64::from(outcome), 0.0)) * Complex64::new(0.5, 0.0))
    }
}

impl Backend for DensityMatrix {
    fn n_modes(&self) -> usize {
        2 * self.n_pairs
    }

    fn braid(&mut self, j: usize, k: usize) -> Result<()> {
        let n = self.n_modes();
        if j >= k || j == 0 || k > n {
            bail!(Argument, "braid needs 1 <= j < k <= {n}, got ({j}, {k})");
        }
        let dim = self.rho.nrows();
        let ckcj = mode_matrix(k, self.n_pairs) * mode_matrix(j, self.n_pairs);
        let u = (DMatrix::identity(dim, dim) + ckcj) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.rho = &u * &self.rho * u.adjoint();
        Ok(())
    }

    fn plus_probability(&self, j: usize, k: usize) -> Result<f64> {
        Ok((self.projector(j, k, 1)? * &self.rho).trace().re)
    }

    fn condition(&mut self, j: usize, k: usize, outcome: i8) -> Result<()> {
        let p = self.projector(j, k, outcome)?;
        let post = &p * &self.rho * &p;
        let prob = post.trace().re;
        if prob <= program::BRANCH_CUTOFF {
            bail!(Argument, "outcome {outcome} of i c{j} c{k} has probability zero");
        }
        self.rho = post / Complex64::new(prob, 0.0);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ModeMap, Phase};
    use crate::prob::{is_power_of_two_denominator, snap_dyadic};

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
        (a - b).iter().all(|z| z.norm() < 1e-12)
    }

    #[test]
    fn single_pair_anticommutation() {
        let c1 = represent(&MajoranaString::mode(2, 1).unwrap(), 1).unwrap();
        let c2 = represent(&MajoranaString::mode(2, 2).unwrap(), 1).unwrap();
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!(close(&(&c1 * &c2 + &c2 * &c1), &(id.clone() * ZERO)));
        assert!(close(&(&c1 * &c1), &id));
        assert!(close(&(&c2 * &c2), &id));
    }

    #[test]
    fn charge_operator_is_hermitian_with_unit_eigenvalues() {
        let g = represent(&MajoranaString::pair(2, 1, 2).unwrap(), 1).unwrap();
        assert!(close(&g, &g.adjoint()));
        let diag: Vec<f64> = (0..2).map(|i| g[(i, i)].re).collect();
        assert!(g[(0, 1)].norm() < 1e-12);
        let mut d = diag.clone();
        d.sort_by(f64::total_cmp);
        assert_eq!(d, vec![-1.0, 1.0]);
    }

    #[test]
    fn anticommutation_table_up_to_twelve_modes() {
        let n_pairs = 6;
        let n = 12;
        let mats: Vec<_> = (1..=n).map(|a| mode_matrix(a, n_pairs)).collect();
        let dim = 1 << n_pairs;
        let id = DMatrix::<Complex64>::identity(dim, dim);
        for a in 0..n {
            for b in 0..n {
                let anti = &mats[a] * &mats[b] + &mats[b] * &mats[a];
                let expected = if a == b { &id * Complex64::new(2.0, 0.0) } else { &id * ZERO };
                assert!(close(&anti, &expected), "modes {} {}", a + 1, b + 1);
            }
        }
    }

    #[test]
    fn vector_action_matches_matrices() {
        let n_pairs = 3;
        let psi: Vec<Complex64> = (0..8).map(|x| Complex64::new(x as f64 + 1.0, 0.5 * x as f64)).collect();
        let v = nalgebra::DVector::from_column_slice(&psi);
        for text in ["c1", "c4", "i c2 c5", "-c1 c3 c4 c6", "-i c6"] {
            let s = MajoranaString::parse(6, text).unwrap();
            let by_matrix = represent(&s, n_pairs).unwrap() * &v;
            let by_vector = apply_string(&s, &psi);
            for (a, b) in by_matrix.iter().zip(&by_vector) {
                assert!((a - b).norm() < 1e-12, "{text}");
            }
        }
    }

    #[test]
    fn symbolic_products_agree_with_matrices() {
        // exhaustive over pairs of strings on 4 modes, all phases
        let n_pairs = 2;
        let all: Vec<MajoranaString> = (0..16u64)
            .flat_map(|mask| (0..4).map(move |q| MajoranaString::from_parts(4, Phase::from_power(q), mask).unwrap()))
            .collect();
        let mats: Vec<_> = all.iter().map(|s| represent(s, n_pairs).unwrap()).collect();
        for (i, s) in all.iter().enumerate() {
            for (j, t) in all.iter().enumerate() {
                let st = s.multiply(t).unwrap();
                assert!(close(&(&mats[i] * &mats[j]), &represent(&st, n_pairs).unwrap()), "{s} * {t}");
            }
        }
    }

    #[test]
    fn symbolic_products_agree_with_matrices_on_eight_modes() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let s = MajoranaString::from_parts(8, Phase::from_power(rng.gen_range(0..4)), rng.gen_range(0..256)).unwrap();
            let t = MajoranaString::from_parts(8, Phase::from_power(rng.gen_range(0..4)), rng.gen_range(0..256)).unwrap();
            let lhs = represent(&s, 4).unwrap() * represent(&t, 4).unwrap();
            assert!(close(&lhs, &represent(&s.multiply(&t).unwrap(), 4).unwrap()));
        }
    }

    #[test]
    fn braid_unitary_realises_the_exchange_map() {
        let n_pairs = 3;
        let n = 6;
        let dim = 8;
        for j in 1..n {
            for k in j + 1..=n {
                let ckcj = mode_matrix(k, n_pairs) * mode_matrix(j, n_pairs);
                let u = (DMatrix::<Complex64>::identity(dim, dim) + ckcj) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                assert!(close(&(&u * u.adjoint()), &DMatrix::identity(dim, dim)));
                let map = ModeMap::braid(n, j, k).unwrap();
                for a in 1..=n {
                    let conj = &u * mode_matrix(a, n_pairs) * u.adjoint();
                    let (neg, target) = map.image(a);
                    let mut expected = mode_matrix(target, n_pairs);
                    if neg {
                        expected = -expected;
                    }
                    assert!(close(&conj, &expected), "braid({j},{k}) on c{a}");
                }
            }
        }
    }

    #[test]
    fn vector_braid_matches_stabilizer_braid() {
        let s = AccessibleState::init(2).unwrap();
        let mut dense = DenseState::from_accessible(&s).unwrap();
        dense.braid(2, 3).unwrap();
        let target = DenseState::from_accessible(&s.braid(2, 3).unwrap()).unwrap();
        assert!((dense.fidelity(&target) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn init_is_stabilized() {
        let d = DenseState::init(3).unwrap();
        for j in 1..=3 {
            let g = MajoranaString::pair(6, 2 * j - 1, 2 * j).unwrap();
            assert!((d.expectation(&g).unwrap() - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn oracle_run_examples() {
        let (t, _) = oracle_run(2, &[Instruction::Measure { j: 1, k: 2 }], 0).unwrap();
        assert_eq!(t, vec![1]);
        let dist = program::transcript_distribution(&DenseState::init(2).unwrap(), &[Instruction::Measure { j: 2, k: 3 }]).unwrap();
        assert_eq!(dist.len(), 2);
        for p in dist.values() {
            let r = snap_dyadic(*p, 20, 1e-12).unwrap();
            assert!(is_power_of_two_denominator(&r));
            assert_eq!(r, crate::prob::half());
        }
    }

    #[test]
    fn post_measurement_state_matches_stabilizer_rule() {
        let s = AccessibleState::init(2).unwrap();
        for outcome in [1, -1] {
            let mut d = DenseState::from_accessible(&s).unwrap();
            d.condition(2, 3, outcome).unwrap();
            let expected = DenseState::from_accessible(&s.project(2, 3, outcome).unwrap()).unwrap();
            assert!((d.fidelity(&expected) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn resource_limit() {
        assert!(matches!(DenseState::init(7), Err(crate::Error::Resource(_))));
        assert!(DenseState::init(6).is_ok());
    }

    #[test]
    fn density_matrix_agrees_with_pure_state() {
        let s = AccessibleState::init(3).unwrap().braid(2, 5).unwrap();
        let pure = DenseState::from_accessible(&s).unwrap();
        let mut rho = DensityMatrix::from_pure(&pure);
        let mut psi = pure.clone();
        rho.braid(1, 4).unwrap();
        psi.braid(1, 4).unwrap();
        assert!((rho.plus_probability(1, 6).unwrap() - psi.plus_probability(1, 6).unwrap()).abs() < 1e-12);
        rho.condition(1, 6, -1).unwrap();
        psi.condition(1, 6, -1).unwrap();
        let (a, b) = (rho.covariance().unwrap(), psi.covariance().unwrap());
        for r in 0..6 {
            for c in 0..6 {
                assert!((a[r][c] - b[r][c]).abs() < 1e-12);
            }
        }
        let from_contrast = DensityMatrix::with_pair_contrast(&s, 1.0).unwrap();
        assert!((from_contrast.trace() - 1.0).abs() < 1e-12);
        let g = s.generators()[0];
        assert!((from_contrast.expectation(&g).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::with_pair_contrast(&s, 0.0).unwrap();
        let reference = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(close(&mixed.rho, &reference.rho));
    }
}
