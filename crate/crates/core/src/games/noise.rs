//! Magic-square value under depolarizing noise `γ → (1 - ε) γ`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::game_value;
use super::magic_square::{self, complete, magic_square_game, round_score, setting_schedule, N_PAIRS};
use crate::error::{bail, Result};
use crate::gaussian::CovarianceMatrix;
use crate::oracle::DensityMatrix;
use crate::program::{stream_rng, Backend};
use crate::stabilizer::AccessibleState;

/// Bell bound of the magic-square game.
pub const CLASSICAL_BOUND: f64 = 7.0;

pub fn depolarized_resource(eps: f64) -> Result<CovarianceMatrix> {
    CovarianceMatrix::from_state(&AccessibleState::canonical_shared(N_PAIRS)?).depolarize(eps)
}

/// `G(ε)` by exact branch enumeration on the Gaussian backend.
pub fn exact_value(eps: f64) -> Result<f64> {
    let p = magic_square::simulated_distribution(&depolarized_resource(eps)?)?;
    game_value(&magic_square_game(), &p)
}

/// `G(ε)` on the dense density matrix in which every shared pair has
/// charge expectation `1 - ε`.
pub fn oracle_value(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        bail!(Argument, "depolarizing strength {eps} outside [0, 1]");
    }
    let rho = DensityMatrix::with_pair_contrast(&AccessibleState::canonical_shared(N_PAIRS)?, 1.0 - eps)?;
    game_value(&magic_square_game(), &magic_square::simulated_distribution(&rho)?)
}

/// Closed form `6 (1-ε)^2 + 3 (1-ε)^4`: six shared cells are weight-two
/// charges, three are weight-four.
pub fn analytic_value(eps: f64) -> f64 {
    let x = (1.0 - eps) * (1.0 - eps);
    6.0 * x + 3.0 * x * x
}

/// Estimate of `G` from `rounds` sampled rounds with uniform settings:
/// `9 · mean(V)` and its standard error.
pub fn monte_carlo<R: Rng + ?Sized>(start: &CovarianceMatrix, rounds: u64, rng: &mut R) -> Result<(f64, f64)> {
    let square = magic_square::magic_square_observables()?;
    let schedules: Vec<_> = (1..=3)
        .flat_map(|j| (1..=3).map(move |k| (j, k)))
        .map(|(j, k)| setting_schedule(&square, j, k).map(|s| (j, k, s)))
        .collect::<Result<_>>()?;
    let mut wins = 0u64;
    for _ in 0..rounds {
        let (j, k, (charges, pa, pb)) = &schedules[rng.gen_range(0..9)];
        let mut state = start.clone();
        let mut o = [0i8; 4];
        for (slot, c) in charges.iter().enumerate() {
            o[slot] = state.measure(c.lo, c.hi, rng)? * c.sign;
        }
        if round_score(&complete(pa, o[0], o[1]), &complete(pb, o[2], o[3]), *j, *k) > 0 {
            wins += 1;
        }
    }
    Ok(score_summary(wins, rounds))
}

/// `(9 · mean(V), 9 · sd(V) / √n)` for `wins` wins out of `rounds`.
pub fn score_summary(wins: u64, rounds: u64) -> (f64, f64) {
    if rounds == 0 {
        return (0.0, f64::NAN);
    }
    let n = rounds as f64;
    let mean = (2.0 * wins as f64 - n) / n;
    let var = if rounds > 1 { (1.0 - mean * mean) * n / (n - 1.0) } else { 0.0 };
    (9.0 * mean, 9.0 * (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub g_exact: f64,
    pub g_mc: Option<f64>,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub eps_star: f64,
    pub lower: f64,
    pub upper: f64,
    pub g_lower: f64,
    pub g_upper: f64,
    pub oracle_lower: f64,
    pub oracle_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseSweep {
    pub seed: u64,
    pub rounds: u64,
    pub points: Vec<SweepPoint>,
    pub threshold: Option<Threshold>,
}

impl NoiseSweep {
    pub fn is_monotone_non_increasing(&self, tol: f64) -> bool {
        self.points.windows(2).all(|w| w[1].eps < w[0].eps || w[1].g_exact <= w[0].g_exact + tol)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,g_exact,g_mc,stderr\n");
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.10}")).unwrap_or_default();
        for p in &self.points {
            out.push_str(&format!("{:.6},{:.12},{},{}\n", p.eps, p.g_exact, opt(p.g_mc), opt(p.stderr)));
        }
        out
    }
}

/// `n` evenly spaced points on `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Sweeps `grid`. With `rounds > 0` each point also gets a Monte-Carlo
/// estimate, the point at index `i` drawing from stream `i` of `seed`.
pub fn noise_sweep(grid: &[f64], rounds: u64, seed: u64) -> Result<NoiseSweep> {
    if let Some(bad) = grid.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        bail!(Argument, "grid value {bad} outside [0, 1]");
    }
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let g_exact = exact_value(eps)?;
            let (g_mc, stderr) = if rounds > 0 {
                let mut rng = stream_rng(seed, i as u64);
                let (g, s) = monte_carlo(&depolarized_resource(eps)?, rounds, &mut rng)?;
                (Some(g), Some(s))
            } else {
                (None, None)
            };
            Ok(SweepPoint { eps, g_exact, g_mc, stderr })
        })
        .collect::<Result<Vec<_>>>()?;
    let threshold = find_threshold(&points)?;
    Ok(NoiseSweep {
        seed,
        rounds,
        points,
        threshold,
    })
}

fn find_threshold(points: &[SweepPoint]) -> Result<Option<Threshold>> {
    let Some(w) = points
        .windows(2)
        .find(|w| w[0].g_exact >= CLASSICAL_BOUND && w[1].g_exact < CLASSICAL_BOUND)
    else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (w[0].eps, w[1].eps);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if exact_value(mid)? >= CLASSICAL_BOUND {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(Threshold {
        eps_star: 0.5 * (lo + hi),
        lower: w[0].eps,
        upper: w[1].eps,
        g_lower: w[0].g_exact,
        g_upper: w[1].g_exact,
        oracle_lower: oracle_value(w[0].eps)?,
        oracle_upper: oracle_value(w[1].eps)?,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        assert!((exact_value(0.0).unwrap() - 9.0).abs() < 1e-12);
        assert!(exact_value(1.0).unwrap().abs() < 1e-12);
        assert!(oracle_value(1.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn gaussian_matches_oracle_and_closed_form() {
        for eps in [0.0, 0.05, 0.3, 0.77] {
            let g = exact_value(eps).unwrap();
            assert!((g - oracle_value(eps).unwrap()).abs() < 1e-9, "eps {eps}");
            assert!((g - analytic_value(eps)).abs() < 1e-12, "eps {eps}");
        }
    }

    #[test]
    fn sweep_threshold() {
        let sweep = noise_sweep(&uniform_grid(51), 0, 0).unwrap();
        assert!(sweep.is_monotone_non_increasing(1e-12));
        let t = sweep.threshold.unwrap();
        assert_eq!((t.lower, t.upper), (0.08, 0.1));
        let x = (-6.0 + 120f64.sqrt()) / 6.0;
        assert!((t.eps_star - (1.0 - x.sqrt())).abs() < 1e-10);
        assert!((t.oracle_lower - t.g_lower).abs() < 1e-6);
    }

    #[test]
    fn monte_carlo_near_exact() {
        let mut rng = stream_rng(5, 0);
        let (g, se) = monte_carlo(&depolarized_resource(0.2).unwrap(), 20_000, &mut rng).unwrap();
        assert!((g - analytic_value(0.2)).abs() < 5.0 * se);
    }
}
