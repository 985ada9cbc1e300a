//! The 4-pair experiment and its local hidden variable model. Alice holds
//! `a_l = c_l`, Bob holds `b_l = c_{4+l}`; outcomes are 2-bit strings.

use serde::{Deserialize, Serialize};

use super::{encode_outcome, exact_from_f64, measurement_distribution, JointDistribution};
use crate::algebra::MajoranaString;
use crate::error::Result;
use crate::prob::Rational;
use crate::program::Backend;
use crate::stabilizer::{AccessibleState, ChargeObservable};

pub const N_PAIRS: usize = 4;

// local mode pairs of the measurement sets
const SETS: [[(usize, usize); 2]; 3] = [[(1, 2), (3, 4)], [(1, 3), (4, 2)], [(1, 4), (2, 3)]];

/// The two observables `i x_p x_q` of setting `j`, offset by `offset` modes.
pub fn measurement_set(j: usize, offset: usize) -> Result<[MajoranaString; 2]> {
    let op = |(p, q): (usize, usize)| MajoranaString::pair(2 * N_PAIRS, p + offset, q + offset);
    Ok([op(SETS[j - 1][0])?, op(SETS[j - 1][1])?])
}

pub fn four_pair_distribution() -> JointDistribution<Rational> {
    JointDistribution::from_fn(3, 2, |a, b, j, k| {
        if j == k {
            if a[0] == -b[0] && a[1] == -b[1] {
                Rational::new(1, 4)
            } else {
                Rational::from_integer(0)
            }
        } else if a[0] * a[1] == b[0] * b[1] {
            Rational::new(1, 8)
        } else {
            Rational::from_integer(0)
        }
    })
}

pub fn simulated_distribution<B: Backend>(state: &B) -> Result<JointDistribution<f64>> {
    let mut p = JointDistribution::zeros(3, 2);
    for j in 1..=3 {
        for k in 1..=3 {
            let a = measurement_set(j, 0)?;
            let b = measurement_set(k, N_PAIRS)?;
            let charges = [
                ChargeObservable::from_operator(&a[0])?,
                ChargeObservable::from_operator(&a[1])?,
                ChargeObservable::from_operator(&b[0])?,
                ChargeObservable::from_operator(&b[1])?,
            ];
            for (o, q) in measurement_distribution(state, &charges)? {
                let (x, y) = (encode_outcome(&o[..2]), encode_outcome(&o[2..]));
                let prev = *p.at(j, k, x, y);
                p.set(j, k, x, y, prev + q);
            }
        }
    }
    Ok(p)
}

/// The 4-pair distribution obtained by simulating the measurement sets on
/// four shared pairs.
pub fn simulated_four_pair_distribution() -> Result<JointDistribution<Rational>> {
    exact_from_f64(&simulated_distribution(&AccessibleState::canonical_shared(N_PAIRS)?)?)
}

/// `λ = (ν_1, ν_2, ν_3, μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HiddenVariable {
    pub nu: [i8; 3],
    pub mu: i8,
}

impl HiddenVariable {
    /// All 16 values.
    pub fn all() -> Vec<Self> {
        (0..16)
            .map(|bits: u8| {
                let s = |b: u8| if bits >> b & 1 == 1 { -1 } else { 1 };
                Self {
                    nu: [s(0), s(1), s(2)],
                    mu: s(3),
                }
            })
            .collect()
    }

    pub fn alice(&self, j: usize) -> [i8; 2] {
        let nu = self.nu[j - 1];
        [nu, self.mu * nu]
    }

    pub fn bob(&self, k: usize) -> [i8; 2] {
        let nu = self.nu[k - 1];
        [-nu, -self.mu * nu]
    }
}

/// The distribution induced by the response functions under `p(λ) = 1/16`.
pub fn four_pair_lhv() -> JointDistribution<Rational> {
    let mut p = JointDistribution::zeros(3, 2);
    for lambda in HiddenVariable::all() {
        for j in 1..=3 {
            for k in 1..=3 {
                let (a, b) = (encode_outcome(&lambda.alice(j)), encode_outcome(&lambda.bob(k)));
                let prev = *p.at(j, k, a, b);
                p.set(j, k, a, b, prev + Rational::new(1, 16));
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let p = four_pair_distribution();
        assert_eq!(*p.get(&[1, 1], &[-1, -1], 1, 1).unwrap(), Rational::new(1, 4));
        assert_eq!(*p.get(&[1, 1], &[1, -1], 1, 2).unwrap(), Rational::from_integer(0));
        assert_eq!(*p.get(&[1, -1], &[-1, 1], 2, 3).unwrap(), Rational::new(1, 8));
        assert!(p.is_normalized());
        assert!(p.is_non_signalling());
    }

    #[test]
    fn measurement_sets() {
        assert_eq!(measurement_set(2, 0).unwrap()[1].to_string(), "-i c2 c4");
        assert_eq!(measurement_set(3, 4).unwrap()[0].to_string(), "i c5 c8");
    }

    #[test]
    fn simulation_matches_formula() {
        assert_eq!(simulated_four_pair_distribution().unwrap(), four_pair_distribution());
    }

    #[test]
    fn lhv_reproduces_distribution() {
        let lambda = HiddenVariable { nu: [1, 1, 1], mu: 1 };
        assert_eq!(lambda.alice(1), [1, 1]);
        assert_eq!(lambda.bob(1), [-1, -1]);
        assert_eq!(HiddenVariable::all().len(), 16);
        let lhv = four_pair_lhv();
        assert_eq!(*lhv.get(&[1, 1], &[-1, -1], 1, 1).unwrap(), Rational::new(1, 4));
        assert_eq!(lhv, four_pair_distribution());
    }
}
