use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::exactlinalg::{int, round_half_away, Rational};

/// `t = Σ_i 2^i w_i + 2^m residual` with bit planes `w_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitDecomposition {
    pub planes: Vec<Vec<u8>>,
    pub residual: Vec<Rational>,
}

impl BitDecomposition {
    pub fn reconstruct(&self) -> Vec<Rational> {
        let m = self.planes.len();
        let scale = int(1i64 << m);
        self.residual
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let low: i64 = self
                    .planes
                    .iter()
                    .enumerate()
                    .map(|(i, w)| i64::from(w[j]) << i)
                    .sum();
                int(low) + r * &scale
            })
            .collect()
    }
}

/// `round(x) mod 2^m`, rounding half away from zero.
pub(crate) fn low_bits(x: &Rational, m: usize) -> u64 {
    let modulus = BigInt::one() << m;
    round_half_away(x)
        .mod_floor(&modulus)
        .to_u64()
        .expect("residue below 2^m")
}

/// Bit planes of `round(t) mod 2^m` and the exact residual `(t - Σ 2^i w_i) / 2^m`.
pub fn bit_decompose(t: &[Rational], m: usize) -> BitDecomposition {
    let low: Vec<u64> = t.iter().map(|x| low_bits(x, m)).collect();
    let planes = (0..m)
        .map(|i| low.iter().map(|u| ((u >> i) & 1) as u8).collect())
        .collect();
    let scale = int(1i64 << m);
    let residual = t
        .iter()
        .zip(&low)
        .map(|(x, &u)| (x - int(u as i64)) / &scale)
        .collect();
    BitDecomposition { planes, residual }
}
