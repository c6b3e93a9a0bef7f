use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::LatticeBasis;
use crate::error::{Error, Result};
use crate::exactlinalg::{inverse, Rational};

/// Default cap on `|L mod d|`.
pub const DEFAULT_COSET_CAP: usize = 1 << 20;

/// `d` with `d Z^n ⊆ L`, together with `V = L mod d ⊆ {0..d-1}^n`.
#[derive(Clone, Debug)]
pub struct ModulusStructure {
    d: i64,
    reps: Vec<Vec<i64>>,
    index: HashSet<Vec<i64>>,
}

impl ModulusStructure {
    pub fn d(&self) -> i64 {
        self.d
    }

    /// Coset representatives, sorted lexicographically. The zero vector is first.
    pub fn reps(&self) -> &[Vec<i64>] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.reps.first().map_or(0, Vec::len)
    }

    /// Whether an already-reduced vector in `{0..d-1}^n` lies in `V`.
    pub fn contains_reduced(&self, v: &[i64]) -> bool {
        self.index.contains(v)
    }

    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        v.iter().map(|x| x.rem_euclid(self.d)).collect()
    }

    /// Membership of an integer vector in `L`, via `v ∈ L ⇔ v mod d ∈ V`.
    pub fn contains(&self, v: &[i64]) -> bool {
        self.contains_reduced(&self.reduce(v))
    }

    /// `(x + v) mod d`.
    pub fn shift(&self, x: &[i64], v: &[i64]) -> Vec<i64> {
        x.iter()
            .zip(v)
            .map(|(a, b)| (a + b).rem_euclid(self.d))
            .collect()
    }
}

pub fn find_modulus(l: &LatticeBasis) -> Result<ModulusStructure> {
    find_modulus_with_cap(l, DEFAULT_COSET_CAP)
}

/// Smallest `d` with `d Z^n ⊆ L` and the enumeration of `L mod d`.
///
/// `d e_i ∈ L` iff `d` times row `i` of `B^{-1}` is integral, so the smallest such `d`
/// is the lcm of the denominators of `B^{-1}`; it always divides `|det L|`. `V` is the
/// additive closure of the basis rows reduced mod `d`.
pub fn find_modulus_with_cap(l: &LatticeBasis, cap: usize) -> Result<ModulusStructure> {
    let det = l.determinant()?;
    let inv = inverse(l.basis())?;
    let d_big = inv.common_denominator();
    debug_assert!(det.is_multiple_of(&d_big));
    let d = d_big
        .to_i64()
        .ok_or_else(|| Error::ResourceLimit(format!("modulus {d_big} exceeds i64")))?;
    let n = l.dim();
    let size = num_traits::pow(d_big.clone(), n) / &det;
    if size > BigInt::from(cap) {
        return Err(Error::ResourceLimit(format!(
            "|L mod {d}| = {size} exceeds the cap {cap}"
        )));
    }
    let expected = size.to_usize().expect("bounded by cap");

    let gens: Vec<Vec<i64>> = l
        .basis()
        .row_iter()
        .map(|r| r.iter().map(|x| reduce_int(x, &d_big)).collect())
        .collect();
    let zero = vec![0i64; n];
    let mut index = HashSet::with_capacity(expected);
    index.insert(zero.clone());
    let mut queue = VecDeque::from([zero]);
    while let Some(v) = queue.pop_front() {
        for g in &gens {
            let w: Vec<i64> = v.iter().zip(g).map(|(a, b)| (a + b) % d).collect();
            if index.insert(w.clone()) {
                queue.push_back(w);
            }
        }
    }
    debug_assert_eq!(index.len(), expected);
    let mut reps: Vec<Vec<i64>> = index.iter().cloned().collect();
    reps.sort();
    Ok(ModulusStructure { d, reps, index })
}

fn reduce_int(x: &Rational, d: &BigInt) -> i64 {
    x.to_integer()
        .mod_floor(d)
        .to_i64()
        .expect("residue below an i64 modulus")
}

impl ModulusStructure {
    /// `|V| * |det L| = d^n`, exposed for cross-checks.
    pub fn index_identity_holds(&self, det: &BigInt) -> bool {
        let lhs = BigInt::from(self.reps.len()) * det;
        lhs == num_traits::pow(BigInt::from(self.d), self.dim())
    }
}
