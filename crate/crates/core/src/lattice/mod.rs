//! Integer lattices: membership, the `L mod d` coset structure, exact distance
//! oracles and projections onto `span(L)`.
//!
//! Coordinates are 0-based throughout the library; the CLI converts to 1-based.

mod modulus;
mod oracle;
mod span;

pub use modulus::{find_modulus, find_modulus_with_cap, ModulusStructure, DEFAULT_COSET_CAP};
pub(crate) use oracle::check_p;
pub use oracle::{distance_oracle, distance_oracle_with, shortest_vector, DistanceResult};
pub use span::{project_to_span, support_of_complement, ComplementProjector, SpanProjection};

use std::path::Path;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactlinalg::{
    determinant, hnf, int, is_integral, matrix_from_json, matrix_to_json, rank, solve, RatMatrix,
    Rational,
};

/// An integral lattice given by linearly independent integer basis rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    basis: RatMatrix,
}

impl LatticeBasis {
    pub fn new(basis: RatMatrix) -> Result<Self> {
        if !basis.is_integral() {
            return Err(Error::invalid("lattice basis must have integer entries"));
        }
        if rank(&basis) != basis.rows() {
            return Err(Error::invalid("lattice basis rows are linearly dependent"));
        }
        Ok(LatticeBasis { basis })
    }

    /// Lattice generated by an arbitrary integer generating set (reduced via HNF).
    pub fn from_generators(gens: &RatMatrix) -> Result<Self> {
        Ok(LatticeBasis { basis: hnf(gens)? })
    }

    pub fn integer_lattice(n: usize) -> Self {
        LatticeBasis {
            basis: RatMatrix::identity(n),
        }
    }

    /// `c * Z^n`.
    pub fn scaled_integer_lattice(n: usize, c: i64) -> Self {
        LatticeBasis {
            basis: RatMatrix::identity(n).scale(&int(c)),
        }
    }

    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim()
    }

    /// `|det(L)|` for a full-rank lattice.
    pub fn determinant(&self) -> Result<BigInt> {
        if !self.is_full_rank() {
            return Err(Error::RankError(format!(
                "rank {} lattice in dimension {}",
                self.rank(),
                self.dim()
            )));
        }
        Ok(determinant(&self.basis)?.to_integer().abs())
    }

    pub fn contains(&self, t: &[Rational]) -> Result<bool> {
        membership(self, t)
    }

    pub fn to_json(&self) -> Value {
        json!({ "basis": matrix_to_json(&self.basis), "dim": self.dim() })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let dim = v.get("dim").and_then(Value::as_u64).map(|d| d as usize);
        let basis = v
            .get("basis")
            .ok_or_else(|| Error::invalid("lattice JSON is missing \"basis\""))?;
        let basis = matrix_from_json(basis, dim)?;
        if let Some(d) = dim {
            if basis.cols() != d {
                return Err(Error::invalid(format!(
                    "basis has {} columns but dim is {d}",
                    basis.cols()
                )));
            }
        }
        Self::new(basis)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&serde_json::from_str(&text)?)
    }
}

/// True iff `t = x^T B` for an integer coefficient vector `x`.
pub fn membership(l: &LatticeBasis, t: &[Rational]) -> Result<bool> {
    if t.len() != l.dim() {
        return Err(Error::invalid(format!(
            "input of dimension {} for lattice of dimension {}",
            t.len(),
            l.dim()
        )));
    }
    if t.iter().all(Zero::is_zero) {
        return Ok(true);
    }
    if !t.iter().all(is_integral) {
        return Ok(false);
    }
    Ok(match solve(&l.basis, t)? {
        Some(x) => x.iter().all(is_integral),
        None => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::ratio;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn membership_examples() {
        let knap = LatticeBasis::new(RatMatrix::from_i64_rows(&[&[1, 0, 2], &[0, 1, 3]])).unwrap();
        assert!(membership(&knap, &v(&[1, 1, 5])).unwrap());
        assert!(membership(&knap, &v(&[0, 0, 0])).unwrap());
        assert!(!membership(&knap, &v(&[1, 1, 4])).unwrap());
        let two = LatticeBasis::scaled_integer_lattice(2, 2);
        assert!(!membership(&two, &v(&[1, 0])).unwrap());
        assert!(membership(&two, &v(&[2, -4])).unwrap());
        assert!(!membership(&two, &[ratio(1, 2), int(0)]).unwrap());
        assert!(membership(&two, &v(&[1])).is_err());
    }

    #[test]
    fn rejects_bad_bases() {
        assert!(LatticeBasis::new(RatMatrix::from_i64_rows(&[&[1, 2], &[2, 4]])).is_err());
        let frac = RatMatrix::from_rows(vec![vec![ratio(1, 2), int(0)]], 2).unwrap();
        assert!(LatticeBasis::new(frac).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let l = LatticeBasis::new(RatMatrix::from_i64_rows(&[&[1, 1], &[0, 2]])).unwrap();
        let j = l.to_json();
        assert_eq!(j.to_string(), r#"{"basis":[[1,1],[0,2]],"dim":2}"#);
        assert_eq!(LatticeBasis::from_json(&j).unwrap(), l);
        let empty: Value = serde_json::from_str(r#"{"basis": [], "dim": 1}"#).unwrap();
        let e = LatticeBasis::from_json(&empty).unwrap();
        assert_eq!((e.rank(), e.dim()), (0, 1));
    }
}
