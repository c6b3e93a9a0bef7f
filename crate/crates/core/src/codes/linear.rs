use std::cmp::Ordering;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Largest code dimension `k` the enumeration oracles will walk (`2^k` codewords).
pub const DEFAULT_CODEWORD_CAP: usize = 1 << 20;

/// Binary linear code `C ⊆ F_2^n` with linearly independent generator rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryLinearCode {
    n: usize,
    generator: Vec<Vec<u8>>,
    // row-echelon copy used for membership: (pivot, row)
    echelon: Vec<(usize, Vec<u8>)>,
}

fn xor_into(dst: &mut [u8], src: &[u8]) {
    for (a, b) in dst.iter_mut().zip(src) {
        *a ^= b;
    }
}

/// Inserts `row` into an echelon basis, returning false if it was dependent.
fn insert_echelon(echelon: &mut Vec<(usize, Vec<u8>)>, mut row: Vec<u8>) -> bool {
    for (p, e) in echelon.iter() {
        if row[*p] == 1 {
            xor_into(&mut row, e);
        }
    }
    let Some(p) = row.iter().position(|&b| b == 1) else {
        return false;
    };
    // keep pivots unique: clear the new pivot from existing rows
    for (_, e) in echelon.iter_mut() {
        if e[p] == 1 {
            xor_into(e, &row);
        }
    }
    echelon.push((p, row));
    true
}

impl BinaryLinearCode {
    pub fn new(n: usize, generator: Vec<Vec<u8>>) -> Result<Self> {
        let mut echelon = Vec::new();
        for (i, row) in generator.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "generator row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|&b| b > 1) {
                return Err(Error::invalid(format!(
                    "generator row {i} is not a bit vector"
                )));
            }
            if !insert_echelon(&mut echelon, row.clone()) {
                return Err(Error::invalid(format!(
                    "generator row {i} is dependent on the previous rows"
                )));
            }
        }
        Ok(BinaryLinearCode {
            n,
            generator,
            echelon,
        })
    }

    /// Code spanned by `rows`, dropping dependent rows.
    pub fn from_spanning(n: usize, rows: Vec<Vec<u8>>) -> Result<Self> {
        let mut echelon = Vec::new();
        let mut kept = Vec::new();
        for row in rows {
            if row.len() != n || row.iter().any(|&b| b > 1) {
                return Err(Error::invalid(
                    "spanning rows must be bit vectors of length n",
                ));
            }
            if insert_echelon(&mut echelon, row.clone()) {
                kept.push(row);
            }
        }
        Ok(BinaryLinearCode {
            n,
            generator: kept,
            echelon,
        })
    }

    /// The zero code `{0^n}`.
    pub fn zero(n: usize) -> Self {
        Self::new(n, Vec::new()).expect("empty generator")
    }

    /// All of `F_2^n`.
    pub fn full(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| u8::from(i == j)).collect())
            .collect();
        Self::new(n, rows).expect("identity rows are independent")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.generator.len()
    }

    pub fn generator(&self) -> &[Vec<u8>] {
        &self.generator
    }

    pub fn is_full(&self) -> bool {
        self.k() == self.n
    }

    pub fn contains(&self, w: &[u8]) -> bool {
        if w.len() != self.n {
            return false;
        }
        let mut row = w.to_vec();
        for (p, e) in &self.echelon {
            if row[*p] == 1 {
                xor_into(&mut row, e);
            }
        }
        row.iter().all(|&b| b == 0)
    }

    /// All `2^k` codewords in Gray-code order.
    pub fn codewords(&self) -> Result<Vec<Vec<u8>>> {
        self.check_cap(DEFAULT_CODEWORD_CAP)?;
        let mut out = Vec::with_capacity(1 << self.k());
        self.for_each_codeword(|c| out.push(c.to_vec()));
        Ok(out)
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        if self.k() >= usize::BITS as usize || (1usize << self.k()) > cap {
            return Err(Error::ResourceLimit(format!(
                "code of dimension {} has more than {cap} codewords",
                self.k()
            )));
        }
        Ok(())
    }

    fn for_each_codeword(&self, mut f: impl FnMut(&[u8])) {
        let mut c = vec![0u8; self.n];
        f(&c);
        for step in 1u64..(1u64 << self.k()) {
            let flip = step.trailing_zeros() as usize;
            xor_into(&mut c, &self.generator[flip]);
            f(&c);
        }
    }

    /// Exact `d_H(w, C)` with the lexicographically smallest closest codeword.
    pub fn hamming_distance_oracle(&self, w: &[u8]) -> Result<(usize, Vec<u8>)> {
        if w.len() != self.n {
            return Err(Error::invalid(format!(
                "word of length {} for code of length {}",
                w.len(),
                self.n
            )));
        }
        self.check_cap(DEFAULT_CODEWORD_CAP)?;
        let mut best: Option<(usize, Vec<u8>)> = None;
        self.for_each_codeword(|c| {
            let dist = c.iter().zip(w).filter(|(a, b)| a != b).count();
            let better = match &best {
                None => true,
                Some((bd, bc)) => match dist.cmp(bd) {
                    Ordering::Less => true,
                    Ordering::Equal => c < bc.as_slice(),
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((dist, c.to_vec()));
            }
        });
        Ok(best.expect("a code always contains zero"))
    }

    /// Minimum weight of a nonzero codeword (`None` for the zero code).
    pub fn minimum_distance(&self) -> Result<Option<usize>> {
        self.check_cap(DEFAULT_CODEWORD_CAP)?;
        let mut best: Option<usize> = None;
        self.for_each_codeword(|c| {
            let w = c.iter().filter(|&&b| b == 1).count();
            if w > 0 && best.is_none_or(|b| w < b) {
                best = Some(w);
            }
        });
        Ok(best)
    }

    pub fn is_subcode_of(&self, other: &BinaryLinearCode) -> bool {
        self.n == other.n && self.generator.iter().all(|g| other.contains(g))
    }

    pub fn to_json(&self) -> Value {
        json!({ "n": self.n, "k": self.k(), "generator": self.generator })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::invalid("code JSON is missing \"n\""))? as usize;
        let generator: Vec<Vec<u8>> = serde_json::from_value(
            v.get("generator")
                .cloned()
                .ok_or_else(|| Error::invalid("code JSON is missing \"generator\""))?,
        )?;
        let code = Self::new(n, generator)?;
        if let Some(k) = v.get("k").and_then(Value::as_u64) {
            if k as usize != code.k() {
                return Err(Error::invalid(format!(
                    "declared k = {k} but generator has {} rows",
                    code.k()
                )));
            }
        }
        Ok(code)
    }
}

/// Coordinatewise product `a * b`.
pub fn schur_product(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

/// Checks `C_0 ⊆ C_1 ⊆ ...` and `c * c' ∈ C_{i+1}` for all `c, c' ∈ C_i`.
///
/// The product is bilinear over `F_2`, so checking generator pairs suffices.
pub fn schur_condition(family: &[BinaryLinearCode]) -> Result<bool> {
    let Some(first) = family.first() else {
        return Ok(true);
    };
    if family.iter().any(|c| c.n() != first.n()) {
        return Err(Error::invalid("codes in the family have different lengths"));
    }
    for pair in family.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        if !lo.is_subcode_of(hi) {
            return Ok(false);
        }
        let g = lo.generator();
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                if !hi.contains(&schur_product(&g[i], &g[j])) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dependent_rows_rejected() {
        assert!(
            BinaryLinearCode::new(3, vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).is_err()
        );
        let c =
            BinaryLinearCode::from_spanning(3, vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]])
                .unwrap();
        assert_eq!(c.k(), 2);
        assert!(c.contains(&[1, 0, 1]));
        assert!(!c.contains(&[1, 0, 0]));
    }

    #[test]
    fn hamming_oracle_on_repetition_code() {
        let rep = BinaryLinearCode::new(4, vec![vec![1, 1, 1, 1]]).unwrap();
        assert_eq!(
            rep.hamming_distance_oracle(&[1, 1, 1, 1]).unwrap(),
            (0, vec![1, 1, 1, 1])
        );
        assert_eq!(
            rep.hamming_distance_oracle(&[0, 0, 0, 1]).unwrap(),
            (1, vec![0, 0, 0, 0])
        );
        // tie between 0000 and 1111: lexicographically smaller wins
        assert_eq!(
            rep.hamming_distance_oracle(&[0, 0, 1, 1]).unwrap(),
            (2, vec![0, 0, 0, 0])
        );
        assert!(rep.hamming_distance_oracle(&[0, 1]).is_err());
    }

    #[test]
    fn codeword_enumeration_is_complete() {
        let c = BinaryLinearCode::full(4);
        let mut words = c.codewords().unwrap();
        words.sort();
        words.dedup();
        assert_eq!(words.len(), 16);
        assert_eq!(
            BinaryLinearCode::zero(5).codewords().unwrap(),
            vec![vec![0; 5]]
        );
    }

    #[test]
    fn json_roundtrip() {
        let c = BinaryLinearCode::new(3, vec![vec![1, 0, 1]]).unwrap();
        let j = c.to_json();
        assert_eq!(j.to_string(), r#"{"generator":[[1,0,1]],"k":1,"n":3}"#);
        assert_eq!(BinaryLinearCode::from_json(&j).unwrap(), c);
    }
}
