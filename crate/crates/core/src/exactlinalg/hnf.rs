use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::RatMatrix;
use crate::error::{Error, Result};

/// Row-style Hermite normal form of an integer matrix.
///
/// The result generates the same row lattice, is in echelon form with positive
/// pivots, every entry above a pivot lies in `[0, pivot)`, and zero rows are dropped,
/// so the number of rows equals the rank.
pub fn hnf(m: &RatMatrix) -> Result<RatMatrix> {
    if !m.is_integral() {
        return Err(Error::invalid("HNF requires integer entries"));
    }
    let rows = hnf_integer(m.to_bigint_rows()?, m.cols());
    RatMatrix::from_bigint_rows(&rows, m.cols())
}

pub fn hnf_integer(mut a: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        // Euclid on column c among rows r.. until a single nonzero entry remains
        loop {
            let pick = (r..a.len())
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
            let Some(p) = pick else { break };
            a.swap(r, p);
            let pivot_row = a[r].clone();
            let mut done = true;
            for row in a.iter_mut().skip(r + 1) {
                if row[c].is_zero() {
                    continue;
                }
                let q = row[c].div_floor(&pivot_row[c]);
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
                if !row[c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -x.clone();
            }
        }
        let pivot_row = a[r].clone();
        for row in a.iter_mut().take(r) {
            let q = row[c].div_floor(&pivot_row[c]);
            if q.is_zero() {
                continue;
            }
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= &q * y;
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::{determinant, int, ratio};
    use std::collections::BTreeSet;

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_i64_rows(rows)
    }

    /// All integer combinations with coefficients in [-c, c], clipped to the box [-w, w]^n.
    fn box_points(b: &RatMatrix, c: i64, w: i64) -> BTreeSet<Vec<i64>> {
        let k = b.rows();
        let n = b.cols();
        let mut out = BTreeSet::new();
        let mut coef = vec![-c; k];
        loop {
            let mut p = vec![0i64; n];
            for (i, &x) in coef.iter().enumerate() {
                for (j, v) in p.iter_mut().enumerate() {
                    *v += x * i64::try_from(b.get(i, j).to_integer()).unwrap();
                }
            }
            if p.iter().all(|v| v.abs() <= w) {
                out.insert(p);
            }
            let mut i = 0;
            while i < k && coef[i] == c {
                coef[i] = -c;
                i += 1;
            }
            if i == k {
                break;
            }
            coef[i] += 1;
        }
        out
    }

    #[test]
    fn hnf_examples() {
        let a = m(&[&[2, 0], &[1, 1]]);
        let h = hnf(&a).unwrap();
        assert_eq!(h, m(&[&[1, 1], &[0, 2]]));
        assert_eq!(box_points(&a, 8, 4), box_points(&h, 8, 4));

        assert_eq!(
            hnf(&RatMatrix::identity(3)).unwrap(),
            RatMatrix::identity(3)
        );

        let b = m(&[&[0, 3], &[3, 0]]);
        let h = hnf(&b).unwrap();
        assert_eq!(h, m(&[&[3, 0], &[0, 3]]));
        assert_eq!(box_points(&b, 4, 4), box_points(&h, 4, 4));
    }

    #[test]
    fn hnf_drops_dependent_rows_and_reduces_above_pivots() {
        let a = m(&[&[4, 6, 2], &[2, 3, 1], &[0, 5, 7], &[0, 0, 9]]);
        let h = hnf(&a).unwrap();
        assert_eq!(h.rows(), 3);
        for i in 0..h.rows() {
            let pc = (0..3).find(|&c| h.get(i, c) != &int(0)).unwrap();
            assert!(h.get(i, pc) > &int(0));
            for r in 0..i {
                assert!(h.get(r, pc) >= &int(0) && h.get(r, pc) < h.get(i, pc));
            }
        }
        assert_eq!(
            determinant(&h).unwrap().abs(),
            determinant(&m(&[&[2, 3, 1], &[0, 5, 7], &[0, 0, 9]]))
                .unwrap()
                .abs()
        );
    }

    #[test]
    fn hnf_rejects_fractions() {
        let a = RatMatrix::from_rows(vec![vec![ratio(1, 2)]], 1).unwrap();
        assert!(hnf(&a).is_err());
    }
}
