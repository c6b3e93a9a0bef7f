use std::ops::Deref;

use super::BinaryLinearCode;
use crate::error::{Error, Result};

/// `RM(k, r)`: evaluation tables of all `r`-variate polynomials of degree `≤ k` over
/// `F_2` at the `2^r` points of `F_2^r`.
///
/// Point `j` is the bit pattern of `j` read with `x_1` as the most significant bit,
/// so points are in lexicographic order. Generator rows are monomials in
/// graded-lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReedMullerCode {
    degree: usize,
    vars: usize,
    code: BinaryLinearCode,
}

impl ReedMullerCode {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn code(&self) -> &BinaryLinearCode {
        &self.code
    }
}

impl Deref for ReedMullerCode {
    type Target = BinaryLinearCode;

    fn deref(&self) -> &BinaryLinearCode {
        &self.code
    }
}

fn combinations(r: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, r: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..=r - left {
            cur.push(v);
            go(v + 1, r, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, r, size, &mut Vec::new(), &mut out);
    out
}

pub fn rm_code(k: usize, r: usize) -> Result<ReedMullerCode> {
    if k > r {
        return Err(Error::invalid(format!("RM({k},{r}) needs k <= r")));
    }
    if r > 20 {
        return Err(Error::ResourceLimit(format!(
            "RM codes with r = {r} > 20 variables"
        )));
    }
    let n = 1usize << r;
    let mut rows = Vec::new();
    for deg in 0..=k {
        for mono in combinations(r, deg) {
            // variable x_{v+1} is bit (r-1-v) of the point index
            let mask = mono.iter().fold(0usize, |m, &v| m | (1 << (r - 1 - v)));
            rows.push((0..n).map(|j| u8::from(j & mask == mask)).collect());
        }
    }
    Ok(ReedMullerCode {
        degree: k,
        vars: r,
        code: BinaryLinearCode::new(n, rows)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::schur_condition;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn small_codes() {
        let c = rm_code(0, 2).unwrap();
        assert_eq!(c.generator(), &[vec![1, 1, 1, 1]]);
        assert!(rm_code(2, 2).unwrap().is_full());
        let c = rm_code(1, 3).unwrap();
        assert_eq!(c.k(), 4);
        // enumerate all 16 codewords for the minimum weight
        let min = c
            .codewords()
            .unwrap()
            .iter()
            .map(|w| w.iter().filter(|&&b| b == 1).count())
            .filter(|&w| w > 0)
            .min();
        assert_eq!(min, Some(4));
        assert!(rm_code(3, 2).is_err());
    }

    #[test]
    fn generator_order_is_graded_lex() {
        let c = rm_code(1, 2).unwrap();
        // 1, x1, x2 at points 00, 01, 10, 11 (x1 is the high bit)
        assert_eq!(
            c.generator(),
            &[vec![1, 1, 1, 1], vec![0, 0, 1, 1], vec![0, 1, 0, 1]]
        );
    }

    #[test]
    fn dimensions_and_distances() {
        for r in 1..=5 {
            for k in 0..=r {
                let c = rm_code(k, r).unwrap();
                let dim: usize = (0..=k).map(|i| binomial(r, i)).sum();
                assert_eq!(c.k(), dim);
                if r <= 4 {
                    assert_eq!(c.minimum_distance().unwrap(), Some(1 << (r - k)));
                }
            }
        }
    }

    #[test]
    fn schur_examples() {
        let fam = [
            rm_code(1, 3).unwrap().code().clone(),
            rm_code(2, 3).unwrap().code().clone(),
        ];
        assert!(schur_condition(&fam).unwrap());
        let rev = [fam[1].clone(), fam[0].clone()];
        assert!(!schur_condition(&rev).unwrap());
        let c = rm_code(1, 2).unwrap().code().clone();
        assert!(!schur_condition(&[c.clone(), c]).unwrap());
        let short = BinaryLinearCode::zero(4);
        assert!(schur_condition(&[short, fam[0].clone()]).is_err());
    }

    #[test]
    fn doubling_degree_families_satisfy_schur() {
        for r in 1..=4usize {
            for m in 1..=3usize {
                if (1 << (m - 1)) > r {
                    continue;
                }
                let fam: Vec<_> = (0..m)
                    .map(|i| rm_code(1 << i, r).unwrap().code().clone())
                    .collect();
                assert!(schur_condition(&fam).unwrap(), "r={r} m={m}");
            }
        }
    }
}
