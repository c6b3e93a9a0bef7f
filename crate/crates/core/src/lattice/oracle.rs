use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use super::{LatticeBasis, ModulusStructure};
use crate::error::{Error, Result};
use crate::exactlinalg::{format_rational, lcm_of_denominators, vector_to_json, Rational};
use crate::exec::Exec;

/// `d_p(t, L)^p` together with a closest lattice vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceResult {
    pub p: u32,
    pub dist_pow_p: Rational,
    pub witness: Vec<Rational>,
}

impl DistanceResult {
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "dist_pow_p": format_rational(&self.dist_pow_p),
            "witness": vector_to_json(&self.witness),
        })
    }
}

pub(crate) fn check_p(p: u32) -> Result<()> {
    if p == 1 || p == 2 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "norm index p = {p} is not supported (use 1 or 2)"
        )))
    }
}

/// Per-coordinate cost table: `cost[i][a]` is `min_z |T_i - D(a + d z)|^p` in units of
/// `1/D^p`, `wit[i][a]` the minimising lattice coordinate `a + d z` (smaller on ties).
struct CostTable {
    cost: Vec<Vec<BigInt>>,
    wit: Vec<Vec<BigInt>>,
    scale_pow: BigInt,
}

impl CostTable {
    fn build(t: &[Rational], d: i64, p: u32) -> Self {
        let den = lcm_of_denominators(t.iter());
        let modulus = &den * BigInt::from(d);
        let mut cost = Vec::with_capacity(t.len());
        let mut wit = Vec::with_capacity(t.len());
        for ti in t {
            let scaled = (ti * &den).to_integer();
            let mut crow = Vec::with_capacity(d as usize);
            let mut wrow = Vec::with_capacity(d as usize);
            for a in 0..d {
                let diff = &scaled - &den * BigInt::from(a);
                let (z, r) = diff.div_mod_floor(&modulus);
                let up = &modulus - &r;
                // r: distance down to a + d z, up: distance to a + d (z + 1)
                let (dist, z) = if r <= up { (r, z) } else { (up, z + 1) };
                crow.push(num_traits::pow(dist, p as usize));
                wrow.push(BigInt::from(a) + BigInt::from(d) * z);
            }
            cost.push(crow);
            wit.push(wrow);
        }
        CostTable {
            cost,
            wit,
            scale_pow: num_traits::pow(den, p as usize),
        }
    }

    fn witness_cmp(&self, a: &[i64], b: &[i64]) -> Ordering {
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            let o = self.wit[i][*x as usize].cmp(&self.wit[i][*y as usize]);
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    }

    fn witness(&self, v: &[i64]) -> Vec<Rational> {
        v.iter()
            .enumerate()
            .map(|(i, &a)| Rational::from_integer(self.wit[i][a as usize].clone()))
            .collect()
    }

    /// Small-integer copy of the cost table when every sum fits in `i128`.
    fn narrow(&self) -> Option<Vec<Vec<i128>>> {
        let n = self.cost.len().max(1) as i128;
        let limit = i128::MAX / n;
        self.cost
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.to_i128().filter(|&x| x <= limit))
                    .collect::<Option<Vec<_>>>()
            })
            .collect()
    }

    /// Index into `reps` of the best candidate (cost, then lexicographic witness).
    fn scan(&self, reps: &[Vec<i64>], skip_zero: bool, exec: Exec) -> Option<(BigInt, usize)> {
        let start = usize::from(skip_zero);
        let len = reps.len().saturating_sub(start);
        let pick = |a: (BigInt, usize), b: (BigInt, usize)| match a.0.cmp(&b.0) {
            Ordering::Less => a,
            Ordering::Greater => b,
            Ordering::Equal => match self.witness_cmp(&reps[a.1], &reps[b.1]) {
                Ordering::Greater => b,
                _ => a,
            },
        };
        if let Some(small) = self.narrow() {
            let best = exec.reduce_range(
                len,
                |j| {
                    let v = &reps[start + j];
                    let total: i128 = v
                        .iter()
                        .enumerate()
                        .map(|(i, &a)| small[i][a as usize])
                        .sum();
                    (total, start + j)
                },
                |a, b| match a.0.cmp(&b.0) {
                    Ordering::Less => a,
                    Ordering::Greater => b,
                    Ordering::Equal => match self.witness_cmp(&reps[a.1], &reps[b.1]) {
                        Ordering::Greater => b,
                        _ => a,
                    },
                },
            )?;
            return Some((BigInt::from(best.0), best.1));
        }
        exec.reduce_range(
            len,
            |j| {
                let v = &reps[start + j];
                let total = v.iter().enumerate().fold(BigInt::zero(), |acc, (i, &a)| {
                    acc + &self.cost[i][a as usize]
                });
                (total, start + j)
            },
            pick,
        )
    }
}

fn check_args(l: &LatticeBasis, m: &ModulusStructure, t: &[Rational], p: u32) -> Result<()> {
    check_p(p)?;
    if !l.is_full_rank() {
        return Err(Error::RankError(
            "distance oracle needs a full-rank lattice".into(),
        ));
    }
    if t.len() != l.dim() || m.dim() != l.dim() {
        return Err(Error::invalid(format!(
            "input of dimension {} for lattice of dimension {}",
            t.len(),
            l.dim()
        )));
    }
    Ok(())
}

/// Exact `d_p(t, L)^p` by scanning every coset representative `v ∈ V` and, per
/// coordinate, the two multiples of `d` nearest to `t_i - v_i`.
///
/// Ties are broken towards the lexicographically smallest closest vector.
pub fn distance_oracle(
    l: &LatticeBasis,
    m: &ModulusStructure,
    t: &[Rational],
    p: u32,
) -> Result<DistanceResult> {
    distance_oracle_with(Exec::default(), l, m, t, p)
}

pub fn distance_oracle_with(
    exec: Exec,
    l: &LatticeBasis,
    m: &ModulusStructure,
    t: &[Rational],
    p: u32,
) -> Result<DistanceResult> {
    check_args(l, m, t, p)?;
    let table = CostTable::build(t, m.d(), p);
    let (total, idx) = table
        .scan(m.reps(), false, exec)
        .expect("V always contains the zero vector");
    Ok(DistanceResult {
        p,
        dist_pow_p: Rational::new(total, table.scale_pow.clone()),
        witness: table.witness(&m.reps()[idx]),
    })
}

/// Minimum `||v||_p^p` over nonzero `v ∈ L`, with the lexicographically smallest
/// minimiser.
pub fn shortest_vector(l: &LatticeBasis, m: &ModulusStructure, p: u32) -> Result<DistanceResult> {
    let zero = vec![Rational::zero(); l.dim()];
    check_args(l, m, &zero, p)?;
    let n = l.dim();
    let d = m.d();
    // inside the zero coset the shortest nonzero vectors are ±d e_j; -d e_1 is the
    // lexicographically smallest of them
    let mut best_cost = num_traits::pow(BigInt::from(d), p as usize);
    let mut best: Vec<Rational> = (0..n)
        .map(|i| Rational::from_integer(BigInt::from(if i == 0 { -d } else { 0 })))
        .collect();
    let table = CostTable::build(&zero, d, p);
    if let Some((cost, idx)) = table.scan(m.reps(), true, Exec::default()) {
        let w = table.witness(&m.reps()[idx]);
        if cost < best_cost || (cost == best_cost && w < best) {
            best_cost = cost;
            best = w;
        }
    }
    Ok(DistanceResult {
        p,
        dist_pow_p: Rational::from_integer(best_cost),
        witness: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::{int, ratio, RatMatrix};
    use crate::lattice::find_modulus;

    fn lat(rows: &[&[i64]]) -> (LatticeBasis, ModulusStructure) {
        let l = LatticeBasis::new(RatMatrix::from_i64_rows(rows)).unwrap();
        let m = find_modulus(&l).unwrap();
        (l, m)
    }

    /// Brute force over lattice coefficient boxes; independent of the coset scan.
    fn brute(l: &LatticeBasis, t: &[Rational], p: u32, c: i64) -> Rational {
        let n = l.dim();
        let mut best: Option<Rational> = None;
        let mut coef = vec![-c; n];
        loop {
            let x: Vec<Rational> = coef.iter().map(|&k| int(k)).collect();
            let v = l.basis().left_mul_vec(&x);
            let cost = t.iter().zip(&v).fold(Rational::zero(), |acc, (a, b)| {
                acc + crate::exactlinalg::abs_pow(&(a - b), p)
            });
            if best.as_ref().is_none_or(|b| &cost < b) {
                best = Some(cost);
            }
            let mut i = 0;
            while i < n && coef[i] == c {
                coef[i] = -c;
                i += 1;
            }
            if i == n {
                break;
            }
            coef[i] += 1;
        }
        best.unwrap()
    }

    #[test]
    fn integer_lattice_rounds_coordinates() {
        let (l, m) = lat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let t = vec![ratio(1, 2), int(3), ratio(-7, 3)];
        let r1 = distance_oracle(&l, &m, &t, 1).unwrap();
        assert_eq!(r1.dist_pow_p, ratio(1, 2) + ratio(1, 3));
        // tie at 1/2 goes to the smaller witness
        assert_eq!(r1.witness, vec![int(0), int(3), int(-2)]);
        let r2 = distance_oracle(&l, &m, &t, 2).unwrap();
        assert_eq!(r2.dist_pow_p, ratio(1, 4) + ratio(1, 9));
    }

    #[test]
    fn two_z2_corner() {
        let (l, m) = lat(&[&[2, 0], &[0, 2]]);
        let r = distance_oracle(&l, &m, &[int(1), int(1)], 1).unwrap();
        assert_eq!(r.dist_pow_p, int(2));
        assert_eq!(r.witness, vec![int(0), int(0)]);
    }

    #[test]
    fn agrees_with_coefficient_brute_force() {
        let (l, m) = lat(&[&[1, 1, 0], &[0, 2, 1], &[0, 0, 3]]);
        let inputs = [
            vec![ratio(1, 2), ratio(5, 3), int(-1)],
            vec![int(2), int(2), int(2)],
            vec![ratio(-9, 4), ratio(1, 7), ratio(11, 5)],
        ];
        for t in &inputs {
            for p in [1, 2] {
                let fast = distance_oracle(&l, &m, t, p).unwrap();
                assert_eq!(fast.dist_pow_p, brute(&l, t, p, 6), "t={t:?} p={p}");
                assert!(l.contains(&fast.witness).unwrap());
            }
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let (l, m) = lat(&[&[1, 1, 1, 1], &[0, 2, 0, 2], &[0, 0, 2, 2], &[0, 0, 0, 4]]);
        let t = vec![ratio(1, 3), int(1), ratio(5, 2), int(2)];
        let a = distance_oracle_with(Exec::Sequential, &l, &m, &t, 1).unwrap();
        let b = distance_oracle_with(Exec::Parallel, &l, &m, &t, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn huge_denominators_use_the_wide_path() {
        let (l, m) = lat(&[&[2, 0], &[0, 2]]);
        let big = Rational::new(BigInt::from(1) << 130u32, (BigInt::from(1) << 129u32) + 1);
        let r = distance_oracle(&l, &m, &[big.clone(), int(0)], 2).unwrap();
        let expect = crate::exactlinalg::abs_pow(&(&big - int(2)), 2);
        assert_eq!(r.dist_pow_p, expect);
    }

    #[test]
    fn shortest_vector_examples() {
        let (l, m) = lat(&[&[1, 0], &[0, 1]]);
        let s = shortest_vector(&l, &m, 1).unwrap();
        assert_eq!(s.dist_pow_p, int(1));
        assert_eq!(s.witness, vec![int(-1), int(0)]);
        let (l, m) = lat(&[&[2, 0], &[0, 2]]);
        assert_eq!(shortest_vector(&l, &m, 1).unwrap().dist_pow_p, int(2));
        let (l, m) = lat(&[&[1, 1], &[0, 2]]);
        let s = shortest_vector(&l, &m, 2).unwrap();
        assert_eq!(s.dist_pow_p, int(2));
        assert_eq!(s.witness, vec![int(-1), int(-1)]);
    }

    #[test]
    fn rejects_unsupported_norms() {
        let (l, m) = lat(&[&[1]]);
        assert!(distance_oracle(&l, &m, &[int(0)], 3).is_err());
    }
}
