use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};

use super::{LatticeTester, QueryAccess};
use crate::error::{Error, Result};
use crate::exactlinalg::{abs_pow, int, Rational};
use crate::lattice::{check_p, ComplementProjector, LatticeBasis};

/// Lifts a tester for inputs in `span(L)` to arbitrary inputs.
///
/// Reads every coordinate of `P`, rejects when `||t^⊥||_p^p >= (eps'/2)^p n`, and
/// otherwise runs the span tester on `t^∥`, serving coordinates in `P` from the
/// values already read.
#[derive(Clone, Debug)]
pub struct LiftedTester {
    projector: ComplementProjector,
    inner: Arc<dyn LatticeTester>,
    threshold: Rational,
    p: u32,
}

impl LiftedTester {
    /// `(eps'/2)^p n`.
    pub fn threshold(&self) -> &Rational {
        &self.threshold
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        self.projector.support()
    }
}

pub fn lift_tester_outside_span(
    l: &LatticeBasis,
    inner: Arc<dyn LatticeTester>,
    eps_prime: &Rational,
    p: u32,
) -> Result<LiftedTester> {
    check_p(p)?;
    if inner.dim() != l.dim() {
        return Err(Error::invalid(
            "span tester dimension does not match the lattice",
        ));
    }
    let half = eps_prime / int(2);
    let threshold = abs_pow(&half, p) * int(l.dim() as i64);
    Ok(LiftedTester {
        projector: ComplementProjector::new(l)?,
        inner,
        threshold,
        p,
    })
}

impl LatticeTester for LiftedTester {
    fn dim(&self) -> usize {
        self.projector.dim()
    }

    fn query_budget(&self) -> usize {
        self.projector.support().len() + self.inner.query_budget()
    }

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool {
        let n = self.dim();
        let mut seen: Vec<Option<Rational>> = vec![None; n];
        for &j in self.projector.support() {
            seen[j] = Some(t.query(j));
        }
        let perp = self
            .projector
            .perpendicular(|j| seen[j].clone().expect("support was read"));
        let norm = perp
            .iter()
            .fold(Rational::zero(), |acc, x| acc + abs_pow(x, self.p));
        if norm >= self.threshold {
            return false;
        }
        let mut parallel = QueryAccess::new(n, |j| match &seen[j] {
            Some(v) => v - &perp[j],
            // t^⊥ vanishes off P
            None => t.query(j),
        });
        self.inner.run(&mut parallel, rng)
    }

    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        let mut plan: Vec<usize> = self.projector.support().iter().copied().collect();
        plan.extend(self.inner.query_plan(rng));
        plan
    }
}

/// Smallest positive integer `D` with `D^2 min_{j∈P} ||proj(e_j)||_2^2 >= target^2`,
/// where `target = eps n^{1/p}`.
///
/// Then `d_p(D e_j, L) >= d_p(D e_j, span L) >= ||(D e_j)^⊥||_2 >= target` for every
/// `j ∈ P`, using `||x||_1 >= ||x||_2` when `p = 1`.
pub fn gadget_scale(projector: &ComplementProjector, eps: &Rational, p: u32) -> Result<BigInt> {
    check_p(p)?;
    let n = int(projector.dim() as i64);
    let target_sq = match p {
        1 => eps * eps * &n * &n,
        _ => eps * eps * &n,
    };
    let w_min = projector
        .support()
        .iter()
        .map(|&j| projector.axis_weight(j))
        .min()
        .ok_or_else(|| Error::invalid("lattice is full rank: no coordinates outside the span"))?;
    let ratio = target_sq / &w_min;
    let mut d = ratio.ceil().to_integer().sqrt().max(BigInt::one());
    while Rational::from_integer(&d * &d) < ratio {
        d += 1;
    }
    Ok(d)
}

/// `D e_j` for a uniform `j ∈ P`.
pub fn far_instance_outside_span(
    l: &LatticeBasis,
    eps: &Rational,
    p: u32,
    rng: &mut dyn RngCore,
) -> Result<Vec<Rational>> {
    if l.is_full_rank() {
        return Err(Error::invalid(
            "lattice is full rank: no coordinates outside the span",
        ));
    }
    let projector = ComplementProjector::new(l)?;
    let d = gadget_scale(&projector, eps, p)?;
    let support: Vec<usize> = projector.support().iter().copied().collect();
    let j = support[rng.gen_range(0..support.len())];
    let mut t = vec![Rational::zero(); l.dim()];
    t[j] = Rational::from_integer(d);
    Ok(t)
}

/// Smallest error of a deterministic non-adaptive `q`-query test on the gadget family
/// `{0} ∪ {D e_j : j ∈ P}`, exhausting every query set and every verdict function on
/// the observable answer patterns.
///
/// Error is `max(member error, fraction of gadgets accepted)`.
pub fn nonadaptive_gadget_error(n: usize, support: &BTreeSet<usize>, q: usize) -> Result<Rational> {
    if support.is_empty() {
        return Err(Error::invalid("empty gadget support"));
    }
    if q > n {
        return Err(Error::invalid("more queries than coordinates"));
    }
    let size = int(support.len() as i64);
    let mut best: Option<Rational> = None;
    for query_set in subsets(n, q) {
        let hit: Vec<usize> = query_set
            .iter()
            .copied()
            .filter(|j| support.contains(j))
            .collect();
        // observable patterns: all zeros, or D at one hit coordinate
        let patterns = hit.len() + 1;
        for verdicts in 0u64..(1u64 << patterns) {
            let accepts = |pattern: usize| verdicts >> pattern & 1 == 1;
            let member_err = if accepts(0) {
                Rational::zero()
            } else {
                Rational::one()
            };
            let accepted_gadgets = support
                .iter()
                .filter(|j| match hit.iter().position(|h| h == *j) {
                    Some(pos) => accepts(pos + 1),
                    None => accepts(0),
                })
                .count();
            let gadget_err = int(accepted_gadgets as i64) / &size;
            let err = member_err.max(gadget_err);
            if best.as_ref().is_none_or(|b| err < *b) {
                best = Some(err);
            }
        }
    }
    Ok(best.expect("at least one query set"))
}

fn subsets(n: usize, q: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, q: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            go(j + 1, n, q, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, q, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::{ratio, RatMatrix};
    use crate::lattice::project_to_span;
    use crate::testers::{knapsack_tester, IntegerLatticeTester, KnapsackLattice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gadget_is_rejected_immediately() {
        let k = KnapsackLattice::new(&[2, 3]);
        let inner = Arc::new(knapsack_tester(&k, &ratio(1, 8), &ratio(1, 3), 1).unwrap());
        let lifted = lift_tester_outside_span(k.lattice(), inner, &ratio(1, 4), 1).unwrap();
        assert_eq!(lifted.support().len(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..20 {
            let t = far_instance_outside_span(k.lattice(), &ratio(1, 4), 1, &mut rng).unwrap();
            let o = lifted.test(&t, seed);
            assert!(!o.accepted);
            assert_eq!(o.query_count, 3);
            let proj = project_to_span(k.lattice(), &t, 2).unwrap();
            // ||t^⊥||_2^2 >= (eps n)^2
            assert!(proj.perp_pow_p >= ratio(9, 16));
        }
        let member = k.span_point(&[int(1), int(-2)]);
        assert!(lifted.test(&member, 1).accepted);
    }

    #[test]
    fn full_rank_lift_is_transparent() {
        let l = LatticeBasis::integer_lattice(3);
        let inner = Arc::new(IntegerLatticeTester::with_queries(3, 3, 5));
        let lifted = lift_tester_outside_span(&l, inner.clone(), &ratio(1, 4), 1).unwrap();
        let t = vec![int(1), ratio(1, 2), int(0)];
        for seed in 0..20 {
            assert_eq!(lifted.test(&t, seed), inner.test(&t, seed));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(far_instance_outside_span(&l, &ratio(1, 4), 1, &mut rng).is_err());
    }

    #[test]
    fn axis_lattice_gadgets_live_off_the_axis() {
        let l = LatticeBasis::new(RatMatrix::from_i64_rows(&[&[1, 0, 0]])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t = far_instance_outside_span(&l, &ratio(1, 4), 2, &mut rng).unwrap();
            assert!(t[0].is_zero());
        }
    }

    #[test]
    fn gadget_error_bound() {
        let support: BTreeSet<usize> = (0..5).collect();
        assert_eq!(
            nonadaptive_gadget_error(5, &support, 2).unwrap(),
            ratio(3, 5)
        );
        assert_eq!(
            nonadaptive_gadget_error(5, &support, 1).unwrap(),
            ratio(4, 5)
        );
        assert_eq!(nonadaptive_gadget_error(5, &support, 0).unwrap(), int(1));
    }
}
