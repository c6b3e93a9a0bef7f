use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::RngCore;

use super::{BitSource, CodeTester};
use crate::error::{Error, Result};
use crate::exactlinalg::Rational;

/// Default majority-vote constant `C_maj`.
pub const DEFAULT_C_MAJ: f64 = 18.0;

/// Majority vote over independent runs of a base tester with uniform queries.
///
/// The base tester must be 1-sided at distance `eps_base` with soundness 1/3.
#[derive(Clone, Debug)]
pub struct TolerantCodeTester {
    base: Arc<dyn CodeTester>,
    votes: usize,
    eps1: Rational,
    eps2: Rational,
}

/// Odd vote count `ceil(c_maj ln(1/gamma))`; a single vote when `gamma >= 1/3`.
pub(crate) fn vote_count(gamma: &Rational, c_maj: f64) -> Result<usize> {
    let g = gamma.to_f64().unwrap_or(0.0);
    if !(g > 0.0 && g < 1.0) {
        return Err(Error::invalid("error probability must lie in (0, 1)"));
    }
    if *gamma >= Rational::new(1.into(), 3.into()) {
        return Ok(1);
    }
    let r = ((c_maj * (1.0 / g).ln()).ceil() as usize).max(1);
    Ok(if r.is_multiple_of(2) { r + 1 } else { r })
}

impl TolerantCodeTester {
    pub fn new(
        base: Arc<dyn CodeTester>,
        eps_base: &Rational,
        eps1: &Rational,
        eps2: &Rational,
        gamma: &Rational,
    ) -> Result<Self> {
        Self::with_constant(base, eps_base, eps1, eps2, gamma, DEFAULT_C_MAJ)
    }

    pub fn with_constant(
        base: Arc<dyn CodeTester>,
        eps_base: &Rational,
        eps1: &Rational,
        eps2: &Rational,
        gamma: &Rational,
        c_maj: f64,
    ) -> Result<Self> {
        let votes = vote_count(gamma, c_maj)?;
        Self::with_votes(base, eps_base, eps1, eps2, votes)
    }

    pub fn with_votes(
        base: Arc<dyn CodeTester>,
        eps_base: &Rational,
        eps1: &Rational,
        eps2: &Rational,
        votes: usize,
    ) -> Result<Self> {
        if votes == 0 {
            return Err(Error::invalid("majority vote needs at least one run"));
        }
        if eps2 < eps_base {
            return Err(Error::invalid(
                "eps2 must be at least the base tester's eps",
            ));
        }
        if eps1 < &Rational::from_integer(0.into()) || eps1 >= eps2 {
            return Err(Error::invalid("tolerant tester needs 0 <= eps1 < eps2"));
        }
        let q = base.query_budget();
        if q > 0 && eps1 * Rational::from_integer((3 * q).into()) > Rational::from_integer(1.into())
        {
            return Err(Error::invalid(format!(
                "eps1 must be at most 1/(3q) = 1/{} for a base tester with {q} queries",
                3 * q
            )));
        }
        Ok(TolerantCodeTester {
            base,
            votes,
            eps1: eps1.clone(),
            eps2: eps2.clone(),
        })
    }

    pub fn votes(&self) -> usize {
        self.votes
    }

    pub fn eps1(&self) -> &Rational {
        &self.eps1
    }

    pub fn eps2(&self) -> &Rational {
        &self.eps2
    }
}

impl CodeTester for TolerantCodeTester {
    fn block_length(&self) -> usize {
        self.base.block_length()
    }

    fn query_budget(&self) -> usize {
        self.votes * self.base.query_budget()
    }

    fn run(&self, w: &mut dyn BitSource, rng: &mut dyn RngCore) -> bool {
        let accepts = (0..self.votes).filter(|_| self.base.run(w, rng)).count();
        2 * accepts > self.votes
    }

    fn sample_query_set(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        (0..self.votes)
            .flat_map(|_| self.base.sample_query_set(rng))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{rm_code, BitQuery, RmFlatTester};
    use crate::exactlinalg::ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn base() -> Arc<dyn CodeTester> {
        Arc::new(RmFlatTester::new(1, 3, &ratio(1, 4), &ratio(1, 3)).unwrap())
    }

    #[test]
    fn vote_counts() {
        assert_eq!(vote_count(&ratio(1, 3), 18.0).unwrap(), 1);
        assert_eq!(vote_count(&ratio(1, 2), 18.0).unwrap(), 1);
        // ceil(18 ln 10) = 42 -> 43
        assert_eq!(vote_count(&ratio(1, 10), 18.0).unwrap(), 43);
        assert!(vote_count(&ratio(0, 1), 18.0).is_err());
    }

    #[test]
    fn eps1_bound_enforced() {
        // base budget 72, so eps1 <= 1/216
        assert!(TolerantCodeTester::new(
            base(),
            &ratio(1, 4),
            &ratio(1, 216),
            &ratio(1, 4),
            &ratio(1, 10)
        )
        .is_ok());
        assert!(TolerantCodeTester::new(
            base(),
            &ratio(1, 4),
            &ratio(1, 215),
            &ratio(1, 4),
            &ratio(1, 10)
        )
        .is_err());
        assert!(TolerantCodeTester::new(
            base(),
            &ratio(1, 4),
            &ratio(0, 1),
            &ratio(1, 8),
            &ratio(1, 10)
        )
        .is_err());
    }

    #[test]
    fn codeword_accepted_and_budget_respected() {
        let t = TolerantCodeTester::new(
            base(),
            &ratio(1, 4),
            &ratio(1, 300),
            &ratio(1, 4),
            &ratio(1, 10),
        )
        .unwrap();
        let w = rm_code(1, 3).unwrap().generator()[1].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut q = BitQuery::new(&w);
        assert!(t.run(&mut q, &mut rng));
        assert!(q.query_count() <= t.query_budget());
        assert_eq!(q.query_count(), t.query_budget());
    }
}
