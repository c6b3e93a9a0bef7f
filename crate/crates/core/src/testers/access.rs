use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::exactlinalg::{rational_to_json, Rational};

/// Counted query access to a vector in `Q^n`; every read is recorded.
pub struct QueryAccess<'a> {
    n: usize,
    source: Box<dyn FnMut(usize) -> Rational + 'a>,
    transcript: Vec<(usize, Rational)>,
}

impl fmt::Debug for QueryAccess<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QueryAccess")
            .field("n", &self.n)
            .field("transcript", &self.transcript)
            .finish()
    }
}

impl<'a> QueryAccess<'a> {
    pub fn new(n: usize, source: impl FnMut(usize) -> Rational + 'a) -> Self {
        QueryAccess {
            n,
            source: Box::new(source),
            transcript: Vec::new(),
        }
    }

    pub fn from_slice(t: &'a [Rational]) -> Self {
        Self::new(t.len(), move |i| t[i].clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Reads coordinate `i` (0-based).
    pub fn query(&mut self, i: usize) -> Rational {
        assert!(i < self.n, "query {i} outside [0, {})", self.n);
        let v = (self.source)(i);
        self.transcript.push((i, v.clone()));
        v
    }

    pub fn transcript(&self) -> &[(usize, Rational)] {
        &self.transcript
    }

    pub fn query_count(&self) -> usize {
        self.transcript.len()
    }

    pub fn into_transcript(self) -> Vec<(usize, Rational)> {
        self.transcript
    }
}

/// Result of one tester run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestOutcome {
    pub accepted: bool,
    pub transcript: Vec<(usize, Rational)>,
    pub query_count: usize,
    pub seed: u64,
}

impl TestOutcome {
    /// `{"verdict", "queries": [[index, value], ...], "query_count", "seed"}` with
    /// 1-based indices.
    pub fn to_json(&self) -> Value {
        let queries: Vec<Value> = self
            .transcript
            .iter()
            .map(|(i, v)| json!([i + 1, rational_to_json(v)]))
            .collect();
        json!({
            "verdict": if self.accepted { "accept" } else { "reject" },
            "queries": queries,
            "query_count": self.query_count,
            "seed": self.seed,
        })
    }
}

/// A randomized tester for membership in a fixed lattice.
pub trait LatticeTester: Send + Sync + fmt::Debug {
    /// Ambient dimension `n`.
    fn dim(&self) -> usize;

    /// Upper bound on reads in a single run.
    fn query_budget(&self) -> usize;

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool;

    /// Every coordinate that [`Self::run`] could read given the same RNG stream.
    ///
    /// A run consumes the stream identically and reads a subset of this list.
    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize>;

    /// Runs on a fixed vector with a ChaCha8 stream seeded by `seed`.
    fn test(&self, t: &[Rational], seed: u64) -> TestOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut access = QueryAccess::from_slice(t);
        let accepted = self.run(&mut access, &mut rng);
        let transcript = access.into_transcript();
        TestOutcome {
            accepted,
            query_count: transcript.len(),
            transcript,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::{int, ratio};

    #[test]
    fn every_read_is_counted() {
        let t = vec![int(1), ratio(1, 2)];
        let mut a = QueryAccess::from_slice(&t);
        a.query(1);
        a.query(1);
        a.query(0);
        assert_eq!(a.query_count(), 3);
        assert_eq!(a.transcript()[0], (1, ratio(1, 2)));
    }

    #[test]
    fn outcome_json_is_one_based() {
        let o = TestOutcome {
            accepted: false,
            transcript: vec![(0, ratio(1, 2))],
            query_count: 1,
            seed: 7,
        };
        assert_eq!(
            o.to_json().to_string(),
            r#"{"queries":[[1,"1/2"]],"query_count":1,"seed":7,"verdict":"reject"}"#
        );
    }
}
