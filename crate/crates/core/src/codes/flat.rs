use num_traits::ToPrimitive;
use rand::{Rng, RngCore};

use super::{BitSource, CodeTester, CodeTesterSpec};
use crate::error::{Error, Result};
use crate::exactlinalg::Rational;

/// Default repetition constant `C_rep`.
pub const DEFAULT_C_REP: f64 = 8.0;

/// The `(k+1)`-flat parity test for `RM(k, r)`.
///
/// A round picks a uniformly random affine subspace of dimension `k+1` of `F_2^r`
/// and accepts iff the queried bits over it sum to zero.
#[derive(Clone, Debug)]
pub struct RmFlatTester {
    k: usize,
    r: usize,
    spec: CodeTesterSpec,
}

/// `ceil(c * ln(1/s) * max(1, 1/(2^k eps)))`, at least 1.
fn repetitions(k: usize, eps: &Rational, s: &Rational, c_rep: f64) -> Result<usize> {
    let e = eps.to_f64().unwrap_or(0.0);
    let sv = s.to_f64().unwrap_or(0.0);
    if !(e > 0.0 && e <= 1.0) {
        return Err(Error::invalid("code tester needs 0 < eps <= 1"));
    }
    if !(sv > 0.0 && sv < 1.0) {
        return Err(Error::invalid("code tester needs 0 < s < 1"));
    }
    let scale = (1.0 / (2f64.powi(k as i32) * e)).max(1.0);
    Ok(((c_rep * (1.0 / sv).ln() * scale).ceil() as usize).max(1))
}

impl RmFlatTester {
    pub fn new(k: usize, r: usize, eps: &Rational, s: &Rational) -> Result<Self> {
        Self::with_constant(k, r, eps, s, DEFAULT_C_REP)
    }

    pub fn with_constant(
        k: usize,
        r: usize,
        eps: &Rational,
        s: &Rational,
        c_rep: f64,
    ) -> Result<Self> {
        let rounds = repetitions(k, eps, s, c_rep)?;
        let mut t = Self::with_rounds(k, r, rounds)?;
        t.spec.epsilon = eps.clone();
        t.spec.soundness = s.clone();
        Ok(t)
    }

    /// A tester running exactly `rounds` rounds.
    pub fn with_rounds(k: usize, r: usize, rounds: usize) -> Result<Self> {
        if k >= r {
            return Err(Error::invalid(format!(
                "flat test needs k < r (RM({k},{r}) is the whole space)"
            )));
        }
        if r > 20 {
            return Err(Error::ResourceLimit(format!("flat test with r = {r} > 20")));
        }
        Ok(RmFlatTester {
            k,
            r,
            spec: CodeTesterSpec {
                epsilon: Rational::from_integer(1.into()),
                soundness: Rational::from_integer(0.into()),
                repetitions: rounds,
                queries_per_round: 1 << (k + 1),
            },
        })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn vars(&self) -> usize {
        self.r
    }

    pub fn spec(&self) -> &CodeTesterSpec {
        &self.spec
    }

    /// Points of a uniformly random `(k+1)`-flat, as indices into `[2^r]`.
    ///
    /// Directions are drawn uniformly and redrawn while dependent on the previous ones.
    pub fn sample_flat(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        let n = 1usize << self.r;
        let base = rng.gen_range(0..n);
        let mut span = vec![0usize];
        while span.len() < self.spec.queries_per_round {
            let dir = rng.gen_range(0..n);
            if span.contains(&dir) {
                continue;
            }
            let shifted: Vec<usize> = span.iter().map(|x| x ^ dir).collect();
            span.extend(shifted);
        }
        span.into_iter().map(|x| x ^ base).collect()
    }

    fn parity_ok(w: &mut dyn BitSource, flat: &[usize]) -> bool {
        let mut parity = false;
        for &i in flat {
            match w.bit(i) {
                Some(b) => parity ^= b,
                None => return false,
            }
        }
        !parity
    }

    /// One round on a given flat.
    pub fn round_accepts(w: &mut dyn BitSource, flat: &[usize]) -> bool {
        Self::parity_ok(w, flat)
    }
}

impl CodeTester for RmFlatTester {
    fn block_length(&self) -> usize {
        1 << self.r
    }

    fn query_budget(&self) -> usize {
        self.spec.query_budget()
    }

    fn run(&self, w: &mut dyn BitSource, rng: &mut dyn RngCore) -> bool {
        // the plan is drawn up front so the query set does not depend on the answers
        let flats: Vec<Vec<usize>> = (0..self.spec.repetitions)
            .map(|_| self.sample_flat(rng))
            .collect();
        flats.iter().all(|f| Self::parity_ok(w, f))
    }

    fn sample_query_set(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        (0..self.spec.repetitions)
            .flat_map(|_| self.sample_flat(rng))
            .collect()
    }
}
