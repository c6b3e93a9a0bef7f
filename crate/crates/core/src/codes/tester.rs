use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use super::{RmFlatTester, TolerantCodeTester, DEFAULT_C_MAJ, DEFAULT_C_REP};
use crate::error::{Error, Result};
use crate::exactlinalg::Rational;

/// Query access to a word in `F_2^n`.
pub trait BitSource {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bit at coordinate `i`, or `None` when the underlying value is not a bit.
    fn bit(&mut self, i: usize) -> Option<bool>;
}

/// A plain bit vector with a query transcript.
#[derive(Clone, Debug)]
pub struct BitQuery<'a> {
    bits: &'a [u8],
    transcript: Vec<usize>,
}

impl<'a> BitQuery<'a> {
    pub fn new(bits: &'a [u8]) -> Self {
        BitQuery {
            bits,
            transcript: Vec::new(),
        }
    }

    pub fn transcript(&self) -> &[usize] {
        &self.transcript
    }

    pub fn query_count(&self) -> usize {
        self.transcript.len()
    }
}

impl BitSource for BitQuery<'_> {
    fn len(&self) -> usize {
        self.bits.len()
    }

    fn bit(&mut self, i: usize) -> Option<bool> {
        self.transcript.push(i);
        Some(self.bits[i] == 1)
    }
}

/// Parameters of a code tester instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeTesterSpec {
    pub epsilon: Rational,
    pub soundness: Rational,
    pub repetitions: usize,
    pub queries_per_round: usize,
}

impl CodeTesterSpec {
    pub fn query_budget(&self) -> usize {
        self.repetitions * self.queries_per_round
    }
}

/// A local tester for a binary code whose checks are parities.
pub trait CodeTester: Send + Sync + fmt::Debug {
    fn block_length(&self) -> usize;

    /// Upper bound on the number of bit reads in one run.
    fn query_budget(&self) -> usize;

    /// Runs the tester; reads `w` at most [`Self::query_budget`] times.
    fn run(&self, w: &mut dyn BitSource, rng: &mut dyn RngCore) -> bool;

    /// Every coordinate a run with this RNG stream could read.
    ///
    /// The index sets depend on the RNG only, never on the word.
    fn sample_query_set(&self, rng: &mut dyn RngCore) -> Vec<usize>;
}

/// Tester for `F_2^n`: accepts everything without reading.
#[derive(Clone, Debug)]
pub struct TrivialTester {
    n: usize,
}

impl TrivialTester {
    pub fn new(n: usize) -> Self {
        TrivialTester { n }
    }
}

impl CodeTester for TrivialTester {
    fn block_length(&self) -> usize {
        self.n
    }

    fn query_budget(&self) -> usize {
        0
    }

    fn run(&self, _w: &mut dyn BitSource, _rng: &mut dyn RngCore) -> bool {
        true
    }

    fn sample_query_set(&self, _rng: &mut dyn RngCore) -> Vec<usize> {
        Vec::new()
    }
}

/// Builds testers for one fixed code at requested parameters.
pub trait CodeTesterFactory: Send + Sync + fmt::Debug {
    fn block_length(&self) -> usize;

    /// 1-sided tester `T(eps, 0, s, q)`.
    fn tester(&self, eps: &Rational, s: &Rational) -> Result<Arc<dyn CodeTester>>;

    /// Tolerant tester `T(eps1, eps2, c, s, q)`.
    fn tolerant(
        &self,
        eps1: &Rational,
        eps2: &Rational,
        c: &Rational,
        s: &Rational,
    ) -> Result<Arc<dyn CodeTester>>;
}

/// Flat-test factory for `RM(k, r)`; `RM(r, r)` gets the trivial tester.
#[derive(Clone, Debug)]
pub struct RmTesterFactory {
    pub k: usize,
    pub r: usize,
    pub c_rep: f64,
    pub c_maj: f64,
}

impl RmTesterFactory {
    pub fn new(k: usize, r: usize) -> Result<Self> {
        if k > r {
            return Err(Error::invalid(format!("RM({k},{r}) needs k <= r")));
        }
        Ok(RmTesterFactory {
            k,
            r,
            c_rep: DEFAULT_C_REP,
            c_maj: DEFAULT_C_MAJ,
        })
    }
}

impl CodeTesterFactory for RmTesterFactory {
    fn block_length(&self) -> usize {
        1 << self.r
    }

    fn tester(&self, eps: &Rational, s: &Rational) -> Result<Arc<dyn CodeTester>> {
        if self.k == self.r {
            return Ok(Arc::new(TrivialTester::new(1 << self.r)));
        }
        Ok(Arc::new(RmFlatTester::with_constant(
            self.k, self.r, eps, s, self.c_rep,
        )?))
    }

    fn tolerant(
        &self,
        eps1: &Rational,
        eps2: &Rational,
        c: &Rational,
        s: &Rational,
    ) -> Result<Arc<dyn CodeTester>> {
        let third = Rational::new(1.into(), 3.into());
        let base = self.tester(eps2, &third)?;
        let gamma = if c < s { c } else { s };
        Ok(Arc::new(TolerantCodeTester::with_constant(
            base, eps2, eps1, eps2, gamma, self.c_maj,
        )?))
    }
}
