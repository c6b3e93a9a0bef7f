use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore};

use super::{LatticeTester, QueryAccess};
use crate::error::{Error, Result};
use crate::exactlinalg::{frac_distance, is_integral, Rational};
use crate::lattice::check_p;

/// Default sampling constant `C_Z` of the integrality tester.
pub const DEFAULT_C_Z: f64 = 2.0;
/// Default sampling constant `C_T` of the tolerant integrality tester.
pub const DEFAULT_C_T: f64 = 8.0;

pub(crate) fn check_unit_open(name: &str, x: &Rational) -> Result<f64> {
    let v = x.to_f64().unwrap_or(f64::NAN);
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::invalid(format!(
            "{name} must lie in (0, 1), got {x}"
        )));
    }
    Ok(v)
}

/// Samples `q` uniform coordinates of `[0, span)` with replacement and rejects iff
/// one of them is not an integer.
#[derive(Clone, Debug)]
pub struct IntegerLatticeTester {
    n: usize,
    span: usize,
    queries: usize,
}

impl IntegerLatticeTester {
    /// `q = ceil(c_z * ln(1/s) / eps_pow_p)` over the first `span` of `n` coordinates.
    pub fn from_eps_pow(
        n: usize,
        span: usize,
        eps_pow_p: &Rational,
        s: &Rational,
        c_z: f64,
    ) -> Result<Self> {
        let e = eps_pow_p.to_f64().unwrap_or(f64::NAN);
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::invalid(format!(
                "eps^p must lie in (0, 1], got {eps_pow_p}"
            )));
        }
        let sv = check_unit_open("s", s)?;
        if span > n {
            return Err(Error::invalid("sampled coordinates exceed the dimension"));
        }
        let q = ((c_z * (1.0 / sv).ln() / e).ceil() as usize).max(1);
        Ok(Self::with_queries(n, span, q))
    }

    pub fn with_queries(n: usize, span: usize, queries: usize) -> Self {
        IntegerLatticeTester { n, span, queries }
    }

    pub fn queries(&self) -> usize {
        self.queries
    }
}

/// `T_Z(eps, 0, s, q)` for `Z^n` in `ℓ_p`.
pub fn integer_lattice_tester(
    n: usize,
    eps: &Rational,
    s: &Rational,
    p: u32,
) -> Result<IntegerLatticeTester> {
    check_p(p)?;
    check_unit_open("eps", eps)?;
    let eps_pow = num_traits::pow(eps.clone(), p as usize);
    IntegerLatticeTester::from_eps_pow(n, n, &eps_pow, s, DEFAULT_C_Z)
}

impl LatticeTester for IntegerLatticeTester {
    fn dim(&self) -> usize {
        self.n
    }

    fn query_budget(&self) -> usize {
        if self.span == 0 {
            0
        } else {
            self.queries
        }
    }

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool {
        let plan = self.query_plan(rng);
        plan.into_iter().all(|i| is_integral(&t.query(i)))
    }

    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        if self.span == 0 {
            return Vec::new();
        }
        (0..self.queries)
            .map(|_| rng.gen_range(0..self.span))
            .collect()
    }
}

/// Estimates the mean distance to the nearest integer on `q` uniform samples and
/// accepts iff it is at most `(eps1 + eps2) / 2`.
#[derive(Clone, Debug)]
pub struct TolerantIntegerTester {
    n: usize,
    queries: usize,
    threshold: Rational,
}

impl TolerantIntegerTester {
    pub fn new(
        n: usize,
        eps1: &Rational,
        eps2: &Rational,
        c: &Rational,
        s: &Rational,
        c_t: f64,
    ) -> Result<Self> {
        if eps1 < &Rational::zero() || eps2 <= eps1 {
            return Err(Error::invalid("tolerant tester needs 0 <= eps1 < eps2"));
        }
        check_unit_open("c", c)?;
        check_unit_open("s", s)?;
        let gamma = if c < s { c } else { s };
        let g = gamma.to_f64().expect("checked above");
        let gap = (eps2 - eps1).to_f64().unwrap_or(f64::NAN);
        let q = ((c_t / (gap * gap) * (1.0 / g).ln()).ceil() as usize).max(1);
        Ok(Self::with_queries(n, eps1, eps2, q))
    }

    pub fn with_queries(n: usize, eps1: &Rational, eps2: &Rational, queries: usize) -> Self {
        TolerantIntegerTester {
            n,
            queries,
            threshold: (eps1 + eps2) / Rational::from_integer(2.into()),
        }
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    /// `(eps1 + eps2) / 2`.
    pub fn threshold(&self) -> &Rational {
        &self.threshold
    }
}

/// `T_Z(eps1, eps2, c, s, q)` for `Z^n` in `ℓ_1`.
pub fn tolerant_integer_tester(
    n: usize,
    eps1: &Rational,
    eps2: &Rational,
    c: &Rational,
    s: &Rational,
) -> Result<TolerantIntegerTester> {
    TolerantIntegerTester::new(n, eps1, eps2, c, s, DEFAULT_C_T)
}

impl LatticeTester for TolerantIntegerTester {
    fn dim(&self) -> usize {
        self.n
    }

    fn query_budget(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.queries
        }
    }

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool {
        let plan = self.query_plan(rng);
        if plan.is_empty() {
            return true;
        }
        let total = plan
            .iter()
            .fold(Rational::zero(), |acc, &i| acc + frac_distance(&t.query(i)));
        total <= &self.threshold * Rational::from_integer(plan.len().into())
    }

    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        if self.n == 0 {
            return Vec::new();
        }
        (0..self.queries)
            .map(|_| rng.gen_range(0..self.n))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::{int, ratio};

    #[test]
    fn query_counts() {
        // ceil(2 * ln 3 * 4) = 9
        let t = integer_lattice_tester(64, &ratio(1, 4), &ratio(1, 3), 1).unwrap();
        assert_eq!(t.queries(), 9);
        // ceil(2 * ln 3 * 16) = 36
        let t = integer_lattice_tester(64, &ratio(1, 4), &ratio(1, 3), 2).unwrap();
        assert_eq!(t.queries(), 36);
        assert!(integer_lattice_tester(4, &ratio(1, 4), &ratio(1, 1), 1).is_err());
        assert!(integer_lattice_tester(4, &ratio(1, 4), &ratio(1, 3), 3).is_err());
    }

    #[test]
    fn integral_and_half_inputs() {
        let t = integer_lattice_tester(8, &ratio(1, 4), &ratio(1, 3), 1).unwrap();
        let ints: Vec<_> = (0..8).map(int).collect();
        let halves = vec![ratio(1, 2); 8];
        for seed in 0..50 {
            assert!(t.test(&ints, seed).accepted);
            let o = t.test(&halves, seed);
            assert!(!o.accepted);
            assert_eq!(o.query_count, 1);
        }
    }

    #[test]
    fn tolerant_threshold_is_exact() {
        let t = TolerantIntegerTester::with_queries(2, &ratio(1, 10), &ratio(3, 10), 2);
        // mean offset exactly at the threshold 1/5 is accepted
        let at = vec![ratio(1, 5), ratio(1, 5)];
        assert!(t.test(&at, 1).accepted);
        let above = vec![ratio(21, 100), ratio(21, 100)];
        assert!(!t.test(&above, 1).accepted);
        assert!(
            tolerant_integer_tester(2, &ratio(1, 4), &ratio(1, 4), &ratio(1, 3), &ratio(1, 3))
                .is_err()
        );
    }

    #[test]
    fn tolerant_query_count() {
        // ceil(8 / 0.04 * ln 3) = 220
        let t = tolerant_integer_tester(8, &ratio(1, 20), &ratio(1, 4), &ratio(1, 3), &ratio(1, 3))
            .unwrap();
        assert_eq!(t.queries(), 220);
    }
}
