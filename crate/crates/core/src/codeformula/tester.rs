use std::sync::Arc;

use rand::RngCore;

use super::decompose::low_bits;
use super::CodeFormulaLattice;
use crate::codes::{BitSource, CodeTester};
use crate::error::{Error, Result};
use crate::exactlinalg::{int, is_integral, ratio, Rational};
use crate::lattice::LatticeBasis;
use crate::lineartest::{dual_witness, DualWitnessQuery};
use crate::testers::{
    IntegerLatticeTester, LatticeTester, QueryAccess, TolerantIntegerTester, DEFAULT_C_T,
    DEFAULT_C_Z,
};

/// Bit `plane` of `round(t_j) mod 2^m`, computed per read.
///
/// In strict mode a non-integral value yields no bit.
struct PlaneView<'q, 'a> {
    access: &'q mut QueryAccess<'a>,
    plane: usize,
    m: usize,
    strict: bool,
}

impl BitSource for PlaneView<'_, '_> {
    fn len(&self) -> usize {
        self.access.n()
    }

    fn bit(&mut self, i: usize) -> Option<bool> {
        let v = self.access.query(i);
        if self.strict && !is_integral(&v) {
            return None;
        }
        Some((low_bits(&v, self.m) >> self.plane) & 1 == 1)
    }
}

/// How the composed tester decides once its queries are fixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TesterMode {
    /// Integrality test, then each code tester on its bit plane.
    #[default]
    Standard,
    /// Reads the union of all planned coordinates once and accepts iff no dual
    /// witness is supported on them.
    Linear,
}

/// The 1-sided `ℓ_1` tester for a code-formula lattice.
///
/// Stage 1 tests integrality at `eps/2`; stage 2 runs the tester of `C_i` at
/// `(eps/2) / (m 2^{i+1})` on bit plane `i`, rejecting on any non-integral read.
#[derive(Clone, Debug)]
pub struct CodeFormulaTester {
    lattice: LatticeBasis,
    m: usize,
    stage1: IntegerLatticeTester,
    codes: Vec<Arc<dyn CodeTester>>,
    mode: TesterMode,
}

pub fn lattice_tester(
    l: &CodeFormulaLattice,
    eps: &Rational,
    s: &Rational,
) -> Result<CodeFormulaTester> {
    CodeFormulaTester::new(l, eps, s, DEFAULT_C_Z, TesterMode::Standard)
}

impl CodeFormulaTester {
    pub fn new(
        l: &CodeFormulaLattice,
        eps: &Rational,
        s: &Rational,
        c_z: f64,
        mode: TesterMode,
    ) -> Result<Self> {
        if !(eps > &int(0) && eps < &int(1)) {
            return Err(Error::invalid("eps must lie in (0, 1)"));
        }
        let n = l.n();
        let m = l.height();
        let half = eps / int(2);
        let stage1 = IntegerLatticeTester::from_eps_pow(n, n, &half, s, c_z)?;
        let codes = (0..m)
            .map(|i| {
                let eps_i = &half / int((m as i64) << (i + 1));
                l.factory(i)?.tester(&eps_i, s)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CodeFormulaTester {
            lattice: l.lattice().clone(),
            m,
            stage1,
            codes,
            mode,
        })
    }

    pub fn with_mode(mut self, mode: TesterMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> TesterMode {
        self.mode
    }

    pub fn stage1(&self) -> &IntegerLatticeTester {
        &self.stage1
    }

    pub fn code_testers(&self) -> &[Arc<dyn CodeTester>] {
        &self.codes
    }
}

impl LatticeTester for CodeFormulaTester {
    fn dim(&self) -> usize {
        self.lattice.dim()
    }

    fn query_budget(&self) -> usize {
        let planes: usize = self.codes.iter().map(|c| c.query_budget()).sum();
        let total = self.stage1.query_budget() + planes;
        match self.mode {
            TesterMode::Standard => total,
            TesterMode::Linear => total.min(self.dim()),
        }
    }

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool {
        match self.mode {
            TesterMode::Standard => {
                if !self.stage1.run(t, rng) {
                    return false;
                }
                self.codes.iter().enumerate().all(|(i, c)| {
                    let mut view = PlaneView {
                        access: t,
                        plane: i,
                        m: self.m,
                        strict: true,
                    };
                    c.run(&mut view, rng)
                })
            }
            TesterMode::Linear => {
                let mut coords = self.query_plan(rng);
                coords.sort_unstable();
                coords.dedup();
                let values = coords.iter().map(|&j| t.query(j)).collect();
                let q = DualWitnessQuery { coords, values };
                dual_witness(&self.lattice, &q)
                    .expect("planned coordinates are in range")
                    .is_none()
            }
        }
    }

    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        let mut plan = self.stage1.query_plan(rng);
        for c in &self.codes {
            plan.extend(c.sample_query_set(rng));
        }
        plan
    }
}

/// Tolerant `ℓ_1` tester: tolerant integrality test on `t`, then tolerant code
/// testers on the bit planes of `round(t)`.
#[derive(Clone, Debug)]
pub struct TolerantCodeFormulaTester {
    n: usize,
    m: usize,
    integer: TolerantIntegerTester,
    codes: Vec<Arc<dyn CodeTester>>,
}

pub fn tolerant_lattice_tester(
    l: &CodeFormulaLattice,
    eps1: &Rational,
    eps2: &Rational,
    c: &Rational,
    s: &Rational,
) -> Result<TolerantCodeFormulaTester> {
    TolerantCodeFormulaTester::new(l, eps1, eps2, c, s, DEFAULT_C_T)
}

impl TolerantCodeFormulaTester {
    /// Requires `eps2 > m 2^{m+1} eps1`.
    pub fn new(
        l: &CodeFormulaLattice,
        eps1: &Rational,
        eps2: &Rational,
        c: &Rational,
        s: &Rational,
        c_t: f64,
    ) -> Result<Self> {
        let m = l.height();
        let factor = int((m as i64) << (m + 1));
        if eps2 <= &(&factor * eps1) {
            return Err(Error::invalid(format!(
                "tolerant tester needs eps2 > {factor} * eps1"
            )));
        }
        let c_share = c / int(m as i64 + 1);
        let integer = TolerantIntegerTester::new(l.n(), eps1, &(eps2 / int(2)), &c_share, s, c_t)?;
        let codes = (0..m)
            .map(|i| {
                let e2 = eps2 / int((m as i64) << (i + 1));
                l.factory(i)?.tolerant(&(eps1 * int(2)), &e2, &c_share, s)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TolerantCodeFormulaTester {
            n: l.n(),
            m,
            integer,
            codes,
        })
    }

    pub fn integer_tester(&self) -> &TolerantIntegerTester {
        &self.integer
    }
}

impl LatticeTester for TolerantCodeFormulaTester {
    fn dim(&self) -> usize {
        self.n
    }

    fn query_budget(&self) -> usize {
        self.integer.query_budget() + self.codes.iter().map(|c| c.query_budget()).sum::<usize>()
    }

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool {
        if !self.integer.run(t, rng) {
            return false;
        }
        self.codes.iter().enumerate().all(|(i, c)| {
            let mut view = PlaneView {
                access: t,
                plane: i,
                m: self.m,
                strict: false,
            };
            c.run(&mut view, rng)
        })
    }

    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        let mut plan = self.integer.query_plan(rng);
        for c in &self.codes {
            plan.extend(c.sample_query_set(rng));
        }
        plan
    }
}

/// Code tester for `C_k` that runs a lattice tester on `2^k w`.
#[derive(Clone, Debug)]
pub struct LatticeDerivedCodeTester {
    inner: Arc<dyn LatticeTester>,
    k: usize,
}

pub fn code_tester_from_lattice_tester(
    inner: Arc<dyn LatticeTester>,
    k: usize,
) -> LatticeDerivedCodeTester {
    LatticeDerivedCodeTester { inner, k }
}

impl CodeTester for LatticeDerivedCodeTester {
    fn block_length(&self) -> usize {
        self.inner.dim()
    }

    fn query_budget(&self) -> usize {
        self.inner.query_budget()
    }

    fn run(&self, w: &mut dyn BitSource, rng: &mut dyn RngCore) -> bool {
        let scale = int(1i64 << self.k);
        let mut access = QueryAccess::new(w.len(), |j| match w.bit(j) {
            Some(true) => scale.clone(),
            Some(false) => int(0),
            // not a bit: hand the lattice tester a non-integer
            None => ratio(1, 2),
        });
        self.inner.run(&mut access, rng)
    }

    fn sample_query_set(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        self.inner.query_plan(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::BitQuery;
    use crate::exactlinalg::ratio;
    use crate::lattice::find_modulus;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> CodeFormulaLattice {
        CodeFormulaLattice::from_rm(&[1, 2], 3).unwrap()
    }

    fn as_rational(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn members_always_accepted() {
        let l = toy();
        let m = find_modulus(l.lattice()).unwrap();
        let t = lattice_tester(&l, &ratio(1, 2), &ratio(1, 3)).unwrap();
        let lin = t.clone().with_mode(TesterMode::Linear);
        for (i, v) in m.reps().iter().enumerate().step_by(97) {
            let x = as_rational(v);
            assert!(t.test(&x, i as u64).accepted);
            assert!(lin.test(&x, i as u64).accepted);
        }
        assert!(t.test(&vec![int(1); 8], 0).accepted);
    }

    #[test]
    fn budget_holds_and_halves_rejected() {
        let l = toy();
        let t = lattice_tester(&l, &ratio(1, 2), &ratio(1, 3)).unwrap();
        let halves = vec![ratio(1, 2); 8];
        for seed in 0..20 {
            let o = t.test(&halves, seed);
            assert!(!o.accepted);
            assert!(o.query_count <= t.query_budget());
        }
    }

    #[test]
    fn linear_mode_reads_plan_once() {
        let l = toy();
        let t = lattice_tester(&l, &ratio(1, 2), &ratio(1, 3))
            .unwrap()
            .with_mode(TesterMode::Linear);
        let o = t.test(&vec![int(0); 8], 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut plan = t.query_plan(&mut rng);
        plan.sort_unstable();
        plan.dedup();
        let read: Vec<usize> = o.transcript.iter().map(|(j, _)| *j).collect();
        assert_eq!(read, plan);
    }

    #[test]
    fn derived_code_tester_matches_lattice_tester() {
        let l = toy();
        let inner: Arc<dyn LatticeTester> =
            Arc::new(lattice_tester(&l, &ratio(1, 2), &ratio(1, 3)).unwrap());
        let derived = code_tester_from_lattice_tester(inner.clone(), 1);
        let w = [1u8, 0, 0, 0, 0, 0, 0, 0];
        for seed in 0..20 {
            let mut q = BitQuery::new(&w);
            let verdict = derived.run(&mut q, &mut ChaCha8Rng::seed_from_u64(seed));
            let scaled: Vec<Rational> = w.iter().map(|&b| int(2 * i64::from(b))).collect();
            let o = inner.test(&scaled, seed);
            assert_eq!(verdict, o.accepted);
            let read: Vec<usize> = o.transcript.iter().map(|(j, _)| *j).collect();
            assert_eq!(q.transcript(), read.as_slice());
        }
    }

    #[test]
    fn tolerant_hypothesis_checked() {
        let l = toy();
        // m 2^{m+1} = 16
        assert!(tolerant_lattice_tester(
            &l,
            &ratio(1, 32),
            &ratio(1, 2),
            &ratio(1, 3),
            &ratio(1, 3)
        )
        .is_err());
        let t = tolerant_lattice_tester(
            &l,
            &ratio(1, 2000),
            &ratio(1, 2),
            &ratio(1, 3),
            &ratio(1, 3),
        )
        .unwrap();
        let member = vec![int(1); 8];
        let o = t.test(&member, 5);
        assert!(o.query_count <= t.query_budget());
    }
}
