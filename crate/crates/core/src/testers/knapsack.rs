use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::RngCore;

use super::{IntegerLatticeTester, LatticeTester, QueryAccess, DEFAULT_C_Z};
use crate::error::{Error, Result};
use crate::exactlinalg::{abs_pow, int, round_half_away, RatMatrix, Rational};
use crate::lattice::{check_p, LatticeBasis};

/// Nodes the exact knapsack search may visit before giving up.
const SEARCH_CAP: u64 = 50_000_000;

/// Rank `n-1` lattice in `Z^n` with basis rows `b_i = (e_i, a_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackLattice {
    a: Vec<i64>,
    basis: LatticeBasis,
}

impl KnapsackLattice {
    pub fn new(a: &[i64]) -> Self {
        let n = a.len() + 1;
        let rows: Vec<Vec<Rational>> = a
            .iter()
            .enumerate()
            .map(|(i, &ai)| {
                let mut r = vec![Rational::zero(); n];
                r[i] = int(1);
                r[n - 1] = int(ai);
                r
            })
            .collect();
        let basis = RatMatrix::from_rows(rows, n).expect("rows have length n");
        KnapsackLattice {
            a: a.to_vec(),
            basis: LatticeBasis::new(basis).expect("unit block makes rows independent"),
        }
    }

    pub fn a(&self) -> &[i64] {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.len() + 1
    }

    pub fn lattice(&self) -> &LatticeBasis {
        &self.basis
    }

    /// `M = max_i |a_i|^p` (0 for an empty `a`).
    pub fn m_pow(&self, p: u32) -> BigInt {
        self.a
            .iter()
            .map(|&x| num_traits::pow(BigInt::from(x).abs(), p as usize))
            .max()
            .unwrap_or_default()
    }

    /// `K_p = (n-1)^{p-1} M + 1`, the factor in `d(w, L)^p <= K_p d(w', Z^{n-1})^p`
    /// for `w ∈ span(L)`. For `p = 2` the factor `M + 1` alone is not enough.
    pub fn distance_factor(&self, p: u32) -> BigInt {
        let n1 = BigInt::from(self.a.len().max(1));
        num_traits::pow(n1, p as usize - 1) * self.m_pow(p) + 1
    }

    /// The span vector `(w', a·w')`.
    pub fn span_point(&self, w_prime: &[Rational]) -> Vec<Rational> {
        let mut w = w_prime.to_vec();
        let last = w_prime
            .iter()
            .zip(&self.a)
            .fold(Rational::zero(), |acc, (x, &ai)| acc + x * int(ai));
        w.push(last);
        w
    }
}

pub fn knapsack_lattice(a: &[i64]) -> LatticeBasis {
    KnapsackLattice::new(a).basis
}

/// Exact `d_p(w, L)^p` for a knapsack lattice by branch and bound over the free
/// coordinates `x ∈ Z^{n-1}`; the lattice point is `(x, a·x)`.
pub fn knapsack_distance(k: &KnapsackLattice, w: &[Rational], p: u32) -> Result<Rational> {
    check_p(p)?;
    if w.len() != k.dim() {
        return Err(Error::invalid(
            "input length does not match the knapsack dimension",
        ));
    }
    let free = &w[..w.len() - 1];
    let target = &w[w.len() - 1];
    let cost = |x: &[BigInt]| -> Rational {
        let mut total = Rational::zero();
        let mut ax = Rational::zero();
        for ((xi, wi), &ai) in x.iter().zip(free).zip(&k.a) {
            let xr = Rational::from_integer(xi.clone());
            total += abs_pow(&(wi - &xr), p);
            ax += xr * int(ai);
        }
        total + abs_pow(&(target - ax), p)
    };
    let start: Vec<BigInt> = free.iter().map(round_half_away).collect();
    let mut best = cost(&start);
    let mut x = start;
    let mut nodes = 0u64;
    search(
        k,
        free,
        target,
        p,
        0,
        Rational::zero(),
        Rational::zero(),
        &mut x,
        &mut best,
        &mut nodes,
    )?;
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn search(
    k: &KnapsackLattice,
    free: &[Rational],
    target: &Rational,
    p: u32,
    i: usize,
    partial: Rational,
    ax: Rational,
    x: &mut Vec<BigInt>,
    best: &mut Rational,
    nodes: &mut u64,
) -> Result<()> {
    *nodes += 1;
    if *nodes > SEARCH_CAP {
        return Err(Error::ResourceLimit(
            "knapsack distance search exceeded its node cap".into(),
        ));
    }
    if i == free.len() {
        let total = partial + abs_pow(&(target - ax), p);
        if total < *best {
            *best = total;
        }
        return Ok(());
    }
    let centre = round_half_away(&free[i]);
    // walk outwards from the nearest integer in both directions until the
    // coordinate cost alone exceeds the budget
    for dir in [1i64, -1] {
        let mut z = if dir == 1 {
            centre.clone()
        } else {
            &centre - 1
        };
        loop {
            let c = abs_pow(&(&free[i] - Rational::from_integer(z.clone())), p);
            // costs grow monotonically along each direction; equality cannot improve
            if &partial + &c >= *best {
                break;
            }
            x[i] = z.clone();
            let next_ax = &ax + Rational::from_integer(z.clone()) * int(k.a[i]);
            search(
                k,
                free,
                target,
                p,
                i + 1,
                &partial + &c,
                next_ax,
                x,
                best,
                nodes,
            )?;
            z += dir;
        }
    }
    Ok(())
}

/// Integrality test on the first `n-1` coordinates at `eps'^p = eps^p / K_p`, with
/// `K_p` from [`KnapsackLattice::distance_factor`].
///
/// Inputs are promised to lie in `span(L)`. Outside the span the verdict carries no
/// guarantee: the last coordinate is never read.
#[derive(Clone, Debug)]
pub struct KnapsackTester {
    knapsack: KnapsackLattice,
    inner: IntegerLatticeTester,
}

impl KnapsackTester {
    pub fn new(
        k: &KnapsackLattice,
        eps: &Rational,
        s: &Rational,
        p: u32,
        c_z: f64,
    ) -> Result<Self> {
        check_p(p)?;
        super::integer::check_unit_open("eps", eps)?;
        let eps_pow =
            num_traits::pow(eps.clone(), p as usize) / Rational::from_integer(k.distance_factor(p));
        let n = k.dim();
        let inner = if n == 1 {
            IntegerLatticeTester::with_queries(1, 0, 0)
        } else {
            IntegerLatticeTester::from_eps_pow(n, n - 1, &eps_pow, s, c_z)?
        };
        Ok(KnapsackTester {
            knapsack: k.clone(),
            inner,
        })
    }

    pub fn knapsack(&self) -> &KnapsackLattice {
        &self.knapsack
    }
}

pub fn knapsack_tester(
    k: &KnapsackLattice,
    eps: &Rational,
    s: &Rational,
    p: u32,
) -> Result<KnapsackTester> {
    KnapsackTester::new(k, eps, s, p, DEFAULT_C_Z)
}

impl LatticeTester for KnapsackTester {
    fn dim(&self) -> usize {
        self.knapsack.dim()
    }

    fn query_budget(&self) -> usize {
        self.inner.query_budget()
    }

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool {
        self.inner.run(t, rng)
    }

    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        self.inner.query_plan(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::ratio;

    fn box_distance(k: &KnapsackLattice, w: &[Rational], p: u32, r: i64) -> Rational {
        let n1 = k.a().len();
        let mut best: Option<Rational> = None;
        let total = (2 * r + 1).pow(n1 as u32);
        for code in 0..total {
            let mut c = code;
            let x: Vec<Rational> = (0..n1)
                .map(|_| {
                    let v = c % (2 * r + 1) - r;
                    c /= 2 * r + 1;
                    int(v)
                })
                .collect();
            let pt = k.span_point(&x);
            let d = pt
                .iter()
                .zip(w)
                .fold(Rational::zero(), |acc, (a, b)| acc + abs_pow(&(a - b), p));
            if best.as_ref().is_none_or(|b| d < *b) {
                best = Some(d);
            }
        }
        best.unwrap()
    }

    #[test]
    fn basis_shapes() {
        let b = knapsack_lattice(&[2, 3]);
        assert_eq!(
            b.basis(),
            &RatMatrix::from_i64_rows(&[&[1, 0, 2], &[0, 1, 3]])
        );
        let e = knapsack_lattice(&[]);
        assert_eq!(e.rank(), 0);
        assert_eq!(e.dim(), 1);
        let z = KnapsackLattice::new(&[0, 0]);
        assert!(z.lattice().contains(&[int(5), int(-1), int(0)]).unwrap());
        assert!(!z.lattice().contains(&[int(5), int(-1), int(1)]).unwrap());
    }

    #[test]
    fn single_coefficient_sandwich_is_tight() {
        let k = KnapsackLattice::new(&[2]);
        let w = vec![ratio(1, 2), int(1)];
        assert_eq!(knapsack_distance(&k, &w, 1).unwrap(), ratio(3, 2));
        assert_eq!(box_distance(&k, &w, 1, 3), ratio(3, 2));
    }

    #[test]
    fn branch_and_bound_matches_box() {
        let k = KnapsackLattice::new(&[2, -3]);
        let ws = [
            vec![ratio(1, 3), ratio(5, 2), ratio(7, 4)],
            vec![ratio(-2, 3), ratio(1, 7), int(4)],
            vec![int(1), int(1), int(-1)],
        ];
        for w in &ws {
            for p in [1, 2] {
                assert_eq!(
                    knapsack_distance(&k, w, p).unwrap(),
                    box_distance(&k, w, p, 6)
                );
            }
        }
    }

    #[test]
    fn tester_reads_only_free_coordinates() {
        let k = KnapsackLattice::new(&[2, 3]);
        let t = knapsack_tester(&k, &ratio(1, 2), &ratio(1, 3), 1).unwrap();
        // eps'^p = (1/2)/4 -> ceil(2 ln 3 * 8) = 18
        assert_eq!(t.query_budget(), 18);
        let member = k.span_point(&[int(1), int(1)]);
        for seed in 0..20 {
            let o = t.test(&member, seed);
            assert!(o.accepted);
            assert!(o.transcript.iter().all(|(i, _)| *i < 2));
        }
    }

    #[test]
    fn quadratic_factor_needs_dimension_term() {
        let k = KnapsackLattice::new(&[2, 3]);
        let w = k.span_point(&[ratio(31, 32), ratio(-5, 4)]);
        let d = knapsack_distance(&k, &w, 2).unwrap();
        assert_eq!(d, box_distance(&k, &w, 2, 6));
        let free = ratio(1, 1024) + ratio(1, 16);
        assert!(d > &free * Rational::from_integer(k.m_pow(2) + 1));
        assert_eq!(k.distance_factor(2), BigInt::from(19));
        assert!(d <= free * Rational::from_integer(k.distance_factor(2)));
        assert_eq!(k.distance_factor(1), BigInt::from(4));
    }
}
