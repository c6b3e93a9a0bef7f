use std::sync::Arc;

use num_traits::Zero;
use rand::RngCore;

use super::{
    dual_witness, nonadaptive_linear_tester, DecisionTree, DualWitnessQuery,
    NonadaptiveLinearTester, TreeDistribution, WeightedIndexSets,
};
use crate::error::{Error, Result};
use crate::exactlinalg::{int, is_integral, Rational};
use crate::lattice::{LatticeBasis, ModulusStructure};
use crate::testers::{integer_lattice_tester, IntegerLatticeTester, LatticeTester, QueryAccess};

fn check_alphabet(dist_d: usize, m: &ModulusStructure) -> Result<()> {
    if dist_d as i64 != m.d() {
        return Err(Error::invalid(format!(
            "tree alphabet {dist_d} differs from the lattice modulus {}",
            m.d()
        )));
    }
    Ok(())
}

fn path_query(path: &[(usize, i64)]) -> DualWitnessQuery {
    DualWitnessQuery {
        coords: path.iter().map(|(c, _)| *c).collect(),
        values: path.iter().map(|(_, a)| int(*a)).collect(),
    }
}

/// Labels each leaf 1 iff no dual witness exists for its path `(var(l), s_l)`.
pub fn optimal_relabel(
    tree: &DecisionTree,
    l: &LatticeBasis,
    m: &ModulusStructure,
) -> Result<DecisionTree> {
    tree.validate(l.dim(), m.d() as usize)?;
    let mut err = None;
    let out = tree.relabel(&mut |path, old| match dual_witness(l, &path_query(path)) {
        Ok(w) => w.is_none(),
        Err(e) => {
            err.get_or_insert(e);
            old
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Adaptive 1-sided linear tester from a 2-sided one: pick `Γ`, pick a uniform
/// `v ∈ V`, and run `Γ_OPT` on `(x + v) mod d`.
///
/// The result is a tree distribution over the shifted relabelled trees, with weight
/// `D(Γ)/|V|` each.
pub fn two_sided_to_linear(
    dist: &TreeDistribution,
    l: &LatticeBasis,
    m: &ModulusStructure,
) -> Result<TreeDistribution> {
    check_alphabet(dist.d(), m)?;
    let size = int(m.len() as i64);
    let mut trees = Vec::with_capacity(dist.trees().len() * m.len());
    for (w, t) in dist.trees() {
        let opt = optimal_relabel(t, l, m)?;
        let share = w / &size;
        for v in m.reps() {
            trees.push((share.clone(), opt.shifted(v, m.d())));
        }
    }
    TreeDistribution::new(dist.d(), trees)
}

/// Non-adaptive linear tester from an adaptive linear one: pick `Γ` and a uniform
/// `v ∈ V`, let `J` be the coordinates `Γ` reads on `v`, and accept iff no dual
/// witness is supported on `J`.
pub fn adaptive_to_nonadaptive(
    dist: &TreeDistribution,
    l: &LatticeBasis,
    m: &ModulusStructure,
) -> Result<NonadaptiveLinearTester> {
    check_alphabet(dist.d(), m)?;
    dist.validate(l.dim())?;
    let size = int(m.len() as i64);
    let mut sets = Vec::new();
    for (w, t) in dist.trees() {
        let share = w / &size;
        for v in m.reps() {
            let coords = t.path(v).0.into_iter().map(|(c, _)| c).collect();
            sets.push((share.clone(), coords));
        }
    }
    Ok(nonadaptive_linear_tester(
        l,
        Arc::new(WeightedIndexSets::new(sets)?),
    ))
}

/// `avg_{y ∈ V} Pr[T(y) = 1]`.
pub fn rho_members(dist: &TreeDistribution, m: &ModulusStructure) -> Rational {
    let total = m
        .reps()
        .iter()
        .fold(Rational::zero(), |a, y| a + dist.accept_probability(y));
    total / int(m.len() as i64)
}

/// `avg_{v ∈ V} Pr[T((x + v) mod d) = 1]`.
pub fn rho_coset(dist: &TreeDistribution, m: &ModulusStructure, x: &[i64]) -> Rational {
    let total = m.reps().iter().fold(Rational::zero(), |a, v| {
        a + dist.accept_probability(&m.shift(x, v))
    });
    total / int(m.len() as i64)
}

/// For one leaf `l`: `|V_l|` and `|V_l^x|`, the members of `V` and of `(x + V) mod d`
/// that reach it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafSetSizes {
    pub path: Vec<(usize, i64)>,
    pub label: bool,
    pub members: usize,
    pub coset: usize,
}

pub fn leaf_set_sizes(tree: &DecisionTree, m: &ModulusStructure, x: &[i64]) -> Vec<LeafSetSizes> {
    tree.leaf_paths()
        .into_iter()
        .map(|(path, label)| {
            let reaches = |y: &[i64]| path.iter().all(|&(c, a)| y[c] == a);
            let members = m.reps().iter().filter(|v| reaches(v)).count();
            let coset = m.reps().iter().filter(|v| reaches(&m.shift(x, v))).count();
            LeafSetSizes {
                path,
                label,
                members,
                coset,
            }
        })
        .collect()
}

/// Runs a tester for `{0..d-1}^n` on `x mod d`.
#[derive(Clone, Debug)]
pub struct BoundedToInteger {
    inner: Arc<dyn LatticeTester>,
    d: i64,
}

pub fn lift_bounded_to_integer(
    inner: Arc<dyn LatticeTester>,
    m: &ModulusStructure,
) -> BoundedToInteger {
    BoundedToInteger { inner, d: m.d() }
}

fn rational_mod(x: &Rational, d: i64) -> Rational {
    let dd = int(d);
    x - (x / &dd).floor() * &dd
}

impl LatticeTester for BoundedToInteger {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query_budget(&self) -> usize {
        self.inner.query_budget()
    }

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool {
        let d = self.d;
        let mut reduced = QueryAccess::new(t.n(), |j| rational_mod(&t.query(j), d));
        self.inner.run(&mut reduced, rng)
    }

    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        self.inner.query_plan(rng)
    }
}

/// Integrality test at `eps/2`, then the integer-input tester, rejecting as soon as
/// the latter reads a non-integer.
#[derive(Clone, Debug)]
pub struct IntegerToReal {
    stage1: IntegerLatticeTester,
    inner: Arc<dyn LatticeTester>,
}

impl IntegerToReal {
    pub fn stage1(&self) -> &IntegerLatticeTester {
        &self.stage1
    }
}

pub fn lift_integer_to_real(
    inner: Arc<dyn LatticeTester>,
    eps: &Rational,
    s: &Rational,
    p: u32,
) -> Result<IntegerToReal> {
    let half = eps / int(2);
    let stage1 = integer_lattice_tester(inner.dim(), &half, s, p)?;
    Ok(IntegerToReal { stage1, inner })
}

impl LatticeTester for IntegerToReal {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query_budget(&self) -> usize {
        self.stage1.query_budget() + self.inner.query_budget()
    }

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool {
        if !self.stage1.run(t, rng) {
            return false;
        }
        let mut bad = false;
        let verdict = {
            let mut guarded = QueryAccess::new(t.n(), |j| {
                if bad {
                    // already rejected: stop reading the input
                    return Rational::zero();
                }
                let v = t.query(j);
                if is_integral(&v) {
                    v
                } else {
                    bad = true;
                    Rational::zero()
                }
            });
            self.inner.run(&mut guarded, rng)
        };
        verdict && !bad
    }

    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        let mut plan = self.stage1.query_plan(rng);
        plan.extend(self.inner.query_plan(rng));
        plan
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::{ratio, RatMatrix};
    use crate::lattice::find_modulus;

    fn toy() -> (LatticeBasis, ModulusStructure) {
        let l = LatticeBasis::new(RatMatrix::from_i64_rows(&[&[1, 1], &[0, 2]])).unwrap();
        let m = find_modulus(&l).unwrap();
        (l, m)
    }

    #[test]
    fn relabel_on_scaled_lattice() {
        let l = LatticeBasis::scaled_integer_lattice(2, 2);
        let m = find_modulus(&l).unwrap();
        let t = DecisionTree::Query {
            coord: 0,
            children: vec![DecisionTree::Leaf(false), DecisionTree::Leaf(true)],
        };
        let r = optimal_relabel(&t, &l, &m).unwrap();
        assert_eq!(
            r,
            DecisionTree::Query {
                coord: 0,
                children: vec![DecisionTree::Leaf(true), DecisionTree::Leaf(false)],
            }
        );
    }

    #[test]
    fn linear_testers_accept_members() {
        let (l, m) = toy();
        for t in DecisionTree::enumerate(2, 2, 2) {
            let dist = TreeDistribution::point(2, t);
            let lin = two_sided_to_linear(&dist, &l, &m).unwrap();
            assert_eq!(rho_members(&lin, &m), int(1));
            let na = adaptive_to_nonadaptive(&lin, &l, &m).unwrap();
            for v in m.reps() {
                let x: Vec<Rational> = v.iter().map(|&a| int(a)).collect();
                assert_eq!(na.accept_probability(&x), Some(int(1)));
            }
        }
    }

    #[test]
    fn integer_to_real_rejects_fractions_in_stage_two() {
        let l = LatticeBasis::integer_lattice(4);
        let inner: Arc<dyn LatticeTester> = Arc::new(IntegerLatticeTester::with_queries(4, 4, 4));
        let lifted = lift_integer_to_real(inner, &ratio(1, 2), &ratio(1, 3), 1).unwrap();
        assert_eq!(lifted.dim(), l.dim());
        let t = vec![int(0), int(0), int(0), ratio(1, 2)];
        let rejections = (0..200).filter(|&s| !lifted.test(&t, s).accepted).count();
        assert!(rejections > 0);
        let members: Vec<Rational> = vec![int(3); 4];
        assert!((0..50).all(|s| lifted.test(&members, s).accepted));
    }

    #[test]
    fn bounded_lift_reduces_mod_d() {
        let (_, m) = toy();
        let inner = Arc::new(
            crate::lineartest::TreeTester::new(
                2,
                TreeDistribution::point(
                    2,
                    DecisionTree::Query {
                        coord: 0,
                        children: vec![DecisionTree::Leaf(true), DecisionTree::Leaf(false)],
                    },
                ),
            )
            .unwrap(),
        );
        let lifted = lift_bounded_to_integer(inner, &m);
        assert!(lifted.test(&[int(-4), int(7)], 0).accepted);
        assert!(!lifted.test(&[int(-3), int(7)], 0).accepted);
    }
}
