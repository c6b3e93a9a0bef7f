use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::exactlinalg::{dot, dual_basis, hnf, is_integral, RatMatrix, Rational};
use crate::lattice::LatticeBasis;
use crate::testers::{LatticeTester, QueryAccess};

/// Basis of `(proj_J L)^⊥`, the dual of the projection of `L` onto the coordinates
/// `J`, taken inside the span of the projection.
///
/// Rows have length `|J|` and follow the order of `coords`.
pub fn projected_dual_basis(l: &LatticeBasis, coords: &[usize]) -> Result<RatMatrix> {
    check_coords(coords, l.dim())?;
    if coords.is_empty() {
        return Err(Error::invalid("coordinate set J must be nonempty"));
    }
    let projected = l.basis().select_columns(coords);
    // the basis is integral, so the projection is too and HNF applies directly
    let canonical = hnf(&projected)?;
    if canonical.rows() == 0 {
        return Ok(RatMatrix::zeros(0, coords.len()));
    }
    dual_basis(&canonical)
}

fn check_coords(coords: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &j in coords {
        if j >= n {
            return Err(Error::invalid(format!(
                "coordinate {} outside [1, {n}]",
                j + 1
            )));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::invalid(format!("coordinate {} repeated", j + 1)));
        }
    }
    Ok(())
}

/// Values `w_J` of an input on the coordinate set `J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualWitnessQuery {
    pub coords: Vec<usize>,
    pub values: Vec<Rational>,
}

impl DualWitnessQuery {
    pub fn new(coords: Vec<usize>, values: Vec<Rational>) -> Result<Self> {
        if coords.len() != values.len() {
            return Err(Error::invalid("J and the values on J differ in length"));
        }
        Ok(DualWitnessQuery { coords, values })
    }

    /// Restriction of a full vector to `coords`.
    pub fn restrict(coords: &[usize], w: &[Rational]) -> Self {
        DualWitnessQuery {
            coords: coords.to_vec(),
            values: coords.iter().map(|&j| w[j].clone()).collect(),
        }
    }
}

/// A vector `α ∈ L^⊥` supported on `J` with `<α, w> ∉ Z`, if one exists.
///
/// Returns the first row of [`projected_dual_basis`] with a non-integral inner
/// product, embedded into `Q^n` with zeros off `J`.
pub fn dual_witness(l: &LatticeBasis, q: &DualWitnessQuery) -> Result<Option<Vec<Rational>>> {
    if q.coords.len() != q.values.len() {
        return Err(Error::invalid("J and the values on J differ in length"));
    }
    if q.coords.is_empty() {
        check_coords(&q.coords, l.dim())?;
        return Ok(None);
    }
    let basis = projected_dual_basis(l, &q.coords)?;
    for row in basis.row_iter() {
        if !is_integral(&dot(row, &q.values)) {
            let mut alpha = vec![Rational::zero(); l.dim()];
            for (&j, x) in q.coords.iter().zip(row) {
                alpha[j] = x.clone();
            }
            return Ok(Some(alpha));
        }
    }
    Ok(None)
}

/// A distribution over coordinate sets `J`.
pub trait IndexSetSampler: Send + Sync + fmt::Debug {
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<usize>;

    /// Largest set the sampler can return.
    fn max_size(&self) -> usize;

    /// The exact distribution, when finite and known.
    fn exact(&self) -> Option<&[(Rational, Vec<usize>)]> {
        None
    }
}

/// A single uniform coordinate of `[0, n)`.
#[derive(Clone, Debug)]
pub struct UniformCoordinate {
    pub n: usize,
}

impl IndexSetSampler for UniformCoordinate {
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        vec![rng.gen_range(0..self.n)]
    }

    fn max_size(&self) -> usize {
        1
    }
}

/// Index sets harvested from the query plan of another tester.
#[derive(Clone, Debug)]
pub struct HarvestedIndexSets {
    pub source: Arc<dyn LatticeTester>,
}

impl IndexSetSampler for HarvestedIndexSets {
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        self.source.query_plan(rng)
    }

    fn max_size(&self) -> usize {
        self.source.query_budget().min(self.source.dim())
    }
}

/// A finite distribution over sets with exact rational weights summing to 1.
#[derive(Clone, Debug)]
pub struct WeightedIndexSets {
    sets: Vec<(Rational, Vec<usize>)>,
    cumulative: Vec<f64>,
}

impl WeightedIndexSets {
    /// Merges repeated sets (after sorting each set) and checks the weights.
    pub fn new(sets: impl IntoIterator<Item = (Rational, Vec<usize>)>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (w, mut set) in sets {
            if w <= Rational::zero() {
                return Err(Error::invalid("index-set weights must be positive"));
            }
            set.sort_unstable();
            set.dedup();
            *merged.entry(set).or_insert_with(Rational::zero) += w;
        }
        let total = merged.values().fold(Rational::zero(), |a, b| a + b);
        if total != Rational::from_integer(1.into()) {
            return Err(Error::invalid(format!(
                "index-set weights sum to {total}, not 1"
            )));
        }
        let sets: Vec<(Rational, Vec<usize>)> = merged.into_iter().map(|(s, w)| (w, s)).collect();
        let mut acc = 0.0;
        let cumulative = sets
            .iter()
            .map(|(w, _)| {
                acc += w.to_f64().unwrap_or(0.0);
                acc
            })
            .collect();
        Ok(WeightedIndexSets { sets, cumulative })
    }

    pub fn sets(&self) -> &[(Rational, Vec<usize>)] {
        &self.sets
    }
}

impl IndexSetSampler for WeightedIndexSets {
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        let u: f64 = rng.gen::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let i = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.sets.len() - 1);
        self.sets[i].1.clone()
    }

    fn max_size(&self) -> usize {
        self.sets.iter().map(|(_, s)| s.len()).max().unwrap_or(0)
    }

    fn exact(&self) -> Option<&[(Rational, Vec<usize>)]> {
        Some(&self.sets)
    }
}

/// Samples `J`, reads `t` once on each coordinate of `J` and accepts iff no dual
/// witness is supported on `J`.
#[derive(Clone, Debug)]
pub struct NonadaptiveLinearTester {
    lattice: LatticeBasis,
    sampler: Arc<dyn IndexSetSampler>,
}

pub fn nonadaptive_linear_tester(
    l: &LatticeBasis,
    sampler: Arc<dyn IndexSetSampler>,
) -> NonadaptiveLinearTester {
    NonadaptiveLinearTester {
        lattice: l.clone(),
        sampler,
    }
}

impl NonadaptiveLinearTester {
    pub fn sampler(&self) -> &Arc<dyn IndexSetSampler> {
        &self.sampler
    }

    fn accepts_on(&self, coords: &[usize], values: Vec<Rational>) -> bool {
        let q = DualWitnessQuery {
            coords: coords.to_vec(),
            values,
        };
        dual_witness(&self.lattice, &q)
            .expect("sampled coordinates are distinct and in range")
            .is_none()
    }

    /// Exact `Pr[accept]` on `x` when the index-set distribution is known.
    pub fn accept_probability(&self, x: &[Rational]) -> Option<Rational> {
        let sets = self.sampler.exact()?;
        Some(sets.iter().fold(Rational::zero(), |acc, (w, j)| {
            let values = j.iter().map(|&i| x[i].clone()).collect();
            if self.accepts_on(j, values) {
                acc + w
            } else {
                acc
            }
        }))
    }
}

fn distinct_sorted(mut j: Vec<usize>) -> Vec<usize> {
    j.sort_unstable();
    j.dedup();
    j
}

impl LatticeTester for NonadaptiveLinearTester {
    fn dim(&self) -> usize {
        self.lattice.dim()
    }

    fn query_budget(&self) -> usize {
        self.sampler.max_size()
    }

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool {
        let j = distinct_sorted(self.sampler.sample(rng));
        let values = j.iter().map(|&i| t.query(i)).collect();
        self.accepts_on(&j, values)
    }

    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        distinct_sorted(self.sampler.sample(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::{int, ratio};

    #[test]
    fn projected_duals() {
        let l = LatticeBasis::scaled_integer_lattice(2, 2);
        assert_eq!(
            projected_dual_basis(&l, &[0]).unwrap(),
            RatMatrix::from_rows(vec![vec![ratio(1, 2)]], 1).unwrap()
        );
        let z = LatticeBasis::integer_lattice(3);
        assert_eq!(
            projected_dual_basis(&z, &[2, 0]).unwrap(),
            RatMatrix::identity(2)
        );
        let l = LatticeBasis::new(RatMatrix::from_i64_rows(&[&[1, 1], &[0, 2]])).unwrap();
        assert_eq!(
            projected_dual_basis(&l, &[0]).unwrap(),
            RatMatrix::identity(1)
        );
        assert!(projected_dual_basis(&l, &[]).is_err());
        assert!(projected_dual_basis(&l, &[0, 0]).is_err());
    }

    #[test]
    fn witnesses() {
        let l = LatticeBasis::scaled_integer_lattice(2, 2);
        let q = DualWitnessQuery::new(vec![0], vec![int(1)]).unwrap();
        assert_eq!(
            dual_witness(&l, &q).unwrap(),
            Some(vec![ratio(1, 2), int(0)])
        );
        let q = DualWitnessQuery::new(vec![0, 1], vec![int(2), int(-4)]).unwrap();
        assert_eq!(dual_witness(&l, &q).unwrap(), None);
        // C0 = {0000, 1111}, m = 1
        let rep = LatticeBasis::from_generators(&RatMatrix::from_i64_rows(&[
            &[1, 1, 1, 1],
            &[2, 0, 0, 0],
            &[0, 2, 0, 0],
            &[0, 0, 2, 0],
            &[0, 0, 0, 2],
        ]))
        .unwrap();
        let q = DualWitnessQuery::new(vec![0, 1], vec![int(1), int(0)]).unwrap();
        let alpha = dual_witness(&rep, &q).unwrap().expect("witness");
        assert!(!is_integral(&(alpha[0].clone())));
        assert!(alpha[2].is_zero() && alpha[3].is_zero());
    }

    #[test]
    fn weighted_sets_merge_and_validate() {
        let w =
            WeightedIndexSets::new([(ratio(1, 2), vec![1, 0]), (ratio(1, 2), vec![0, 1])]).unwrap();
        assert_eq!(w.sets(), &[(int(1), vec![0, 1])]);
        assert!(WeightedIndexSets::new([(ratio(1, 2), vec![0])]).is_err());
    }
}
