use std::collections::BTreeSet;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactlinalg::{format_rational, is_integral, rational_from_json, Rational};
use crate::testers::{LatticeTester, QueryAccess};

/// A deterministic adaptive query algorithm over the alphabet `{0, ..., d-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecisionTree {
    Leaf(bool),
    /// Reads `coord` and continues in `children[value]`.
    Query {
        coord: usize,
        children: Vec<DecisionTree>,
    },
}

impl DecisionTree {
    /// Checks arity `d`, coordinates below `n` and no coordinate repeated on a path.
    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        fn go(t: &DecisionTree, n: usize, d: usize, path: &mut Vec<usize>) -> Result<()> {
            let DecisionTree::Query { coord, children } = t else {
                return Ok(());
            };
            if *coord >= n {
                return Err(Error::invalid(format!(
                    "tree queries coordinate {} > n",
                    coord + 1
                )));
            }
            if path.contains(coord) {
                return Err(Error::invalid(format!(
                    "coordinate {} repeated on a root-to-leaf path",
                    coord + 1
                )));
            }
            if children.len() != d {
                return Err(Error::invalid(format!(
                    "query node has {} children, expected {d}",
                    children.len()
                )));
            }
            path.push(*coord);
            for c in children {
                go(c, n, d, path)?;
            }
            path.pop();
            Ok(())
        }
        go(self, n, d, &mut Vec::new())
    }

    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Query { children, .. } => {
                1 + children.iter().map(DecisionTree::depth).max().unwrap_or(0)
            }
        }
    }

    /// The leaf reached on `x ∈ {0..d-1}^n`: its path `(coord, value)` and label.
    pub fn path(&self, x: &[i64]) -> (Vec<(usize, i64)>, bool) {
        let mut node = self;
        let mut path = Vec::new();
        loop {
            match node {
                DecisionTree::Leaf(b) => return (path, *b),
                DecisionTree::Query { coord, children } => {
                    let a = x[*coord];
                    path.push((*coord, a));
                    node = &children[a as usize];
                }
            }
        }
    }

    pub fn evaluate(&self, x: &[i64]) -> bool {
        self.path(x).1
    }

    /// Every leaf with its path, in depth-first order.
    pub fn leaf_paths(&self) -> Vec<(Vec<(usize, i64)>, bool)> {
        fn go(
            t: &DecisionTree,
            path: &mut Vec<(usize, i64)>,
            out: &mut Vec<(Vec<(usize, i64)>, bool)>,
        ) {
            match t {
                DecisionTree::Leaf(b) => out.push((path.clone(), *b)),
                DecisionTree::Query { coord, children } => {
                    for (a, c) in children.iter().enumerate() {
                        path.push((*coord, a as i64));
                        go(c, path, out);
                        path.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Same shape, each leaf relabelled by `label(path, old_label)`.
    pub fn relabel(&self, label: &mut impl FnMut(&[(usize, i64)], bool) -> bool) -> DecisionTree {
        fn go(
            t: &DecisionTree,
            path: &mut Vec<(usize, i64)>,
            label: &mut impl FnMut(&[(usize, i64)], bool) -> bool,
        ) -> DecisionTree {
            match t {
                DecisionTree::Leaf(b) => DecisionTree::Leaf(label(path, *b)),
                DecisionTree::Query { coord, children } => DecisionTree::Query {
                    coord: *coord,
                    children: children
                        .iter()
                        .enumerate()
                        .map(|(a, c)| {
                            path.push((*coord, a as i64));
                            let r = go(c, path, label);
                            path.pop();
                            r
                        })
                        .collect(),
                },
            }
        }
        go(self, &mut Vec::new(), label)
    }

    /// The tree that behaves on `x` as `self` does on `(x + v) mod d`.
    pub fn shifted(&self, v: &[i64], d: i64) -> DecisionTree {
        match self {
            DecisionTree::Leaf(b) => DecisionTree::Leaf(*b),
            DecisionTree::Query { coord, children } => DecisionTree::Query {
                coord: *coord,
                children: (0..d)
                    .map(|a| children[(a + v[*coord]).rem_euclid(d) as usize].shifted(v, d))
                    .collect(),
            },
        }
    }

    /// All trees over `n` coordinates and alphabet `d` of depth at most `depth`.
    pub fn enumerate(n: usize, d: usize, depth: usize) -> Vec<DecisionTree> {
        fn go(free: &BTreeSet<usize>, d: usize, depth: usize) -> Vec<DecisionTree> {
            let mut out = vec![DecisionTree::Leaf(false), DecisionTree::Leaf(true)];
            if depth == 0 {
                return out;
            }
            for &c in free {
                let mut rest = free.clone();
                rest.remove(&c);
                let subs = go(&rest, d, depth - 1);
                // cartesian product of d children
                let mut combos: Vec<Vec<DecisionTree>> = vec![Vec::new()];
                for _ in 0..d {
                    combos = combos
                        .into_iter()
                        .flat_map(|pre| {
                            subs.iter().map(move |s| {
                                let mut v = pre.clone();
                                v.push(s.clone());
                                v
                            })
                        })
                        .collect();
                }
                out.extend(
                    combos
                        .into_iter()
                        .map(|children| DecisionTree::Query { coord: c, children }),
                );
            }
            out
        }
        go(&(0..n).collect(), d, depth)
    }

    /// `{"leaf": 0|1}` or `{"query": j, "children": [...]}` with 1-based `j`.
    pub fn to_json(&self) -> Value {
        match self {
            DecisionTree::Leaf(b) => json!({ "leaf": u8::from(*b) }),
            DecisionTree::Query { coord, children } => json!({
                "query": coord + 1,
                "children": children.iter().map(DecisionTree::to_json).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(b) = v.get("leaf") {
            return match b.as_u64().or_else(|| b.as_bool().map(u64::from)) {
                Some(0) => Ok(DecisionTree::Leaf(false)),
                Some(1) => Ok(DecisionTree::Leaf(true)),
                _ => Err(Error::invalid("leaf label must be 0 or 1")),
            };
        }
        let coord = v
            .get("query")
            .and_then(Value::as_u64)
            .filter(|&j| j >= 1)
            .ok_or_else(|| Error::invalid("tree node needs \"leaf\" or a 1-based \"query\""))?;
        let children = v
            .get("children")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("query node needs \"children\""))?
            .iter()
            .map(DecisionTree::from_json)
            .collect::<Result<_>>()?;
        Ok(DecisionTree::Query {
            coord: coord as usize - 1,
            children,
        })
    }
}

/// A randomized tester as a distribution over decision trees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDistribution {
    d: usize,
    trees: Vec<(Rational, DecisionTree)>,
}

impl TreeDistribution {
    pub fn new(d: usize, trees: Vec<(Rational, DecisionTree)>) -> Result<Self> {
        if d < 1 {
            return Err(Error::invalid("alphabet size must be positive"));
        }
        if trees.iter().any(|(w, _)| *w <= Rational::zero()) {
            return Err(Error::invalid("tree weights must be positive"));
        }
        let total = trees.iter().fold(Rational::zero(), |a, (w, _)| a + w);
        if total != Rational::from_integer(1.into()) {
            return Err(Error::invalid(format!(
                "tree weights sum to {total}, not 1"
            )));
        }
        Ok(TreeDistribution { d, trees })
    }

    pub fn point(d: usize, tree: DecisionTree) -> Self {
        TreeDistribution {
            d,
            trees: vec![(Rational::from_integer(1.into()), tree)],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn trees(&self) -> &[(Rational, DecisionTree)] {
        &self.trees
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.trees
            .iter()
            .try_for_each(|(_, t)| t.validate(n, self.d))
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(|(_, t)| t.depth()).max().unwrap_or(0)
    }

    /// Exact `Pr[accept x]` for `x ∈ {0..d-1}^n`.
    pub fn accept_probability(&self, x: &[i64]) -> Rational {
        self.trees
            .iter()
            .filter(|(_, t)| t.evaluate(x))
            .fold(Rational::zero(), |a, (w, _)| a + w)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "trees": self.trees.iter().map(|(w, t)| json!({
                "weight": format_rational(w),
                "tree": t.to_json(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let d = v
            .get("d")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::invalid("tree distribution needs \"d\""))?
            as usize;
        let trees = v
            .get("trees")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("tree distribution needs \"trees\""))?
            .iter()
            .map(|e| {
                let w = e
                    .get("weight")
                    .map(rational_from_json)
                    .unwrap_or_else(|| Err(Error::invalid("tree entry needs \"weight\"")))?;
                let t = DecisionTree::from_json(
                    e.get("tree")
                        .ok_or_else(|| Error::invalid("tree entry needs \"tree\""))?,
                )?;
                Ok((w, t))
            })
            .collect::<Result<_>>()?;
        Self::new(d, trees)
    }
}

/// Runs a [`TreeDistribution`] on inputs in `{0..d-1}^n`.
///
/// A queried value outside the alphabet (non-integral or out of range) rejects.
#[derive(Clone, Debug)]
pub struct TreeTester {
    n: usize,
    dist: TreeDistribution,
    cumulative: Vec<f64>,
}

impl TreeTester {
    pub fn new(n: usize, dist: TreeDistribution) -> Result<Self> {
        dist.validate(n)?;
        let mut acc = 0.0;
        let cumulative = dist
            .trees
            .iter()
            .map(|(w, _)| {
                acc += w.to_f64().unwrap_or(0.0);
                acc
            })
            .collect();
        Ok(TreeTester {
            n,
            dist,
            cumulative,
        })
    }

    pub fn distribution(&self) -> &TreeDistribution {
        &self.dist
    }

    fn pick(&self, rng: &mut dyn RngCore) -> &DecisionTree {
        let u = rng.gen::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let i = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.dist.trees.len() - 1);
        &self.dist.trees[i].1
    }
}

impl LatticeTester for TreeTester {
    fn dim(&self) -> usize {
        self.n
    }

    fn query_budget(&self) -> usize {
        self.dist.max_depth()
    }

    fn run(&self, t: &mut QueryAccess<'_>, rng: &mut dyn RngCore) -> bool {
        let mut node = self.pick(rng);
        loop {
            match node {
                DecisionTree::Leaf(b) => return *b,
                DecisionTree::Query { coord, children } => {
                    let v = t.query(*coord);
                    if !is_integral(&v) {
                        return false;
                    }
                    match v.to_integer().to_usize() {
                        Some(a) if a < self.dist.d => node = &children[a],
                        _ => return false,
                    }
                }
            }
        }
    }

    fn query_plan(&self, rng: &mut dyn RngCore) -> Vec<usize> {
        let tree = self.pick(rng);
        let coords: BTreeSet<usize> = tree
            .leaf_paths()
            .into_iter()
            .flat_map(|(p, _)| p.into_iter().map(|(c, _)| c))
            .collect();
        coords.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::ratio;

    #[test]
    fn enumeration_counts() {
        assert_eq!(DecisionTree::enumerate(2, 2, 0).len(), 2);
        assert_eq!(DecisionTree::enumerate(2, 2, 1).len(), 10);
        assert_eq!(DecisionTree::enumerate(2, 2, 2).len(), 74);
        for t in DecisionTree::enumerate(3, 2, 2) {
            t.validate(3, 2).unwrap();
        }
    }

    #[test]
    fn shift_and_json() {
        let t = DecisionTree::Query {
            coord: 1,
            children: vec![DecisionTree::Leaf(true), DecisionTree::Leaf(false)],
        };
        assert!(t.evaluate(&[0, 0]));
        let s = t.shifted(&[0, 1], 2);
        assert!(!s.evaluate(&[0, 0]));
        assert!(s.evaluate(&[0, 1]));
        assert_eq!(DecisionTree::from_json(&t.to_json()).unwrap(), t);
        let bad = DecisionTree::Query {
            coord: 0,
            children: vec![
                t.clone(),
                DecisionTree::Query {
                    coord: 0,
                    children: vec![DecisionTree::Leaf(true); 2],
                },
            ],
        };
        assert!(bad.validate(2, 2).is_err());
    }

    #[test]
    fn distribution_checks() {
        let leaf = DecisionTree::Leaf(true);
        assert!(TreeDistribution::new(2, vec![(ratio(1, 2), leaf.clone())]).is_err());
        let d = TreeDistribution::new(
            2,
            vec![
                (ratio(1, 3), leaf),
                (ratio(2, 3), DecisionTree::Leaf(false)),
            ],
        )
        .unwrap();
        assert_eq!(d.accept_probability(&[0, 1]), ratio(1, 3));
        assert_eq!(TreeDistribution::from_json(&d.to_json()).unwrap(), d);
    }
}
