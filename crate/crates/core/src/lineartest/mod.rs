//! Linear tests: dual witnesses on queried coordinate sets, canonical non-adaptive
//! linear testers and the decision-tree reductions between tester classes.
//!
//! Decision trees are explicit objects here, so the reductions are meant for small
//! instances (`n ≤ 4`, `d ≤ 4`, depth `≤ 3`) where every probability is computed
//! exactly.

mod pipeline;
mod tree;
mod witness;

pub use pipeline::{
    adaptive_to_nonadaptive, leaf_set_sizes, lift_bounded_to_integer, lift_integer_to_real,
    optimal_relabel, rho_coset, rho_members, two_sided_to_linear, BoundedToInteger, IntegerToReal,
    LeafSetSizes,
};
pub use tree::{DecisionTree, TreeDistribution, TreeTester};
pub use witness::{
    dual_witness, nonadaptive_linear_tester, projected_dual_basis, DualWitnessQuery,
    HarvestedIndexSets, IndexSetSampler, NonadaptiveLinearTester, UniformCoordinate,
    WeightedIndexSets,
};
