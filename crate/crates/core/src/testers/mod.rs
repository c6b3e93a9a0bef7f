//! Query-accounted testers: `Z^n` integrality (plain and tolerant), knapsack lattices
//! and the lifting of span testers to inputs outside `span(L)`.

mod access;
mod integer;
mod knapsack;
mod outside;

pub use access::{LatticeTester, QueryAccess, TestOutcome};
pub use integer::{
    integer_lattice_tester, tolerant_integer_tester, IntegerLatticeTester, TolerantIntegerTester,
    DEFAULT_C_T, DEFAULT_C_Z,
};
pub use knapsack::{
    knapsack_distance, knapsack_lattice, knapsack_tester, KnapsackLattice, KnapsackTester,
};
pub use outside::{
    far_instance_outside_span, lift_tester_outside_span, nonadaptive_gadget_error, LiftedTester,
};
