//! Exact rational and big-integer linear algebra.
//!
//! Everything here is exact: no floating point is used on any path that decides
//! membership, distance or integrality.

mod hnf;
mod matrix;
mod rational;

pub use hnf::{hnf, hnf_integer};
pub use matrix::{
    determinant, dual_basis, inverse, orthogonal_complement_basis, rank, rref, solve, RatMatrix,
};
pub use rational::{
    abs_pow, dot, format_rational, frac_distance, int, is_integral, lcm_of_denominators,
    matrix_from_json, matrix_to_json, parse_rational, parse_rational_list, ratio,
    rational_from_json, rational_to_json, round_half_away, vector_from_json, vector_to_json,
    RatVector, Rational,
};
