//! Local membership testers for integer point lattices.
//!
//! The crate is organised bottom-up:
//!
//! * [`exactlinalg`]: exact rational and big-integer linear algebra (HNF, determinants,
//!   duals, orthogonal complements).
//! * [`lattice`]: lattice bases, membership, the `L mod d` coset structure and the
//!   brute-force distance oracles every tester is checked against.
//! * [`codes`]: binary linear codes, Reed-Muller codes, the affine-flat parity test and
//!   tolerant code testers.
//! * [`codeformula`]: lattices `C0 + 2C1 + ... + 2^m Z^n` and their composed testers.
//! * [`testers`]: query accounting, `Z^n` testers, knapsack lattices and the
//!   outside-span machinery.
//! * [`lineartest`]: dual witnesses, canonical linear tests and the decision-tree
//!   reduction pipeline.
//! * [`harness`]: seeded experiments, statistics, CSV/JSONL/SVG output and the CLI.

pub mod codeformula;
pub mod codes;
pub mod error;
pub mod exactlinalg;
pub mod exec;
pub mod harness;
pub mod lattice;
pub mod lineartest;
pub mod testers;

pub use error::{Error, Result};
pub use exactlinalg::{RatMatrix, RatVector, Rational};
pub use lattice::LatticeBasis;
