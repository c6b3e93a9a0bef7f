//! Binary linear codes, Reed-Muller codes and their local testers.

mod flat;
mod linear;
mod rm;
mod tester;
mod tolerant;

pub use flat::{RmFlatTester, DEFAULT_C_REP};
pub use linear::{schur_condition, schur_product, BinaryLinearCode, DEFAULT_CODEWORD_CAP};
pub use rm::{rm_code, ReedMullerCode};
pub use tester::{
    BitQuery, BitSource, CodeTester, CodeTesterFactory, CodeTesterSpec, RmTesterFactory,
    TrivialTester,
};
pub use tolerant::{TolerantCodeTester, DEFAULT_C_MAJ};
