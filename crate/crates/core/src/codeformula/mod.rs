//! Code-formula lattices `C0 + 2 C1 + ... + 2^{m-1} C_{m-1} + 2^m Z^n` and their
//! testers.

mod decompose;
mod lattice;
mod tester;

pub use decompose::{bit_decompose, BitDecomposition};
pub use lattice::{distance_sandwich_check, CodeFormulaLattice, SandwichTriple};
pub use tester::{
    code_tester_from_lattice_tester, lattice_tester, tolerant_lattice_tester, CodeFormulaTester,
    LatticeDerivedCodeTester, TesterMode, TolerantCodeFormulaTester,
};
