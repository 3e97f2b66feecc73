//! Classical and quantum combinatorial designs behind dual-unitary gates.

pub mod catalog;
mod permutation;
mod quantum;

pub use catalog::named_gate;
pub use permutation::{
    all_permutations, latin_check, next_permutation, ols_check, ols_to_permutation, permutation_duality,
    render_grid, DesignTable, LatinMode, PermutationGate,
};
pub use quantum::{
    ame_coefficients, block_2unitary_conditions, block_decomposition, cardinality, column_entanglements,
    extract_quantum_design, AmeCoefficients, BlockDecomposition, BlockDefects, QuantumDesign,
};
