//! Fixtures shared by the benchmarks.

use bellnet_core::netspec::quantum_star;
use bellnet_core::quantum::{dense_state_for_spec, DenseState, DEFAULT_DENSE_CAP};
use bellnet_core::{operators::build_segmented_operators, OperatorFamily};

/// Operator family of the `n`-source Bell star at `θ = π/4`.
pub fn star_family(n: usize) -> OperatorFamily {
    build_segmented_operators(&quantum_star(n)).expect("star network is valid")
}

/// Dense state vector of the `n`-source Bell star.
pub fn star_dense(n: usize) -> DenseState {
    dense_state_for_spec(&quantum_star(n), DEFAULT_DENSE_CAP).expect("star fits the dense cap")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(star_family(3).operators.len(), 8);
        assert_eq!(star_dense(2).num_qubits(), 4);
    }
}
