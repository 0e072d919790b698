//! Seeded inputs shared by the benchmarks.

use qsr_core::linalg::random::{haar_vector, random_density_matrix, rng_from_seed};
use qsr_core::{DensityOperator, RegisterLayout, StateVector};

pub fn density(labels: &[(&str, usize)], seed: u64) -> DensityOperator {
    let l = RegisterLayout::new(labels.iter().copied()).expect("valid layout");
    let d = l.total_dim();
    DensityOperator::new(l, random_density_matrix(d, &mut rng_from_seed(seed))).expect("valid state")
}

pub fn pure(labels: &[(&str, usize)], seed: u64) -> StateVector {
    let l = RegisterLayout::new(labels.iter().copied()).expect("valid layout");
    let d = l.total_dim();
    StateVector::new(l, haar_vector(d, &mut rng_from_seed(seed))).expect("valid state")
}

/// Random qubit `R, B, C` with a trivial `A`.
pub fn three_qubits(seed: u64) -> StateVector {
    pure(&[("R", 2), ("A", 1), ("B", 2), ("C", 2)], seed)
}
