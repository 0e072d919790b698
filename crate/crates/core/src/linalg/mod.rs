//! Dense complex linear algebra over labeled registers.

pub mod eig;
pub mod io;
pub mod layout;
pub mod random;
pub mod state;

pub use eig::{eig_hermitian, mat_pinv_sqrt, mat_sqrt, RANK_TOL, TOL_HERM};
pub use layout::RegisterLayout;
pub use random::{derive_seed, random_state, random_unitary, rng_from_seed, QsrRng, StateKind};
pub use state::{apply_isometry, partial_trace, permute, purify, tensor, DensityOperator, IsometryMap, Quantum, StateVector};

pub type C64 = num_complex::Complex64;
pub type CMat = nalgebra::DMatrix<C64>;
pub type CVec = nalgebra::DVector<C64>;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
