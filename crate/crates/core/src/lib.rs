//! One-shot quantum state redistribution on small dense Hilbert spaces.

pub mod convex_split;
pub mod entropies;
pub mod error;
pub(crate) mod search;
pub mod linalg;
pub mod protocols;
pub mod qeps;
pub mod suite;

pub use error::{QsrError, Result};
pub use linalg::{DensityOperator, IsometryMap, RegisterLayout, StateVector};
