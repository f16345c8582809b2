//! Contextual hidden-parameter model of finite-dimensional quantum mechanics.
//!
//! Observables are hermitian elements of the matrix algebra `M_d(C)`. A
//! [`PhysicalState`](valuation::PhysicalState) is a dispersion-free valuation
//! that reads one joint eigenvalue out of a maximal commuting set (a
//! [`Context`](context::Context)); it is undefined on observables that are not
//! diagonal in its context. Ensembles of physical states drawn with Born
//! weights reproduce the linear quantum average `Tr(rho A)`, from which the
//! GNS construction recovers a Hilbert-space representation.
//!
//! The [`bell`] module compares the contextual model against a non-contextual
//! local hidden-variable model on the CHSH quantity.
//!
//! Sampling is batched over counter-based ChaCha sub-streams, so results are
//! identical whether batches run on the rayon pool (feature `parallel`,
//! enabled by default) or sequentially.

pub mod algebra;
pub mod bell;
pub mod context;
pub mod dynamics;
pub mod ensemble;
mod error;
pub mod gns;
pub mod harness;
pub mod parallel;
pub mod random;
pub mod rng;
pub mod stats;
pub mod valuation;

pub use algebra::{AlgebraElement, Observable, SpectralDecomposition};
pub use context::Context;
pub use ensemble::{QuantumState, SampleReport};
pub use error::{Error, Result};
pub use parallel::Execution;
pub use rng::SeedStream;
pub use valuation::PhysicalState;

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
