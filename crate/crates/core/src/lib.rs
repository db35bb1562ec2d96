//! Index-selective saddle search with shifted matrix-sign reflectors.
//!
//! The core crate holds the dense symmetric linear algebra, the Newton–Schulz
//! sign engine, shift selection and certification, reflector construction
//! with local analysis, the outer iteration and the benchmark energies.

pub mod dynamics;
pub mod error;
pub mod problems;
pub mod reflector;
pub mod sampling;
pub mod shifts;
pub mod sign_engine;
pub mod symlin;

pub use error::{Error, Result};
pub use symlin::{eigh, EigenDecomposition, SymmetricMatrix};
