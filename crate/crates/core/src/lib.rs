//! Quantum marginals on trees: Markov-chain compatibility tests, Petz
//! reconstruction of maximum-entropy states, quantum Chow-Liu learning and
//! an entropy-difference gadget.

pub mod chowliu;
pub mod error;
pub mod gadget;
pub mod info;
pub mod io;
pub mod layout;
pub mod markov;
pub mod operator;
pub mod petz;
pub mod random;
pub mod spectral;
pub mod states;

pub use error::{Error, Result};
pub use layout::{Subsystem, SystemLayout};
pub use operator::{trace_distance, DensityOperator, Operator, Tolerances};
pub use spectral::{MatrixFunction, Spectrum};

pub use faer::c64;

/// Dense complex matrix used throughout.
pub type CMatrix = faer::Mat<c64>;
