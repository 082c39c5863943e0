//! Extensions of states on finite-dimensional CAR algebras.

pub type C64 = num_complex::Complex64;

pub mod car;
pub mod error;
pub mod extend;
mod linalg;
pub mod modes;
pub mod oracle;
mod pauli;
mod rep;
pub mod states;

pub use car::{Monomial, Operator, Parity};
pub use error::{Error, Result};
pub use modes::ModeSet;
pub use states::{DensityState, Tolerances};
