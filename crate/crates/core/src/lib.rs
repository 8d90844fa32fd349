//! Polaron and exact-diagonalization methods for qubits in a coupled-cavity waveguide.

pub mod dynamics;
pub mod ed;
pub mod error;
pub mod excitation;
pub mod linalg;
pub mod model;
pub mod numeric;
pub mod polaron_single;
pub mod polaron_two;
pub mod rwa;
pub mod transfer;

pub use error::{Error, Result};
pub use excitation::{BoundState, Parity};
pub use model::{MomentumGrid, ModelParams};
pub use polaron_single::{solve_1q, FixedPointOptions, PolaronSolution1Q};
pub use polaron_two::{solve_2q, PolaronSolution2Q};
