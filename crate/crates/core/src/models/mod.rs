//! Concrete Hamiltonian families with analytic reference data.

pub mod bosonic;
pub mod cp;
pub mod spin;

pub use bosonic::{bosonic_family, truncation_convergence, BosonicModel, TruncationQuantity, TruncationReport};
pub use cp::{cp_connection, cp_curvature_origin, cp_family, cp_unitary, cp_unitary_derivative, CpModel};
pub use spin::{spin_equator_loop, spin_family, SpinFamily, MIN_FIELD};
