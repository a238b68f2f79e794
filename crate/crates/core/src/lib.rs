//! Non-abelian adiabatic holonomies of degenerate Hamiltonian families.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases at the crate root fix the scalar to `f64`.

pub mod adiabatic;
pub mod compiler;
pub mod connection;
pub mod error;
pub mod holonomy;
pub mod linalg;
pub mod loops;
pub mod models;
pub mod scalar;
pub mod spectral;

pub use adiabatic::{
    adiabaticity_ratio, compare_holonomy, dynamical_phase, dynamical_phase_midpoint, evolve, AdiabaticSchedule,
    EvolutionResult, Integrator, Ramp,
};
pub use compiler::{
    compile, gate_distance, generate_generic_loops, random_trig_loop, CompileError, CompilerOptions, CompilerResult,
    GateTarget,
};
pub use connection::{
    connection_at, connection_in_frame, curvature_at, curvature_in_frame, frame_at, irreducibility_dimension,
    span_dimension, transport_frame, ConnectionSample, CurvatureScheme, CurvatureTensor, Frame, Gauge,
};
pub use error::{Error, Result};
pub use holonomy::{
    holonomy_frame, holonomy_frame_from, holonomy_of_word, holonomy_projector, holonomy_projector_from,
    holonomy_section, path_ordered_exp, word_product, Holonomy, Method, WordRoute,
};
pub use loops::{compose, constant_loop, invert, reparametrize, word_to_loop, ControlPoint, Letter, Loop, LoopWord};
pub use scalar::{CMatrix, Real, C};
pub use spectral::{
    check_iso_degenerate, decompose, degenerate_function_lift, make_orbit_family, orbit_dimension,
    DegeneracySignature, FnFamily, HamiltonianFamily, OrbitFamily, SpectralDecomposition,
};

pub type ControlPoint64 = ControlPoint<f64>;
pub type Loop64 = Loop<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type OrbitFamily64 = OrbitFamily<f64>;
