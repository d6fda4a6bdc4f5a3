//! Lie-Hamilton systems toolkit.
//!
//! The crate models time-dependent Hamiltonian systems whose vector field is
//! a curve in a finite-dimensional Lie algebra of Hamiltonian vector fields.
//! It provides:
//!
//! * [`algebra`]: exact structure-constant tables, validation, adjoint flow
//!   matrices, and center computations;
//! * [`sympoly`]: exact polynomials on copies of the dual algebra with the
//!   induced Poisson bracket, coproducts, and Casimir searches;
//! * [`realization`]: phase-space realizations of the abstract generators by
//!   smooth Hamiltonians, with numeric bracket and homomorphism checks;
//! * [`systems`]: a catalog of concrete systems with time-dependent
//!   coefficient curves and diagonal prolongations;
//! * [`dynamics`]: fixed-step and adaptive integrators, invariant drift
//!   monitoring, involution and independence diagnostics, and linear flows of
//!   time-dependent constants of motion;
//! * [`superposition`]: closed-form and implicit nonlinear superposition
//!   rules, constant extraction from particular solutions, and end-to-end
//!   verification against integrated trajectories.
//!
//! Exactness policy: everything algebraic (brackets of polynomials, Casimir
//! solves, validation) runs over arbitrary-precision rationals; floating
//! point enters only where trajectories and phase-space functions live.

pub mod algebra;
pub mod dynamics;
pub mod exact;
mod numeric;
pub mod realization;
pub mod superposition;
pub mod sympoly;
pub mod systems;

pub use algebra::StructureConstants;
pub use exact::Rat;
pub use sympoly::SymPoly;
