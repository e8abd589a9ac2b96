//! Classical laboratory for lattice free-fermion conformal field theory:
//! staggered lattice Hamiltonians, Koo-Saleur Virasoro generators,
//! operator-algebraic renormalization maps, an exact Gaussian engine and
//! small quantum circuits checked against it.

pub mod linalg;
pub mod quadratic;
pub mod lattice;
pub mod fock;
pub mod gaussian;
pub mod virasoro;
pub mod oar;
pub mod erroranalysis;
pub mod circuits;

pub use lattice::{GaussianState, LatticeSpec, Sector};
pub use quadratic::QuadraticOperator;
