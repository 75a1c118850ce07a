//! Simulation and verification toolkit for vector-valued Schrödinger
//! semigroups generated by `A u = div(Q grad u) - V u`.
//!
//! The semigroup is approximated by the Trotter–Kato product formula
//! `[e^{(t/n) Delta_Q} e^{-(t/n) V}]^n`, with the two factors provided by
//! [`diffusion`] and [`expm`]. Everything numerical is generic over [`Real`];
//! the `*64` aliases below fix the scalar to `f64`.

pub mod complexify;
pub mod diffusion;
pub mod error;
pub mod expm;
pub mod field;
pub mod kato;
pub mod linalg;
pub mod scalar;
pub mod splitting;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = field::Grid<f64>;
pub type VectorField64 = field::VectorField<f64>;
pub type ScalarField64 = field::ScalarField<f64>;
pub type DiffusionTensorField64 = field::DiffusionTensorField<f64>;
pub type PotentialField64 = field::PotentialField<f64>;
