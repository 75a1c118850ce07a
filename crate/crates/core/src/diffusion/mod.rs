//! Diffusion factor of the splitting: the discrete `Delta_Q = div(Q grad .)`
//! acting componentwise, the exact spectral semigroup for constant `Q` on
//! periodic grids, and implicit steps for general `Q`.

mod implicit;
mod operator;
mod spectral;

pub use implicit::{implicit_step, ImplicitMethod, SolverOptions};
pub use operator::{inner_product, DiscreteOperator, FormWeight, ASSEMBLY_ELLIPTICITY_TOL};
pub use spectral::{spectral_step, wavenumber, SpectralPropagator};

use crate::error::Result;
use crate::field::{DiffusionTensorField, VectorField};
use crate::scalar::Real;

/// Assembles `L_h` for `Q`.
pub fn assemble<T: Real>(q: &DiffusionTensorField<T>) -> Result<DiscreteOperator<T>> {
    DiscreteOperator::assemble(q)
}

/// Componentwise `L_h u`.
pub fn apply<T: Real>(op: &DiscreteOperator<T>, u: &VectorField<T>) -> Result<VectorField<T>> {
    op.apply(u)
}
