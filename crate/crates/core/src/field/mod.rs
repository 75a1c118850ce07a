//! Grids, vector fields, coefficient fields, norms, and the hypothesis
//! validators for `Q` (ellipticity) and `V` (accretivity).

mod grid;
mod potential;
mod tensor;
mod vector;

pub use grid::{Boundary, Grid, DEFAULT_POINT_BUDGET};
pub use potential::{
    estimate_sector_constant, numerical_range_point, validate_accretivity, AccretivityReport,
    PotentialField, SECTOR_ACCRETIVITY_TOL,
};
pub use tensor::{validate_ellipticity, DiffusionTensorField, EllipticityReport};
pub use vector::{euclidean_norm, lp_norm, NormSpec, ScalarField, VectorField, MAX_COMPONENTS};

/// `|u|` at every point.
pub fn pointwise_abs<T: crate::Real>(u: &VectorField<T>) -> ScalarField<T> {
    u.pointwise_abs()
}
