use thiserror::Error;

/// Errors raised by the field, operator and evolution layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid has {points} points, exceeding the memory budget of {budget}")]
    GridTooLarge { points: usize, budget: usize },

    #[error("field length {actual} does not match grid ({points} points x {components} components)")]
    LengthMismatch {
        actual: usize,
        points: usize,
        components: usize,
    },

    #[error("non-finite value at point {point}, component {component}")]
    NonFinite { point: usize, component: usize },

    #[error("component count {0} outside 1..=8")]
    BadComponentCount(usize),

    #[error("grids do not match")]
    GridMismatch,

    #[error("component counts differ: {0} vs {1}")]
    ComponentMismatch(usize, usize),

    #[error("diffusion tensor not symmetric at point {point}: q[{i}][{j}]={a} vs q[{j}][{i}]={b}")]
    Asymmetric {
        point: usize,
        i: usize,
        j: usize,
        a: f64,
        b: f64,
    },

    #[error("ellipticity bounds violated at point {point}: eigenvalues [{lambda_min}, {lambda_max}] vs declared [{eta1}, {eta2}]")]
    NotElliptic {
        point: usize,
        lambda_min: f64,
        lambda_max: f64,
        eta1: f64,
        eta2: f64,
    },

    #[error("potential is not accretive at point {point}: min eigenvalue of symmetric part {min_eigenvalue}")]
    NotAccretive { point: usize, min_eigenvalue: f64 },

    #[error("invalid norm exponent p = {0}")]
    BadExponent(f64),

    #[error("matrix exponential argument too large: ||tau M||_1 = {norm} exceeds {limit}; reduce the step")]
    ExpmOverflow { norm: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spectral step requires a periodic grid and constant Q")]
    SpectralUnsupported,

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("test function invalid: {0}")]
    BadTestFunction(String),

    #[error("complex potential requires w >= 0; w = {value} at point {point}")]
    NegativeDamping { point: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
