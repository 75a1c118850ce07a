//! Turns a [`RunConfig`] into grids, fields and schemes.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsg_core::complexify::ComplexScalarPotential;
use vsg_core::diffusion::SolverOptions;
use vsg_core::field::{Boundary, DiffusionTensorField, Grid, NormSpec, PotentialField, VectorField};
use vsg_core::linalg::sym2_eigenvalues;
use vsg_core::splitting::{DiffusionBackend, SplitScheme, SplitVariant};

use crate::config::{BackendSpec, BoundarySpec, DiffusionSpec, InitialSpec, PotentialSpec, RunConfig, VariantSpec};
use crate::CliError;

/// Everything a run needs, built once from the config.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid<f64>,
    pub q: DiffusionTensorField<f64>,
    pub v: PotentialField<f64>,
    pub u0: VectorField<f64>,
    pub scheme: SplitScheme<f64>,
    pub exponents: Vec<NormSpec<f64>>,
    /// Scalar `w + iv` form of the potential, when it has one.
    pub scalar: Option<ComplexScalarPotential<f64>>,
    pub seed: u64,
}

impl Problem {
    pub fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        cfg.check()?;
        let grid = build_grid(cfg)?;
        let q = build_diffusion(&cfg.diffusion, &grid)?;
        let v = build_potential(&cfg.potential, &grid, cfg.seed)?;
        let u0 = build_initial(&cfg.initial, &grid)?;
        let scheme = build_scheme(cfg)?;
        let exponents = cfg
            .p
            .iter()
            .map(|&p| if p.is_infinite() { Ok(NormSpec::infinity()) } else { NormSpec::new(p) })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("p: {e}")))?;
        let scalar = scalar_form(&cfg.potential, &grid);
        Ok(Self {
            grid,
            q,
            v,
            u0,
            scheme,
            exponents,
            scalar,
            seed: cfg.seed,
        })
    }
}

pub fn exponent_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

fn cfg_err(key: &str) -> impl Fn(vsg_core::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{key}: {e}"))
}

fn build_grid(cfg: &RunConfig) -> Result<Grid<f64>, CliError> {
    let boundary = match cfg.grid.boundary {
        BoundarySpec::Periodic => Boundary::Periodic,
        BoundarySpec::Dirichlet => Boundary::Dirichlet,
    };
    Grid::new(&cfg.grid.counts, &cfg.grid.half_extents, boundary).map_err(cfg_err("grid"))
}

fn build_diffusion(spec: &DiffusionSpec, grid: &Grid<f64>) -> Result<DiffusionTensorField<f64>, CliError> {
    let d = grid.dim();
    let err = cfg_err("diffusion");
    match spec {
        DiffusionSpec::Identity => Ok(DiffusionTensorField::identity(grid.clone())),
        DiffusionSpec::Constant { matrix, eta1, eta2 } => {
            if matrix.len() != d * d {
                return Err(CliError::Config(format!(
                    "diffusion.matrix: {} entries for a {d}-d grid",
                    matrix.len()
                )));
            }
            let (lo, hi) = if d == 1 {
                (matrix[0], matrix[0])
            } else {
                sym2_eigenvalues(matrix[0], matrix[1], matrix[3])
            };
            DiffusionTensorField::constant(grid.clone(), matrix, eta1.unwrap_or(lo), eta2.unwrap_or(hi)).map_err(err)
        }
        DiffusionSpec::SmoothDiagonal { base, amplitude, eta1, eta2 } => {
            if !(amplitude.abs() < 1.0) {
                return Err(CliError::Config(format!(
                    "diffusion.amplitude: |{amplitude}| must be below 1"
                )));
            }
            let (b, a) = (*base, *amplitude);
            let lo = eta1.unwrap_or(b * (1.0 - a.abs()));
            let hi = eta2.unwrap_or(b * (1.0 + a.abs()));
            DiffusionTensorField::from_fn(grid.clone(), lo, hi, |x: &[f64]| {
                let mut q = [[0.0; 2]; 2];
                for (k, xk) in x.iter().enumerate() {
                    q[k][k] = b * (1.0 + a * xk.sin());
                }
                q
            })
            .map_err(err)
        }
    }
}

pub fn build_potential(spec: &PotentialSpec, grid: &Grid<f64>, seed: u64) -> Result<PotentialField<f64>, CliError> {
    let err = cfg_err("potential");
    let m = spec.components();
    let v = match spec {
        PotentialSpec::Zero { .. } => PotentialField::zero(grid.clone(), m),
        PotentialSpec::Diagonal { values } => {
            let mut mat = vec![0.0; m * m];
            for (j, &x) in values.iter().enumerate() {
                mat[j * m + j] = x;
            }
            PotentialField::constant(grid.clone(), m, &mat)
        }
        PotentialSpec::Rotation { v, w, defect } => {
            let base = PotentialField::constant(grid.clone(), 2, &[*w, -v, *v, *w]).map_err(&err)?;
            match defect {
                None => Ok(base),
                Some(def) => base.with_point_override(def.point, &[def.w, -v, *v, def.w]),
            }
        }
        PotentialSpec::SmoothRotation { v_amp, w0, w1 } => PotentialField::from_fn(grid.clone(), 2, |x: &[f64]| {
            let v = v_amp * x[0].sin();
            let w = w0 + w1 * (x[0] / 2.0).cos();
            vec![w, -v, v, w]
        }),
        PotentialSpec::PolynomialGrowth { alpha, coupling, .. } => PotentialField::from_fn(grid.clone(), m, |x: &[f64]| {
            let r2: f64 = x.iter().map(|a| a * a).sum();
            let s = (1.0 + r2).powf(alpha / 2.0);
            let mut mat = vec![0.0; m * m];
            for j in 0..m {
                mat[j * m + j] = s;
                if j + 1 < m {
                    mat[j * m + j + 1] = -coupling;
                    mat[(j + 1) * m + j] = *coupling;
                }
            }
            mat
        }),
        PotentialSpec::Custom { matrix, .. } => PotentialField::constant(grid.clone(), m, matrix),
        PotentialSpec::RandomAccretive { scale, .. } => {
            PotentialField::constant(grid.clone(), m, &random_accretive_matrix(m, *scale, seed))
        }
    };
    Ok(v.map_err(err)?.with_preset(spec.name()))
}

/// `s (B B^T + A - A^T)` with entries of `A`, `B` uniform in `[-1, 1]`.
pub fn random_accretive_matrix(m: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let a: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let bbt: f64 = (0..m).map(|k| b[i * m + k] * b[j * m + k]).sum();
            out[i * m + j] = scale * (bbt + a[i * m + j] - a[j * m + i]);
        }
    }
    out
}

fn scalar_form(spec: &PotentialSpec, grid: &Grid<f64>) -> Option<ComplexScalarPotential<f64>> {
    match spec {
        PotentialSpec::Rotation { v, w, defect: None } => ComplexScalarPotential::constant(grid, *v, *w).ok(),
        PotentialSpec::SmoothRotation { v_amp, w0, w1 } => {
            ComplexScalarPotential::from_fn(grid, |x| (v_amp * x[0].sin(), w0 + w1 * (x[0] / 2.0).cos())).ok()
        }
        _ => None,
    }
}

fn build_initial(spec: &InitialSpec, grid: &Grid<f64>) -> Result<VectorField<f64>, CliError> {
    let (center, weights) = match spec {
        InitialSpec::Gaussian { center, weights, .. } | InitialSpec::Bump { center, weights, .. } => (center, weights),
    };
    let profile = |x: &[f64]| -> f64 {
        let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
        match spec {
            InitialSpec::Gaussian { sigma, .. } => (-r2 / (2.0 * sigma * sigma)).exp(),
            InitialSpec::Bump { radius, .. } => {
                let s = r2 / (radius * radius);
                if s < 1.0 {
                    (1.0 - 1.0 / (1.0 - s)).exp()
                } else {
                    0.0
                }
            }
        }
    };
    VectorField::from_fn(grid.clone(), weights.len(), |x: &[f64], j| {
        Complex::new(weights[j] * profile(x), 0.0)
    })
    .map_err(cfg_err("initial"))
}

fn build_scheme(cfg: &RunConfig) -> Result<SplitScheme<f64>, CliError> {
    let s = &cfg.scheme;
    let variant = match s.variant {
        VariantSpec::Lie => SplitVariant::Lie,
        VariantSpec::Strang => SplitVariant::Strang,
    };
    let backend = match s.backend {
        BackendSpec::Spectral => DiffusionBackend::Spectral,
        BackendSpec::BackwardEuler => DiffusionBackend::BackwardEuler,
        BackendSpec::CrankNicolson => DiffusionBackend::CrankNicolson,
    };
    let mut solver = SolverOptions::default();
    if let Some(tol) = s.solver_tol {
        solver.tol = tol;
    }
    solver.max_iter = s.max_iter;
    Ok(SplitScheme::new(variant, cfg.steps(), s.t, backend)
        .map_err(cfg_err("scheme"))?
        .with_solver(solver))
}
