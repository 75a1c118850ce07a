use crate::diffusion::{implicit_step, DiscreteOperator, ImplicitMethod, SolverOptions, SpectralPropagator};
use crate::error::{Error, Result};
use crate::expm::ExpCache;
use crate::field::{
    validate_accretivity, validate_ellipticity, DiffusionTensorField, NormSpec, PotentialField, VectorField,
};
use crate::scalar::{from_usize, Real};

/// Tolerance for the hypothesis checks performed before any evolution.
pub const HYPOTHESIS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitVariant {
    /// `u <- e^{tau Delta_Q} e^{-tau V} u` per step.
    Lie,
    /// `u <- e^{-tau V / 2} e^{tau Delta_Q} e^{-tau V / 2} u` per step.
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiffusionBackend {
    /// Exact Fourier semigroup; periodic grid and constant `Q` only.
    Spectral,
    BackwardEuler,
    CrankNicolson,
}

impl DiffusionBackend {
    /// Whether per-step `L^1` and `L^inf` contraction is expected from the
    /// backend (positivity preserving for diagonal `Q`).
    pub fn preserves_positivity(self) -> bool {
        !matches!(self, DiffusionBackend::CrankNicolson)
    }
}

/// Product-formula scheme: variant, step count `n`, horizon `t`, diffusion backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitScheme<T> {
    pub variant: SplitVariant,
    pub steps: usize,
    pub horizon: T,
    pub backend: DiffusionBackend,
    pub solver: SolverOptions<T>,
}

impl<T: Real> SplitScheme<T> {
    pub fn new(variant: SplitVariant, steps: usize, horizon: T, backend: DiffusionBackend) -> Result<Self> {
        let s = Self {
            variant,
            steps,
            horizon,
            backend,
            solver: SolverOptions::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_solver(mut self, solver: SolverOptions<T>) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_horizon(mut self, horizon: T) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_variant(mut self, variant: SplitVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("step count must be >= 1".into()));
        }
        if !(self.horizon > T::zero() && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon t = {} must be positive",
                self.horizon
            )));
        }
        Ok(())
    }

    pub fn step_size(&self) -> T {
        self.horizon / from_usize(self.steps)
    }
}

/// Norm history of one run. Row `k` holds the norms at `times[k]` in the
/// order of `exponents`; every row is read from the same evolved field.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace<T> {
    pub exponents: Vec<NormSpec<T>>,
    pub times: Vec<T>,
    pub norms: Vec<Vec<T>>,
    pub snapshots: Vec<(T, VectorField<T>)>,
}

impl<T: Real> EvolutionTrace<T> {
    fn new(exponents: Vec<NormSpec<T>>) -> Self {
        Self {
            exponents,
            times: Vec::new(),
            norms: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    fn record(&mut self, t: T, u: &VectorField<T>) -> Result<()> {
        let row = self
            .exponents
            .iter()
            .map(|&p| u.lp_norm(p))
            .collect::<Result<Vec<T>>>()?;
        self.times.push(t);
        self.norms.push(row);
        Ok(())
    }

    /// Norm column for one exponent.
    pub fn column(&self, k: usize) -> Vec<T> {
        self.norms.iter().map(|r| r[k]).collect()
    }

    /// Largest relative per-step increase `(N_{k+1} - N_k) / N_0` over all
    /// columns, with its exponent index and row. Negative or zero when every
    /// column is nonincreasing.
    pub fn worst_increase(&self) -> (T, usize, usize) {
        let mut worst = (T::neg_infinity(), 0, 0);
        for k in 0..self.exponents.len() {
            let col = self.column(k);
            let base = col.first().copied().unwrap_or_else(T::one);
            let base = if base > T::zero() { base } else { T::one() };
            for (r, w) in col.windows(2).enumerate() {
                let inc = (w[1] - w[0]) / base;
                if inc > worst.0 {
                    worst = (inc, k, r + 1);
                }
            }
        }
        worst
    }
}

/// What [`Splitter::run`] records.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig<T> {
    pub exponents: Vec<NormSpec<T>>,
    /// Store a copy of the field every `k` steps (and at the end).
    pub snapshot_every: Option<usize>,
}

impl<T: Real> Default for TraceConfig<T> {
    fn default() -> Self {
        Self {
            exponents: vec![NormSpec::two()],
            snapshot_every: None,
        }
    }
}

impl<T: Real> TraceConfig<T> {
    pub fn with_exponents(exponents: Vec<NormSpec<T>>) -> Self {
        Self {
            exponents,
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone)]
enum Diffusion<T: Real> {
    Spectral(SpectralPropagator<T>),
    Implicit {
        op: DiscreteOperator<T>,
        method: ImplicitMethod,
        opts: SolverOptions<T>,
    },
}

/// Prepared product-formula integrator for fixed `Q`, `V` and backend.
///
/// Construction validates both hypotheses and builds the diffusion backend
/// once; exponential tables are cached per step size.
#[derive(Debug, Clone)]
pub struct Splitter<'a, T: Real> {
    v: &'a PotentialField<T>,
    diffusion: Diffusion<T>,
    backend: DiffusionBackend,
    full: ExpCache<T>,
    half: ExpCache<T>,
}

impl<'a, T: Real> Splitter<'a, T> {
    pub fn new(
        q: &DiffusionTensorField<T>,
        v: &'a PotentialField<T>,
        backend: DiffusionBackend,
        solver: SolverOptions<T>,
    ) -> Result<Self> {
        if !q.grid().same_as(v.grid()) {
            return Err(Error::GridMismatch);
        }
        let tol = T::lit(HYPOTHESIS_TOL);
        let ell = validate_ellipticity(q, tol)?;
        if !ell.pass {
            return Err(Error::NotElliptic {
                point: ell.worst_point,
                lambda_min: ell.lambda_min,
                lambda_max: ell.lambda_max,
                eta1: q.eta1().to_f64_lossy(),
                eta2: q.eta2().to_f64_lossy(),
            });
        }
        let acc = validate_accretivity(v, tol);
        if !acc.pass {
            return Err(Error::NotAccretive {
                point: acc.point,
                min_eigenvalue: acc.min_eigenvalue,
            });
        }
        let diffusion = match backend {
            DiffusionBackend::Spectral => {
                let qc = q.constant_matrix().ok_or(Error::SpectralUnsupported)?;
                Diffusion::Spectral(SpectralPropagator::new(q.grid(), qc)?)
            }
            DiffusionBackend::BackwardEuler | DiffusionBackend::CrankNicolson => Diffusion::Implicit {
                op: DiscreteOperator::assemble(q)?,
                method: if backend == DiffusionBackend::BackwardEuler {
                    ImplicitMethod::BackwardEuler
                } else {
                    ImplicitMethod::CrankNicolson
                },
                opts: solver,
            },
        };
        Ok(Self {
            v,
            diffusion,
            backend,
            full: ExpCache::new(),
            half: ExpCache::new(),
        })
    }

    pub fn backend(&self) -> DiffusionBackend {
        self.backend
    }

    /// `e^{tau Delta_Q} u` with the configured backend.
    pub fn diffusion_step(&mut self, u: &VectorField<T>, tau: T) -> Result<VectorField<T>> {
        match &mut self.diffusion {
            Diffusion::Spectral(p) => p.step(u, tau),
            Diffusion::Implicit { op, method, opts } => implicit_step(u, op, tau, *method, *opts),
        }
    }

    /// `e^{-tau V} u`.
    pub fn potential_step(&mut self, u: &VectorField<T>, tau: T) -> Result<VectorField<T>> {
        self.full.apply(u, self.v, tau)
    }

    /// One step of the chosen variant.
    pub fn step(&mut self, u: &VectorField<T>, tau: T, variant: SplitVariant) -> Result<VectorField<T>> {
        match variant {
            SplitVariant::Lie => {
                let w = self.full.apply(u, self.v, tau)?;
                self.diffusion_step(&w, tau)
            }
            SplitVariant::Strang => {
                let h = tau * T::lit(0.5);
                let w = self.half.apply(u, self.v, h)?;
                let w = self.diffusion_step(&w, tau)?;
                self.half.apply(&w, self.v, h)
            }
        }
    }

    /// `n` steps of size `t / n` from `u0`, recording norms after every step.
    pub fn run(
        &mut self,
        u0: &VectorField<T>,
        horizon: T,
        steps: usize,
        variant: SplitVariant,
        trace: &TraceConfig<T>,
    ) -> Result<(VectorField<T>, EvolutionTrace<T>)> {
        if !u0.grid().same_as(self.v.grid()) {
            return Err(Error::GridMismatch);
        }
        if u0.components() != self.v.components() {
            return Err(Error::ComponentMismatch(u0.components(), self.v.components()));
        }
        if steps == 0 || !(horizon > T::zero()) {
            return Err(Error::InvalidParameter("need steps >= 1 and t > 0".into()));
        }
        let tau = horizon / from_usize(steps);
        let mut record = EvolutionTrace::new(trace.exponents.clone());
        record.record(T::zero(), u0)?;
        let mut u = u0.clone();
        for k in 1..=steps {
            u = self.step(&u, tau, variant)?;
            let t = if k == steps { horizon } else { tau * from_usize(k) };
            record.record(t, &u)?;
            if let Some(every) = trace.snapshot_every {
                if every > 0 && (k % every == 0 || k == steps) {
                    record.snapshots.push((t, u.clone()));
                }
            }
        }
        u.check_finite()?;
        Ok((u, record))
    }

    /// Runs without recording anything but the final field.
    pub fn propagate(
        &mut self,
        u0: &VectorField<T>,
        horizon: T,
        steps: usize,
        variant: SplitVariant,
    ) -> Result<VectorField<T>> {
        let tau = horizon / from_usize(steps);
        let mut u = u0.clone();
        for _ in 0..steps {
            u = self.step(&u, tau, variant)?;
        }
        Ok(u)
    }
}

/// Evolves `u0` to `scheme.horizon` with `scheme.steps` product-formula steps.
pub fn evolve<T: Real>(
    u0: &VectorField<T>,
    scheme: &SplitScheme<T>,
    q: &DiffusionTensorField<T>,
    v: &PotentialField<T>,
    trace: &TraceConfig<T>,
) -> Result<(VectorField<T>, EvolutionTrace<T>)> {
    scheme.validate()?;
    let mut s = Splitter::new(q, v, scheme.backend, scheme.solver)?;
    s.run(u0, scheme.horizon, scheme.steps, scheme.variant, trace)
}
