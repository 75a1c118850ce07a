//! Scalar complex Schrödinger operators `Delta_Q - (i v + w)` as two-component
//! real systems with the rotation-damping potential `[[w, -v], [v, w]]`.

use num_complex::Complex;

use crate::diffusion::{implicit_step, DiscreteOperator, ImplicitMethod, SpectralPropagator};
use crate::error::{Error, Result};
use crate::field::{DiffusionTensorField, Grid, PotentialField, ScalarField, VectorField};
use crate::scalar::{from_usize, Real};
use crate::splitting::{DiffusionBackend, SplitScheme, SplitVariant};

/// Real oscillation `v` (any sign) and damping `w >= 0` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexScalarPotential<T> {
    v: ScalarField<T>,
    w: ScalarField<T>,
}

impl<T: Real> ComplexScalarPotential<T> {
    pub fn new(v: ScalarField<T>, w: ScalarField<T>) -> Result<Self> {
        if !v.grid.same_as(&w.grid) {
            return Err(Error::GridMismatch);
        }
        for (point, &x) in v.values.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { point, component: 0 });
            }
        }
        for (point, &x) in w.values.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { point, component: 1 });
            }
            if x < T::zero() {
                return Err(Error::NegativeDamping {
                    point,
                    value: x.to_f64_lossy(),
                });
            }
        }
        Ok(Self { v, w })
    }

    pub fn constant(grid: &Grid<T>, v: T, w: T) -> Result<Self> {
        Self::from_fn(grid, |_| (v, w))
    }

    /// `f(x)` returns `(v(x), w(x))`.
    pub fn from_fn(grid: &Grid<T>, f: impl Fn(&[T]) -> (T, T)) -> Result<Self> {
        let d = grid.dim();
        let (vs, ws): (Vec<T>, Vec<T>) = (0..grid.len()).map(|i| f(&grid.point(i)[..d])).unzip();
        Self::new(
            ScalarField {
                grid: grid.clone(),
                values: vs,
            },
            ScalarField {
                grid: grid.clone(),
                values: ws,
            },
        )
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.v.grid
    }

    pub fn v(&self) -> &ScalarField<T> {
        &self.v
    }

    pub fn w(&self) -> &ScalarField<T> {
        &self.w
    }

    fn is_constant(&self) -> bool {
        let first = (self.v.values[0], self.w.values[0]);
        self.v.values.iter().zip(&self.w.values).all(|(&a, &b)| (a, b) == first)
    }
}

/// Per-point block `[[w, -v], [v, w]]`.
pub fn to_real_potential<T: Real>(p: &ComplexScalarPotential<T>) -> Result<PotentialField<T>> {
    let block = |i: usize| {
        let (v, w) = (p.v.values[i], p.w.values[i]);
        vec![w, -v, v, w]
    };
    if p.is_constant() {
        PotentialField::constant(p.grid().clone(), 2, &block(0))
    } else {
        let data = (0..p.grid().len()).flat_map(block).collect();
        PotentialField::from_entries(p.grid().clone(), 2, data)
    }
}

type C2<T> = [[Complex<T>; 2]; 2];

fn mul2<T: Real>(a: &C2<T>, b: &C2<T>) -> C2<T> {
    let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `max_x || P^{-1} (v J + w I) P - diag(i v + w, -i v + w) ||_F` with
/// `P = [[1, 1], [-i, i]]` and `J = [[0, -1], [1, 0]]`.
pub fn similarity_defect<T: Real>(p: &ComplexScalarPotential<T>) -> T {
    let c = |re: f64, im: f64| Complex::new(T::lit(re), T::lit(im));
    let pm: C2<T> = [[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, -1.0), c(0.0, 1.0)]];
    let pinv: C2<T> = [[c(0.5, 0.0), c(0.0, 0.5)], [c(0.5, 0.0), c(0.0, -0.5)]];
    let mut worst = T::zero();
    for (&v, &w) in p.v.values.iter().zip(&p.w.values) {
        let z = Complex::new(T::zero(), T::zero());
        let l: C2<T> = [
            [Complex::new(w, T::zero()), Complex::new(-v, T::zero())],
            [Complex::new(v, T::zero()), Complex::new(w, T::zero())],
        ];
        let m = mul2(&mul2(&pinv, &l), &pm);
        let target: C2<T> = [[Complex::new(w, v), z], [z, Complex::new(w, -v)]];
        let mut s = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                s = s + (m[i][j] - target[i][j]).norm_sqr();
            }
        }
        worst = worst.max(s.sqrt());
    }
    worst
}

/// `(Re g, Im g)` as a two-component field.
pub fn embed<T: Real>(g: &VectorField<T>) -> Result<VectorField<T>> {
    if g.components() != 1 {
        return Err(Error::ComponentMismatch(g.components(), 1));
    }
    let data = g
        .as_slice()
        .iter()
        .flat_map(|z| [Complex::new(z.re, T::zero()), Complex::new(z.im, T::zero())])
        .collect();
    VectorField::new(g.grid().clone(), 2, data)
}

/// `u_0 + i u_1`, the left inverse of [`embed`].
pub fn project<T: Real>(u: &VectorField<T>) -> Result<VectorField<T>> {
    if u.components() != 2 {
        return Err(Error::ComponentMismatch(u.components(), 2));
    }
    let i = Complex::new(T::zero(), T::one());
    let data = u.as_slice().chunks(2).map(|c| c[0] + i * c[1]).collect();
    VectorField::new(u.grid().clone(), 1, data)
}

/// Scalar splitting of `dg/dt = Delta_Q g - (i v + w) g` with the pointwise
/// factor `e^{-tau (i v + w)}` and the same diffusion backend as the vector
/// solver, applied to the single complex component.
pub fn scalar_complex_evolve<T: Real>(
    g0: &VectorField<T>,
    p: &ComplexScalarPotential<T>,
    scheme: &SplitScheme<T>,
    q: &DiffusionTensorField<T>,
) -> Result<VectorField<T>> {
    scheme.validate()?;
    if g0.components() != 1 {
        return Err(Error::ComponentMismatch(g0.components(), 1));
    }
    if !g0.grid().same_as(p.grid()) || !g0.grid().same_as(q.grid()) {
        return Err(Error::GridMismatch);
    }
    let tau = scheme.horizon / from_usize(scheme.steps);
    let factors = |s: T| -> Vec<Complex<T>> {
        p.v.values
            .iter()
            .zip(&p.w.values)
            .map(|(&v, &w)| (Complex::new(w, v) * (-s)).exp())
            .collect()
    };
    let full = factors(tau);
    let half = factors(tau * T::lit(0.5));
    let multiply = |g: &VectorField<T>, f: &[Complex<T>]| -> VectorField<T> {
        let mut out = g.clone();
        for (z, &e) in out.as_mut_slice().iter_mut().zip(f) {
            *z = *z * e;
        }
        out
    };
    let mut spectral = None;
    let mut implicit = None;
    match scheme.backend {
        DiffusionBackend::Spectral => {
            let qc = q.constant_matrix().ok_or(Error::SpectralUnsupported)?;
            spectral = Some(SpectralPropagator::new(q.grid(), qc)?);
        }
        DiffusionBackend::BackwardEuler => implicit = Some((DiscreteOperator::assemble(q)?, ImplicitMethod::BackwardEuler)),
        DiffusionBackend::CrankNicolson => implicit = Some((DiscreteOperator::assemble(q)?, ImplicitMethod::CrankNicolson)),
    }
    let mut diffuse = |g: &VectorField<T>| -> Result<VectorField<T>> {
        match (&mut spectral, &implicit) {
            (Some(sp), _) => sp.step(g, tau),
            (None, Some((op, method))) => implicit_step(g, op, tau, *method, scheme.solver),
            (None, None) => unreachable!("backend prepared above"),
        }
    };
    let mut g = g0.clone();
    for _ in 0..scheme.steps {
        g = match scheme.variant {
            SplitVariant::Lie => diffuse(&multiply(&g, &full))?,
            SplitVariant::Strang => multiply(&diffuse(&multiply(&g, &half))?, &half),
        };
    }
    g.check_finite()?;
    Ok(g)
}
