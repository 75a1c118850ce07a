use num_complex::Complex;
use rayon::prelude::*;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum_by, Real};

/// Largest supported component count.
pub const MAX_COMPONENTS: usize = 8;

/// State `u = (u_1, ..., u_m)`: one complex m-vector per grid point,
/// stored point-major (`data[point * m + j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    grid: Grid<T>,
    m: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn new(grid: Grid<T>, m: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if !(1..=MAX_COMPONENTS).contains(&m) {
            return Err(Error::BadComponentCount(m));
        }
        if data.len() != grid.len() * m {
            return Err(Error::LengthMismatch {
                actual: data.len(),
                points: grid.len(),
                components: m,
            });
        }
        let f = Self { grid, m, data };
        f.check_finite()?;
        Ok(f)
    }

    pub fn zeros(grid: Grid<T>, m: usize) -> Result<Self> {
        let n = grid.len() * m;
        Self::new(grid, m, vec![Complex::new(T::zero(), T::zero()); n])
    }

    /// Samples `f(x, j)` for every point `x` and component `j`.
    pub fn from_fn<F>(grid: Grid<T>, m: usize, f: F) -> Result<Self>
    where
        F: Fn(&[T], usize) -> Complex<T>,
    {
        let d = grid.dim();
        let mut data = Vec::with_capacity(grid.len() * m);
        for idx in 0..grid.len() {
            let x = grid.point(idx);
            for j in 0..m {
                data.push(f(&x[..d], j));
            }
        }
        Self::new(grid, m, data)
    }

    /// Builds a field from per-component real samples.
    pub fn from_real_components(grid: Grid<T>, components: &[Vec<T>]) -> Result<Self> {
        let m = components.len();
        let n = grid.len();
        if let Some(bad) = components.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch {
                actual: bad.len(),
                points: n,
                components: 1,
            });
        }
        let mut data = Vec::with_capacity(n * m);
        for p in 0..n {
            for c in components {
                data.push(Complex::new(c[p], T::zero()));
            }
        }
        Self::new(grid, m, data)
    }

    /// Skips the finiteness scan; callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(grid: Grid<T>, m: usize, data: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(data.len(), grid.len() * m);
        Self { grid, m, data }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    /// The m-vector stored at a point.
    #[inline]
    pub fn at(&self, point: usize) -> &[Complex<T>] {
        &self.data[point * self.m..(point + 1) * self.m]
    }

    /// Copy of component `j` as a contiguous array over the grid.
    pub fn component(&self, j: usize) -> Vec<Complex<T>> {
        self.data.iter().skip(j).step_by(self.m).copied().collect()
    }

    pub fn set_component(&mut self, j: usize, values: &[Complex<T>]) {
        assert_eq!(values.len(), self.grid.len());
        for (slot, &v) in self.data.iter_mut().skip(j).step_by(self.m).zip(values) {
            *slot = v;
        }
    }

    /// First non-finite entry as an error.
    pub fn check_finite(&self) -> Result<()> {
        match self
            .data
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            Some(i) => Err(Error::NonFinite {
                point: i / self.m,
                component: i % self.m,
            }),
            None => Ok(()),
        }
    }

    pub fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.m != other.m {
            return Err(Error::ComponentMismatch(self.m, other.m));
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let data = self.data.iter().map(|&z| z * c).collect();
        Self::from_parts_unchecked(self.grid.clone(), self.m, data)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(Self::from_parts_unchecked(self.grid.clone(), self.m, data))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Ok(Self::from_parts_unchecked(self.grid.clone(), self.m, data))
    }

    /// `|u|(x)` at every point.
    pub fn pointwise_abs(&self) -> ScalarField<T> {
        let m = self.m;
        let values = self
            .data
            .par_chunks(m)
            .map(|v| euclidean_norm(v))
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn lp_norm(&self, spec: NormSpec<T>) -> Result<T> {
        lp_norm(self, spec)
    }
}

/// Euclidean norm of a complex vector, `sqrt(sum_j |z_j|^2)` in component order.
#[inline]
pub fn euclidean_norm<T: Real>(v: &[Complex<T>]) -> T {
    let mut s = T::zero();
    for z in v {
        s = s + (z.re * z.re + z.im * z.im);
    }
    s.sqrt()
}

/// Real scalar samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    pub grid: Grid<T>,
    pub values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn from_fn<F: Fn(&[T]) -> T>(grid: Grid<T>, f: F) -> Self {
        let d = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.point(i)[..d])).collect();
        Self { grid, values }
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |a, &b| a.max(b))
    }

    pub fn min(&self) -> T {
        self.values.iter().fold(T::infinity(), |a, &b| a.min(b))
    }

    /// Lifts to a one-component vector field.
    pub fn to_vector_field(&self) -> VectorField<T> {
        let data = self
            .values
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        VectorField::from_parts_unchecked(self.grid.clone(), 1, data)
    }

    /// `(sum w |f|^p)^(1/p)` with the same conventions as [`lp_norm`].
    pub fn lp_norm(&self, spec: NormSpec<T>) -> T {
        weighted_norm(&self.values, self.grid.cell_volume(), spec)
    }
}

/// Exponent of an `L^p` norm, `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec<T> {
    p: T,
}

impl<T: Real> NormSpec<T> {
    pub fn new(p: T) -> Result<Self> {
        if p.is_nan() || p < T::one() {
            return Err(Error::BadExponent(p.to_f64_lossy()));
        }
        Ok(Self { p })
    }

    pub fn infinity() -> Self {
        Self { p: T::infinity() }
    }

    pub fn two() -> Self {
        Self { p: T::lit(2.0) }
    }

    pub fn exponent(&self) -> T {
        self.p
    }

    pub fn is_infinite(&self) -> bool {
        self.p.is_infinite()
    }
}

/// `||u||_p = (sum_x |u(x)|^p prod_k h_k)^(1/p)`, or `max_x |u(x)|` for `p = inf`.
///
/// `|u(x)|` is the Euclidean norm over components. Summation uses the fixed
/// pairwise tree of [`pairwise_sum_by`].
pub fn lp_norm<T: Real>(u: &VectorField<T>, spec: NormSpec<T>) -> Result<T> {
    u.check_finite()?;
    let abs = u.pointwise_abs();
    Ok(weighted_norm(&abs.values, u.grid().cell_volume(), spec))
}

pub(crate) fn weighted_norm<T: Real>(abs: &[T], weight: T, spec: NormSpec<T>) -> T {
    let max = abs.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if spec.is_infinite() || max == T::zero() {
        return max;
    }
    let p = spec.exponent();
    if p == T::lit(2.0) {
        let s = pairwise_sum_by(abs.len(), |i| {
            let r = abs[i] / max;
            r * r
        });
        return max * (s * weight).sqrt();
    }
    let s = pairwise_sum_by(abs.len(), |i| (abs[i].abs() / max).powf(p));
    max * (s * weight).powf(T::one() / p)
}
