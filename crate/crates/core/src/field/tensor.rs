use super::grid::Grid;
use crate::error::{Error, Result};
use crate::linalg::sym2_eigenvalues;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
enum Coeffs<T> {
    Constant(Vec<T>),
    PerPoint(Vec<T>),
}

/// Symmetric diffusion matrix `Q(x)` (d x d, row-major) with declared
/// ellipticity bounds `eta1 |xi|^2 <= <Q xi, xi> <= eta2 |xi|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionTensorField<T> {
    grid: Grid<T>,
    coeffs: Coeffs<T>,
    eta1: T,
    eta2: T,
}

impl<T: Real> DiffusionTensorField<T> {
    /// Same matrix at every point.
    pub fn constant(grid: Grid<T>, matrix: &[T], eta1: T, eta2: T) -> Result<Self> {
        let d = grid.dim();
        if matrix.len() != d * d {
            return Err(Error::InvalidParameter(format!(
                "diffusion matrix has {} entries, expected {}",
                matrix.len(),
                d * d
            )));
        }
        let q = Self {
            grid,
            coeffs: Coeffs::Constant(matrix.to_vec()),
            eta1,
            eta2,
        };
        q.check_bounds_declared()?;
        q.check_symmetric()?;
        Ok(q)
    }

    /// `Q = I` with `eta1 = eta2 = 1`.
    pub fn identity(grid: Grid<T>) -> Self {
        let d = grid.dim();
        let mut m = vec![T::zero(); d * d];
        for i in 0..d {
            m[i * d + i] = T::one();
        }
        Self {
            grid,
            coeffs: Coeffs::Constant(m),
            eta1: T::one(),
            eta2: T::one(),
        }
    }

    /// Samples `f(x)`; only the leading `d x d` block of the returned array is used.
    pub fn from_fn<F>(grid: Grid<T>, eta1: T, eta2: T, f: F) -> Result<Self>
    where
        F: Fn(&[T]) -> [[T; 2]; 2],
    {
        let d = grid.dim();
        let mut data = Vec::with_capacity(grid.len() * d * d);
        for idx in 0..grid.len() {
            let x = grid.point(idx);
            let q = f(&x[..d]);
            for row in q.iter().take(d) {
                data.extend_from_slice(&row[..d]);
            }
        }
        let q = Self {
            grid,
            coeffs: Coeffs::PerPoint(data),
            eta1,
            eta2,
        };
        q.check_bounds_declared()?;
        q.check_symmetric()?;
        Ok(q)
    }

    fn check_bounds_declared(&self) -> Result<()> {
        if !(self.eta1 > T::zero() && self.eta2 >= self.eta1 && self.eta2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ellipticity bounds must satisfy 0 < eta1 <= eta2, got {} and {}",
                self.eta1, self.eta2
            )));
        }
        Ok(())
    }

    fn check_symmetric(&self) -> Result<()> {
        let d = self.dim();
        let n = match &self.coeffs {
            Coeffs::Constant(_) => 1,
            Coeffs::PerPoint(_) => self.grid.len(),
        };
        for p in 0..n {
            let q = self.at(p);
            if q.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("non-finite Q at point {p}")));
            }
            for i in 0..d {
                for j in 0..i {
                    if q[i * d + j] != q[j * d + i] {
                        return Err(Error::Asymmetric {
                            point: p,
                            i,
                            j,
                            a: q[i * d + j].to_f64_lossy(),
                            b: q[j * d + i].to_f64_lossy(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn eta1(&self) -> T {
        self.eta1
    }

    pub fn eta2(&self) -> T {
        self.eta2
    }

    /// Row-major `d x d` matrix at a point.
    #[inline]
    pub fn at(&self, point: usize) -> &[T] {
        let dd = self.dim() * self.dim();
        match &self.coeffs {
            Coeffs::Constant(m) => m,
            Coeffs::PerPoint(v) => &v[point * dd..(point + 1) * dd],
        }
    }

    pub fn constant_matrix(&self) -> Option<&[T]> {
        match &self.coeffs {
            Coeffs::Constant(m) => Some(m),
            Coeffs::PerPoint(_) => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.coeffs, Coeffs::Constant(_))
    }

    /// True when every off-diagonal entry vanishes.
    pub fn is_diagonal(&self) -> bool {
        if self.dim() == 1 {
            return true;
        }
        let all = match &self.coeffs {
            Coeffs::Constant(m) => m.as_slice(),
            Coeffs::PerPoint(v) => v.as_slice(),
        };
        all.chunks(4).all(|q| q[1] == T::zero())
    }

    /// `(lambda_min, lambda_max)` of `Q` at a point, closed form.
    pub fn eigen_range(&self, point: usize) -> (T, T) {
        let q = self.at(point);
        match self.dim() {
            1 => (q[0], q[0]),
            _ => sym2_eigenvalues(q[0], q[1], q[3]),
        }
    }

    /// `<Q(x) a, b>` for gradient vectors of length `d`.
    #[inline]
    pub fn form(&self, point: usize, a: &[T], b: &[T]) -> T {
        let q = self.at(point);
        let d = self.dim();
        let mut s = T::zero();
        for i in 0..d {
            for j in 0..d {
                s = s + q[i * d + j] * a[i] * b[j];
            }
        }
        s
    }
}

/// Outcome of [`validate_ellipticity`].
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityReport {
    pub pass: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_min_point: usize,
    pub lambda_max_point: usize,
    /// Largest violation of the declared bounds (<= 0 when everything holds).
    pub worst_violation: f64,
    pub worst_point: usize,
    pub worst_coords: Vec<f64>,
}

/// Checks `eta1 - tol <= lambda_min(Q(x))` and `lambda_max(Q(x)) <= eta2 + tol`
/// at every grid point.
pub fn validate_ellipticity<T: Real>(
    q: &DiffusionTensorField<T>,
    tol: T,
) -> Result<EllipticityReport> {
    q.check_symmetric()?;
    let n = if q.is_constant() { 1 } else { q.grid().len() };
    let (mut lmin, mut lmax) = (T::infinity(), T::neg_infinity());
    let (mut pmin, mut pmax) = (0, 0);
    let mut worst = T::neg_infinity();
    let mut worst_point = 0;
    for p in 0..n {
        let (lo, hi) = q.eigen_range(p);
        if lo < lmin {
            lmin = lo;
            pmin = p;
        }
        if hi > lmax {
            lmax = hi;
            pmax = p;
        }
        let v = (q.eta1() - lo).max(hi - q.eta2());
        if v > worst {
            worst = v;
            worst_point = p;
        }
    }
    let d = q.dim();
    Ok(EllipticityReport {
        pass: worst <= tol,
        lambda_min: lmin.to_f64_lossy(),
        lambda_max: lmax.to_f64_lossy(),
        lambda_min_point: pmin,
        lambda_max_point: pmax,
        worst_violation: worst.to_f64_lossy(),
        worst_point,
        worst_coords: q.grid().point(worst_point)[..d]
            .iter()
            .map(|x| x.to_f64_lossy())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grid::Boundary;

    fn grid2() -> Grid<f64> {
        Grid::new(&[8, 8], &[1.0, 1.0], Boundary::Periodic).unwrap()
    }

    #[test]
    fn identity_passes() {
        let q = DiffusionTensorField::identity(grid2());
        let r = validate_ellipticity(&q, 1e-10).unwrap();
        assert!(r.pass);
        assert_eq!((r.lambda_min, r.lambda_max), (1.0, 1.0));
    }

    #[test]
    fn declared_bound_above_true_minimum_fails() {
        let q = DiffusionTensorField::constant(grid2(), &[2.0, 0.0, 0.0, 1.0], 1.5, 2.0).unwrap();
        let r = validate_ellipticity(&q, 1e-10).unwrap();
        assert!(!r.pass);
        assert_eq!(r.lambda_min, 1.0);
        assert!((r.worst_violation - 0.5).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let err = DiffusionTensorField::constant(grid2(), &[1.0, 0.1, 0.2, 1.0], 0.5, 2.0);
        assert!(matches!(err, Err(Error::Asymmetric { i: 1, j: 0, .. })));
        let err = DiffusionTensorField::from_fn(grid2(), 0.5, 2.0, |x| {
            [[1.0, 0.0], [if x[0] > 0.0 { 0.1 } else { 0.0 }, 1.0]]
        });
        assert!(matches!(err, Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn bad_declared_bounds_rejected() {
        assert!(DiffusionTensorField::constant(grid2(), &[1.0, 0.0, 0.0, 1.0], 0.0, 1.0).is_err());
        assert!(DiffusionTensorField::constant(grid2(), &[1.0, 0.0, 0.0, 1.0], 2.0, 1.0).is_err());
    }

    #[test]
    fn sine_modulated_extremes_match_grid_samples() {
        // Q(x) = (1 + sin(x)/2) I on a grid containing x = -pi/2 and pi/2.
        let pi = std::f64::consts::PI;
        let g = Grid::periodic_1d(64, pi).unwrap();
        let q = DiffusionTensorField::from_fn(g.clone(), 0.5, 1.5, |x| {
            [[1.0 + 0.5 * x[0].sin(), 0.0], [0.0, 0.0]]
        })
        .unwrap();
        let r = validate_ellipticity(&q, 1e-10).unwrap();
        assert!(r.pass);
        // Oracle: direct evaluation of the sine extremes over the grid nodes.
        let samples: Vec<f64> = (0..64).map(|i| 1.0 + 0.5 * g.coordinate(0, i).sin()).collect();
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((r.lambda_min - lo).abs() <= 1e-12 && (lo - 0.5).abs() <= 1e-12);
        assert!((r.lambda_max - hi).abs() <= 1e-12 && (hi - 1.5).abs() <= 1e-12);
    }

    #[test]
    fn diagonal_detection() {
        assert!(DiffusionTensorField::identity(grid2()).is_diagonal());
        let q = DiffusionTensorField::constant(grid2(), &[2.0, 0.5, 0.5, 1.0], 0.5, 3.0).unwrap();
        assert!(!q.is_diagonal());
    }
}
