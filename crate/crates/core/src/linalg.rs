//! Small dense square matrices (m <= 8) used for per-point potentials.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Wraps a row-major buffer. Panics if the length is not a square.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "buffer is not {n}x{n}");
        Self { n, data }
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        debug_assert_eq!(n, other.n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> T {
        (0..self.n)
            .map(|j| {
                (0..self.n)
                    .map(|i| self[(i, j)].abs())
                    .fold(T::zero(), |a, b| a + b)
            })
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// `(A + A^T) / 2`, symmetric bit-exactly.
    pub fn symmetric_part(&self) -> Self {
        let mut s = Self::zeros(self.n);
        let half = T::lit(0.5);
        for i in 0..self.n {
            for j in 0..=i {
                let v = (self[(i, j)] + self[(j, i)]) * half;
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    /// `(A - A^T) / 2`.
    pub fn antisymmetric_part(&self) -> Self {
        let mut s = Self::zeros(self.n);
        let half = T::lit(0.5);
        for i in 0..self.n {
            for j in 0..i {
                let v = (self[(i, j)] - self[(j, i)]) * half;
                s[(i, j)] = v;
                s[(j, i)] = -v;
            }
        }
        s
    }

    /// Solves `self * X = rhs` by Gaussian elimination with partial pivoting.
    /// Returns `None` for a numerically singular system.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].abs();
            for r in col + 1..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return None;
            }
            if piv != col {
                for k in 0..n {
                    a.swap(col * n + k, piv * n + k);
                    b.swap(col * n + k, piv * n + k);
                }
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f == T::zero() {
                    continue;
                }
                for k in col..n {
                    a[r * n + k] = a[r * n + k] - f * a[col * n + k];
                }
                for k in 0..n {
                    b[r * n + k] = b[r * n + k] - f * b[col * n + k];
                }
            }
        }
        for col in (0..n).rev() {
            let d = a[col * n + col];
            for k in 0..n {
                let mut s = b[col * n + k];
                for j in col + 1..n {
                    s = s - a[col * n + j] * b[j * n + k];
                }
                b[col * n + k] = s / d;
            }
        }
        Some(Self { n, data: b })
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues (ascending) and the orthogonal matrix whose columns are
/// the matching eigenvectors. Only the lower triangle of `a` is trusted.
pub fn sym_eigen<T: Real>(a: &Mat<T>) -> (Vec<T>, Mat<T>) {
    let n = a.dim();
    let mut m = a.symmetric_part();
    let mut v = Mat::identity(n);
    let tiny = T::EPS * T::EPS;
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..i {
                off = off + m[(i, j)] * m[(i, j)];
            }
        }
        let scale: T = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum::<T>() + off;
        if off <= tiny * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vecs = Mat::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = v[(k, old)];
        }
    }
    (vals, vecs)
}

/// Smallest eigenvalue of a symmetric matrix, closed form for n <= 2.
pub fn sym_min_eigenvalue<T: Real>(a: &Mat<T>) -> T {
    match a.dim() {
        1 => a[(0, 0)],
        2 => sym2_eigenvalues(a[(0, 0)], a[(1, 0)], a[(1, 1)]).0,
        _ => sym_eigen(a).0[0],
    }
}

/// Eigenvalues `(min, max)` of the symmetric 2x2 matrix `[[a, b], [b, c]]`.
pub fn sym2_eigenvalues<T: Real>(a: T, b: T, c: T) -> (T, T) {
    let half = T::lit(0.5);
    let mean = (a + c) * half;
    let r = ((a - c) * half).hypot(b);
    (mean - r, mean + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solve_recovers_identity() {
        let a = Mat::from_row_major(3, vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let inv = a.solve(&Mat::identity(3)).unwrap();
        let prod = a.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(prod[(i, j)], e, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn singular_solve_is_none() {
        let a = Mat::from_row_major(2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(a.solve(&Mat::identity(2)).is_none());
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let a = Mat::from_row_major(
            4,
            vec![
                2.0, -1.0, 0.3, 0.0, -1.0, 2.0, -1.0, 0.1, 0.3, -1.0, 2.0, -1.0, 0.0, 0.1, -1.0, 2.0,
            ],
        );
        let (vals, vecs) = sym_eigen(&a);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let recon = vecs.matmul(&Mat::from_diag(&vals)).matmul(&vecs.transpose());
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(recon[(i, j)], a[(i, j)], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn closed_form_2x2_matches_jacobi() {
        let a = Mat::from_row_major(2, vec![3.0, 0.7, 0.7, -1.0]);
        let (lo, hi) = sym2_eigenvalues(3.0, 0.7, -1.0);
        let (vals, _) = sym_eigen(&a);
        assert_relative_eq!(lo, vals[0], epsilon = 1e-14);
        assert_relative_eq!(hi, vals[1], epsilon = 1e-14);
    }
}
