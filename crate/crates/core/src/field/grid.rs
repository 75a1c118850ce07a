use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};

/// Default cap on the number of grid points.
pub const DEFAULT_POINT_BUDGET: usize = 1 << 22;

/// Boundary treatment on the truncated box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    /// Homogeneous Dirichlet: values outside the box are zero.
    Dirichlet,
}

impl Boundary {
    pub fn tag(self) -> u8 {
        match self {
            Boundary::Periodic => 0,
            Boundary::Dirichlet => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Boundary::Periodic),
            1 => Some(Boundary::Dirichlet),
            _ => None,
        }
    }
}

/// Rectangular tensor grid on `[-L_1, L_1] x ... x [-L_d, L_d]`, `d` in {1, 2}.
///
/// Axis `k` has `n_k` points at `x_i = -L_k + i h_k`, `h_k = 2 L_k / n_k`.
/// Flat indices are row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    counts: Vec<usize>,
    half_extents: Vec<T>,
    boundary: Boundary,
}

impl<T: Real> Grid<T> {
    pub fn new(counts: &[usize], half_extents: &[T], boundary: Boundary) -> Result<Self> {
        Self::with_budget(counts, half_extents, boundary, DEFAULT_POINT_BUDGET)
    }

    pub fn with_budget(
        counts: &[usize],
        half_extents: &[T],
        boundary: Boundary,
        budget: usize,
    ) -> Result<Self> {
        let d = counts.len();
        if !(1..=2).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension {d} not in 1..=2")));
        }
        if half_extents.len() != d {
            return Err(Error::InvalidGrid(format!(
                "{} half-extents for {d} axes",
                half_extents.len()
            )));
        }
        for (k, (&n, &l)) in counts.iter().zip(half_extents).enumerate() {
            if n < 8 {
                return Err(Error::InvalidGrid(format!("axis {k}: {n} points, need >= 8")));
            }
            if boundary == Boundary::Periodic && !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: periodic grids need a power-of-two count, got {n}"
                )));
            }
            if !(l.is_finite() && l > T::zero()) {
                return Err(Error::InvalidGrid(format!("axis {k}: half-extent {l} must be positive")));
            }
        }
        let points = counts
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .unwrap_or(usize::MAX);
        if points > budget {
            return Err(Error::GridTooLarge { points, budget });
        }
        Ok(Self {
            counts: counts.to_vec(),
            half_extents: half_extents.to_vec(),
            boundary,
        })
    }

    /// 1-d periodic grid, the common case in tests.
    pub fn periodic_1d(n: usize, half_extent: T) -> Result<Self> {
        Self::new(&[n], &[half_extent], Boundary::Periodic)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn half_extents(&self) -> &[T] {
        &self.half_extents
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    /// Total number of points.
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> T {
        T::lit(2.0) * self.half_extents[axis] / from_usize(self.counts[axis])
    }

    pub fn spacings(&self) -> Vec<T> {
        (0..self.dim()).map(|k| self.spacing(k)).collect()
    }

    /// Quadrature weight `prod_k h_k`.
    pub fn cell_volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |acc, k| acc * self.spacing(k))
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> T {
        -self.half_extents[axis] + from_usize::<T>(i) * self.spacing(axis)
    }

    /// Splits a flat index into per-axis indices (unused axes are 0).
    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.counts.len() == 1 {
            [idx, 0]
        } else {
            [idx / self.counts[1], idx % self.counts[1]]
        }
    }

    #[inline]
    pub fn flat_index(&self, mi: [usize; 2]) -> usize {
        if self.counts.len() == 1 {
            mi[0]
        } else {
            mi[0] * self.counts[1] + mi[1]
        }
    }

    /// Physical coordinates of a point; unused axes are 0.
    pub fn point(&self, idx: usize) -> [T; 2] {
        let mi = self.multi_index(idx);
        let mut x = [T::zero(); 2];
        for (k, xk) in x.iter_mut().enumerate().take(self.dim()) {
            *xk = self.coordinate(k, mi[k]);
        }
        x
    }

    /// Neighbour of `idx` shifted by `offset` along `axis`, or `None` when it
    /// falls outside a Dirichlet box.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> Option<usize> {
        let mut mi = self.multi_index(idx);
        let n = self.counts[axis] as isize;
        let j = mi[axis] as isize + offset;
        let j = match self.boundary {
            Boundary::Periodic => j.rem_euclid(n),
            Boundary::Dirichlet => {
                if j < 0 || j >= n {
                    return None;
                }
                j
            }
        };
        mi[axis] = j as usize;
        Some(self.flat_index(mi))
    }

    /// True when `other` describes the same discretisation.
    pub fn same_as(&self, other: &Self) -> bool {
        self == other
    }

    /// Same axes with every count doubled and the same box.
    pub fn refined(&self) -> Result<Self> {
        let counts: Vec<usize> = self.counts.iter().map(|n| n * 2).collect();
        Self::new(&counts, &self.half_extents, self.boundary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_non_power_of_two() {
        assert!(Grid::<f64>::periodic_1d(4, 1.0).is_err());
        assert!(Grid::<f64>::periodic_1d(12, 1.0).is_err());
        assert!(Grid::<f64>::new(&[12], &[1.0], Boundary::Dirichlet).is_ok());
        assert!(Grid::<f64>::periodic_1d(16, 0.0).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let err = Grid::<f64>::with_budget(&[64, 64], &[1.0, 1.0], Boundary::Periodic, 1000);
        assert_eq!(
            err.unwrap_err(),
            Error::GridTooLarge {
                points: 4096,
                budget: 1000
            }
        );
    }

    #[test]
    fn spacing_and_coordinates() {
        let g = Grid::<f64>::periodic_1d(8, 2.0).unwrap();
        assert_eq!(g.spacing(0), 0.5);
        assert_eq!(g.coordinate(0, 0), -2.0);
        assert_eq!(g.coordinate(0, 4), 0.0);
        assert_eq!(g.cell_volume(), 0.5);
    }

    #[test]
    fn neighbours_wrap_or_vanish() {
        let p = Grid::<f64>::new(&[8, 16], &[1.0, 1.0], Boundary::Periodic).unwrap();
        assert_eq!(p.neighbor(0, 0, -1), Some(7 * 16));
        assert_eq!(p.neighbor(0, 1, -1), Some(15));
        let d = Grid::<f64>::new(&[8, 16], &[1.0, 1.0], Boundary::Dirichlet).unwrap();
        assert_eq!(d.neighbor(0, 1, -1), None);
        assert_eq!(d.neighbor(17, 1, 1), Some(18));
    }

    #[test]
    fn multi_index_roundtrip() {
        let g = Grid::<f64>::new(&[8, 16], &[1.0, 3.0], Boundary::Periodic).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.flat_index(g.multi_index(idx)), idx);
        }
    }
}
