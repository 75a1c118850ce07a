use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::linalg::{sym_min_eigenvalue, Mat};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
enum Entries<T> {
    Constant(Vec<T>),
    PerPoint(Vec<T>),
}

/// Real matrix potential `V(x)` (m x m, row-major per point).
///
/// Accretivity is not a construction invariant; see [`validate_accretivity`].
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField<T> {
    grid: Grid<T>,
    m: usize,
    entries: Entries<T>,
    preset: Option<String>,
    fingerprint: u64,
}

impl<T: Real> PotentialField<T> {
    pub fn constant(grid: Grid<T>, m: usize, matrix: &[T]) -> Result<Self> {
        if matrix.len() != m * m {
            return Err(Error::InvalidParameter(format!(
                "potential matrix has {} entries, expected {}",
                matrix.len(),
                m * m
            )));
        }
        Self::build(grid, m, Entries::Constant(matrix.to_vec()))
    }

    pub fn zero(grid: Grid<T>, m: usize) -> Result<Self> {
        Self::constant(grid, m, &vec![T::zero(); m * m])
    }

    /// Per-point row-major matrices, `data[point * m * m ..]`.
    pub fn from_entries(grid: Grid<T>, m: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() * m * m {
            return Err(Error::LengthMismatch {
                actual: data.len(),
                points: grid.len(),
                components: m * m,
            });
        }
        Self::build(grid, m, Entries::PerPoint(data))
    }

    /// Samples `f(x)`, which must return `m * m` row-major entries.
    pub fn from_fn<F>(grid: Grid<T>, m: usize, f: F) -> Result<Self>
    where
        F: Fn(&[T]) -> Vec<T>,
    {
        let d = grid.dim();
        let mut data = Vec::with_capacity(grid.len() * m * m);
        for idx in 0..grid.len() {
            let x = grid.point(idx);
            let v = f(&x[..d]);
            if v.len() != m * m {
                return Err(Error::InvalidParameter(format!(
                    "potential sampler returned {} entries at point {idx}, expected {}",
                    v.len(),
                    m * m
                )));
            }
            data.extend(v);
        }
        Self::build(grid, m, Entries::PerPoint(data))
    }

    /// Same grid and values with one point's matrix replaced.
    pub fn with_point_override(&self, point: usize, matrix: &[T]) -> Result<Self> {
        if point >= self.grid.len() || matrix.len() != self.m * self.m {
            return Err(Error::InvalidParameter(format!(
                "override at point {point} out of range or wrong size"
            )));
        }
        let mm = self.m * self.m;
        let mut data = Vec::with_capacity(self.grid.len() * mm);
        for p in 0..self.grid.len() {
            if p == point {
                data.extend_from_slice(matrix);
            } else {
                data.extend_from_slice(self.at(p));
            }
        }
        let mut out = Self::build(self.grid.clone(), self.m, Entries::PerPoint(data))?;
        out.preset = self.preset.clone();
        Ok(out)
    }

    fn build(grid: Grid<T>, m: usize, entries: Entries<T>) -> Result<Self> {
        if !(1..=super::vector::MAX_COMPONENTS).contains(&m) {
            return Err(Error::BadComponentCount(m));
        }
        let all = match &entries {
            Entries::Constant(v) | Entries::PerPoint(v) => v,
        };
        if let Some(i) = all.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                point: i / (m * m),
                component: i % (m * m),
            });
        }
        let mut h = std::collections::hash_map::DefaultHasher::new();
        m.hash(&mut h);
        grid.counts().hash(&mut h);
        matches!(entries, Entries::Constant(_)).hash(&mut h);
        for v in all {
            v.to_f64_lossy().to_bits().hash(&mut h);
        }
        Ok(Self {
            grid,
            m,
            entries,
            preset: None,
            fingerprint: h.finish(),
        })
    }

    pub fn with_preset(mut self, name: impl Into<String>) -> Self {
        self.preset = Some(name.into());
        self
    }

    pub fn preset(&self) -> Option<&str> {
        self.preset.as_deref()
    }

    /// Content hash identifying the potential in caches.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.entries, Entries::Constant(_))
    }

    /// Row-major matrix at a point.
    #[inline]
    pub fn at(&self, point: usize) -> &[T] {
        let mm = self.m * self.m;
        match &self.entries {
            Entries::Constant(v) => v,
            Entries::PerPoint(v) => &v[point * mm..(point + 1) * mm],
        }
    }

    pub fn matrix_at(&self, point: usize) -> Mat<T> {
        Mat::from_row_major(self.m, self.at(point).to_vec())
    }

    /// Number of distinct matrices stored (1 when constant).
    pub fn distinct_points(&self) -> usize {
        if self.is_constant() {
            1
        } else {
            self.grid.len()
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.distinct_points()).all(|p| self.matrix_at(p).is_symmetric())
    }

    pub fn scaled(&self, c: T) -> Self {
        let entries = match &self.entries {
            Entries::Constant(v) => Entries::Constant(v.iter().map(|&x| x * c).collect()),
            Entries::PerPoint(v) => Entries::PerPoint(v.iter().map(|&x| x * c).collect()),
        };
        let mut out = Self::build(self.grid.clone(), self.m, entries).expect("scaling keeps entries finite");
        out.preset = self.preset.clone();
        out
    }

    /// Pointwise sum with another potential on the same grid.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.m != other.m {
            return Err(Error::ComponentMismatch(self.m, other.m));
        }
        if self.is_constant() && other.is_constant() {
            let v: Vec<T> = self.at(0).iter().zip(other.at(0)).map(|(&a, &b)| a + b).collect();
            return Self::constant(self.grid.clone(), self.m, &v);
        }
        let mm = self.m * self.m;
        let mut data = Vec::with_capacity(self.grid.len() * mm);
        for p in 0..self.grid.len() {
            data.extend(self.at(p).iter().zip(other.at(p)).map(|(&a, &b)| a + b));
        }
        Self::build(self.grid.clone(), self.m, Entries::PerPoint(data))
    }
}

/// Outcome of [`validate_accretivity`].
#[derive(Debug, Clone, PartialEq)]
pub struct AccretivityReport {
    pub pass: bool,
    /// Minimum over the grid of `lambda_min((V + V^T)/2)`.
    pub min_eigenvalue: f64,
    pub point: usize,
    pub coords: Vec<f64>,
}

/// `Re <V(x) xi, xi> >= 0` for all complex `xi`.
///
/// With `xi = a + ib` and `S = (V + V^T)/2`, `Re <V xi, xi> = <S a, a> + <S b, b>`,
/// so the condition is `lambda_min(S(x)) >= -tol` at every point.
pub fn validate_accretivity<T: Real>(v: &PotentialField<T>, tol: T) -> AccretivityReport {
    let mut min = T::infinity();
    let mut at = 0;
    for p in 0..v.distinct_points() {
        let lam = sym_min_eigenvalue(&v.matrix_at(p).symmetric_part());
        if lam < min {
            min = lam;
            at = p;
        }
    }
    let d = v.grid().dim();
    AccretivityReport {
        pass: min >= -tol,
        min_eigenvalue: min.to_f64_lossy(),
        point: at,
        coords: v.grid().point(at)[..d].iter().map(|x| x.to_f64_lossy()).collect(),
    }
}

/// Tolerance used when [`estimate_sector_constant`] checks its precondition.
pub const SECTOR_ACCRETIVITY_TOL: f64 = 1e-10;

/// Largest `C` with `Re <V xi, xi> >= C |Im <V xi, xi>|` for every point and `xi`.
///
/// For real `V` and `xi = a + ib`, `Im <V xi, xi> = a^T (V - V^T) b`.
/// For m = 2 the pointwise constant has the closed form
/// `sqrt(det S) / |a|` with `S` the symmetric part and `a = (V_21 - V_12)/2`.
/// For m > 2 the ratio is minimised over `samples` random `(a, b)` pairs, which
/// over-estimates the true infimum by an amount that shrinks with `samples`.
/// Returns `+inf` when `V` is symmetric everywhere.
pub fn estimate_sector_constant<T: Real>(
    v: &PotentialField<T>,
    samples: usize,
    seed: u64,
) -> Result<T> {
    let report = validate_accretivity(v, T::lit(SECTOR_ACCRETIVITY_TOL));
    if !report.pass {
        return Err(Error::NotAccretive {
            point: report.point,
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    let m = v.components();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = T::infinity();
    for p in 0..v.distinct_points() {
        let mat = v.matrix_at(p);
        let c = match m {
            1 => T::infinity(),
            2 => sector_constant_2x2(&mat),
            _ => sampled_sector_constant(&mat, samples, &mut rng),
        };
        best = best.min(c);
    }
    Ok(best.max(T::zero()))
}

fn sector_constant_2x2<T: Real>(v: &Mat<T>) -> T {
    let half = T::lit(0.5);
    let a = (v[(1, 0)] - v[(0, 1)]) * half;
    if a == T::zero() {
        return T::infinity();
    }
    let s01 = (v[(0, 1)] + v[(1, 0)]) * half;
    let det = v[(0, 0)] * v[(1, 1)] - s01 * s01;
    det.max(T::zero()).sqrt() / a.abs()
}

/// `(Re <V xi, xi>, Im <V xi, xi>)` for `xi = a + ib`.
pub fn numerical_range_point<T: Real>(v: &Mat<T>, a: &[T], b: &[T]) -> (T, T) {
    let m = v.dim();
    let mut re = T::zero();
    let mut im = T::zero();
    for i in 0..m {
        for j in 0..m {
            let vij = v[(i, j)];
            re = re + vij * (a[i] * a[j] + b[i] * b[j]);
            im = im + (vij - v[(j, i)]) * a[i] * b[j];
        }
    }
    (re, im)
}

fn sampled_sector_constant<T: Real>(v: &Mat<T>, samples: usize, rng: &mut ChaCha8Rng) -> T {
    let m = v.dim();
    if v.antisymmetric_part().max_abs() == T::zero() {
        return T::infinity();
    }
    let mut best = T::infinity();
    let mut a = vec![T::zero(); m];
    let mut b = vec![T::zero(); m];
    for _ in 0..samples {
        for k in 0..m {
            a[k] = T::lit(rng.gen_range(-1.0..1.0));
            b[k] = T::lit(rng.gen_range(-1.0..1.0));
        }
        let (re, im) = numerical_range_point(v, &a, &b);
        if im != T::zero() {
            best = best.min(re / im.abs());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grid::Boundary;

    fn grid() -> Grid<f64> {
        Grid::periodic_1d(16, 2.0).unwrap()
    }

    fn rotation(v: f64, w: f64) -> Vec<f64> {
        vec![w, -v, v, w]
    }

    #[test]
    fn antisymmetric_rotation_is_accretive_with_zero_min() {
        let v = PotentialField::constant(grid(), 2, &rotation(1.0, 0.0)).unwrap();
        let r = validate_accretivity(&v, 1e-10);
        assert!(r.pass);
        assert_eq!(r.min_eigenvalue, 0.0);
    }

    #[test]
    fn single_negative_damping_point_fails_there() {
        let g = Grid::new(&[32], &[4.0], Boundary::Dirichlet).unwrap();
        let v = PotentialField::from_fn(g.clone(), 2, |_| rotation(1.0, 0.5)).unwrap();
        assert!(validate_accretivity(&v, 1e-10).pass);
        let bad = v.with_point_override(11, &rotation(1.0, -1.0)).unwrap();
        let r = validate_accretivity(&bad, 1e-10);
        assert!(!r.pass);
        assert_eq!(r.point, 11);
        assert_eq!(r.min_eigenvalue, -1.0);
        assert_eq!(r.coords, vec![g.coordinate(0, 11)]);
    }

    #[test]
    fn sector_constant_of_rotation_block() {
        let v = PotentialField::constant(grid(), 2, &rotation(1.0, 2.0)).unwrap();
        let c = estimate_sector_constant(&v, 0, 0).unwrap();
        assert!((c - 2.0).abs() <= 1e-10);
        let sym = PotentialField::constant(grid(), 2, &rotation(0.0, 2.0)).unwrap();
        assert_eq!(estimate_sector_constant(&sym, 0, 0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn sector_constant_rejects_non_accretive() {
        let v = PotentialField::constant(grid(), 2, &rotation(1.0, -0.1)).unwrap();
        assert!(matches!(
            estimate_sector_constant(&v, 100, 0),
            Err(Error::NotAccretive { .. })
        ));
    }

    #[test]
    fn sector_constant_zero_for_pure_rotation() {
        let v = PotentialField::constant(grid(), 2, &rotation(1.0, 0.0)).unwrap();
        assert_eq!(estimate_sector_constant(&v, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_entries_rejected() {
        let err = PotentialField::constant(grid(), 2, &[0.0, f64::NAN, 0.0, 0.0]);
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = PotentialField::constant(grid(), 2, &rotation(1.0, 2.0)).unwrap();
        let b = PotentialField::constant(grid(), 2, &rotation(1.0, 2.0)).unwrap();
        let c = PotentialField::constant(grid(), 2, &rotation(1.0, 2.5)).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
