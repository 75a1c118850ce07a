//! Potential factor of the splitting: pointwise multiplication by `e^{-tau V(x)}`.
//!
//! The exponential uses scaling and squaring with the diagonal [13/13] Padé
//! approximant; symmetric inputs go through a Jacobi eigen-decomposition
//! instead. When `V` is accretive the resulting factor is a pointwise
//! contraction, `|e^{-tau V(x)} f(x)| <= |f(x)|`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{PotentialField, VectorField};
use crate::linalg::{sym_eigen, Mat};
use crate::scalar::Real;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm up to which [13/13] Padé needs no scaling in double precision.
const THETA_13: f64 = 5.371920351148152;

/// Largest admissible `||tau M||_1`; beyond it intermediate powers may overflow.
pub fn expm_norm_limit<T: Real>() -> T {
    T::lit(0.7) * T::max_value().ln()
}

/// `e^{-tau M}` for a real square matrix.
///
/// The result is real even when `M` has complex eigenvalues.
pub fn expm_neg<T: Real>(m: &Mat<T>, tau: T) -> Result<Mat<T>> {
    if !(tau >= T::zero() && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("step tau = {tau} must be finite and >= 0")));
    }
    if !m.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let a = m.scale(-tau);
    let norm = a.norm1();
    let limit = expm_norm_limit::<T>();
    if norm > limit {
        return Err(Error::ExpmOverflow {
            norm: norm.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    if norm == T::zero() {
        return Ok(Mat::identity(m.dim()));
    }
    if m.is_symmetric() {
        return Ok(expm_symmetric(&a));
    }
    Ok(expm_pade13(&a))
}

/// `e^{A}` for symmetric `A` via eigen-decomposition.
fn expm_symmetric<T: Real>(a: &Mat<T>) -> Mat<T> {
    let n = a.dim();
    if n == 1 {
        return Mat::from_row_major(1, vec![a[(0, 0)].exp()]);
    }
    let (vals, vecs) = sym_eigen(a);
    let mut out = Mat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = T::zero();
            for (k, &lam) in vals.iter().enumerate() {
                s = s + vecs[(i, k)] * lam.exp() * vecs[(j, k)];
            }
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}

/// `e^{A}` by scaling and squaring with the [13/13] Padé approximant.
fn expm_pade13<T: Real>(a: &Mat<T>) -> Mat<T> {
    let n = a.dim();
    let norm = a.norm1();
    let ratio = norm / T::lit(THETA_13);
    let s: i32 = if ratio > T::one() {
        ratio.log2().ceil().to_i32().unwrap_or(0).max(0)
    } else {
        0
    };
    let a = a.scale(T::lit(2f64.powi(-s)));
    let b: Vec<T> = PADE13.iter().map(|&c| T::lit(c)).collect();
    let id = Mat::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let lin = |c6: T, c4: T, c2: T| a6.scale(c6).add(&a4.scale(c4)).add(&a2.scale(c2));
    let inner_u = a6.matmul(&lin(b[13], b[11], b[9])).add(&lin(b[7], b[5], b[3])).add(&id.scale(b[1]));
    let u = a.matmul(&inner_u);
    let v = a6.matmul(&lin(b[12], b[10], b[8])).add(&lin(b[6], b[4], b[2])).add(&id.scale(b[0]));

    let p = v.add(&u);
    let q = v.sub(&u);
    let mut r = q
        .solve(&p)
        .expect("Padé denominator is nonsingular for ||A|| <= theta_13");
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r
}

/// Per-point table of `e^{-tau V(x)}` keyed by `(potential fingerprint, tau)`.
///
/// A constant potential stores a single matrix.
#[derive(Debug, Clone, Default)]
pub struct ExpCache<T> {
    key: Option<(u64, T)>,
    matrices: Vec<T>,
}

impl<T: Real> ExpCache<T> {
    pub fn new() -> Self {
        Self {
            key: None,
            matrices: Vec::new(),
        }
    }

    /// Row-major exponentials for every distinct point of `v`, recomputed
    /// when the potential or the step changes.
    pub fn table(&mut self, v: &PotentialField<T>, tau: T) -> Result<&[T]> {
        let key = (v.fingerprint(), tau);
        if self.key != Some(key) {
            self.key = None;
            self.matrices = exponential_table(v, tau)?;
            self.key = Some(key);
        }
        Ok(&self.matrices)
    }

    pub fn is_cached(&self, v: &PotentialField<T>, tau: T) -> bool {
        self.key == Some((v.fingerprint(), tau))
    }

    /// `u'(x) = e^{-tau V(x)} u(x)` using (and filling) the cache.
    pub fn apply(&mut self, u: &VectorField<T>, v: &PotentialField<T>, tau: T) -> Result<VectorField<T>> {
        check_compatible(u, v)?;
        let constant = v.is_constant();
        let table = self.table(v, tau)?;
        Ok(apply_table(u, table, constant))
    }
}

fn exponential_table<T: Real>(v: &PotentialField<T>, tau: T) -> Result<Vec<T>> {
    let mats: Result<Vec<Mat<T>>> = (0..v.distinct_points())
        .into_par_iter()
        .map(|p| expm_neg(&v.matrix_at(p), tau))
        .collect();
    Ok(mats?.into_iter().flat_map(Mat::into_vec).collect())
}

fn check_compatible<T: Real>(u: &VectorField<T>, v: &PotentialField<T>) -> Result<()> {
    if !u.grid().same_as(v.grid()) {
        return Err(Error::GridMismatch);
    }
    if u.components() != v.components() {
        return Err(Error::ComponentMismatch(u.components(), v.components()));
    }
    Ok(())
}

fn apply_table<T: Real>(u: &VectorField<T>, table: &[T], constant: bool) -> VectorField<T> {
    let m = u.components();
    let mm = m * m;
    let mut out = u.clone();
    out.as_mut_slice()
        .par_chunks_mut(m)
        .enumerate()
        .for_each(|(p, dst)| {
            let e = if constant { &table[..mm] } else { &table[p * mm..(p + 1) * mm] };
            let src = u.at(p);
            for (i, slot) in dst.iter_mut().enumerate() {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (k, z) in src.iter().enumerate() {
                    acc = acc + *z * e[i * m + k];
                }
                *slot = acc;
            }
        });
    out
}

/// `u'(x) = e^{-tau V(x)} u(x)` at every grid point.
pub fn potential_step<T: Real>(u: &VectorField<T>, v: &PotentialField<T>, tau: T) -> Result<VectorField<T>> {
    ExpCache::new().apply(u, v, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use approx::assert_relative_eq;

    /// Independent oracle: truncated Taylor series of `e^{-tau M}`.
    ///
    /// For `||tau M|| > 1` the series is summed for `e^{-tau M / 2^k}` and squared
    /// back, so no term is large enough to lose digits to cancellation.
    fn series(m: &Mat<f64>, tau: f64, terms: usize) -> Mat<f64> {
        let mut k = 0;
        while m.scale(tau).norm1() / 2f64.powi(k) > 1.0 {
            k += 1;
        }
        let a = m.scale(-tau / 2f64.powi(k));
        let mut term = Mat::identity(m.dim());
        let mut sum = term.clone();
        for j in 1..terms {
            term = term.matmul(&a).scale(1.0 / j as f64);
            sum = sum.add(&term);
        }
        for _ in 0..k {
            sum = sum.matmul(&sum);
        }
        sum
    }

    fn max_rel_err(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
        a.sub(b).max_abs() / b.max_abs()
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = expm_neg(&Mat::<f64>::zeros(3), 0.7).unwrap();
        assert_eq!(e, Mat::identity(3));
    }

    #[test]
    fn diagonal_matrix() {
        let m = Mat::from_diag(&[0.5, 2.0, -1.0]);
        let e = expm_neg(&m, 0.3).unwrap();
        for (i, lam) in [0.5f64, 2.0, -1.0].iter().enumerate() {
            assert_relative_eq!(e[(i, i)], (-0.3 * lam).exp(), max_relative = 1e-15);
        }
    }

    #[test]
    fn rotation_generator_matches_series_and_closed_form() {
        let v = 1.7;
        let tau = 0.9;
        let m = Mat::from_row_major(2, vec![0.0, -v, v, 0.0]);
        let e = expm_neg(&m, tau).unwrap();
        let oracle = series(&m, tau, 30);
        assert!(max_rel_err(&e, &oracle) <= 1e-12);
        let (c, s) = ((tau * v).cos(), (tau * v).sin());
        let closed = Mat::from_row_major(2, vec![c, s, -s, c]);
        assert!(max_rel_err(&e, &closed) <= 1e-14);
    }

    #[test]
    fn general_matrices_match_series_up_to_norm_ten() {
        let m = Mat::from_row_major(
            3,
            vec![1.0, -2.0, 0.5, 0.7, 0.3, -1.1, -0.4, 1.9, 2.2],
        );
        for tau in [0.01, 0.5, 1.0, 2.0] {
            let a_norm = m.scale(tau).norm1();
            assert!(a_norm <= 10.0);
            let e = expm_neg(&m, tau).unwrap();
            let oracle = series(&m, tau, 40);
            assert!(max_rel_err(&e, &oracle) <= 1e-12, "tau {tau}");
        }
    }

    #[test]
    fn symmetric_path_agrees_with_pade() {
        let m = Mat::from_row_major(3, vec![2.0, 0.3, -0.1, 0.3, 1.0, 0.4, -0.1, 0.4, 0.5]);
        let sym = expm_neg(&m, 0.8).unwrap();
        let pade = expm_pade13(&m.scale(-0.8));
        assert!(max_rel_err(&sym, &pade) <= 1e-13);
    }

    #[test]
    fn overflow_is_rejected_with_norm() {
        let m = Mat::from_row_major(2, vec![0.0, -1e4, 1e4, 0.0]);
        match expm_neg(&m, 1.0) {
            Err(Error::ExpmOverflow { norm, limit }) => {
                assert_eq!(norm, 1e4);
                assert!(limit > 400.0 && limit < 500.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(expm_neg(&Mat::<f64>::identity(2), -1.0).is_err());
    }

    #[test]
    fn scalar_decay_halves_field() {
        let g = Grid::<f64>::periodic_1d(16, 1.0).unwrap();
        let u = VectorField::from_fn(g.clone(), 2, |x, j| Complex::new(x[0] + j as f64, 1.0)).unwrap();
        let v = PotentialField::constant(g, 2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = potential_step(&u, &v, 2f64.ln()).unwrap();
        for (a, b) in out.as_slice().iter().zip(u.as_slice()) {
            assert_relative_eq!(a.re, b.re / 2.0, epsilon = 1e-15);
            assert_relative_eq!(a.im, b.im / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_potential_leaves_field_unchanged() {
        let g = Grid::<f64>::periodic_1d(16, 1.0).unwrap();
        let u = VectorField::from_fn(g.clone(), 3, |x, j| Complex::new(x[0].sin(), j as f64)).unwrap();
        let v = PotentialField::zero(g, 3).unwrap();
        assert_eq!(potential_step(&u, &v, 0.25).unwrap(), u);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let g1 = Grid::<f64>::periodic_1d(16, 1.0).unwrap();
        let g2 = Grid::<f64>::periodic_1d(16, 2.0).unwrap();
        let u = VectorField::zeros(g1, 2).unwrap();
        let v = PotentialField::zero(g2, 2).unwrap();
        assert_eq!(potential_step(&u, &v, 0.1).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn cache_reproduces_fresh_computation_and_invalidates_on_tau() {
        let g = Grid::<f64>::periodic_1d(32, 3.0).unwrap();
        let v = PotentialField::from_fn(g.clone(), 2, |x| {
            let w = 1.0 + x[0] * x[0];
            vec![w, -x[0].sin(), x[0].sin(), w]
        })
        .unwrap();
        let u = VectorField::from_fn(g, 2, |x, j| Complex::new((x[0] * (j + 1) as f64).cos(), 0.2)).unwrap();
        let mut cache = ExpCache::new();
        let first = cache.apply(&u, &v, 0.1).unwrap();
        assert!(cache.is_cached(&v, 0.1));
        let again = cache.apply(&u, &v, 0.1).unwrap();
        let fresh = potential_step(&u, &v, 0.1).unwrap();
        assert_eq!(first, again);
        assert_eq!(first, fresh);
        cache.apply(&u, &v, 0.2).unwrap();
        assert!(!cache.is_cached(&v, 0.1));
        assert_eq!(cache.apply(&u, &v, 0.2).unwrap(), potential_step(&u, &v, 0.2).unwrap());
    }
}
