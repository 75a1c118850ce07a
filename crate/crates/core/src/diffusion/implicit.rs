use num_complex::Complex;

use super::operator::DiscreteOperator;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::scalar::{pairwise_sum_by, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImplicitMethod {
    BackwardEuler,
    CrankNicolson,
}

/// Stopping rule for the conjugate-gradient solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Relative residual target, `||r|| <= tol * ||rhs||`.
    pub tol: T,
    /// Iteration cap; `None` means `10 * sqrt(grid points)`.
    pub max_iter: Option<usize>,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: None,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, max_iter: None }
    }

    pub fn cap(&self, points: usize) -> usize {
        self.max_iter
            .unwrap_or_else(|| (10.0 * (points as f64).sqrt()).ceil() as usize)
            .max(1)
    }
}

/// One implicit diffusion step per component.
///
/// Backward Euler solves `(I - tau L) w = u_j`; Crank–Nicolson solves
/// `(I - tau L / 2) w = (I + tau L / 2) u_j`. Both systems are symmetric
/// positive definite because `L` is symmetric negative semidefinite, and are
/// solved by Jacobi-preconditioned conjugate gradients.
pub fn implicit_step<T: Real>(
    u: &VectorField<T>,
    op: &DiscreteOperator<T>,
    tau: T,
    method: ImplicitMethod,
    opts: SolverOptions<T>,
) -> Result<VectorField<T>> {
    if !u.grid().same_as(op.grid()) {
        return Err(Error::GridMismatch);
    }
    if !(tau >= T::zero() && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("step tau = {tau} must be >= 0")));
    }
    let shift = match method {
        ImplicitMethod::BackwardEuler => tau,
        ImplicitMethod::CrankNicolson => tau * T::lit(0.5),
    };
    let n = u.grid().len();
    let mut out = u.clone();
    let mut rhs = vec![Complex::new(T::zero(), T::zero()); n];
    let mut lu = vec![Complex::new(T::zero(), T::zero()); n];
    for j in 0..u.components() {
        let comp = u.component(j);
        match method {
            ImplicitMethod::BackwardEuler => rhs.copy_from_slice(&comp),
            ImplicitMethod::CrankNicolson => {
                op.apply_scalar(&comp, &mut lu);
                for ((r, &c), &l) in rhs.iter_mut().zip(&comp).zip(&lu) {
                    *r = c + l * shift;
                }
            }
        }
        let w = solve_shifted(op, shift, &rhs, &comp, opts)?;
        out.set_component(j, &w);
    }
    Ok(out)
}

fn norm_sq<T: Real>(v: &[Complex<T>]) -> T {
    pairwise_sum_by(v.len(), |i| v[i].norm_sqr())
}

/// Solves `(I - shift L) w = rhs` from the initial guess `x0`.
fn solve_shifted<T: Real>(
    op: &DiscreteOperator<T>,
    shift: T,
    rhs: &[Complex<T>],
    x0: &[Complex<T>],
    opts: SolverOptions<T>,
) -> Result<Vec<Complex<T>>> {
    let n = rhs.len();
    let zero = Complex::new(T::zero(), T::zero());
    let rhs_norm = norm_sq(rhs).sqrt();
    if rhs_norm == T::zero() {
        return Ok(vec![zero; n]);
    }
    if shift == T::zero() {
        return Ok(rhs.to_vec());
    }
    let apply = |x: &[Complex<T>], out: &mut [Complex<T>]| {
        op.apply_scalar(x, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = xi - *o * shift;
        }
    };
    let inv_diag: Vec<T> = op
        .diagonal()
        .into_iter()
        .map(|d| T::one() / (T::one() - shift * d))
        .collect();

    let mut x = x0.to_vec();
    let mut ax = vec![zero; n];
    apply(&x, &mut ax);
    let mut r: Vec<Complex<T>> = rhs.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
    let target = opts.tol * rhs_norm;
    let mut res = norm_sq(&r).sqrt();
    if res <= target {
        return Ok(x);
    }
    let mut z: Vec<Complex<T>> = r.iter().zip(&inv_diag).map(|(&ri, &d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz = pairwise_sum_by(n, |i| (r[i].conj() * z[i]).re);
    let mut ap = vec![zero; n];
    let cap = opts.cap(n);
    for _ in 0..cap {
        apply(&p, &mut ap);
        let pap = pairwise_sum_by(n, |i| (p[i].conj() * ap[i]).re);
        if pap <= T::zero() {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] = x[i] + p[i] * alpha;
            r[i] = r[i] - ap[i] * alpha;
        }
        res = norm_sq(&r).sqrt();
        if res <= target {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = pairwise_sum_by(n, |i| (r[i].conj() * z[i]).re);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + p[i] * beta;
        }
    }
    Err(Error::SolverDiverged {
        iterations: cap,
        residual: (res / rhs_norm).to_f64_lossy(),
    })
}
