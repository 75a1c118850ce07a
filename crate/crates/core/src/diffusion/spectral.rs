use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{Grid, VectorField};
use crate::scalar::{from_usize, Real};

/// Angular wavenumber of FFT bin `i` on an axis with `n` points and half-extent `l`.
pub fn wavenumber<T: Real>(i: usize, n: usize, l: T) -> T {
    let f = if i < n / 2 { i as isize } else { i as isize - n as isize };
    T::PI() * T::lit(f as f64) / l
}

/// Exact heat semigroup `e^{tau Delta_Q}` for constant `Q` on a periodic grid.
///
/// Each component is transformed, multiplied by `e^{-tau <Q k, k>}` (the
/// continuous symbol on the grid modes) and transformed back. Plans and the
/// last multiplier are reused across steps.
pub struct SpectralPropagator<T: Real> {
    grid: Grid<T>,
    q: Vec<T>,
    forward: Vec<Arc<dyn Fft<T>>>,
    inverse: Vec<Arc<dyn Fft<T>>>,
    /// `<Q k, k>` per mode.
    symbol: Vec<T>,
    multiplier: Option<(T, Vec<T>)>,
}

impl<T: Real> std::fmt::Debug for SpectralPropagator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPropagator")
            .field("grid", &self.grid)
            .field("q", &self.q)
            .finish()
    }
}

impl<T: Real> Clone for SpectralPropagator<T> {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            q: self.q.clone(),
            forward: self.forward.clone(),
            inverse: self.inverse.clone(),
            symbol: self.symbol.clone(),
            multiplier: self.multiplier.clone(),
        }
    }
}

impl<T: Real> SpectralPropagator<T> {
    /// `q_const` is the row-major `d x d` matrix.
    pub fn new(grid: &Grid<T>, q_const: &[T]) -> Result<Self> {
        let d = grid.dim();
        if !grid.is_periodic() {
            return Err(Error::SpectralUnsupported);
        }
        if q_const.len() != d * d {
            return Err(Error::InvalidParameter(format!(
                "constant Q needs {} entries, got {}",
                d * d,
                q_const.len()
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = grid.counts().iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = grid.counts().iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let symbol = (0..grid.len())
            .map(|idx| {
                let mi = grid.multi_index(idx);
                let k: Vec<T> = (0..d)
                    .map(|a| wavenumber(mi[a], grid.counts()[a], grid.half_extents()[a]))
                    .collect();
                let mut s = T::zero();
                for i in 0..d {
                    for j in 0..d {
                        s = s + q_const[i * d + j] * k[i] * k[j];
                    }
                }
                s
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            q: q_const.to_vec(),
            forward,
            inverse,
            symbol,
            multiplier: None,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// `<Q k, k>` for every mode, in FFT order.
    pub fn symbol(&self) -> &[T] {
        &self.symbol
    }

    /// `e^{tau Delta_Q} u`.
    pub fn step(&mut self, u: &VectorField<T>, tau: T) -> Result<VectorField<T>> {
        if !(tau >= T::zero() && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("step tau = {tau} must be >= 0")));
        }
        if self.multiplier.as_ref().map(|(t, _)| *t) != Some(tau) {
            let mult = self.symbol.iter().map(|&s| (-tau * s).exp()).collect();
            self.multiplier = Some((tau, mult));
        }
        let (_, mult) = self.multiplier.as_ref().expect("multiplier set above");
        let mult = mult.clone();
        self.apply_multiplier(u, &mult)
    }

    /// Multiplies every component by `mult[mode]` in Fourier space.
    pub fn apply_multiplier(&self, u: &VectorField<T>, mult: &[T]) -> Result<VectorField<T>> {
        if !u.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        assert_eq!(mult.len(), self.grid.len());
        let m = u.components();
        let mut out = u.clone();
        let scale = T::one() / from_usize::<T>(self.grid.len());
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.grid.len()];
        for j in 0..m {
            for (b, z) in buf.iter_mut().zip(u.as_slice().iter().skip(j).step_by(m)) {
                *b = *z;
            }
            self.transform(&mut buf, &self.forward);
            for (b, &f) in buf.iter_mut().zip(mult) {
                *b = *b * (f * scale);
            }
            self.transform(&mut buf, &self.inverse);
            out.set_component(j, &buf);
        }
        Ok(out)
    }

    fn transform(&self, buf: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>]) {
        let counts = self.grid.counts();
        if counts.len() == 1 {
            plans[0].process(buf);
            return;
        }
        let (n0, n1) = (counts[0], counts[1]);
        // Axis 1 is contiguous: one batched call over all rows.
        plans[1].process(buf);
        let mut col = vec![Complex::new(T::zero(), T::zero()); n0];
        for j in 0..n1 {
            for i in 0..n0 {
                col[i] = buf[i * n1 + j];
            }
            plans[0].process(&mut col);
            for i in 0..n0 {
                buf[i * n1 + j] = col[i];
            }
        }
    }
}

/// One exact heat step `e^{tau Delta_Q} u` for constant `Q` on a periodic grid.
pub fn spectral_step<T: Real>(u: &VectorField<T>, q_const: &[T], tau: T) -> Result<VectorField<T>> {
    SpectralPropagator::new(u.grid(), q_const)?.step(u, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{lp_norm, Boundary, NormSpec};

    #[test]
    fn wavenumbers_follow_fft_order() {
        let l = std::f64::consts::PI;
        assert_eq!(wavenumber(0, 8, l), 0.0);
        assert_eq!(wavenumber(1, 8, l), 1.0);
        assert_eq!(wavenumber(4, 8, l), -4.0);
        assert_eq!(wavenumber(7, 8, l), -1.0);
    }

    #[test]
    fn zero_step_is_identity_up_to_roundtrip() {
        let g = Grid::<f64>::new(&[16, 32], &[2.0, 3.0], Boundary::Periodic).unwrap();
        let u = VectorField::from_fn(g, 2, |x: &[f64], j| {
            Complex::new((-(x[0] * x[0] + x[1] * x[1])).exp(), j as f64 * x[1].sin())
        })
        .unwrap();
        let out = spectral_step(&u, &[1.0, 0.2, 0.2, 0.7], 0.0).unwrap();
        let err = lp_norm(&out.sub(&u).unwrap(), NormSpec::infinity()).unwrap();
        assert!(err <= 1e-13, "{err}");
    }

    #[test]
    fn requires_periodic_grid() {
        let g = Grid::<f64>::new(&[16], &[1.0], Boundary::Dirichlet).unwrap();
        let u = VectorField::zeros(g, 1).unwrap();
        assert_eq!(spectral_step(&u, &[1.0], 0.1).unwrap_err(), Error::SpectralUnsupported);
    }

    #[test]
    fn single_mode_decays_by_continuous_symbol() {
        let l = std::f64::consts::PI;
        let g = Grid::<f64>::periodic_1d(32, l).unwrap();
        let k = 3.0;
        let u = VectorField::from_fn(g, 1, |x: &[f64], _| Complex::new((k * x[0]).cos(), 0.0)).unwrap();
        let tau = 0.05;
        let out = spectral_step(&u, &[1.5], tau).unwrap();
        let factor = (-tau * 1.5 * k * k).exp();
        for (a, b) in out.as_slice().iter().zip(u.as_slice()) {
            assert!((a.re - factor * b.re).abs() < 1e-14);
            assert!(a.im.abs() < 1e-14);
        }
    }
}
