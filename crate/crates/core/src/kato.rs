//! Discrete checks of the modulus gradient formula, the pointwise gradient
//! inequality and Kato's inequality for vector fields.
//!
//! Gradients are centered differences with the grid's boundary rule (wrap or
//! Dirichlet ghost zero); `Delta_Q` is the assembled flux-form operator.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffusion::DiscreteOperator;
use crate::error::{Error, Result};
use crate::field::{pointwise_abs, DiffusionTensorField, Grid, NormSpec, ScalarField, VectorField};
use crate::scalar::{pairwise_sum_by, Real};

/// Relative tolerance of the weak Kato defect, scaled by `||u||_2 ||phi||_2`.
pub const WEAK_DEFECT_TOL: f64 = 1e-6;

/// Mask factor for the identity residual: points with `|u| > 10 eps` count.
pub const IDENTITY_MASK_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunctionKind {
    /// `exp(1 - 1 / (1 - r^2))`, peak 1.
    Bump,
    /// `cos^2(pi r / 2)`.
    CosSquared,
    Custom,
}

/// Nonnegative test function with support inside the computational box.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction<T> {
    kind: TestFunctionKind,
    center: [T; 2],
    radius: T,
    field: ScalarField<T>,
}

impl<T: Real> TestFunction<T> {
    pub fn bump(grid: &Grid<T>, center: &[T], radius: T) -> Result<Self> {
        Self::radial(grid, center, radius, TestFunctionKind::Bump, |r| {
            T::one() - T::one() / (T::one() - r * r)
        })
    }

    pub fn cos_squared(grid: &Grid<T>, center: &[T], radius: T) -> Result<Self> {
        Self::radial(grid, center, radius, TestFunctionKind::CosSquared, |r| {
            let c = (T::FRAC_PI_2() * r).cos();
            (c * c).ln()
        })
    }

    /// Wraps explicit samples. `support` is the (center, radius) ball the
    /// values are claimed to vanish outside of.
    pub fn from_values(field: ScalarField<T>, center: &[T], radius: T) -> Result<Self> {
        let (c, r) = check_support(&field.grid, center, radius)?;
        for (i, &v) in field.values.iter().enumerate() {
            if !(v >= T::zero()) {
                return Err(Error::BadTestFunction(format!("phi = {v} < 0 at point {i}")));
            }
            if v != T::zero() && radial_distance(&field.grid, i, &c, r) >= T::one() {
                return Err(Error::BadTestFunction(format!("phi nonzero outside its support at point {i}")));
            }
        }
        Ok(Self {
            kind: TestFunctionKind::Custom,
            center: c,
            radius: r,
            field,
        })
    }

    /// `ln_profile(r)` is the log of the profile on `0 <= r < 1`.
    fn radial(
        grid: &Grid<T>,
        center: &[T],
        radius: T,
        kind: TestFunctionKind,
        ln_profile: impl Fn(T) -> T,
    ) -> Result<Self> {
        let (c, r) = check_support(grid, center, radius)?;
        let values = (0..grid.len())
            .map(|i| {
                let s = radial_distance(grid, i, &c, r);
                if s < T::one() {
                    ln_profile(s).exp()
                } else {
                    T::zero()
                }
            })
            .collect();
        Ok(Self {
            kind,
            center: c,
            radius: r,
            field: ScalarField {
                grid: grid.clone(),
                values,
            },
        })
    }

    pub fn kind(&self) -> TestFunctionKind {
        self.kind
    }

    pub fn center(&self) -> &[T] {
        &self.center[..self.field.grid.dim()]
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.field.grid
    }

    pub fn values(&self) -> &[T] {
        &self.field.values
    }

    pub fn field(&self) -> &ScalarField<T> {
        &self.field
    }

    /// `sum phi w`.
    pub fn integral(&self) -> T {
        let w = self.field.grid.cell_volume();
        pairwise_sum_by(self.field.values.len(), |i| self.field.values[i]) * w
    }
}

fn check_support<T: Real>(grid: &Grid<T>, center: &[T], radius: T) -> Result<([T; 2], T)> {
    let d = grid.dim();
    if center.len() != d {
        return Err(Error::BadTestFunction(format!(
            "center has {} coordinates on a {d}-d grid",
            center.len()
        )));
    }
    if !(radius > T::zero() && radius.is_finite()) {
        return Err(Error::BadTestFunction(format!("radius {radius} must be positive")));
    }
    let mut c = [T::zero(); 2];
    for a in 0..d {
        let l = grid.half_extents()[a];
        // Strictly inside: at least one grid cell between support and box edge.
        if !(center[a] - radius > -l + grid.spacing(a) && center[a] + radius < l - grid.spacing(a)) {
            return Err(Error::BadTestFunction(format!(
                "support [{}, {}] on axis {a} not strictly inside (-{l}, {l})",
                center[a] - radius,
                center[a] + radius
            )));
        }
        c[a] = center[a];
    }
    Ok((c, radius))
}

fn radial_distance<T: Real>(grid: &Grid<T>, idx: usize, c: &[T; 2], r: T) -> T {
    let x = grid.point(idx);
    let mut s = T::zero();
    for a in 0..grid.dim() {
        let t = (x[a] - c[a]) / r;
        s = s + t * t;
    }
    s.sqrt()
}

/// Centered-difference gradients: `out[(point * m + j) * d + a] = (G u_j)_a`.
pub fn centered_gradient<T: Real>(u: &VectorField<T>) -> Vec<Complex<T>> {
    let g = u.grid();
    let (m, d) = (u.components(), g.dim());
    let zero = Complex::new(T::zero(), T::zero());
    let data = u.as_slice();
    let mut out = vec![zero; g.len() * m * d];
    for idx in 0..g.len() {
        for a in 0..d {
            let inv = T::one() / (T::lit(2.0) * g.spacing(a));
            let up = g.neighbor(idx, a, 1);
            let dn = g.neighbor(idx, a, -1);
            for j in 0..m {
                let fwd = up.map(|k| data[k * m + j]).unwrap_or(zero);
                let bwd = dn.map(|k| data[k * m + j]).unwrap_or(zero);
                out[(idx * m + j) * d + a] = (fwd - bwd) * inv;
            }
        }
    }
    out
}

fn scalar_gradient<T: Real>(f: &ScalarField<T>) -> Vec<T> {
    centered_gradient(&f.to_vector_field()).into_iter().map(|z| z.re).collect()
}

/// `<Q xi, xi>` for a real `xi` with `Q` row-major `d x d`.
fn q_form<T: Real>(q: &[T], xi: &[T]) -> T {
    let d = xi.len();
    let mut s = T::zero();
    for i in 0..d {
        for j in 0..d {
            s = s + q[i * d + j] * xi[i] * xi[j];
        }
    }
    s
}

/// `sum_j |G u_j|_Q^2` at one point, real and imaginary parts together.
fn component_energy<T: Real>(q: &[T], grads: &[Complex<T>], m: usize, d: usize) -> T {
    let mut s = T::zero();
    let mut re = [T::zero(); 2];
    let mut im = [T::zero(); 2];
    for j in 0..m {
        for a in 0..d {
            re[a] = grads[j * d + a].re;
            im[a] = grads[j * d + a].im;
        }
        s = s + q_form(q, &re[..d]) + q_form(q, &im[..d]);
    }
    s
}

/// `sum_j Re(conj(u_j) G u_j)` at one point.
fn modulus_flux<T: Real>(u: &[Complex<T>], grads: &[Complex<T>], d: usize) -> [T; 2] {
    let mut s = [T::zero(); 2];
    for (j, uj) in u.iter().enumerate() {
        for (a, slot) in s.iter_mut().enumerate().take(d) {
            *slot = *slot + (uj.conj() * grads[j * d + a]).re;
        }
    }
    s
}

/// Modulus gradient `sum_j Re(conj(u_j) G u_j) / sqrt(|u|^2 + eps^2)`,
/// flattened as `out[point * d + a]`.
pub fn grad_abs_formula<T: Real>(u: &VectorField<T>, eps: T) -> Result<Vec<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let g = u.grid();
    let (m, d) = (u.components(), g.dim());
    let grads = centered_gradient(u);
    let abs = pointwise_abs(u);
    let mut out = vec![T::zero(); g.len() * d];
    for idx in 0..g.len() {
        let flux = modulus_flux(u.at(idx), &grads[idx * m * d..(idx + 1) * m * d], d);
        let den = (abs.values[idx] * abs.values[idx] + eps * eps).sqrt();
        for a in 0..d {
            out[idx * d + a] = flux[a] / den;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradInequalityReport<T> {
    pub pass: bool,
    /// `min_x (RHS - LHS)`.
    pub worst_slack: T,
    pub worst_point: usize,
    pub worst_coords: Vec<T>,
    pub max_lhs: T,
    pub max_rhs: T,
}

/// Pointwise `|grad |u||_Q^2 <= sum_j |grad u_j|_Q^2` with the modulus gradient
/// taken from the exact formula (`chi_{u != 0} / |u|`, no regularization).
///
/// PASS iff `LHS <= RHS + tol (1 + RHS)` at every point.
pub fn check_grad_inequality<T: Real>(
    u: &VectorField<T>,
    q: &DiffusionTensorField<T>,
    tol: T,
) -> Result<GradInequalityReport<T>> {
    let g = u.grid();
    if !g.same_as(q.grid()) {
        return Err(Error::GridMismatch);
    }
    let (m, d) = (u.components(), g.dim());
    let grads = centered_gradient(u);
    let abs = pointwise_abs(u);
    let mut rep = GradInequalityReport {
        pass: true,
        worst_slack: T::infinity(),
        worst_point: 0,
        worst_coords: Vec::new(),
        max_lhs: T::zero(),
        max_rhs: T::zero(),
    };
    for idx in 0..g.len() {
        let gp = &grads[idx * m * d..(idx + 1) * m * d];
        let qx = q.at(idx);
        let rhs = component_energy(qx, gp, m, d);
        let lhs = if abs.values[idx] > T::zero() {
            let flux = modulus_flux(u.at(idx), gp, d);
            let inv = T::one() / abs.values[idx];
            let xi = [flux[0] * inv, flux[1] * inv];
            q_form(qx, &xi[..d])
        } else {
            T::zero()
        };
        rep.max_lhs = rep.max_lhs.max(lhs);
        rep.max_rhs = rep.max_rhs.max(rhs);
        if lhs > rhs + tol * (T::one() + rhs) {
            rep.pass = false;
        }
        if rhs - lhs < rep.worst_slack {
            rep.worst_slack = rhs - lhs;
            rep.worst_point = idx;
        }
    }
    rep.worst_coords = g.point(rep.worst_point)[..d].to_vec();
    Ok(rep)
}

/// Weak Kato defect against a nonnegative test function:
///
/// `D = sum |u| (L_h phi) w - sum chi_{|u| > eps} |u|^{-1} sum_j Re(conj(u_j) (L_h u)_j) phi w`.
///
/// Kato's inequality says `D >= 0`.
pub fn kato_weak_defect<T: Real>(
    u: &VectorField<T>,
    phi: &TestFunction<T>,
    eps: T,
    q: &DiffusionTensorField<T>,
) -> Result<T> {
    let op = DiscreteOperator::assemble(q)?;
    kato_weak_defect_with(u, phi, eps, &op)
}

/// [`kato_weak_defect`] with a pre-assembled operator.
pub fn kato_weak_defect_with<T: Real>(
    u: &VectorField<T>,
    phi: &TestFunction<T>,
    eps: T,
    op: &DiscreteOperator<T>,
) -> Result<T> {
    let g = u.grid();
    if !g.same_as(op.grid()) || !g.same_as(phi.grid()) {
        return Err(Error::GridMismatch);
    }
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let m = u.components();
    let w = g.cell_volume();
    let abs = pointwise_abs(u);
    let l_phi = op.apply_real(phi.values());
    let lu = op.apply(u)?;
    let lhs = pairwise_sum_by(g.len(), |i| abs.values[i] * l_phi[i]) * w;
    let rhs = pairwise_sum_by(g.len(), |i| {
        let a = abs.values[i];
        if a > eps && phi.values()[i] != T::zero() {
            let mut s = T::zero();
            for j in 0..m {
                s = s + (u.as_slice()[i * m + j].conj() * lu.as_slice()[i * m + j]).re;
            }
            s / a * phi.values()[i]
        } else {
            T::zero()
        }
    }) * w;
    Ok(lhs - rhs)
}

/// `1e-6 ||u||_2 ||phi||_2`, the admissible negative excursion of the weak defect.
pub fn weak_defect_tolerance<T: Real>(u: &VectorField<T>, phi: &TestFunction<T>) -> Result<T> {
    Ok(T::lit(WEAK_DEFECT_TOL) * u.lp_norm(NormSpec::two())? * phi.field().lp_norm(NormSpec::two()))
}

/// Pointwise residual of the modulus identity
///
/// `Delta_Q |u| = |u|^{-1} (sum_j Re(conj(u_j) Delta_Q u_j) + sum_j |grad u_j|_Q^2 - |grad |u||_Q^2)`
///
/// with every term discrete (`L_h` for `Delta_Q`, centered gradients, the
/// denominator regularized to `sqrt(|u|^2 + eps^2)`). Zero outside `|u| > 10 eps`.
pub fn kato_identity_residual<T: Real>(
    u: &VectorField<T>,
    eps: T,
    q: &DiffusionTensorField<T>,
) -> Result<ScalarField<T>> {
    let g = u.grid();
    if !g.same_as(q.grid()) {
        return Err(Error::GridMismatch);
    }
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let op = DiscreteOperator::assemble(q)?;
    let (m, d) = (u.components(), g.dim());
    let abs = pointwise_abs(u);
    let l_abs = op.apply_real(&abs.values);
    let lu = op.apply(u)?;
    let grads = centered_gradient(u);
    let grad_abs = scalar_gradient(&abs);
    let cut = T::lit(IDENTITY_MASK_FACTOR) * eps;
    let values = (0..g.len())
        .map(|i| {
            let a = abs.values[i];
            if a <= cut {
                return T::zero();
            }
            let qx = q.at(i);
            let mut lap = T::zero();
            for j in 0..m {
                lap = lap + (u.as_slice()[i * m + j].conj() * lu.as_slice()[i * m + j]).re;
            }
            let energy = component_energy(qx, &grads[i * m * d..(i + 1) * m * d], m, d);
            let mod_energy = q_form(qx, &grad_abs[i * d..(i + 1) * d]);
            let den = (a * a + eps * eps).sqrt();
            l_abs[i] - (lap + energy - mod_energy) / den
        })
        .collect();
    Ok(ScalarField {
        grid: g.clone(),
        values,
    })
}

/// Random smooth field: a low-order trigonometric polynomial per component
/// with complex coefficients decaying like `1 / (1 + |k|^2)`. On Dirichlet
/// grids it is multiplied by `prod_a cos^2(pi x_a / (2 L_a))` so it vanishes
/// at the boundary.
pub fn random_smooth_field<T: Real>(grid: &Grid<T>, m: usize, modes: usize, seed: u64) -> Result<VectorField<T>> {
    let d = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ks: Vec<[i32; 2]> = {
        let r = modes as i32;
        let mut v = Vec::new();
        for k0 in -r..=r {
            if d == 1 {
                v.push([k0, 0]);
            } else {
                for k1 in -r..=r {
                    v.push([k0, k1]);
                }
            }
        }
        v
    };
    let coeffs: Vec<Vec<(f64, f64)>> = (0..m)
        .map(|_| {
            ks.iter()
                .map(|k| {
                    let s = 1.0 / (1.0 + (k[0] * k[0] + k[1] * k[1]) as f64);
                    (rng.gen_range(-1.0..1.0) * s, rng.gen_range(-1.0..1.0) * s)
                })
                .collect()
        })
        .collect();
    let l: Vec<f64> = grid.half_extents().iter().map(|x| x.to_f64_lossy()).collect();
    let periodic = grid.is_periodic();
    VectorField::from_fn(grid.clone(), m, |x: &[T], j| {
        let xs: Vec<f64> = x.iter().map(|v| v.to_f64_lossy()).collect();
        let (mut re, mut im) = (0.0, 0.0);
        for (k, &(a, b)) in ks.iter().zip(&coeffs[j]) {
            let mut phase = 0.0;
            for ax in 0..d {
                phase += std::f64::consts::PI * k[ax] as f64 * xs[ax] / l[ax];
            }
            let (s, c) = phase.sin_cos();
            re += a * c - b * s;
            im += a * s + b * c;
        }
        if !periodic {
            let mut env = 1.0;
            for ax in 0..d {
                let c = (std::f64::consts::FRAC_PI_2 * xs[ax] / l[ax]).cos();
                env *= c * c;
            }
            re *= env;
            im *= env;
        }
        Complex::new(T::lit(re), T::lit(im))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Boundary;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    #[test]
    fn test_function_validation() {
        let g = Grid::<f64>::periodic_1d(64, 4.0).unwrap();
        assert!(TestFunction::bump(&g, &[0.0], 1.0).is_ok());
        assert!(matches!(
            TestFunction::bump(&g, &[3.5], 1.0),
            Err(Error::BadTestFunction(_))
        ));
        assert!(TestFunction::cos_squared(&g, &[0.0, 0.0], 1.0).is_err());
        let neg = ScalarField::from_fn(g.clone(), |x: &[f64]| if x[0].abs() < 0.5 { -1.0 } else { 0.0 });
        assert!(matches!(
            TestFunction::from_values(neg, &[0.0], 1.0),
            Err(Error::BadTestFunction(_))
        ));
        let phi = TestFunction::bump(&g, &[0.5], 1.5).unwrap();
        assert!(phi.values().iter().all(|&v| v >= 0.0));
        assert!((phi.values().iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn constant_field_has_zero_modulus_gradient() {
        let g = Grid::<f64>::periodic_1d(32, 2.0).unwrap();
        let u = VectorField::from_fn(g, 3, |_: &[f64], j| Complex::new(1.0 + j as f64, -0.5)).unwrap();
        assert_eq!(max_abs(&grad_abs_formula(&u, 1e-8).unwrap()), 0.0);
    }

    #[test]
    fn unit_modulus_field_has_eps_sized_gradient() {
        let g = Grid::<f64>::periodic_1d(64, std::f64::consts::PI).unwrap();
        let u = VectorField::from_fn(g, 2, |x: &[f64], j| {
            Complex::new(if j == 0 { x[0].cos() } else { x[0].sin() }, 0.0)
        })
        .unwrap();
        assert!(max_abs(&grad_abs_formula(&u, 1e-6).unwrap()) <= 1e-14);
    }

    #[test]
    fn positive_scalar_gradient_is_second_order() {
        let errs: Vec<f64> = [64, 128]
            .iter()
            .map(|&n| {
                let g = Grid::<f64>::periodic_1d(n, std::f64::consts::PI).unwrap();
                let u = VectorField::from_fn(g.clone(), 1, |x: &[f64], _| Complex::new(2.0 + x[0].sin(), 0.0)).unwrap();
                let grad = grad_abs_formula(&u, 1e-12).unwrap();
                (0..g.len())
                    .map(|i| (grad[i] - g.point(i)[0].cos()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn scalar_real_field_gives_equality() {
        let g = Grid::<f64>::periodic_1d(128, 3.0).unwrap();
        let q = DiffusionTensorField::constant(g.clone(), &[1.7], 1.0, 2.0).unwrap();
        let u = VectorField::from_fn(g, 1, |x: &[f64], _| Complex::new(x[0].sin() * (-x[0] * x[0]).exp(), 0.0)).unwrap();
        let rep = check_grad_inequality(&u, &q, 0.0).unwrap();
        assert!(rep.worst_slack.abs() <= 1e-12 * (1.0 + rep.max_rhs), "{rep:?}");
    }

    #[test]
    fn duplicated_component_gives_equality() {
        let g = Grid::<f64>::new(&[32, 32], &[3.0, 3.0], Boundary::Periodic).unwrap();
        let q = DiffusionTensorField::constant(g.clone(), &[2.0, 0.5, 0.5, 1.0], 0.5, 3.0).unwrap();
        let f = |x: &[f64]| (x[0] + 0.3 * x[1]).sin() + 0.2;
        let u = VectorField::from_fn(g, 2, |x: &[f64], _| Complex::new(f(x), 0.0)).unwrap();
        let rep = check_grad_inequality(&u, &q, 0.0).unwrap();
        assert!(rep.worst_slack >= -1e-10);
        assert!(rep.worst_slack <= 1e-10, "{rep:?}");
    }

    #[test]
    fn rotating_field_has_strict_slack() {
        let n = 128;
        let g = Grid::<f64>::periodic_1d(n, std::f64::consts::PI).unwrap();
        let q11 = 0.8;
        let q = DiffusionTensorField::constant(g.clone(), &[q11], 0.5, 1.0).unwrap();
        let u = VectorField::from_fn(g.clone(), 2, |x: &[f64], j| {
            Complex::new(if j == 0 { x[0].cos() } else { x[0].sin() }, 0.0)
        })
        .unwrap();
        let rep = check_grad_inequality(&u, &q, 0.0).unwrap();
        assert!(rep.pass);
        assert!(rep.max_lhs <= 1e-20);
        let h = g.spacing(0);
        let discrete = q11 * (h.sin() / h).powi(2);
        assert!((rep.worst_slack - discrete).abs() < 1e-12);
    }

    #[test]
    fn weak_defect_of_rotating_field_matches_closed_form() {
        let n = 256;
        let g = Grid::<f64>::periodic_1d(n, std::f64::consts::PI).unwrap();
        let k = 3.0;
        let u = VectorField::from_fn(g.clone(), 2, |x: &[f64], j| {
            Complex::new(if j == 0 { (k * x[0]).cos() } else { (k * x[0]).sin() }, 0.0)
        })
        .unwrap();
        let q = DiffusionTensorField::identity(g.clone());
        let phi = TestFunction::bump(&g, &[0.2], 1.5).unwrap();
        let d = kato_weak_defect(&u, &phi, 1e-10, &q).unwrap();
        let expected = k * k * phi.integral();
        assert!((d / expected - 1.0).abs() < 0.02, "{d} vs {expected}");
    }

    #[test]
    fn weak_defect_vanishes_for_positive_scalar() {
        let g = Grid::<f64>::periodic_1d(256, 4.0).unwrap();
        let u = VectorField::from_fn(g.clone(), 1, |x: &[f64], _| Complex::new(1.5 + (0.7 * x[0]).cos(), 0.0)).unwrap();
        let q = DiffusionTensorField::identity(g.clone());
        let phi = TestFunction::cos_squared(&g, &[0.0], 2.0).unwrap();
        let d = kato_weak_defect(&u, &phi, 1e-10, &q).unwrap();
        assert!(d.abs() < 1e-12, "{d}");
    }

    #[test]
    fn weak_defect_scales_linearly() {
        let g = Grid::<f64>::periodic_1d(128, 4.0).unwrap();
        let u = random_smooth_field(&g, 2, 3, 11).unwrap();
        let q = DiffusionTensorField::identity(g.clone());
        let phi = TestFunction::bump(&g, &[0.3], 2.0).unwrap();
        let d1 = kato_weak_defect(&u, &phi, 1e-10, &q).unwrap();
        let d3 = kato_weak_defect(&u.scaled(Complex::new(3.0, 0.0)), &phi, 1e-10, &q).unwrap();
        assert!((d3 - 3.0 * d1).abs() <= 1e-10 * d3.abs());
        assert!(d1 >= -weak_defect_tolerance(&u, &phi).unwrap());
    }

    #[test]
    fn identity_residual_refines_at_second_order() {
        let maxes: Vec<f64> = [64, 128]
            .iter()
            .map(|&n| {
                let g = Grid::<f64>::periodic_1d(n, std::f64::consts::PI).unwrap();
                let u = VectorField::from_fn(g.clone(), 2, |x: &[f64], j| {
                    Complex::new(if j == 0 { 2.0 + x[0].cos() } else { (2.0 * x[0]).sin() }, 0.0)
                })
                .unwrap();
                let q = DiffusionTensorField::identity(g);
                max_abs(&kato_identity_residual(&u, 1e-12, &q).unwrap().values)
            })
            .collect();
        let ratio = maxes[0] / maxes[1];
        assert!((3.0..=5.0).contains(&ratio), "{maxes:?}");
    }

    #[test]
    fn identity_residual_small_for_positive_scalar() {
        let g = Grid::<f64>::periodic_1d(512, std::f64::consts::PI).unwrap();
        let u = VectorField::from_fn(g.clone(), 1, |x: &[f64], _| Complex::new(2.0 + x[0].sin(), 0.0)).unwrap();
        let q = DiffusionTensorField::identity(g);
        assert!(max_abs(&kato_identity_residual(&u, 1e-12, &q).unwrap().values) <= 1e-8);
    }

    #[test]
    fn random_field_is_seeded() {
        let g = Grid::<f64>::new(&[16, 16], &[2.0, 2.0], Boundary::Dirichlet).unwrap();
        let a = random_smooth_field(&g, 2, 2, 5).unwrap();
        assert_eq!(a, random_smooth_field(&g, 2, 2, 5).unwrap());
        assert_ne!(a, random_smooth_field(&g, 2, 2, 6).unwrap());
    }
}
