use rayon::prelude::*;

use super::scheme::{SplitScheme, SplitVariant, Splitter};
use crate::error::{Error, Result};
use crate::field::{DiffusionTensorField, NormSpec, PotentialField, VectorField};
use crate::scalar::Real;

/// Errors at or below this (absolute, `L^2`) count as exact reproduction.
pub const EXACT_TOL: f64 = 1e-10;

/// Refinement factor of the Strang reference relative to the largest `n`.
pub const REFERENCE_FACTOR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderVerdict {
    /// Every error was within [`EXACT_TOL`]; no slope is meaningful.
    Exact,
    /// Negated least-squares slope of `ln err` against `ln n`.
    Order(f64),
}

impl OrderVerdict {
    pub fn order(&self) -> Option<f64> {
        match self {
            OrderVerdict::Exact => None,
            OrderVerdict::Order(p) => Some(*p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub tau: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub variant: SplitVariant,
    pub reference_steps: usize,
    pub rows: Vec<ConvergenceRow>,
    pub verdict: OrderVerdict,
}

/// Least-squares slope of `ln y` against `ln x`, skipping nonpositive `y`.
/// `None` with fewer than two usable points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, &b)| b > 0.0 && b.is_finite())
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

fn l2_distance<T: Real>(a: &VectorField<T>, b: &VectorField<T>) -> Result<T> {
    a.sub(b)?.lp_norm(NormSpec::two())
}

/// Measures the convergence order of `scheme.variant` on `n_list`.
///
/// The reference is Strang splitting with `4 * max(n_list)` steps and the
/// same diffusion backend. Runs for different `n` are independent and are
/// executed concurrently.
pub fn convergence_study<T: Real>(
    u0: &VectorField<T>,
    t: T,
    n_list: &[usize],
    scheme: &SplitScheme<T>,
    q: &DiffusionTensorField<T>,
    v: &PotentialField<T>,
) -> Result<ConvergenceTable> {
    if n_list.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "convergence study needs at least 4 step counts, got {}",
            n_list.len()
        )));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::InvalidParameter("step counts must be positive and increasing".into()));
    }
    let base = scheme.with_horizon(t);
    base.validate()?;
    let splitter = Splitter::new(q, v, base.backend, base.solver)?;
    let n_ref = REFERENCE_FACTOR * n_list[n_list.len() - 1];
    let reference = splitter.clone().propagate(u0, t, n_ref, SplitVariant::Strang)?;

    let errors = n_list
        .par_iter()
        .map(|&n| {
            let u = splitter.clone().propagate(u0, t, n, base.variant)?;
            l2_distance(&u, &reference)
        })
        .collect::<Result<Vec<T>>>()?;

    let rows: Vec<ConvergenceRow> = n_list
        .iter()
        .zip(&errors)
        .map(|(&n, e)| ConvergenceRow {
            steps: n,
            tau: t.to_f64_lossy() / n as f64,
            error: e.to_f64_lossy(),
        })
        .collect();
    let verdict = if rows.iter().all(|r| r.error <= EXACT_TOL) {
        OrderVerdict::Exact
    } else {
        let xs: Vec<f64> = rows.iter().map(|r| r.steps as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.error).collect();
        match loglog_slope(&xs, &ys) {
            Some(s) => OrderVerdict::Order(-s),
            None => OrderVerdict::Exact,
        }
    };
    Ok(ConvergenceTable {
        variant: base.variant,
        reference_steps: n_ref,
        rows,
        verdict,
    })
}

/// `||U(t + s; 2n) u0 - U(t; n) U(s; n) u0||_2 / ||u0||_2`.
pub fn semigroup_defect<T: Real>(
    u0: &VectorField<T>,
    t: T,
    s: T,
    n: usize,
    scheme: &SplitScheme<T>,
    q: &DiffusionTensorField<T>,
    v: &PotentialField<T>,
) -> Result<T> {
    let sc = scheme.with_horizon(t).with_steps(n);
    sc.validate()?;
    if !(s > T::zero()) {
        return Err(Error::InvalidParameter(format!("s = {s} must be positive")));
    }
    let mut sp = Splitter::new(q, v, sc.backend, sc.solver)?;
    let joint = sp.propagate(u0, t + s, 2 * n, sc.variant)?;
    let first = sp.propagate(u0, s, n, sc.variant)?;
    let composed = sp.propagate(&first, t, n, sc.variant)?;
    let norm0 = u0.lp_norm(NormSpec::two())?;
    if norm0 == T::zero() {
        return Ok(T::zero());
    }
    Ok(l2_distance(&joint, &composed)? / norm0)
}

/// `||U(t; n) f - f||_p` for each `t` in `t_list`, with `n = scheme.steps`.
/// A `t = 0` entry yields exactly zero.
pub fn strong_continuity_probe<T: Real>(
    f: &VectorField<T>,
    t_list: &[T],
    p: NormSpec<T>,
    scheme: &SplitScheme<T>,
    q: &DiffusionTensorField<T>,
    v: &PotentialField<T>,
) -> Result<Vec<T>> {
    if t_list.windows(2).any(|w| w[1] > w[0]) || t_list.iter().any(|&t| t < T::zero()) {
        return Err(Error::InvalidParameter("t_list must be nonnegative and decreasing".into()));
    }
    scheme.validate()?;
    let splitter = Splitter::new(q, v, scheme.backend, scheme.solver)?;
    t_list
        .par_iter()
        .map(|&t| {
            if t == T::zero() {
                return Ok(T::zero());
            }
            let u = splitter.clone().propagate(f, t, scheme.steps, scheme.variant)?;
            u.sub(f)?.lp_norm(p)
        })
        .collect()
}

/// Verdict on a continuity probe: values nonincreasing up to a relative
/// slack, and the last value small against `||f||_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityVerdict {
    pub pass: bool,
    pub monotone: bool,
    pub final_ratio: f64,
    /// Largest `values[k+1] / values[k] - 1` over consecutive positive pairs.
    pub worst_growth: f64,
}

pub fn continuity_verdict<T: Real>(values: &[T], f_norm: T, slack: f64, final_tol: f64) -> ContinuityVerdict {
    let vals: Vec<f64> = values.iter().map(|v| v.to_f64_lossy()).collect();
    let mut worst = f64::NEG_INFINITY;
    for w in vals.windows(2) {
        if w[0] > 0.0 {
            worst = worst.max(w[1] / w[0] - 1.0);
        } else if w[1] > 0.0 {
            worst = f64::INFINITY;
        }
    }
    let monotone = worst <= slack;
    let fnorm = f_norm.to_f64_lossy();
    let last = vals.iter().rev().find(|&&x| x > 0.0).copied().unwrap_or(0.0);
    let final_ratio = if fnorm > 0.0 { last / fnorm } else { 0.0 };
    ContinuityVerdict {
        pass: monotone && final_ratio <= final_tol,
        monotone,
        final_ratio,
        worst_growth: worst,
    }
}
