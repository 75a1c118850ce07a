#![allow(dead_code)]

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsg_core::field::{Boundary, Grid, PotentialField, VectorField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid_1d(n: usize, l: f64) -> Grid<f64> {
    Grid::new(&[n], &[l], Boundary::Periodic).unwrap()
}

/// i.i.d. uniform complex entries in the unit square.
pub fn random_field(grid: &Grid<f64>, m: usize, seed: u64) -> VectorField<f64> {
    let mut r = rng(seed);
    let data = (0..grid.len() * m)
        .map(|_| Complex::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect();
    VectorField::new(grid.clone(), m, data).unwrap()
}

pub fn random_real_field(grid: &Grid<f64>, m: usize, seed: u64) -> VectorField<f64> {
    let mut r = rng(seed);
    let data = (0..grid.len() * m)
        .map(|_| Complex::new(r.gen_range(-1.0..1.0), 0.0))
        .collect();
    VectorField::new(grid.clone(), m, data).unwrap()
}

/// Random `m x m` matrix with entries in `[-s, s]`.
pub fn random_matrix(r: &mut ChaCha8Rng, m: usize, s: f64) -> Vec<f64> {
    (0..m * m).map(|_| r.gen_range(-s..s)).collect()
}

/// `B B^T + c I + (A - A^T)`: accretive with symmetric-part minimum eigenvalue >= c.
pub fn random_accretive_matrix(r: &mut ChaCha8Rng, m: usize, c: f64) -> Vec<f64> {
    let b = random_matrix(r, m, 1.0);
    let a = random_matrix(r, m, 2.0);
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += b[i * m + k] * b[j * m + k];
            }
            out[i * m + j] = s + a[i * m + j] - a[j * m + i] + if i == j { c } else { 0.0 };
        }
    }
    out
}

/// Per-point accretive potential with smoothly varying entries.
pub fn random_accretive_field(grid: &Grid<f64>, m: usize, seed: u64) -> PotentialField<f64> {
    let mut r = rng(seed);
    let base = random_accretive_matrix(&mut r, m, 0.0);
    let rot = random_matrix(&mut r, m, 1.5);
    let l = grid.half_extents()[0];
    PotentialField::from_fn(grid.clone(), m, |x: &[f64]| {
        let s = (std::f64::consts::PI * x[0] / l).sin();
        (0..m * m)
            .map(|k| {
                let (i, j) = (k / m, k % m);
                let anti = s * (rot[k] - rot[j * m + i]);
                base[k] * (1.0 + 0.5 * s * s) + anti
            })
            .collect()
    })
    .unwrap()
}

pub fn max_abs_diff(a: &VectorField<f64>, b: &VectorField<f64>) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
