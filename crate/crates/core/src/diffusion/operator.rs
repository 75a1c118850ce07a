use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{validate_ellipticity, Boundary, DiffusionTensorField, Grid, VectorField};
use crate::scalar::{pairwise_sum_by, Real};

/// Tolerance used by [`DiscreteOperator::assemble`] when it re-validates `Q`.
pub const ASSEMBLY_ELLIPTICITY_TOL: f64 = 1e-10;

/// Which coefficient the discrete energy uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormWeight {
    /// `sum W |G v|^2` with `W` built from `Q`.
    Diffusion,
    /// `||G v||^2`, the same gradients with `Q = I`.
    Identity,
}

/// Discrete `div(Q grad .)` in flux form, `L_h = -(1/w) G^T W G`.
///
/// In 1-d, `G` is the forward difference on each face and `W` holds the face
/// average `(q_i + q_{i+1}) / 2`. In 2-d every cell contributes four corner
/// gradients (the two cell edges meeting at each corner), each weighted by a
/// quarter of the cell-averaged `Q`. For diagonal `Q` this is the five-point
/// stencil; off-diagonal entries produce the nine-point cross stencil.
/// Values outside a Dirichlet box are zero.
///
/// Symmetry is exact: every entry pair `(i, j)`, `(j, i)` is accumulated from
/// identical contributions in identical order.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T> {
    grid: Grid<T>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
    /// Position of the diagonal entry of each row in `vals`.
    diag_pos: Vec<usize>,
    /// Row sums `sum_j l_ij`; nonzero only next to Dirichlet ghosts.
    row_sums: Vec<T>,
    cells: Vec<Cell<T>>,
    constant_q: Option<Vec<T>>,
    diagonal_q: bool,
}

/// One face (1-d) or cell (2-d) of the flux form.
#[derive(Debug, Clone)]
struct Cell<T> {
    /// Corner node indices in the order (0,0), (1,0), (0,1), (1,1); `None` for ghosts.
    /// In 1-d only the first two are used.
    nodes: [Option<usize>; 4],
    /// q00, q01, q11 (1-d: only q00).
    q: [T; 3],
}

impl<T: Real> DiscreteOperator<T> {
    /// Assembles the operator for `Q` on its grid after checking ellipticity.
    pub fn assemble(q: &DiffusionTensorField<T>) -> Result<Self> {
        let report = validate_ellipticity(q, T::lit(ASSEMBLY_ELLIPTICITY_TOL))?;
        if !report.pass {
            return Err(Error::NotElliptic {
                point: report.worst_point,
                lambda_min: report.lambda_min,
                lambda_max: report.lambda_max,
                eta1: q.eta1().to_f64_lossy(),
                eta2: q.eta2().to_f64_lossy(),
            });
        }
        let grid = q.grid().clone();
        let cells = match grid.dim() {
            1 => faces_1d(q),
            _ => cells_2d(q),
        };
        let h: Vec<T> = grid.spacings();
        let n = grid.len();
        let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(cells.len() * 16);
        let mut row_sums = vec![T::zero(); n];
        for cell in &cells {
            let local = if grid.dim() == 1 {
                local_1d(cell, h[0])
            } else {
                local_2d(cell, h[0], h[1])
            };
            let k = if grid.dim() == 1 { 2 } else { 4 };
            for a in 0..k {
                let Some(ia) = cell.nodes[a] else { continue };
                for b in 0..k {
                    match cell.nodes[b] {
                        Some(ib) => triplets.push((ia, ib, local[a][b])),
                        // Local rows sum to zero, so a dropped ghost entry
                        // shows up as a nonzero row sum.
                        None => row_sums[ia] = row_sums[ia] - local[a][b],
                    }
                }
            }
        }
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<T> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                let end = vals.len() - 1;
                vals[end] = vals[end] + v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        // Diagonal from the off-diagonals so that the difference form used by
        // `apply` and the stored matrix describe the same operator.
        let mut diag_pos = vec![0usize; n];
        for i in 0..n {
            let mut off = T::zero();
            for k in row_ptr[i]..row_ptr[i + 1] {
                if cols[k] == i {
                    diag_pos[i] = k;
                } else {
                    off = off + vals[k];
                }
            }
            vals[diag_pos[i]] = row_sums[i] - off;
        }
        Ok(Self {
            grid,
            row_ptr,
            cols,
            vals,
            diag_pos,
            row_sums,
            cells,
            constant_q: q.constant_matrix().map(<[T]>::to_vec),
            diagonal_q: q.is_diagonal(),
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn boundary(&self) -> Boundary {
        self.grid.boundary()
    }

    pub fn constant_q(&self) -> Option<&[T]> {
        self.constant_q.as_deref()
    }

    /// True when the stencil has no cross terms (M-matrix case).
    pub fn has_diagonal_q(&self) -> bool {
        self.diagonal_q
    }

    /// Nonzeros of row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn entry(&self, i: usize, j: usize) -> T {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or_else(T::zero)
    }

    pub fn diagonal(&self) -> Vec<T> {
        self.diag_pos.iter().map(|&k| self.vals[k]).collect()
    }

    /// `(L_h v)_i = sum_{j != i} l_ij (v_j - v_i) + r_i v_i` with `r_i` the row
    /// sum, so constants are annihilated exactly on periodic grids.
    #[inline]
    fn row_action<V>(&self, i: usize, get: impl Fn(usize) -> V) -> V
    where
        V: Copy + std::ops::Sub<Output = V> + std::ops::Add<Output = V> + std::ops::Mul<T, Output = V>,
    {
        let vi = get(i);
        let mut acc = vi * self.row_sums[i];
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            let j = self.cols[k];
            if j != i {
                acc = acc + (get(j) - vi) * self.vals[k];
            }
        }
        acc
    }

    /// `L_h v` for one complex component stored contiguously.
    pub fn apply_scalar(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        debug_assert_eq!(v.len(), self.grid.len());
        out.par_iter_mut()
            .enumerate()
            .for_each(|(i, o)| *o = self.row_action(i, |j| v[j]));
    }

    /// `L_h v` for real samples.
    pub fn apply_real(&self, v: &[T]) -> Vec<T> {
        (0..self.grid.len())
            .into_par_iter()
            .map(|i| self.row_action(i, |j| v[j]))
            .collect()
    }

    /// Componentwise `L_h u`.
    pub fn apply(&self, u: &VectorField<T>) -> Result<VectorField<T>> {
        if !u.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let m = u.components();
        let src = u.as_slice();
        let mut out = u.clone();
        out.as_mut_slice()
            .par_chunks_mut(m)
            .enumerate()
            .for_each(|(i, dst)| {
                for (c, slot) in dst.iter_mut().enumerate() {
                    *slot = self.row_action(i, |j| src[j * m + c]);
                }
            });
        Ok(out)
    }

    /// `sum W |G v|^2` evaluated directly from the faces or cells, summed over
    /// real and imaginary parts, including the quadrature weight. Equals
    /// `-<L_h v, v>_h`.
    pub fn energy(&self, v: &[Complex<T>], weight: FormWeight) -> T {
        let h = self.grid.spacings();
        let w = self.grid.cell_volume();
        let get = |node: Option<usize>, f: &dyn Fn(Complex<T>) -> T| node.map(|i| f(v[i])).unwrap_or_else(T::zero);
        let part = |f: &dyn Fn(Complex<T>) -> T| {
            pairwise_sum_by(self.cells.len(), |c| {
                let cell = &self.cells[c];
                let q = match weight {
                    FormWeight::Diffusion => cell.q,
                    FormWeight::Identity => [T::one(), T::zero(), T::one()],
                };
                if self.grid.dim() == 1 {
                    let d = (get(cell.nodes[1], f) - get(cell.nodes[0], f)) / h[0];
                    q[0] * d * d * w
                } else {
                    let v00 = get(cell.nodes[0], f);
                    let v10 = get(cell.nodes[1], f);
                    let v01 = get(cell.nodes[2], f);
                    let v11 = get(cell.nodes[3], f);
                    let dx = [(v10 - v00) / h[0], (v11 - v01) / h[0]];
                    let dy = [(v01 - v00) / h[1], (v11 - v10) / h[1]];
                    // Four corner gradients (dx[b], dy[a]), weight 1/4 each.
                    let mut s = T::zero();
                    for &gx in &dx {
                        for &gy in &dy {
                            s = s + q[0] * gx * gx + T::lit(2.0) * q[1] * gx * gy + q[2] * gy * gy;
                        }
                    }
                    s * T::lit(0.25) * w
                }
            })
        };
        part(&|z: Complex<T>| z.re) + part(&|z: Complex<T>| z.im)
    }
}

/// `<a, b>_h = sum_x a(x) conj(b(x)) w` over all components.
pub fn inner_product<T: Real>(a: &VectorField<T>, b: &VectorField<T>) -> Result<Complex<T>> {
    a.ensure_compatible(b)?;
    let (x, y) = (a.as_slice(), b.as_slice());
    let w = a.grid().cell_volume();
    let re = pairwise_sum_by(x.len(), |i| x[i].re * y[i].re + x[i].im * y[i].im);
    let im = pairwise_sum_by(x.len(), |i| x[i].im * y[i].re - x[i].re * y[i].im);
    Ok(Complex::new(re * w, im * w))
}

fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

fn faces_1d<T: Real>(q: &DiffusionTensorField<T>) -> Vec<Cell<T>> {
    let grid = q.grid();
    let n = grid.counts()[0];
    let half = T::lit(0.5);
    let range: Vec<isize> = match grid.boundary() {
        Boundary::Periodic => (0..n as isize).collect(),
        Boundary::Dirichlet => (-1..n as isize).collect(),
    };
    range
        .into_iter()
        .map(|i| {
            let (a, b) = (i, i + 1);
            let node = |k: isize| -> Option<usize> {
                match grid.boundary() {
                    Boundary::Periodic => Some(k.rem_euclid(n as isize) as usize),
                    Boundary::Dirichlet => (0..n as isize).contains(&k).then_some(k as usize),
                }
            };
            let qa = q.at(node(a).unwrap_or_else(|| clamp_index(a, n)))[0];
            let qb = q.at(node(b).unwrap_or_else(|| clamp_index(b, n)))[0];
            Cell {
                nodes: [node(a), node(b), None, None],
                q: [(qa + qb) * half, T::zero(), T::zero()],
            }
        })
        .collect()
}

fn cells_2d<T: Real>(q: &DiffusionTensorField<T>) -> Vec<Cell<T>> {
    let grid = q.grid();
    let (n0, n1) = (grid.counts()[0], grid.counts()[1]);
    let periodic = grid.is_periodic();
    let (r0, r1): (Vec<isize>, Vec<isize>) = if periodic {
        ((0..n0 as isize).collect(), (0..n1 as isize).collect())
    } else {
        ((-1..n0 as isize).collect(), (-1..n1 as isize).collect())
    };
    let quarter = T::lit(0.25);
    let mut cells = Vec::with_capacity(r0.len() * r1.len());
    for &i in &r0 {
        for &j in &r1 {
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            let mut nodes = [None; 4];
            let mut acc = [T::zero(); 3];
            for (c, &(a, b)) in corners.iter().enumerate() {
                let (node, src) = if periodic {
                    let idx = grid.flat_index([
                        a.rem_euclid(n0 as isize) as usize,
                        b.rem_euclid(n1 as isize) as usize,
                    ]);
                    (Some(idx), idx)
                } else {
                    let inside = (0..n0 as isize).contains(&a) && (0..n1 as isize).contains(&b);
                    let src = grid.flat_index([clamp_index(a, n0), clamp_index(b, n1)]);
                    (inside.then_some(src), src)
                };
                nodes[c] = node;
                let qq = q.at(src);
                acc[0] = acc[0] + qq[0];
                acc[1] = acc[1] + qq[1];
                acc[2] = acc[2] + qq[3];
            }
            cells.push(Cell {
                nodes,
                q: [acc[0] * quarter, acc[1] * quarter, acc[2] * quarter],
            });
        }
    }
    cells
}

/// Local contribution to `L_h` from a 1-d face: `-(q/h^2) [[1, -1], [-1, 1]]`.
fn local_1d<T: Real>(cell: &Cell<T>, h: T) -> [[T; 4]; 4] {
    let c = cell.q[0] / (h * h);
    let mut k = [[T::zero(); 4]; 4];
    k[0][0] = -c;
    k[1][1] = -c;
    k[0][1] = c;
    k[1][0] = c;
    k
}

/// Local contribution to `L_h` from a 2-d cell (already divided by the cell
/// volume), symmetric by construction.
fn local_2d<T: Real>(cell: &Cell<T>, hx: T, hy: T) -> [[T; 4]; 4] {
    let [q00, q01, q11] = cell.q;
    // Difference vectors over local nodes (0,0), (1,0), (0,1), (1,1).
    let one = T::one();
    let z = T::zero();
    let dx0 = [-one / hx, one / hx, z, z];
    let dx1 = [z, z, -one / hx, one / hx];
    let dy0 = [-one / hy, z, one / hy, z];
    let dy1 = [z, -one / hy, z, one / hy];
    let sx: Vec<T> = (0..4).map(|a| dx0[a] + dx1[a]).collect();
    let sy: Vec<T> = (0..4).map(|a| dy0[a] + dy1[a]).collect();
    let half = T::lit(0.5);
    let mut k = [[T::zero(); 4]; 4];
    for a in 0..4 {
        for b in 0..=a {
            let xx = dx0[a] * dx0[b] + dx1[a] * dx1[b];
            let yy = dy0[a] * dy0[b] + dy1[a] * dy1[b];
            let xy = (sx[a] * sy[b] + sy[a] * sx[b]) * half;
            let v = -(q00 * xx + q11 * yy + q01 * xy) * half;
            k[a][b] = v;
            k[b][a] = v;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_1d_periodic_is_three_point_laplacian() {
        let g = Grid::<f64>::periodic_1d(16, 2.0).unwrap();
        let h = g.spacing(0);
        let l = DiscreteOperator::assemble(&DiffusionTensorField::identity(g)).unwrap();
        for i in 0..16 {
            assert_eq!(l.entry(i, i), -2.0 / (h * h));
            assert_eq!(l.entry(i, (i + 1) % 16), 1.0 / (h * h));
            assert_eq!(l.entry(i, (i + 15) % 16), 1.0 / (h * h));
            assert_eq!(l.row(i).count(), 3);
        }
    }

    #[test]
    fn identity_2d_is_five_point_laplacian() {
        let g = Grid::<f64>::new(&[8, 16], &[1.0, 2.0], Boundary::Periodic).unwrap();
        let (hx, hy) = (g.spacing(0), g.spacing(1));
        let l = DiscreteOperator::assemble(&DiffusionTensorField::identity(g.clone())).unwrap();
        let i = g.flat_index([3, 5]);
        assert_relative_eq!(l.entry(i, i), -2.0 / (hx * hx) - 2.0 / (hy * hy), max_relative = 1e-15);
        assert_relative_eq!(l.entry(i, g.flat_index([4, 5])), 1.0 / (hx * hx), max_relative = 1e-15);
        assert_relative_eq!(l.entry(i, g.flat_index([3, 6])), 1.0 / (hy * hy), max_relative = 1e-15);
        assert_eq!(l.entry(i, g.flat_index([4, 6])), 0.0);
    }

    #[test]
    fn dirichlet_1d_drops_ghosts() {
        let g = Grid::<f64>::new(&[10], &[1.0], Boundary::Dirichlet).unwrap();
        let h = g.spacing(0);
        let l = DiscreteOperator::assemble(&DiffusionTensorField::identity(g)).unwrap();
        assert_eq!(l.row(0).count(), 2);
        assert_eq!(l.entry(0, 0), -2.0 / (h * h));
        assert_eq!(l.entry(9, 9), -2.0 / (h * h));
    }

    #[test]
    fn ellipticity_failure_rejected() {
        let g = Grid::<f64>::periodic_1d(16, 1.0).unwrap();
        let q = DiffusionTensorField::constant(g, &[1.0], 2.0, 3.0).unwrap();
        assert!(matches!(
            DiscreteOperator::assemble(&q),
            Err(Error::NotElliptic { .. })
        ));
    }

    #[test]
    fn cross_stencil_is_symmetric_with_nine_points() {
        let g = Grid::<f64>::new(&[8, 8], &[1.0, 1.0], Boundary::Dirichlet).unwrap();
        let q = DiffusionTensorField::from_fn(g.clone(), 0.2, 4.0, |x| {
            let off = 0.3 * (x[0] + x[1]).cos();
            [[1.5 + 0.3 * x[0].sin(), off], [off, 1.2]]
        })
        .unwrap();
        let l = DiscreteOperator::assemble(&q).unwrap();
        assert!(!l.has_diagonal_q());
        let i = g.flat_index([3, 3]);
        assert_eq!(l.row(i).count(), 9);
        for r in 0..g.len() {
            for (c, v) in l.row(r) {
                assert_eq!(v.to_bits(), l.entry(c, r).to_bits());
            }
        }
    }
}
