//! Lowest eigenpair by single-vector LOBPCG with a fast kinetic preconditioner.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use rustdct::{Dst1, DctPlanner};

use super::grid::DiscreteOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Stop when `‖Hv − Ev‖ < tol · max(|E|, 1)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    /// False when `max_iter` ran out; `energy` is then the best estimate.
    pub converged: bool,
    pub vector: Vec<Complex64>,
}

/// Inverse of `K + σ`, `K` the Dirichlet five-point kinetic operator,
/// diagonalized by a two-dimensional DST-I.
struct KineticPreconditioner {
    nx: usize,
    ny: usize,
    dst_x: Arc<dyn Dst1<f64>>,
    dst_y: Arc<dyn Dst1<f64>>,
    /// `1/(K + σ)` in the transposed (y-major) layout, including the transform normalization.
    inv: Vec<f64>,
}

impl KineticPreconditioner {
    fn new(op: &DiscreteOperator, sigma: f64) -> Self {
        let (nx, ny) = (op.grid.nx, op.grid.ny);
        let h2 = op.grid.h * op.grid.h;
        let mut planner = DctPlanner::new();
        let lam = |k: usize, n: usize| {
            (2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos()) / h2
        };
        let lx: Vec<f64> = (0..nx).map(|k| lam(k, nx)).collect();
        let ly: Vec<f64> = (0..ny).map(|k| lam(k, ny)).collect();
        let scale = 4.0 / ((nx + 1) * (ny + 1)) as f64;
        let inv_2m = 0.5 / op.reduced_mass;
        let mut inv = vec![0.0; nx * ny];
        for (j, row) in inv.chunks_mut(nx).enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                *v = scale / (inv_2m * (lx[i] + ly[j]) + sigma);
            }
        }
        Self {
            nx,
            ny,
            dst_x: planner.plan_dst1(nx),
            dst_y: planner.plan_dst1(ny),
            inv,
        }
    }

    fn rows(dst: &Arc<dyn Dst1<f64>>, data: &mut [f64], len: usize) {
        data.par_chunks_mut(len).for_each_init(
            || vec![0.0; dst.get_scratch_len()],
            |scratch, row| {
                // some DST-I plans read the scratch before writing it
                scratch.fill(0.0);
                dst.process_dst1_with_scratch(row, scratch)
            },
        );
    }

    fn transpose(src: &[f64], dst: &mut [f64], rows: usize, cols: usize) {
        dst.par_chunks_mut(rows).enumerate().for_each(|(c, out)| {
            for (r, v) in out.iter_mut().enumerate() {
                *v = src[r * cols + c];
            }
        });
    }

    fn apply_real(&self, data: &mut [f64], work: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        Self::rows(&self.dst_y, data, ny);
        Self::transpose(data, work, nx, ny);
        Self::rows(&self.dst_x, work, nx);
        work.par_iter_mut().zip(&self.inv).for_each(|(v, s)| *v *= s);
        Self::rows(&self.dst_x, work, nx);
        Self::transpose(work, data, ny, nx);
        Self::rows(&self.dst_y, data, ny);
    }

    fn apply(&self, v: &mut [Complex64]) {
        let n = v.len();
        let mut re: Vec<f64> = v.iter().map(|c| c.re).collect();
        let mut im: Vec<f64> = v.iter().map(|c| c.im).collect();
        let mut work = vec![0.0; n];
        self.apply_real(&mut re, &mut work);
        self.apply_real(&mut im, &mut work);
        for (k, c) in v.iter_mut().enumerate() {
            *c = Complex64::new(re[k], im[k]);
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.par_iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.par_iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `a −= s·b`.
fn axpy(a: &mut [Complex64], s: Complex64, b: &[Complex64]) {
    a.par_iter_mut().zip(b).for_each(|(x, y)| *x -= s * y);
}

fn scale(a: &mut [Complex64], s: f64) {
    a.par_iter_mut().for_each(|x| *x *= s);
}

fn parallel_apply(op: &DiscreteOperator, v: &[Complex64], out: &mut [Complex64]) {
    let ny = op.grid.ny;
    let nx = op.grid.nx;
    out.par_chunks_mut(ny).enumerate().for_each(|(i, row)| {
        let ly = op.link_y[i];
        let lyc = ly.conj();
        let base = i * ny;
        for (j, o) in row.iter_mut().enumerate() {
            let k = base + j;
            let lx = op.link_x[j];
            let mut acc = v[k] * op.diag[k];
            if i + 1 < nx {
                acc += lx * v[k + ny];
            }
            if i > 0 {
                acc += lx.conj() * v[k - ny];
            }
            if j + 1 < ny {
                acc += ly * v[k + 1];
            }
            if j > 0 {
                acc += lyc * v[k - 1];
            }
            *o = acc;
        }
    });
}

/// Orthonormalize `v` (with its image `hv`) against the orthonormal `basis`,
/// two Gram–Schmidt passes. Returns false when `v` is numerically dependent.
fn orthonormalize(v: &mut [Complex64], hv: &mut [Complex64], basis: &[(&[Complex64], &[Complex64])]) -> bool {
    let n0 = norm(v);
    if n0 == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for (b, hb) in basis {
            let c = dot(b, v);
            axpy(v, c, b);
            axpy(hv, c, hb);
        }
    }
    let n = norm(v);
    if n < 1e-10 * n0 {
        return false;
    }
    scale(v, 1.0 / n);
    scale(hv, 1.0 / n);
    true
}

/// Gaussian centered at `(x0, 0)` with width `s`.
pub fn gaussian_start(op: &DiscreteOperator, x0: f64, s: f64) -> Vec<Complex64> {
    let g = &op.grid;
    let mut v = vec![Complex64::default(); g.len()];
    for i in 0..g.nx {
        for j in 0..g.ny {
            let r2 = (g.x(i) - x0).powi(2) + g.y(j).powi(2);
            v[i * g.ny + j] = Complex64::new((-0.5 * r2 / (s * s)).exp(), 0.0);
        }
    }
    v
}

/// Lowest eigenpair of `op`, starting from `start`.
pub fn ground_state(op: &DiscreteOperator, start: Vec<Complex64>, opts: &EigenOptions) -> GroundState {
    let n = op.len();
    let mut x = start;
    let nx0 = norm(&x);
    scale(&mut x, 1.0 / nx0);
    let mut hx = vec![Complex64::default(); n];
    parallel_apply(op, &x, &mut hx);
    let lambda = dot(&x, &hx).re;

    // kinetic energy of the start vector sets the preconditioner shift
    let kin = {
        let t = 0.5 / (op.reduced_mass * op.grid.h * op.grid.h);
        let mut k = 0.0;
        let ny = op.grid.ny;
        for i in 0..op.grid.nx {
            for j in 0..ny {
                let a = i * ny + j;
                let mut lap = 4.0 * x[a];
                if i + 1 < op.grid.nx {
                    lap -= x[a + ny];
                }
                if i > 0 {
                    lap -= x[a - ny];
                }
                if j + 1 < ny {
                    lap -= x[a + 1];
                }
                if j > 0 {
                    lap -= x[a - 1];
                }
                k += (x[a].conj() * lap).re * t;
            }
        }
        k
    };
    let precond = KineticPreconditioner::new(op, kin.max(1e-3));
    ground_state_with(op, x, hx, lambda, &precond, opts)
}

fn ground_state_with(
    op: &DiscreteOperator,
    mut x: Vec<Complex64>,
    mut hx: Vec<Complex64>,
    mut lambda: f64,
    precond: &KineticPreconditioner,
    opts: &EigenOptions,
) -> GroundState {
    let n = op.len();

    let mut p: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    let mut w = vec![Complex64::default(); n];
    let mut hw = vec![Complex64::default(); n];
    let mut residual = f64::INFINITY;
    for iter in 0..opts.max_iter {
        w.par_iter_mut()
            .zip(&hx)
            .zip(&x)
            .for_each(|((r, hxv), xv)| *r = hxv - lambda * xv);
        residual = norm(&w);
        if residual < opts.tol * lambda.abs().max(1.0) {
            return GroundState {
                energy: lambda,
                residual,
                iterations: iter,
                converged: true,
                vector: x,
            };
        }
        precond.apply(&mut w);

        let mut basis_p = None;
        if let Some((mut pv, mut hp)) = p.take() {
            if orthonormalize(&mut pv, &mut hp, &[(&x, &hx)]) {
                basis_p = Some((pv, hp));
            }
        }
        // orthogonalize w before applying H so Hw costs one matvec
        let mut wn = norm(&w);
        if wn == 0.0 {
            break;
        }
        scale(&mut w, 1.0 / wn);
        for _ in 0..2 {
            let c = dot(&x, &w);
            axpy(&mut w, c, &x);
            if let Some((pv, _)) = &basis_p {
                let c = dot(pv, &w);
                axpy(&mut w, c, pv);
            }
        }
        wn = norm(&w);
        if wn < 1e-12 {
            break;
        }
        scale(&mut w, 1.0 / wn);
        parallel_apply(op, &w, &mut hw);

        let mut vecs: Vec<(&[Complex64], &[Complex64])> = vec![(&x, &hx), (&w, &hw)];
        if let Some((pv, hp)) = &basis_p {
            vecs.push((pv, hp));
        }
        let m = vecs.len();
        let mut g = DMatrix::<Complex64>::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let v = dot(vecs[a].0, vecs[b].1);
                g[(a, b)] = v;
                g[(b, a)] = v.conj();
            }
        }
        // shift by the current estimate so tiny corrections to x survive the
        // eigenvector computation instead of cancelling against G[0,0]
        for a in 0..m {
            g[(a, a)] = Complex64::new(g[(a, a)].re - lambda, 0.0);
        }
        let eig = SymmetricEigen::new(g);
        let (k, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty Ritz basis");
        let c: Vec<Complex64> = (0..m).map(|a| eig.eigenvectors[(a, k)]).collect();

        // new search direction: the non-x part of the Ritz vector
        let mut pv = vec![Complex64::default(); n];
        let mut hp = vec![Complex64::default(); n];
        for a in 1..m {
            let (v, hv) = vecs[a];
            pv.par_iter_mut()
                .zip(hp.par_iter_mut())
                .zip(v.par_iter().zip(hv))
                .for_each(|((pp, hpp), (vv, hvv))| {
                    *pp += c[a] * vv;
                    *hpp += c[a] * hvv;
                });
        }
        x.par_iter_mut()
            .zip(hx.par_iter_mut())
            .zip(pv.par_iter().zip(&hp))
            .for_each(|((xx, hxx), (pp, hpp))| {
                *xx = c[0] * *xx + pp;
                *hxx = c[0] * *hxx + hpp;
            });
        let nx = norm(&x);
        scale(&mut x, 1.0 / nx);
        scale(&mut hx, 1.0 / nx);
        lambda = dot(&x, &hx).re;
        p = Some((pv, hp));

        // refresh Hx periodically to stop recurrence drift
        if iter % 25 == 24 {
            parallel_apply(op, &x, &mut hx);
            lambda = dot(&x, &hx).re;
        }
    }
    GroundState {
        energy: lambda,
        residual,
        iterations: opts.max_iter,
        converged: false,
        vector: x,
    }
}
