//! Sparse linear algebra for lattice Laplacians: operator application,
//! (preconditioned) conjugate gradients, and an FFT Poisson preconditioner
//! for torus problems.
//!
//! The weighted Laplacian acts as (L f)(x) = sum_y omega_xy [f(y) - f(x)].
//! Dirichlet solves work with A = -L restricted to an interior mask (values
//! outside the mask are treated as fixed boundary data); torus solves work
//! with the singular -L on the zero-mean subspace.

use crate::env::Environment;
use crate::error::{RcmError, Result};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// y = (L f) over all vertices.
pub fn laplacian_apply(env: &Environment, f: &[f64], out: &mut [f64]) {
    let dom = env.domain();
    let n = dom.num_vertices();
    debug_assert_eq!(f.len(), n);
    out[..n].fill(0.0);
    for e in 0..env.edge_values().len() {
        let w = env.edge_values()[e];
        if w == 0.0 {
            continue;
        }
        let (v, u, _) = dom.edge_endpoints(e);
        let diff = f[u] - f[v];
        out[v] += w * diff;
        out[u] -= w * diff;
    }
}

/// y = (A f) with A = -L restricted to `interior` (f is read as 0 outside).
pub fn neg_laplacian_masked(env: &Environment, interior: &[bool], f: &[f64], out: &mut [f64]) {
    let dom = env.domain();
    let n = dom.num_vertices();
    out[..n].fill(0.0);
    for e in 0..env.edge_values().len() {
        let w = env.edge_values()[e];
        if w == 0.0 {
            continue;
        }
        let (v, u, _) = dom.edge_endpoints(e);
        let (iv, iu) = (interior[v], interior[u]);
        if !iv && !iu {
            continue;
        }
        let fv = if iv { f[v] } else { 0.0 };
        let fu = if iu { f[u] } else { 0.0 };
        let diff = fv - fu;
        if iv {
            out[v] += w * diff;
        }
        if iu {
            out[u] -= w * diff;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Preconditioned conjugate gradients with closures for A and M^-1.
///
/// `project` is applied to iterates and residuals for singular systems
/// (e.g. zero-mean on a torus component). Convergence is declared on the
/// 2-norm of the true residual falling below `tol_abs`.
#[allow(clippy::too_many_arguments)]
pub fn pcg<A, M, P>(
    apply_a: A,
    precond: Option<M>,
    project: Option<P>,
    b: &[f64],
    x: &mut [f64],
    tol_abs: f64,
    max_iter: usize,
) -> Result<SolveStats>
where
    A: Fn(&[f64], &mut [f64]),
    M: Fn(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];

    if let Some(proj) = &project {
        proj(x);
    }
    apply_a(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if let Some(proj) = &project {
        proj(&mut r);
    }

    let apply_m = |r: &[f64], z: &mut [f64]| {
        if let Some(m) = &precond {
            m(r, z);
        } else {
            z.copy_from_slice(r);
        }
    };

    apply_m(&r, &mut z);
    if let Some(proj) = &project {
        proj(&mut z);
    }
    p.copy_from_slice(&z);
    let mut rz = dot(&r, &z);
    let mut res = norm2(&r);
    let mut it = 0;

    while res > tol_abs && it < max_iter {
        apply_a(&p, &mut ap);
        if let Some(proj) = &project {
            proj(&mut ap);
        }
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break; // numerically singular direction; bail with current iterate
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        // periodically recompute the true residual to wash out drift
        if it % 64 == 0 {
            apply_a(x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            if let Some(proj) = &project {
                proj(&mut r);
            }
        }
        res = norm2(&r);
        if res <= tol_abs {
            break;
        }
        apply_m(&r, &mut z);
        if let Some(proj) = &project {
            proj(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    if res > tol_abs {
        return Err(RcmError::SolverDiverged {
            residual: res,
            iterations: it,
        });
    }
    Ok(SolveStats {
        iterations: it,
        residual: res,
    })
}

/// Subtract the mean over `mask` (all entries if mask is None).
pub fn project_zero_mean(x: &mut [f64], mask: Option<&[bool]>) {
    match mask {
        None => {
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            for v in x.iter_mut() {
                *v -= mean;
            }
        }
        Some(m) => {
            let cnt = m.iter().filter(|&&b| b).count();
            if cnt == 0 {
                return;
            }
            let mean = x
                .iter()
                .zip(m)
                .filter(|&(_, &b)| b)
                .map(|(v, _)| *v)
                .sum::<f64>()
                / cnt as f64;
            for (v, &b) in x.iter_mut().zip(m) {
                if b {
                    *v -= mean;
                } else {
                    *v = 0.0;
                }
            }
        }
    }
}

/// In-place d-dimensional complex FFT over a row-major grid (coordinate 0
/// most significant), one axis pass at a time. The inverse transform is
/// unnormalized (divide by the grid volume to invert).
pub fn fft_nd(data: &mut [Complex<f64>], sides: &[usize], forward: bool) {
    let mut planner = FftPlanner::new();
    let n: usize = sides.iter().product();
    debug_assert_eq!(data.len(), n);
    for axis in 0..sides.len() {
        let len = sides[axis];
        let stride: usize = sides[axis + 1..].iter().product();
        let plan = if forward {
            planner.plan_fft_forward(len)
        } else {
            planner.plan_fft_inverse(len)
        };
        let mut lane = vec![Complex::new(0.0, 0.0); len];
        let lanes = n / len;
        for lane_idx in 0..lanes {
            let outer = lane_idx / stride;
            let inner = lane_idx % stride;
            let base = outer * stride * len + inner;
            for k in 0..len {
                lane[k] = data[base + k * stride];
            }
            plan.process(&mut lane);
            for k in 0..len {
                data[base + k * stride] = lane[k];
            }
        }
    }
}

/// Solves c * (-L_unit) z = r on the torus in Fourier space (zero-mean
/// gauge). Used as a preconditioner: it reduces the condition number of
/// elliptic torus Laplacians to roughly the conductance contrast,
/// independent of the side length.
pub struct FftPoisson {
    sides: Vec<usize>,
    plans_fwd: Vec<Arc<dyn Fft<f64>>>,
    plans_inv: Vec<Arc<dyn Fft<f64>>>,
    /// per-axis one-dimensional symbols 2 - 2 cos(2 pi k / L)
    axis_symbols: Vec<Vec<f64>>,
    scale: f64,
}

impl FftPoisson {
    pub fn new(sides: &[u32], mean_conductance: f64) -> Self {
        let mut planner = FftPlanner::new();
        let sides_us: Vec<usize> = sides.iter().map(|&s| s as usize).collect();
        let plans_fwd = sides_us
            .iter()
            .map(|&s| planner.plan_fft_forward(s))
            .collect();
        let plans_inv = sides_us
            .iter()
            .map(|&s| planner.plan_fft_inverse(s))
            .collect();
        let axis_symbols = sides_us
            .iter()
            .map(|&s| {
                (0..s)
                    .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / s as f64).cos())
                    .collect()
            })
            .collect();
        FftPoisson {
            sides: sides_us,
            plans_fwd,
            plans_inv,
            axis_symbols,
            scale: mean_conductance.max(f64::MIN_POSITIVE),
        }
    }

    fn transform_axis(&self, data: &mut [Complex<f64>], axis: usize, forward: bool) {
        let n: usize = self.sides.iter().product();
        let len = self.sides[axis];
        let stride: usize = self.sides[axis + 1..].iter().product();
        let plan = if forward {
            &self.plans_fwd[axis]
        } else {
            &self.plans_inv[axis]
        };
        let mut lane = vec![Complex::new(0.0, 0.0); len];
        let lanes = n / len;
        for lane_idx in 0..lanes {
            // base index of this lane: insert the axis coordinate at `axis`
            let outer = lane_idx / stride;
            let inner = lane_idx % stride;
            let base = outer * stride * len + inner;
            for k in 0..len {
                lane[k] = data[base + k * stride];
            }
            plan.process(&mut lane);
            for k in 0..len {
                data[base + k * stride] = lane[k];
            }
        }
    }

    /// z = (c L_unit)^+ r with the zero mode projected out.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n: usize = self.sides.iter().product();
        debug_assert_eq!(r.len(), n);
        let mut buf: Vec<Complex<f64>> = r.iter().map(|&v| Complex::new(v, 0.0)).collect();
        for axis in 0..self.sides.len() {
            self.transform_axis(&mut buf, axis, true);
        }
        // divide by the symbol
        let d = self.sides.len();
        let mut idx = vec![0usize; d];
        for (flat, val) in buf.iter_mut().enumerate() {
            let mut rest = flat;
            for axis in (0..d).rev() {
                idx[axis] = rest % self.sides[axis];
                rest /= self.sides[axis];
            }
            let sym: f64 = (0..d).map(|a| self.axis_symbols[a][idx[a]]).sum();
            if sym == 0.0 {
                *val = Complex::new(0.0, 0.0);
            } else {
                *val /= self.scale * sym;
            }
        }
        for axis in 0..self.sides.len() {
            self.transform_axis(&mut buf, axis, false);
        }
        let norm = 1.0 / n as f64;
        for i in 0..n {
            z[i] = buf[i].re * norm;
        }
    }
}
