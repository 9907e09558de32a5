//! Gaussian gradient fields coupled to random conductances.
//!
//! A height field phi conditioned on edge stiffnesses kappa is Gaussian with
//! covariance (-L_kappa)^{-1} on the gauge-fixed subspace; conditioned on
//! phi, each edge stiffness is drawn independently from the mixture rho
//! tilted by exp(-kappa eta^2 / 2) with eta the height difference across
//! the edge. Alternating the two conditionals gives the Gibbs chain whose
//! phi-marginal is the gradient measure of the non-convex potential
//! V(eta) = -log integral rho(d kappa) exp(-kappa eta^2 / 2).
//!
//! Field samples are exact (up to solver tolerance): with B the signed
//! incidence matrix and W = diag(omega), the vector y = B^T W^{1/2} z for
//! z ~ N(0, I_edges) has covariance -L, so phi = (-L)^+ y has covariance
//! (-L)^+ on the gauge subspace.

use crate::domain::LatticeDomain;
use crate::env::Environment;
use crate::error::{RcmError, Result};
use crate::potential::{self, DirichletProblem, SolveMethod, CG_CAP};
use crate::rng::{self, tag};
use crate::solver::{self, FftPoisson};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Finitely many stiffness atoms kappa_i > 0 with weights summing to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub kappas: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MixtureSpec {
    pub fn new(kappas: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if kappas.is_empty() || kappas.len() != weights.len() {
            return Err(RcmError::invalid("mixture", "atom/weight length mismatch"));
        }
        if kappas.iter().any(|&k| !(k > 0.0) || !k.is_finite()) {
            return Err(RcmError::invalid("mixture.kappas", "atoms must be positive"));
        }
        if weights.iter().any(|&p| !(p >= 0.0)) {
            return Err(RcmError::invalid("mixture.weights", "weights must be >= 0"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(RcmError::invalid("mixture.weights", "weights must sum to 1"));
        }
        Ok(MixtureSpec { kappas, weights })
    }

    pub fn two_point(k1: f64, p1: f64, k2: f64) -> Result<Self> {
        MixtureSpec::new(vec![k1, k2], vec![p1, 1.0 - p1])
    }

    /// Tilted atom probabilities p_i exp(-kappa_i eta^2/2), normalized:
    /// the conditional law of an edge stiffness given its gradient.
    /// At eta = 0 the tilt disappears and the prior is returned exactly.
    pub fn posterior(&self, eta: f64) -> Vec<f64> {
        if eta == 0.0 {
            return self.weights.clone();
        }
        let e2 = 0.5 * eta * eta;
        // subtract the max exponent before exponentiating
        let logs: Vec<f64> = self
            .kappas
            .iter()
            .zip(&self.weights)
            .map(|(&k, &p)| if p > 0.0 { p.ln() - k * e2 } else { f64::NEG_INFINITY })
            .collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|&l| (l - m).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }

    pub fn sample_kappa(&self, eta: f64, u: f64) -> f64 {
        let post = self.posterior(eta);
        let mut acc = 0.0;
        for (i, &p) in post.iter().enumerate() {
            acc += p;
            if u < acc {
                return self.kappas[i];
            }
        }
        *self.kappas.last().expect("nonempty mixture")
    }
}

/// V(eta) = -log sum_i p_i exp(-kappa_i eta^2 / 2): even, V(0) = 0,
/// increasing on positive eta.
pub fn potential_eval(spec: &MixtureSpec, eta: f64) -> f64 {
    let e2 = 0.5 * eta * eta;
    let logs: Vec<f64> = spec
        .kappas
        .iter()
        .zip(&spec.weights)
        .map(|(&k, &p)| if p > 0.0 { p.ln() - k * e2 } else { f64::NEG_INFINITY })
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|&l| (l - m).exp()).sum();
    -(m + z.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    /// phi(vertex) = 0 exactly.
    Pinned(usize),
    /// Mean of phi over the working component is 0.
    ZeroMean,
}

#[derive(Debug, Clone)]
pub struct GradientField {
    domain: LatticeDomain,
    pub heights: Vec<f64>,
    pub gauge: Gauge,
}

impl GradientField {
    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }
}

/// Edge noise y = B^T W^{1/2} z restricted to `mask` (all vertices if None).
fn edge_noise(env: &Environment, mask: Option<&[bool]>, rng: &mut impl Rng) -> Vec<f64> {
    let dom = env.domain();
    let n = dom.num_vertices();
    let mut y = vec![0.0; n];
    for e in 0..env.edge_values().len() {
        let w = env.edge_values()[e];
        if w == 0.0 {
            continue;
        }
        let (v, u, _) = dom.edge_endpoints(e);
        let keep_v = mask.map_or(true, |m| m[v]);
        let keep_u = mask.map_or(true, |m| m[u]);
        if !keep_v && !keep_u {
            continue;
        }
        let z: f64 = rng.sample(StandardNormal);
        let s = w.sqrt() * z;
        if keep_v {
            y[v] += s;
        }
        if keep_u {
            y[u] -= s;
        }
    }
    y
}

/// Exact Gaussian sample with covariance (-L)^{-1} in the requested gauge,
/// via one linear solve against independent edge noise.
pub fn sample_gaussian_field(
    env: &Environment,
    seed: u64,
    gauge: Gauge,
    tol: f64,
) -> Result<GradientField> {
    sample_gaussian_field_indexed(env, seed, 0, gauge, tol)
}

/// Like [`sample_gaussian_field`] with an explicit draw index, so batches of
/// independent fields can share one seed.
pub fn sample_gaussian_field_indexed(
    env: &Environment,
    seed: u64,
    index: u64,
    gauge: Gauge,
    tol: f64,
) -> Result<GradientField> {
    let dom = env.domain();
    let n = dom.num_vertices();
    let mut stream = rng::stream(seed, tag::FIELD_NOISE, index);
    match gauge {
        Gauge::Pinned(v0) => {
            if v0 >= n || env.pi(v0) <= 0.0 {
                return Err(RcmError::DegenerateVertex { vertex: v0 });
            }
            let comp = potential::reachable(env, &[v0], None);
            let mut mask = comp.clone();
            mask[v0] = false;
            let y = edge_noise(env, Some(&mask), &mut stream);
            let mut x = vec![0.0; n];
            let pi: Vec<f64> = env.pi_values().to_vec();
            let mask2 = mask.clone();
            solver::pcg(
                |f: &[f64], out: &mut [f64]| solver::neg_laplacian_masked(env, &mask2, f, out),
                Some(|r: &[f64], z: &mut [f64]| {
                    for i in 0..r.len() {
                        z[i] = if mask[i] { r[i] / pi[i] } else { 0.0 };
                    }
                }),
                None::<fn(&mut [f64])>,
                &y,
                &mut x,
                tol,
                CG_CAP,
            )?;
            x[v0] = 0.0;
            Ok(GradientField {
                domain: dom.clone(),
                heights: x,
                gauge,
            })
        }
        Gauge::ZeroMean => {
            let labeling = crate::cluster::label_clusters(env);
            let lab = labeling
                .largest
                .ok_or_else(|| RcmError::Consistency("no positive edges".into()))?;
            let comp: Vec<bool> = (0..n).map(|v| labeling.label[v] == Some(lab)).collect();
            let full = comp.iter().all(|&b| b) && dom.is_periodic();
            let y = {
                let mut y = edge_noise(env, Some(&comp), &mut stream);
                solver::project_zero_mean(&mut y, Some(&comp));
                y
            };
            let mut x = vec![0.0; n];
            let comp_mask = comp.clone();
            let project = move |v: &mut [f64]| solver::project_zero_mean(v, Some(&comp_mask));
            if full {
                let mean_c =
                    env.edge_values().iter().sum::<f64>() / env.edge_values().len() as f64;
                let fft = FftPoisson::new(dom.sides(), mean_c);
                solver::pcg(
                    |f: &[f64], out: &mut [f64]| {
                        solver::laplacian_apply(env, f, out);
                        for v in out.iter_mut() {
                            *v = -*v;
                        }
                    },
                    Some(|r: &[f64], z: &mut [f64]| fft.apply(r, z)),
                    Some(project),
                    &y,
                    &mut x,
                    tol,
                    CG_CAP,
                )?;
            } else {
                let pi: Vec<f64> = env.pi_values().to_vec();
                let comp2 = comp.clone();
                solver::pcg(
                    |f: &[f64], out: &mut [f64]| solver::neg_laplacian_masked(env, &comp2, f, out),
                    Some(move |r: &[f64], z: &mut [f64]| {
                        for i in 0..r.len() {
                            z[i] = if pi[i] > 0.0 { r[i] / pi[i] } else { 0.0 };
                        }
                    }),
                    Some(project),
                    &y,
                    &mut x,
                    tol,
                    CG_CAP,
                )?;
            }
            solver::project_zero_mean(&mut x, Some(&comp));
            Ok(GradientField {
                domain: dom.clone(),
                heights: x,
                gauge,
            })
        }
    }
}

/// Exact quadratic form <c, (-L)^+ c> of a zero-sum coefficient vector:
/// the variance of sum_x c_x phi_x under any gauge of the field.
pub fn functional_variance(env: &Environment, coeffs: &[f64], tol: f64) -> Result<f64> {
    let n = env.num_vertices();
    if coeffs.len() != n {
        return Err(RcmError::Consistency("coefficient length".into()));
    }
    let total: f64 = coeffs.iter().sum();
    let scale = coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1e-300);
    if total.abs() > 1e-9 * scale * n as f64 {
        return Err(RcmError::Consistency("coefficients must sum to zero".into()));
    }
    let dom = env.domain();
    let labeling = crate::cluster::label_clusters(env);
    let lab = labeling
        .largest
        .ok_or_else(|| RcmError::Consistency("no positive edges".into()))?;
    let comp: Vec<bool> = (0..n).map(|v| labeling.label[v] == Some(lab)).collect();
    for v in 0..n {
        if !comp[v] && coeffs[v] != 0.0 {
            return Err(RcmError::Consistency(
                "coefficients supported off the working component".into(),
            ));
        }
    }
    let mut x = vec![0.0; n];
    let comp_mask = comp.clone();
    let project = move |v: &mut [f64]| solver::project_zero_mean(v, Some(&comp_mask));
    let full = comp.iter().all(|&b| b) && dom.is_periodic();
    if full {
        let mean_c = env.edge_values().iter().sum::<f64>() / env.edge_values().len() as f64;
        let fft = FftPoisson::new(dom.sides(), mean_c);
        solver::pcg(
            |f: &[f64], out: &mut [f64]| {
                solver::laplacian_apply(env, f, out);
                for v in out.iter_mut() {
                    *v = -*v;
                }
            },
            Some(|r: &[f64], z: &mut [f64]| fft.apply(r, z)),
            Some(project),
            coeffs,
            &mut x,
            tol * scale,
            CG_CAP,
        )?;
    } else {
        let pi: Vec<f64> = env.pi_values().to_vec();
        let comp2 = comp.clone();
        solver::pcg(
            |f: &[f64], out: &mut [f64]| solver::neg_laplacian_masked(env, &comp2, f, out),
            Some(move |r: &[f64], z: &mut [f64]| {
                for i in 0..r.len() {
                    z[i] = if pi[i] > 0.0 { r[i] / pi[i] } else { 0.0 };
                }
            }),
            Some(project),
            coeffs,
            &mut x,
            tol * scale,
            CG_CAP,
        )?;
    }
    Ok(solver::dot(coeffs, &x))
}

// ---------------------------------------------------------------------------
// Gibbs chain
// ---------------------------------------------------------------------------

/// Alternating sampler for the extended measure on (phi, kappa) over a box
/// with pinned boundary heights: a sweep draws every edge stiffness from its
/// tilted mixture posterior given the current gradients, then resamples the
/// interior heights as the Gaussian conditioned on kappa and the boundary.
pub struct GibbsChain {
    domain: LatticeDomain,
    spec: MixtureSpec,
    pub kappa: Vec<f64>,
    pub phi: Vec<f64>,
    boundary: Vec<f64>,
    seed: u64,
    sweeps_done: u64,
    tol: f64,
}

impl GibbsChain {
    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    /// Start from the mixture mean stiffness on every edge and the harmonic
    /// extension of the boundary heights.
    pub fn new(
        domain: LatticeDomain,
        spec: MixtureSpec,
        boundary_heights: Vec<f64>,
        seed: u64,
        tol: f64,
    ) -> Result<Self> {
        if domain.is_periodic() {
            return Err(RcmError::Geometry("the Gibbs chain runs on a pinned box".into()));
        }
        let n = domain.num_vertices();
        if boundary_heights.len() != n {
            return Err(RcmError::Consistency("boundary height length".into()));
        }
        let k_mean: f64 = spec
            .kappas
            .iter()
            .zip(&spec.weights)
            .map(|(&k, &p)| k * p)
            .sum();
        let kappa = vec![k_mean; domain.num_edges()];
        let mut chain = GibbsChain {
            domain,
            spec,
            kappa,
            phi: boundary_heights.clone(),
            boundary: boundary_heights,
            seed,
            sweeps_done: 0,
            tol,
        };
        chain.resample_phi()?;
        Ok(chain)
    }

    fn kappa_env(&self) -> Result<Environment> {
        Environment::from_edge_values(self.domain.clone(), self.kappa.clone())
    }

    /// One alternating sweep: all kappa, then phi.
    pub fn sweep(&mut self) -> Result<()> {
        self.sweeps_done += 1;
        let mut stream = rng::stream(self.seed, tag::GIBBS_KAPPA, self.sweeps_done);
        for e in 0..self.kappa.len() {
            let (v, u, _) = self.domain.edge_endpoints(e);
            let eta = self.phi[v] - self.phi[u];
            let draw: f64 = stream.gen();
            self.kappa[e] = self.spec.sample_kappa(eta, draw);
        }
        self.resample_phi()
    }

    /// Conditional Gaussian given kappa and the boundary: mean solves the
    /// Dirichlet problem, fluctuation is the zero-boundary field.
    fn resample_phi(&mut self) -> Result<()> {
        let env = self.kappa_env()?;
        let n = self.domain.num_vertices();
        let interior: Vec<bool> = (0..n).map(|v| !self.domain.on_outer_layer(v)).collect();
        let problem = DirichletProblem::new(&env, interior.clone(), self.boundary.clone())?;
        let mean = potential::solve_dirichlet(&env, &problem, SolveMethod::ConjugateGradient, self.tol)?;

        let mut stream = rng::stream(self.seed, tag::FIELD_NOISE, self.sweeps_done);
        let y = edge_noise(&env, Some(&interior), &mut stream);
        let mut fluct = vec![0.0; n];
        let pi: Vec<f64> = env.pi_values().to_vec();
        let interior2 = interior.clone();
        solver::pcg(
            |f: &[f64], out: &mut [f64]| solver::neg_laplacian_masked(&env, &interior2, f, out),
            Some(|r: &[f64], z: &mut [f64]| {
                for i in 0..r.len() {
                    z[i] = if interior[i] && pi[i] > 0.0 { r[i] / pi[i] } else { 0.0 };
                }
            }),
            None::<fn(&mut [f64])>,
            &y,
            &mut fluct,
            self.tol,
            CG_CAP,
        )?;
        for v in 0..n {
            self.phi[v] = mean.field.values[v] + fluct[v];
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// scaling functionals
// ---------------------------------------------------------------------------

/// phi_eps(f) = eps^{1+d/2} sum_x phi_x c_x where c are the lattice cell
/// averages of f(eps .), recentered to sum exactly to zero.
pub fn phi_epsilon(field: &GradientField, cell_averages: &[f64], eps: f64) -> Result<f64> {
    let n = field.heights.len();
    if cell_averages.len() != n {
        return Err(RcmError::Consistency("cell average length".into()));
    }
    let d = field.domain.dimension() as f64;
    let mean = cell_averages.iter().sum::<f64>() / n as f64;
    let mut acc = 0.0;
    for v in 0..n {
        acc += field.heights[v] * (cell_averages[v] - mean);
    }
    Ok(eps.powf(1.0 + d / 2.0) * acc)
}

/// sigma_f^2 = <f, (-Q)^{-1} f> on the periodic box of macroscopic side S,
/// evaluated by Fourier series on the given grid with the k = 0 mode
/// excluded (zero-mean f). Q = sum_ij q_ij d_i d_j.
pub fn gff_variance_target(
    f_grid: &[f64],
    grid_sides: &[usize],
    box_len: f64,
    q: &[Vec<f64>],
) -> Result<f64> {
    fourier_green_pairing(f_grid, f_grid, grid_sides, box_len, q)
}

/// <g, (-Q)^{-1} f> on the periodic box, by the same Fourier sum
/// (specializes to the variance target at g = f).
pub fn fourier_green_pairing(
    f_grid: &[f64],
    g_grid: &[f64],
    grid_sides: &[usize],
    box_len: f64,
    q: &[Vec<f64>],
) -> Result<f64> {
    let n: usize = grid_sides.iter().product();
    if f_grid.len() != n || g_grid.len() != n {
        return Err(RcmError::Consistency("grid length mismatch".into()));
    }
    let d = grid_sides.len();
    if q.len() != d {
        return Err(RcmError::Consistency("diffusion matrix dimension".into()));
    }
    let mut fh: Vec<Complex<f64>> = f_grid.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut gh: Vec<Complex<f64>> = g_grid.iter().map(|&v| Complex::new(v, 0.0)).collect();
    solver::fft_nd(&mut fh, grid_sides, true);
    solver::fft_nd(&mut gh, grid_sides, true);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut acc = 0.0;
    let mut idx = vec![0usize; d];
    for flat in 0..n {
        let mut rest = flat;
        for axis in (0..d).rev() {
            idx[axis] = rest % grid_sides[axis];
            rest /= grid_sides[axis];
        }
        if idx.iter().all(|&m| m == 0) {
            continue;
        }
        // signed frequency and k . q k
        let k: Vec<f64> = (0..d)
            .map(|a| {
                let m = idx[a];
                let s = grid_sides[a];
                let signed = if m <= s / 2 { m as i64 } else { m as i64 - s as i64 };
                two_pi * signed as f64 / box_len
            })
            .collect();
        let mut kqk = 0.0;
        for i in 0..d {
            for j in 0..d {
                kqk += k[i] * q[i][j] * k[j];
            }
        }
        if kqk <= 0.0 {
            return Err(RcmError::Consistency("singular diffusion matrix".into()));
        }
        acc += (gh[flat].conj() * fh[flat]).re / kqk;
    }
    // a_m = DFT_m / N^d and the pairing carries S^d
    let nv = n as f64;
    Ok(box_len.powi(d as i32) * acc / (nv * nv))
}
