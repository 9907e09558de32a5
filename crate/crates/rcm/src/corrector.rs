//! Harmonic coordinates and correctors.
//!
//! The harmonic coordinate Psi deforms the geometric embedding so that the
//! walk becomes a martingale: L Psi = 0. On finite boxes it is the
//! coordinate-wise Dirichlet solve with positions pinned on the boundary;
//! on tori we compute the periodized corrector chi = Psi - x (periodic,
//! zero mean per coordinate), the minimizer of the Dirichlet energy of
//! x + chi. The homogenized diffusion matrix is the energy density of Psi:
//!
//!   q_ij = (1/|V|) sum_edges omega_e (e_i . dPsi_e)(e_j . dPsi_e),
//!
//! one term per undirected edge. Calibration on the homogeneous unit
//! environment gives q = identity; the variable-speed walk built from the
//! same environment has covariance 2 q t, and the discrete-time walk has
//! per-step covariance 2 q / mean(pi). Both constants are carried in the
//! result so downstream consumers cannot pick up stray factors of two.

use crate::domain::LatticeDomain;
use crate::env::Environment;
use crate::error::{RcmError, Result};
use crate::potential::{self, reachable, DirichletProblem, SolveMethod, CG_CAP};
use crate::solver::{self, FftPoisson};

/// One R^d value per vertex, stored per coordinate.
#[derive(Debug, Clone)]
pub struct VectorField {
    domain: LatticeDomain,
    pub components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn zeros(domain: LatticeDomain) -> Self {
        let d = domain.dimension();
        let n = domain.num_vertices();
        VectorField {
            domain,
            components: vec![vec![0.0; n]; d],
        }
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn value(&self, v: usize) -> Vec<f64> {
        self.components.iter().map(|c| c[v]).collect()
    }

    pub fn norm_at(&self, v: usize) -> f64 {
        self.components
            .iter()
            .map(|c| c[v] * c[v])
            .sum::<f64>()
            .sqrt()
    }
}

/// Harmonic embedding of a box environment: boundary vertices pinned at
/// their geometric positions, interior relaxed to L Psi = 0. `valid` marks
/// vertices carrying a meaningful position (pinned, or positive-pi interior
/// joined to the boundary); components cut off from the boundary are left
/// at zero and flagged invalid.
#[derive(Debug, Clone)]
pub struct HarmonicEmbedding {
    pub positions: VectorField,
    pub valid: Vec<bool>,
    pub residual: f64,
}

pub fn harmonic_embedding(env: &Environment, tol: f64) -> Result<HarmonicEmbedding> {
    let dom = env.domain();
    if dom.is_periodic() {
        return Err(RcmError::Geometry(
            "harmonic embedding pins a box boundary; use the periodized corrector on tori".into(),
        ));
    }
    let n = dom.num_vertices();
    let d = dom.dimension();
    let boundary: Vec<usize> = dom.outer_layer();
    let attached = reachable(env, &boundary, None);
    let mut interior = vec![false; n];
    let mut valid = vec![false; n];
    for v in 0..n {
        if dom.on_outer_layer(v) {
            valid[v] = true;
        } else if env.pi(v) > 0.0 && attached[v] {
            interior[v] = true;
            valid[v] = true;
        }
    }
    let mut positions = VectorField::zeros(dom.clone());
    let mut residual = 0.0f64;
    for axis in 0..d {
        let g: Vec<f64> = (0..n).map(|v| dom.to_coords(v)[axis] as f64).collect();
        let problem = DirichletProblem::new(env, interior.clone(), g)?;
        let out = potential::solve_dirichlet(env, &problem, SolveMethod::ConjugateGradient, tol)?;
        residual = residual.max(out.residual);
        positions.components[axis] = out.field.values;
    }
    // zero out the invalid vertices to keep entries finite and flagged
    for v in 0..n {
        if !valid[v] {
            for axis in 0..d {
                positions.components[axis][v] = 0.0;
            }
        }
    }
    Ok(HarmonicEmbedding {
        positions,
        valid,
        residual,
    })
}

/// Periodized corrector chi on a torus: solves L chi_i = -(L x_i) with
/// periodic chi and zero mean per coordinate on the working component,
/// equivalently minimizes the torus Dirichlet energy of x + chi.
pub fn periodized_corrector(env: &Environment, tol: f64) -> Result<VectorField> {
    let dom = env.domain();
    if !dom.is_periodic() {
        return Err(RcmError::Geometry("periodized corrector needs a torus".into()));
    }
    let n = dom.num_vertices();
    let d = dom.dimension();

    // working component: the largest positive-conductance cluster
    let labeling = crate::cluster::label_clusters(env);
    let comp_label = labeling
        .largest
        .ok_or_else(|| RcmError::Consistency("no positive edges on the torus".into()))?;
    let comp: Vec<bool> = (0..n)
        .map(|v| labeling.label[v] == Some(comp_label))
        .collect();
    let full = comp.iter().all(|&b| b);

    let mut chi = VectorField::zeros(dom.clone());
    for axis in 0..d {
        // b = (L x_axis)(v) = omega(v, v+e) - omega(v-e, v), so that
        // (-L) chi = b makes x + chi harmonic
        let mut b = vec![0.0; n];
        for v in 0..n {
            if comp[v] {
                b[v] = env.conductance(v, axis) - env.conductance_signed(v, axis, -1);
            }
        }
        // the forcing telescopes to zero on the component
        let total: f64 = b.iter().sum();
        let scale = b.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
        if total.abs() > 1e-9 * scale * n as f64 {
            return Err(RcmError::Consistency(format!(
                "corrector forcing has nonzero mean {total:.3e}"
            )));
        }
        let mut x = vec![0.0; n];
        let comp_mask = comp.clone();
        let project = move |v: &mut [f64]| solver::project_zero_mean(v, Some(&comp_mask));
        let target = tol * scale;
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
                &b,
                &mut x,
                target,
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
                &b,
                &mut x,
                target,
                CG_CAP,
            )?;
        }
        solver::project_zero_mean(&mut x, Some(&comp));
        chi.components[axis] = x;
    }
    Ok(chi)
}

/// Symmetric positive-semidefinite matrix of homogenized coefficients,
/// with the calibration constants relating it to walk covariances.
#[derive(Debug, Clone)]
pub struct DiffusionMatrix {
    pub q: Vec<Vec<f64>>,
    /// Torus average of pi.
    pub pi_mean: f64,
}

impl DiffusionMatrix {
    pub fn dimension(&self) -> usize {
        self.q.len()
    }

    /// Covariance per unit time of the variable-speed walk: 2 q.
    pub fn vsrw_covariance(&self) -> Vec<Vec<f64>> {
        self.q
            .iter()
            .map(|row| row.iter().map(|&x| 2.0 * x).collect())
            .collect()
    }

    /// Covariance per step of the discrete-time walk: 2 q / mean(pi).
    pub fn discrete_covariance(&self) -> Vec<Vec<f64>> {
        self.q
            .iter()
            .map(|row| row.iter().map(|&x| 2.0 * x / self.pi_mean).collect())
            .collect()
    }

    /// Smallest eigenvalue via cyclic Jacobi (d is tiny).
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dimension();
        let mut a: Vec<Vec<f64>> = self.q.clone();
        for _ in 0..50 {
            let (mut p, mut qi, mut big) = (0, 1, 0.0f64);
            for i in 0..d {
                for j in i + 1..d {
                    if a[i][j].abs() > big {
                        big = a[i][j].abs();
                        p = i;
                        qi = j;
                    }
                }
            }
            if d < 2 || big < 1e-14 {
                break;
            }
            let theta = 0.5 * (2.0 * a[p][qi]).atan2(a[p][p] - a[qi][qi]);
            let (c, s) = (theta.cos(), theta.sin());
            for k in 0..d {
                let (akp, akq) = (a[k][p], a[k][qi]);
                a[k][p] = c * akp + s * akq;
                a[k][qi] = -s * akp + c * akq;
            }
            for k in 0..d {
                let (apk, aqk) = (a[p][k], a[qi][k]);
                a[p][k] = c * apk + s * aqk;
                a[qi][k] = -s * apk + c * aqk;
            }
        }
        (0..d).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
    }
}

/// q from a solved corrector: per-edge increments of Psi = x + chi,
/// energy-averaged over the torus volume.
pub fn diffusion_matrix(env: &Environment, chi: &VectorField) -> Result<DiffusionMatrix> {
    let dom = env.domain();
    let d = dom.dimension();
    let n = dom.num_vertices();
    let mut q = vec![vec![0.0; d]; d];
    for e in 0..env.edge_values().len() {
        let w = env.edge_values()[e];
        if w == 0.0 {
            continue;
        }
        let (v, u, axis) = dom.edge_endpoints(e);
        // increment of Psi across the edge: the unit geometric step plus the
        // corrector difference
        let mut dpsi = vec![0.0; d];
        for i in 0..d {
            dpsi[i] = chi.components[i][u] - chi.components[i][v];
        }
        dpsi[axis] += 1.0;
        for i in 0..d {
            for j in 0..d {
                q[i][j] += w * dpsi[i] * dpsi[j];
            }
        }
    }
    for row in q.iter_mut() {
        for x in row.iter_mut() {
            *x /= n as f64;
        }
    }
    let pi_mean = env.pi_values().iter().sum::<f64>() / n as f64;
    let dm = DiffusionMatrix { q, pi_mean };
    if dm.min_eigenvalue() < -1e-10 {
        return Err(RcmError::Consistency("diffusion matrix not PSD".into()));
    }
    Ok(dm)
}

/// Per-direction lower bounds 2 / (mean(pi) mean(1/omega_i)) on the
/// discrete-time covariance diagonal, from the sample averages of the
/// environment. Directions with a zero conductance get bound 0.
pub fn nondegeneracy_lower_bound(env: &Environment) -> Vec<f64> {
    let dom = env.domain();
    let d = dom.dimension();
    let n = dom.num_vertices() as f64;
    let pi_mean = env.pi_values().iter().sum::<f64>() / n;
    let mut bounds = vec![0.0; d];
    for (axis, bound) in bounds.iter_mut().enumerate() {
        let mut inv_sum = 0.0;
        let mut count = 0usize;
        let mut degenerate = false;
        for e in 0..env.edge_values().len() {
            let (_, _, ax) = dom.edge_endpoints(e);
            if ax != axis {
                continue;
            }
            let w = env.edge_values()[e];
            if w == 0.0 {
                degenerate = true;
                break;
            }
            inv_sum += 1.0 / w;
            count += 1;
        }
        if !degenerate && count > 0 && pi_mean > 0.0 {
            let inv_mean = inv_sum / count as f64;
            *bound = 2.0 / (pi_mean * inv_mean);
        }
    }
    bounds
}

/// Per-radius sublinearity diagnostics of a corrector field.
#[derive(Debug, Clone)]
pub struct SublinearityDiagnostics {
    /// (n, max_{|x|<=n} |chi(x)| / n, fraction of the ball violating
    /// |chi| >= eps n).
    pub per_radius: Vec<(usize, f64, f64)>,
    /// Fraction of probed axis points that are (K, eps)-good.
    pub good_density_axes: f64,
    pub epsilon: f64,
    pub k_good: f64,
}

/// The three diagnostic curves behind the sublinearity analysis, read
/// exactly off a corrector field around `center` (l-infinity balls).
pub fn sublinearity_profile(
    field: &VectorField,
    center: usize,
    radii: &[usize],
    epsilon: f64,
    k_good: f64,
) -> SublinearityDiagnostics {
    let dom = field.domain();
    let c0 = dom.to_coords(center);
    let n = dom.num_vertices();
    let d = dom.dimension();
    let mut per_radius = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut max_norm = 0.0f64;
        let mut violations = 0usize;
        let mut count = 0usize;
        for v in 0..n {
            let c = dom.to_coords(v);
            let dist = c
                .iter()
                .zip(&c0)
                .zip(dom.sides())
                .map(|((&a, &b), &s)| {
                    let mut delta = (a - b).abs();
                    if dom.is_periodic() {
                        delta = delta.min(s as i64 - delta);
                    }
                    delta
                })
                .max()
                .unwrap_or(0);
            if dist as usize > r {
                continue;
            }
            count += 1;
            let norm = field.norm_at(v);
            max_norm = max_norm.max(norm);
            if norm >= epsilon * r as f64 {
                violations += 1;
            }
        }
        per_radius.push((
            r,
            max_norm / r as f64,
            violations as f64 / count.max(1) as f64,
        ));
    }

    // (K, eps)-good along the axes through the center
    let r_max = radii.iter().copied().max().unwrap_or(0) as i64;
    let max_step = |axis: usize| -> i64 {
        let s = dom.sides()[axis] as i64;
        if dom.is_periodic() {
            (s / 2).min(r_max)
        } else {
            r_max
        }
    };
    let mut axis_points = vec![center];
    for axis in 0..d {
        for sign in [1i64, -1] {
            let mut v = center;
            for _ in 0..max_step(axis) {
                match dom.neighbor(v, axis, sign) {
                    Some(w) => {
                        v = w;
                        axis_points.push(v);
                    }
                    None => break,
                }
            }
        }
    }
    let mut good = 0usize;
    let mut probed = 0usize;
    for &x in &axis_points {
        probed += 1;
        let base = field.value(x);
        let mut ok = true;
        'axes: for axis in 0..d {
            for sign in [1i64, -1] {
                let mut v = x;
                for m in 1..=max_step(axis) {
                    match dom.neighbor(v, axis, sign) {
                        Some(w) => {
                            v = w;
                            let mut diff2 = 0.0;
                            for i in 0..d {
                                let dd = field.components[i][v] - base[i];
                                diff2 += dd * dd;
                            }
                            if diff2.sqrt() > k_good + epsilon * m as f64 {
                                ok = false;
                                break 'axes;
                            }
                        }
                        None => break,
                    }
                }
            }
        }
        if ok {
            good += 1;
        }
    }
    SublinearityDiagnostics {
        per_radius,
        good_density_axes: good as f64 / probed.max(1) as f64,
        epsilon,
        k_good,
    }
}

/// Torus Dirichlet energy of the deformed embedding x + chi
/// (one term per undirected edge).
pub fn embedding_energy(env: &Environment, chi: &VectorField) -> f64 {
    let dom = env.domain();
    let d = dom.dimension();
    let mut energy = 0.0;
    for e in 0..env.edge_values().len() {
        let w = env.edge_values()[e];
        if w == 0.0 {
            continue;
        }
        let (v, u, axis) = dom.edge_endpoints(e);
        let mut norm2 = 0.0;
        for i in 0..d {
            let mut dd = chi.components[i][u] - chi.components[i][v];
            if i == axis {
                dd += 1.0;
            }
            norm2 += dd * dd;
        }
        energy += w * norm2;
    }
    energy
}

/// Explicit d=1 cycle corrector: Psi increments are C/omega_i with C the
/// cycle harmonic mean of the conductances, shifted to zero mean.
pub fn d1_cycle_corrector(env: &Environment) -> Result<Vec<f64>> {
    let dom = env.domain();
    if dom.dimension() != 1 || !dom.is_periodic() {
        return Err(RcmError::Geometry("needs a 1-dimensional torus".into()));
    }
    let l = dom.num_vertices();
    let inv_sum: f64 = env.edge_values().iter().map(|&w| 1.0 / w).sum();
    let c = l as f64 / inv_sum;
    let mut psi = vec![0.0; l];
    for v in 1..l {
        psi[v] = psi[v - 1] + c / env.edge_values()[v - 1];
    }
    let mut chi: Vec<f64> = (0..l).map(|v| psi[v] - v as f64).collect();
    let mean = chi.iter().sum::<f64>() / l as f64;
    for x in chi.iter_mut() {
        *x -= mean;
    }
    Ok(chi)
}
