//! Lattice Cauchy problem against its homogenized limit.
//!
//! The temperature profile evolves by du/dt = L u on the lattice of spacing
//! eps, started from cell averages of a macroscopic profile f. Under
//! diffusive rescaling it approaches the constant-coefficient solution
//! \bar u(t,x) = E f(x + B_t) with B_t the Brownian motion of covariance
//! 2 q t (the calibration carried by the diffusion matrix). Experiments run
//! on a macroscopic torus, so the homogenized kernel is the wrapped
//! Gaussian. The rescaled resolvent pairing
//! <g_eps, (-L)^{-1} f_eps> with f_eps(x) = eps^{d/2+1} f(x eps) is computed
//! by a lattice Poisson solve and compared against the Fourier-space target
//! <g, (-Q)^{-1} f>.
//!
//! Profiles live on the centered macroscopic box [-S/2, S/2)^d; lattice
//! vertex x maps to the cell eps*(x - center) + [0, eps)^d.

use crate::corrector::DiffusionMatrix;
use crate::domain::LatticeDomain;
use crate::env::{build_environment, Environment, EnvironmentLaw};
use crate::error::{RcmError, Result};
use crate::gradfield;
use crate::heatkernel;
use crate::potential::ScalarField;
use crate::rng::{self, tag};
use crate::solver;
use crate::stats;
use crate::walk;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Macroscopic test profile on R^d (compact support inside the working box).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MacroscopicProfile {
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
    },
    /// amplitude at center1 minus amplitude at center2: zero total integral.
    GaussianDipole {
        center1: Vec<f64>,
        center2: Vec<f64>,
        width: f64,
        amplitude: f64,
    },
    /// Cell-constant values over an N^d grid spanning the centered box.
    Grid { values: Vec<f64>, sides: Vec<usize>, box_len: f64 },
}

impl MacroscopicProfile {
    pub fn dimension(&self) -> usize {
        match self {
            MacroscopicProfile::GaussianBump { center, .. } => center.len(),
            MacroscopicProfile::GaussianDipole { center1, .. } => center1.len(),
            MacroscopicProfile::Grid { sides, .. } => sides.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            MacroscopicProfile::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            MacroscopicProfile::GaussianDipole {
                center1,
                center2,
                width,
                amplitude,
            } => {
                let r1: f64 = x.iter().zip(center1).map(|(a, c)| (a - c) * (a - c)).sum();
                let r2: f64 = x.iter().zip(center2).map(|(a, c)| (a - c) * (a - c)).sum();
                amplitude
                    * ((-r1 / (2.0 * width * width)).exp() - (-r2 / (2.0 * width * width)).exp())
            }
            MacroscopicProfile::Grid {
                values,
                sides,
                box_len,
            } => {
                let d = sides.len();
                let h = box_len / sides[0] as f64;
                let mut idx = 0usize;
                for a in 0..d {
                    let pos = (x[a] + box_len / 2.0) / h;
                    let c = pos.floor() as i64;
                    if c < 0 || c >= sides[a] as i64 {
                        return 0.0;
                    }
                    idx = idx * sides[a] + c as usize;
                }
                values[idx]
            }
        }
    }

    /// Total integral over R^d (closed form for the Gaussian kinds).
    pub fn integral(&self) -> f64 {
        let d = self.dimension();
        let gauss_mass = |width: f64| (2.0 * std::f64::consts::PI).powf(d as f64 / 2.0) * width.powi(d as i32);
        match self {
            MacroscopicProfile::GaussianBump {
                width, amplitude, ..
            } => amplitude * gauss_mass(*width),
            MacroscopicProfile::GaussianDipole { .. } => 0.0,
            MacroscopicProfile::Grid {
                values,
                sides,
                box_len,
            } => {
                let h = box_len / sides[0] as f64;
                values.iter().sum::<f64>() * h.powi(sides.len() as i32)
            }
        }
    }
}

/// Cell averages of the profile over the lattice cells of spacing eps
/// (4-point Gauss-Legendre per axis; exact to rounding for the smooth
/// profiles used here).
pub fn cell_averages(profile: &MacroscopicProfile, domain: &LatticeDomain, eps: f64) -> Vec<f64> {
    let d = domain.dimension();
    // Gauss-Legendre nodes/weights on [0,1]
    let nodes = [
        0.5 - 0.43056815579702629_f64,
        0.5 - 0.16999052179242813,
        0.5 + 0.16999052179242813,
        0.5 + 0.43056815579702629,
    ];
    let wts = [
        0.17392742256872693_f64,
        0.32607257743127305,
        0.32607257743127305,
        0.17392742256872693,
    ];
    let center = domain.to_coords(domain.center());
    let n = domain.num_vertices();
    let mut out = vec![0.0; n];
    let mut point = vec![0.0; d];
    for v in 0..n {
        let c = domain.to_coords(v);
        let mut acc = 0.0;
        // tensor quadrature over the cell
        let mut idx = vec![0usize; d];
        loop {
            let mut weight = 1.0;
            for a in 0..d {
                point[a] = eps * ((c[a] - center[a]) as f64 + nodes[idx[a]]);
                weight *= wts[idx[a]];
            }
            acc += weight * profile.eval(&point);
            // odometer
            let mut a = 0;
            loop {
                if a == d {
                    break;
                }
                idx[a] += 1;
                if idx[a] < 4 {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == d {
                break;
            }
        }
        out[v] = acc;
    }
    out
}

#[derive(Debug, Clone)]
pub struct CauchyOutcome {
    pub field: ScalarField,
    /// Lattice time t / eps^2 that was integrated.
    pub lattice_time: f64,
}

/// Exact solution of the lattice Cauchy problem at macroscopic time t:
/// u = e^{(t/eps^2) L} u0 with u0 the cell averages of the profile.
pub fn solve_cauchy_exact(
    env: &Environment,
    profile: &MacroscopicProfile,
    t: f64,
    eps: f64,
) -> Result<CauchyOutcome> {
    let u0 = cell_averages(profile, env.domain(), eps);
    let lattice_time = t / (eps * eps);
    let u = heatkernel::semigroup_apply(env, &u0, lattice_time, 1e-10)?;
    Ok(CauchyOutcome {
        field: ScalarField::new(env.domain().clone(), u)?,
        lattice_time,
    })
}

/// Monte Carlo estimate of u(t, x) = E^x u0(X_{t/eps^2}) at the probe
/// vertices, with standard errors.
pub fn solve_cauchy_monte_carlo(
    env: &Environment,
    profile: &MacroscopicProfile,
    t: f64,
    eps: f64,
    probes: &[usize],
    n_walks: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let u0 = cell_averages(profile, env.domain(), eps);
    let lattice_time = t / (eps * eps);
    let mut out = Vec::with_capacity(probes.len());
    for (pi, &x) in probes.iter().enumerate() {
        let mut vals = Vec::with_capacity(n_walks);
        for w in 0..n_walks {
            let path = walk::simulate_vsrw(
                env,
                x,
                lattice_time,
                seed.wrapping_add((pi * n_walks + w) as u64),
            )?;
            vals.push(u0[*path.vertices.last().expect("nonempty path")]);
        }
        out.push((stats::mean(&vals), stats::standard_error(&vals)));
    }
    Ok(out)
}

/// d x d SPD inverse by Gaussian elimination (d <= 3 in practice).
fn invert_small(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = a.len();
    let mut m: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend((0..d).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col].abs() < 1e-14 {
            return Err(RcmError::Consistency("singular matrix".into()));
        }
        m.swap(col, piv);
        let p = m[col][col];
        for x in m[col].iter_mut() {
            *x /= p;
        }
        for row in 0..d {
            if row != col {
                let f = m[row][col];
                for k in 0..2 * d {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[d..].to_vec()).collect())
}

fn det_small(a: &[Vec<f64>]) -> f64 {
    match a.len() {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => panic!("det_small supports d <= 3"),
    }
}

/// Convolution of a Gaussian bump (amplitude A, width s, center c) with the
/// N(0, Sigma) kernel, evaluated at x: a Gaussian again.
fn bump_convolved(
    x: &[f64],
    center: &[f64],
    width: f64,
    amplitude: f64,
    sigma: &[Vec<f64>],
) -> Result<f64> {
    let d = x.len();
    // covariance s^2 I + Sigma
    let mut cov: Vec<Vec<f64>> = sigma.to_vec();
    for (i, row) in cov.iter_mut().enumerate() {
        row[i] += width * width;
    }
    let inv = invert_small(&cov)?;
    let det = det_small(&cov);
    let norm = amplitude * width.powi(d as i32) / det.sqrt();
    let mut quad = 0.0;
    for i in 0..d {
        for j in 0..d {
            quad += (x[i] - center[i]) * inv[i][j] * (x[j] - center[j]);
        }
    }
    Ok(norm * (-0.5 * quad).exp())
}

/// Homogenized solution \bar u(t, .) = f * N(0, 2 t q) on the macroscopic
/// torus of side `box_len` (wrapped kernel), sampled at the cell anchors of
/// the lattice of spacing eps. Gaussian profiles use the closed form plus
/// periodic images; grid profiles a spectral convolution.
pub fn homogenized_solution(
    q: &DiffusionMatrix,
    profile: &MacroscopicProfile,
    t: f64,
    domain: &LatticeDomain,
    eps: f64,
    box_len: f64,
) -> Result<ScalarField> {
    let d = domain.dimension();
    if q.dimension() != d {
        return Err(RcmError::Consistency("dimension mismatch".into()));
    }
    if t == 0.0 {
        return Ok(ScalarField::new(
            domain.clone(),
            cell_averages(profile, domain, eps),
        )?);
    }
    // covariance of the limiting Brownian motion at time t
    let sigma: Vec<Vec<f64>> = q
        .q
        .iter()
        .map(|row| row.iter().map(|&x| 2.0 * t * x).collect())
        .collect();
    match profile {
        MacroscopicProfile::Grid { .. } => {
            // spectral multiplication with exp(-k.Sigma k / 2) on the grid
            let sides: Vec<usize> = domain.sides().iter().map(|&s| s as usize).collect();
            let cells = cell_averages(profile, domain, eps);
            let mut data: Vec<Complex<f64>> =
                cells.iter().map(|&v| Complex::new(v, 0.0)).collect();
            solver::fft_nd(&mut data, &sides, true);
            let two_pi = 2.0 * std::f64::consts::PI;
            let n: usize = sides.iter().product();
            let mut idx = vec![0usize; d];
            for (flat, val) in data.iter_mut().enumerate() {
                let mut rest = flat;
                for axis in (0..d).rev() {
                    idx[axis] = rest % sides[axis];
                    rest /= sides[axis];
                }
                let k: Vec<f64> = (0..d)
                    .map(|a| {
                        let m = idx[a];
                        let s = sides[a];
                        let signed = if m <= s / 2 { m as i64 } else { m as i64 - s as i64 };
                        two_pi * signed as f64 / box_len
                    })
                    .collect();
                let mut ksk = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        ksk += k[i] * sigma[i][j] * k[j];
                    }
                }
                *val *= (-0.5 * ksk).exp();
            }
            solver::fft_nd(&mut data, &sides, false);
            let values: Vec<f64> = data.iter().map(|c| c.re / n as f64).collect();
            ScalarField::new(domain.clone(), values)
        }
        _ => {
            // closed-form Gaussian convolution with periodic images
            let center = domain.to_coords(domain.center());
            let n = domain.num_vertices();
            let mut values = vec![0.0; n];
            let images: Vec<Vec<f64>> = image_offsets(d, box_len);
            for (v, value) in values.iter_mut().enumerate() {
                let c = domain.to_coords(v);
                let x: Vec<f64> = (0..d).map(|a| eps * (c[a] - center[a]) as f64).collect();
                let mut acc = 0.0;
                for off in &images {
                    let xi: Vec<f64> = x.iter().zip(off).map(|(a, b)| a + b).collect();
                    acc += match profile {
                        MacroscopicProfile::GaussianBump {
                            center,
                            width,
                            amplitude,
                        } => bump_convolved(&xi, center, *width, *amplitude, &sigma)?,
                        MacroscopicProfile::GaussianDipole {
                            center1,
                            center2,
                            width,
                            amplitude,
                        } => {
                            bump_convolved(&xi, center1, *width, *amplitude, &sigma)?
                                + bump_convolved(&xi, center2, *width, -*amplitude, &sigma)?
                        }
                        MacroscopicProfile::Grid { .. } => unreachable!(),
                    };
                }
                *value = acc;
            }
            ScalarField::new(domain.clone(), values)
        }
    }
}

fn image_offsets(d: usize, box_len: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let reps = [-2i64, -1, 0, 1, 2];
    let mut idx = vec![0usize; d];
    loop {
        out.push(idx.iter().map(|&i| reps[i] as f64 * box_len).collect());
        let mut a = 0;
        loop {
            if a == d {
                return out;
            }
            idx[a] += 1;
            if idx[a] < reps.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// L2(dx) distance between two cell-constant fields on the eps-lattice.
pub fn l2_distance(a: &ScalarField, b: &ScalarField, eps: f64) -> f64 {
    let d = a.domain().dimension() as i32;
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    (sum * eps.powi(d)).sqrt()
}

/// The eps-sweep: average L2 error between the lattice solution and the
/// homogenized one over environment samples, per epsilon.
#[allow(clippy::too_many_arguments)]
pub fn homogenization_error(
    law: &EnvironmentLaw,
    q: &DiffusionMatrix,
    profile: &MacroscopicProfile,
    t: f64,
    eps_grid: &[f64],
    box_len: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let d = q.dimension();
    let mut table = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let side = (box_len / eps).round() as u32;
        let domain = LatticeDomain::torus(vec![side; d])?;
        let mut errs = Vec::with_capacity(samples);
        for s in 0..samples {
            let env = build_environment(law, &domain, seed.wrapping_add(s as u64))?;
            let u = solve_cauchy_exact(&env, profile, t, eps)?;
            let bar = homogenized_solution(q, profile, t, &domain, eps, box_len)?;
            errs.push(l2_distance(&u.field, &bar, eps));
        }
        table.push((eps, stats::mean(&errs)));
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct ResolventOutcome {
    pub pairing: f64,
    pub target: f64,
    pub eps: f64,
}

/// <g_eps, (-L)^{-1} f_eps> on the lattice of spacing eps (zero-integral
/// profiles in d <= 2), against the Fourier target <g, (-Q)^{-1} f> on the
/// same macroscopic torus.
pub fn resolvent_pairing(
    env: &Environment,
    f: &MacroscopicProfile,
    g: &MacroscopicProfile,
    q: &DiffusionMatrix,
    eps: f64,
    box_len: f64,
    tol: f64,
) -> Result<ResolventOutcome> {
    let dom = env.domain();
    let d = dom.dimension();
    if d <= 2 {
        for (name, p) in [("f", f), ("g", g)] {
            if p.integral().abs() > 1e-9 {
                return Err(RcmError::invalid(
                    name,
                    "zero total integral required in d <= 2",
                ));
            }
        }
    }
    let n = dom.num_vertices();
    let mut cf = cell_averages(f, dom, eps);
    let cg = cell_averages(g, dom, eps);
    // exact recentering (the analytic integral vanishes; the quadrature
    // leaves a rounding-level mean)
    let mean = cf.iter().sum::<f64>() / n as f64;
    for v in cf.iter_mut() {
        *v -= mean;
    }
    let quad = quadratic_solve_pairing(env, &cf, &cg, tol)?;
    let pairing = eps.powi(d as i32 + 2) * quad;

    // target on the same macroscopic grid
    let sides: Vec<usize> = dom.sides().iter().map(|&s| s as usize).collect();
    let h = eps;
    let f_grid: Vec<f64> = cf.iter().map(|&c| c).collect();
    let g_grid: Vec<f64> = cg.clone();
    // cell averages approximate grid samples of f (spacing h); the Fourier
    // target divides by k.qk on the same torus
    let _ = h;
    let target = gradfield::fourier_green_pairing(&g_grid, &f_grid, &sides, box_len, &q.q)?;
    Ok(ResolventOutcome {
        pairing,
        target,
        eps,
    })
}

/// <c_g, (-L)^+ c_f> by one zero-mean solve.
fn quadratic_solve_pairing(
    env: &Environment,
    cf: &[f64],
    cg: &[f64],
    tol: f64,
) -> Result<f64> {
    let n = env.num_vertices();
    let dom = env.domain();
    let scale = cf.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1e-300);
    let mut x = vec![0.0; n];
    let full = dom.is_periodic() && env.pi_values().iter().all(|&p| p > 0.0);
    if full {
        let mean_c = env.edge_values().iter().sum::<f64>() / env.edge_values().len() as f64;
        let fft = solver::FftPoisson::new(dom.sides(), mean_c);
        solver::pcg(
            |f: &[f64], out: &mut [f64]| {
                solver::laplacian_apply(env, f, out);
                for v in out.iter_mut() {
                    *v = -*v;
                }
            },
            Some(|r: &[f64], z: &mut [f64]| fft.apply(r, z)),
            Some(|v: &mut [f64]| solver::project_zero_mean(v, None)),
            cf,
            &mut x,
            tol * scale,
            crate::potential::CG_CAP,
        )?;
    } else {
        return Err(RcmError::Consistency(
            "resolvent pairing needs an elliptic torus environment".into(),
        ));
    }
    // remove the gauge freedom of the pairing: cg need not be recentered
    // because <c_g, x> only sees the zero-mean part of x
    solver::project_zero_mean(&mut x, None);
    let mut cg0 = cg.to_vec();
    solver::project_zero_mean(&mut cg0, None);
    Ok(solver::dot(&cg0, &x))
}

/// Deterministic probe vertices spread over the domain.
pub fn probe_vertices(domain: &LatticeDomain, count: usize, seed: u64) -> Vec<usize> {
    let n = domain.num_vertices();
    (0..count)
        .map(|i| (rng::draw_u64_at(seed, tag::MONTE_CARLO, i as u64) % n as u64) as usize)
        .collect()
}
