//! Discrete electrostatics on conductance networks.
//!
//! The Dirichlet energy of a potential f is
//! E(f) = (1/2) sum_{x,y} omega_xy [f(y) - f(x)]^2,
//! its minimizers under boundary constraints are discrete harmonic
//! (L_omega f = 0), and 1/R(x,y) is the minimal energy with unit potential
//! difference. Solvers: pointwise relaxation (each pass replaces f(x) by the
//! conductance-weighted neighbor average, which never raises the energy) and
//! conjugate gradients on the interior block of -L.

use crate::domain::{BoundaryMode, LatticeDomain};
use crate::env::Environment;
use crate::error::{RcmError, Result};
use crate::solver::{self, FftPoisson};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const RELAXATION_CAP: usize = 1_000_000;
pub const CG_CAP: usize = 10_000;

/// One real value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    domain: LatticeDomain,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: LatticeDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.num_vertices() {
            return Err(RcmError::Consistency("field length != vertex count".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RcmError::Consistency("field has non-finite entries".into()));
        }
        Ok(ScalarField { domain, values })
    }

    pub fn constant(domain: LatticeDomain, c: f64) -> Self {
        let n = domain.num_vertices();
        ScalarField {
            domain,
            values: vec![c; n],
        }
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }
}

/// Dirichlet problem data: solve L f = 0 on the interior, f = g elsewhere.
/// Every positive-pi interior vertex must be joined to the boundary by a
/// positive-conductance path, otherwise the problem is singular.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub interior: Vec<bool>,
    /// Read at non-interior vertices only.
    pub boundary_values: Vec<f64>,
}

impl DirichletProblem {
    pub fn new(env: &Environment, interior: Vec<bool>, boundary_values: Vec<f64>) -> Result<Self> {
        let n = env.num_vertices();
        if interior.len() != n || boundary_values.len() != n {
            return Err(RcmError::Consistency("mask/data length mismatch".into()));
        }
        if boundary_values
            .iter()
            .zip(&interior)
            .any(|(v, &int)| !int && !v.is_finite())
        {
            return Err(RcmError::Consistency("non-finite boundary data".into()));
        }
        if !interior.iter().any(|&b| b) {
            return Err(RcmError::Consistency("empty interior".into()));
        }
        if interior.iter().all(|&b| b) {
            return Err(RcmError::Consistency("no boundary vertices".into()));
        }
        for v in 0..n {
            if interior[v] && env.pi(v) <= 0.0 {
                return Err(RcmError::DegenerateVertex { vertex: v });
            }
        }
        // reach every interior vertex from the boundary through positive edges
        let seeds: Vec<usize> = (0..n).filter(|&v| !interior[v]).collect();
        let reached = reachable(env, &seeds, None);
        if let Some(v) = (0..n).find(|&v| interior[v] && !reached[v]) {
            return Err(RcmError::Consistency(format!(
                "interior vertex {v} is cut off from the boundary"
            )));
        }
        Ok(DirichletProblem {
            interior,
            boundary_values,
        })
    }
}

/// Breadth-first reachability through positive-conductance edges.
/// `allowed` restricts the traversal when given.
pub(crate) fn reachable(env: &Environment, seeds: &[usize], allowed: Option<&[bool]>) -> Vec<bool> {
    let n = env.num_vertices();
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for (w, _) in env.weighted_neighbors(v) {
            if !seen[w] && allowed.map_or(true, |a| a[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// E_A(f): the sum over edges meeting A, each edge counted once.
pub fn dirichlet_energy(env: &Environment, f: &ScalarField, a_mask: &[bool]) -> f64 {
    let dom = env.domain();
    let mut energy = 0.0;
    for e in 0..env.edge_values().len() {
        let w = env.edge_values()[e];
        if w == 0.0 {
            continue;
        }
        let (v, u, _) = dom.edge_endpoints(e);
        if a_mask[v] || a_mask[u] {
            let d = f.values[u] - f.values[v];
            energy += w * d * d;
        }
    }
    energy
}

/// Full-network energy (every edge counted once).
pub fn total_energy(env: &Environment, f: &ScalarField) -> f64 {
    let all = vec![true; env.num_vertices()];
    dirichlet_energy(env, f, &all)
}

/// One in-place pass replacing f(x) by the weighted neighbor average
/// P_omega f(x), for x in A in canonical vertex order. Never raises E_A and
/// keeps f inside [min f, max f].
pub fn relaxation_sweep(env: &Environment, f: &mut ScalarField, a_mask: &[bool]) -> Result<()> {
    for v in 0..env.num_vertices() {
        if !a_mask[v] {
            continue;
        }
        let pi = env.pi(v);
        if pi <= 0.0 {
            return Err(RcmError::DegenerateVertex { vertex: v });
        }
        let mut acc = 0.0;
        for (w, c) in env.weighted_neighbors(v) {
            acc += c * f.values[w];
        }
        f.values[v] = acc / pi;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Relaxation,
    ConjugateGradient,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub field: ScalarField,
    pub iterations: usize,
    pub residual: f64,
}

/// Max interior residual |L f| of an assembled field.
pub fn interior_residual(env: &Environment, f: &ScalarField, interior: &[bool]) -> f64 {
    let mut lf = vec![0.0; env.num_vertices()];
    solver::laplacian_apply(env, &f.values, &mut lf);
    lf.iter()
        .zip(interior)
        .filter(|&(_, &b)| b)
        .map(|(r, _)| r.abs())
        .fold(0.0, f64::max)
}

pub fn solve_dirichlet(
    env: &Environment,
    problem: &DirichletProblem,
    method: SolveMethod,
    tol: f64,
) -> Result<SolveOutcome> {
    let n = env.num_vertices();
    let g_scale = problem
        .boundary_values
        .iter()
        .zip(&problem.interior)
        .filter(|&(_, &int)| !int)
        .map(|(v, _)| v.abs())
        .fold(0.0, f64::max);
    let target = tol * g_scale.max(1.0);

    let mut field = ScalarField::constant(env.domain().clone(), 0.0);
    for v in 0..n {
        if !problem.interior[v] {
            field.values[v] = problem.boundary_values[v];
        }
    }

    match method {
        SolveMethod::Relaxation => {
            let mut sweeps = 0;
            loop {
                relaxation_sweep(env, &mut field, &problem.interior)?;
                sweeps += 1;
                if sweeps % 8 == 0 || sweeps >= RELAXATION_CAP {
                    let res = interior_residual(env, &field, &problem.interior);
                    if res <= target {
                        return Ok(SolveOutcome {
                            field,
                            iterations: sweeps,
                            residual: res,
                        });
                    }
                    if sweeps >= RELAXATION_CAP {
                        return Err(RcmError::SolverDiverged {
                            residual: res,
                            iterations: sweeps,
                        });
                    }
                }
            }
        }
        SolveMethod::ConjugateGradient => {
            // b(x) = sum over non-interior neighbors omega * g
            let mut b = vec![0.0; n];
            let dom = env.domain();
            for e in 0..env.edge_values().len() {
                let w = env.edge_values()[e];
                if w == 0.0 {
                    continue;
                }
                let (v, u, _) = dom.edge_endpoints(e);
                if problem.interior[v] && !problem.interior[u] {
                    b[v] += w * problem.boundary_values[u];
                }
                if problem.interior[u] && !problem.interior[v] {
                    b[u] += w * problem.boundary_values[v];
                }
            }
            let mut x = vec![0.0; n];
            // Jacobi preconditioner: divide by pi on the interior
            let pi: Vec<f64> = env.pi_values().to_vec();
            let interior = problem.interior.clone();
            let stats = solver::pcg(
                |f: &[f64], out: &mut [f64]| solver::neg_laplacian_masked(env, &interior, f, out),
                Some(|r: &[f64], z: &mut [f64]| {
                    for i in 0..r.len() {
                        z[i] = if interior[i] { r[i] / pi[i] } else { 0.0 };
                    }
                }),
                None::<fn(&mut [f64])>,
                &b,
                &mut x,
                target,
                CG_CAP,
            )?;
            for v in 0..n {
                if problem.interior[v] {
                    field.values[v] = x[v];
                }
            }
            let res = interior_residual(env, &field, &problem.interior);
            Ok(SolveOutcome {
                field,
                iterations: stats.iterations,
                residual: res,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResistanceOutcome {
    /// f64::INFINITY when source and sink are disconnected.
    pub resistance: f64,
    /// Minimal Dirichlet energy = 1/resistance (0 when disconnected).
    pub conductance: f64,
    pub field: Option<ScalarField>,
    pub iterations: usize,
    pub residual: f64,
}

/// Effective point-to-set resistance: R^{-1} = inf{E(f) : f(source)=1,
/// f|sink = 0}. Disconnected pairs give the distinguished infinite value.
pub fn effective_resistance(
    env: &Environment,
    source: usize,
    sink: &[usize],
    tol: f64,
) -> Result<ResistanceOutcome> {
    let n = env.num_vertices();
    if sink.is_empty() {
        return Err(RcmError::invalid("sink", "must be nonempty"));
    }
    if sink.contains(&source) {
        return Err(RcmError::invalid("sink", "contains the source"));
    }
    if env.pi(source) <= 0.0 {
        return Err(RcmError::DegenerateVertex { vertex: source });
    }
    let from_source = reachable(env, &[source], None);
    if !sink.iter().any(|&s| from_source[s]) {
        return Ok(ResistanceOutcome {
            resistance: f64::INFINITY,
            conductance: 0.0,
            field: None,
            iterations: 0,
            residual: 0.0,
        });
    }
    // interior: positive-pi vertices in the source component, minus pins
    let mut interior = vec![false; n];
    for v in 0..n {
        interior[v] = from_source[v] && env.pi(v) > 0.0;
    }
    interior[source] = false;
    for &s in sink {
        interior[s] = false;
    }
    let mut g = vec![0.0; n];
    g[source] = 1.0;
    let outcome = if interior.iter().any(|&b| b) {
        let problem = DirichletProblem::new(env, interior, g)?;
        solve_dirichlet(env, &problem, SolveMethod::ConjugateGradient, tol)?
    } else {
        // single edge / direct contact: the pinned values are the solution
        let mut field = ScalarField::constant(env.domain().clone(), 0.0);
        field.values[source] = 1.0;
        SolveOutcome {
            field,
            iterations: 0,
            residual: 0.0,
        }
    };
    let conductance = total_energy(env, &outcome.field);
    Ok(ResistanceOutcome {
        resistance: 1.0 / conductance,
        conductance,
        field: Some(outcome.field),
        iterations: outcome.iterations,
        residual: outcome.residual,
    })
}

/// Axis-aligned sub-box given by center coordinates and an l-infinity radius.
#[derive(Debug, Clone)]
pub struct CenteredBox {
    pub center: Vec<i64>,
    pub radius: i64,
}

impl CenteredBox {
    pub fn contains(&self, coords: &[i64]) -> bool {
        self.center
            .iter()
            .zip(coords)
            .all(|(&c, &x)| (x - c).abs() <= self.radius)
    }
}

/// R(x, Lambda^c)^{-1}: conductance from x to the complement of the box.
/// Equals pi(x) P^x(no return to x before exiting Lambda).
pub fn escape_conductance(
    env: &Environment,
    x: usize,
    lambda: &CenteredBox,
    tol: f64,
) -> Result<ResistanceOutcome> {
    let dom = env.domain();
    let coords = dom.to_coords(x);
    if lambda
        .center
        .iter()
        .zip(&coords)
        .any(|(&c, &cx)| (cx - c).abs() >= lambda.radius)
    {
        return Err(RcmError::Geometry("x must be interior to Lambda".into()));
    }
    let sink: Vec<usize> = (0..dom.num_vertices())
        .filter(|&v| !lambda.contains(&dom.to_coords(v)))
        .collect();
    if sink.is_empty() {
        return Err(RcmError::Geometry("Lambda covers the whole domain".into()));
    }
    effective_resistance(env, x, &sink, tol)
}

/// Plate problem on a slab: potential pinned to +1 on the top layer and -1
/// on the bottom layer of the last coordinate, harmonic in between. Vertices
/// whose cluster never reaches a plate are reported as 0.
pub fn plate_potential(env: &Environment, tol: f64) -> Result<SolveOutcome> {
    let dom = env.domain();
    let d = dom.dimension();
    if dom.is_periodic() {
        return Err(RcmError::Geometry("plate problem needs a box domain".into()));
    }
    let axis = d - 1;
    let top = dom.sides()[axis] as i64 - 1;
    let n = dom.num_vertices();
    let mut g = vec![0.0; n];
    let mut interior = vec![false; n];
    let mut plates = Vec::new();
    for v in 0..n {
        let c = dom.to_coords(v)[axis];
        if c == 0 {
            g[v] = -1.0;
            plates.push(v);
        } else if c == top {
            g[v] = 1.0;
            plates.push(v);
        } else {
            interior[v] = true;
        }
    }
    // restrict to the sub-network attached to the plates
    let attached = reachable(env, &plates, None);
    for v in 0..n {
        if interior[v] && (env.pi(v) <= 0.0 || !attached[v]) {
            interior[v] = false; // left at 0
        }
    }
    let problem = DirichletProblem::new(env, interior, g)?;
    solve_dirichlet(env, &problem, SolveMethod::ConjugateGradient, tol)
}

#[derive(Debug, Clone)]
pub struct BoxConductanceOutcome {
    /// R_N^{-1}; 0 when no left-right crossing cluster exists.
    pub conductance: f64,
    pub field: Option<ScalarField>,
    pub iterations: usize,
    pub residual: f64,
}

/// Effective conductance of the box with potential -e_1.x enforced on the
/// two faces normal to direction 0 and natural (free) conditions elsewhere.
/// With zero conductances present, the problem is restricted to the cluster
/// crossing in direction 0.
pub fn box_conductance(env: &Environment, tol: f64) -> Result<BoxConductanceOutcome> {
    let dom = env.domain();
    if dom.is_periodic() {
        return Err(RcmError::Geometry("box conductance needs a box domain".into()));
    }
    let side0 = dom.sides()[0] as i64;
    let half = (side0 - 1) / 2;
    let n = dom.num_vertices();

    let has_zero = env.edge_values().iter().any(|&w| w == 0.0);
    let allowed: Vec<bool> = if has_zero {
        let labeling = crate::cluster::label_clusters(env);
        match labeling.crossing {
            None => {
                return Ok(BoxConductanceOutcome {
                    conductance: 0.0,
                    field: None,
                    iterations: 0,
                    residual: 0.0,
                })
            }
            Some(lab) => (0..n).map(|v| labeling.label[v] == Some(lab)).collect(),
        }
    } else {
        vec![true; n]
    };

    let mut interior = vec![false; n];
    let mut g = vec![0.0; n];
    let mut pinned = false;
    for v in 0..n {
        if !allowed[v] {
            continue;
        }
        let c0 = dom.to_coords(v)[0] - half;
        if c0 == -half || c0 == half {
            g[v] = -(c0 as f64);
            pinned = true;
        } else {
            interior[v] = true;
        }
    }
    if !pinned {
        return Err(RcmError::Geometry("faces carry no cluster vertices".into()));
    }
    let problem = DirichletProblem::new(env, interior, g)?;
    let outcome = solve_dirichlet(env, &problem, SolveMethod::ConjugateGradient, tol)?;
    let conductance = total_energy(env, &outcome.field);
    Ok(BoxConductanceOutcome {
        conductance,
        field: Some(outcome.field),
        iterations: outcome.iterations,
        residual: outcome.residual,
    })
}

/// Expected number of visits to y by the walk from x before leaving the
/// vertex set `lambda` (true = inside). Computed from the restricted
/// operator: G(x,y) = pi(y) * [(-L_Lambda)^{-1}]( x, y ).
pub fn greens_function(
    env: &Environment,
    lambda: &[bool],
    x: usize,
    y: usize,
    tol: f64,
) -> Result<f64> {
    let n = env.num_vertices();
    if lambda.len() != n {
        return Err(RcmError::Consistency("lambda mask length".into()));
    }
    if !lambda[x] || !lambda[y] {
        return Err(RcmError::invalid("x/y", "must lie inside Lambda"));
    }
    if env.pi(x) <= 0.0 || env.pi(y) <= 0.0 {
        return Err(RcmError::DegenerateVertex {
            vertex: if env.pi(x) <= 0.0 { x } else { y },
        });
    }
    // escape must be possible from the component of y inside Lambda
    let dom = env.domain();
    let mut exit_adjacent = Vec::new();
    for v in 0..n {
        if !lambda[v] {
            continue;
        }
        for (axis, sign, w) in dom.neighbors(v) {
            if !lambda[w] && env.conductance_signed(v, axis, sign) > 0.0 {
                exit_adjacent.push(v);
                break;
            }
        }
    }
    let can_escape = reachable(env, &exit_adjacent, Some(lambda));
    if !can_escape[x] || !can_escape[y] {
        return Err(RcmError::Consistency(
            "no escape from Lambda: restricted operator is singular".into(),
        ));
    }
    let mut b = vec![0.0; n];
    b[y] = 1.0;
    let mut sol = vec![0.0; n];
    let pi: Vec<f64> = env.pi_values().to_vec();
    let mask = lambda.to_vec();
    solver::pcg(
        |f: &[f64], out: &mut [f64]| solver::neg_laplacian_masked(env, &mask, f, out),
        Some(|r: &[f64], z: &mut [f64]| {
            for i in 0..r.len() {
                z[i] = if mask[i] && pi[i] > 0.0 { r[i] / pi[i] } else { 0.0 };
            }
        }),
        None::<fn(&mut [f64])>,
        &b,
        &mut sol,
        tol,
        CG_CAP,
    )?;
    Ok(sol[x] * env.pi(y))
}

/// Solve L phi = rho with the gauge phi(normalize_at) = 0.
///
/// On torus/free domains the kernel of L is spanned by constants on each
/// component, so rho must have zero total charge on the component of the
/// normalization vertex (and vanish off it).
pub fn solve_poisson(
    env: &Environment,
    rho: &ScalarField,
    normalize_at: usize,
    tol: f64,
) -> Result<SolveOutcome> {
    let n = env.num_vertices();
    let dom = env.domain();
    if env.pi(normalize_at) <= 0.0 {
        return Err(RcmError::DegenerateVertex {
            vertex: normalize_at,
        });
    }
    let comp = reachable(env, &[normalize_at], None);
    for v in 0..n {
        if !comp[v] && rho.values[v] != 0.0 {
            return Err(RcmError::Consistency(format!(
                "charge at vertex {v} outside the component of the normalization vertex"
            )));
        }
    }
    let rho_scale = rho.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let target = tol * rho_scale.max(1.0);

    let kernel_bearing = dom.boundary_mode() != BoundaryMode::Absorbing;
    if kernel_bearing {
        let total: f64 = rho.values.iter().sum();
        if total.abs() > 1e-9 * rho_scale.max(1.0) {
            return Err(RcmError::Consistency(format!(
                "total charge {total:.3e} is nonzero on a kernel-bearing domain"
            )));
        }
    }

    // solve (-L) psi = -rho, then phi = psi normalized
    let b: Vec<f64> = rho.values.iter().map(|&r| -r).collect();
    let mut x = vec![0.0; n];
    let full_torus = dom.is_periodic() && comp.iter().all(|&c| c);
    let stats = if kernel_bearing {
        let comp_mask = comp.clone();
        let project = move |v: &mut [f64]| solver::project_zero_mean(v, Some(&comp_mask));
        if full_torus {
            let mean_c = env.edge_values().iter().sum::<f64>() / env.edge_values().len() as f64;
            let fft = FftPoisson::new(dom.sides(), mean_c.max(1e-300));
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
            )?
        } else {
            let pi: Vec<f64> = env.pi_values().to_vec();
            let comp_mask2 = comp.clone();
            solver::pcg(
                |f: &[f64], out: &mut [f64]| {
                    solver::laplacian_apply(env, f, out);
                    for v in out.iter_mut() {
                        *v = -*v;
                    }
                },
                Some(move |r: &[f64], z: &mut [f64]| {
                    for i in 0..r.len() {
                        z[i] = if comp_mask2[i] && pi[i] > 0.0 {
                            r[i] / pi[i]
                        } else {
                            0.0
                        };
                    }
                }),
                Some(project),
                &b,
                &mut x,
                target,
                CG_CAP,
            )?
        }
    } else {
        // absorbing domain: restrict to non-absorbing vertices, nonsingular
        let mask: Vec<bool> = (0..n).map(|v| comp[v] && !dom.is_absorbing(v)).collect();
        let pi: Vec<f64> = env.pi_values().to_vec();
        let mask2 = mask.clone();
        solver::pcg(
            |f: &[f64], out: &mut [f64]| solver::neg_laplacian_masked(env, &mask2, f, out),
            Some(move |r: &[f64], z: &mut [f64]| {
                for i in 0..r.len() {
                    z[i] = if mask[i] && pi[i] > 0.0 { r[i] / pi[i] } else { 0.0 };
                }
            }),
            None::<fn(&mut [f64])>,
            &b,
            &mut x,
            target,
            CG_CAP,
        )?
    };

    let shift = x[normalize_at];
    for (v, val) in x.iter_mut().enumerate() {
        if comp[v] {
            *val -= shift;
        } else {
            *val = 0.0;
        }
    }
    let field = ScalarField::new(dom.clone(), x)?;
    Ok(SolveOutcome {
        field,
        iterations: stats.iterations,
        residual: stats.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BoundaryMode, LatticeDomain};
    use crate::env::{build_environment, DistributionSpec, Environment, EnvironmentLaw};

    fn path_env(conds: &[f64]) -> Environment {
        let dom = LatticeDomain::new(vec![conds.len() as u32 + 1], BoundaryMode::Free).unwrap();
        Environment::from_edge_values(dom, conds.to_vec()).unwrap()
    }

    fn elliptic_2d(side: u32, seed: u64) -> Environment {
        let dom = LatticeDomain::new(vec![side, side], BoundaryMode::Free).unwrap();
        build_environment(
            &EnvironmentLaw::Iid {
                distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
            },
            &dom,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn energy_of_constant_is_zero() {
        let env = elliptic_2d(5, 1);
        let f = ScalarField::constant(env.domain().clone(), 2.5);
        let all = vec![true; env.num_vertices()];
        assert_eq!(dirichlet_energy(&env, &f, &all), 0.0);
    }

    #[test]
    fn energy_on_three_path() {
        // vertices 0-1-2 with unit conductances, f=(0,1,2), A={1}:
        // both edges meet A, so E = 1 + 1 = 2 with the once-per-edge rule
        let env = path_env(&[1.0, 1.0]);
        let f = ScalarField::new(env.domain().clone(), vec![0.0, 1.0, 2.0]).unwrap();
        let a = vec![false, true, false];
        assert_eq!(dirichlet_energy(&env, &f, &a), 2.0);
    }

    #[test]
    fn energy_linear_in_conductance() {
        let env = elliptic_2d(4, 7);
        let doubled = Environment::from_edge_values(
            env.domain().clone(),
            env.edge_values().iter().map(|&w| 2.0 * w).collect(),
        )
        .unwrap();
        let f = ScalarField::new(
            env.domain().clone(),
            (0..env.num_vertices()).map(|v| (v % 5) as f64).collect(),
        )
        .unwrap();
        let all = vec![true; env.num_vertices()];
        let e1 = dirichlet_energy(&env, &f, &all);
        let e2 = dirichlet_energy(&doubled, &f, &all);
        assert!((e2 - 2.0 * e1).abs() < 1e-12 * e1.abs());
    }

    #[test]
    fn relaxation_averages_middle_vertex() {
        let env = path_env(&[1.0, 1.0]);
        let mut f = ScalarField::new(env.domain().clone(), vec![0.0, 7.0, 1.0]).unwrap();
        let a = vec![false, true, false];
        relaxation_sweep(&env, &mut f, &a).unwrap();
        assert_eq!(f.values[1], 0.5);
        // harmonic input is a fixed point
        relaxation_sweep(&env, &mut f, &a).unwrap();
        assert_eq!(f.values[1], 0.5);
    }

    #[test]
    fn relaxation_energy_never_increases() {
        let env = elliptic_2d(6, 3);
        let n = env.num_vertices();
        let a: Vec<bool> = (0..n).map(|v| !env.domain().on_outer_layer(v)).collect();
        let mut f = ScalarField::new(
            env.domain().clone(),
            (0..n).map(|v| ((v * 17 + 3) % 13) as f64 - 6.0).collect(),
        )
        .unwrap();
        let mut last = dirichlet_energy(&env, &f, &a);
        for _ in 0..30 {
            relaxation_sweep(&env, &mut f, &a).unwrap();
            let now = dirichlet_energy(&env, &f, &a);
            assert!(now <= last + 1e-12);
            last = now;
        }
    }

    #[test]
    fn dirichlet_constant_data_gives_constant() {
        let env = elliptic_2d(5, 5);
        let n = env.num_vertices();
        let interior: Vec<bool> = (0..n).map(|v| !env.domain().on_outer_layer(v)).collect();
        let g = vec![3.0; n];
        let problem = DirichletProblem::new(&env, interior, g).unwrap();
        let out = solve_dirichlet(&env, &problem, SolveMethod::ConjugateGradient, 1e-12).unwrap();
        for &v in &out.field.values {
            assert!((v - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dirichlet_linear_interpolation_d1() {
        // unit segment 0..N, g(0)=0, g(N)=1 -> f(k) = k/N
        let env = path_env(&[1.0; 10]);
        let n = 11;
        let mut interior = vec![true; n];
        interior[0] = false;
        interior[10] = false;
        let mut g = vec![0.0; n];
        g[10] = 1.0;
        let problem = DirichletProblem::new(&env, interior, g).unwrap();
        for method in [SolveMethod::Relaxation, SolveMethod::ConjugateGradient] {
            let out = solve_dirichlet(&env, &problem, method, 1e-12).unwrap();
            for k in 0..=10 {
                assert!((out.field.values[k] - k as f64 / 10.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn relaxation_and_cg_agree() {
        let env = elliptic_2d(7, 11);
        let n = env.num_vertices();
        let interior: Vec<bool> = (0..n).map(|v| !env.domain().on_outer_layer(v)).collect();
        let g: Vec<f64> = (0..n)
            .map(|v| {
                let c = env.domain().to_coords(v);
                (c[0] as f64 * 0.3).sin() + c[1] as f64 * 0.1
            })
            .collect();
        let problem = DirichletProblem::new(&env, interior.clone(), g.clone()).unwrap();
        let tol = 1e-10;
        let a = solve_dirichlet(&env, &problem, SolveMethod::Relaxation, tol).unwrap();
        let b = solve_dirichlet(&env, &problem, SolveMethod::ConjugateGradient, tol).unwrap();
        let mut max_diff = 0.0f64;
        for v in 0..n {
            max_diff = max_diff.max((a.field.values[v] - b.field.values[v]).abs());
        }
        assert!(max_diff <= 10.0 * tol, "methods differ by {max_diff}");
        // maximum principle
        let (g_min, g_max) = g
            .iter()
            .zip(&interior)
            .filter(|&(_, &int)| !int)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| {
                (lo.min(v), hi.max(v))
            });
        for v in 0..n {
            assert!(b.field.values[v] >= g_min - 1e-9 && b.field.values[v] <= g_max + 1e-9);
        }
    }

    #[test]
    fn resistance_series_three_path() {
        // end-to-end through conductances c1, c2: R = 1/c1 + 1/c2.
        // brute-force oracle: minimize over the single free value.
        let (c1, c2) = (2.0, 0.5);
        let env = path_env(&[c1, c2]);
        let out = effective_resistance(&env, 0, &[2], 1e-12).unwrap();
        let mut best = f64::INFINITY;
        let mut t = 0.0;
        while t <= 1.0 {
            let e = c1 * (1.0 - t) * (1.0 - t) + c2 * t * t;
            best = best.min(e);
            t += 1e-4;
        }
        assert!((out.conductance - best).abs() < 1e-6);
        assert!((out.resistance - (1.0 / c1 + 1.0 / c2)).abs() < 1e-9);
    }

    #[test]
    fn resistance_unit_four_cycle() {
        let dom = LatticeDomain::torus(vec![4]).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        let out = effective_resistance(&env, 0, &[1], 1e-12).unwrap();
        // exact linear-solve oracle on the 4-cycle: parallel 1 and 1/3
        assert!((out.resistance - 0.75).abs() < 1e-10);
    }

    #[test]
    fn resistance_symmetry_and_disconnection() {
        let env = elliptic_2d(5, 9);
        let a = env.domain().from_coords(&[1, 1]);
        let b = env.domain().from_coords(&[3, 2]);
        let rab = effective_resistance(&env, a, &[b], 1e-12).unwrap().resistance;
        let rba = effective_resistance(&env, b, &[a], 1e-12).unwrap().resistance;
        assert!((rab - rba).abs() < 1e-8 * rab);

        let dom = LatticeDomain::new(vec![5], BoundaryMode::Free).unwrap();
        let env2 = Environment::from_edge_values(dom, vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        let out = effective_resistance(&env2, 0, &[4], 1e-12).unwrap();
        assert!(out.resistance.is_infinite());
        assert_eq!(out.conductance, 0.0);
    }

    #[test]
    fn escape_conductance_gamblers_ruin() {
        // d=1 unit conductances, Lambda = open interval (-N, N) around x:
        // exit sits N steps away on each side, so the value is 2 * (1/N)
        let nn = 8i64;
        let dom = LatticeDomain::new(vec![(2 * nn + 3) as u32], BoundaryMode::Free).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        let x = dom.from_coords(&[nn + 1]);
        let lambda = CenteredBox {
            center: vec![nn + 1],
            radius: nn - 1,
        };
        let out = escape_conductance(&env, x, &lambda, 1e-12).unwrap();
        assert!((out.conductance - 2.0 / nn as f64).abs() < 1e-9);
    }

    #[test]
    fn escape_conductance_rayleigh_monotone() {
        let env = elliptic_2d(9, 21);
        let x = env.domain().center();
        let lambda = CenteredBox {
            center: env.domain().to_coords(x),
            radius: 3,
        };
        let base = escape_conductance(&env, x, &lambda, 1e-12).unwrap().conductance;
        for e in (0..env.edge_values().len()).step_by(17) {
            let mut cond = env.edge_values().to_vec();
            cond[e] += 1.0;
            let bumped = Environment::from_edge_values(env.domain().clone(), cond).unwrap();
            let val = escape_conductance(&bumped, x, &lambda, 1e-12).unwrap().conductance;
            assert!(val >= base - 1e-8, "edge {e}: {val} < {base}");
        }
    }

    #[test]
    fn escape_conductance_boundary_precondition() {
        let env = elliptic_2d(7, 2);
        // x sits on the boundary of Lambda, not in its interior
        let x = env.domain().from_coords(&[1, 3]);
        let lambda = CenteredBox {
            center: vec![3, 3],
            radius: 2,
        };
        assert!(escape_conductance(&env, x, &lambda, 1e-10).is_err());
    }

    #[test]
    fn plate_potential_linear_and_antisymmetric() {
        let dom = LatticeDomain::new(vec![7, 9], BoundaryMode::Free).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        let out = plate_potential(&env, 1e-12).unwrap();
        for v in 0..env.num_vertices() {
            let h = dom.to_coords(v)[1] as f64;
            let expect = -1.0 + h / 4.0; // linear from -1 at 0 to +1 at 8
            assert!((out.field.values[v] - expect).abs() < 1e-9);
        }
        // antisymmetry under height reflection for a height-symmetric sample
        let env2 = {
            let dom2 = LatticeDomain::new(vec![5, 7], BoundaryMode::Free).unwrap();
            // conductances depending only on horizontal coordinate: symmetric
            let mut cond = vec![1.0; dom2.num_edges()];
            for e in 0..cond.len() {
                let (v, _, axis) = dom2.edge_endpoints(e);
                let c = dom2.to_coords(v);
                cond[e] = 1.0 + 0.5 * (c[0] as f64) + if axis == 0 { 0.25 } else { 0.0 };
            }
            Environment::from_edge_values(dom2, cond).unwrap()
        };
        let out2 = plate_potential(&env2, 1e-12).unwrap();
        let dom2 = env2.domain();
        for v in 0..env2.num_vertices() {
            let c = dom2.to_coords(v);
            let mirrored = dom2.from_coords(&[c[0], 6 - c[1]]);
            assert!((out2.field.values[v] + out2.field.values[mirrored]).abs() < 1e-9);
        }
    }

    #[test]
    fn box_conductance_homogeneous_oracle() {
        // homogeneous box: f = -c0 is exactly harmonic with free side faces,
        // so R_N^{-1} = 2N (2N+1)^{d-1}
        for nn in [2u32, 3, 4] {
            let side = 2 * nn + 1;
            let dom = LatticeDomain::new(vec![side, side], BoundaryMode::Free).unwrap();
            let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
            let out = box_conductance(&env, 1e-12).unwrap();
            let expect = (2 * nn * side) as f64;
            assert!(
                (out.conductance - expect).abs() < 1e-8 * expect,
                "N={nn}: {} vs {}",
                out.conductance,
                expect
            );
        }
    }

    #[test]
    fn box_conductance_zero_and_monotone() {
        let dom = LatticeDomain::new(vec![7, 7], BoundaryMode::Free).unwrap();
        let zero = build_environment(&EnvironmentLaw::Constant { value: 0.0 }, &dom, 0).unwrap();
        assert_eq!(box_conductance(&zero, 1e-10).unwrap().conductance, 0.0);

        let env = elliptic_2d(7, 30);
        let base = box_conductance(&env, 1e-12).unwrap().conductance;
        for e in (0..env.edge_values().len()).step_by(23) {
            let mut cond = env.edge_values().to_vec();
            cond[e] += 0.7;
            let bumped = Environment::from_edge_values(env.domain().clone(), cond).unwrap();
            let val = box_conductance(&bumped, 1e-12).unwrap().conductance;
            assert!(val >= base - 1e-8);
        }
    }

    #[test]
    fn greens_function_single_vertex_and_symmetry() {
        let env = elliptic_2d(5, 4);
        let n = env.num_vertices();
        let x = env.domain().center();
        let mut lambda = vec![false; n];
        lambda[x] = true;
        assert!((greens_function(&env, &lambda, x, x, 1e-13).unwrap() - 1.0).abs() < 1e-10);

        // pi(x) G(x,y) = pi(y) G(y,x) on a larger window
        let lambda: Vec<bool> = (0..n).map(|v| !env.domain().on_outer_layer(v)).collect();
        let y = env.domain().from_coords(&[2, 3]);
        let gxy = greens_function(&env, &lambda, x, y, 1e-13).unwrap();
        let gyx = greens_function(&env, &lambda, y, x, 1e-13).unwrap();
        assert!((env.pi(x) * gxy - env.pi(y) * gyx).abs() < 1e-8);
    }

    #[test]
    fn greens_function_d1_hitting_formula() {
        // segment {1..N-1} absorbing at 0 and N, unit conductances:
        // G(k,k) = 2 k (N-k) / N from the return-probability formula
        let n_len = 12usize;
        let env = path_env(&vec![1.0; n_len]);
        let n = n_len + 1;
        let lambda: Vec<bool> = (0..n).map(|v| v != 0 && v != n_len).collect();
        for k in 1..n_len {
            let g = greens_function(&env, &lambda, k, k, 1e-13).unwrap();
            let expect = 2.0 * k as f64 * (n_len - k) as f64 / n_len as f64;
            assert!((g - expect).abs() < 1e-9, "k={k}: {g} vs {expect}");
        }
    }

    #[test]
    fn poisson_zero_charge_gives_zero() {
        let dom = LatticeDomain::torus(vec![6, 6]).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        let rho = ScalarField::constant(dom.clone(), 0.0);
        let out = solve_poisson(&env, &rho, 0, 1e-12).unwrap();
        assert!(out.field.values.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn poisson_dipole_matches_resistance() {
        let dom = LatticeDomain::torus(vec![6, 6]).unwrap();
        let law = EnvironmentLaw::Iid {
            distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
        };
        let env = build_environment(&law, &dom, 8).unwrap();
        let x = dom.from_coords(&[1, 1]);
        let y = dom.from_coords(&[4, 3]);
        let mut rho = ScalarField::constant(dom.clone(), 0.0);
        rho.values[x] = 1.0;
        rho.values[y] = -1.0;
        let out = solve_poisson(&env, &rho, x, 1e-13).unwrap();
        let r = effective_resistance(&env, x, &[y], 1e-13).unwrap().resistance;
        // L phi = rho convention: phi(x) - phi(y) = -R(x,y)
        let diff = out.field.values[x] - out.field.values[y];
        assert!((diff + r).abs() < 1e-7, "diff={diff} R={r}");
    }

    #[test]
    fn poisson_linearity_and_charge_check() {
        let dom = LatticeDomain::torus(vec![5, 5]).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        let mut rho1 = ScalarField::constant(dom.clone(), 0.0);
        rho1.values[2] = 1.0;
        rho1.values[7] = -1.0;
        let mut rho2 = ScalarField::constant(dom.clone(), 0.0);
        rho2.values[11] = 2.0;
        rho2.values[17] = -2.0;
        let sum = ScalarField::new(
            dom.clone(),
            rho1.values
                .iter()
                .zip(&rho2.values)
                .map(|(a, b)| 2.0 * a + 0.5 * b)
                .collect(),
        )
        .unwrap();
        let s1 = solve_poisson(&env, &rho1, 0, 1e-13).unwrap();
        let s2 = solve_poisson(&env, &rho2, 0, 1e-13).unwrap();
        let s = solve_poisson(&env, &sum, 0, 1e-13).unwrap();
        for v in 0..dom.num_vertices() {
            let lin = 2.0 * s1.field.values[v] + 0.5 * s2.field.values[v];
            assert!((s.field.values[v] - lin).abs() < 1e-8);
        }
        // nonzero total charge rejected on the torus
        let mut bad = ScalarField::constant(dom.clone(), 0.0);
        bad.values[3] = 1.0;
        assert!(solve_poisson(&env, &bad, 0, 1e-10).is_err());
    }
}
