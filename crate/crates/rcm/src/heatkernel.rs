//! Exact heat-kernel machinery: n-step distributions by repeated sparse row
//! application, continuous-time kernels by uniformization, diagonal
//! return-probability series, isoperimetric profiles with the Morris-Peres
//! mixing threshold, and the trap experiment.

use crate::env::{Environment, TrapGeometry};
use crate::error::{RcmError, Result};
use crate::stats;

/// An exact or sampled distribution P^n(x0, .) over vertices.
#[derive(Debug, Clone)]
pub struct KernelSnapshot {
    pub base: usize,
    pub steps: usize,
    pub probs: Vec<f64>,
    pub method: KernelMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelMethod {
    Exact,
    MonteCarlo { samples: usize },
}

/// Reciprocal pi with sticky vertices (absorbing or degenerate) zeroed out.
fn inv_pi_vector(env: &Environment) -> Vec<f64> {
    let dom = env.domain();
    (0..env.num_vertices())
        .map(|v| {
            let pi = env.pi(v);
            if pi > 0.0 && !dom.is_absorbing(v) {
                1.0 / pi
            } else {
                0.0
            }
        })
        .collect()
}

/// One application of the transition kernel: out(y) = sum_x f(x) P(x,y).
/// Mass at absorbing or degenerate vertices stays put.
pub fn kernel_step(env: &Environment, inv_pi: &[f64], f: &[f64], out: &mut [f64]) {
    let dom = env.domain();
    let n = dom.num_vertices();
    out[..n].fill(0.0);
    for e in 0..env.edge_values().len() {
        let w = env.edge_values()[e];
        if w == 0.0 {
            continue;
        }
        let (v, u, _) = dom.edge_endpoints(e);
        out[u] += f[v] * w * inv_pi[v];
        out[v] += f[u] * w * inv_pi[u];
    }
    for v in 0..n {
        if inv_pi[v] == 0.0 {
            out[v] += f[v];
        }
    }
}

/// Lazified step: out = gamma f + (1-gamma) P f.
pub fn kernel_step_lazy(env: &Environment, inv_pi: &[f64], gamma: f64, f: &[f64], out: &mut [f64]) {
    kernel_step(env, inv_pi, f, out);
    for (o, &fi) in out.iter_mut().zip(f) {
        *o = gamma * fi + (1.0 - gamma) * *o;
    }
}

/// Exact n-step distribution from `x0`.
pub fn exact_kernel(env: &Environment, x0: usize, n: usize) -> Result<KernelSnapshot> {
    exact_kernel_lazy(env, 0.0, x0, n)
}

/// Exact n-step distribution of the gamma-lazified chain.
pub fn exact_kernel_lazy(
    env: &Environment,
    gamma: f64,
    x0: usize,
    n: usize,
) -> Result<KernelSnapshot> {
    if env.pi(x0) <= 0.0 {
        return Err(RcmError::DegenerateVertex { vertex: x0 });
    }
    let nv = env.num_vertices();
    let inv_pi = inv_pi_vector(env);
    let mut f = vec![0.0; nv];
    f[x0] = 1.0;
    let mut g = vec![0.0; nv];
    for _ in 0..n {
        if gamma == 0.0 {
            kernel_step(env, &inv_pi, &f, &mut g);
        } else {
            kernel_step_lazy(env, &inv_pi, gamma, &f, &mut g);
        }
        std::mem::swap(&mut f, &mut g);
    }
    Ok(KernelSnapshot {
        base: x0,
        steps: n,
        probs: f,
        method: KernelMethod::Exact,
    })
}

/// Diagonal return probabilities P^{2n}(x0, x0) for n = 1..=n_max, computed
/// with one incremental kernel sweep.
#[derive(Debug, Clone)]
pub struct ReturnSeries {
    pub base: usize,
    /// (even step count 2n, P^{2n}(x0,x0))
    pub entries: Vec<(usize, f64)>,
}

impl ReturnSeries {
    /// Least-squares slope of log P^{2n}(0,0) against log n over entries
    /// with n_lo <= n <= n_hi (n = half the step count).
    pub fn fitted_slope(&self, n_lo: usize, n_hi: usize) -> f64 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .entries
            .iter()
            .filter(|&&(t, p)| t / 2 >= n_lo && t / 2 <= n_hi && p > 0.0)
            .map(|&(t, p)| (((t / 2) as f64).ln(), p.ln()))
            .unzip();
        let (_, slope, _) = stats::linear_fit(&xs, &ys);
        slope
    }

    /// Default tail fit: upper half of the n-range.
    pub fn tail_slope(&self) -> f64 {
        let n_max = self.entries.last().map(|&(t, _)| t / 2).unwrap_or(1);
        self.fitted_slope((n_max / 2).max(1), n_max)
    }
}

pub fn return_probability_series(
    env: &Environment,
    x0: usize,
    n_max: usize,
) -> Result<ReturnSeries> {
    if env.pi(x0) <= 0.0 {
        return Err(RcmError::DegenerateVertex { vertex: x0 });
    }
    let nv = env.num_vertices();
    let inv_pi = inv_pi_vector(env);
    let mut f = vec![0.0; nv];
    f[x0] = 1.0;
    let mut g = vec![0.0; nv];
    let mut entries = Vec::with_capacity(n_max);
    for step in 1..=(2 * n_max) {
        kernel_step(env, &inv_pi, &f, &mut g);
        std::mem::swap(&mut f, &mut g);
        if step % 2 == 0 {
            entries.push((step, f[x0]));
        }
    }
    Ok(ReturnSeries { base: x0, entries })
}

// ---------------------------------------------------------------------------
// continuous time (uniformization)
// ---------------------------------------------------------------------------

/// e^{tL} applied to `f0` for the variable-speed chain, by uniformization
/// with rate Lambda = max pi. The Poisson summation window over-covers any
/// truncation budget down to 1e-12 (absorbing layers are sticky as in the
/// discrete case).
pub fn semigroup_apply(env: &Environment, f0: &[f64], t: f64, _budget: f64) -> Result<Vec<f64>> {
    let nv = env.num_vertices();
    if t < 0.0 {
        return Err(RcmError::invalid("t", "negative time"));
    }
    if t == 0.0 {
        return Ok(f0.to_vec());
    }
    let lambda = env.max_pi();
    if lambda <= 0.0 {
        return Ok(f0.to_vec());
    }
    let lt = lambda * t;
    let spread = (12.0 * lt.sqrt()).ceil() + 40.0;
    let k_max = (lt + spread) as usize;

    // uniformized step: P_unif = I + L / lambda (sticky on absorbing layer)
    let dom = env.domain();
    let step = |f: &[f64], out: &mut [f64]| {
        out[..nv].fill(0.0);
        for e in 0..env.edge_values().len() {
            let w = env.edge_values()[e];
            if w == 0.0 {
                continue;
            }
            let (v, u, _) = dom.edge_endpoints(e);
            let (av, au) = (dom.is_absorbing(v), dom.is_absorbing(u));
            let r = w / lambda;
            if !av {
                out[v] += r * (f[u] - f[v]);
            }
            if !au {
                out[u] += r * (f[v] - f[u]);
            }
        }
        for i in 0..nv {
            out[i] += f[i];
        }
    };

    let mut f = f0.to_vec();
    let mut g = vec![0.0; nv];
    let mut acc = vec![0.0; nv];
    // log Poisson weights, built incrementally
    let mut logw = -lt;
    let ln_lt = lt.ln();
    for k in 0..=k_max {
        if k > 0 {
            logw += ln_lt - (k as f64).ln();
            step(&f, &mut g);
            std::mem::swap(&mut f, &mut g);
        }
        if logw > -700.0 {
            let w = logw.exp();
            for i in 0..nv {
                acc[i] += w * f[i];
            }
        }
    }
    Ok(acc)
}

/// Exact continuous-time distribution R^t(x0, .) of the VSRW.
pub fn continuous_kernel(
    env: &Environment,
    x0: usize,
    t: f64,
    budget: f64,
) -> Result<KernelSnapshot> {
    if env.pi(x0) <= 0.0 {
        return Err(RcmError::DegenerateVertex { vertex: x0 });
    }
    let mut f0 = vec![0.0; env.num_vertices()];
    f0[x0] = 1.0;
    let probs = semigroup_apply(env, &f0, t, budget)?;
    Ok(KernelSnapshot {
        base: x0,
        steps: 0,
        probs,
        method: KernelMethod::Exact,
    })
}

// ---------------------------------------------------------------------------
// isoperimetric profile
// ---------------------------------------------------------------------------

pub const ENUMERATION_CUTOFF: usize = 18;

/// Step-function profile phi(r) = inf{Q(A,A^c)/pi(A) : pi(A) <= r}, assembled
/// from connected-subset enumeration. `phi(r)` is +inf below the first
/// breakpoint and 0 at r >= pi(V) (the full set has empty boundary).
#[derive(Debug, Clone)]
pub struct IsoperimetricProfile {
    /// Breakpoints (r_i, phi_i) with r_i strictly increasing and phi_i
    /// strictly decreasing; phi(r) = phi_i on [r_i, r_{i+1}).
    pub breakpoints: Vec<(f64, f64)>,
    /// Total stationary mass pi(V); phi vanishes from here on.
    pub pi_total: f64,
    /// False when assembled by the greedy fallback (upper bounds on phi).
    pub exact: bool,
}

impl IsoperimetricProfile {
    pub fn from_points(mut points: Vec<(f64, f64)>, pi_total: f64, exact: bool) -> Self {
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut breakpoints: Vec<(f64, f64)> = Vec::new();
        let mut best = f64::INFINITY;
        for (r, ratio) in points {
            if ratio < best {
                best = ratio;
                match breakpoints.last_mut() {
                    Some(last) if last.0 == r => last.1 = best,
                    _ => breakpoints.push((r, best)),
                }
            }
        }
        IsoperimetricProfile {
            breakpoints,
            pi_total,
            exact,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.pi_total {
            return 0.0;
        }
        let mut val = f64::INFINITY;
        for &(rr, phi) in &self.breakpoints {
            if rr <= r {
                val = phi;
            } else {
                break;
            }
        }
        val
    }

    /// phi is nonincreasing by construction; exposed for the invariant tests.
    pub fn is_nonincreasing(&self) -> bool {
        self.breakpoints.windows(2).all(|w| w[1].1 <= w[0].1)
    }

    /// Profile of the gamma-lazified chain: the edge flow Q scales by
    /// (1 - gamma) while pi stays put.
    pub fn lazify(&self, gamma: f64) -> Self {
        IsoperimetricProfile {
            breakpoints: self
                .breakpoints
                .iter()
                .map(|&(r, p)| (r, (1.0 - gamma) * p))
                .collect(),
            pi_total: self.pi_total,
            exact: self.exact,
        }
    }
}

/// Exhaustively enumerate connected induced subgraphs of the positive-pi
/// graph (each proper nonempty subset visited once) and build the profile.
/// Components larger than `ENUMERATION_CUTOFF` vertices need
/// `allow_greedy`; greedy profiles are upper bounds.
pub fn isoperimetric_profile(
    env: &Environment,
    r_max: f64,
    allow_greedy: bool,
) -> Result<IsoperimetricProfile> {
    let n = env.num_vertices();
    let active: Vec<usize> = (0..n).filter(|&v| env.pi(v) > 0.0).collect();
    let pi_total: f64 = active.iter().map(|&v| env.pi(v)).sum();
    if active.is_empty() {
        return Err(RcmError::Consistency("no positive-pi vertices".into()));
    }
    if active.len() > ENUMERATION_CUTOFF {
        if !allow_greedy {
            return Err(RcmError::Consistency(format!(
                "{} vertices exceed the enumeration cutoff {ENUMERATION_CUTOFF}; \
                 pass allow_greedy for upper bounds",
                active.len()
            )));
        }
        return Ok(greedy_profile(env, &active, pi_total, r_max));
    }

    // local indices + weighted adjacency among active vertices
    let mut local = vec![usize::MAX; n];
    for (i, &v) in active.iter().enumerate() {
        local[v] = i;
    }
    let m = active.len();
    let mut adj_mask = vec![0u32; m];
    let mut weights = vec![Vec::new(); m];
    for (i, &v) in active.iter().enumerate() {
        for (w, c) in env.weighted_neighbors(v) {
            let j = local[w];
            adj_mask[i] |= 1 << j;
            weights[i].push((j, c));
        }
    }
    let pis: Vec<f64> = active.iter().map(|&v| env.pi(v)).collect();

    let mut points: Vec<(f64, f64)> = Vec::new();
    let full: u32 = if m == 32 { u32::MAX } else { (1 << m) - 1 };

    // enumerate connected subsets with a fixed minimal element `root`;
    // duplicates are avoided by banning each branched-on candidate from the
    // rest of its frame
    struct Frame {
        set: u32,
        cand: u32,
        pi: f64,
        cut: f64,
    }
    for root in 0..m {
        let above: u32 = full & !(((1u32 << root) - 1) | (1 << root));
        let mut stack = vec![Frame {
            set: 1 << root,
            cand: adj_mask[root] & above,
            pi: pis[root],
            cut: pis[root],
        }];
        while let Some(frame) = stack.pop() {
            if frame.set != full {
                points.push((frame.pi, frame.cut / frame.pi));
            }
            if frame.pi > r_max {
                continue; // pi only grows along the extension
            }
            let mut cand = frame.cand;
            let mut banned = 0u32;
            while cand != 0 {
                let j = cand.trailing_zeros() as usize;
                cand &= cand - 1;
                // cut delta: vertex j brings pi(j) minus twice its edges
                // into the current set
                let mut into = 0.0;
                for &(k, c) in &weights[j] {
                    if frame.set & (1 << k) != 0 {
                        into += c;
                    }
                }
                let grown = frame.set | (1 << j);
                let new_cand =
                    ((frame.cand | (adj_mask[j] & above)) & !grown) & !banned & !(1 << j);
                stack.push(Frame {
                    set: grown,
                    cand: new_cand,
                    pi: frame.pi + pis[j],
                    cut: frame.cut + pis[j] - 2.0 * into,
                });
                banned |= 1 << j;
            }
        }
    }
    Ok(IsoperimetricProfile::from_points(points, pi_total, true))
}

/// Greedy fallback: grow sets from seed vertices, always absorbing the
/// neighbor giving the smallest boundary-to-volume ratio.
fn greedy_profile(
    env: &Environment,
    active: &[usize],
    pi_total: f64,
    r_max: f64,
) -> IsoperimetricProfile {
    let mut points = Vec::new();
    let seeds: Vec<usize> = active
        .iter()
        .step_by((active.len() / 24).max(1))
        .copied()
        .collect();
    for &seed in &seeds {
        let mut in_set = std::collections::HashSet::from([seed]);
        let mut pi = env.pi(seed);
        let mut cut = env.pi(seed);
        points.push((pi, cut / pi));
        while pi <= r_max && in_set.len() < active.len() {
            let mut best: Option<(f64, usize, f64)> = None;
            for &v in in_set.iter() {
                for (w, _) in env.weighted_neighbors(v) {
                    if in_set.contains(&w) {
                        continue;
                    }
                    let mut into = 0.0;
                    for (z, c) in env.weighted_neighbors(w) {
                        if in_set.contains(&z) {
                            into += c;
                        }
                    }
                    let new_cut = cut + env.pi(w) - 2.0 * into;
                    let ratio = new_cut / (pi + env.pi(w));
                    if best.map_or(true, |(r, _, _)| ratio < r) {
                        best = Some((ratio, w, new_cut));
                    }
                }
            }
            match best {
                None => break,
                Some((_, w, new_cut)) => {
                    in_set.insert(w);
                    pi += env.pi(w);
                    cut = new_cut;
                    if in_set.len() < active.len() {
                        points.push((pi, cut / pi));
                    }
                }
            }
        }
    }
    IsoperimetricProfile::from_points(points, pi_total, false)
}

// ---------------------------------------------------------------------------
// Morris-Peres threshold
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Finite(f64),
    /// The integration range runs into phi = 0 (finite graphs with
    /// eps < 1/pi(V)): no step count can satisfy the target.
    Infinite,
}

/// Smallest n from the evolving-set bound: n >= 1 +
/// ((1-gamma)/gamma)^2 * integral_{4 pi_min}^{4/eps} dr / (r phi(r)^2),
/// where `profile` must belong to the lazified chain in use.
/// The step structure of the profile makes each segment integral exact.
pub fn morris_peres_threshold(
    profile: &IsoperimetricProfile,
    gamma: f64,
    eps: f64,
    pi_min: f64,
) -> Result<Threshold> {
    if !(0.0 < gamma && gamma < 0.5) {
        return Err(RcmError::invalid("gamma", "need 0 < gamma < 1/2"));
    }
    if !(eps > 0.0) {
        return Err(RcmError::invalid("eps", "need eps > 0"));
    }
    let lower = 4.0 * pi_min;
    let upper = 4.0 / eps;
    if upper <= lower {
        return Ok(Threshold::Finite(1.0));
    }
    if upper > profile.pi_total {
        return Ok(Threshold::Infinite);
    }
    // integrate over the step segments
    let mut integral = 0.0;
    let mut edges: Vec<f64> = vec![lower];
    for &(r, _) in &profile.breakpoints {
        if r > lower && r < upper {
            edges.push(r);
        }
    }
    edges.push(upper);
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let phi = profile.eval(a);
        if phi == 0.0 {
            return Ok(Threshold::Infinite);
        }
        if phi.is_infinite() {
            continue; // empty constraint set contributes nothing
        }
        integral += (b / a).ln() / (phi * phi);
    }
    let factor = ((1.0 - gamma) / gamma).powi(2);
    Ok(Threshold::Finite(1.0 + factor * integral))
}

// ---------------------------------------------------------------------------
// trap experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TrapDecay {
    /// Probed even step counts.
    pub times: Vec<usize>,
    /// Exact diagonal P^t(origin, origin).
    pub measured: Vec<f64>,
    /// Assembled product lower bound (path cost, entry factor, confinement,
    /// exit factor), each factor exact; 0 where the construction does not
    /// produce a valid excursion of that length.
    pub lower_bound: Vec<f64>,
}

/// Probability of staying on the core edge for `steps` steps (two-state
/// reduction, exact): bouncing between the endpoints costs
/// (1/(pi_lo pi_hi))^{steps/2}.
pub fn core_confinement(env: &Environment, geo: &TrapGeometry, steps: usize) -> f64 {
    let p_lo = 1.0 / env.pi(geo.core_lo);
    let p_hi = 1.0 / env.pi(geo.core_hi);
    (p_lo * p_hi).powi((steps / 2) as i32)
}

/// Exact diagonal at the origin of the trap construction, with the product
/// lower bound of the path/entry/confinement/exit decomposition.
pub fn trap_decay_experiment(
    env: &Environment,
    geo: &TrapGeometry,
    times: &[usize],
) -> Result<TrapDecay> {
    let origin = env.domain().center();
    if times.iter().any(|&t| t % 2 != 0) {
        return Err(RcmError::invalid("times", "probe even step counts"));
    }
    let t_max = times.iter().copied().max().unwrap_or(0);
    // one incremental sweep records every probed diagonal
    let nv = env.num_vertices();
    let inv_pi = inv_pi_vector(env);
    let mut f = vec![0.0; nv];
    f[origin] = 1.0;
    let mut g = vec![0.0; nv];
    let mut measured_map = std::collections::HashMap::new();
    for step in 1..=t_max {
        kernel_step(env, &inv_pi, &f, &mut g);
        std::mem::swap(&mut f, &mut g);
        if times.contains(&step) {
            measured_map.insert(step, f[origin]);
        }
    }

    // path factors (empty when the origin sits on the core edge)
    let on_core = origin == geo.core_lo || origin == geo.core_hi;
    let (path_cost, ell) = if on_core {
        (1.0, 0usize)
    } else {
        // stored from access vertex to origin; walk it origin -> access
        let rev: Vec<usize> = geo.path.iter().rev().copied().collect();
        let mut fwd = 1.0;
        let mut bwd = 1.0;
        for pair in rev.windows(2) {
            fwd *= edge_probability(env, pair[0], pair[1])?;
            bwd *= edge_probability(env, pair[1], pair[0])?;
        }
        (fwd * bwd, rev.len() - 1)
    };
    let entry_exit = if on_core {
        1.0
    } else {
        let entry = geo.strength / env.pi(geo.access);
        let exit = geo.strength / env.pi(geo.core_hi);
        entry * exit
    };
    let overhead = if on_core { 0 } else { 2 * ell + 2 };

    let mut measured = Vec::with_capacity(times.len());
    let mut lower = Vec::with_capacity(times.len());
    for &t in times {
        measured.push(*measured_map.get(&t).unwrap_or(&f64::NAN));
        if t >= overhead {
            let m = t - overhead;
            lower.push(path_cost * entry_exit * core_confinement(env, geo, m));
        } else {
            lower.push(0.0);
        }
    }
    Ok(TrapDecay {
        times: times.to_vec(),
        measured,
        lower_bound: lower,
    })
}

fn edge_probability(env: &Environment, from: usize, to: usize) -> Result<f64> {
    let pi = env.pi(from);
    if pi <= 0.0 {
        return Err(RcmError::DegenerateVertex { vertex: from });
    }
    for (axis, sign, w) in env.domain().neighbors(from) {
        if w == to {
            return Ok(env.conductance_signed(from, axis, sign) / pi);
        }
    }
    Err(RcmError::Geometry(format!("{from} and {to} are not neighbors")))
}

// ---------------------------------------------------------------------------
// diffusive bound statistics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DiffusiveBoundStats {
    /// sup over probed (x, t) of E|Y_t - x| / sqrt(t).
    pub sup_scaled_displacement: f64,
    /// sup over probed (x, t) of t^{d/2} P(Y_t = x).
    pub sup_scaled_diagonal: f64,
    pub method: KernelMethod,
}

/// Evaluate the two diffusive-bound envelopes for the variable-speed walk
/// over start vertices within l-infinity radius `radius` of the center and
/// the given time grid, using the uniformized exact kernel.
pub fn diffusive_bound_stats(
    env: &Environment,
    radius: i64,
    times: &[f64],
) -> Result<DiffusiveBoundStats> {
    let dom = env.domain();
    let d = dom.dimension();
    let center = dom.to_coords(dom.center());
    let mut sup_disp: f64 = 0.0;
    let mut sup_diag: f64 = 0.0;
    for v in 0..dom.num_vertices() {
        let c = dom.to_coords(v);
        if c.iter().zip(&center).any(|(&a, &b)| (a - b).abs() > radius) {
            continue;
        }
        if env.pi(v) <= 0.0 {
            continue;
        }
        for &t in times {
            if t <= 0.0 {
                continue;
            }
            let snap = continuous_kernel(env, v, t, 1e-10)?;
            let mut mean_dist = 0.0;
            for (w, &p) in snap.probs.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                // min-image distance on tori
                let cw = dom.to_coords(w);
                let mut r2 = 0.0;
                for i in 0..d {
                    let s = dom.sides()[i] as i64;
                    let mut delta = (cw[i] - c[i]).abs();
                    if dom.is_periodic() {
                        delta = delta.min(s - delta);
                    }
                    r2 += (delta * delta) as f64;
                }
                mean_dist += p * r2.sqrt();
            }
            sup_disp = sup_disp.max(mean_dist / t.sqrt());
            sup_diag = sup_diag.max(t.powf(d as f64 / 2.0) * snap.probs[v]);
        }
    }
    Ok(DiffusiveBoundStats {
        sup_scaled_displacement: sup_disp,
        sup_scaled_diagonal: sup_diag,
        method: KernelMethod::Exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BoundaryMode, LatticeDomain};
    use crate::env::{build_environment, build_trap_environment, DistributionSpec, EnvironmentLaw};

    fn unit_torus(sides: Vec<u32>) -> Environment {
        let dom = LatticeDomain::torus(sides).unwrap();
        build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap()
    }

    #[test]
    fn binomial_diagonals_d1_d2() {
        let env = unit_torus(vec![32]);
        let k2 = exact_kernel(&env, 0, 2).unwrap();
        assert_eq!(k2.probs[0], 0.5);
        let k4 = exact_kernel(&env, 0, 4).unwrap();
        assert!((k4.probs[0] - 0.375).abs() < 1e-15);

        let env2 = unit_torus(vec![16, 16]);
        let k2 = exact_kernel(&env2, 0, 2).unwrap();
        assert!((k2.probs[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mass_conservation_and_reversibility() {
        let dom = LatticeDomain::torus(vec![6, 6]).unwrap();
        let env = build_environment(
            &EnvironmentLaw::Iid {
                distribution: DistributionSpec::Uniform { a: 0.2, b: 3.0 },
            },
            &dom,
            5,
        )
        .unwrap();
        let n = 9;
        let x = 7usize;
        let y = 23usize;
        let kx = exact_kernel(&env, x, n).unwrap();
        let ky = exact_kernel(&env, y, n).unwrap();
        let mass: f64 = kx.probs.iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
        // pi(x) P^n(x,y) = pi(y) P^n(y,x)
        assert!((env.pi(x) * kx.probs[y] - env.pi(y) * ky.probs[x]).abs() < 1e-13);
    }

    #[test]
    fn return_series_positive_and_diffusive_slope() {
        let env = unit_torus(vec![64]);
        let series = return_probability_series(&env, 0, 64).unwrap();
        assert!(series.entries.iter().all(|&(_, p)| p > 0.0));
        let slope = series.fitted_slope(8, 64);
        assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn lazify_properties() {
        let dom = LatticeDomain::torus(vec![5, 5]).unwrap();
        let env = build_environment(
            &EnvironmentLaw::Iid {
                distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
            },
            &dom,
            2,
        )
        .unwrap();
        let inv_pi = inv_pi_vector(&env);
        let n = env.num_vertices();
        for x in [0usize, 12] {
            let mut f = vec![0.0; n];
            f[x] = 1.0;
            let mut plain = vec![0.0; n];
            kernel_step(&env, &inv_pi, &f, &mut plain);
            // gamma = 0 leaves the kernel unchanged
            let mut lazy0 = vec![0.0; n];
            kernel_step_lazy(&env, &inv_pi, 0.0, &f, &mut lazy0);
            assert_eq!(plain, lazy0);
            // row sums stay 1 and the diagonal is at least gamma
            let gamma = 0.25;
            let mut lazy = vec![0.0; n];
            kernel_step_lazy(&env, &inv_pi, gamma, &f, &mut lazy);
            let sum: f64 = lazy.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
            assert!(lazy[x] >= gamma);
        }
    }

    #[test]
    fn continuous_kernel_matches_eigen_expansion() {
        // unit 1D torus: R^t(0,0) = (1/L) sum_k exp(-t lambda_k)
        let l = 12usize;
        let env = unit_torus(vec![l as u32]);
        let t = 1.7;
        let snap = continuous_kernel(&env, 0, t, 1e-12).unwrap();
        let mut expect = 0.0;
        for k in 0..l {
            let lam = 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / l as f64).cos();
            expect += (-t * lam).exp();
        }
        expect /= l as f64;
        assert!(
            (snap.probs[0] - expect).abs() < 1e-10,
            "{} vs {expect}",
            snap.probs[0]
        );
        let mass: f64 = snap.probs.iter().sum();
        assert!((mass - 1.0).abs() < 1e-10);
        // t = 0 is the point mass
        let snap0 = continuous_kernel(&env, 3, 0.0, 1e-12).unwrap();
        assert_eq!(snap0.probs[3], 1.0);
    }

    /// all-subsets oracle: the inf over every nonempty proper subset
    fn brute_profile(env: &Environment) -> Vec<(f64, f64)> {
        let n = env.num_vertices();
        assert!(n <= 16);
        let dom = env.domain();
        let mut points = Vec::new();
        for mask in 1u32..((1 << n) - 1) {
            let mut pi = 0.0;
            for v in 0..n {
                if mask & (1 << v) != 0 {
                    pi += env.pi(v);
                }
            }
            if pi == 0.0 {
                continue;
            }
            let mut cut = 0.0;
            for e in 0..env.edge_values().len() {
                let (v, u, _) = dom.edge_endpoints(e);
                let inv = mask & (1 << v) != 0;
                let inu = mask & (1 << u) != 0;
                if inv != inu {
                    cut += env.edge_values()[e];
                }
            }
            points.push((pi, cut / pi));
        }
        points
    }

    #[test]
    fn profile_unit_cycle_arcs() {
        // cycle of L vertices: arcs of k give Q = 2, pi = 2k, phi(2k) = 1/k
        let l = 10;
        let env = unit_torus(vec![l]);
        let profile = isoperimetric_profile(&env, 1e18, false).unwrap();
        for k in 1..l as usize {
            let phi = profile.eval(2.0 * k as f64);
            assert!((phi - 1.0 / k as f64).abs() < 1e-12, "phi(2*{k}) = {phi}");
        }
        assert!(profile.is_nonincreasing());
        assert_eq!(profile.eval(2.0 * l as f64), 0.0);
    }

    #[test]
    fn profile_connected_enumeration_equals_all_subsets() {
        // on a connected graph, restricting the inf to connected sets loses
        // nothing: dual enumeration on a conductance-weighted 3x3 box
        let dom = LatticeDomain::new(vec![3, 3], BoundaryMode::Free).unwrap();
        let env = build_environment(
            &EnvironmentLaw::Iid {
                distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
            },
            &dom,
            6,
        )
        .unwrap();
        let connected = isoperimetric_profile(&env, 1e18, false).unwrap();
        let brute = IsoperimetricProfile::from_points(
            brute_profile(&env),
            env.pi_values().iter().sum(),
            true,
        );
        for i in 1..200 {
            let r = 0.1 * i as f64;
            let a = connected.eval(r);
            let b = brute.eval(r);
            if a.is_infinite() && b.is_infinite() {
                continue;
            }
            assert!((a - b).abs() < 1e-12, "r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn morris_peres_closed_form_oracle() {
        // phi(r) = r^{-1/2} on a fine grid, gamma = 1/4, pi_min = 1:
        // integral of dr/(r phi^2) = 4/eps - 4, threshold = 1 + 9(4/eps - 4)
        let grid: Vec<(f64, f64)> = (0..200_000)
            .map(|i| {
                let r = 4.0 + (i as f64) * (400.0 - 4.0) / 200_000.0;
                (r, r.powf(-0.5))
            })
            .collect();
        let profile = IsoperimetricProfile::from_points(grid, 1e9, true);
        for eps in [0.1, 0.05] {
            let got = match morris_peres_threshold(&profile, 0.25, eps, 1.0).unwrap() {
                Threshold::Finite(x) => x,
                Threshold::Infinite => panic!("finite expected"),
            };
            let expect = 1.0 + 9.0 * (4.0 / eps - 4.0);
            assert!(
                (got - expect).abs() < 1e-3 * expect,
                "eps={eps}: {got} vs {expect}"
            );
        }
        // empty integration range: threshold 1
        let t = morris_peres_threshold(&profile, 0.25, 1.5, 1.0).unwrap();
        assert_eq!(t, Threshold::Finite(1.0));
        // too-small eps on a finite graph: infinite
        let small = IsoperimetricProfile::from_points(vec![(2.0, 0.5)], 24.0, true);
        assert_eq!(
            morris_peres_threshold(&small, 0.25, 0.01, 1.0).unwrap(),
            Threshold::Infinite
        );
    }

    #[test]
    fn morris_peres_implication_on_small_graph() {
        // exact verification of P^n(x,y) <= eps pi(y) at the returned n
        let dom = LatticeDomain::new(vec![3, 3], BoundaryMode::Free).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 4.0 }, &dom, 0).unwrap();
        let gamma = 0.25;
        let eps = 0.1;
        let base = isoperimetric_profile(&env, 4.0 / eps + 1.0, false).unwrap();
        let lazified = base.lazify(gamma);
        for x in 0..env.num_vertices() {
            for y in 0..env.num_vertices() {
                let pi_min = env.pi(x).min(env.pi(y));
                match morris_peres_threshold(&lazified, gamma, eps, pi_min).unwrap() {
                    Threshold::Infinite => continue,
                    Threshold::Finite(thr) => {
                        let n = thr.ceil() as usize;
                        let k = exact_kernel_lazy(&env, gamma, x, n).unwrap();
                        assert!(
                            k.probs[y] <= eps * env.pi(y) + 1e-12,
                            "x={x} y={y} n={n}: {} > {}",
                            k.probs[y],
                            eps * env.pi(y)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn trap_bound_below_exact_diagonal() {
        let dom = LatticeDomain::new(vec![65, 65], BoundaryMode::Free).unwrap();
        let strength = 1.0 / 16.0;
        // trap away from the origin: exercises all four product factors
        let (env, geo) = build_trap_environment(
            &dom,
            strength,
            &[36, 32],
            &EnvironmentLaw::Constant { value: 1.0 },
            0,
        )
        .unwrap();
        let times: Vec<usize> = (1..=16).map(|k| 2 * k).collect();
        let decay = trap_decay_experiment(&env, &geo, &times).unwrap();
        for i in 0..times.len() {
            assert!(
                decay.measured[i] >= decay.lower_bound[i],
                "t={}: measured {} < bound {}",
                times[i],
                decay.measured[i],
                decay.lower_bound[i]
            );
        }
        // confinement stays uniformly positive for m of the order 1/strength:
        // (1 + 3/n)^{-2m} >= e^{-6} whenever m <= n (here n = 16 = m)
        let m = 16usize;
        let conf = core_confinement(&env, &geo, 2 * m);
        assert!(conf > (-6.0f64).exp(), "confinement {conf}");
    }

    #[test]
    fn trap_at_origin_uses_confinement_only() {
        let dom = LatticeDomain::new(vec![41, 41], BoundaryMode::Free).unwrap();
        let (env, geo) = build_trap_environment(
            &dom,
            0.1,
            &dom.to_coords(dom.center()),
            &EnvironmentLaw::Constant { value: 1.0 },
            0,
        )
        .unwrap();
        assert!(geo.path.is_empty());
        let decay = trap_decay_experiment(&env, &geo, &[2, 4, 8]).unwrap();
        for i in 0..3 {
            assert!(decay.measured[i] >= decay.lower_bound[i]);
            assert!(decay.lower_bound[i] > 0.0);
        }
    }

    #[test]
    fn diffusive_stats_homogeneous() {
        let env = unit_torus(vec![24, 24]);
        let stats = diffusive_bound_stats(&env, 2, &[4.0, 8.0, 16.0]).unwrap();
        // homogeneous d=2 VSRW: both envelopes are order-one constants
        assert!(stats.sup_scaled_displacement < 3.0);
        assert!(stats.sup_scaled_diagonal < 1.0);
        assert!(stats.sup_scaled_diagonal > 0.01);
    }
}
