//! Walk simulators for the conductance chain.
//!
//! Three clocks over the same jump chain P(x,y) = omega_xy / pi(x):
//! discrete time, constant speed (rate-1 exponential holding times, the
//! Poissonization of discrete time) and variable speed (holding time
//! exponential with rate pi(x), the chain generated by
//! (L f)(x) = sum_y omega_xy [f(y) - f(x)]).
//!
//! Jump targets and holding times come from separate substreams of the walk
//! seed, so the embedded chain of a continuous-time walk coincides exactly
//! with the discrete walk of the same seed.
//!
//! Torus displacements are tracked in the universal cover (winding counted),
//! which is what diffusive rescalings X_n / sqrt(n) refer to.

use crate::env::Environment;
use crate::error::{RcmError, Result};
use crate::rng::{self, tag};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A simulated trajectory. `times` is present for continuous-time walks
/// (strictly increasing, starting at 0). `absorbed` is set when the walk hit
/// an absorbing vertex before using up its budget.
#[derive(Debug, Clone)]
pub struct WalkPath {
    pub start: usize,
    pub vertices: Vec<usize>,
    pub times: Option<Vec<f64>>,
    pub seed: u64,
    pub absorbed: bool,
}

impl WalkPath {
    pub fn len_steps(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Unwrapped displacement from the start after `k` steps.
    pub fn displacement(&self, env: &Environment, k: usize) -> Vec<i64> {
        let d = env.domain().dimension();
        let mut disp = vec![0i64; d];
        for pair in self.vertices.windows(2).take(k) {
            let step = env.domain().step_displacement(pair[0], pair[1]);
            for i in 0..d {
                disp[i] += step[i];
            }
        }
        disp
    }
}

enum Clock {
    Discrete,
    ConstantSpeed,
    VariableSpeed,
}

/// One jump of the embedded chain, drawn from the target stream.
fn jump(env: &Environment, v: usize, targets: &mut ChaCha8Rng) -> Result<usize> {
    let pi = env.pi(v);
    if pi <= 0.0 {
        return Err(RcmError::DegenerateVertex { vertex: v });
    }
    let u: f64 = targets.gen::<f64>() * pi;
    let mut acc = 0.0;
    let mut last = None;
    for axis in 0..env.domain().dimension() {
        for sign in [1i64, -1] {
            if let Some(w) = env.domain().neighbor(v, axis, sign) {
                let c = env.conductance_signed(v, axis, sign);
                if c > 0.0 {
                    acc += c;
                    last = Some(w);
                    if u < acc {
                        return Ok(w);
                    }
                }
            }
        }
    }
    // numerical edge of the cumulative sum: take the last positive option
    last.ok_or(RcmError::DegenerateVertex { vertex: v })
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen::<f64>();
    -(1.0 - u).ln() / rate
}

fn simulate(
    env: &Environment,
    x0: usize,
    clock: Clock,
    n_steps: usize,
    t_max: f64,
    seed: u64,
    walk_index: u64,
) -> Result<WalkPath> {
    if env.pi(x0) <= 0.0 {
        return Err(RcmError::DegenerateVertex { vertex: x0 });
    }
    let mut targets = rng::stream(seed, tag::WALK, walk_index * 2);
    let mut clocks = rng::stream(seed, tag::WALK, walk_index * 2 + 1);
    let mut vertices = vec![x0];
    let mut times = match clock {
        Clock::Discrete => None,
        _ => Some(vec![0.0]),
    };
    let mut absorbed = env.domain().is_absorbing(x0);
    let mut v = x0;
    let mut t = 0.0;
    loop {
        match clock {
            Clock::Discrete => {
                if vertices.len() > n_steps || absorbed {
                    break;
                }
            }
            _ => {
                if absorbed {
                    break;
                }
            }
        }
        match clock {
            Clock::Discrete => {}
            Clock::ConstantSpeed => {
                let hold = exponential(&mut clocks, 1.0);
                if t + hold > t_max {
                    break;
                }
                t += hold;
            }
            Clock::VariableSpeed => {
                let hold = exponential(&mut clocks, env.pi(v));
                if t + hold > t_max {
                    break;
                }
                t += hold;
            }
        }
        v = jump(env, v, &mut targets)?;
        vertices.push(v);
        if let Some(ts) = times.as_mut() {
            ts.push(t);
        }
        if env.domain().is_absorbing(v) {
            absorbed = true;
        }
    }
    Ok(WalkPath {
        start: x0,
        vertices,
        times,
        seed,
        absorbed,
    })
}

/// Discrete-time walk: `n_steps` jumps of P (fewer when absorbed).
pub fn simulate_discrete(env: &Environment, x0: usize, n_steps: usize, seed: u64) -> Result<WalkPath> {
    simulate(env, x0, Clock::Discrete, n_steps, 0.0, seed, 0)
}

/// Constant-speed walk up to time `t_max`: jumps of P at unit-rate
/// exponential times.
pub fn simulate_csrw(env: &Environment, x0: usize, t_max: f64, seed: u64) -> Result<WalkPath> {
    simulate(env, x0, Clock::ConstantSpeed, 0, t_max, seed, 0)
}

/// Variable-speed walk up to time `t_max`: holding time at x is
/// exponential(pi(x)), target drawn proportionally to the conductances.
pub fn simulate_vsrw(env: &Environment, x0: usize, t_max: f64, seed: u64) -> Result<WalkPath> {
    simulate(env, x0, Clock::VariableSpeed, 0, t_max, seed, 0)
}

/// Running sums sum_{k<=m} 1/pi(X_k) of a discrete path: the diagnostic
/// series whose finiteness decides variable-speed blow-up.
pub fn blowup_statistic(env: &Environment, path: &WalkPath) -> Vec<f64> {
    let mut acc = 0.0;
    path.vertices
        .iter()
        .map(|&v| {
            acc += 1.0 / env.pi(v);
            acc
        })
        .collect()
}

/// Local drift V(x) = E^x(X_1 - x) = sum_y P(x,y) (y - x), displacements
/// taken through the boundary mode.
pub fn local_drift(env: &Environment, x: usize) -> Result<Vec<f64>> {
    let pi = env.pi(x);
    if pi <= 0.0 {
        return Err(RcmError::DegenerateVertex { vertex: x });
    }
    let d = env.domain().dimension();
    let mut drift = vec![0.0; d];
    for axis in 0..d {
        for sign in [1i64, -1] {
            if env.domain().neighbor(x, axis, sign).is_some() {
                let c = env.conductance_signed(x, axis, sign);
                drift[axis] += c / pi * sign as f64;
            }
        }
    }
    Ok(drift)
}

/// Endpoint samples X_n / sqrt(n) of `n_walks` independent discrete walks.
/// Walk i uses the stream pair (seed, i); the result is a matrix of
/// n_walks rows of d entries.
pub fn scaled_endpoint_samples(
    env: &Environment,
    x0: usize,
    n: usize,
    n_walks: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if env.pi(x0) <= 0.0 {
        return Err(RcmError::DegenerateVertex { vertex: x0 });
    }
    let d = env.domain().dimension();
    let sqrt_n = (n as f64).sqrt();
    let mut out = Vec::with_capacity(n_walks);
    for i in 0..n_walks {
        let mut targets = rng::stream(seed, tag::WALK, (i as u64) * 2);
        let mut v = x0;
        let mut disp = vec![0i64; d];
        for _ in 0..n {
            let w = jump(env, v, &mut targets)?;
            let step = env.domain().step_displacement(v, w);
            for a in 0..d {
                disp[a] += step[a];
            }
            v = w;
            if env.domain().is_absorbing(v) {
                return Err(RcmError::Geometry(
                    "endpoint sampling needs a non-absorbing domain".into(),
                ));
            }
        }
        out.push(disp.iter().map(|&x| x as f64 / sqrt_n).collect());
    }
    Ok(out)
}
