//! Cross-checks pairing solvers with independent Monte Carlo routes: the
//! plate potential against hitting probabilities, the escape conductance
//! against pi(x) times the no-return probability, and the line-constant toy
//! model against its ergodic-average variance.

use rand::Rng;
use rcm::domain::{BoundaryMode, LatticeDomain};
use rcm::env::{build_environment, DistributionSpec, Environment, EnvironmentLaw};
use rcm::potential::{self, CenteredBox};
use rcm::rng;
use rcm::stats;
use rcm::walk;

/// simulate one discrete step from `v` using a sequential stream
fn step(env: &Environment, v: usize, stream: &mut rand_chacha::ChaCha8Rng) -> usize {
    let pi = env.pi(v);
    let u: f64 = stream.gen::<f64>() * pi;
    let mut acc = 0.0;
    let mut last = v;
    for (axis, sign, w) in env.domain().neighbors(v) {
        let c = env.conductance_signed(v, axis, sign);
        if c > 0.0 {
            acc += c;
            last = w;
            if u < acc {
                return w;
            }
        }
    }
    last
}

#[test]
fn plate_potential_matches_hitting_probabilities() {
    // percolation slab: the potential solves the Dirichlet problem, and
    // phi(x) = P(top before bottom) - P(bottom before top)
    let dom = LatticeDomain::new(vec![15, 13], BoundaryMode::Free).unwrap();
    let mut base = 50u64;
    let (env, start) = loop {
        let env =
            build_environment(&EnvironmentLaw::Percolation { p: 0.75 }, &dom, base).unwrap();
        base += 1;
        // need the center attached to both plates for a meaningful check
        let out = potential::plate_potential(&env, 1e-11);
        if let Ok(solved) = out {
            let center = dom.center();
            if env.pi(center) > 0.0 && solved.field.values[center].abs() > 1e-12 {
                break (env, center);
            }
        }
    };
    let solved = potential::plate_potential(&env, 1e-11).unwrap();
    let top = dom.sides()[1] as i64 - 1;
    let trials = 40_000;
    let mut score = 0i64;
    let mut stream = rng::stream(777, 1, 0);
    for _ in 0..trials {
        let mut v = start;
        loop {
            let h = dom.to_coords(v)[1];
            if h == top {
                score += 1;
                break;
            }
            if h == 0 {
                score -= 1;
                break;
            }
            v = step(&env, v, &mut stream);
        }
    }
    let estimate = score as f64 / trials as f64;
    // binomial-style standard error of the +-1 score
    let se = (1.0 / trials as f64).sqrt();
    let solver_value = solved.field.values[start];
    assert!(
        (estimate - solver_value).abs() < 3.5 * se,
        "MC {estimate:.4} vs solver {solver_value:.4} (se {se:.4})"
    );
}

#[test]
fn escape_conductance_matches_no_return_probability() {
    // R(x, Lambda^c)^{-1} = pi(x) P^x(no return to x before exiting Lambda)
    let dom = LatticeDomain::new(vec![17, 17], BoundaryMode::Free).unwrap();
    let env = build_environment(
        &EnvironmentLaw::Iid {
            distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
        },
        &dom,
        4,
    )
    .unwrap();
    let x = dom.center();
    let radius = 5i64;
    let lambda = CenteredBox {
        center: dom.to_coords(x),
        radius,
    };
    let solver = potential::escape_conductance(&env, x, &lambda, 1e-12)
        .unwrap()
        .conductance;
    let trials = 60_000;
    let mut escapes = 0u64;
    let mut stream = rng::stream(778, 1, 0);
    for _ in 0..trials {
        let mut v = step(&env, x, &mut stream);
        loop {
            if v == x {
                break; // returned first
            }
            let c = dom.to_coords(v);
            if !lambda.contains(&c) {
                escapes += 1;
                break;
            }
            v = step(&env, v, &mut stream);
        }
    }
    let p_escape = escapes as f64 / trials as f64;
    let estimate = env.pi(x) * p_escape;
    let se = env.pi(x) * (p_escape * (1.0 - p_escape) / trials as f64).sqrt();
    assert!(
        (estimate - solver).abs() < 3.5 * se,
        "MC {estimate:.4} vs solver {solver:.4} (se {se:.4})"
    );
}

#[test]
fn line_constant_toy_model_normality() {
    // balanced toy model: X_n is a martingale; the per-direction variance is
    // the ergodic average of f(w) = E(|e.X_1|^2) along the trajectory, and
    // the scaled endpoints pass a KS test against N(0, sigma^2)
    let side = 256u32;
    let dom = LatticeDomain::torus(vec![side, side]).unwrap();
    let env = build_environment(
        &EnvironmentLaw::LineConstant {
            distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
        },
        &dom,
        9,
    )
    .unwrap();
    // every vertex is balanced
    for v in (0..env.num_vertices()).step_by(97) {
        let drift = walk::local_drift(&env, v).unwrap();
        assert!(drift.iter().all(|c| c.abs() < 1e-14));
    }
    // sigma^2 along direction 0 from the ergodic average over one long path
    let probe = walk::simulate_discrete(&env, 0, 1_000_000, 5).unwrap();
    let mut acc = 0.0;
    for &v in probe.vertices.iter() {
        let pi = env.pi(v);
        let c_fwd = env.conductance_signed(v, 0, 1);
        let c_bwd = env.conductance_signed(v, 0, -1);
        acc += (c_fwd + c_bwd) / pi;
    }
    let sigma2 = acc / probe.vertices.len() as f64;

    // endpoint samples pooled over starting vertices (annealed law);
    // n large enough that the lattice-parity discreteness of X_n/sqrt(n)
    // sits well below the KS band
    let n = 8192usize;
    let n_walks = 3000usize;
    let mut xs = Vec::with_capacity(n_walks);
    for i in 0..n_walks {
        let x0 = (i * env.num_vertices()) / n_walks;
        let s = walk::scaled_endpoint_samples(&env, x0, n, 1, 600 + i as u64).unwrap();
        xs.push(s[0][0]);
    }
    let ks = stats::ks_statistic(&mut xs, |x| stats::normal_cdf(x, 0.0, sigma2.sqrt()));
    let crit = stats::ks_critical_1pct(n_walks);
    assert!(ks < crit, "KS {ks:.4} >= {crit:.4} (sigma2 {sigma2:.4})");
    // balanced environment: sample mean within 3 standard errors of zero
    let mean = stats::mean(&xs);
    let se = stats::standard_error(&xs);
    assert!(mean.abs() < 3.0 * se);
}

#[test]
fn greens_function_counts_expected_visits() {
    // G(x,y) is the expected number of visits to y before exiting Lambda
    let dom = LatticeDomain::new(vec![9, 9], BoundaryMode::Free).unwrap();
    let env = build_environment(
        &EnvironmentLaw::Iid {
            distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
        },
        &dom,
        11,
    )
    .unwrap();
    let n = dom.num_vertices();
    let lambda: Vec<bool> = (0..n).map(|v| !dom.on_outer_layer(v)).collect();
    let x = dom.center();
    let y = dom.from_coords(&[3, 4]);
    let exact = potential::greens_function(&env, &lambda, x, y, 1e-12).unwrap();
    let trials = 60_000;
    let mut visits = Vec::with_capacity(trials);
    let mut stream = rng::stream(779, 1, 0);
    for _ in 0..trials {
        let mut v = x;
        let mut count = 0.0;
        while lambda[v] {
            if v == y {
                count += 1.0;
            }
            v = step(&env, v, &mut stream);
        }
        visits.push(count);
    }
    let mean = stats::mean(&visits);
    let se = stats::standard_error(&visits);
    assert!(
        (mean - exact).abs() < 3.5 * se,
        "MC {mean:.4} vs exact {exact:.4} (se {se:.4})"
    );
}
