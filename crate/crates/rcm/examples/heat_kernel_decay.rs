//! Diagonal heat-kernel decay: P^{2n}(0,0) ~ n^{-d/2} on homogeneous tori,
//! read off exactly and fitted on a log-log grid, plus a continuous-time
//! kernel via uniformization.
//!
//! Run with: cargo run --release --example heat_kernel_decay

use rcm::domain::LatticeDomain;
use rcm::env::{build_environment, DistributionSpec, EnvironmentLaw};
use rcm::heatkernel::{continuous_kernel, exact_kernel, return_probability_series};

fn main() {
    for (label, sides, expect) in [
        ("d=1", vec![2048u32], -0.5),
        ("d=2", vec![128, 128], -1.0),
    ] {
        let dom = LatticeDomain::torus(sides).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        let series = return_probability_series(&env, 0, 256).unwrap();
        let slope = series.fitted_slope(32, 256);
        println!("{label}: fitted log-log slope {slope:.4} (expected {expect})");
        for &(t, p) in series.entries.iter().filter(|&&(t, _)| t % 128 == 0) {
            println!("   P^{t}(0,0) = {p:.6e}");
        }
    }

    // two-step identities
    let env1 = {
        let dom = LatticeDomain::torus(vec![64]).unwrap();
        build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap()
    };
    println!(
        "\nexact identities: P^2(0,0) = {} (d=1), P^4(0,0) = {}",
        exact_kernel(&env1, 0, 2).unwrap().probs[0],
        exact_kernel(&env1, 0, 4).unwrap().probs[0],
    );

    // disorder slows nothing at the exponent level (elliptic case)
    let dom = LatticeDomain::torus(vec![128, 128]).unwrap();
    let env = build_environment(
        &EnvironmentLaw::Iid {
            distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
        },
        &dom,
        7,
    )
    .unwrap();
    let series = return_probability_series(&env, dom.center(), 256).unwrap();
    println!(
        "elliptic iid uniform[0.5,2] in d=2: slope {:.4}",
        series.fitted_slope(32, 256)
    );

    // variable-speed continuous kernel by uniformization
    let snap = continuous_kernel(&env, dom.center(), 25.0, 1e-10).unwrap();
    let mass: f64 = snap.probs.iter().sum();
    println!(
        "VSRW kernel at t=25: diagonal {:.4e}, mass 1 {:+.1e}",
        snap.probs[dom.center()],
        mass - 1.0
    );
}
