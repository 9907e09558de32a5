//! Periodized correctors and the homogenized diffusion matrix.
//!
//! In d=1 the corrector has a closed form (harmonic-mean increments) and the
//! discrete-time diffusion constant is 1/(E(w) E(1/w)). In d=2 the two-point
//! law {a, b} with equal weights is self-dual: the effective conductivity is
//! sqrt(ab), a sharp external check on the whole pipeline.
//!
//! Run with: cargo run --release --example corrector_diffusion

use rcm::corrector::{
    d1_cycle_corrector, diffusion_matrix, nondegeneracy_lower_bound, periodized_corrector,
    sublinearity_profile,
};
use rcm::domain::LatticeDomain;
use rcm::env::{build_environment, DistributionSpec, EnvironmentLaw};

fn main() {
    // d = 1: corrector against the closed form
    let dom = LatticeDomain::torus(vec![4096]).unwrap();
    let law = EnvironmentLaw::Iid {
        distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
    };
    let env = build_environment(&law, &dom, 1).unwrap();
    let chi = periodized_corrector(&env, 1e-12).unwrap();
    let explicit = d1_cycle_corrector(&env).unwrap();
    let max_err = (0..4096)
        .map(|v| (chi.components[0][v] - explicit[v]).abs())
        .fold(0.0f64, f64::max);
    println!("d=1 cycle (4096): corrector vs closed form, max error {max_err:.2e}");

    let dm = diffusion_matrix(&env, &chi).unwrap();
    let mean_w = env.edge_values().iter().sum::<f64>() / 4096.0;
    let mean_inv = env.edge_values().iter().map(|&w| 1.0 / w).sum::<f64>() / 4096.0;
    println!(
        "d=1 discrete-time variance: measured {:.6}, formula 1/(E(w)E(1/w)) = {:.6}",
        dm.discrete_covariance()[0][0],
        1.0 / (mean_w * mean_inv)
    );

    // d = 2 self-dual check: sqrt(ab) for the balanced two-point law
    let dom2 = LatticeDomain::torus(vec![256, 256]).unwrap();
    let (a, b) = (1.0, 4.0);
    let law2 = EnvironmentLaw::Iid {
        distribution: DistributionSpec::TwoPoint { v1: a, p1: 0.5, v2: b },
    };
    let env2 = build_environment(&law2, &dom2, 3).unwrap();
    let chi2 = periodized_corrector(&env2, 1e-11).unwrap();
    let dm2 = diffusion_matrix(&env2, &chi2).unwrap();
    println!(
        "\nd=2 two-point {{1,4}} at p=1/2: q_00 = {:.4}, q_11 = {:.4} (duality predicts sqrt(ab) = {:.4})",
        dm2.q[0][0],
        dm2.q[1][1],
        (a * b).sqrt()
    );
    let bounds = nondegeneracy_lower_bound(&env2);
    let disc = dm2.discrete_covariance();
    println!(
        "nondegeneracy bounds per direction: {:.4}, {:.4} <= measured {:.4}, {:.4}",
        bounds[0], bounds[1], disc[0][0], disc[1][1]
    );

    // sublinearity diagnostics of the corrector field
    let diag = sublinearity_profile(&chi2, dom2.center(), &[8, 16, 32, 64], 0.1, 2.0);
    println!("\nsublinearity of chi (eps = 0.1, K = 2):");
    println!("{:>4} {:>14} {:>18}", "n", "max|chi|/n", "frac |chi|>=eps n");
    for &(n, ratio, viol) in &diag.per_radius {
        println!("{n:>4} {ratio:>14.5} {viol:>18.5}");
    }
    println!("(K,eps)-good density along the axes: {:.3}", diag.good_density_axes);
}
