//! The lattice Cauchy problem against its homogenized limit: a temperature
//! bump diffusing through iid conductances approaches the constant-
//! coefficient Gaussian evolution as the lattice spacing shrinks, and the
//! rescaled resolvent pairing approaches its Fourier-space target.
//!
//! Run with: cargo run --release --example homogenization

use rcm::corrector::{diffusion_matrix, periodized_corrector};
use rcm::domain::LatticeDomain;
use rcm::env::{build_environment, DistributionSpec, EnvironmentLaw};
use rcm::homogenize::{
    homogenization_error, resolvent_pairing, MacroscopicProfile,
};

fn main() {
    let law = EnvironmentLaw::Iid {
        distribution: DistributionSpec::Uniform { a: 0.5, b: 2.0 },
    };
    let profile = MacroscopicProfile::GaussianBump {
        center: vec![0.0, 0.0],
        width: 0.35,
        amplitude: 1.0,
    };

    // homogenized coefficients from a periodized corrector
    let q_dom = LatticeDomain::torus(vec![256, 256]).unwrap();
    let q_env = build_environment(&law, &q_dom, 1).unwrap();
    let chi = periodized_corrector(&q_env, 1e-11).unwrap();
    let dm = diffusion_matrix(&q_env, &chi).unwrap();
    println!(
        "iid uniform[0.5,2]: q = [[{:.4}, {:.4}], [{:.4}, {:.4}]]",
        dm.q[0][0], dm.q[0][1], dm.q[1][0], dm.q[1][1]
    );

    let eps_grid = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
    let table = homogenization_error(&law, &dm, &profile, 1.0, &eps_grid, 6.0, 2, 7).unwrap();
    println!("\nL2 error of u_eps(1,.) against the homogenized solution:");
    println!("{:>8} {:>12}", "eps", "L2 error");
    for (eps, err) in &table {
        println!("{eps:>8.4} {err:>12.6}");
    }

    // rescaled resolvent pairing vs the Fourier target
    let f = MacroscopicProfile::GaussianDipole {
        center1: vec![-0.75, 0.0],
        center2: vec![0.75, 0.0],
        width: 0.35,
        amplitude: 1.0,
    };
    println!("\nresolvent pairing <f_eps, (-L)^{{-1}} f_eps> vs <f, (-Q)^{{-1}} f>:");
    println!("{:>8} {:>12} {:>12} {:>8}", "eps", "pairing", "target", "gap %");
    for side in [32u32, 64, 128] {
        let box_len = 4.0;
        let eps = box_len / side as f64;
        let dom = LatticeDomain::torus(vec![side, side]).unwrap();
        let env = build_environment(&law, &dom, 11).unwrap();
        let out = resolvent_pairing(&env, &f, &f, &dm, eps, box_len, 1e-11).unwrap();
        println!(
            "{eps:>8.4} {:>12.6} {:>12.6} {:>8.3}",
            out.pairing,
            out.target,
            100.0 * (out.pairing - out.target).abs() / out.target
        );
    }
}
