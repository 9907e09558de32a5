//! Scaling of the gradient field to the Gaussian free field: the variance
//! of the rescaled functional phi_eps(f) computed exactly per conductance
//! sample converges to <f, (-Q)^{-1} f> with Q built from the homogenized
//! diffusion matrix of the stiffness law.
//!
//! Run with: cargo run --release --example gff_scaling

use rcm::corrector::{diffusion_matrix, periodized_corrector};
use rcm::domain::LatticeDomain;
use rcm::env::{build_environment, DistributionSpec, EnvironmentLaw};
use rcm::gradfield::{functional_variance, gff_variance_target};
use rcm::homogenize::{cell_averages, MacroscopicProfile};

fn main() {
    let law = EnvironmentLaw::Iid {
        distribution: DistributionSpec::TwoPoint {
            v1: 1.0,
            p1: 0.5,
            v2: 2.0,
        },
    };
    let box_len = 4.0;
    let profile = MacroscopicProfile::GaussianDipole {
        center1: vec![-0.75, 0.0],
        center2: vec![0.75, 0.0],
        width: 0.35,
        amplitude: 1.0,
    };

    // q of the stiffness law from a periodized corrector
    let q_dom = LatticeDomain::torus(vec![256, 256]).unwrap();
    let q_env = build_environment(&law, &q_dom, 100).unwrap();
    let chi = periodized_corrector(&q_env, 1e-11).unwrap();
    let dm = diffusion_matrix(&q_env, &chi).unwrap();
    println!(
        "stiffness law {{1,2}} at p=1/2: q_00 = {:.5} (self-duality predicts sqrt(2) = {:.5})",
        dm.q[0][0],
        2.0f64.sqrt()
    );

    let tcells = cell_averages(&profile, &q_dom, box_len / 256.0);
    let target = gff_variance_target(&tcells, &[256, 256], box_len, &dm.q).unwrap();
    println!("GFF variance target <f,(-Q)^{{-1}}f> = {target:.6}\n");

    println!("{:>6} {:>10} {:>12} {:>10}", "side", "eps", "Var", "gap %");
    for side in [32u32, 64, 128] {
        let dom = LatticeDomain::torus(vec![side, side]).unwrap();
        let eps = box_len / side as f64;
        let mut cells = cell_averages(&profile, &dom, eps);
        let mean = cells.iter().sum::<f64>() / cells.len() as f64;
        for c in cells.iter_mut() {
            *c -= mean;
        }
        let samples = 6;
        let mut acc = 0.0;
        for s in 0..samples {
            let env = build_environment(&law, &dom, 200 + s).unwrap();
            acc += eps.powi(4) * functional_variance(&env, &cells, 1e-12).unwrap();
        }
        let var = acc / samples as f64;
        println!(
            "{side:>6} {eps:>10.4} {var:>12.6} {:>10.3}",
            100.0 * (var - target).abs() / target
        );
    }
    println!("\n(the variance is the exact quadratic form <c,(-L)^+ c>, no field sampling noise)");
}
