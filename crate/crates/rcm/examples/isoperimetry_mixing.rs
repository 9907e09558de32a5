//! Isoperimetric profiles by exhaustive connected-subset enumeration, and
//! the evolving-set mixing threshold: past the integral bound
//! n >= 1 + ((1-g)/g)^2 int dr/(r phi(r)^2), the lazified chain satisfies
//! P^n(x,y) <= eps pi(y) -- verified here with exact kernels.
//!
//! Run with: cargo run --release --example isoperimetry_mixing

use rcm::domain::{BoundaryMode, LatticeDomain};
use rcm::env::{build_environment, EnvironmentLaw};
use rcm::heatkernel::{
    exact_kernel_lazy, isoperimetric_profile, morris_peres_threshold, Threshold,
};

fn main() {
    // profile of the unit cycle: arcs of k vertices give phi(2k) = 1/k
    let dom = LatticeDomain::torus(vec![12]).unwrap();
    let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
    let profile = isoperimetric_profile(&env, 1e9, false).unwrap();
    println!("unit 12-cycle profile (r, phi):");
    for &(r, phi) in &profile.breakpoints {
        println!("  phi({r:>4.1}) = {phi:.4}");
    }

    // mixing threshold on a small box, then the exact verification
    let dom = LatticeDomain::new(vec![4, 4], BoundaryMode::Free).unwrap();
    let env = build_environment(&EnvironmentLaw::Constant { value: 8.0 }, &dom, 0).unwrap();
    let gamma = 0.25;
    let eps = 0.05;
    let profile = isoperimetric_profile(&env, 4.0 / eps + 1.0, false)
        .unwrap()
        .lazify(gamma);
    let mut verified = 0;
    let mut vacuous = 0;
    let mut max_threshold = 0.0f64;
    for x in 0..env.num_vertices() {
        for y in 0..env.num_vertices() {
            let pi_min = env.pi(x).min(env.pi(y));
            match morris_peres_threshold(&profile, gamma, eps, pi_min).unwrap() {
                Threshold::Infinite => vacuous += 1,
                Threshold::Finite(thr) => {
                    max_threshold = max_threshold.max(thr);
                    let n = thr.ceil() as usize;
                    let k = exact_kernel_lazy(&env, gamma, x, n).unwrap();
                    assert!(k.probs[y] <= eps * env.pi(y) + 1e-12);
                    verified += 1;
                }
            }
        }
    }
    println!(
        "\n4x4 box (w=8), gamma=1/4, eps={eps}: implication verified for {verified} pairs \
         (max threshold {max_threshold:.0} steps, {vacuous} vacuous)"
    );

    // a finite graph cannot push P^n(x,y)/pi(y) below 1/pi(V): tiny eps
    // gives the distinguished infinite threshold
    let tiny = morris_peres_threshold(&profile, gamma, 1e-4, 8.0).unwrap();
    println!("threshold at eps = 1e-4: {tiny:?} (below the stationary floor)");
}
