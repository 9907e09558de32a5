//! Effective resistance of electrical networks: series/parallel sanity on a
//! cycle, then the nearest-neighbor resistance on Z^2 measured through
//! growing centered boxes (it converges to 1/2).
//!
//! Run with: cargo run --release --example effective_resistance

use rcm::domain::{BoundaryMode, LatticeDomain};
use rcm::env::{build_environment, EnvironmentLaw};
use rcm::potential::effective_resistance;

fn main() {
    // unit 4-cycle, adjacent vertices: 1 Ohm parallel to 3 Ohm = 3/4
    let dom = LatticeDomain::torus(vec![4]).unwrap();
    let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
    let out = effective_resistance(&env, 0, &[1], 1e-12).unwrap();
    println!("unit 4-cycle, adjacent pair: R = {:.6} (exactly 3/4)", out.resistance);

    // nearest neighbors in Z^2, free boxes of growing side
    println!("\nnearest-neighbor resistance on Z^2 through centered boxes:");
    println!("{:>6} {:>12} {:>12}", "side", "R", "|R - 1/2|");
    for side in [9u32, 17, 33, 65, 129] {
        let dom = LatticeDomain::new(vec![side, side], BoundaryMode::Free).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        let source = dom.center();
        let sink = dom.neighbor(source, 0, 1).unwrap();
        let out = effective_resistance(&env, source, &[sink], 1e-12).unwrap();
        println!(
            "{side:>6} {:>12.8} {:>12.2e}",
            out.resistance,
            (out.resistance - 0.5).abs()
        );
    }

    // resistance is monotone under conductance increases (Rayleigh)
    let dom = LatticeDomain::new(vec![17, 17], BoundaryMode::Free).unwrap();
    let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
    let source = dom.center();
    let sink = dom.from_coords(&[2, 2]);
    let base = effective_resistance(&env, source, &[sink], 1e-12).unwrap();
    let doubled = {
        let cond: Vec<f64> = env.edge_values().iter().map(|&w| 2.0 * w).collect();
        rcm::env::Environment::from_edge_values(dom, cond).unwrap()
    };
    let half = effective_resistance(&doubled, source, &[sink], 1e-12).unwrap();
    println!(
        "\ndoubling every conductance halves the resistance: {:.6} -> {:.6}",
        base.resistance, half.resistance
    );
}
