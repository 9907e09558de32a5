//! Bond percolation: component labeling, the working-cluster policies, the
//! cluster density and the left-right box conductance R_N^{-1}.
//!
//! Run with: cargo run --release --example percolation_clusters

use rcm::cluster::{label_clusters, working_cluster, ClusterPolicy};
use rcm::domain::{BoundaryMode, LatticeDomain};
use rcm::env::{build_environment, EnvironmentLaw};
use rcm::potential::box_conductance;

fn main() {
    let side = 51u32;
    let dom = LatticeDomain::new(vec![side, side], BoundaryMode::Free).unwrap();
    for p in [0.3, 0.5, 0.65, 0.8] {
        let env = build_environment(&EnvironmentLaw::Percolation { p }, &dom, 4).unwrap();
        let labeling = label_clusters(&env);
        let n = dom.num_vertices();
        let largest = labeling
            .largest
            .map(|l| labeling.sizes[&l])
            .unwrap_or(0);
        let crossing = labeling.crossing.is_some();
        println!(
            "p = {p:.2}: components {:3}, largest fraction {:.3}, crossing: {crossing}",
            labeling.sizes.len(),
            largest as f64 / n as f64,
        );
    }

    // supercritical sample: the crossing cluster carries the current
    println!("\nbox conductance R_N^{{-1}} at p = 0.65 (crossing cluster only):");
    println!("{:>4} {:>12} {:>12}", "N", "R_N^-1", "R_N^-1 / N^2");
    for nn in [8u32, 16, 24] {
        let side = 2 * nn + 1;
        let dom = LatticeDomain::new(vec![side, side], BoundaryMode::Free).unwrap();
        let env = build_environment(&EnvironmentLaw::Percolation { p: 0.65 }, &dom, 9).unwrap();
        let out = box_conductance(&env, 1e-10).unwrap();
        println!(
            "{nn:>4} {:>12.4} {:>12.6}",
            out.conductance,
            out.conductance / (nn * nn) as f64
        );
    }

    // policy selection
    let dom = LatticeDomain::new(vec![21, 21], BoundaryMode::Free).unwrap();
    let env = build_environment(&EnvironmentLaw::Percolation { p: 0.65 }, &dom, 5).unwrap();
    let labeling = label_clusters(&env);
    let largest = working_cluster(&labeling, ClusterPolicy::Largest).unwrap();
    println!(
        "\n21x21 sample: largest cluster has {} of {} vertices",
        largest.len(),
        dom.num_vertices()
    );
    match working_cluster(&labeling, ClusterPolicy::Crossing) {
        Ok(c) => println!("crossing cluster: {} vertices", c.len()),
        Err(e) => println!("no crossing cluster: {e}"),
    }
}
