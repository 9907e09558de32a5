//! The two-plate electrostatic problem on a percolation slab: potential -1
//! on the bottom plate, +1 on the top plate, harmonic across the cluster in
//! between. The solver value at any vertex equals the difference of the two
//! plate-hitting probabilities of the walk started there.
//!
//! Run with: cargo run --release --example plate_problem

use rand::Rng;
use rcm::domain::{BoundaryMode, LatticeDomain};
use rcm::env::{build_environment, EnvironmentLaw};
use rcm::potential::plate_potential;

fn main() {
    // homogeneous slab: the potential is linear in the height
    let dom = LatticeDomain::new(vec![21, 17], BoundaryMode::Free).unwrap();
    let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
    let out = plate_potential(&env, 1e-11).unwrap();
    println!("homogeneous 21x17 slab, potential along the center column:");
    for h in (0..17).step_by(4) {
        let v = dom.from_coords(&[10, h]);
        println!("  height {h:>2}: phi = {:+.4}", out.field.values[v]);
    }

    // percolation slab: solver vs Monte Carlo hitting probabilities
    let dom = LatticeDomain::new(vec![31, 15], BoundaryMode::Free).unwrap();
    let env = build_environment(&EnvironmentLaw::Percolation { p: 0.7 }, &dom, 21).unwrap();
    let solved = plate_potential(&env, 1e-11).unwrap();
    let start = dom.center();
    if env.pi(start) == 0.0 {
        println!("center vertex isolated in this sample; pick another seed");
        return;
    }
    let top = dom.sides()[1] as i64 - 1;
    let mut stream = rcm::rng::stream(5, 1, 0);
    let trials = 30_000;
    let mut score = 0i64;
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
            // one kernel step
            let pi = env.pi(v);
            let u: f64 = stream.gen::<f64>() * pi;
            let mut acc = 0.0;
            for (axis, sign, w) in env.domain().neighbors(v) {
                let c = env.conductance_signed(v, axis, sign);
                if c > 0.0 {
                    acc += c;
                    if u < acc {
                        v = w;
                        break;
                    }
                }
            }
        }
    }
    let mc = score as f64 / trials as f64;
    println!(
        "\npercolation slab (p=0.7): solver phi(center) = {:+.4}, Monte Carlo hitting \
         difference = {:+.4} ({} trials)",
        solved.field.values[start], mc, trials
    );
}
