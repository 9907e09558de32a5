//! Property tests over randomized environments: serialization identity,
//! exact row normalization, relaxation monotonicity and resistance symmetry.

use proptest::prelude::*;
use rcm::domain::{BoundaryMode, LatticeDomain};
use rcm::env::{build_environment, DistributionSpec, Environment, EnvironmentLaw};
use rcm::potential::{self, ScalarField};

fn arb_law() -> impl Strategy<Value = EnvironmentLaw> {
    prop_oneof![
        (0.0f64..=1.0).prop_map(|p| EnvironmentLaw::Percolation { p }),
        (0.1f64..2.0, 0.0f64..3.0).prop_map(|(a, w)| EnvironmentLaw::Iid {
            distribution: DistributionSpec::Uniform { a, b: a + w }
        }),
        (0.05f64..1.0, 1.0f64..20.0).prop_map(|(a, f)| EnvironmentLaw::LineConstant {
            distribution: DistributionSpec::LogUniform { a, b: a * f }
        }),
        (0.0f64..4.0).prop_map(|value| EnvironmentLaw::Constant { value }),
    ]
}

fn arb_domain() -> impl Strategy<Value = LatticeDomain> {
    (1usize..=3, 2u32..=6, prop_oneof![
        Just(BoundaryMode::Free),
        Just(BoundaryMode::Periodic),
        Just(BoundaryMode::Absorbing)
    ])
        .prop_map(|(d, side, mode)| LatticeDomain::new(vec![side; d], mode).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_is_identity(law in arb_law(), dom in arb_domain(), seed in 0u64..1000) {
        let env = build_environment(&law, &dom, seed).unwrap();
        let bytes = env.to_bytes();
        prop_assert_eq!(&Environment::from_bytes(&bytes).unwrap(), &env);
        let json = env.to_json();
        prop_assert_eq!(&Environment::from_json(&json).unwrap(), &env);
        // construction is a pure function of (law, domain, seed)
        let again = build_environment(&law, &dom, seed).unwrap();
        prop_assert_eq!(again.to_bytes(), bytes);
    }

    #[test]
    fn transition_rows_are_exact_distributions(law in arb_law(), dom in arb_domain(), seed in 0u64..1000) {
        let env = build_environment(&law, &dom, seed).unwrap();
        for v in 0..env.num_vertices() {
            if env.pi(v) > 0.0 {
                let row = env.transition_row(v).unwrap();
                let sum: f64 = row.iter().map(|&(_, p)| p).sum();
                prop_assert_eq!(sum, 1.0);
                prop_assert!(row.iter().all(|&(_, p)| (0.0..=1.0).contains(&p)));
            }
        }
    }

    #[test]
    fn edge_symmetry_from_both_endpoints(law in arb_law(), dom in arb_domain(), seed in 0u64..1000) {
        let env = build_environment(&law, &dom, seed).unwrap();
        for v in 0..env.num_vertices() {
            for (axis, sign, w) in env.domain().neighbors(v) {
                let from_v = env.conductance_signed(v, axis, sign);
                let from_w = env.conductance_signed(w, axis, -sign);
                prop_assert_eq!(from_v, from_w);
            }
        }
    }

    #[test]
    fn relaxation_never_raises_energy(seed in 0u64..500, amp in 0.1f64..10.0) {
        let dom = LatticeDomain::new(vec![6, 6], BoundaryMode::Free).unwrap();
        let env = build_environment(
            &EnvironmentLaw::Iid { distribution: DistributionSpec::Uniform { a: 0.2, b: 3.0 } },
            &dom,
            seed,
        ).unwrap();
        let n = env.num_vertices();
        let interior: Vec<bool> = (0..n).map(|v| !dom.on_outer_layer(v)).collect();
        let mut f = ScalarField::new(
            dom.clone(),
            (0..n).map(|v| amp * (((v * 31 + seed as usize) % 17) as f64 - 8.0)).collect(),
        ).unwrap();
        let before_min = f.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let before_max = f.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut energy = potential::dirichlet_energy(&env, &f, &interior);
        for _ in 0..10 {
            potential::relaxation_sweep(&env, &mut f, &interior).unwrap();
            let now = potential::dirichlet_energy(&env, &f, &interior);
            prop_assert!(now <= energy + 1e-12 * energy.abs().max(1.0));
            energy = now;
            // the sweep stays inside the initial range
            for &v in &f.values {
                prop_assert!(v >= before_min - 1e-12 && v <= before_max + 1e-12);
            }
        }
    }

    #[test]
    fn resistance_is_symmetric(seed in 0u64..200) {
        let dom = LatticeDomain::new(vec![5, 5], BoundaryMode::Free).unwrap();
        let env = build_environment(
            &EnvironmentLaw::Iid { distribution: DistributionSpec::Uniform { a: 0.3, b: 2.5 } },
            &dom,
            seed,
        ).unwrap();
        let a = dom.from_coords(&[1, 2]);
        let b = dom.from_coords(&[3, 3]);
        let rab = potential::effective_resistance(&env, a, &[b], 1e-12).unwrap().resistance;
        let rba = potential::effective_resistance(&env, b, &[a], 1e-12).unwrap().resistance;
        prop_assert!((rab - rba).abs() <= 1e-7 * rab.abs());
    }
}
