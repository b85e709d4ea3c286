mod common;

use alpv::formats::{system_from_json, system_to_json};
use alpv::markov::MarkovSource;
use alpv::realize::{minimize, minimize_in_order, ReductionOrder};
use alpv::{
    analyze, build_hankel, find_isomorphism, gcr_output, hankel_rank, kalman_ho, simulate, GeneralizedInputSeq,
    MarkovTable, ToleranceConfig, Vector,
};
use common::{plant, random_basis, random_dims, random_minimal, random_signal, random_system, rng, Plant};
use proptest::prelude::*;
use rand::Rng;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn last(sys: &alpv::AlpvSystem, w: &GeneralizedInputSeq) -> Vector {
    simulate(sys, &Vector::zeros(sys.state_dim()), w).unwrap().last_output().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulation_matches_gcr_form(seed in any::<u64>(), len in 1usize..=6) {
        let mut rng = rng(seed);
        let (d, n, m, p) = random_dims(&mut rng);
        let sys = random_system(&mut rng, d, n, m, p);
        let table = MarkovTable::from_system(&sys, 6).unwrap();
        let w = random_signal(&mut rng, d, m, len);
        let gap = (last(&sys, &w) - gcr_output(&table, &w).unwrap()).amax();
        prop_assert!(gap <= 1e-9, "gap {gap}");
    }

    #[test]
    fn output_is_affine_in_each_scheduling_step(seed in any::<u64>(), len in 1usize..=5, alpha in -2.0f64..2.0) {
        let mut rng = rng(seed);
        let (d, n, m, p) = random_dims(&mut rng);
        let sys = random_system(&mut rng, d, n, m, p);
        let w = random_signal(&mut rng, d, m, len);
        let s = rng.gen_range(0..len);
        let other = Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        let with = |ps: Vector| {
            let steps = (0..len)
                .map(|t| (if t == s { ps.clone() } else { w.sched(t).clone() }, w.input(t).clone()))
                .collect();
            GeneralizedInputSeq::new(d, m, steps).unwrap()
        };
        let mixed = last(&sys, &with(w.sched(s) * alpha + &other * (1.0 - alpha)));
        let parts = last(&sys, &with(w.sched(s).clone())) * alpha + last(&sys, &with(other)) * (1.0 - alpha);
        prop_assert!((mixed - parts).amax() <= 1e-10);
    }

    #[test]
    fn markov_parameters_are_basis_invariant(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (d, n, m, p) = random_dims(&mut rng);
        let sys = random_system(&mut rng, d, n, m, p);
        let (t, t_inv) = random_basis(&mut rng, n);
        let moved = sys.transform(&t, &t_inv).unwrap();
        let a = MarkovSource::m_blocks_up_to(&sys, 3).unwrap();
        let b = MarkovSource::m_blocks_up_to(&moved, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).amax() <= 1e-10 * (1.0 + x.amax()));
        }
    }

    #[test]
    fn isomorphism_recovers_the_basis_change(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (d, n, m, p) = random_dims(&mut rng);
        let sys = random_minimal(&mut rng, d, n, m, p);
        let (t, t_inv) = random_basis(&mut rng, n);
        let moved = sys.transform(&t, &t_inv).unwrap();
        let iso = find_isomorphism(&sys, &moved, &tol(), 1e-7).unwrap();
        prop_assert!((iso.t - t).amax() <= 1e-7);
    }

    #[test]
    fn realization_is_stable_past_the_bound(seed in any::<u64>(), extra in 0usize..=1) {
        let mut rng = rng(seed);
        let (d, n, m, p) = random_dims(&mut rng);
        let sys = random_minimal(&mut rng, d, n.min(3), m, p);
        let n = sys.state_dim();
        let l = n - 1 + extra;
        let r = kalman_ho(&build_hankel(&sys, l, l + 1).unwrap(), &tol()).unwrap();
        prop_assert_eq!(r.state_dim(), n);
        prop_assert_eq!(hankel_rank(&sys, l, l, &tol()).unwrap(), n);
    }

    #[test]
    fn minimization_orders_agree_and_are_idempotent(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let d = rng.gen_range(1..=3);
        let r = rng.gen_range(1..=3);
        let base = random_minimal(&mut rng, d, r, 1, 1);
        let kind = if rng.gen_bool(0.5) { Plant::Unreachable } else { Plant::Unobservable };
        let padded = plant(&mut rng, &base, 4 - r, kind);
        let a = minimize_in_order(&padded, &tol(), ReductionOrder::ReachThenObs).unwrap();
        let b = minimize_in_order(&padded, &tol(), ReductionOrder::ObsThenReach).unwrap();
        prop_assert_eq!(a.state_dim(), r);
        prop_assert_eq!(b.state_dim(), r);
        prop_assert!(analyze(&a, &tol()).unwrap().minimal);
        prop_assert_eq!(minimize(&a, &tol()).unwrap().state_dim(), r);
        find_isomorphism(&a, &b, &tol(), 1e-7).unwrap();
    }

    #[test]
    fn system_files_roundtrip_exactly(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (d, n, m, p) = random_dims(&mut rng);
        let sys = random_system(&mut rng, d, n, m, p);
        let text = String::from_utf8(system_to_json(&sys)).unwrap();
        prop_assert_eq!(system_from_json(&text).unwrap(), sys);
    }
}

