mod common;

use clearing_core::builders::EnParams;
use clearing_core::lattice::{FinitePoset, LatticeDescriptor, LatticeValue};
use clearing_core::residuated::ALL_LOGICS;
use clearing_core::sim::{run, Init, Schedule};
use clearing_core::spec_file::{DomainSpec, SpecFile};
use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn descriptors() -> Vec<LatticeDescriptor> {
    let diamond = FinitePoset::new(
        ["a", "b", "c", "d"].map(String::from).to_vec(),
        vec![(0, 1), (0, 2), (1, 3), (2, 3)],
    )
    .unwrap();
    vec![
        LatticeDescriptor::extended_nonneg(),
        LatticeDescriptor::bounded(5.0).unwrap(),
        LatticeDescriptor::unit_vector(3).unwrap(),
        LatticeDescriptor::finite_set_n(4).unwrap(),
        LatticeDescriptor::downset(diamond),
        LatticeDescriptor::product(vec![
            LatticeDescriptor::extended_nonneg(),
            LatticeDescriptor::unit_vector(2).unwrap(),
        ])
        .unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lattice_laws(which in 0usize..6, seed in any::<u64>()) {
        let d = &descriptors()[which];
        let mut r = rng(seed);
        let (a, b, c) = (d.sample(&mut r, 10.0), d.sample(&mut r, 10.0), d.sample(&mut r, 10.0));
        let j = d.join(&a, &b).unwrap();
        let m = d.meet(&a, &b).unwrap();
        prop_assert_eq!(&j, &d.join(&b, &a).unwrap());
        prop_assert_eq!(&m, &d.meet(&b, &a).unwrap());
        prop_assert_eq!(d.join(&j, &c).unwrap(), d.join(&a, &d.join(&b, &c).unwrap()).unwrap());
        prop_assert_eq!(d.meet(&m, &c).unwrap(), d.meet(&a, &d.meet(&b, &c).unwrap()).unwrap());
        prop_assert_eq!(d.join(&a, &d.meet(&a, &b).unwrap()).unwrap(), a.clone());
        prop_assert_eq!(d.meet(&a, &d.join(&a, &b).unwrap()).unwrap(), a.clone());
        prop_assert!(d.leq(&a, &j).unwrap() && d.leq(&b, &j).unwrap());
        prop_assert!(d.leq(&m, &a).unwrap() && d.leq(&m, &b).unwrap());
        prop_assert_eq!(d.leq(&a, &b).unwrap(), d.join(&a, &b).unwrap() == b);
        prop_assert!(d.leq(&d.bottom(), &a).unwrap() && d.leq(&a, &d.top()).unwrap());
    }

    #[test]
    fn residuated_adjunction(x in 0.0f64..=1.0, y in 0.0f64..=1.0, z in 0.0f64..=1.0) {
        for logic in ALL_LOGICS {
            let t = logic.tnorm(x, y).unwrap();
            let r = logic.residuum(y, z).unwrap();
            prop_assert!((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&r));
            // Away from the boundary the adjunction is exact.
            if (t - z).abs() > 1e-9 {
                prop_assert_eq!(t <= z, x <= r + 1e-12, "{:?} at ({}, {}, {})", logic, x, y, z);
            }
            prop_assert!(logic.tnorm(y, logic.residuum(y, z).unwrap()).unwrap() <= z + 1e-12);
        }
    }

    #[test]
    fn clearing_operator_is_monotone(seed in 0u64..400) {
        let mut r = rng(seed);
        let net = random_finite_net(&mut r);
        let elems: Vec<Vec<LatticeValue>> = net.lattices().iter().map(|d| d.enumerate().unwrap()).collect();
        for _ in 0..20 {
            let x: Vec<LatticeValue> = elems.iter().map(|e| e.choose(&mut r).unwrap().clone()).collect();
            let y: Vec<LatticeValue> = elems.iter().map(|e| e.choose(&mut r).unwrap().clone()).collect();
            let hi = net.values_join(&x, &y).unwrap();
            prop_assert!(net.section_leq(&net.phi(&x).unwrap(), &net.phi(&hi).unwrap()).unwrap());
        }
    }

    #[test]
    fn round_robin_lands_in_fix(seed in 0u64..200) {
        let mut r = rng(seed);
        let net = random_finite_net(&mut r);
        let mut order: Vec<usize> = (0..net.vertex_count()).collect();
        order.shuffle(&mut r);
        let (sec, trace) = run(&net, Init::Top, &Schedule::round_robin(order)).unwrap();
        prop_assert!(net.is_clearing_section(&sec.values, 0.0).unwrap().is_clearing);
        prop_assert_eq!(trace.rounds.len(), trace.terminated_at);
    }

    #[test]
    fn en_spec_round_trip(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let (liabilities, assets) = random_en(&mut r, n);
        let spec = SpecFile::domain(DomainSpec::EisenbergNoe(EnParams { labels: None, liabilities, assets }));
        let text = spec.to_json_pretty().unwrap();
        let back = SpecFile::from_json(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_json_pretty().unwrap(), text);
        let net = spec.load().unwrap().network;
        let explicit = SpecFile::explicit(&net);
        let again = SpecFile::from_json(&explicit.to_json_pretty().unwrap()).unwrap();
        prop_assert_eq!(again.load().unwrap().network, net);
    }
}
