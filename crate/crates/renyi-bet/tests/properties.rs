use proptest::prelude::*;
use renyi_bet::oracles::{
    brute_force_optimal_bets, log_ice_definition, random_instance, Instance, InstanceKind,
    OracleConfig, Sampler,
};
use renyi_bet::real::{round_significant, Real, Units};
use renyi_bet_core::betting::{multi_ice_unconditional, optimal_bets_unconditional};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_survives_json(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let text = serde_json::to_string(&Real(x)).unwrap();
        let back: Real = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.0, round_significant(x));
        prop_assert!((back.0 - x).abs() <= 5e-12 * x.abs());
    }

    #[test]
    fn bits_divide_by_ln2(x in -1e6f64..1e6) {
        let b = Units::Bits.log(x).0 * std::f64::consts::LN_2;
        prop_assert!((b - x).abs() <= 1e-12 * x.abs().max(1.0));
        prop_assert_eq!(Units::Nats.log(x).0, x);
    }

    #[test]
    fn instances_repeat_per_seed_and_stream(seed in any::<u64>(), stream in any::<u64>(), n in 2usize..6) {
        let cfg = OracleConfig { seed, ..OracleConfig::default() };
        let a = random_instance(InstanceKind::Pmf, &[n], &cfg, stream).unwrap();
        let b = random_instance(InstanceKind::Pmf, &[n], &cfg, stream).unwrap();
        prop_assert_eq!(&a, &b);
        let Instance::Pmf(p) = a else { unreachable!() };
        prop_assert!((p.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn definition_matches_library(seed in any::<u64>(), n in 2usize..5, d in 1usize..4) {
        let mut s = Sampler::new(seed, 0);
        let p = s.pmf(n);
        let odds = s.odds(n, d);
        let risk = s.risk(d);
        let bets: Vec<_> = (0..d).map(|_| s.pmf(n)).collect();
        let lib = multi_ice_unconditional(&p, &odds, &bets, &risk).unwrap().ln();
        let def = log_ice_definition(&p, &odds, &bets, &risk);
        prop_assert!((lib - def).abs() <= 1e-9 * lib.abs().max(1.0), "{} vs {}", lib, def);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn search_never_beats_closed_form(seed in any::<u64>()) {
        let cfg = OracleConfig { seed, dirichlet_samples: 3000, ..OracleConfig::default() };
        let mut s = Sampler::new(seed, 1);
        let p = s.pmf(3);
        let odds = s.odds(3, 2);
        let risk = s.risk(2);
        let (_, closed) = optimal_bets_unconditional(&p, &odds, &risk).unwrap();
        let (_, found) = brute_force_optimal_bets(&p, &odds, &risk, &cfg, 0).unwrap();
        prop_assert!(found <= closed + 1e-6, "{} > {}", found, closed);
    }
}
