use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fakeideal::cli::random_prefix_system;
use fakeideal::num::{nat, ratio_u};
use fakeideal::param::{ParamFunction, Rule};
use fakeideal::systems::{IntervalPartition, MinusWitness, NodeExtension, Point, Word};
use fakeideal::witnesses::{dominating_envelope, e_not_ideal, minus_positive_nwd, parity_escape, s_not_in_fin, Check};

fn passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn word() -> impl Strategy<Value = Word> {
    proptest::collection::vec(0u64..4, 0..4).prop_map(|v| Word::from_u64s(&v))
}

fn extension() -> impl Strategy<Value = NodeExtension> {
    let leaf = word().prop_map(NodeExtension::constant);
    leaf.prop_recursive(2, 6, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 1..3).prop_map(|parts| NodeExtension::Composed { parts }),
            inner.prop_map(|i| NodeExtension::ZeroBarrier { inner: Box::new(i) }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelope_size_matches_enumeration(f in proptest::collection::vec(0u64..=3, 5), n in 0u64..=5) {
        let env = dominating_envelope(&Rule::table(f.iter().map(|&v| nat(v)).collect(), Rule::constant(0)));
        let mut count = 0u64;
        let mut digits = vec![0u64; n as usize];
        'outer: loop {
            if digits.iter().zip(&f).all(|(d, b)| d <= b) {
                count += 1;
            }
            for d in digits.iter_mut() {
                *d += 1;
                if *d <= 3 {
                    continue 'outer;
                }
                *d = 0;
            }
            break;
        }
        prop_assert_eq!(env.size(n), nat(count));
    }

    #[test]
    fn composition_is_sequential_application(a in extension(), b in extension(), sigma in word()) {
        let ab = NodeExtension::Composed { parts: vec![a.clone(), b.clone()] };
        let first = a.apply(&sigma);
        let second = b.apply(&sigma.concat(&first));
        prop_assert_eq!(ab.apply(&sigma), first.concat(&second));
    }

    #[test]
    fn along_helpers_match_pointwise(e in extension(), x in proptest::collection::vec(0u64..3, 0..8)) {
        let x = Word::from_u64s(&x);
        let lengths = e.lengths_along(&x);
        let events = e.zero_events_along(&x);
        for k in 0..=x.len() {
            let pre = x.prefix(k).unwrap();
            prop_assert_eq!(lengths[k as usize], e.apply(&pre).len());
            if e.apply(&pre).entries().iter().all(|v| *v == nat(0)) {
                prop_assert_eq!(events[k as usize], e.extension_inside(&pre, &x));
            }
        }
    }

    #[test]
    fn parity_escape_has_parity_and_avoids(seed in any::<u64>(), bits in proptest::collection::vec(0u64..2, 16)) {
        let opponent = random_prefix_system(&mut ChaCha8Rng::seed_from_u64(seed), 16, 9, 3);
        let parity = Point::eventually_zero(Word::from_u64s(&bits));
        let e = parity_escape(&parity, &opponent, 16, 1_000_000).unwrap();
        prop_assert!(passed(&e.checks));
        for n in 0..16u64 {
            prop_assert_eq!(e.point.at(n) % 2u32, nat(bits[n as usize]));
            prop_assert!(!opponent.levels.contains(n + 1, &e.point.prefix(n + 1)));
        }
    }

    #[test]
    fn nwd_escape_self_consistent(a in word(), head in word(), period in proptest::collection::vec(0u64..3, 1..3)) {
        prop_assume!(!a.is_empty());
        let nwd = minus_positive_nwd(NodeExtension::constant(a));
        let f = MinusWitness {
            pattern: Point::Periodic { head, period: Word::from_u64s(&period) },
            partition: IntervalPartition::unit(),
        };
        let e = nwd.escape(&f, 2, 1_000_000).unwrap();
        prop_assert!(passed(&e.checks), "{:?}", e.checks);
    }

    #[test]
    fn s_not_in_fin_escapes_random_opponents(seed in any::<u64>()) {
        let opponent = random_prefix_system(&mut ChaCha8Rng::seed_from_u64(seed), 12, 5, 2);
        let s = s_not_in_fin(&ParamFunction::parse("exp 2").unwrap(), &ratio_u(1, 1), 3, 1_000_000).unwrap();
        let e = s.escape(&opponent, 1_000_000).unwrap();
        prop_assert!(passed(&e.checks), "{:?}", e.checks);
    }

    #[test]
    fn recursion_rescan_for_increasing_polynomials(c in 1u64..4, d in 1usize..4) {
        let mut coeffs = vec![0u64; d + 1];
        coeffs[1] = c;
        coeffs[d] += 1;
        let h = ParamFunction::new(Rule::poly(&coeffs)).unwrap();
        let e = e_not_ideal(&h, 3, 1_000_000).unwrap();
        prop_assert!(e.rescan());
        prop_assert!(passed(&e.ledger_checks().unwrap()));
    }
}
