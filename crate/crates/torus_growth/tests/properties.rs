use num_bigint::BigInt;
use proptest::prelude::*;

use torus_growth::group_core::{invert, multiply, GroupElement, GroupParams};
use torus_growth::laurent::{balanced_representative, evaluate_rep, n_length, relation_shift, CoeffWord, LaurentPoly};
use torus_growth::reduction::automaton::RuleAutomaton;
use torus_growth::reduction::{is_reduced, reduce_full, reduce_polynomial_part, violations};
use torus_growth::series::modular::{crt, primes};
use torus_growth::series::poly::{expand_coeffs, fit_rational, PolyT, RationalT};

fn params() -> impl Strategy<Value = GroupParams> {
    (2u32..=4).prop_map(|k| GroupParams::new(k).unwrap())
}

fn element() -> impl Strategy<Value = GroupElement> {
    (-50i64..=50, -50i64..=50, -6i64..=6).prop_map(|(a, b, n)| GroupElement::new(a, b, n))
}

fn laurent() -> impl Strategy<Value = LaurentPoly> {
    (-4i64..=2, prop::collection::vec(-7i64..=7, 0..10)).prop_map(|(lo, c)| LaurentPoly::from_ascending(lo, &c))
}

/// A polynomial with no local rule violations at level n, as the reduction loop expects.
fn locally_clean(k: u32) -> impl Strategy<Value = (Vec<i64>, i64)> {
    let b = k as i64 + 2;
    (prop::collection::vec(-b..=b, 1..12), -4i64..=6)
        .prop_map(|(mut c, n)| {
            if let Some(last) = c.last_mut() {
                if *last == 0 {
                    *last = 1;
                }
            }
            (c, n)
        })
        .prop_filter("rules 1-3 hold", move |(c, n)| {
            !violations(&CoeffWord::from_ascending(c), *n, k).unwrap().iter().any(|v| v.rule.is_local())
        })
}

/// An n-reduced polynomial at level n, as ascending digits.
fn reduced_digits(k: u32) -> impl Strategy<Value = (Vec<i64>, i64)> {
    let b = k as i64 + 1;
    (prop::collection::vec(-b..=b, 1..10), -4i64..=6).prop_filter("n-reduced", move |(c, n)| is_reduced(c, *n, k))
}

fn small_poly() -> impl Strategy<Value = PolyT> {
    prop::collection::vec(-9i64..=9, 0..6).prop_map(|c| PolyT::from_i64(&c))
}

fn unit_denominator() -> impl Strategy<Value = PolyT> {
    (prop_oneof![Just(1i64), Just(-1)], prop::collection::vec(-4i64..=4, 0..5)).prop_map(|(c0, rest)| {
        let mut c = vec![c0];
        c.extend(rest);
        PolyT::from_i64(&c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn multiplication_is_associative(p in params(), g in element(), h in element(), k in element()) {
        let left = multiply(&p, &multiply(&p, &g, &h), &k);
        let right = multiply(&p, &g, &multiply(&p, &h, &k));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_cancels(p in params(), g in element()) {
        prop_assert!(multiply(&p, &g, &invert(&p, &g)).is_identity());
        prop_assert!(multiply(&p, &invert(&p, &g), &g).is_identity());
    }

    #[test]
    fn evaluation_is_additive_and_kills_relations(p in params(), f in laurent(), g in laurent(), d in -5i64..5, s in -3i64..=3) {
        let sum = f.add_scaled(&g, 1);
        let (ef, eg) = (evaluate_rep(&p, &f), evaluate_rep(&p, &g));
        prop_assert_eq!(evaluate_rep(&p, &sum), [&ef[0] + &eg[0], &ef[1] + &eg[1]]);
        prop_assert_eq!(evaluate_rep(&p, &f.add_scaled(&relation_shift(&p, d), s)), ef);
    }

    #[test]
    fn text_format_round_trips(f in laurent()) {
        let text = f.to_string();
        prop_assert_eq!(text.parse::<LaurentPoly>().unwrap(), f.clone());
        prop_assert_eq!(f.mirror().mirror(), f);
    }

    #[test]
    fn balanced_representative_evaluates_back(p in params(), a in -10_000_000i64..10_000_000, b in -10_000_000i64..10_000_000) {
        let x = [BigInt::from(a), BigInt::from(b)];
        let f = balanced_representative(&p, &x).unwrap();
        prop_assert_eq!(evaluate_rep(&p, &f), x);
        prop_assert!(f.terms().all(|(_, c)| c.abs() <= p.k() as i64 + 1));
    }

    #[test]
    fn automaton_agrees_with_rule_scan(k in 2u32..=4, c in prop::collection::vec(-6i64..=6, 0..10), n in -5i64..=8) {
        prop_assert_eq!(RuleAutomaton::new(k).is_reduced(&c, n), is_reduced(&c, n, k));
    }

    #[test]
    fn truncation_and_shift_closure((k, (c, n)) in (2u32..=3).prop_flat_map(|k| (Just(k), reduced_digits(k))), cut in 0usize..10) {
        let mut truncated = c.clone();
        for x in truncated.iter_mut().take(cut.min(c.len())) {
            *x = 0;
        }
        prop_assert!(is_reduced(&truncated, n, k));
        let mut shifted = vec![0];
        shifted.extend(&c);
        prop_assert!(is_reduced(&shifted, n + 1, k));
    }

    #[test]
    fn reduction_preserves_value_and_shortens((c, n) in locally_clean(2)) {
        let p = GroupParams::new(2).unwrap();
        let f = LaurentPoly::from_poly(&c);
        let r = reduce_polynomial_part(&p, &f, n, 0).unwrap();
        prop_assert_eq!(evaluate_rep(&p, &r.result), evaluate_rep(&p, &f));
        prop_assert!(n_length(&r.result, n).0 <= n_length(&f, n).0);
        prop_assert!(r.trace.len() <= 4 * f.support_size());
        for s in &r.trace {
            prop_assert!(s.len_after <= s.len_before);
        }
        prop_assert!(is_reduced(&r.result.poly_digits(), n, 2));
        let full = reduce_full(&p, &f, n).unwrap();
        prop_assert_eq!(evaluate_rep(&p, &full.result), evaluate_rep(&p, &f));
    }

    #[test]
    fn series_arithmetic_matches_coefficients(a in small_poly(), da in unit_denominator(), b in small_poly(), db in unit_denominator()) {
        let ra = RationalT::new(a, da).unwrap();
        let rb = RationalT::new(b, db).unwrap();
        let (ea, eb) = (expand_coeffs(&ra, 12).unwrap(), expand_coeffs(&rb, 12).unwrap());
        let sum = expand_coeffs(&ra.add(&rb).unwrap(), 12).unwrap();
        let prod = expand_coeffs(&ra.mul(&rb).unwrap(), 12).unwrap();
        for i in 0..=12 {
            prop_assert_eq!(&sum[i], &(&ea[i] + &eb[i]));
            let conv: BigInt = (0..=i).map(|j| &ea[j] * &eb[i - j]).sum();
            prop_assert_eq!(&prod[i], &conv);
        }
    }

    #[test]
    fn fit_recovers_rational_functions(a in small_poly(), d in unit_denominator()) {
        let r = RationalT::new(a, d).unwrap();
        let coeffs = expand_coeffs(&r, 40).unwrap();
        let fitted = fit_rational(&coeffs, 8).unwrap();
        prop_assert_eq!(expand_coeffs(&fitted, 60).unwrap(), expand_coeffs(&r, 60).unwrap());
    }

    #[test]
    fn crt_reconstructs(x in any::<u128>()) {
        let ps = primes(3);
        let x = BigInt::from(x);
        let residues: Vec<u64> = ps.iter().map(|&p| (&x % BigInt::from(p)).try_into().unwrap()).collect();
        prop_assert_eq!(crt(&residues, &ps), x);
    }
}
