use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use sqfree_core::numtheory::{gcd_u64, primes_up_to};
use sqfree_core::{
    census, euler_product, is_prime, mod_pow, r_monotonicity_check, r_of_prime_power, survey_general,
    IntPoly, PrimeRange, RValue, Verdict,
};

fn poly_strategy(max_degree: usize) -> impl Strategy<Value = Vec<i64>> {
    (1..=max_degree).prop_flat_map(|d| {
        (prop::collection::vec(-40i64..=40, d), (1i64..=5).prop_union(-5i64..=-1)).prop_map(|(mut c, lead)| {
            c.push(lead);
            c
        })
    })
}

fn naive_sieve(n: usize) -> Vec<u64> {
    let mut is = vec![true; n + 1];
    is[0] = false;
    is[1] = false;
    for i in 2..=n {
        if is[i] {
            let mut j = i * i;
            while j <= n {
                is[j] = false;
                j += i;
            }
        }
    }
    (0..=n).filter(|&i| is[i]).map(|i| i as u64).collect()
}

#[test]
fn prime_range_matches_naive_sieve() {
    let expected = naive_sieve(100_000);
    assert_eq!(PrimeRange::up_to(100_000).iter().collect::<Vec<_>>(), expected);
    assert_eq!(PrimeRange::up_to(100_000).iter_with_segment(977).collect::<Vec<_>>(), expected);
}

proptest! {
    #[test]
    fn fermat(idx in 0usize..1229, a in 1u64..u64::MAX) {
        let p = primes_up_to(10_000)[idx];
        prop_assume!(gcd_u64(a, p) == 1);
        prop_assert_eq!(mod_pow(a, p - 1, p), 1);
        prop_assert!(is_prime(p));
    }

    #[test]
    fn r_values_bounded_and_monotone(c in poly_strategy(5), idx in 0usize..25) {
        let f = IntPoly::from_i64s(&c);
        let p = primes_up_to(100)[idx];
        let r1 = r_of_prime_power(&f, p, 1).value;
        let r2 = r_of_prime_power(&f, p, 2).value;
        if let RValue::Finite(v) = r1 {
            prop_assert!(v >= 1 && v <= p);
        }
        if let RValue::Finite(v) = r2 {
            prop_assert!(v >= 1 && v <= p * p);
            // a root mod p² is a root mod p, and the least one cannot be smaller
            prop_assert!(r1.finite().is_some_and(|u| u <= v));
        }
        prop_assert!(r_monotonicity_check(&f, p, 1));
        if let RValue::Finite(v) = r2 {
            let value = f.eval(&BigInt::from(v));
            prop_assert!((value % BigInt::from(p * p)).is_zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn survey_rows_are_monotone_and_sound(c in poly_strategy(4)) {
        let f = IntPoly::from_i64s(&c);
        prop_assume!(f.is_separable());
        let Ok(report) = survey_general(&f, 3_000) else { return Ok(()) };
        for row in &report.rows {
            if let (RValue::Finite(a), RValue::Finite(b)) = (row.r1, row.r2) {
                prop_assert!(a <= b);
            }
            prop_assert_eq!(row.exception, row.r2.at_most(row.p));
        }
    }

    #[test]
    fn brackets_nest(c in poly_strategy(3)) {
        let f = IntPoly::from_i64s(&c);
        let Ok(coarse) = euler_product(&f, 50) else { return Ok(()) };
        let fine = euler_product(&f, 400).unwrap();
        prop_assert!(coarse.contains(&fine));
        prop_assert!(fine.lo <= fine.hi);
    }

    #[test]
    fn census_witnesses_divide(c in poly_strategy(3), bound in 2u64..50) {
        let f = IntPoly::from_i64s(&c);
        let (summary, verdicts) = census(&f, 300, bound).unwrap();
        for v in &verdicts {
            match &v.verdict {
                Verdict::HasSquare(p) => {
                    let p = BigInt::from(p.clone());
                    prop_assert!((&v.value % (&p * &p)).is_zero());
                    // no smaller prime square divides the value
                    for q in primes_up_to(300) {
                        if BigInt::from(q) >= p {
                            break;
                        }
                        prop_assert!(!(&v.value % BigInt::from(q * q)).is_zero());
                    }
                }
                Verdict::Zero => prop_assert!(v.value.is_zero()),
                Verdict::Squarefree => prop_assert!(!v.value.is_zero()),
            }
        }
        // large squares found past the sieve bound are genuine R_f(p²) witnesses
        for (d, p) in &summary.large_squares {
            let p: u64 = p.parse().unwrap();
            prop_assert!(p > bound);
            let r = r_of_prime_power(&f, p, 2).value;
            prop_assert!(r.at_most(*d));
        }
    }
}

#[test]
fn survey_is_independent_of_pool_size() {
    let f: IntPoly = "2,0,0,0,1".parse().unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| survey_general(&f, 20_000).unwrap().to_csv())
    };
    assert_eq!(run(1), run(4));
}
