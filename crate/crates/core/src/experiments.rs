//! Scripted experiments around quadratics and `1 - a^n`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{gcd_u64, mod_pow, Factorizer, PrimeRange};
use crate::polynomial::{magnitude, IntPoly};
use crate::rinv::r_of_prime_power;

/// `f(X) = aX² + bX + c`, studied through `g(Y) = Y² + bY + ac`, since
/// `a·f(X) = g(aX)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuadraticSpec {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadraticSpec {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        if a == 0 {
            return Err(Error::invalid("leading coefficient must be nonzero"));
        }
        Ok(QuadraticSpec { a, b, c })
    }

    /// Already monic, so `g = f`.
    pub fn is_reduced(&self) -> bool {
        self.a == 1
    }

    /// `c′ = a·c`
    pub fn c_prime(&self) -> i128 {
        self.a as i128 * self.c as i128
    }

    pub fn original(&self) -> IntPoly {
        IntPoly::from_i64s(&[self.c, self.b, self.a])
    }

    pub fn reduced(&self) -> IntPoly {
        IntPoly::new(vec![BigInt::from(self.c_prime()), BigInt::from(self.b), BigInt::one()])
    }

    /// `max(8|b|, 8|c′|)`
    pub fn threshold(&self) -> u128 {
        8 * (self.b.unsigned_abs() as u128).max(self.c_prime().unsigned_abs())
    }

    fn discriminant(&self) -> i128 {
        let b = self.b as i128;
        b * b - 4 * self.c_prime()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuadraticReport {
    pub spec: QuadraticSpec,
    pub limit: u64,
    /// Primes `p <= limit` with `R_g(p²) <= p`.
    pub exceptions: Vec<u64>,
    pub threshold: u128,
    /// Exceptions exceeding both `8|b|` and `8|c′|`; expected empty.
    pub above_threshold: Vec<u64>,
}

impl QuadraticReport {
    pub fn threshold_holds(&self) -> bool {
        self.above_threshold.is_empty()
    }
}

pub fn quadratic_exceptions(spec: QuadraticSpec, limit: u64) -> Result<QuadraticReport> {
    if spec.discriminant() == 0 {
        return Err(Error::NotSeparable);
    }
    let g = spec.reduced();
    let primes: Vec<u64> = PrimeRange::up_to(limit.max(2)).iter().filter(|&p| p <= limit).collect();
    let exceptions: Vec<u64> = primes
        .into_par_iter()
        .filter(|&p| r_of_prime_power(&g, p, 2).value.at_most(p))
        .collect();
    let threshold = spec.threshold();
    let above_threshold = exceptions.iter().copied().filter(|&p| p as u128 > threshold).collect();
    Ok(QuadraticReport { spec, limit, exceptions, threshold, above_threshold })
}

/// Moduli up to this are counted by direct scan.
pub const RHO_SCAN_LIMIT: u64 = 1_000_000;

fn check_odd_exponent(n: u64) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::invalid(format!("n must be odd and >= 3, got {n}")));
    }
    Ok(())
}

/// `#{b mod m : b^{2n} ≡ 1 (mod m)}`.
pub fn rho(n: u64, m: u64) -> Result<u64> {
    check_odd_exponent(n)?;
    if m == 0 {
        return Err(Error::invalid("modulus must be positive"));
    }
    if m <= RHO_SCAN_LIMIT {
        Ok(rho_scan(n, m))
    } else {
        Ok(rho_closed(n, m))
    }
}

pub fn rho_scan(n: u64, m: u64) -> u64 {
    let one = 1 % m;
    (0..m).filter(|&b| mod_pow(b, 2 * n, m) == one).count() as u64
}

/// Via the structure of `(Z/q^α)^*`: cyclic of order `φ(q^α)` for odd `q`,
/// and `C_2 × C_{2^{α-2}}` for `q = 2`, `α >= 3`.
pub fn rho_closed(n: u64, m: u64) -> u64 {
    let fac = Factorizer::default().factor(&BigUint::from(m));
    fac.factors()
        .iter()
        .map(|(q, e)| {
            let q: u64 = q.try_into().expect("factor of a u64");
            rho_prime_power(n, q, *e)
        })
        .product()
}

fn rho_prime_power(n: u64, q: u64, e: u32) -> u64 {
    if q == 2 {
        return match e {
            1 => 1,
            2 => 2,
            _ => 4,
        };
    }
    let phi = q.pow(e - 1) * (q - 1);
    gcd_u64(2 * n, phi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for MomentConstants {
    fn default() -> Self {
        MomentConstants { c1: 0.5, c2: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbcReport {
    pub n: u64,
    pub a: u64,
    /// `⌊ln A⌋`
    pub log_threshold: u64,
    /// `a` with `H(a)` free of `p²` for every `p <= log_threshold`.
    pub m1: u64,
    /// `a` with `p² | H(a)` for some `p` in `(log_threshold, A]`.
    pub m2: u64,
    /// Square-free `d = 1 - a^n` and their representation counts.
    #[serde(serialize_with = "histogram_as_strings")]
    pub histogram: Vec<(BigInt, u64)>,
    pub sum_r: u64,
    pub sum_r2: u64,
    pub max_r: u64,
    /// Square-free `d` with `R(d) > n`.
    pub violations: Vec<String>,
}

fn histogram_as_strings<S: serde::Serializer>(h: &[(BigInt, u64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(h.len()))?;
    for (d, r) in h {
        seq.serialize_element(&(d.to_string(), r))?;
    }
    seq.end()
}

impl AbcReport {
    pub const CSV_HEADER: &'static str = "d,R";

    pub fn histogram_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (d, r) in &self.histogram {
            out.push_str(&format!("{d},{r}\n"));
        }
        out
    }

    /// `Σ R(d) >= (M1 - M2)/2`
    pub fn lower_bound_holds(&self) -> bool {
        2 * self.sum_r as i128 >= self.m1 as i128 - self.m2 as i128
    }
}

/// Arguments `a` with `A <= |a| <= 2A`, negatives first.
pub fn abc_arguments(a: u64) -> impl Iterator<Item = i64> {
    let a = a as i64;
    (-2 * a..=-a).chain(a..=2 * a)
}

pub fn t_value(n: u64, a: i64) -> BigInt {
    BigInt::one() - BigInt::from(a).pow(n as u32)
}

pub fn abc_census(n: u64, a: u64) -> Result<AbcReport> {
    abc_census_with(n, a, &Factorizer::default())
}

pub fn abc_census_with(n: u64, big_a: u64, factorizer: &Factorizer) -> Result<AbcReport> {
    check_odd_exponent(n)?;
    if big_a < 16 {
        return Err(Error::invalid(format!("A must be >= 16, got {big_a}")));
    }
    if big_a > i64::MAX as u64 / 4 {
        return Err(Error::invalid("A too large"));
    }
    let log_threshold = (big_a as f64).ln().floor() as u64;
    let args: Vec<i64> = abc_arguments(big_a).collect();
    // T(-a) for a in range is T at another argument in range
    let factored: BTreeMap<i64, Vec<(BigUint, u32)>> = args
        .par_iter()
        .map(|&a| (a, factorizer.factor(&magnitude(&t_value(n, a))).factors().to_vec()))
        .collect();

    let mut m1 = 0;
    let mut m2 = 0;
    let mut counts: BTreeMap<BigInt, u64> = BTreeMap::new();
    let small = BigUint::from(log_threshold);
    let big = BigUint::from(big_a);
    for &a in &args {
        let mut h: BTreeMap<&BigUint, u32> = BTreeMap::new();
        for (p, e) in factored[&a].iter().chain(&factored[&-a]) {
            *h.entry(p).or_default() += e;
        }
        let squares = || h.iter().filter(|(_, &e)| e >= 2).map(|(p, _)| *p);
        if !squares().any(|p| *p <= small) {
            m1 += 1;
        }
        if squares().any(|p| *p > small && *p <= big) {
            m2 += 1;
        }
        if factored[&a].iter().all(|(_, e)| *e == 1) {
            *counts.entry(t_value(n, a)).or_default() += 1;
        }
    }
    let histogram: Vec<(BigInt, u64)> = counts.into_iter().collect();
    let sum_r = histogram.iter().map(|(_, r)| r).sum();
    let sum_r2 = histogram.iter().map(|(_, r)| r * r).sum();
    let max_r = histogram.iter().map(|(_, r)| *r).max().unwrap_or(0);
    let violations = histogram.iter().filter(|(_, r)| *r > n).map(|(d, _)| d.to_string()).collect();
    Ok(AbcReport { n, a: big_a, log_threshold, m1, m2, histogram, sum_r, sum_r2, max_r, violations })
}

pub fn abc_moment_check(report: &AbcReport, constants: MomentConstants) -> bool {
    let a = report.a as f64;
    report.sum_r as f64 >= constants.c1 * a && report.sum_r2 as f64 <= constants.c2 * a
}

/// `|v|` is square-free; zero is not.
pub fn is_squarefree_value(v: &BigInt) -> bool {
    !v.is_zero() && Factorizer::default().factor(&magnitude(v)).is_squarefree()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{factorize, primes_up_to};
    use proptest::prelude::*;

    /// Direct scan over `x ∈ [1, p]` for `x² + bx + c ≡ 0 (mod p²)`.
    fn exception_oracle(b: i64, c: i64, p: u64) -> bool {
        let m = (p * p) as i128;
        (1..=p as i128).any(|x| (x * x + b as i128 * x + c as i128).rem_euclid(m) == 0)
    }

    #[test]
    fn x2_plus_one_has_no_exceptions() {
        let r = quadratic_exceptions(QuadraticSpec::new(1, 0, 1).unwrap(), 100_000).unwrap();
        assert!(r.exceptions.is_empty());
        assert!(r.threshold_holds());
    }

    #[test]
    fn x2_minus_two_small_primes() {
        let r = quadratic_exceptions(QuadraticSpec::new(1, 0, -2).unwrap(), 20_000).unwrap();
        assert!(r.threshold_holds());
        let oracle: Vec<u64> = primes_up_to(100).into_iter().filter(|&p| exception_oracle(0, -2, p)).collect();
        let listed: Vec<u64> = r.exceptions.iter().copied().filter(|&p| p <= 100).collect();
        assert_eq!(listed, oracle);
    }

    #[test]
    fn y2_3y_5_exceptions_below_forty() {
        let r = quadratic_exceptions(QuadraticSpec::new(1, 3, 5).unwrap(), 100_000).unwrap();
        assert_eq!(r.threshold, 40);
        assert!(r.exceptions.iter().all(|&p| p <= 40));
        let oracle: Vec<u64> = primes_up_to(40).into_iter().filter(|&p| exception_oracle(3, 5, p)).collect();
        assert_eq!(r.exceptions, oracle);
    }

    #[test]
    fn x2_plus_d_only_small_exceptions() {
        for d in 1..=10i64 {
            let r = quadratic_exceptions(QuadraticSpec::new(1, 0, d).unwrap(), 100_000).unwrap();
            for &p in &r.exceptions {
                assert!(p <= 2 * d as u64, "d = {d}, p = {p}");
                assert!(exception_oracle(0, d, p));
            }
        }
    }

    #[test]
    fn non_monic_reduction() {
        let s = QuadraticSpec::new(3, 2, 5).unwrap();
        assert!(!s.is_reduced());
        assert_eq!(s.c_prime(), 15);
        let (f, g) = (s.original(), s.reduced());
        for x in -20i64..20 {
            assert_eq!(BigInt::from(3) * f.eval_i64(x), g.eval_i64(3 * x));
        }
        assert!(matches!(quadratic_exceptions(QuadraticSpec::new(1, 2, 1).unwrap(), 10), Err(Error::NotSeparable)));
        assert!(QuadraticSpec::new(0, 1, 1).is_err());
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(3, 7).unwrap(), 6);
        assert_eq!(rho(3, 5).unwrap(), 2);
        assert_eq!(rho(3, 49).unwrap(), 6);
        assert!(rho(4, 7).is_err());
        assert!(rho(1, 7).is_err());
        assert_eq!(rho(3, 1).unwrap(), 1);
    }

    #[test]
    fn rho_closed_form_on_primes() {
        for n in [3u64, 5, 7, 9, 15] {
            for p in primes_up_to(10_000).into_iter().filter(|&p| p > 2 && (2 * n) % p != 0) {
                assert_eq!(rho_scan(n, p), gcd_u64(2 * n, p - 1), "n = {n}, p = {p}");
            }
        }
    }

    #[test]
    fn rho_closed_form_matches_scan() {
        for n in [3u64, 5, 9] {
            for m in 1..3000 {
                assert_eq!(rho_closed(n, m), rho_scan(n, m), "n = {n}, m = {m}");
            }
        }
        // beyond the scan limit
        assert_eq!(rho(3, 7 * 1_000_003).unwrap(), 6 * gcd_u64(6, 1_000_002));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn rho_multiplicative(m1 in 1u64..10_000, m2 in 1u64..10_000) {
            prop_assume!(gcd_u64(m1, m2) == 1);
            prop_assert_eq!(rho(3, m1 * m2).unwrap(), rho_scan(3, m1) * rho_scan(3, m2));
        }
    }

    #[test]
    fn abc_small_runs() {
        let expected = [(16, 2, 18, 30, 12), (64, 4, 22, 34, 53), (128, 4, 42, 64, 113)];
        for (a, l, m1, m2, sum_r) in expected {
            let r = abc_census(3, a).unwrap();
            assert_eq!((r.log_threshold, r.m1, r.m2, r.sum_r), (l, m1, m2, sum_r), "A = {a}");
            // a ↦ a^n is injective for odd n
            assert_eq!(r.sum_r2, r.sum_r);
            assert!(r.violations.is_empty());
            assert!(r.lower_bound_holds());
            assert!(abc_moment_check(&r, MomentConstants::default()) || a == 16);
        }
        assert!(abc_census(3, 15).is_err());
        assert!(abc_census(4, 64).is_err());
    }

    #[test]
    fn abc_m1_members_verified() {
        let (n, a) = (5, 40);
        let r = abc_census(n, a).unwrap();
        let small: Vec<u64> = primes_up_to(r.log_threshold.max(2)).into_iter().filter(|&p| p <= r.log_threshold).collect();
        let m1 = abc_arguments(a)
            .filter(|&x| {
                let h = magnitude(&(BigInt::one() - BigInt::from(x).pow(2 * n as u32)));
                small.iter().all(|&p| !(&h % (p * p)).is_zero())
            })
            .count() as u64;
        assert_eq!(r.m1, m1);
        for (d, _) in &r.histogram {
            assert!(factorize(&magnitude(d)).is_squarefree());
        }
        assert!(r.histogram_csv().starts_with("d,R\n"));
    }
}
