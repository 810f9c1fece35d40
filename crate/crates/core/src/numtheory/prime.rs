use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::arith::{mul_mod, Mont128};
use super::sieve::primes_up_to;

/// Witnesses that make Miller-Rabin exact for every `n < 2^64`.
const WITNESSES_64: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller-Rabin rounds used above `2^64`.
pub const PROBABLE_PRIME_ROUNDS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Primality {
    Composite,
    /// Passed `PROBABLE_PRIME_ROUNDS` Miller-Rabin rounds; no proof.
    ProbablePrime,
    Prime,
}

impl Primality {
    pub fn is_prime_like(self) -> bool {
        self != Primality::Composite
    }
}

/// Deterministic primality for the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES_64 {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in &WITNESSES_64 {
        let mut x = super::arith::mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mr_bases() -> &'static [u64] {
    use std::sync::OnceLock;
    static BASES: OnceLock<Vec<u64>> = OnceLock::new();
    BASES.get_or_init(|| primes_up_to(200).into_iter().take(PROBABLE_PRIME_ROUNDS).collect())
}

pub fn is_prime_u128(n: u128) -> Primality {
    if let Ok(small) = u64::try_from(n) {
        return if is_prime(small) { Primality::Prime } else { Primality::Composite };
    }
    if n & 1 == 0 {
        return Primality::Composite;
    }
    if n >= Mont128::MAX_MODULUS {
        return primality_big(&BigUint::from(n));
    }
    let m = Mont128::new(n);
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let one = m.one();
    let minus_one = m.to_mont(n - 1);
    'witness: for &a in mr_bases() {
        let mut x = m.pow(m.to_mont(a as u128), d);
        if x == one || x == minus_one {
            continue;
        }
        for _ in 1..s {
            x = m.mul(x, x);
            if x == minus_one {
                continue 'witness;
            }
        }
        return Primality::Composite;
    }
    Primality::ProbablePrime
}

fn primality_big(n: &BigUint) -> Primality {
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'witness: for &a in mr_bases() {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return Primality::Composite;
    }
    Primality::ProbablePrime
}

/// Primality of an arbitrary-precision integer.
pub fn primality(n: &BigUint) -> Primality {
    match n.to_u128() {
        Some(v) => is_prime_u128(v),
        None if !n.bit(0) => Primality::Composite,
        None => primality_big(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn examples() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(is_prime(131));
        assert!(is_prime(11));
    }

    #[test]
    fn agrees_with_trial_division_below_a_million() {
        for n in 0..1_000_000u64 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // strong pseudoprimes to several small bases
        for n in [2047u64, 1_373_653, 25_326_001, 3_215_031_751, 3_825_123_056_546_413_051] {
            assert!(!is_prime(n), "{n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557)); // largest 64-bit prime
    }

    #[test]
    fn wide_inputs() {
        let m61 = (1u128 << 61) - 1;
        let m89 = (1u128 << 89) - 1;
        assert_eq!(is_prime_u128(m89), Primality::ProbablePrime);
        assert_eq!(is_prime_u128(m61 * m61), Primality::Composite);
        assert_eq!(is_prime_u128(m89 * 3), Primality::Composite);
        let m127 = (1u128 << 127) - 1;
        assert_eq!(is_prime_u128(m127), Primality::ProbablePrime);
        let big = BigUint::from(m89) * BigUint::from(m127);
        assert_eq!(primality(&big), Primality::Composite);
        assert_eq!(primality(&BigUint::from(97u32)), Primality::Prime);
    }
}
