//! Exact integer and modular arithmetic: primality, prime enumeration,
//! modular powers, integer roots and factorization.

mod arith;
mod factor;
mod prime;
mod sieve;

pub use arith::{gcd_u128, gcd_u64, inv_mod, isqrt_u128, mod_pow, mul_mod, Mont128};
pub use factor::{factorize, Factorization, Factorizer, DEFAULT_TRIAL_BOUND};
pub use prime::{is_prime, is_prime_u128, primality, Primality, PROBABLE_PRIME_ROUNDS};
pub use sieve::{primes_up_to, small_primes, PrimeRange, SegmentedPrimes, DEFAULT_SEGMENT};

use num_bigint::BigUint;
use num_traits::Zero;

/// True iff `n = m²` for some integer `m`.
pub fn is_perfect_square(n: &BigUint) -> bool {
    if n.is_zero() {
        return true;
    }
    // quadratic residues mod 64 reject most non-squares cheaply
    let low = (n.iter_u64_digits().next().unwrap_or(0) & 63) as u32;
    if (0x0202_0212_0203_0213u64 >> low) & 1 == 0 {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}
