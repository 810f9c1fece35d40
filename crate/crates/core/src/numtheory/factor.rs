use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::arith::{gcd_u128, Mont128};
use super::prime::{primality, Primality};
use super::sieve::small_primes;
use crate::DEFAULT_SEED;

/// Trial division covers primes up to this bound before rho takes over.
pub const DEFAULT_TRIAL_BOUND: u64 = 100_000;

/// A complete prime factorization `value = ∏ p^e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factorization {
    #[serde(serialize_with = "ser_big")]
    value: BigUint,
    #[serde(serialize_with = "ser_factors")]
    factors: Vec<(BigUint, u32)>,
    /// Some factor above `2^64` was only shown to be a probable prime.
    probable: bool,
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_factors<S: serde::Serializer>(v: &[(BigUint, u32)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (p, e) in v {
        seq.serialize_element(&(p.to_string(), e))?;
    }
    seq.end()
}

impl Factorization {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// `(prime, exponent)` pairs, primes strictly increasing.
    pub fn factors(&self) -> &[(BigUint, u32)] {
        &self.factors
    }

    pub fn is_probable(&self) -> bool {
        self.probable
    }

    pub fn product(&self) -> BigUint {
        self.factors.iter().fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|(_, e)| *e == 1)
    }

    pub fn smallest_square_prime(&self) -> Option<&BigUint> {
        self.factors.iter().find(|(_, e)| *e >= 2).map(|(p, _)| p)
    }
}

/// Trial division followed by Brent's rho with a seeded generator.
#[derive(Clone, Copy, Debug)]
pub struct Factorizer {
    seed: u64,
    trial_bound: u64,
}

impl Default for Factorizer {
    fn default() -> Self {
        Factorizer { seed: DEFAULT_SEED, trial_bound: DEFAULT_TRIAL_BOUND }
    }
}

/// Factor `n >= 1` with the default seed and trial bound.
pub fn factorize(n: &BigUint) -> Factorization {
    Factorizer::default().factor(n)
}

impl Factorizer {
    pub fn new(seed: u64) -> Self {
        Factorizer { seed, ..Default::default() }
    }

    /// Trial-divide only by primes `<= bound` (capped at `10^5`). Callers that
    /// already know `n` has no small factors pass a low bound.
    pub fn with_trial_bound(mut self, bound: u64) -> Self {
        self.trial_bound = bound.min(DEFAULT_TRIAL_BOUND);
        self
    }

    /// # Panics
    /// If `n` is zero.
    pub fn factor(&self, n: &BigUint) -> Factorization {
        assert!(!n.is_zero(), "cannot factor zero");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut acc = BTreeMap::new();
        let mut probable = false;
        let rest = self.trial_divide(n, &mut acc);
        split(rest, &mut rng, &mut acc, &mut probable);
        Factorization { value: n.clone(), factors: acc.into_iter().collect(), probable }
    }

    fn trial_divide(&self, n: &BigUint, acc: &mut BTreeMap<BigUint, u32>) -> BigUint {
        let primes = small_primes().iter().take_while(|&&p| p <= self.trial_bound);
        if let Some(mut m) = n.to_u128() {
            for &p in primes {
                let p128 = p as u128;
                if p128 * p128 > m {
                    break;
                }
                let mut e = 0;
                while m % p128 == 0 {
                    m /= p128;
                    e += 1;
                }
                if e > 0 {
                    acc.insert(BigUint::from(p), e);
                }
            }
            return BigUint::from(m);
        }
        let mut m = n.clone();
        for &p in primes {
            let mut e = 0;
            loop {
                let (q, r) = m.div_rem(&BigUint::from(p));
                if !r.is_zero() {
                    break;
                }
                m = q;
                e += 1;
            }
            if e > 0 {
                acc.insert(BigUint::from(p), e);
            }
        }
        m
    }
}

fn split(m: BigUint, rng: &mut ChaCha8Rng, acc: &mut BTreeMap<BigUint, u32>, probable: &mut bool) {
    let mut stack = vec![(m, 1u32)];
    while let Some((m, mult)) = stack.pop() {
        if m.is_one() {
            continue;
        }
        match primality(&m) {
            Primality::Prime => *acc.entry(m).or_insert(0) += mult,
            Primality::ProbablePrime => {
                *probable = true;
                *acc.entry(m).or_insert(0) += mult;
            }
            Primality::Composite => {
                // rho cycles are useless on prime powers
                if let Some((root, k)) = perfect_power(&m) {
                    stack.push((root, mult * k));
                    continue;
                }
                let d = find_divisor(&m, rng);
                let q = &m / &d;
                stack.push((d, mult));
                stack.push((q, mult));
            }
        }
    }
}

fn perfect_power(m: &BigUint) -> Option<(BigUint, u32)> {
    let bits = m.bits() as u32;
    for k in 2..=bits {
        let r = m.nth_root(k);
        if r <= BigUint::one() {
            break;
        }
        if r.pow(k) == *m {
            return Some((r, k));
        }
    }
    None
}

fn find_divisor(m: &BigUint, rng: &mut ChaCha8Rng) -> BigUint {
    for &p in small_primes().iter().take(16) {
        if (m % p).is_zero() {
            return BigUint::from(p);
        }
    }
    match m.to_u128() {
        Some(v) if v < Mont128::MAX_MODULUS => BigUint::from(rho_u128(v, rng)),
        _ => rho_big(m, rng),
    }
}

/// Brent's variant of Pollard rho in Montgomery form. `n` odd composite.
fn rho_u128(n: u128, rng: &mut ChaCha8Rng) -> u128 {
    const BATCH: u64 = 128;
    let mont = Mont128::new(n);
    loop {
        let c = mont.to_mont(rng.random_range(1..n));
        let mut y = mont.to_mont(rng.random_range(0..n));
        let step = |v: u128| mont.add(mont.mul(v, v), c);
        let (mut r, mut q, mut g) = (1u64, mont.one(), 1u128);
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = step(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = step(y);
                    q = mont.mul(q, mont.sub(x, y));
                }
                g = gcd_u128(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            // batch overshot; replay one step at a time
            loop {
                ys = step(ys);
                g = gcd_u128(mont.sub(x, ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
}

fn random_below(n: &BigUint, rng: &mut ChaCha8Rng) -> BigUint {
    let words = n.bits().div_ceil(32) as usize + 2;
    let digits: Vec<u32> = (0..words).map(|_| rng.random()).collect();
    BigUint::new(digits) % n
}

fn rho_big(n: &BigUint, rng: &mut ChaCha8Rng) -> BigUint {
    let one = BigUint::one();
    loop {
        let c = random_below(n, rng).max(one.clone());
        let mut y = random_below(n, rng);
        let step = |v: &BigUint| (v * v + &c) % n;
        let (mut r, mut q, mut g) = (1u64, one.clone(), one.clone());
        let mut x = y.clone();
        let mut ys = y.clone();
        let diff = |a: &BigUint, b: &BigUint| if a >= b { a - b } else { b - a };
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = step(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..64.min(r - k) {
                    y = step(&y);
                    q = (q * diff(&x, &y)) % n;
                }
                g = q.gcd(n);
                k += 64;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = step(&ys);
                g = diff(&x, &ys).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if g != *n {
            return g;
        }
    }
}
