//! Root sets of integer polynomials modulo primes and prime powers.
//!
//! Roots mod `p` come from one of three routes: a direct scan for tiny `p`,
//! the order-`ℓ` construction for `Φ_ℓ`, and root extraction over `F_p`
//! for everything else. Prime powers are reached by Hensel lifting, with
//! singular roots expanded by checking every candidate lift.

mod finite_field;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::numtheory::{mod_pow, mul_mod};
use crate::polynomial::{CyclotomicSpec, IntPoly};
use crate::DEFAULT_SEED;

/// Primes below this are handled by scanning all residues.
pub const SCAN_THRESHOLD: u64 = 64;

/// Residues `a mod p^k` with `f(a) ≡ 0`, strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootSet {
    modulus: u64,
    residues: Vec<u64>,
}

impl RootSet {
    pub fn new(modulus: u64, mut residues: Vec<u64>) -> Self {
        residues.sort_unstable();
        residues.dedup();
        debug_assert!(residues.last().is_none_or(|&r| r < modulus));
        RootSet { modulus, residues }
    }

    pub fn empty(modulus: u64) -> Self {
        RootSet { modulus, residues: Vec::new() }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Least positive integer `d` in one of the classes; residue 0 stands
    /// for `d = modulus`.
    pub fn least_positive(&self) -> Option<u64> {
        match self.residues.as_slice() {
            [] => None,
            [0] => Some(self.modulus),
            [0, next, ..] => Some(*next),
            [first, ..] => Some(*first),
        }
    }
}

/// Horner evaluation of reduced coefficients modulo `m`.
#[inline]
pub(crate) fn eval_mod(coeffs: &[u64], x: u64, m: u64) -> u64 {
    coeffs.iter().rev().fold(0u64, |acc, &c| {
        let v = mul_mod(acc, x, m) as u128 + c as u128;
        (v % m as u128) as u64
    })
}

fn checked_prime_power(p: u64, k: u32) -> u64 {
    p.checked_pow(k)
        .filter(|&m| m < (1 << 62))
        .unwrap_or_else(|| panic!("{p}^{k} exceeds the supported modulus range"))
}

/// Every residue in `[0, m)` scanned. Reference route; `O(m · deg f)`.
pub fn roots_mod_scan(f: &IntPoly, m: u64) -> RootSet {
    let red = f.reduce_mod(m);
    RootSet::new(m, (0..m).filter(|&x| eval_mod(&red, x, m) == 0).collect())
}

/// Roots of `f` modulo the prime `p`.
pub fn roots_mod_p(f: &IntPoly, p: u64) -> RootSet {
    if let Some(spec) = f.cyclotomic_index() {
        return cyclotomic_roots(spec, p, 1);
    }
    let red = f.reduce_mod(p);
    if red.iter().all(|&c| c == 0) {
        return RootSet::new(p, (0..p).collect());
    }
    if p < SCAN_THRESHOLD {
        return roots_mod_scan(f, p);
    }
    RootSet::new(p, finite_field::roots(&red, p))
}

/// Roots modulo `p^k` from the exact root set `base` modulo `p^{k-1}`.
pub fn lift_roots(f: &IntPoly, p: u64, k: u32, base: &RootSet) -> RootSet {
    assert!(k >= 2, "lifting targets p^k with k >= 2");
    let prev = checked_prime_power(p, k - 1);
    let m = checked_prime_power(p, k);
    debug_assert_eq!(base.modulus(), prev);
    let red = f.reduce_mod(m);
    let dred = f.derivative().reduce_mod(p);
    let mut out = Vec::with_capacity(base.len());
    for &a in base.residues() {
        let fa = eval_mod(&red, a, m);
        let slope = eval_mod(&dred, a % p, p);
        if slope != 0 {
            // f(a + t·p^{k-1}) ≡ f(a) + t·p^{k-1}·f'(a)  (mod p^k)
            let inv = mod_pow(slope, p - 2, p);
            let t = (p - mul_mod((fa / prev) % p, inv, p)) % p;
            out.push(a + t * prev);
        } else {
            out.extend((0..p).map(|t| a + t * prev).filter(|&c| eval_mod(&red, c, m) == 0));
        }
    }
    RootSet::new(m, out)
}

/// Roots modulo `p^k`, `k >= 1`.
pub fn roots_mod_prime_power(f: &IntPoly, p: u64, k: u32) -> RootSet {
    assert!(k >= 1, "exponent must be positive");
    if let Some(spec) = f.cyclotomic_index() {
        return cyclotomic_roots(spec, p, k);
    }
    let mut set = roots_mod_p(f, p);
    for j in 2..=k {
        set = lift_roots(f, p, j, &set);
    }
    set
}

/// `δ_f(p^k)`: the number of roots modulo `p^k`.
pub fn delta(f: &IntPoly, p: u64, k: u32) -> usize {
    roots_mod_prime_power(f, p, k).len()
}

/// Roots of `Φ_ℓ` modulo `p^k`.
///
/// For `p ≡ 1 (mod ℓ)` the roots mod `p` are the `ℓ - 1` nontrivial powers of
/// an element of order `ℓ`; they are simple and lift uniquely. For `p = ℓ`
/// the only root mod `ℓ` is 1, and it does not lift to `ℓ²`. No other
/// prime has roots.
pub fn cyclotomic_roots(spec: CyclotomicSpec, p: u64, k: u32) -> RootSet {
    assert!(k >= 1, "exponent must be positive");
    let ell = spec.ell();
    let m = checked_prime_power(p, k);
    let base = if p == ell {
        RootSet::new(p, vec![1])
    } else if p % ell == 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ p);
        let zeta = loop {
            let z = mod_pow(rng.random_range(2..p), (p - 1) / ell, p);
            if z != 1 {
                break z;
            }
        };
        let mut powers = Vec::with_capacity(ell as usize - 1);
        let mut z = zeta;
        for _ in 1..ell {
            powers.push(z);
            z = mul_mod(z, zeta, p);
        }
        RootSet::new(p, powers)
    } else {
        return RootSet::empty(m);
    };
    let poly = spec.polynomial();
    let mut set = base;
    for j in 2..=k {
        set = lift_roots(&poly, p, j, &set);
    }
    set
}
