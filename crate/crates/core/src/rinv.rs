//! `R_f(n)`: the least positive `d` with `n | f(d)`.
//!
//! Arguments range over `d = 1, 2, 3, …`; the residue 0 mod `p^k` is the
//! argument `d = p^k`. Only the root-set route can report [`RValue::Infinite`];
//! the brute-force scan can at best report that its cap was exceeded.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::polynomial::IntPoly;
use crate::roots::roots_mod_prime_power;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RValue {
    Finite(u64),
    /// `f` has no root modulo `n`.
    Infinite,
}

impl RValue {
    pub fn finite(self) -> Option<u64> {
        match self {
            RValue::Finite(v) => Some(v),
            RValue::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, RValue::Finite(_))
    }

    /// True when finite and at most `bound`.
    pub fn at_most(self, bound: u64) -> bool {
        self.finite().is_some_and(|v| v <= bound)
    }
}

impl fmt::Display for RValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RValue::Finite(v) => write!(f, "{v}"),
            RValue::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for RValue {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "inf" {
            Ok(RValue::Infinite)
        } else {
            s.parse().map(RValue::Finite)
        }
    }
}

impl Serialize for RValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RValue::Finite(v) => s.serialize_u64(*v),
            RValue::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RRecord {
    pub n: u64,
    pub value: RValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BruteOutcome {
    Found(RRecord),
    /// No `d <= cap` works; says nothing about larger `d`.
    Exceeded(u64),
}

/// `R_f(p^k)` from the root set modulo `p^k`.
pub fn r_of_prime_power(f: &IntPoly, p: u64, k: u32) -> RRecord {
    let roots = roots_mod_prime_power(f, p, k);
    let value = roots.least_positive().map_or(RValue::Infinite, RValue::Finite);
    RRecord { n: roots.modulus(), value }
}

/// `min(R_f(p^k), R_{f(-X)}(p^k))`: the reading that lets `d` be negative.
pub fn r_signed(f: &IntPoly, p: u64, k: u32) -> RRecord {
    let pos = r_of_prime_power(f, p, k);
    let neg = r_of_prime_power(&f.negate_argument(), p, k);
    let value = match (pos.value, neg.value) {
        (RValue::Finite(a), RValue::Finite(b)) => RValue::Finite(a.min(b)),
        (RValue::Finite(a), _) | (_, RValue::Finite(a)) => RValue::Finite(a),
        _ => RValue::Infinite,
    };
    RRecord { n: pos.n, value }
}

/// Scan `d = 1..=cap`, evaluating `f(d)` exactly.
pub fn r_brute(f: &IntPoly, n: u64, cap: u64) -> BruteOutcome {
    let modulus = BigInt::from(n);
    for d in 1..=cap {
        let v = f.eval(&BigInt::from(d));
        if v.mod_floor(&modulus).is_zero() {
            return BruteOutcome::Found(RRecord { n, value: RValue::Finite(d) });
        }
    }
    BruteOutcome::Exceeded(cap)
}

/// `R_f(p^k) <= R_f(p^{k+1})` whenever the former is finite; an infinite
/// higher power always passes.
pub fn r_monotonicity_check(f: &IntPoly, p: u64, k: u32) -> bool {
    let lower = r_of_prime_power(f, p, k).value;
    let upper = r_of_prime_power(f, p, k + 1).value;
    match (lower, upper) {
        (_, RValue::Infinite) => true,
        (RValue::Finite(a), RValue::Finite(b)) => a <= b,
        // a root mod p^{k+1} is a root mod p^k
        (RValue::Infinite, RValue::Finite(_)) => false,
    }
}
