//! Integer polynomials with arbitrary-precision coefficients.
//!
//! Textual format: comma-separated coefficients in ascending degree
//! (`"2,0,0,0,1"` is `X⁴ + 2`), or `"cyclotomic:ℓ"` for `1 + X + … + X^{ℓ-1}`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numtheory::is_prime;

/// The index `ℓ` of a prime cyclotomic polynomial: an odd prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CyclotomicSpec(u64);

impl CyclotomicSpec {
    pub fn new(ell: u64) -> Result<Self> {
        if ell.is_multiple_of(2) || !is_prime(ell) {
            return Err(Error::InvalidCyclotomicIndex(ell));
        }
        Ok(CyclotomicSpec(ell))
    }

    pub fn ell(self) -> u64 {
        self.0
    }

    pub fn polynomial(self) -> IntPoly {
        cyclotomic(self)
    }
}

/// `Φ_ℓ(X) = 1 + X + … + X^{ℓ-1}`.
pub fn cyclotomic(spec: CyclotomicSpec) -> IntPoly {
    IntPoly::new(vec![BigInt::one(); spec.ell() as usize])
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    /// Ascending degree, no trailing zeros. Empty for the zero polynomial.
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// `Some(ℓ)` when the coefficients are those of `Φ_ℓ` for an odd prime `ℓ`.
    pub fn cyclotomic_index(&self) -> Option<CyclotomicSpec> {
        let n = self.coeffs.len() as u64;
        if n >= 3 && self.coeffs.iter().all(One::is_one) {
            CyclotomicSpec::new(n).ok()
        } else {
            None
        }
    }

    /// Stable identifier used in reports: `cyclotomic:ℓ` or the coefficient list.
    pub fn id(&self) -> String {
        match self.cyclotomic_index() {
            Some(spec) => format!("cyclotomic:{}", spec.ell()),
            None => self.to_string(),
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_i64(&self, x: i64) -> BigInt {
        self.eval(&BigInt::from(x))
    }

    /// Coefficients reduced into `[0, m)`.
    pub fn reduce_mod(&self, m: u64) -> Vec<u64> {
        let bm = BigInt::from(m);
        self.coeffs.iter().map(|c| c.mod_floor(&bm).to_u64().unwrap_or(0)).collect()
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect(),
        )
    }

    /// `f(-X)`.
    pub fn negate_argument(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    /// gcd of the coefficients.
    pub fn coefficient_content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    fn primitive_part(&self) -> IntPoly {
        let g = self.coefficient_content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        let mut p = IntPoly::new(self.coeffs.iter().map(|c| c / &g).collect());
        if p.leading().is_negative() {
            p.coeffs.iter_mut().for_each(|c| *c = -&*c);
        }
        p
    }

    /// Pseudo-remainder `lc(b)^(deg a - deg b + 1) · a mod b`.
    fn pseudo_rem(&self, b: &IntPoly) -> IntPoly {
        let mut r = self.coeffs.clone();
        let db = b.degree();
        let lb = b.leading();
        while r.len() > db && !r.is_empty() {
            let lr = r.last().cloned().unwrap();
            let shift = r.len() - 1 - db;
            for c in r.iter_mut() {
                *c *= &lb;
            }
            for (i, bc) in b.coeffs.iter().enumerate() {
                r[i + shift] -= &lr * bc;
            }
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        IntPoly::new(r)
    }

    /// `gcd(f, f′)` is constant, decided by a primitive remainder sequence over ℤ.
    pub fn is_separable(&self) -> bool {
        if self.degree() < 1 {
            return false;
        }
        let mut a = self.primitive_part();
        let mut b = self.derivative().primitive_part();
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.degree() == 0
    }

    /// gcd of all values `f(n)`, `n ∈ ℤ`; equal to the gcd over any
    /// `deg f + 1` consecutive arguments.
    pub fn content_gcd(&self) -> BigUint {
        (0..=self.degree() as i64)
            .fold(BigInt::zero(), |g, x| g.gcd(&self.eval_i64(x)))
            .magnitude()
            .clone()
    }

    /// Resultant of `f` and `f′` divided by the leading coefficient, up to sign.
    /// Its prime divisors are exactly the primes where `f mod p` acquires a
    /// repeated root (for `p ∤ lc`).
    pub fn discriminant_abs(&self) -> BigUint {
        let d = self.degree();
        if d < 1 {
            return BigUint::zero();
        }
        let fp = self.derivative();
        let res = sylvester_resultant(&self.coeffs, fp.coeffs());
        (res / self.leading()).magnitude().clone()
    }
}

/// Determinant of the Sylvester matrix of `a`, `b` by Bareiss elimination.
fn sylvester_resultant(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let m = a.len() - 1;
    let n = b.len().saturating_sub(1);
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    for row in 0..n {
        for (i, c) in a.iter().rev().enumerate() {
            mat[row][row + i] = c.clone();
        }
    }
    for row in 0..m {
        for (i, c) in b.iter().rev().enumerate() {
            mat[n + row][row + i] = c.clone();
        }
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..size {
        if mat[k][k].is_zero() {
            let Some(swap) = (k + 1..size).find(|&r| !mat[r][k].is_zero()) else {
                return BigInt::zero();
            };
            mat.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let v = &mat[i][j] * &mat[k][k] - &mat[i][k] * &mat[k][j];
                mat[i][j] = v / &prev;
            }
            mat[i][k] = BigInt::zero();
        }
        prev = mat[k][k].clone();
    }
    sign * &mat[size - 1][size - 1]
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.id())
    }
}

impl FromStr for IntPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("cyclotomic:") {
            let ell: u64 = rest.trim().parse().map_err(|_| Error::ParsePolynomial(s.to_string()))?;
            return Ok(cyclotomic(CyclotomicSpec::new(ell)?));
        }
        let coeffs = s
            .split(',')
            .map(|t| t.trim().parse::<BigInt>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::ParsePolynomial(s.to_string()))?;
        if coeffs.is_empty() {
            return Err(Error::ParsePolynomial(s.to_string()));
        }
        Ok(IntPoly::new(coeffs))
    }
}

/// Sign-insensitive helper for `|f(d)|`.
pub(crate) fn magnitude(v: &BigInt) -> BigUint {
    match v.sign() {
        Sign::NoSign => BigUint::zero(),
        _ => v.magnitude().clone(),
    }
}
