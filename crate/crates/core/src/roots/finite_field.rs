//! Dense polynomials over `F_p` for `p < 2^63`, just enough to extract
//! the roots of a polynomial: `gcd(f, X^p - X)` followed by random
//! equal-degree splitting (Cantor-Zassenhaus).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numtheory::{inv_mod, mul_mod};

type Poly = Vec<u64>;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn monic(a: Poly, p: u64) -> Poly {
    let Some(&lc) = a.last() else { return a };
    let inv = inv_mod(lc, p).expect("nonzero leading coefficient over a field");
    a.into_iter().map(|c| mul_mod(c, inv, p)).collect()
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            if x >= y {
                x - y
            } else {
                x + (p - y)
            }
        })
        .collect();
    trim(out)
}

fn mul(a: &[u64], b: &[u64], p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    let p128 = p as u128;
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u128 * y as u128) % p128;
        }
    }
    trim(out.into_iter().map(|c| c as u64).collect())
}

/// Quotient and remainder of `a / b`, `b` monic.
fn divrem(a: &[u64], b: &[u64], p: u64) -> (Poly, Poly) {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    if r.len() <= db {
        return (Vec::new(), trim(r));
    }
    let mut q = vec![0u64; r.len() - db];
    for i in (db..r.len()).rev() {
        let c = r[i];
        if c == 0 {
            continue;
        }
        q[i - db] = c;
        for (j, &bj) in b.iter().enumerate() {
            let t = mul_mod(c, bj, p);
            let k = i - db + j;
            r[k] = if r[k] >= t { r[k] - t } else { r[k] + (p - t) };
        }
    }
    r.truncate(db);
    (trim(q), trim(r))
}

fn rem(a: &[u64], b: &[u64], p: u64) -> Poly {
    divrem(a, b, p).1
}

fn gcd(a: Poly, b: Poly, p: u64) -> Poly {
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        let bm = monic(b, p);
        let r = rem(&a, &bm, p);
        a = bm;
        b = r;
    }
    monic(a, p)
}

/// `base^e mod modulus`, modulus monic.
fn pow_mod(base: &[u64], mut e: u64, modulus: &[u64], p: u64) -> Poly {
    let mut result = vec![1u64];
    let mut b = rem(base, modulus, p);
    while e > 0 {
        if e & 1 == 1 {
            result = rem(&mul(&result, &b, p), modulus, p);
        }
        b = rem(&mul(&b, &b, p), modulus, p);
        e >>= 1;
    }
    result
}

/// Distinct roots in `[0, p)` of the nonzero polynomial `f` (ascending
/// coefficients already reduced mod `p`). `p` must be an odd prime.
pub(crate) fn roots(f: &[u64], p: u64) -> Vec<u64> {
    let f = trim(f.to_vec());
    if f.len() <= 1 {
        return Vec::new();
    }
    let f = monic(f, p);
    let xp = pow_mod(&[0, 1], p, &f, p);
    let g = gcd(f.clone(), sub(&xp, &[0, 1], p), p);
    let mut rng = ChaCha8Rng::seed_from_u64(p ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = Vec::with_capacity(g.len().saturating_sub(1));
    let mut stack = vec![g];
    while let Some(g) = stack.pop() {
        match g.len() {
            0 | 1 => {}
            2 => out.push((p - g[0]) % p),
            _ => loop {
                let shift = rng.random_range(0..p);
                let h = pow_mod(&[shift, 1], (p - 1) / 2, &g, p);
                let d = gcd(g.clone(), sub(&h, &[1], p), p);
                if d.len() > 1 && d.len() < g.len() {
                    let (q, _) = divrem(&g, &d, p);
                    stack.push(d);
                    stack.push(q);
                    break;
                }
            },
        }
    }
    out.sort_unstable();
    out
}
