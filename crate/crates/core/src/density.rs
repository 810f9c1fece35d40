//! The conjectured density `C_f = ∏_p (1 - δ_f(p²)/p²)` and the exact
//! proportion of square-free values among `f(1), …, f(X)`.
//!
//! The product is truncated at `M` and enclosed in a bracket
//! `[lo, hi]` that provably contains `C_f`:
//!
//! - primes `p <= M` contribute exact factors (exact rationals up to
//!   [`EXACT_PRODUCT_LIMIT`], outward-rounded fixed point beyond);
//! - primes `p > M` not dividing `content · lc · disc` have `δ_f(p²) <= deg f`,
//!   so their joint factor lies in `[1 - deg f/(M - 1), 1]`;
//! - the finitely many primes `p > M` dividing `content · lc · disc` are
//!   handled individually (exactly when small, else via `δ_f(p²) <= deg f · p`).

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{
    is_perfect_square, primality, primes_up_to, Factorizer, Primality, PrimeRange,
};
use crate::polynomial::{magnitude, CyclotomicSpec, IntPoly};
use crate::roots::{cyclotomic_roots, delta, roots_mod_p, lift_roots, RootSet};
use crate::survey::check_hypotheses;
use crate::DEFAULT_SEED;

/// Up to this truncation the product is kept as an exact rational.
pub const EXACT_PRODUCT_LIMIT: u64 = 10_000;
/// Fractional bits of the fixed-point accumulator used beyond the exact limit.
const FIXED_BITS: u64 = 256;
/// Primes dividing the discriminant above this are bounded, not evaluated.
const EXCEPTIONAL_EXACT_LIMIT: u64 = 1 << 21;
pub const DEFAULT_SLACK: f64 = 0.005;
/// Digits printed for bracket endpoints.
const REPORT_DIGITS: usize = 30;

/// Certified enclosure of the Euler product.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerBracket {
    pub poly_id: String,
    pub truncation: u64,
    pub lo: BigRational,
    pub hi: BigRational,
    /// `∏_{p <= M} (1 - δ_f(p²)/p²)` when `M <= EXACT_PRODUCT_LIMIT`.
    pub truncated: Option<BigRational>,
    /// Primes above `M` dividing `content · lc · disc`.
    pub exceptional_primes: Vec<u64>,
}

impl EulerBracket {
    pub fn lo_f64(&self) -> f64 {
        to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        to_f64(&self.hi)
    }

    pub fn midpoint(&self) -> f64 {
        to_f64(&((&self.lo + &self.hi) / BigInt::from(2)))
    }

    pub fn width(&self) -> f64 {
        to_f64(&(&self.hi - &self.lo))
    }

    pub fn contains(&self, other: &EulerBracket) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl Serialize for EulerBracket {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("EulerBracket", 8)?;
        st.serialize_field("poly", &self.poly_id)?;
        st.serialize_field("truncation", &self.truncation)?;
        st.serialize_field("product_lo", &decimal(&self.lo, REPORT_DIGITS, Rounding::Down))?;
        st.serialize_field("product_hi", &decimal(&self.hi, REPORT_DIGITS, Rounding::Up))?;
        st.serialize_field("product_mid", &self.midpoint())?;
        st.serialize_field("width", &self.width())?;
        st.serialize_field("truncated_product", &self.truncated.as_ref().map(to_f64))?;
        st.serialize_field("exceptional_primes", &self.exceptional_primes)?;
        st.end()
    }
}

#[derive(Clone, Copy)]
enum Rounding {
    Down,
    Up,
}

/// Nonnegative rational as a decimal string, rounded in the given direction.
fn decimal(r: &BigRational, digits: usize, rounding: Rounding) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = r.numer() * &scale;
    let (q, rem) = scaled.div_mod_floor(r.denom());
    let q = match rounding {
        Rounding::Up if !rem.is_zero() => q + 1,
        _ => q,
    };
    let s = format!("{:0>width$}", q.to_string(), width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    format!("{int}.{frac}")
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    decimal(&r.abs(), 20, Rounding::Down).parse::<f64>().unwrap_or(f64::NAN) * if r.is_negative() { -1.0 } else { 1.0 }
}

fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Fixed-point value `num / 2^FIXED_BITS` multiplied by `(p² - δ)/p²`,
/// rounded toward `-∞` (lower end) or `+∞` (upper end).
fn fixed_scale(num: &BigUint, keep: u128, total: u128, round_up: bool) -> BigUint {
    let prod = num * BigUint::from(keep);
    let total = BigUint::from(total);
    let (q, r) = prod.div_rem(&total);
    if round_up && !r.is_zero() {
        q + 1u32
    } else {
        q
    }
}

/// Bracket for `C_f` truncated at `M`.
pub fn euler_product(f: &IntPoly, truncation: u64) -> Result<EulerBracket> {
    check_local_solubility(f)?;
    if truncation < 2 {
        return Err(Error::invalid(format!("truncation must be >= 2, got {truncation}")));
    }
    let g = f.degree() as u64;
    let primes: Vec<u64> = PrimeRange::up_to(truncation).iter().collect();
    let deltas: Vec<(u64, u64)> = primes.par_iter().map(|&p| (p, delta(f, p, 2) as u64)).collect();

    let mut exact = BigRational::one();
    let mut fixed: Option<(BigUint, BigUint)> = None;
    for &(p, d) in &deltas {
        let p2 = p as u128 * p as u128;
        if d as u128 >= p2 {
            return Err(Error::SolubilityFailure(p));
        }
        if d == 0 {
            continue;
        }
        if p <= EXACT_PRODUCT_LIMIT {
            exact *= ratio(p2 - d as u128, p2);
            continue;
        }
        let (lo, hi) = fixed.get_or_insert_with(|| {
            let scaled = exact.numer() << FIXED_BITS;
            let (q, r) = scaled.div_rem(exact.denom());
            let lo = q.magnitude().clone();
            let hi = if r.is_zero() { lo.clone() } else { &lo + 1u32 };
            (lo, hi)
        });
        *lo = fixed_scale(lo, p2 - d as u128, p2, false);
        *hi = fixed_scale(hi, p2 - d as u128, p2, true);
    }
    let (mut lo, mut hi, truncated) = match fixed {
        None => (exact.clone(), exact.clone(), Some(exact)),
        Some((l, h)) => {
            let den = BigInt::one() << FIXED_BITS;
            (BigRational::new(l.into(), den.clone()), BigRational::new(h.into(), den), None)
        }
    };

    let bad = f.content_gcd() * f.leading().magnitude() * f.discriminant_abs();
    let mut exceptional_primes = Vec::new();
    for (q, _) in Factorizer::default().factor(&bad).factors() {
        let Some(q) = q.to_u64().filter(|&q| q > truncation) else {
            if q.to_u64().is_none() {
                // too large for any root computation: δ(q²) <= g·q
                let qi = BigInt::from(q.clone());
                lo *= BigRational::new(&qi - BigInt::from(g), qi);
            }
            continue;
        };
        exceptional_primes.push(q);
        if q < EXCEPTIONAL_EXACT_LIMIT {
            let q2 = q as u128 * q as u128;
            let d = delta(f, q, 2) as u128;
            if d >= q2 {
                return Err(Error::SolubilityFailure(q));
            }
            let factor = ratio(q2 - d, q2);
            lo *= factor.clone();
            hi *= factor;
        } else {
            lo *= ratio((q - g) as u128, q as u128);
        }
    }

    let tail_lo = if truncation - 1 > g { ratio((truncation - 1 - g) as u128, (truncation - 1) as u128) } else { BigRational::zero() };
    lo *= tail_lo;
    Ok(EulerBracket { poly_id: f.id(), truncation, lo, hi, truncated, exceptional_primes })
}

/// `δ_f(p²) = p²` exactly when `p² | content(f)`, so a square content is
/// reported as a failure at its smallest square prime.
fn check_local_solubility(f: &IntPoly) -> Result<()> {
    match check_hypotheses(f) {
        Err(Error::SquareContent(c)) => {
            let fac = Factorizer::default().factor(&c);
            match fac.smallest_square_prime().and_then(|p| p.to_u64()) {
                Some(p) => Err(Error::SolubilityFailure(p)),
                None => Err(Error::SquareContent(c)),
            }
        }
        other => other,
    }
}

/// `∏_{p <= M} (1 - A_p/p²)` with `A_p = ℓ` for `p ≡ 1 (mod ℓ)`, `A_ℓ = 1`,
/// `A_p = 0` otherwise: the table that counts every solution of
/// `X^ℓ ≡ 1 (mod p²)` rather than the roots of `Φ_ℓ`.
pub fn tabulated_product(spec: CyclotomicSpec, truncation: u64) -> f64 {
    let ell = spec.ell();
    PrimeRange::up_to(truncation)
        .iter()
        .map(|p| {
            let a = tabulated_a_p(ell, p) as f64;
            1.0 - a / (p as f64 * p as f64)
        })
        .product()
}

pub fn tabulated_product_exact(spec: CyclotomicSpec, truncation: u64) -> BigRational {
    let ell = spec.ell();
    let mut acc = BigRational::one();
    for p in PrimeRange::up_to(truncation) {
        let a = tabulated_a_p(ell, p) as u128;
        if a > 0 {
            let p2 = p as u128 * p as u128;
            acc *= ratio(p2 - a, p2);
        }
    }
    acc
}

pub fn tabulated_a_p(ell: u64, p: u64) -> u64 {
    if p == ell {
        1
    } else if p % ell == 1 {
        ell
    } else {
        0
    }
}

/// `δ_{Φ_ℓ}(p²)` next to the tabulated `A_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaRow {
    pub p: u64,
    pub delta: u64,
    pub tabulated_a_p: u64,
    pub discrepancy: bool,
}

impl DeltaRow {
    pub const CSV_HEADER: &'static str = "p,delta,tabulated_a_p,discrepancy";

    pub fn csv_line(&self) -> String {
        format!("{},{},{},{}", self.p, self.delta, self.tabulated_a_p, u8::from(self.discrepancy))
    }
}

/// Rows for `p = ℓ` and every prime `p ≡ 1 (mod ℓ)` up to `limit`.
pub fn delta_table(spec: CyclotomicSpec, limit: u64) -> Vec<DeltaRow> {
    let ell = spec.ell();
    PrimeRange::up_to(limit)
        .iter()
        .filter(|&p| p == ell || p % ell == 1)
        .map(|p| {
            let delta = cyclotomic_roots(spec, p, 2).len() as u64;
            let tabulated = tabulated_a_p(ell, p);
            DeltaRow { p, delta, tabulated_a_p: tabulated, discrepancy: delta != tabulated }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Squarefree,
    /// The smallest prime whose square divides the value.
    HasSquare(BigUint),
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusVerdict {
    pub d: u64,
    pub value: BigInt,
    pub verdict: Verdict,
}

impl CensusVerdict {
    pub const CSV_HEADER: &'static str = "d,value,verdict,witness_prime";

    pub fn csv_line(&self) -> String {
        match &self.verdict {
            Verdict::Squarefree => format!("{},{},SQUAREFREE,", self.d, self.value),
            Verdict::HasSquare(p) => format!("{},{},HAS_SQUARE,{}", self.d, self.value, p),
            Verdict::Zero => format!("{},{},ZERO,", self.d, self.value),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    /// Defaults to `max(10^4, X)`.
    pub sieve_bound: Option<u64>,
    pub seed: u64,
    /// Arguments per parallel work unit.
    pub window: u64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions { sieve_bound: None, seed: DEFAULT_SEED, window: 1 << 13 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusSummary {
    pub poly: String,
    pub x: u64,
    pub sieve_bound: u64,
    pub squarefree_count: u64,
    /// Arguments with `f(d) != 0`.
    pub valid_count: u64,
    pub zero_count: u64,
    /// `(d, p)` with `p² | f(d)` and `p` above the sieve bound.
    pub large_squares: Vec<(u64, String)>,
    /// Some cofactor above `2^64` was accepted as a probable prime.
    pub probable_primes: bool,
}

impl CensusSummary {
    pub fn empirical(&self) -> f64 {
        self.squarefree_count as f64 / self.valid_count as f64
    }
}

struct PrimeData {
    p: u64,
    mod_p: RootSet,
    mod_p2: RootSet,
}

/// Exact square-free classification of `f(1), …, f(X)` with sieve bound `B`.
pub fn census(f: &IntPoly, x: u64, sieve_bound: u64) -> Result<(CensusSummary, Vec<CensusVerdict>)> {
    census_with(f, x, &CensusOptions { sieve_bound: Some(sieve_bound), ..Default::default() })
}

pub fn census_with(f: &IntPoly, x: u64, opts: &CensusOptions) -> Result<(CensusSummary, Vec<CensusVerdict>)> {
    if x == 0 {
        return Err(Error::invalid("census needs X >= 1"));
    }
    if f.is_zero() {
        return Err(Error::invalid("census of the zero polynomial"));
    }
    let bound = opts.sieve_bound.unwrap_or(x.max(10_000));
    if bound < 2 {
        return Err(Error::invalid(format!("sieve bound must be >= 2, got {bound}")));
    }
    if opts.window == 0 {
        return Err(Error::invalid("census window must be positive"));
    }
    let primes: Vec<PrimeData> = primes_up_to(bound)
        .into_par_iter()
        .map(|p| {
            let mod_p = roots_mod_p(f, p);
            let mod_p2 = if mod_p.is_empty() { RootSet::empty(p * p) } else { lift_roots(f, p, 2, &mod_p) };
            PrimeData { p, mod_p, mod_p2 }
        })
        .collect();
    let factorizer = Factorizer::new(opts.seed).with_trial_bound(0);

    let windows: Vec<(u64, u64)> = (0..x.div_ceil(opts.window))
        .map(|w| (w * opts.window + 1, ((w + 1) * opts.window).min(x)))
        .collect();
    let parts: Vec<(Vec<CensusVerdict>, bool)> = windows
        .into_par_iter()
        .map(|(a, b)| census_window(f, a, b, bound, &primes, &factorizer))
        .collect();

    let mut verdicts = Vec::with_capacity(x as usize);
    let mut probable = false;
    for (v, pr) in parts {
        verdicts.extend(v);
        probable |= pr;
    }
    let bound_big = BigUint::from(bound);
    let mut summary = CensusSummary {
        poly: f.id(),
        x,
        sieve_bound: bound,
        squarefree_count: 0,
        valid_count: 0,
        zero_count: 0,
        large_squares: Vec::new(),
        probable_primes: probable,
    };
    for v in &verdicts {
        match &v.verdict {
            Verdict::Zero => summary.zero_count += 1,
            Verdict::Squarefree => {
                summary.valid_count += 1;
                summary.squarefree_count += 1;
            }
            Verdict::HasSquare(p) => {
                summary.valid_count += 1;
                if *p > bound_big {
                    summary.large_squares.push((v.d, p.to_string()));
                }
            }
        }
    }
    Ok((summary, verdicts))
}

/// First `d >= a` with `d ≡ r (mod m)`.
fn first_in_class(a: u64, r: u64, m: u64) -> u64 {
    a + (r + m - a % m) % m
}

fn census_window(
    f: &IntPoly,
    a: u64,
    b: u64,
    bound: u64,
    primes: &[PrimeData],
    factorizer: &Factorizer,
) -> (Vec<CensusVerdict>, bool) {
    let len = (b - a + 1) as usize;
    let values: Vec<BigInt> = (a..=b).map(|d| f.eval(&BigInt::from(d))).collect();

    // stage 1: residue classes of roots mod p² carry p²
    let mut witness: Vec<Option<u64>> = vec![None; len];
    for pd in primes {
        let m = pd.mod_p2.modulus();
        for &r in pd.mod_p2.residues() {
            let mut d = first_in_class(a, r, m);
            while d <= b {
                witness[(d - a) as usize].get_or_insert(pd.p);
                d += m;
            }
        }
    }

    // stage 2: the small prime divisors of each surviving value, from roots mod p
    let mut small: Vec<Vec<u64>> = vec![Vec::new(); len];
    for pd in primes {
        for &r in pd.mod_p.residues() {
            let mut d = first_in_class(a, r, pd.p);
            while d <= b {
                let i = (d - a) as usize;
                if witness[i].is_none() {
                    small[i].push(pd.p);
                }
                d += pd.p;
            }
        }
    }

    let bound2 = BigUint::from(bound) * BigUint::from(bound);
    let mut probable = false;
    let verdicts = (0..len)
        .map(|i| {
            let d = a + i as u64;
            let value = values[i].clone();
            if value.is_zero() {
                return CensusVerdict { d, value, verdict: Verdict::Zero };
            }
            if let Some(p) = witness[i] {
                return CensusVerdict { d, value, verdict: Verdict::HasSquare(BigUint::from(p)) };
            }
            let mut cof = magnitude(&value);
            for &p in &small[i] {
                let (q, r) = cof.div_rem(&BigUint::from(p));
                debug_assert!(r.is_zero());
                cof = q;
                if (&cof % p).is_zero() {
                    // a root mod p² missed by stage 1 would land here
                    return CensusVerdict { d, value, verdict: Verdict::HasSquare(BigUint::from(p)) };
                }
            }
            let (verdict, pr) = classify_rough(cof, &bound2, factorizer);
            probable |= pr;
            CensusVerdict { d, value, verdict }
        })
        .collect();
    (verdicts, probable)
}

/// Square-freeness of a cofactor whose prime factors all exceed the sieve bound.
fn classify_rough(cof: BigUint, bound2: &BigUint, factorizer: &Factorizer) -> (Verdict, bool) {
    if cof.is_one() || cof < *bound2 {
        return (Verdict::Squarefree, false);
    }
    if is_perfect_square(&cof) {
        let root = cof.sqrt();
        let fac = factorizer.factor(&root);
        let p = fac.factors()[0].0.clone();
        return (Verdict::HasSquare(p), fac.is_probable());
    }
    match primality(&cof) {
        Primality::Prime => return (Verdict::Squarefree, false),
        Primality::ProbablePrime => return (Verdict::Squarefree, true),
        Primality::Composite => {}
    }
    let fac = factorizer.factor(&cof);
    let verdict = match fac.smallest_square_prime() {
        Some(p) => Verdict::HasSquare(p.clone()),
        None => Verdict::Squarefree,
    };
    (verdict, fac.is_probable())
}

/// Euler bracket and census for the same polynomial.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub bracket: EulerBracket,
    pub census: CensusSummary,
    pub empirical: f64,
    /// For `Φ_ℓ`: the product built from the tabulated `A_p` instead of `δ(p²)`.
    pub tabulated_product: Option<f64>,
    pub seed: u64,
}

pub fn density_report(
    f: &IntPoly,
    truncation: u64,
    x: u64,
    opts: &CensusOptions,
) -> Result<(DensityReport, Vec<CensusVerdict>)> {
    let bracket = euler_product(f, truncation)?;
    let (census, verdicts) = census_with(f, x, opts)?;
    let empirical = census.empirical();
    let tabulated_product = f.cyclotomic_index().map(|s| tabulated_product(s, truncation));
    Ok((DensityReport { bracket, census, empirical, tabulated_product, seed: opts.seed }, verdicts))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Comparison {
    /// `empirical - midpoint`
    pub deviation: f64,
    pub bracket_width: f64,
    pub slack: f64,
    /// `|deviation| > width + slack`
    pub flagged: bool,
    /// `lo - slack <= empirical <= hi + slack`
    pub within_bracket: bool,
}

pub fn compare(report: &DensityReport, slack: f64) -> Comparison {
    let mid = report.bracket.midpoint();
    let width = report.bracket.width();
    let deviation = report.empirical - mid;
    Comparison {
        deviation,
        bracket_width: width,
        slack,
        flagged: deviation.abs() > width + slack,
        within_bracket: report.bracket.lo_f64() - slack <= report.empirical
            && report.empirical <= report.bracket.hi_f64() + slack,
    }
}
