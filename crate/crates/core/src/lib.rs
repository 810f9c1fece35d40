//! Square-free values of integer polynomials.
//!
//! The crate computes, for a polynomial `f` with integer coefficients:
//!
//! - root sets of `f` modulo primes and prime powers ([`roots`]),
//! - the least positive argument `R_f(n)` with `n | f(d)` ([`rinv`]),
//! - bulk prime surveys that collect `R_f(p)`, `R_f(p²)` and the primes with
//!   `R_f(p²) <= p` ([`survey`]),
//! - a certified bracket for the Euler product `∏_p (1 - δ_f(p²)/p²)` and an
//!   exact census of square-free values `f(1), ..., f(X)` ([`density`]),
//! - the quadratic and `1 - aⁿ` experiments ([`experiments`]).
//!
//! Everything is exact integer arithmetic; the only floating point values are
//! the convenience `f64` views printed in reports.

pub mod density;
pub mod error;
pub mod experiments;
pub mod numtheory;
pub mod polynomial;
pub mod rinv;
pub mod roots;
pub mod survey;

pub use density::{
    census, census_with, compare, delta_table, density_report, euler_product, tabulated_product,
    CensusOptions, CensusSummary, CensusVerdict, Comparison, DeltaRow, DensityReport, EulerBracket,
    Verdict,
};
pub use error::{Error, Result};
pub use experiments::{
    abc_census, abc_census_with, abc_moment_check, quadratic_exceptions, rho, AbcReport, MomentConstants,
    QuadraticReport, QuadraticSpec,
};
pub use numtheory::{
    factorize, is_perfect_square, is_prime, mod_pow, Factorization, Factorizer, PrimeRange,
    Primality,
};
pub use polynomial::{CyclotomicSpec, IntPoly};
pub use rinv::{r_brute, r_monotonicity_check, r_of_prime_power, r_signed, BruteOutcome, RRecord, RValue};
pub use roots::{cyclotomic_roots, delta, lift_roots, roots_mod_p, roots_mod_prime_power, RootSet};
pub use survey::{
    diophantine_check, s1_bound_check, survey_cyclotomic, survey_cyclotomic_with, survey_general,
    survey_general_with, SurveyOptions, SurveyReport, SurveyRow,
};

/// Seed used by every randomized routine when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5eed_0f5f_2024;
