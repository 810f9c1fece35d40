//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sqfree_core::density::{delta_table, tabulated_product};
use sqfree_core::experiments::{rho_scan, MomentConstants};
use sqfree_core::numtheory::gcd_u64;
use sqfree_core::{
    abc_census, abc_moment_check, census, density_report, euler_product, quadratic_exceptions,
    r_brute, r_of_prime_power, rho, roots_mod_prime_power, s1_bound_check, survey_cyclotomic,
    BruteOutcome, CensusOptions, CyclotomicSpec, IntPoly, QuadraticSpec, RValue, Verdict,
};

const SLACK: f64 = 0.005;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sqfree(args: &[&str], workers: usize) -> (String, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_sqfree"))
        .args(args)
        .args(["--workers", &workers.to_string()])
        .output()
        .expect("run sqfree");
    assert!(out.status.success(), "sqfree {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    (String::from_utf8(out.stdout).expect("utf8"), start.elapsed())
}

fn csv_exceptions(csv: &str) -> Vec<u64> {
    csv.lines()
        .skip(1)
        .filter(|l| l.ends_with(",1"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect()
}

fn preset(name: &str, expected: &[u64], budget: u64) -> Outcome {
    let (csv, took) = sqfree(&["repro", name], 4);
    let got = csv_exceptions(&csv);
    outcome(
        got == expected && took.as_secs() <= budget,
        format!("exceptions {got:?} (want {expected:?}), {:.1}s of {budget}s", took.as_secs_f64()),
    )
}

fn phi(ell: u64) -> IntPoly {
    CyclotomicSpec::new(ell).unwrap().polynomial()
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> Vec<i64> {
    let deg = rng.random_range(1..=max_degree);
    let mut c: Vec<i64> = (0..=deg).map(|_| rng.random_range(-30..=30)).collect();
    if c[deg] == 0 {
        c[deg] = 1;
    }
    c
}

/// Residues `x < m` with `m | f(x)`, by Horner in `i128`.
fn scan_roots(coeffs: &[i64], m: u64) -> Vec<u64> {
    let m = m as i128;
    (0..m)
        .filter(|&x| coeffs.iter().rev().fold(0i128, |acc, &c| (acc * x + c as i128).rem_euclid(m)) == 0)
        .map(|x| x as u64)
        .collect()
}

fn small_primes(below: u64) -> Vec<u64> {
    (2..below).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = 0;
    let mut mismatches = 0;
    for _ in 0..200 {
        let c = random_poly(&mut rng, 5);
        let f = IntPoly::from_i64s(&c);
        for p in small_primes(50) {
            for k in 1..=3 {
                let m = p.pow(k);
                checks += 1;
                if roots_mod_prime_power(&f, p, k).residues() != scan_roots(&c, m).as_slice() {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in {checks} root sets"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut polys: Vec<IntPoly> = [3, 5, 7, 11].into_iter().map(phi).collect();
    polys.extend((0..50).map(|_| IntPoly::from_i64s(&random_poly(&mut rng, 5))));
    let mut checks = 0;
    let mut mismatches = 0;
    for f in &polys {
        for p in small_primes(100) {
            for k in 1..=2 {
                let n = p.pow(k);
                let fast = r_of_prime_power(f, p, k).value;
                let slow = match r_brute(f, n, n) {
                    BruteOutcome::Found(r) => r.value,
                    BruteOutcome::Exceeded(_) => RValue::Infinite,
                };
                checks += 1;
                mismatches += usize::from(fast != slow);
            }
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in {checks} values"))
}

/// Smallest `p` with `p² | n`, by trial division.
fn smallest_square_prime(mut n: u64) -> Option<u64> {
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return Some(p);
            }
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    None
}

fn criterion_6() -> Outcome {
    let mut mismatches = 0;
    let mut total = 0;
    for f in [phi(5), IntPoly::from_i64s(&[1, 0, 1])] {
        let (_, verdicts) = census(&f, 2000, 10_000).unwrap();
        for v in &verdicts {
            let value: u64 = v.value.magnitude().try_into().unwrap();
            let truth = match smallest_square_prime(value) {
                Some(p) => Verdict::HasSquare(BigUint::from(p)),
                None => Verdict::Squarefree,
            };
            total += 1;
            mismatches += usize::from(v.verdict != truth);
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in {total} verdicts"))
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for f in [phi(5), IntPoly::from_i64s(&[1, 0, 1])] {
        let start = Instant::now();
        let (report, _) = density_report(&f, 10_000, 100_000, &CensusOptions::default()).unwrap();
        let mid = report.bracket.midpoint();
        let (lo, hi) = (report.bracket.lo_f64(), report.bracket.hi_f64());
        let e = report.empirical;
        let ok = (e - mid).abs() < SLACK && lo - SLACK <= e && e <= hi + SLACK && start.elapsed().as_secs() <= 600;
        pass &= ok;
        parts.push(format!(
            "{}: empirical {e:.6}, bracket [{lo:.6}, {hi:.6}], |dev| {:.6}, {:.1}s",
            f.id(),
            (e - mid).abs(),
            start.elapsed().as_secs_f64()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let spec = CyclotomicSpec::new(5).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [1_000u64, 10_000, 100_000] {
        let report = survey_cyclotomic(spec, t).unwrap();
        let pi = small_primes_count(t);
        let ok = s1_bound_check(&report, 5) && report.s1_count as u64 <= 10 * t && report.s1_count as u64 <= pi;
        pass &= ok;
        parts.push(format!("T={t}: |S1|={} pi(T)={pi}", report.s1_count));
    }
    outcome(pass, parts.join(", "))
}

fn small_primes_count(t: u64) -> u64 {
    let mut sieve = vec![true; t as usize + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= t as usize {
        if sieve[i] {
            (i * i..=t as usize).step_by(i).for_each(|j| sieve[j] = false);
        }
        i += 1;
    }
    sieve.iter().filter(|&&b| b).count() as u64
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for ell in [3u64, 5, 7, 11] {
        let spec = CyclotomicSpec::new(ell).unwrap();
        let rows = delta_table(spec, 9_999);
        let split_ok = rows.iter().filter(|r| r.p != ell).all(|r| r.delta == ell - 1);
        let ramified_ok = rows.iter().find(|r| r.p == ell).is_some_and(|r| r.delta == 0);
        pass &= split_ok && ramified_ok;
        let flagged = rows.iter().filter(|r| r.discrepancy).count();
        let actual = euler_product(&spec.polynomial(), 9_999).unwrap().hi_f64();
        let tabulated = tabulated_product(spec, 9_999);
        parts.push(format!(
            "ell={ell}: {} rows, A_p=ell (A_ell=1) differs from delta in {flagged} rows; products {actual:.6} vs tabulated {tabulated:.6}",
            rows.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let x2p1 = quadratic_exceptions(QuadraticSpec::new(1, 0, 1).unwrap(), 1_000_000).unwrap();
    let mut pass = x2p1.exceptions.is_empty();
    let mut worst = Vec::new();
    let mut cases = 0;
    for b in 1..=5i64 {
        for c in 1..=5i64 {
            if b * b == 4 * c {
                continue;
            }
            cases += 1;
            let r = quadratic_exceptions(QuadraticSpec::new(1, b, c).unwrap(), 100_000).unwrap();
            if !r.threshold_holds() {
                pass = false;
                worst.push(format!("({b},{c}): {:?}", r.above_threshold));
            }
        }
    }
    let took = start.elapsed();
    pass &= took.as_secs() <= 300;
    outcome(
        pass,
        format!(
            "X^2+1 to 10^6: {:?}; {cases} separable cases to 10^5, violations {worst:?}; {:.1}s",
            x2p1.exceptions,
            took.as_secs_f64()
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pairs = 0;
    let mut mult_ok = true;
    while pairs < 50 {
        let (a, b) = (rng.random_range(1..10_000u64), rng.random_range(1..10_000u64));
        if gcd_u64(a, b) != 1 {
            continue;
        }
        pairs += 1;
        mult_ok &= rho(3, a * b).unwrap() == rho(3, a).unwrap() * rho(3, b).unwrap();
    }
    let closed_ok = small_primes(10_000).into_iter().filter(|&p| 6 % p != 0).all(|p| rho_scan(3, p) == gcd_u64(6, p - 1));
    let mut parts = Vec::new();
    let mut ineq_ok = true;
    for a in [16u64, 64, 128] {
        let r = abc_census(3, a).unwrap();
        ineq_ok &= r.lower_bound_holds();
        parts.push(format!(
            "A={a}: M1={} M2={} sumR={} moments {}",
            r.m1,
            r.m2,
            r.sum_r,
            abc_moment_check(&r, MomentConstants::default())
        ));
    }
    outcome(
        mult_ok && closed_ok && ineq_ok,
        format!("multiplicative {mult_ok}, closed form {closed_ok}; {}", parts.join(", ")),
    )
}

fn criterion_12() -> Outcome {
    let (one, _) = sqfree(&["repro", "ell5-200k"], 1);
    let (eight, _) = sqfree(&["repro", "ell5-200k"], 8);
    outcome(one == eight && !one.is_empty(), format!("{} bytes, identical: {}", one.len(), one == eight))
}

fn main() {
    // `cargo test -- <filter>` passes arguments; run everything unless listing
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: Vec<Criterion> = vec![
        ("exceptions ell=5 to 200000", || preset("ell5-200k", &[11, 131], 120)),
        ("exceptions ell=7 to 100000", || preset("ell7-100k", &[], 60)),
        ("exceptions ell=11 to 10000", || preset("ell11-10k", &[], 10)),
        ("lifted roots equal scans", criterion_4),
        ("R from roots equals brute force", criterion_5),
        ("census equals trial division", criterion_6),
        ("density within 0.005", criterion_7),
        ("S1 cardinality bound", criterion_8),
        ("delta structure", criterion_9),
        ("quadratic thresholds", criterion_10),
        ("rho and abc statistics", criterion_11),
        ("worker-count determinism", criterion_12),
    ];
    let mut failed = BTreeSet::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.insert(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
