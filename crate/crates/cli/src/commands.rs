use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::ValueEnum;
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

use sqfree_core::density::{tabulated_product, DEFAULT_SLACK};
use sqfree_core::experiments::AbcReport;
use sqfree_core::survey::DEFAULT_CHUNK;
use sqfree_core::{
    abc_census_with, census_with, compare, delta_table, density_report, euler_product, is_prime,
    quadratic_exceptions, r_brute, r_of_prime_power, r_signed, rho, roots_mod_prime_power,
    s1_bound_check, survey_cyclotomic_with, survey_general_with, BruteOutcome, CensusOptions,
    CensusVerdict, CyclotomicSpec, DeltaRow, Factorizer, IntPoly, MomentConstants, PrimeRange,
    QuadraticSpec, SurveyOptions,
};

use crate::config::Settings;
use crate::{CliError, Command, Format, Output, PolyPrime};

pub struct Context {
    pub seed: u64,
    pub format: Option<Format>,
}

impl Context {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    #[value(name = "ell5-200k")]
    Ell5,
    #[value(name = "ell7-100k")]
    Ell7,
    #[value(name = "ell11-10k")]
    Ell11,
    #[value(name = "x4plus2-survey")]
    X4Plus2,
    #[value(name = "quad-x2plus1")]
    QuadX2Plus1,
    #[value(name = "abc-n3")]
    AbcN3,
}

impl Preset {
    pub fn expand(self) -> Command {
        let survey = |poly: &str, limit: u64| Command::Survey {
            poly: Some(poly.to_string()),
            limit: Some(limit),
            chunk: None,
            journal: None,
        };
        match self {
            Preset::Ell5 => survey("cyclotomic:5", 200_000),
            Preset::Ell7 => survey("cyclotomic:7", 100_000),
            Preset::Ell11 => survey("cyclotomic:11", 10_000),
            Preset::X4Plus2 => survey("2,0,0,0,1", 100_000),
            Preset::QuadX2Plus1 => Command::Quadratic { a: Some(1), b: Some(0), c: Some(1), limit: Some(1_000_000) },
            Preset::AbcN3 => Command::Abc { n: Some(3), a: Some("16,64,128".into()), c1: None, c2: None, histogram: None },
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    config: &'a BTreeMap<String, String>,
    report: T,
}

fn envelope<T: Serialize>(command: &str, settings: &Settings, report: T) -> Result<String, CliError> {
    let env = Envelope { command, config: settings.effective(), report };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| CliError::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn parse_poly(settings: &mut Settings, flag: Option<String>) -> Result<IntPoly, CliError> {
    let text: String = settings.require("poly", flag)?;
    let f: IntPoly = text.parse()?;
    if f.is_zero() {
        return Err(CliError::Validation("the zero polynomial is not allowed".into()));
    }
    Ok(f)
}

fn require_prime(p: u64) -> Result<u64, CliError> {
    if is_prime(p) {
        Ok(p)
    } else {
        Err(CliError::Validation(format!("{p} is not prime")))
    }
}

fn check_prime_power(p: u64, k: u32) -> Result<(), CliError> {
    if k == 0 {
        return Err(CliError::Validation("power must be positive".into()));
    }
    match p.checked_pow(k) {
        Some(q) if q < 1 << 62 => Ok(()),
        _ => Err(CliError::Validation(format!("{p}^{k} exceeds 2^62"))),
    }
}

fn list(xs: &[u64]) -> String {
    let parts: Vec<String> = xs.iter().map(u64::to_string).collect();
    format!("[{}]", parts.join(", "))
}

pub fn dispatch(command: Command, ctx: &Context, s: &mut Settings) -> Result<Output, CliError> {
    match command {
        Command::Primes { lo, hi } => {
            let lo = s.get("lo", lo, 2)?;
            let hi = s.positive("hi", hi)?;
            let range = PrimeRange::new(lo, hi)?;
            let primes: Vec<u64> = range.iter().collect();
            let body = match ctx.format_or(Format::Csv) {
                Format::Csv => std::iter::once("p".to_string()).chain(primes.iter().map(u64::to_string)).map(|l| l + "\n").collect(),
                Format::Json => envelope("primes", s, &primes)?,
            };
            Ok(Output { body, summary: format!("{} primes in [{lo}, {hi}]", primes.len()) })
        }
        Command::Factor { n } => {
            let text: String = s.require("n", n)?;
            let n: BigUint = text.parse().map_err(|_| CliError::Validation(format!("not a positive integer: `{text}`")))?;
            if n == BigUint::from(0u32) {
                return Err(CliError::Validation("cannot factor 0".into()));
            }
            let fac = Factorizer::new(ctx.seed).factor(&n);
            let text = fac
                .factors()
                .iter()
                .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
                .collect::<Vec<_>>()
                .join(" * ");
            let summary = format!("{n} = {}", if text.is_empty() { "1".into() } else { text.clone() });
            let body = match ctx.format_or(Format::Csv) {
                Format::Csv => format!("{summary}\n"),
                Format::Json => envelope("factor", s, &fac)?,
            };
            Ok(Output { body, summary })
        }
        Command::Roots(PolyPrime { poly, prime, power }) => {
            let f = parse_poly(s, poly)?;
            let p = require_prime(s.require("prime", prime)?)?;
            let k = s.get("power", power, 1)?;
            check_prime_power(p, k)?;
            let roots = roots_mod_prime_power(&f, p, k);
            let body = match ctx.format_or(Format::Csv) {
                Format::Csv => format!("{}\n", roots.residues().iter().map(u64::to_string).collect::<Vec<_>>().join(",")),
                Format::Json => envelope("roots", s, json!({ "modulus": roots.modulus(), "residues": roots.residues() }))?,
            };
            Ok(Output { body, summary: format!("{} roots of {} mod {}", roots.len(), f.id(), roots.modulus()) })
        }
        Command::Rinv { target: PolyPrime { poly, prime, power }, signed } => {
            let f = parse_poly(s, poly)?;
            let p = require_prime(s.require("prime", prime)?)?;
            let k = s.get("power", power, 1)?;
            check_prime_power(p, k)?;
            let signed = s.get("signed", signed.then_some(true), false)?;
            let rec = if signed { r_signed(&f, p, k) } else { r_of_prime_power(&f, p, k) };
            let body = match ctx.format_or(Format::Csv) {
                Format::Csv => format!("{}\n", rec.value),
                Format::Json => envelope("rinv", s, rec)?,
            };
            Ok(Output { body, summary: format!("R({}) = {} for {}", rec.n, rec.value, f.id()) })
        }
        Command::Rbrute { poly, n, cap } => {
            let f = parse_poly(s, poly)?;
            let n = s.positive("n", n)?;
            let cap = s.get("cap", cap, 1_000_000)?;
            let (value, summary) = match r_brute(&f, n, cap) {
                BruteOutcome::Found(rec) => (rec.value.to_string(), format!("R({n}) = {} for {}", rec.value, f.id())),
                BruteOutcome::Exceeded(c) => ("exceeded".to_string(), format!("no d <= {c} with {n} | f(d)")),
            };
            let body = match ctx.format_or(Format::Csv) {
                Format::Csv => format!("{value}\n"),
                Format::Json => envelope("rbrute", s, json!({ "n": n, "cap": cap, "value": value }))?,
            };
            Ok(Output { body, summary })
        }
        Command::Survey { poly, limit, chunk, journal } => survey(ctx, s, poly, limit, chunk, journal),
        Command::Delta { ell, limit } => {
            let spec = CyclotomicSpec::new(s.require("ell", ell)?)?;
            let limit = s.get("limit", limit, 10_000)?;
            if limit < 2 {
                return Err(CliError::Validation("limit must be >= 2".into()));
            }
            let rows = delta_table(spec, limit);
            let actual = euler_product(&spec.polynomial(), limit)?;
            let tabulated = tabulated_product(spec, limit);
            let split_ok = rows.iter().filter(|r| r.p != spec.ell()).all(|r| r.delta == spec.ell() - 1);
            let summary = format!(
                "ell={} p<={limit}: delta=ell-1 at split primes: {split_ok}; product with delta {:.10}, with tabulated A_p {:.10}",
                spec.ell(),
                actual.hi_f64(),
                tabulated
            );
            let body = match ctx.format_or(Format::Csv) {
                Format::Csv => {
                    let mut out = format!("{}\n", DeltaRow::CSV_HEADER);
                    for r in &rows {
                        out.push_str(&r.csv_line());
                        out.push('\n');
                    }
                    out
                }
                Format::Json => envelope(
                    "delta",
                    s,
                    json!({
                        "rows": rows,
                        "truncated_product": actual.hi_f64(),
                        "tabulated_product": tabulated,
                        "discrepancies": rows.iter().filter(|r| r.discrepancy).count(),
                    }),
                )?,
            };
            Ok(Output { body, summary })
        }
        Command::Density { poly, x, trunc, bound, slack, verdicts } => {
            let f = parse_poly(s, poly)?;
            let x = s.positive("x", x)?;
            let trunc = s.positive("trunc", trunc)?;
            let bound = s.opt("bound", bound)?;
            let slack = s.get("slack", slack, DEFAULT_SLACK)?;
            let verdicts = s.silent::<PathBuf>("verdicts", verdicts)?;
            if ctx.format == Some(Format::Csv) {
                return Err(CliError::Validation("density writes JSON; use --verdicts for per-argument CSV".into()));
            }
            let opts = CensusOptions { sieve_bound: bound, seed: ctx.seed, ..Default::default() };
            let (report, list) = density_report(&f, trunc, x, &opts)?;
            let cmp = compare(&report, slack);
            if let Some(path) = verdicts {
                std::fs::write(path, verdict_csv(&list))?;
            }
            let summary = format!(
                "{}: C_f in [{:.6}, {:.6}], empirical {:.6} over {} values, deviation {:+.6}{}",
                f.id(),
                report.bracket.lo_f64(),
                report.bracket.hi_f64(),
                report.empirical,
                report.census.valid_count,
                cmp.deviation,
                if cmp.flagged { " (flagged)" } else { "" }
            );
            let body = envelope("density", s, json!({ "density": report, "comparison": cmp }))?;
            Ok(Output { body, summary })
        }
        Command::Census { poly, x, bound } => {
            let f = parse_poly(s, poly)?;
            let x = s.positive("x", x)?;
            let bound = s.opt("bound", bound)?;
            let opts = CensusOptions { sieve_bound: bound, seed: ctx.seed, ..Default::default() };
            let (summary, list) = census_with(&f, x, &opts)?;
            let line = format!(
                "{}: {} of {} nonzero values square-free ({:.6}), {} zero",
                f.id(),
                summary.squarefree_count,
                summary.valid_count,
                summary.empirical(),
                summary.zero_count
            );
            let body = match ctx.format_or(Format::Csv) {
                Format::Csv => verdict_csv(&list),
                Format::Json => envelope("census", s, &summary)?,
            };
            Ok(Output { body, summary: line })
        }
        Command::Quadratic { a, b, c, limit } => {
            let spec = QuadraticSpec::new(s.get("a", a, 1)?, s.require("b", b)?, s.require("c", c)?)?;
            let limit = s.positive("limit", limit)?;
            let report = quadratic_exceptions(spec, limit)?;
            let summary = format!(
                "Y^2{:+}Y{:+} up to {limit}: exceptions {}, threshold {}, above threshold {}",
                spec.b,
                spec.c_prime(),
                list(&report.exceptions),
                report.threshold,
                list(&report.above_threshold)
            );
            let body = match ctx.format_or(Format::Json) {
                Format::Csv => std::iter::once("p".to_string()).chain(report.exceptions.iter().map(u64::to_string)).map(|l| l + "\n").collect(),
                Format::Json => envelope("quadratic", s, json!({ "result": report, "threshold_holds": report.threshold_holds() }))?,
            };
            Ok(Output { body, summary })
        }
        Command::Rho { n, m } => {
            let n = s.require("n", n)?;
            let m = s.positive("m", m)?;
            let value = rho(n, m)?;
            let body = match ctx.format_or(Format::Csv) {
                Format::Csv => format!("{value}\n"),
                Format::Json => envelope("rho", s, json!({ "n": n, "m": m, "rho": value }))?,
            };
            Ok(Output { body, summary: format!("rho({n}, {m}) = {value}") })
        }
        Command::Abc { n, a, c1, c2, histogram } => abc(ctx, s, n, a, c1, c2, histogram),
        Command::Repro { name } => dispatch(name.expand(), ctx, s),
    }
}

fn verdict_csv(list: &[CensusVerdict]) -> String {
    let mut out = format!("{}\n", CensusVerdict::CSV_HEADER);
    for v in list {
        out.push_str(&v.csv_line());
        out.push('\n');
    }
    out
}

fn survey(
    ctx: &Context,
    s: &mut Settings,
    poly: Option<String>,
    limit: Option<u64>,
    chunk: Option<u64>,
    journal: Option<PathBuf>,
) -> Result<Output, CliError> {
    let f = parse_poly(s, poly)?;
    let limit = s.positive("limit", limit)?;
    let chunk_size = s.get("chunk", chunk, DEFAULT_CHUNK)?;
    if chunk_size == 0 {
        return Err(CliError::Validation("chunk must be positive".into()));
    }
    let journal = s.silent::<PathBuf>("journal", journal)?;
    let opts = SurveyOptions { chunk_size, journal };
    let spec = f.cyclotomic_index();
    let report = match spec {
        Some(spec) => survey_cyclotomic_with(spec, limit, &opts)?,
        None => survey_general_with(&f, limit, &opts)?,
    };
    let summary = format!(
        "{} up to {limit}: {} primes with roots, |S1| = {}, |S2| = {}, exceptions {}",
        report.poly_id,
        report.rows.len(),
        report.s1_count,
        report.s2_count,
        list(&report.exceptions)
    );
    let body = match ctx.format_or(Format::Csv) {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let bound = spec.map(|sp| s1_bound_check(&report, sp.ell()));
            envelope("survey", s, json!({ "survey": report, "s1_bound_holds": bound }))?
        }
    };
    Ok(Output { body, summary })
}

#[derive(Serialize)]
struct AbcRun<'a> {
    #[serde(flatten)]
    report: &'a AbcReport,
    lower_bound_holds: bool,
    moment_check: bool,
}

fn abc(
    ctx: &Context,
    s: &mut Settings,
    n: Option<u64>,
    a: Option<String>,
    c1: Option<f64>,
    c2: Option<f64>,
    histogram: Option<PathBuf>,
) -> Result<Output, CliError> {
    let n = s.get("n", n, 3)?;
    let a_list: String = s.require("a", a)?;
    let values = a_list
        .split(',')
        .map(|v| v.trim().parse::<u64>().map_err(|_| CliError::Validation(format!("bad value of A: `{v}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let defaults = MomentConstants::default();
    let constants = MomentConstants { c1: s.get("c1", c1, defaults.c1)?, c2: s.get("c2", c2, defaults.c2)? };
    let histogram = s.silent::<PathBuf>("histogram", histogram)?;
    let factorizer = Factorizer::new(ctx.seed);
    let reports = values.iter().map(|&a| abc_census_with(n, a, &factorizer)).collect::<Result<Vec<_>, _>>()?;
    let last = reports.last().ok_or_else(|| CliError::Validation("no value of A given".into()))?;
    if let Some(path) = histogram {
        std::fs::write(path, last.histogram_csv())?;
    }
    let runs: Vec<AbcRun> = reports
        .iter()
        .map(|r| AbcRun { report: r, lower_bound_holds: r.lower_bound_holds(), moment_check: sqfree_core::abc_moment_check(r, constants) })
        .collect();
    let summary = runs
        .iter()
        .map(|r| {
            format!(
                "A={}: M1={} M2={} sumR={} sumR2={} maxR={} bound {} moments {}",
                r.report.a, r.report.m1, r.report.m2, r.report.sum_r, r.report.sum_r2, r.report.max_r, r.lower_bound_holds, r.moment_check
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    let body = match ctx.format_or(Format::Json) {
        Format::Csv => last.histogram_csv(),
        Format::Json => envelope("abc", s, &runs)?,
    };
    Ok(Output { body, summary: format!("n={n}: {summary}") })
}
