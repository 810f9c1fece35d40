//! Prime surveys: for each prime `p <= T` at which `f` has a root, record
//! `R_f(p)`, `R_f(p²)` and whether `R_f(p²) <= p` (an exception).
//!
//! The range `[2, T]` is cut into fixed-size chunks that are processed in
//! parallel on the ambient rayon pool and merged by chunk index, so output is
//! independent of the worker count. An optional journal records finished
//! chunks so an interrupted survey can resume.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{mod_pow, PrimeRange};
use crate::polynomial::{CyclotomicSpec, IntPoly};
use crate::rinv::RValue;
use crate::roots::{cyclotomic_roots, eval_mod, lift_roots, roots_mod_p, RootSet};

pub const DEFAULT_CHUNK: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SurveyRow {
    pub p: u64,
    pub r1: RValue,
    pub r2: RValue,
    pub exception: bool,
}

impl SurveyRow {
    fn from_roots(p: u64, mod_p: &RootSet, mod_p2: &RootSet) -> Self {
        let r1 = mod_p.least_positive().map_or(RValue::Infinite, RValue::Finite);
        let r2 = mod_p2.least_positive().map_or(RValue::Infinite, RValue::Finite);
        SurveyRow { p, r1, r2, exception: r2.at_most(p) }
    }

    pub fn csv_line(&self) -> String {
        format!("{},{},{},{}", self.p, self.r1, self.r2, u8::from(self.exception))
    }

    fn parse_csv(line: &str) -> Option<Self> {
        let mut it = line.split(',');
        let p = it.next()?.parse().ok()?;
        let r1 = it.next()?.parse().ok()?;
        let r2 = it.next()?.parse().ok()?;
        let exception = match it.next()? {
            "0" => false,
            "1" => true,
            _ => return None,
        };
        Some(SurveyRow { p, r1, r2, exception })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurveyReport {
    pub poly_id: String,
    pub limit: u64,
    pub rows: Vec<SurveyRow>,
    /// `|S¹(f, T)|`
    pub s1_count: usize,
    /// `|S²(f, T)|`
    pub s2_count: usize,
    pub exceptions: Vec<u64>,
}

impl SurveyReport {
    fn from_rows(poly_id: String, limit: u64, rows: Vec<SurveyRow>) -> Self {
        let s1_count = rows.iter().filter(|r| r.r1.at_most(limit)).count();
        let s2_count = rows.iter().filter(|r| r.r2.at_most(limit)).count();
        let exceptions = rows.iter().filter(|r| r.exception).map(|r| r.p).collect();
        SurveyReport { poly_id, limit, rows, s1_count, s2_count, exceptions }
    }

    pub const CSV_HEADER: &'static str = "p,r1,r2,exception";

    /// `p,r1,r2,exception` with a header, LF endings, rows sorted by `p`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for row in &self.rows {
            writeln!(out, "{}", row.csv_line())?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

#[derive(Clone, Debug)]
pub struct SurveyOptions {
    pub chunk_size: u64,
    pub journal: Option<PathBuf>,
}

impl Default for SurveyOptions {
    fn default() -> Self {
        SurveyOptions { chunk_size: DEFAULT_CHUNK, journal: None }
    }
}

enum Target<'a> {
    Cyclotomic(CyclotomicSpec),
    General(&'a IntPoly),
}

impl Target<'_> {
    fn id(&self) -> String {
        match self {
            Target::Cyclotomic(s) => format!("cyclotomic:{}", s.ell()),
            Target::General(f) => f.id(),
        }
    }

    fn row(&self, p: u64) -> Option<SurveyRow> {
        match self {
            Target::Cyclotomic(spec) => {
                let ell = spec.ell();
                if p != ell && p % ell != 1 {
                    return None;
                }
                let r1 = cyclotomic_roots(*spec, p, 1);
                let r2 = cyclotomic_roots(*spec, p, 2);
                Some(SurveyRow::from_roots(p, &r1, &r2))
            }
            Target::General(f) => {
                let r1 = roots_mod_p(f, p);
                if r1.is_empty() {
                    return None;
                }
                let r2 = lift_roots(f, p, 2, &r1);
                Some(SurveyRow::from_roots(p, &r1, &r2))
            }
        }
    }
}

/// Survey `Φ_ℓ` over primes `p <= limit` with `p ≡ 1 (mod ℓ)` or `p = ℓ`.
pub fn survey_cyclotomic(spec: CyclotomicSpec, limit: u64) -> Result<SurveyReport> {
    survey_cyclotomic_with(spec, limit, &SurveyOptions::default())
}

pub fn survey_cyclotomic_with(spec: CyclotomicSpec, limit: u64, opts: &SurveyOptions) -> Result<SurveyReport> {
    run(Target::Cyclotomic(spec), limit, opts)
}

/// Survey a general polynomial over the primes `p <= limit` at which it has a root.
pub fn survey_general(f: &IntPoly, limit: u64) -> Result<SurveyReport> {
    survey_general_with(f, limit, &SurveyOptions::default())
}

pub fn survey_general_with(f: &IntPoly, limit: u64, opts: &SurveyOptions) -> Result<SurveyReport> {
    check_hypotheses(f)?;
    run(Target::General(f), limit, opts)
}

/// Separable with square-free content.
pub(crate) fn check_hypotheses(f: &IntPoly) -> Result<()> {
    if !f.is_separable() {
        return Err(Error::NotSeparable);
    }
    let content = f.content_gcd();
    let fac = crate::numtheory::factorize(&content);
    if !fac.is_squarefree() {
        return Err(Error::SquareContent(content));
    }
    Ok(())
}

fn run(target: Target<'_>, limit: u64, opts: &SurveyOptions) -> Result<SurveyReport> {
    if limit < 2 {
        return Err(Error::invalid(format!("survey limit must be >= 2, got {limit}")));
    }
    if opts.chunk_size == 0 {
        return Err(Error::invalid("chunk size must be positive"));
    }
    let id = target.id();
    let chunks = limit / opts.chunk_size + 1;
    let mut journal = match &opts.journal {
        Some(path) => Some(Journal::open(path, &id, limit, opts.chunk_size)?),
        None => None,
    };
    let mut done: BTreeMap<u64, Vec<SurveyRow>> = journal.as_mut().map(|j| j.take_completed()).unwrap_or_default();
    let journal = journal.map(Mutex::new);

    let todo: Vec<u64> = (0..chunks).filter(|c| !done.contains_key(c)).collect();
    let fresh: Vec<(u64, Vec<SurveyRow>)> = todo
        .into_par_iter()
        .map(|c| {
            let lo = (c * opts.chunk_size).max(2);
            let hi = ((c + 1) * opts.chunk_size - 1).min(limit);
            let rows: Vec<SurveyRow> = if lo > hi {
                Vec::new()
            } else {
                PrimeRange::new(lo, hi)
                    .expect("non-empty chunk")
                    .iter()
                    .filter_map(|p| target.row(p))
                    .collect()
            };
            if let Some(j) = &journal {
                j.lock().expect("journal lock").record(c, &rows)?;
            }
            Ok((c, rows))
        })
        .collect::<Result<_>>()?;
    done.extend(fresh);

    let rows = done.into_values().flatten().collect();
    Ok(SurveyReport::from_rows(id, limit, rows))
}

/// `|S¹(ℓ, T)| <= 2ℓT`.
pub fn s1_bound_check(report: &SurveyReport, ell: u64) -> bool {
    (report.s1_count as u128) <= 2 * ell as u128 * report.limit as u128
}

/// True iff no `x < p` has `p² | Φ_ℓ(x)`.
pub fn diophantine_check(spec: CyclotomicSpec, p: u64) -> bool {
    let m = p * p;
    let ones = vec![1u64; spec.ell() as usize];
    (0..p).all(|x| eval_mod(&ones, x, m) != 0)
}

/// Chunk journal: `<path>` holds one `chunk_index,first_prime,last_prime,row_count`
/// line per finished chunk after a `#` key line; `<path>.rows` holds the rows.
struct Journal {
    log: File,
    rows: File,
    completed: BTreeMap<u64, Vec<SurveyRow>>,
}

impl Journal {
    fn key_line(id: &str, limit: u64, chunk: u64) -> String {
        format!("# poly={id} limit={limit} chunk={chunk}")
    }

    fn rows_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".rows");
        PathBuf::from(s)
    }

    fn open(path: &Path, id: &str, limit: u64, chunk: u64) -> Result<Self> {
        let key = Self::key_line(id, limit, chunk);
        let rows_path = Self::rows_path(path);
        let mut completed = BTreeMap::new();
        if path.exists() {
            let mut lines = BufReader::new(File::open(path)?).lines();
            match lines.next().transpose()? {
                Some(first) if first == key => {}
                Some(first) => {
                    return Err(Error::Journal(format!("{} belongs to `{first}`, not `{key}`", path.display())))
                }
                None => {}
            }
            let mut counts = BTreeMap::new();
            for line in lines {
                let line = line?;
                let fields: Vec<&str> = line.split(',').collect();
                let parsed = (fields.len() == 4)
                    .then(|| Some((fields[0].parse::<u64>().ok()?, fields[3].parse::<usize>().ok()?)))
                    .flatten();
                let (c, n) = parsed.ok_or_else(|| Error::Journal(format!("bad journal line `{line}`")))?;
                counts.insert(c, n);
            }
            let mut rows: BTreeMap<u64, Vec<SurveyRow>> = BTreeMap::new();
            if rows_path.exists() {
                for line in BufReader::new(File::open(&rows_path)?).lines() {
                    let line = line?;
                    let (c, rest) = line
                        .split_once(',')
                        .and_then(|(c, r)| Some((c.parse::<u64>().ok()?, SurveyRow::parse_csv(r)?)))
                        .ok_or_else(|| Error::Journal(format!("bad row line `{line}`")))?;
                    rows.entry(c).or_default().push(rest);
                }
            }
            for (c, n) in counts {
                let r = rows.remove(&c).unwrap_or_default();
                if r.len() != n {
                    return Err(Error::Journal(format!("chunk {c}: journal says {n} rows, found {}", r.len())));
                }
                completed.insert(c, r);
            }
        }
        // compact the row store down to chunks the log vouches for
        let mut store = File::create(&rows_path)?;
        for (c, rows) in &completed {
            for r in rows {
                writeln!(store, "{c},{}", r.csv_line())?;
            }
        }
        drop(store);
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let mut log = OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            writeln!(log, "{key}")?;
        }
        let rows = OpenOptions::new().create(true).append(true).open(&rows_path)?;
        Ok(Journal { log, rows, completed })
    }

    fn take_completed(&mut self) -> BTreeMap<u64, Vec<SurveyRow>> {
        std::mem::take(&mut self.completed)
    }

    fn record(&mut self, chunk: u64, rows: &[SurveyRow]) -> Result<()> {
        let mut buf = String::new();
        for r in rows {
            buf.push_str(&format!("{chunk},{}\n", r.csv_line()));
        }
        self.rows.write_all(buf.as_bytes())?;
        self.rows.flush()?;
        let first = rows.first().map_or(0, |r| r.p);
        let last = rows.last().map_or(0, |r| r.p);
        writeln!(self.log, "{chunk},{first},{last},{}", rows.len())?;
        self.log.flush()?;
        Ok(())
    }
}

/// Primes `p` with an element of order `ℓ` mod `p`; used to double-check the
/// prime filter of cyclotomic surveys.
pub fn has_order_ell_element(ell: u64, p: u64) -> bool {
    (p - 1).is_multiple_of(ell) && (2..p).any(|g| mod_pow(g, (p - 1) / ell, p) != 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(ell: u64) -> CyclotomicSpec {
        CyclotomicSpec::new(ell).unwrap()
    }

    #[test]
    fn small_cyclotomic_survey() {
        let rep = survey_cyclotomic(spec(5), 200).unwrap();
        let ps: Vec<u64> = rep.rows.iter().map(|r| r.p).collect();
        assert_eq!(ps, vec![5, 11, 31, 41, 61, 71, 101, 131, 151, 181, 191]);
        assert_eq!(rep.exceptions, vec![11, 131]);
        let five = rep.rows[0];
        assert_eq!((five.r1, five.r2, five.exception), (RValue::Finite(1), RValue::Infinite, false));
        assert_eq!(rep.s1_count, rep.rows.len());
        assert!(s1_bound_check(&rep, 5));
    }

    #[test]
    fn csv_format() {
        let rep = survey_cyclotomic(spec(5), 12).unwrap();
        assert_eq!(rep.to_csv(), "p,r1,r2,exception\n5,1,inf,0\n11,3,3,1\n");
    }

    #[test]
    fn chunking_does_not_change_rows() {
        let a = survey_cyclotomic(spec(7), 5000).unwrap();
        let b = survey_cyclotomic_with(spec(7), 5000, &SurveyOptions { chunk_size: 333, journal: None }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn general_path_matches_cyclotomic_path() {
        // same coefficients, but routed through the general root finder
        let rows_general: Vec<SurveyRow> = PrimeRange::new(2, 1000)
            .unwrap()
            .iter()
            .filter_map(|p| {
                let f = spec(5).polynomial();
                let r1 = crate::roots::roots_mod_scan(&f, p);
                if r1.is_empty() {
                    return None;
                }
                let r2 = lift_roots(&f, p, 2, &r1);
                Some(SurveyRow::from_roots(p, &r1, &r2))
            })
            .collect();
        assert_eq!(survey_cyclotomic(spec(5), 1000).unwrap().rows, rows_general);
        assert_eq!(survey_general(&spec(5).polynomial(), 1000).unwrap().rows, rows_general);
    }

    #[test]
    fn general_survey_rejects_hypothesis_failures() {
        assert!(matches!(survey_general(&IntPoly::from_i64s(&[1, -2, 1]), 100), Err(Error::NotSeparable)));
        assert!(matches!(survey_general(&IntPoly::from_i64s(&[4, 0, 4]), 100), Err(Error::SquareContent(_))));
    }

    #[test]
    fn quartic_root_counts() {
        let f = IntPoly::from_i64s(&[2, 0, 0, 0, 1]);
        let rep = survey_general(&f, 10_000).unwrap();
        for row in &rep.rows {
            assert!(crate::roots::delta(&f, row.p, 1) <= 4);
        }
        assert!(!rep.rows.is_empty());
    }

    #[test]
    fn diophantine_examples() {
        assert!(!diophantine_check(spec(5), 11));
        assert!(diophantine_check(spec(5), 31));
        assert!(diophantine_check(spec(7), 29));
    }

    #[test]
    fn exception_iff_diophantine_solution() {
        let rep = survey_cyclotomic(spec(5), 10_000).unwrap();
        for row in rep.rows.iter().filter(|r| r.p != 5) {
            assert!(row.exception ^ diophantine_check(spec(5), row.p), "p = {}", row.p);
        }
    }

    #[test]
    fn prime_filter_is_exactly_the_split_primes() {
        let rep = survey_cyclotomic(spec(5), 10_000).unwrap();
        let expected: Vec<u64> = PrimeRange::new(2, 10_000)
            .unwrap()
            .iter()
            .filter(|&p| p == 5 || has_order_ell_element(5, p))
            .collect();
        let got: Vec<u64> = rep.rows.iter().filter(|r| r.r1.is_finite()).map(|r| r.p).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn journal_resume_reproduces_fresh_run() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("survey.journal");
        let opts = SurveyOptions { chunk_size: 1000, journal: Some(path.clone()) };
        let fresh = survey_cyclotomic_with(spec(5), 10_000, &opts).unwrap();
        let log = std::fs::read_to_string(&path).unwrap();
        assert_eq!(log.lines().count(), 1 + 11);
        assert!(log.lines().any(|l| l == "0,5,991,41"), "{log}");

        // drop the last few chunks as if the run had been interrupted
        let kept: Vec<&str> = log.lines().take(6).collect();
        std::fs::write(&path, kept.join("\n") + "\n").unwrap();
        let resumed = survey_cyclotomic_with(spec(5), 10_000, &opts).unwrap();
        assert_eq!(fresh, resumed);

        let other = SurveyOptions { chunk_size: 1000, journal: Some(path) };
        assert!(matches!(survey_cyclotomic_with(spec(7), 10_000, &other), Err(Error::Journal(_))));
    }
}
