use std::sync::OnceLock;

use crate::error::{Error, Result};

use super::arith::isqrt_u128;

/// Default number of integers covered by one sieve segment.
pub const DEFAULT_SEGMENT: u64 = 1 << 18;

/// All primes `<= limit`, by a plain sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes up to `10^5`, computed once. Used for trial division.
pub fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(100_000))
}

/// A closed interval `[lo, hi]` of integers whose primes are to be enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeRange {
    lo: u64,
    hi: u64,
}

impl PrimeRange {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo < 2 {
            return Err(Error::invalid(format!("prime range must start at >= 2, got {lo}")));
        }
        if hi < lo {
            return Err(Error::invalid(format!("empty prime range [{lo}, {hi}]")));
        }
        Ok(PrimeRange { lo, hi })
    }

    /// `[2, hi]`, empty iterator when `hi < 2`.
    pub fn up_to(hi: u64) -> Self {
        PrimeRange { lo: 2, hi: hi.max(1) }
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn iter(&self) -> SegmentedPrimes {
        self.iter_with_segment(DEFAULT_SEGMENT)
    }

    pub fn iter_with_segment(&self, segment: u64) -> SegmentedPrimes {
        SegmentedPrimes::new(self.lo, self.hi, segment)
    }

    /// Restart enumeration strictly after `checkpoint` (typically the last
    /// prime a previous run emitted).
    pub fn resume_after(&self, checkpoint: u64) -> SegmentedPrimes {
        let start = checkpoint.saturating_add(1).max(self.lo);
        SegmentedPrimes::new(start, self.hi, DEFAULT_SEGMENT)
    }
}

impl IntoIterator for PrimeRange {
    type Item = u64;
    type IntoIter = SegmentedPrimes;

    fn into_iter(self) -> SegmentedPrimes {
        self.iter()
    }
}

/// Segmented sieve of Eratosthenes over `[lo, hi]`.
#[derive(Debug)]
pub struct SegmentedPrimes {
    next_start: u64,
    hi: u64,
    segment: u64,
    base: Vec<u64>,
    buffer: Vec<u64>,
    pos: usize,
    done: bool,
}

impl SegmentedPrimes {
    fn new(lo: u64, hi: u64, segment: u64) -> Self {
        let segment = segment.max(64);
        let lo = lo.max(2);
        let base = if lo > hi { Vec::new() } else { primes_up_to(isqrt_u128(hi as u128) as u64) };
        SegmentedPrimes {
            next_start: lo,
            hi,
            segment,
            base,
            buffer: Vec::new(),
            pos: 0,
            done: lo > hi,
        }
    }

    fn fill(&mut self) {
        while !self.done && self.pos >= self.buffer.len() {
            let start = self.next_start;
            let end = start.saturating_add(self.segment - 1).min(self.hi);
            let len = (end - start + 1) as usize;
            let mut composite = vec![false; len];
            for &p in &self.base {
                let sq = p * p;
                if sq > end {
                    break;
                }
                let first = if sq >= start { sq } else { start.div_ceil(p) * p };
                let mut m = first;
                while m <= end {
                    composite[(m - start) as usize] = true;
                    m += p;
                }
            }
            self.buffer.clear();
            self.pos = 0;
            self.buffer.extend(
                composite.iter().enumerate().filter(|(_, &c)| !c).map(|(i, _)| start + i as u64),
            );
            if end == self.hi {
                self.done = true;
            } else {
                self.next_start = end + 1;
            }
        }
    }
}

impl Iterator for SegmentedPrimes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.pos >= self.buffer.len() {
            self.fill();
        }
        let p = *self.buffer.get(self.pos)?;
        self.pos += 1;
        Some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_ranges() {
        let v: Vec<u64> = PrimeRange::new(2, 10).unwrap().iter().collect();
        assert_eq!(v, vec![2, 3, 5, 7]);
        let v: Vec<u64> = PrimeRange::new(11, 11).unwrap().iter().collect();
        assert_eq!(v, vec![11]);
        assert!(PrimeRange::new(1, 10).is_err());
        assert!(PrimeRange::new(10, 9).is_err());
        assert_eq!(PrimeRange::up_to(1).iter().count(), 0);
    }

    #[test]
    fn segments_agree_with_trial_division() {
        for seg in [64, 100, 1000] {
            let got: Vec<u64> = PrimeRange::new(900, 5000).unwrap().iter_with_segment(seg).collect();
            let want: Vec<u64> = (900..=5000).filter(|&n| naive_is_prime(n)).collect();
            assert_eq!(got, want, "segment {seg}");
        }
    }

    #[test]
    fn resume_continues_after_checkpoint() {
        let r = PrimeRange::new(2, 100).unwrap();
        let tail: Vec<u64> = r.resume_after(89).collect();
        assert_eq!(tail, vec![97]);
        let from_composite: Vec<u64> = r.resume_after(90).collect();
        assert_eq!(from_composite, vec![97]);
    }
}
