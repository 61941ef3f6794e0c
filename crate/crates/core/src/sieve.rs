//! Segmented sieve of Eratosthenes over odd numbers.

use rayon::prelude::*;

use crate::arith::{isqrt, MAX_MODULUS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    /// Odd candidates per segment; a segment spans twice this many integers.
    pub segment_bits: u64,
    /// Largest `hi − lo` accepted by a single request.
    pub max_span: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_bits: 1 << 20,
            max_span: 1 << 36,
        }
    }
}

/// Primes up to `n` with a plain sieve.
pub fn small_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes in `[lo, hi]` given every odd prime up to `√hi` in `base`.
pub fn primes_in_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let lo = lo.max(2);
    if hi < lo {
        return Vec::new();
    }
    let mut out = Vec::new();
    if lo <= 2 {
        out.push(2);
    }
    let start = if lo.is_multiple_of(2) { lo + 1 } else { lo.max(3) };
    if start > hi {
        return out;
    }
    let len = ((hi - start) / 2 + 1) as usize;
    let mut words = vec![0u64; len.div_ceil(64)];
    for &q in base.iter().filter(|&&q| q > 2) {
        if q * q > hi {
            break;
        }
        let mut m = (q * q).max(start.div_ceil(q) * q);
        if m % 2 == 0 {
            m += q;
        }
        let mut idx = ((m - start) / 2) as usize;
        while idx < len {
            words[idx / 64] |= 1 << (idx % 64);
            idx += q as usize;
        }
    }
    for (w, &word) in words.iter().enumerate() {
        let mut free = !word;
        while free != 0 {
            let bit = free.trailing_zeros() as usize;
            let idx = w * 64 + bit;
            if idx >= len {
                break;
            }
            out.push(start + 2 * idx as u64);
            free &= free - 1;
        }
    }
    out
}

impl SieveConfig {
    fn check(&self, lo: u64, hi: u64) -> Result<()> {
        if hi > MAX_MODULUS {
            return Err(Error::InvalidInput(format!("{hi} exceeds 2^62")));
        }
        if hi.saturating_sub(lo) > self.max_span {
            return Err(Error::RangeTooLarge {
                lo,
                hi,
                budget: self.max_span,
            });
        }
        Ok(())
    }

    /// Consecutive closed segments covering `[max(lo, 2), hi]`.
    pub fn segments(&self, lo: u64, hi: u64) -> Result<Vec<(u64, u64)>> {
        self.check(lo, hi)?;
        let span = 2 * self.segment_bits.max(64);
        let mut out = Vec::new();
        let mut s = lo.max(2);
        while s <= hi {
            let e = s.saturating_add(span - 1).min(hi);
            out.push((s, e));
            if e == hi {
                break;
            }
            s = e + 1;
        }
        Ok(out)
    }

    /// Ascending stream of the primes in `[lo, hi]`.
    pub fn primes_in_range(&self, lo: u64, hi: u64) -> Result<Primes> {
        let segments = self.segments(lo, hi)?;
        Ok(Primes {
            base: small_primes(isqrt(hi)),
            segments: segments.into_iter(),
            buffer: Vec::new().into_iter(),
        })
    }

    /// Applies `f` to the primes of each segment in parallel and returns the
    /// results in segment order.
    pub fn par_map_segments<T, F>(&self, lo: u64, hi: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&[u64]) -> T + Sync,
    {
        let segments = self.segments(lo, hi)?;
        let base = small_primes(isqrt(hi));
        Ok(segments
            .into_par_iter()
            .map(|(s, e)| f(&primes_in_segment(s, e, &base)))
            .collect())
    }
}

/// Streaming iterator returned by [`SieveConfig::primes_in_range`].
pub struct Primes {
    base: Vec<u64>,
    segments: std::vec::IntoIter<(u64, u64)>,
    buffer: std::vec::IntoIter<u64>,
}

impl Iterator for Primes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if let Some(p) = self.buffer.next() {
                return Some(p);
            }
            let (s, e) = self.segments.next()?;
            self.buffer = primes_in_segment(s, e, &self.base).into_iter();
        }
    }
}

/// Primes in `[lo, hi]` with the default configuration.
pub fn primes_in_range(lo: u64, hi: u64) -> Result<Primes> {
    SieveConfig::default().primes_in_range(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;
    use proptest::prelude::*;

    /// Independent oracle: a byte-per-integer sieve.
    fn bitset_sieve(n: usize) -> Vec<u64> {
        let mut is = vec![true; n + 1];
        is[0] = false;
        if n >= 1 {
            is[1] = false;
        }
        let mut i = 2;
        while i * i <= n {
            if is[i] {
                for j in (i * i..=n).step_by(i) {
                    is[j] = false;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&i| is[i]).map(|i| i as u64).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(primes_in_range(2, 10).unwrap().collect::<Vec<_>>(), vec![2, 3, 5, 7]);
        assert_eq!(primes_in_range(90, 100).unwrap().collect::<Vec<_>>(), vec![97]);
        assert_eq!(primes_in_range(2, 1_000_000).unwrap().count(), 78_498);
    }

    #[test]
    fn matches_plain_sieve_with_small_segments() {
        let cfg = SieveConfig {
            segment_bits: 64,
            ..SieveConfig::default()
        };
        let got: Vec<u64> = cfg.primes_in_range(2, 200_000).unwrap().collect();
        assert_eq!(got, bitset_sieve(200_000));
        let n: usize = cfg
            .par_map_segments(2, 200_000, |ps| ps.len())
            .unwrap()
            .into_iter()
            .sum();
        assert_eq!(n, got.len());
    }

    #[test]
    fn empty_and_degenerate_ranges() {
        assert_eq!(primes_in_range(24, 28).unwrap().count(), 0);
        assert_eq!(primes_in_range(10, 5).unwrap().count(), 0);
        assert_eq!(primes_in_range(0, 2).unwrap().collect::<Vec<_>>(), vec![2]);
        assert_eq!(primes_in_range(3, 3).unwrap().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn budget_is_enforced() {
        let cfg = SieveConfig {
            max_span: 1000,
            ..SieveConfig::default()
        };
        assert!(matches!(cfg.primes_in_range(2, 5000), Err(Error::RangeTooLarge { .. })));
    }

    #[test]
    fn high_window() {
        let lo = 1_000_000_000_000u64;
        let got: Vec<u64> = primes_in_range(lo, lo + 2000).unwrap().collect();
        let want: Vec<u64> = (lo..=lo + 2000).filter(|&n| is_prime(n)).collect();
        assert_eq!(got, want);
    }

    proptest! {
        #[test]
        fn arbitrary_windows_match_miller_rabin(lo in 0u64..5_000_000, width in 0u64..3000) {
            let got: Vec<u64> = primes_in_range(lo, lo + width).unwrap().collect();
            let want: Vec<u64> = (lo..=lo + width).filter(|&n| is_prime(n)).collect();
            prop_assert_eq!(got, want);
        }
    }
}
