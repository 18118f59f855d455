//! Segmented sieving of μ(n) and λ(n) over arbitrary intervals.
//!
//! A window `[lo, hi)` is sieved with the primes up to `√(hi − 1)`. Each slot
//! keeps the product of the small prime factors found so far together with a
//! running sign; after all small primes are applied, a slot whose product is
//! short of `n` carries exactly one more prime factor above `√(hi − 1)`.
//! μ uses the multiples of `p` and `p²`; λ uses every prime power `p^k < hi`
//! so that the sign tracks the parity of Ω(n).

mod block;
pub mod cache;
mod factor;
pub(crate) mod summatory;

use rayon::prelude::*;

pub use block::{ArithFunction, MobiusBlock};
pub use cache::BlockCache;
pub use factor::{liouville_at, mobius_at, mobius_table, prime_factors, primes_up_to};
pub use summatory::{mertens, summatory_ladder, SummatoryPoint};

use crate::error::{Error, Result};
use crate::numeric::isqrt;

/// Default block length, 2^20 values.
pub const DEFAULT_BLOCK_LEN: u64 = 1 << 20;

/// Sieves μ over `[start, start + len)`.
pub fn sieve_block(start: u64, len: u64) -> Result<MobiusBlock> {
    sieve_window(ArithFunction::Mobius, start, len)
}

/// Sieves μ or λ over `[start, start + len)`.
pub fn sieve_window(function: ArithFunction, start: u64, len: u64) -> Result<MobiusBlock> {
    let end = checked_end(start, len)?;
    let primes = primes_up_to(isqrt(end - 1));
    let values = sieve_values(function, start, len as usize, &primes);
    Ok(MobiusBlock::from_values(function, start, &values))
}

pub(crate) fn checked_end(start: u64, len: u64) -> Result<u64> {
    if start == 0 {
        return Err(Error::Domain("sieve start must be ≥ 1".into()));
    }
    if len == 0 {
        return Err(Error::argument("sieve length must be ≥ 1"));
    }
    start
        .checked_add(len)
        .ok_or_else(|| Error::Range(format!("{start} + {len} overflows 64 bits")))
}

/// Core segment routine. `primes` must contain every prime `≤ √(start + len − 1)`;
/// extra larger primes are ignored.
pub(crate) fn sieve_values(
    function: ArithFunction,
    start: u64,
    len: usize,
    primes: &[u64],
) -> Vec<i8> {
    let hi = start + len as u64;
    let mut prod = vec![1u64; len];
    let mut sign = vec![1i8; len];
    for &p in primes {
        let p_sq = match p.checked_mul(p) {
            Some(sq) if sq < hi => sq,
            _ => break,
        };
        match function {
            ArithFunction::Mobius => {
                let mut i = first_multiple_offset(start, p);
                while i < len {
                    prod[i] *= p;
                    sign[i] = -sign[i];
                    i += p as usize;
                }
                let mut i = first_multiple_offset(start, p_sq);
                while i < len {
                    sign[i] = 0;
                    i += p_sq as usize;
                }
            }
            ArithFunction::Liouville => {
                let mut pk = p;
                loop {
                    let mut i = first_multiple_offset(start, pk);
                    while i < len {
                        prod[i] *= p;
                        sign[i] = -sign[i];
                        i += pk as usize;
                    }
                    match pk.checked_mul(p) {
                        Some(next) if next < hi => pk = next,
                        _ => break,
                    }
                }
            }
        }
    }
    for (i, s) in sign.iter_mut().enumerate() {
        if *s != 0 && prod[i] != start + i as u64 {
            *s = -*s;
        }
    }
    sign
}

#[inline]
fn first_multiple_offset(start: u64, m: u64) -> usize {
    let r = start % m;
    (if r == 0 { 0 } else { m - r }) as usize
}

/// Blocking and caching configuration shared by the streaming computations.
#[derive(Debug, Clone)]
pub struct Sieve {
    block_len: u64,
    cache: Option<BlockCache>,
}

impl Default for Sieve {
    fn default() -> Self {
        Self {
            block_len: DEFAULT_BLOCK_LEN,
            cache: None,
        }
    }
}

impl Sieve {
    pub fn new(block_len: u64) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::argument("block length must be ≥ 1"));
        }
        Ok(Self {
            block_len,
            cache: None,
        })
    }

    /// Reads μ blocks from `cache` whenever a requested window is covered by
    /// cached aligned blocks.
    pub fn with_cache(mut self, cache: BlockCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn block_len(&self) -> u64 {
        self.block_len
    }

    pub fn cache(&self) -> Option<&BlockCache> {
        self.cache.as_ref()
    }

    /// Aligned block starts `1 + k·block_len` covering `[first, last]`.
    pub fn aligned_blocks(&self, first: u64, last: u64) -> Vec<(u64, u64)> {
        if first == 0 || last < first {
            return Vec::new();
        }
        let b = self.block_len;
        let k0 = (first - 1) / b;
        let k1 = (last - 1) / b;
        (k0..=k1)
            .map(|k| (1 + k * b, b))
            .filter(|&(s, l)| s.checked_add(l).is_some())
            .collect()
    }

    /// Values of `function` over `[start, start + len)` as plain signs, served
    /// from the cache when every overlapping aligned block is present.
    pub(crate) fn window_values(
        &self,
        function: ArithFunction,
        start: u64,
        len: u64,
        primes: &[u64],
    ) -> Result<Vec<i8>> {
        let end = checked_end(start, len)?;
        if function == ArithFunction::Mobius {
            if let Some(values) = self.cached_window(start, end)? {
                return Ok(values);
            }
        }
        Ok(sieve_values(function, start, len as usize, primes))
    }

    fn cached_window(&self, start: u64, end: u64) -> Result<Option<Vec<i8>>> {
        let Some(cache) = &self.cache else {
            return Ok(None);
        };
        let mut out = Vec::with_capacity((end - start) as usize);
        for (bs, bl) in self.aligned_blocks(start, end - 1) {
            let Some(block) = cache.load(bs, bl)? else {
                return Ok(None);
            };
            let lo = start.max(bs);
            let hi = end.min(bs + bl);
            out.extend((lo..hi).map(|n| block.get(n - bs)));
        }
        Ok(Some(out))
    }

    /// Sieves the aligned μ blocks covering `[first, last]` in parallel on the
    /// ambient rayon pool; output is in ascending block order.
    pub fn sieve_aligned(&self, first: u64, last: u64) -> Result<Vec<MobiusBlock>> {
        let ranges = self.aligned_blocks(first, last);
        let Some(&(s, l)) = ranges.last() else {
            return Ok(Vec::new());
        };
        let primes = primes_up_to(isqrt(checked_end(s, l)? - 1));
        Ok(ranges
            .par_iter()
            .map(|&(s, l)| {
                let values = sieve_values(ArithFunction::Mobius, s, l as usize, &primes);
                MobiusBlock::from_values(ArithFunction::Mobius, s, &values)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_ten() {
        let block = sieve_block(1, 10).unwrap();
        assert_eq!(block.to_values(), vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }

    #[test]
    fn single_values() {
        assert_eq!(sieve_block(1, 1).unwrap().to_values(), vec![1]);
        assert_eq!(sieve_block(4, 1).unwrap().to_values(), vec![0]);
    }

    #[test]
    fn range_errors() {
        assert!(matches!(sieve_block(u64::MAX, 1), Err(Error::Range(_))));
        assert!(matches!(sieve_block(0, 1), Err(Error::Domain(_))));
        assert!(matches!(sieve_block(1, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn high_window_matches_trial_division() {
        let start = 1_000_000_000_000u64;
        let block = sieve_block(start, 2000).unwrap();
        for (i, v) in block.iter().enumerate() {
            assert_eq!(v, mobius_at(start + i as u64).unwrap());
        }
        let lam = sieve_window(ArithFunction::Liouville, start, 2000).unwrap();
        for (i, v) in lam.iter().enumerate() {
            assert_eq!(v, liouville_at(start + i as u64).unwrap());
        }
    }

    #[test]
    fn liouville_small() {
        let lam = sieve_window(ArithFunction::Liouville, 1, 12).unwrap();
        let expect: Vec<i8> = (1..=12).map(|n| liouville_at(n).unwrap()).collect();
        assert_eq!(lam.to_values(), expect);
    }

    #[test]
    fn aligned_block_arithmetic() {
        let sieve = Sieve::default();
        assert_eq!(sieve.aligned_blocks(1, 1_000_000).len(), 1);
        assert_eq!(sieve.aligned_blocks(1, 1 << 21).len(), 2);
        assert_eq!(sieve.aligned_blocks(1, (1 << 21) + 1).len(), 3);
    }
}
