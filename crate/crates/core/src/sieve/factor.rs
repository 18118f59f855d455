//! Trial-division reference implementations and the small-prime table used by
//! the segmented sieve.

use crate::error::{Error, Result};

/// Returns μ(n) by trial factorization. This is the oracle every sieved block
/// is checked against.
pub fn mobius_at(n: u64) -> Result<i8> {
    if n == 0 {
        return Err(Error::Domain("μ(0) is undefined".into()));
    }
    let mut m = n;
    let mut sign = 1i8;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return Ok(0);
            }
            sign = -sign;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        sign = -sign;
    }
    Ok(sign)
}

/// Returns λ(n) = (−1)^Ω(n) by trial factorization.
pub fn liouville_at(n: u64) -> Result<i8> {
    if n == 0 {
        return Err(Error::Domain("λ(0) is undefined".into()));
    }
    let omega = prime_factors(n).iter().map(|&(_, e)| e).sum::<u32>();
    Ok(if omega % 2 == 0 { 1 } else { -1 })
}

/// Prime factorization as `(prime, exponent)` pairs in ascending order.
pub fn prime_factors(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// All primes `≤ limit`, by an odd-only sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    // index i stands for 2i + 1
    let half = limit / 2 + 1;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = vec![2u64];
    primes.extend(
        (1..half)
            .filter(|&i| !composite[i] && 2 * i < limit)
            .map(|i| (2 * i + 1) as u64),
    );
    primes
}

/// μ(1..=n) as a dense table (index 0 unused, set to 0) via a linear sieve.
pub fn mobius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![0i8; n + 1];
    if n == 0 {
        return mu;
    }
    mu[1] = 1;
    let mut is_composite = vec![false; n + 1];
    let mut primes: Vec<usize> = Vec::new();
    for i in 2..=n {
        if !is_composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            is_composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius_at(1).unwrap(), 1);
        assert_eq!(mobius_at(30).unwrap(), -1);
        assert_eq!(mobius_at(12).unwrap(), 0);
        assert!(matches!(mobius_at(0), Err(Error::Domain(_))));
    }

    #[test]
    fn liouville_examples() {
        assert_eq!(liouville_at(1).unwrap(), 1);
        assert_eq!(liouville_at(4).unwrap(), 1);
        assert_eq!(liouville_at(8).unwrap(), -1);
        assert!(matches!(liouville_at(0), Err(Error::Domain(_))));
    }

    #[test]
    fn primes_small() {
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        assert_eq!(primes_up_to(2), vec![2]);
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(10_000).len(), 1229);
    }

    #[test]
    fn table_agrees_with_trial_division() {
        let table = mobius_table(5000);
        for n in 1..=5000u64 {
            assert_eq!(table[n as usize], mobius_at(n).unwrap());
        }
    }
}
