//! Ramanujan sums, the divisor-sum characteristic function of coprimality,
//! and sums over nontrivial roots of unity, each with an exhaustive checker.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::serde_exact;

use crate::error::{Error, Result};
use crate::numeric::{isqrt, CompensatedSum};
use crate::sieve::{mobius_table, prime_factors};

/// `c_q(n)` as summed in floating point, with its nearest integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanujanSumValue {
    #[serde(with = "serde_exact::display")]
    pub q: u64,
    #[serde(with = "serde_exact::display")]
    pub n: u64,
    pub re: f64,
    pub im: f64,
    #[serde(with = "serde_exact::display")]
    pub rounded: i64,
}

impl RamanujanSumValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Distance from the summed value to its rounded integer.
    pub fn deviation(&self) -> f64 {
        (self.value() - Complex64::new(self.rounded as f64, 0.0)).norm()
    }
}

#[inline]
fn root_of_unity(numerator: u64, q: u64) -> Complex64 {
    let (s, c) = (TAU * numerator as f64 / q as f64).sin_cos();
    Complex64::new(c, s)
}

/// `c_q(n) = Σ_{1≤u≤q, gcd(u,q)=1} e^{2πi·u·n/q}` by direct summation.
///
/// Each root is formed from the reduced residue `u·n mod q`, split as
/// `u = u₀ + j` with `u₀` a multiple of a chunk width `w ≈ √q`: the term is the
/// product of the root for `u₀·n mod q` and the root for `j·n mod q`, both
/// evaluated from their exact reduced angles. No recurrence is carried
/// between chunks, so rounding error does not accumulate with `q`.
pub fn ramanujan_sum(q: u64, n: u64) -> Result<RamanujanSumValue> {
    if q == 0 {
        return Err(Error::Domain("Ramanujan sum needs q ≥ 1".into()));
    }
    let mut coprime = vec![true; q as usize + 1];
    for (p, _) in prime_factors(q) {
        for m in (p..=q).step_by(p as usize) {
            coprime[m as usize] = false;
        }
    }
    if q == 1 {
        coprime[1] = true;
    }

    let width = (isqrt(q) + 1).max(16);
    let step = |k: u64| ((k as u128 * n as u128) % q as u128) as u64;
    let inner: Vec<Complex64> = (0..width).map(|j| root_of_unity(step(j), q)).collect();

    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let mut base = 0u64;
    while base <= q {
        let anchor = root_of_unity(step(base), q);
        let mut chunk = Complex64::new(0.0, 0.0);
        let lo = base.max(1);
        let hi = (base + width - 1).min(q);
        for u in lo..=hi {
            if coprime[u as usize] {
                chunk += anchor * inner[(u - base) as usize];
            }
        }
        re.add(chunk.re);
        im.add(chunk.im);
        base += width;
    }
    let (re, im) = (re.value(), im.value());
    Ok(RamanujanSumValue {
        q,
        n,
        re,
        im,
        rounded: re.round() as i64,
    })
}

/// `Σ_{d|a, d|n} μ(d)`, which is 1 when `gcd(a, n) = 1` and 0 otherwise.
pub fn coprime_indicator(a: u64, n: u64) -> Result<i64> {
    if a == 0 || n == 0 {
        return Err(Error::Domain("coprime indicator needs a, n ≥ 1".into()));
    }
    let g = a.gcd(&n);
    let mut total = 0i64;
    let mut d = 1u64;
    while d * d <= g {
        if g.is_multiple_of(d) {
            total += crate::sieve::mobius_at(d)? as i64;
            let e = g / d;
            if e != d {
                total += crate::sieve::mobius_at(e)? as i64;
            }
        }
        d += 1;
    }
    Ok(total)
}

/// `Σ_{1≤r<k} e^{2πi r/k}`: −1 for `k ≥ 2`, the empty sum 0 for `k = 1`.
pub fn geometric_root_sum(k: u64) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::Domain("root-of-unity sum needs k ≥ 1".into()));
    }
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for r in 1..k {
        let z = root_of_unity(r, k);
        re.add(z.re);
        im.add(z.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// Outcome of one exhaustive identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    #[serde(with = "serde_exact::display")]
    pub cases: u64,
    pub max_deviation: f64,
    pub first_failure: Option<String>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    #[serde(with = "serde_exact::display")]
    pub limit: u64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max)
    }
}

/// Rounding tolerance for an integer-valued floating sum.
pub const ROUNDING_TOLERANCE: f64 = 1e-6;
/// Tolerance on imaginary parts and on the root-of-unity sum.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// `c_n(1) = μ(n)` for every `1 ≤ n ≤ limit`.
pub fn check_ramanujan_mobius(limit: u64) -> Result<IdentityCheck> {
    use rayon::prelude::*;
    let mu = mobius_table(limit as usize);
    let results: Vec<Result<(u64, f64, bool)>> = (1..=limit)
        .into_par_iter()
        .map(|n| {
            let c = ramanujan_sum(n, 1)?;
            let dev = (c.value() - Complex64::new(mu[n as usize] as f64, 0.0)).norm();
            let ok = c.rounded == mu[n as usize] as i64
                && c.deviation() < ROUNDING_TOLERANCE
                && c.im.abs() < FLOAT_TOLERANCE;
            Ok((n, dev, ok))
        })
        .collect();
    let mut check = IdentityCheck {
        name: "ramanujan_sum_at_one_equals_mobius".into(),
        cases: limit,
        max_deviation: 0.0,
        first_failure: None,
    };
    for r in results {
        let (n, dev, ok) = r?;
        check.max_deviation = check.max_deviation.max(dev);
        if !ok && check.first_failure.is_none() {
            check.first_failure = Some(format!("n = {n}: c_n(1) deviates by {dev:e} from μ(n)"));
        }
    }
    Ok(check)
}

/// `Σ_{d|a, d|n} μ(d) = [gcd(a, n) = 1]` for every `1 ≤ a, n ≤ limit`.
pub fn check_coprime_indicator(limit: u64) -> Result<IdentityCheck> {
    use rayon::prelude::*;
    let size = limit as usize;
    let mu = mobius_table(size);
    let mut divisors: Vec<Vec<u32>> = vec![Vec::new(); size + 1];
    for d in 1..=size {
        for m in (d..=size).step_by(d) {
            divisors[m].push(d as u32);
        }
    }
    let failures: Vec<Option<(u64, u64, i64)>> = (1..=limit)
        .into_par_iter()
        .map(|a| {
            for n in 1..=limit {
                let g = a.gcd(&n) as usize;
                let sum: i64 = divisors[g].iter().map(|&d| mu[d as usize] as i64).sum();
                let expected = i64::from(g == 1);
                if sum != expected {
                    return Some((a, n, sum));
                }
            }
            None
        })
        .collect();
    let first = failures.into_iter().flatten().next();
    Ok(IdentityCheck {
        name: "coprime_indicator_divisor_sum".into(),
        cases: limit * limit,
        max_deviation: first.map_or(0.0, |(a, n, s)| {
            (s - i64::from(a.gcd(&n) == 1)).unsigned_abs() as f64
        }),
        first_failure: first.map(|(a, n, s)| format!("a = {a}, n = {n}: divisor sum {s}")),
    })
}

/// `Σ_{1≤r<k} e^{2πi r/k} = −1` for `2 ≤ k ≤ limit`, and 0 at `k = 1`.
pub fn check_geometric_roots(limit: u64) -> Result<IdentityCheck> {
    use rayon::prelude::*;
    let results: Vec<Result<(u64, f64)>> = (1..=limit)
        .into_par_iter()
        .map(|k| {
            let z = geometric_root_sum(k)?;
            let target = if k == 1 { 0.0 } else { -1.0 };
            Ok((k, (z - Complex64::new(target, 0.0)).norm()))
        })
        .collect();
    let mut check = IdentityCheck {
        name: "root_of_unity_sum_equals_minus_one".into(),
        cases: limit,
        max_deviation: 0.0,
        first_failure: None,
    };
    for r in results {
        let (k, dev) = r?;
        check.max_deviation = check.max_deviation.max(dev);
        let bad = if k == 1 { dev != 0.0 } else { dev >= FLOAT_TOLERANCE };
        if bad && check.first_failure.is_none() {
            check.first_failure = Some(format!("k = {k}: deviation {dev:e}"));
        }
    }
    Ok(check)
}

/// Runs all three identity checks up to `limit`.
pub fn verify_identities(limit: u64) -> Result<IdentityReport> {
    if limit == 0 {
        return Err(Error::argument("identity limit must be ≥ 1"));
    }
    Ok(IdentityReport {
        limit,
        checks: vec![
            check_ramanujan_mobius(limit)?,
            check_coprime_indicator(limit)?,
            check_geometric_roots(limit)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::mobius_at;

    fn euler_phi(n: u64) -> u64 {
        prime_factors(n)
            .iter()
            .fold(n, |acc, &(p, _)| acc / p * (p - 1))
    }

    // Closed form c_q(n) = μ(q/g)·φ(q)/φ(q/g), g = gcd(q, n); test-only cross-check.
    fn holder(q: u64, n: u64) -> i64 {
        let g = q.gcd(&n);
        let m = q / g;
        mobius_at(m).unwrap() as i64 * (euler_phi(q) / euler_phi(m)) as i64
    }

    #[test]
    fn examples() {
        let c = ramanujan_sum(1, 1).unwrap();
        assert_eq!(c.rounded, 1);
        assert!(c.deviation() < 1e-12);
        assert_eq!(ramanujan_sum(4, 2).unwrap().rounded, -2);
        assert!(ramanujan_sum(0, 1).is_err());
    }

    #[test]
    fn agrees_with_closed_form() {
        for q in 1..=120u64 {
            for n in 0..=40u64 {
                let c = ramanujan_sum(q, n).unwrap();
                assert_eq!(c.rounded, holder(q, n), "c_{q}({n})");
                assert!(c.deviation() < 1e-9);
                assert!(c.im.abs() < 1e-9);
            }
        }
        // large residues exercise the u·n mod q reduction
        let c = ramanujan_sum(99_991, 1_000_000_007).unwrap();
        assert_eq!(c.rounded, holder(99_991, 1_000_000_007));
    }

    #[test]
    fn coprime_examples() {
        for n in 1..50 {
            assert_eq!(coprime_indicator(1, n).unwrap(), 1);
        }
        assert_eq!(coprime_indicator(6, 4).unwrap(), 0);
        assert_eq!(coprime_indicator(9, 10).unwrap(), 1);
        assert!(coprime_indicator(0, 3).is_err());
    }

    #[test]
    fn coprime_exhaustive_small() {
        for a in 1..=300u64 {
            for n in 1..=300u64 {
                assert_eq!(coprime_indicator(a, n).unwrap(), i64::from(a.gcd(&n) == 1));
            }
        }
    }

    #[test]
    fn root_sums() {
        assert_eq!(geometric_root_sum(1).unwrap(), Complex64::new(0.0, 0.0));
        assert!((geometric_root_sum(2).unwrap() + 1.0).norm() < 1e-12);
        assert!((geometric_root_sum(360).unwrap() + 1.0).norm() < 1e-9);
        assert!(geometric_root_sum(0).is_err());
    }

    #[test]
    fn verify_small_limits() {
        let r = verify_identities(100).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.max_deviation() < 1e-9);
        assert!(verify_identities(1).unwrap().passed());
        assert!(verify_identities(0).is_err());
    }

    #[test]
    fn multiplicative_in_q() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::default();
        runner
            .run(&(1u64..1000, 1u64..1000, 0u64..5000), |(q1, q2, n)| {
                prop_assume!(q1.gcd(&q2) == 1);
                let lhs = ramanujan_sum(q1 * q2, n).unwrap().rounded;
                let rhs = ramanujan_sum(q1, n).unwrap().rounded * ramanujan_sum(q2, n).unwrap().rounded;
                prop_assert_eq!(lhs, rhs);
                Ok(())
            })
            .unwrap();
    }
}
