//! Counts of integers in arithmetic progressions and the large-sieve functional
//!
//! `V(Q, x) = Σ_{q≤Q} q·Σ_{a=1}^{q} |Σ_{n≤x, n≡a (q)} a_n − (1/q)·Σ_{n≤x} a_n|²`
//!
//! compared against the bound `Q(10Q + 2πx)·Σ_{n≤x} |a_n|²`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::serde_exact;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::sieve::mobius_table;

/// Default cap on the largest modulus of [`large_sieve_functional`].
pub const DEFAULT_MODULUS_CAP: u64 = 10_000;

/// `#{n ≤ x : n ≡ a (mod q)}` and its deviation from `x/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApCountError {
    #[serde(with = "serde_exact::display")]
    pub x: u64,
    #[serde(with = "serde_exact::display")]
    pub q: u64,
    #[serde(with = "serde_exact::display")]
    pub a: u64,
    #[serde(with = "serde_exact::display")]
    pub count: u64,
    pub expected: f64,
    pub error: f64,
    /// `max_{1≤b≤q} |count(b) − x/q|`
    pub max_error_over_a: f64,
}

#[inline]
fn count_in_class(x: u64, q: u64, a: u64) -> u64 {
    if a > x {
        0
    } else {
        (x - a) / q + 1
    }
}

/// Exact `max_a |count − x/q|`: with `r = x mod q`, the classes `a ≤ r` hold
/// one extra element, so the extremes are `1 − r/q` and `r/q`.
fn max_class_error(x: u64, q: u64) -> f64 {
    let r = x % q;
    if r == 0 {
        0.0
    } else {
        let frac = r as f64 / q as f64;
        frac.max(1.0 - frac)
    }
}

pub fn ap_count(x: u64, q: u64, a: u64) -> Result<ApCountError> {
    if q == 0 || a == 0 || a > q {
        return Err(Error::argument(format!("residue a = {a} must lie in [1, q = {q}]")));
    }
    let count = count_in_class(x, q, a);
    let expected = x as f64 / q as f64;
    // (count·q − x)/q keeps the numerator exact
    let error = (count as i128 * q as i128 - x as i128) as f64 / q as f64;
    Ok(ApCountError {
        x,
        q,
        a,
        count,
        expected,
        error,
        max_error_over_a: max_class_error(x, q),
    })
}

/// One row of [`ap_error_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApErrorRow {
    #[serde(with = "serde_exact::display")]
    pub q: u64,
    pub max_error: f64,
    /// `(x/q)·e^{−c√log x}` for the caller's `c`, the error scale claimed for
    /// these counts, reported next to the measured maximum.
    pub claimed_scale: f64,
}

/// `max_a |#{n ≤ x : n ≡ a (q)} − x/q|` for each `q ≤ qmax`.
pub fn ap_error_profile(x: u64, qmax: u64, c: f64) -> Result<Vec<ApErrorRow>> {
    if qmax == 0 {
        return Err(Error::argument("qmax must be ≥ 1"));
    }
    if qmax > x {
        return Err(Error::argument(format!("qmax = {qmax} exceeds x = {x}")));
    }
    let decay = (-c * (x as f64).ln().sqrt()).exp();
    Ok((1..=qmax)
        .map(|q| ApErrorRow {
            q,
            max_error: max_class_error(x, q),
            claimed_scale: x as f64 / q as f64 * decay,
        })
        .collect())
}

/// Sum of the class counts `Σ_{a=1}^{q} #{n ≤ x : n ≡ a (mod q)}`; equals `x`
/// exactly when the counts partition `1..=x`.
pub fn class_count_total(x: u64, q: u64) -> u64 {
    assert!(q >= 1, "modulus must be ≥ 1");
    if x < SMALL_LIMIT && q <= x {
        small_class_total(x as u32, q as u32)
    } else {
        (1..=q).map(|a| count_in_class(x, q, a)).sum()
    }
}

const SMALL_LIMIT: u64 = 1 << 16;

/// Class-count sum for `q ≤ x < 2^16` with the quotient `(x − a)/q` taken as
/// `((x − a)·m) >> 32`, `m = ⌊2^32/q⌋ + 1`. For `n, q < 2^16` the product
/// overshoots `n/q` by less than `2^−16 < 1/q`, so the floor is exact.
fn small_class_total(x: u32, q: u32) -> u64 {
    let m = (1u64 << 32) / q as u64 + 1;
    #[cfg(target_arch = "x86_64")]
    {
        if is_x86_feature_detected!("avx512f") && is_x86_feature_detected!("avx512dq") {
            // SAFETY: the required CPU features were detected at runtime.
            return unsafe { small_class_total_avx512(x, q, m) };
        }
        if is_x86_feature_detected!("avx2") {
            // SAFETY: as above.
            return unsafe { small_class_total_avx2(x, q, m) };
        }
    }
    small_class_total_body(x, q, m)
}

#[inline(always)]
fn small_class_total_body(x: u32, q: u32, m: u64) -> u64 {
    let mut total = 0u64;
    // exclusive range and wrapping ops keep the loop vectorizable
    for a in 1..q + 1 {
        let n = x.wrapping_sub(a) as u64;
        total = total.wrapping_add((n.wrapping_mul(m) >> 32).wrapping_add(1));
    }
    total
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f,avx512dq")]
unsafe fn small_class_total_avx512(x: u32, q: u32, m: u64) -> u64 {
    small_class_total_body(x, q, m)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn small_class_total_avx2(x: u32, q: u32, m: u64) -> u64 {
    small_class_total_body(x, q, m)
}

/// Result of checking that class counts partition `1..=x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCheck {
    #[serde(with = "serde_exact::display")]
    pub x_max: u64,
    #[serde(with = "serde_exact::display")]
    pub pairs_checked: u64,
    /// First `(x, q)` whose class counts do not sum to `x`.
    pub first_failure: Option<String>,
}

impl PartitionCheck {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Checks `Σ_a count(x, q, a) = x` for every `1 ≤ q ≤ x ≤ x_max`.
pub fn partition_check(x_max: u64) -> PartitionCheck {
    let failures: Vec<Option<String>> = (1..=x_max)
        .into_par_iter()
        .map(|x| {
            (1..=x).find_map(|q| {
                let total = class_count_total(x, q);
                (total != x).then(|| format!("x={x} q={q}: classes sum to {total}"))
            })
        })
        .collect();
    PartitionCheck {
        x_max,
        pairs_checked: x_max * (x_max + 1) / 2,
        first_failure: failures.into_iter().flatten().next(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SequenceId {
    Ones,
    Mobius,
    Custom,
}

/// The coefficient sequence `a_1, a_2, …` fed to the large sieve.
#[derive(Debug, Clone, PartialEq)]
pub enum Sequence {
    Ones,
    Mobius,
    /// `values[i]` is `a_{i+1}`; must cover `1..=x`.
    Custom(Vec<f64>),
}

impl Sequence {
    pub fn id(&self) -> SequenceId {
        match self {
            Sequence::Ones => SequenceId::Ones,
            Sequence::Mobius => SequenceId::Mobius,
            Sequence::Custom(_) => SequenceId::Custom,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeSieveReport {
    #[serde(rename = "Q")]
    #[serde(with = "serde_exact::display")]
    pub q_max: u64,
    #[serde(with = "serde_exact::display")]
    pub x: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub sequence_id: SequenceId,
    /// Set when `Q > x`, outside the range where the bound is stated.
    pub q_exceeds_x: bool,
}

impl LargeSieveReport {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Both sides of the large-sieve inequality for moduli `q ≤ q_max`.
pub fn large_sieve_functional(x: u64, q_max: u64, seq: &Sequence) -> Result<LargeSieveReport> {
    large_sieve_functional_capped(x, q_max, seq, DEFAULT_MODULUS_CAP)
}

pub fn large_sieve_functional_capped(
    x: u64,
    q_max: u64,
    seq: &Sequence,
    cap: u64,
) -> Result<LargeSieveReport> {
    if x == 0 || q_max == 0 {
        return Err(Error::argument("x and Q must be ≥ 1"));
    }
    if q_max > cap {
        return Err(Error::Capability(format!(
            "Q = {q_max} exceeds the modulus cap {cap} (cost grows like Q·x)"
        )));
    }
    let (lhs, norm_sq) = match seq {
        Sequence::Ones => integer_functional(&vec![1i64; x as usize], q_max),
        Sequence::Mobius => {
            let mu = mobius_table(x as usize);
            let values: Vec<i64> = mu[1..].iter().map(|&v| v as i64).collect();
            integer_functional(&values, q_max)
        }
        Sequence::Custom(values) => {
            if (values.len() as u64) < x {
                return Err(Error::argument(format!(
                    "custom sequence has {} terms, x = {x}",
                    values.len()
                )));
            }
            float_functional(&values[..x as usize], q_max)
        }
    };
    let rhs = q_max as f64 * (10.0 * q_max as f64 + 2.0 * PI * x as f64) * norm_sq;
    Ok(LargeSieveReport {
        q_max,
        x,
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        sequence_id: seq.id(),
        q_exceeds_x: q_max > x,
    })
}

/// Residue buckets for modulus `q`, filled by walking `n` with a running
/// residue instead of dividing.
fn bucket<T: Copy + std::ops::AddAssign + Default>(values: &[T], q: usize) -> Vec<T> {
    let mut buckets = vec![T::default(); q];
    let mut r = 1 % q;
    for &v in values {
        buckets[r] += v;
        r += 1;
        if r == q {
            r = 0;
        }
    }
    buckets
}

/// For integer sequences each class deviation is `(q·S_a − S)/q` with the
/// numerator exact, so `q·|S_a − S/q|² = (q·S_a − S)²/q`; squares are summed
/// exactly per modulus and converted to floating point once.
fn integer_functional(values: &[i64], q_max: u64) -> (f64, f64) {
    let total: i64 = values.iter().sum();
    let per_q: Vec<f64> = (1..=q_max as usize)
        .into_par_iter()
        .map(|q| {
            let squares: i128 = bucket(values, q)
                .iter()
                .map(|&s| {
                    let dev = q as i128 * s as i128 - total as i128;
                    dev * dev
                })
                .sum();
            squares as f64 / q as f64
        })
        .collect();
    let lhs: CompensatedSum = per_q.into_iter().collect();
    let norm_sq = values.iter().map(|&v| (v * v) as f64).sum();
    (lhs.value(), norm_sq)
}

fn float_functional(values: &[f64], q_max: u64) -> (f64, f64) {
    let total: f64 = values.iter().copied().collect::<CompensatedSum>().value();
    let per_q: Vec<f64> = (1..=q_max as usize)
        .into_par_iter()
        .map(|q| {
            let mean = total / q as f64;
            let sq: CompensatedSum = bucket(values, q)
                .iter()
                .map(|&s| (s - mean) * (s - mean))
                .collect();
            q as f64 * sq.value()
        })
        .collect();
    let lhs: CompensatedSum = per_q.into_iter().collect();
    let norm_sq = values.iter().map(|v| v * v).collect::<CompensatedSum>().value();
    (lhs.value(), norm_sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_examples() {
        let e = ap_count(10, 3, 1).unwrap();
        assert_eq!(e.count, 4);
        assert!((e.error - 2.0 / 3.0).abs() < 1e-15);
        let e = ap_count(10, 1, 1).unwrap();
        assert_eq!((e.count, e.error), (10, 0.0));
        assert_eq!(ap_count(5, 7, 6).unwrap().count, 0);
        assert!(ap_count(10, 3, 0).is_err());
        assert!(ap_count(10, 3, 4).is_err());
    }

    #[test]
    fn counts_match_enumeration() {
        for x in 0..=60u64 {
            for q in 1..=20 {
                for a in 1..=q {
                    let brute = (1..=x).filter(|n| n % q == a % q).count() as u64;
                    let e = ap_count(x, q, a).unwrap();
                    assert_eq!(e.count, brute);
                    assert!(e.error.abs() < 1.0);
                    assert!(e.error.abs() <= e.max_error_over_a + 1e-15);
                }
            }
        }
    }

    #[test]
    fn profile_examples() {
        let p = ap_error_profile(100, 7, 1.0).unwrap();
        assert!(p[6].max_error < 1.0);
        assert_eq!(ap_error_profile(10, 1, 1.0).unwrap()[0].max_error, 0.0);
        let p = ap_error_profile(12, 12, 1.0).unwrap();
        assert_eq!(p[11].max_error, 0.0);
        assert!(ap_error_profile(10, 11, 1.0).is_err());
    }

    #[test]
    fn profile_matches_class_enumeration() {
        let x = 500;
        for row in ap_error_profile(x, x, 0.5).unwrap() {
            let brute = (1..=row.q)
                .map(|a| ap_count(x, row.q, a).unwrap().error.abs())
                .fold(0.0, f64::max);
            assert!((row.max_error - brute).abs() < 1e-12, "q = {}", row.q);
        }
    }

    #[test]
    fn trivial_modulus_has_no_deviation() {
        let r = large_sieve_functional(10, 1, &Sequence::Ones).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.holds());
    }

    // Direct evaluation of the definition with rational class means.
    fn naive_lhs(values: &[f64], q_max: usize) -> f64 {
        let total: f64 = values.iter().sum();
        (1..=q_max)
            .map(|q| {
                let dev: f64 = (1..=q)
                    .map(|a| {
                        let s: f64 = values
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| (i + 1) % q == a % q)
                            .map(|(_, v)| v)
                            .sum();
                        (s - total / q as f64).powi(2)
                    })
                    .sum();
                q as f64 * dev
            })
            .sum()
    }

    #[test]
    fn functional_matches_definition() {
        let mu: Vec<f64> = mobius_table(60)[1..].iter().map(|&v| v as f64).collect();
        let r = large_sieve_functional(60, 25, &Sequence::Mobius).unwrap();
        assert!((r.lhs - naive_lhs(&mu, 25)).abs() < 1e-8 * r.lhs.max(1.0));
        let custom = large_sieve_functional(60, 25, &Sequence::Custom(mu.clone())).unwrap();
        assert!((custom.lhs - r.lhs).abs() < 1e-8 * r.lhs.max(1.0));

        let ones = vec![1.0; 10];
        let r = large_sieve_functional(10, 10, &Sequence::Ones).unwrap();
        assert!((r.lhs - naive_lhs(&ones, 10)).abs() < 1e-9);
        assert!(r.lhs <= 10.0 * (100.0 + 20.0 * PI) * 10.0);
        assert!(r.ratio <= 1.0);
    }

    #[test]
    fn q_above_x_flagged() {
        let r = large_sieve_functional(10, 20, &Sequence::Ones).unwrap();
        assert!(r.q_exceeds_x);
        assert!(large_sieve_functional(10, 10_001, &Sequence::Ones).is_err());
    }

    #[test]
    fn partition_small() {
        for x in 1..=300 {
            for q in 1..=x {
                assert_eq!(class_count_total(x, q), x);
            }
        }
        assert!(partition_check(300).passed());
        assert_eq!(partition_check(3).pairs_checked, 6);
    }

    #[test]
    fn reciprocal_quotient_is_exact() {
        for q in [1u32, 2, 3, 7, 255, 1000, 4097, 65_535] {
            let m = (1u64 << 32) / q as u64 + 1;
            for n in (0..65_536u32).step_by(3).chain([65_535]) {
                assert_eq!((n as u64 * m) >> 32, (n / q) as u64, "n = {n}, q = {q}");
            }
        }
    }

    #[test]
    fn fast_total_matches_class_by_class() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::default();
        runner
            .run(&(1u64..65_536, 1u64..65_536), |(x, q)| {
                prop_assume!(q <= x);
                let slow: u64 = (1..=q).map(|a| ap_count(x, q, a).unwrap().count).sum();
                prop_assert_eq!(class_count_total(x, q), slow);
                Ok(())
            })
            .unwrap();
    }
}
