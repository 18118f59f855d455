//! The divisor-pair expansion of `R(1, x) = Σ_{n≤x} μ(n)μ(n+1)` and its split
//! into a main term `R₀` and a remainder `R₁`.
//!
//! With `A(d₁, d₂, x) = #{1 ≤ n ≤ x : d₁ | n, d₂ | n+1}` and the pair range
//! `1 ≤ d₁ < x`, `1 ≤ d₂ < x + 1`:
//!
//! * pair expansion: `Σ μ(d₁)μ(d₂)·A(d₁, d₂, x)`
//! * `R₀ = x·Σ_{gcd(d₁,d₂)=1} μ(d₁)μ(d₂)/(d₁d₂)`
//! * `R₁ = Σ_{gcd(d₁,d₂)=1} μ(d₁)μ(d₂)·(A(d₁, d₂, x) − x/(d₁d₂))`
//!
//! The pair expansion counts every divisor of `n` and `n+1`, so it does not
//! reproduce `R(1, x)`; the report measures the gap instead of assuming it is
//! zero. The corrected expansion restricts to proper divisors, where
//! `Σ_{d|m, d<m} μ(d) = −μ(m)` for `m ≥ 2` makes the sum equal to
//! `Σ_{2≤n≤x} μ(n)μ(n+1)`; the `n = 1` term `μ(1)μ(2) = −1` is added back
//! separately.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::serde_exact::{self, format_rational, parse_rational};
use crate::sieve::{mobius_table, primes_up_to};

/// Default largest `x` accepted by [`decomposition_report`].
pub const DEFAULT_EXACT_CEILING: u64 = 10_000;
/// Default largest `x` for which `R₀` and `R₁` are kept as exact rationals.
pub const DEFAULT_RATIONAL_CEILING: u64 = 1_000;

/// Returns `(g, s)` with `g = gcd(a, m)` and `a·s ≡ g (mod m)`, `0 ≤ s < m`.
fn gcd_inverse(a: u64, m: u64) -> (u64, u64) {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    let g = old_r as u64;
    let modulus = (m / g) as i128;
    (g, old_s.rem_euclid(modulus.max(1)) as u64)
}

/// `#{1 ≤ n ≤ x : d₁ | n, d₂ | n + t}` via the Chinese remainder theorem.
pub fn pair_count_shift(d1: u64, d2: u64, x: u64, t: u64) -> u64 {
    assert!(d1 >= 1 && d2 >= 1, "divisors must be ≥ 1");
    // n = d1·k with d1·k ≡ −t (mod d2)
    let (g, inv) = gcd_inverse(d1 % d2, d2);
    if !t.is_multiple_of(g) {
        return 0;
    }
    let m = d2 / g;
    let target = ((d2 - t % d2) % d2) / g;
    let k0 = (target as u128 * inv as u128 % m.max(1) as u128) as u64;
    let period = d1 as u128 * m as u128;
    let mut n0 = d1 as u128 * k0 as u128;
    if n0 == 0 {
        n0 = period;
    }
    if n0 > x as u128 {
        0
    } else {
        ((x as u128 - n0) / period + 1) as u64
    }
}

/// `#{1 ≤ n ≤ x : d₁ | n, d₂ | n + 1}`; zero unless `gcd(d₁, d₂) = 1`.
pub fn pair_count(d1: u64, d2: u64, x: u64) -> u64 {
    pair_count_shift(d1, d2, x, 1)
}

/// μ over `[0, x + 1]` and the squarefree integers of the pair ranges.
struct PairTables {
    x: u64,
    mu: Vec<i8>,
    squarefree: Vec<u64>,
}

impl PairTables {
    fn new(x: u64) -> Self {
        let mu = mobius_table(x as usize + 1);
        let squarefree = (1..=x).filter(|&d| mu[d as usize] != 0).collect();
        Self { x, mu, squarefree }
    }

    fn mu(&self, d: u64) -> i64 {
        self.mu[d as usize] as i64
    }

    /// Squarefree `d₁` with `1 ≤ d₁ < x`.
    fn d1_range(&self) -> &[u64] {
        let end = self.squarefree.partition_point(|&d| d < self.x);
        &self.squarefree[..end]
    }

    /// Squarefree `d₂` with `1 ≤ d₂ ≤ x`.
    fn d2_range(&self) -> &[u64] {
        &self.squarefree
    }

    fn direct(&self) -> i64 {
        (1..=self.x).map(|n| self.mu(n) * self.mu(n + 1)).sum()
    }
}

/// `Σ_{1≤d₁<x, 1≤d₂<x+1} μ(d₁)μ(d₂)·#{n ≤ x : d₁ | n, d₂ | n+1}`, with no
/// proper-divisor restriction.
pub fn pair_expansion(x: u64) -> Result<i64> {
    check_x(x, 1)?;
    let tables = PairTables::new(x);
    Ok(pair_pass(&tables).pair_sum)
}

/// The proper-divisor form of the pair expansion; equals `Σ_{2≤n≤x} μ(n)μ(n+1)`.
pub fn corrected_pair_expansion(x: u64) -> Result<i64> {
    if x < 2 {
        return Err(Error::argument("corrected pair expansion needs x ≥ 2"));
    }
    let tables = PairTables::new(x);
    Ok(pair_pass(&tables).corrected_sum)
}

fn check_x(x: u64, min: u64) -> Result<()> {
    if x < min {
        return Err(Error::argument(format!("x must be ≥ {min}")));
    }
    Ok(())
}

/// Terms of the corrected expansion for one coprime pair: the pair count
/// restricted to `2 ≤ n ≤ x`, `n ≠ d₁`, `n + 1 ≠ d₂`.
fn corrected_count(d1: u64, d2: u64, x: u64, full: u64) -> u64 {
    let in_set = |n: u64| n >= 1 && n <= x && n.is_multiple_of(d1) && (n + 1).is_multiple_of(d2);
    let mut excluded = [1, d1, d2.wrapping_sub(1)];
    excluded.sort_unstable();
    let mut removed = 0;
    let mut prev = 0;
    for &n in &excluded {
        if n != prev && n != 0 && in_set(n) {
            removed += 1;
        }
        prev = n;
    }
    full - removed
}

#[derive(Debug, Default, Clone)]
struct PassTotals {
    pair_sum: i64,
    corrected_sum: i64,
    r0_float: CompensatedSum,
    r1_float: CompensatedSum,
}

impl PassTotals {
    fn merge(&mut self, other: &PassTotals) {
        self.pair_sum += other.pair_sum;
        self.corrected_sum += other.corrected_sum;
        self.r0_float.merge(&other.r0_float);
        self.r1_float.merge(&other.r1_float);
    }
}

/// One sweep over squarefree pairs, striped by `d₁` on the ambient pool and
/// merged in ascending `d₁`. Pairs with a common factor contribute nothing to
/// any of the sums (their pair count is zero and they are excluded from the
/// coprime sums), so they are skipped.
fn pair_pass(tables: &PairTables) -> PassTotals {
    let x = tables.x;
    let xf = x as f64;
    let stripes: Vec<PassTotals> = tables
        .d1_range()
        .par_iter()
        .map(|&d1| {
            let mut acc = PassTotals::default();
            let mu1 = tables.mu(d1);
            for &d2 in tables.d2_range() {
                let (g, _) = gcd_inverse(d1 % d2, d2);
                if g != 1 {
                    continue;
                }
                let sign = mu1 * tables.mu(d2);
                let count = pair_count(d1, d2, x);
                acc.pair_sum += sign * count as i64;
                acc.corrected_sum += sign * corrected_count(d1, d2, x, count) as i64;
                let q = d1 as f64 * d2 as f64;
                acc.r0_float.add(sign as f64 / q);
                acc.r1_float.add(sign as f64 * (count as f64 - xf / q));
            }
            acc
        })
        .collect();
    let mut total = PassTotals::default();
    for s in &stripes {
        total.merge(s);
    }
    total
}

/// `Σ_m c_m / m` exactly, for squarefree denominators `m`.
///
/// The common denominator is the product of the primes dividing some `m`, so
/// every `D / m` is an exact integer; a single reduction happens at the end.
fn sum_over_squarefree(terms: &[(u64, BigInt)]) -> BigRational {
    let terms: Vec<&(u64, BigInt)> = terms.iter().filter(|(_, c)| !c.is_zero()).collect();
    let Some(max_m) = terms.iter().map(|(m, _)| *m).max() else {
        return BigRational::zero();
    };
    let primes = primes_up_to(max_m);
    let mut used = vec![false; primes.len()];
    for (m, _) in &terms {
        let mut r = *m;
        for (i, &p) in primes.iter().enumerate() {
            if p * p > r {
                break;
            }
            if r % p == 0 {
                used[i] = true;
                r /= p;
                debug_assert!(r % p != 0, "denominator {m} is not squarefree");
            }
        }
        if r > 1 {
            let i = primes.binary_search(&r).expect("cofactor is prime");
            used[i] = true;
        }
    }
    let factors: Vec<u64> = primes
        .iter()
        .zip(&used)
        .filter_map(|(&p, &u)| u.then_some(p))
        .collect();
    let denom = product_tree(&factors);
    let numer: BigInt = terms
        .par_iter()
        .map(|(m, c)| c * BigInt::from(&denom / *m))
        .reduce(BigInt::zero, |a, b| a + b);
    BigRational::new(numer, BigInt::from(denom))
}

fn product_tree(values: &[u64]) -> BigUint {
    match values.len() {
        0 => BigUint::one(),
        1 => BigUint::from(values[0]),
        n => product_tree(&values[..n / 2]) * product_tree(&values[n / 2..]),
    }
}

/// An exact rational, or a compensated floating point estimate when the
/// denominators are too large to carry.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Exact(BigRational),
    Approx(f64),
}

impl Quantity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Quantity::Approx(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Quantity::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Quantity::Exact(r) => Some(r),
            Quantity::Approx(_) => None,
        }
    }
}

impl fmt::Display for Quantity {
    /// Exact values print as `p/q`; approximate ones as a float literal that
    /// always contains `.`, `e`, `inf` or `NaN`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact(r) => f.write_str(&format_rational(r)),
            Quantity::Approx(v) => write!(f, "{v:?}"),
        }
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.contains('/') {
            parse_rational(s).map(Quantity::Exact)
        } else {
            s.parse::<f64>().map(Quantity::Approx).map_err(|e| e.to_string())
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        serde_exact::display::deserialize(d)
    }
}

impl std::ops::Add for &Quantity {
    type Output = Quantity;

    fn add(self, rhs: &Quantity) -> Quantity {
        match (self, rhs) {
            (Quantity::Exact(a), Quantity::Exact(b)) => Quantity::Exact(a + b),
            (a, b) => Quantity::Approx(a.to_f64() + b.to_f64()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Accuracy {
    Exact,
    Float,
}

/// Ceilings controlling how large a decomposition may be and where `R₀`, `R₁`
/// fall back from exact rationals to compensated floats.
#[derive(Debug, Clone, Copy)]
pub struct DecompositionLimits {
    pub exact_ceiling: u64,
    pub rational_ceiling: u64,
}

impl Default for DecompositionLimits {
    fn default() -> Self {
        Self {
            exact_ceiling: DEFAULT_EXACT_CEILING,
            rational_ceiling: DEFAULT_RATIONAL_CEILING,
        }
    }
}

/// Exact coefficient tables for the coprime pair sums, indexed by `m = d₁d₂`.
/// `(m, c_m)` pairs with nonzero `c_m`.
type Coefficients = Vec<(u64, BigInt)>;

fn coprime_coefficients(tables: &PairTables) -> (Coefficients, Coefficients) {
    let x = tables.x;
    let size = (x * (x + 1)) as usize + 1;
    let mut main = vec![0i64; size];
    let mut rest = vec![0i128; size];
    for &d1 in tables.d1_range() {
        for &d2 in tables.d2_range() {
            let (g, _) = gcd_inverse(d1 % d2, d2);
            if g != 1 {
                continue;
            }
            let sign = tables.mu(d1) * tables.mu(d2);
            let m = d1 * d2;
            main[m as usize] += sign;
            rest[m as usize] +=
                sign as i128 * (pair_count(d1, d2, x) as i128 * m as i128 - x as i128);
        }
    }
    let collect = |v: Vec<BigInt>| -> Coefficients {
        v.into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m as u64, c))
            .collect()
    };
    (
        collect(main.into_iter().map(BigInt::from).collect()),
        collect(rest.into_iter().map(BigInt::from).collect()),
    )
}

fn r0_r1(tables: &PairTables, limits: &DecompositionLimits, pass: &PassTotals) -> (Quantity, Quantity) {
    if tables.x <= 1 {
        return (Quantity::Exact(BigRational::zero()), Quantity::Exact(BigRational::zero()));
    }
    if tables.x <= limits.rational_ceiling {
        let (main, rest) = coprime_coefficients(tables);
        let r0 = sum_over_squarefree(&main) * BigInt::from(tables.x);
        let r1 = sum_over_squarefree(&rest);
        (Quantity::Exact(r0), Quantity::Exact(r1))
    } else {
        (
            Quantity::Approx(tables.x as f64 * pass.r0_float.value()),
            Quantity::Approx(pass.r1_float.value()),
        )
    }
}

/// `R₀(x) = x·Σ_{coprime pairs} μ(d₁)μ(d₂)/(d₁d₂)`.
pub fn r0_term(x: u64, limits: &DecompositionLimits) -> Result<Quantity> {
    check_x(x, 1)?;
    let tables = PairTables::new(x);
    let pass = pair_pass(&tables);
    Ok(r0_r1(&tables, limits, &pass).0)
}

/// `R₁(x) = Σ_{coprime pairs} μ(d₁)μ(d₂)·(A(d₁, d₂, x) − x/(d₁d₂))`.
pub fn r1_term(x: u64, limits: &DecompositionLimits) -> Result<Quantity> {
    check_x(x, 1)?;
    let tables = PairTables::new(x);
    let pass = pair_pass(&tables);
    Ok(r0_r1(&tables, limits, &pass).1)
}

/// `x·Σ_{d₁<x} μ(d₁)/d₁ · Σ_{d₂≤x} μ(d₂)/d₂`: the main term with the
/// coprimality condition dropped while keeping the product `μ(d₁)μ(d₂)`.
fn unrestricted_main(tables: &PairTables, exact: bool) -> Quantity {
    let x = tables.x;
    if exact {
        let partial = |upto: u64| {
            let terms: Vec<(u64, BigInt)> = (1..=upto)
                .filter(|&d| tables.mu(d) != 0)
                .map(|d| (d, BigInt::from(tables.mu(d))))
                .collect();
            sum_over_squarefree(&terms)
        };
        Quantity::Exact(partial(x - 1) * partial(x) * BigInt::from(x))
    } else {
        let partial = |upto: u64| {
            (1..=upto)
                .map(|d| tables.mu(d) as f64 / d as f64)
                .collect::<CompensatedSum>()
                .value()
        };
        Quantity::Approx(x as f64 * partial(x - 1) * partial(x))
    }
}

/// `x·Σ_{all pairs} μ(d₁d₂)/(d₁d₂)` with `μ(d₁d₂)` read from a sieve of μ up to
/// `x(x+1)`; computed only in exact mode.
fn mobius_product_main(tables: &PairTables) -> Quantity {
    let x = tables.x;
    let mu_big = mobius_table((x * (x + 1)) as usize);
    let mut coef = vec![0i64; mu_big.len()];
    for d1 in 1..x {
        for d2 in 1..=x {
            let m = (d1 * d2) as usize;
            coef[m] += mu_big[m] as i64;
        }
    }
    let terms: Vec<(u64, BigInt)> = coef
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != 0)
        .map(|(m, c)| (m as u64, BigInt::from(c)))
        .collect();
    Quantity::Exact(sum_over_squarefree(&terms) * BigInt::from(x))
}

/// Every quantity of the divisor-pair decomposition at one `x` (shift 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    #[serde(with = "serde_exact::display")]
    pub x: u64,
    #[serde(with = "serde_exact::display")]
    pub t: u64,
    pub accuracy: Accuracy,
    /// `Σ_{n≤x} μ(n)μ(n+1)`
    #[serde(with = "serde_exact::display")]
    pub lhs_direct: i64,
    /// Pair expansion over all divisors (equal to its coprime-restricted form,
    /// since pairs with a common factor count no `n`).
    #[serde(with = "serde_exact::display")]
    pub rhs_pair_expansion: i64,
    /// `rhs_pair_expansion − lhs_direct`
    #[serde(with = "serde_exact::display")]
    pub discrepancy_pair_vs_direct: i64,
    pub r0: Quantity,
    pub r1: Quantity,
    pub r0_plus_r1: Quantity,
    /// `r0_plus_r1 − rhs_pair_expansion`, zero in exact mode.
    pub r0_r1_residual: Quantity,
    /// Main term with `μ(d₁d₂)` over all pairs (no coprimality condition).
    pub r0_mobius_product: Option<Quantity>,
    /// Main term with `μ(d₁)μ(d₂)` over all pairs (no coprimality condition).
    pub r0_unrestricted: Quantity,
    /// `Σ_{2≤n≤x} μ(n)μ(n+1)` from the proper-divisor pair expansion.
    #[serde(with = "serde_exact::display")]
    pub corrected_pair_sum: i64,
    /// The separately handled `n = 1` term, `μ(1)μ(2)`.
    #[serde(with = "serde_exact::display")]
    pub boundary_term: i64,
    /// `corrected_pair_sum + boundary_term`, which equals `lhs_direct`.
    #[serde(with = "serde_exact::display")]
    pub corrected_expansion: i64,
}

impl DecompositionReport {
    /// The identities that hold by construction: `R₀ + R₁` reproduces the pair
    /// expansion and the corrected expansion reproduces the direct sum.
    pub fn internal_identities_hold(&self) -> bool {
        let r_ok = match &self.r0_r1_residual {
            Quantity::Exact(r) => r.is_zero(),
            Quantity::Approx(v) => {
                v.abs() <= 1e-6 * (1.0 + self.r0.to_f64().abs() + self.r1.to_f64().abs())
            }
        };
        r_ok && self.corrected_expansion == self.lhs_direct
    }
}

pub fn decomposition_report(x: u64, limits: &DecompositionLimits) -> Result<DecompositionReport> {
    if x < 2 {
        return Err(Error::argument("decomposition needs x ≥ 2"));
    }
    if x > limits.exact_ceiling {
        return Err(Error::Capability(format!(
            "x = {x} exceeds the exact ceiling {}; raise the ceiling or use the float-mode r0/r1 terms",
            limits.exact_ceiling
        )));
    }
    let tables = PairTables::new(x);
    let pass = pair_pass(&tables);
    let (r0, r1) = r0_r1(&tables, limits, &pass);
    let exact = r0.is_exact();
    let r0_plus_r1 = &r0 + &r1;
    let rhs = Quantity::Exact(BigRational::from_integer(BigInt::from(pass.pair_sum)));
    let r0_r1_residual = match (&r0_plus_r1, &rhs) {
        (Quantity::Exact(a), Quantity::Exact(b)) => Quantity::Exact(a - b),
        (a, b) => Quantity::Approx(a.to_f64() - b.to_f64()),
    };
    let lhs = tables.direct();
    let boundary_term = tables.mu(1) * tables.mu(2);
    Ok(DecompositionReport {
        x,
        t: 1,
        accuracy: if exact { Accuracy::Exact } else { Accuracy::Float },
        lhs_direct: lhs,
        rhs_pair_expansion: pass.pair_sum,
        discrepancy_pair_vs_direct: pass.pair_sum - lhs,
        r0,
        r1,
        r0_plus_r1,
        r0_r1_residual,
        r0_mobius_product: exact.then(|| mobius_product_main(&tables)),
        r0_unrestricted: unrestricted_main(&tables, exact),
        corrected_pair_sum: pass.corrected_sum,
        boundary_term,
        corrected_expansion: pass.corrected_sum + boundary_term,
    })
}
