//! Streaming autocorrelation `R(t, x) = Σ_{n≤x} f(n)·f(n+t)` for `f ∈ {μ, λ}`.
//!
//! Work is split into the sieve's aligned blocks over `n`; each block sieves
//! its own window `[lo, hi + |t|)` so the shifted factor is available across
//! block boundaries. Block partials are exact integers merged in ascending
//! order.
//!
//! A negative shift `t = −s` counts only terms with `n + t ≥ 1`, which after
//! reindexing `m = n − s` gives `R(−s, x) = R(s, x − s)` (zero when `x ≤ s`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::isqrt;
use crate::serde_exact;
use crate::sieve::summatory::validate_ladder;
use crate::sieve::{primes_up_to, ArithFunction, Sieve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    #[serde(with = "serde_exact::display")]
    pub x: u64,
    #[serde(with = "serde_exact::display")]
    pub r: i64,
}

/// `R(t, x)` for one shift over a ladder of `x` values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    #[serde(with = "serde_exact::display")]
    pub shift: i64,
    pub function: ArithFunction,
    pub checkpoints: Vec<Checkpoint>,
}

/// Computes `R(t, x)` at every `x` of a strictly increasing ladder.
pub fn autocorrelation(
    sieve: &Sieve,
    function: ArithFunction,
    t: i64,
    xs: &[u64],
) -> Result<CorrelationSeries> {
    if t == 0 {
        return Err(Error::argument(
            "shift t = 0 gives the squarefree count Σ μ(n)², which is not a correlation",
        ));
    }
    validate_ladder(xs)?;
    let s = t.unsigned_abs();
    let effective: Vec<u64> = if t > 0 {
        xs.to_vec()
    } else {
        xs.iter().map(|&x| x.saturating_sub(s)).collect()
    };
    let x_max = *effective.last().unwrap();
    if x_max.checked_add(s).is_none() {
        return Err(Error::Range(format!("{x_max} + {s} overflows 64 bits")));
    }
    let positive: Vec<u64> = effective.iter().copied().filter(|&e| e > 0).collect();
    let values = positive_shift_ladder(sieve, function, s, &positive)?;

    let mut it = values.into_iter();
    let checkpoints = xs
        .iter()
        .zip(&effective)
        .map(|(&x, &e)| Checkpoint {
            x,
            r: if e == 0 { 0 } else { it.next().unwrap() },
        })
        .collect();
    Ok(CorrelationSeries {
        shift: t,
        function,
        checkpoints,
    })
}

/// `R(s, e)` for `s ≥ 1` at each strictly increasing `e ≥ 1`.
fn positive_shift_ladder(
    sieve: &Sieve,
    function: ArithFunction,
    s: u64,
    es: &[u64],
) -> Result<Vec<i64>> {
    let Some(&e_max) = es.last() else {
        return Ok(Vec::new());
    };
    let blocks: Vec<(u64, u64)> = sieve
        .aligned_blocks(1, e_max)
        .into_iter()
        .map(|(st, l)| (st, l.min(e_max + 1 - st)))
        .collect();
    let primes = primes_up_to(isqrt(e_max + s));

    let partials: Vec<Result<(Vec<i64>, i64)>> = blocks
        .par_iter()
        .map(|&(start, len)| {
            let window = sieve.window_values(function, start, len + s, &primes)?;
            let end = start + len;
            let lo = es.partition_point(|&e| e < start);
            let hi = es.partition_point(|&e| e < end);
            let mut cps = es[lo..hi].iter().peekable();
            let mut at = Vec::with_capacity(hi - lo);
            let mut acc = 0i64;
            let lag = s as usize;
            for i in 0..len as usize {
                acc += (window[i] * window[i + lag]) as i64;
                let n = start + i as u64;
                while cps.next_if(|&&e| e == n).is_some() {
                    at.push(acc);
                }
            }
            Ok((at, acc))
        })
        .collect();

    let mut out = Vec::with_capacity(es.len());
    let mut base = 0i64;
    for p in partials {
        let (at, total) = p?;
        out.extend(at.into_iter().map(|v| base + v));
        base += total;
    }
    Ok(out)
}

/// One row of [`normalized_series`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPoint {
    #[serde(with = "serde_exact::display")]
    pub x: u64,
    /// `|R| / x`
    pub ratio: f64,
    /// `|R|·e^{c√log x} / x`
    pub scaled: f64,
}

pub fn normalized_series(series: &CorrelationSeries, c: f64) -> Result<Vec<NormalizedPoint>> {
    if series.checkpoints.is_empty() {
        return Err(Error::argument("series has no checkpoints"));
    }
    Ok(series
        .checkpoints
        .iter()
        .map(|cp| {
            let x = cp.x as f64;
            let ratio = cp.r.unsigned_abs() as f64 / x;
            NormalizedPoint {
                x: cp.x,
                ratio,
                scaled: ratio * (c * x.ln().sqrt()).exp(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::{liouville_at, mobius_at};

    fn naive(f: fn(u64) -> Result<i8>, t: i64, x: u64) -> i64 {
        (1..=x)
            .filter_map(|n| {
                let m = n as i64 + t;
                (m >= 1).then(|| f(n).unwrap() as i64 * f(m as u64).unwrap() as i64)
            })
            .sum()
    }

    #[test]
    fn examples() {
        let s = Sieve::default();
        let r = |x| autocorrelation(&s, ArithFunction::Mobius, 1, &[x]).unwrap().checkpoints[0].r;
        assert_eq!(r(2), 0);
        assert_eq!(r(10), -3);
        assert_eq!(r(1), -1);
        assert!(matches!(
            autocorrelation(&s, ArithFunction::Mobius, 0, &[10]),
            Err(Error::Argument(_))
        ));
        assert!(autocorrelation(&s, ArithFunction::Mobius, 1, &[5, 5]).is_err());
    }

    #[test]
    fn matches_naive_across_small_blocks() {
        let s = Sieve::new(1 << 10).unwrap();
        let xs: Vec<u64> = (1..=3000).step_by(7).collect();
        for f in [ArithFunction::Mobius, ArithFunction::Liouville] {
            let oracle = match f {
                ArithFunction::Mobius => mobius_at,
                ArithFunction::Liouville => liouville_at,
            };
            for t in [-5i64, -2, -1, 1, 2, 3, 1500] {
                let series = autocorrelation(&s, f, t, &xs).unwrap();
                for cp in &series.checkpoints {
                    assert_eq!(cp.r, naive(oracle, t, cp.x), "{f:?} t={t} x={}", cp.x);
                    assert!(cp.r.unsigned_abs() <= cp.x);
                }
            }
        }
    }

    #[test]
    fn negative_shift_below_lag_is_zero() {
        let s = Sieve::default();
        let series = autocorrelation(&s, ArithFunction::Mobius, -3, &[1, 2, 3, 4]).unwrap();
        let rs: Vec<i64> = series.checkpoints.iter().map(|c| c.r).collect();
        assert_eq!(rs, vec![0, 0, 0, naive(mobius_at, -3, 4)]);
    }

    #[test]
    fn liouville_terms_are_units() {
        let s = Sieve::default();
        let xs: Vec<u64> = (1..=12).collect();
        let series = autocorrelation(&s, ArithFunction::Liouville, 1, &xs).unwrap();
        let mut prev = 0i64;
        for cp in &series.checkpoints {
            let step = cp.r - prev;
            assert!(step == 1 || step == -1);
            prev = cp.r;
        }
    }

    #[test]
    fn normalization() {
        let series = CorrelationSeries {
            shift: 1,
            function: ArithFunction::Mobius,
            checkpoints: vec![Checkpoint { x: 1, r: -1 }, Checkpoint { x: 10, r: -3 }],
        };
        let pts = normalized_series(&series, 0.0).unwrap();
        assert_eq!(pts[1].ratio, 0.3);
        assert_eq!(pts[1].scaled, 0.3);
        let pts = normalized_series(&series, 2.5).unwrap();
        assert_eq!(pts[0].ratio, 1.0);
        assert_eq!(pts[0].scaled, 1.0);
        let empty = CorrelationSeries { checkpoints: vec![], ..series };
        assert!(normalized_series(&empty, 1.0).is_err());
    }
}
