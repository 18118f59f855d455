use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{primes_up_to, ArithFunction, Sieve};
use crate::error::{Error, Result};
use crate::numeric::{isqrt, CompensatedSum};
use crate::serde_exact;

/// `M(x) = Σ_{n≤x} μ(n)` and `m(x) = Σ_{n≤x} μ(n)/n` at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummatoryPoint {
    #[serde(with = "serde_exact::display")]
    pub x: u64,
    #[serde(with = "serde_exact::display")]
    pub mertens: i64,
    pub reciprocal_sum: f64,
}

/// Summatory values at a single `x`.
pub fn mertens(sieve: &Sieve, x: u64) -> Result<SummatoryPoint> {
    Ok(summatory_ladder(sieve, &[x])?.remove(0))
}

/// Partial sums within one block, taken at each checkpoint inside it and at
/// the block end.
struct BlockPartial {
    at_checkpoints: Vec<(i64, CompensatedSum)>,
    total: (i64, CompensatedSum),
}

/// Summatory values at every checkpoint of a strictly increasing ladder, in a
/// single streaming pass over aligned blocks.
///
/// Block partials are produced on the ambient rayon pool and merged in
/// ascending block order, so the output does not depend on the worker count.
pub fn summatory_ladder(sieve: &Sieve, xs: &[u64]) -> Result<Vec<SummatoryPoint>> {
    validate_ladder(xs)?;
    let Some(&x_max) = xs.last() else {
        return Ok(Vec::new());
    };
    let blocks: Vec<(u64, u64)> = sieve
        .aligned_blocks(1, x_max)
        .into_iter()
        .map(|(s, l)| (s, l.min(x_max + 1 - s)))
        .collect();
    let primes = primes_up_to(isqrt(x_max));

    let partials: Vec<Result<BlockPartial>> = blocks
        .par_iter()
        .map(|&(start, len)| {
            let values = sieve.window_values(ArithFunction::Mobius, start, len, &primes)?;
            let end = start + len;
            let lo = xs.partition_point(|&x| x < start);
            let hi = xs.partition_point(|&x| x < end);
            let mut cps = xs[lo..hi].iter().peekable();
            let mut at_checkpoints = Vec::with_capacity(hi - lo);
            let mut m = 0i64;
            let mut r = CompensatedSum::new();
            for (i, &mu) in values.iter().enumerate() {
                let n = start + i as u64;
                if mu != 0 {
                    m += mu as i64;
                    r.add(mu as f64 / n as f64);
                }
                while cps.next_if(|&&x| x == n).is_some() {
                    at_checkpoints.push((m, r));
                }
            }
            Ok(BlockPartial {
                at_checkpoints,
                total: (m, r),
            })
        })
        .collect();

    let mut out = Vec::with_capacity(xs.len());
    let mut xs_iter = xs.iter();
    let mut m_acc = 0i64;
    let mut r_acc = CompensatedSum::new();
    for partial in partials {
        let partial = partial?;
        for (m, r) in partial.at_checkpoints {
            let mut rr = r_acc;
            rr.merge(&r);
            out.push(SummatoryPoint {
                x: *xs_iter.next().expect("one partial per checkpoint"),
                mertens: m_acc + m,
                reciprocal_sum: rr.value(),
            });
        }
        m_acc += partial.total.0;
        r_acc.merge(&partial.total.1);
    }
    Ok(out)
}

pub(crate) fn validate_ladder(xs: &[u64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::argument("ladder must contain at least one checkpoint"));
    }
    if xs[0] == 0 {
        return Err(Error::argument("ladder checkpoints must be ≥ 1"));
    }
    if let Some(w) = xs.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::argument(format!(
            "ladder must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::harmonic;
    use crate::sieve::mobius_at;

    #[test]
    fn small_values() {
        let s = Sieve::default();
        assert_eq!(mertens(&s, 10).unwrap().mertens, -1);
        assert_eq!(mertens(&s, 1).unwrap().mertens, 1);
        let p = mertens(&s, 2).unwrap();
        assert_eq!(p.mertens, 0);
        assert_eq!(p.reciprocal_sum, 0.5);
    }

    #[test]
    fn ladder_examples() {
        let s = Sieve::default();
        let pts = summatory_ladder(&s, &[1, 2]).unwrap();
        assert_eq!(
            pts,
            vec![
                SummatoryPoint { x: 1, mertens: 1, reciprocal_sum: 1.0 },
                SummatoryPoint { x: 2, mertens: 0, reciprocal_sum: 0.5 },
            ]
        );
        let direct: f64 = (1..=10u64)
            .map(|n| mobius_at(n).unwrap() as f64 / n as f64)
            .sum();
        let p10 = &summatory_ladder(&s, &[10]).unwrap()[0];
        assert_eq!(p10.mertens, -1);
        assert!((p10.reciprocal_sum - direct).abs() < 1e-15);
        assert!(matches!(summatory_ladder(&s, &[10, 10]), Err(Error::Argument(_))));
        assert!(matches!(summatory_ladder(&s, &[]), Err(Error::Argument(_))));
    }

    #[test]
    fn ladder_spanning_blocks_matches_pointwise() {
        let small = Sieve::new(1 << 10).unwrap();
        let xs: Vec<u64> = (1..=5000).collect();
        let pts = summatory_ladder(&small, &xs).unwrap();
        let mut m = 0i64;
        for p in &pts {
            let mu = mobius_at(p.x).unwrap() as i64;
            m += mu;
            assert_eq!(p.mertens, m);
            assert!(p.mertens.unsigned_abs() <= p.x);
            assert!(p.reciprocal_sum.abs() <= harmonic(p.x));
        }
        let big = summatory_ladder(&Sieve::default(), &[1024, 1025, 4999]).unwrap();
        assert_eq!(big[0].mertens, pts[1023].mertens);
        assert_eq!(big[1].mertens, pts[1024].mertens);
        assert_eq!(big[2].mertens, pts[4998].mertens);
    }
}
