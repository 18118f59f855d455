//! Mertens function and Σ μ(n)/n on a decade ladder, in one streaming pass.

use mobius_corr::decay::decade_ladder;
use mobius_corr::sieve::{summatory_ladder, Sieve};

fn main() -> mobius_corr::Result<()> {
    let xs = decade_ladder(7);
    for p in summatory_ladder(&Sieve::default(), &xs)? {
        let ratio = p.mertens as f64 / (p.x as f64).sqrt();
        println!("x={:>9}  M={:>6}  M/√x={:+.4}  Σμ(n)/n={:+.3e}", p.x, p.mertens, ratio, p.reciprocal_sum);
    }
    Ok(())
}
