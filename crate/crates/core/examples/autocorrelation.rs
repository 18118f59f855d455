//! Shifted autocorrelations of μ and λ, with the normalized decay ratios.

use mobius_corr::correlation::{autocorrelation, normalized_series};
use mobius_corr::decay::decade_ladder;
use mobius_corr::sieve::{ArithFunction, Sieve};

fn main() -> mobius_corr::Result<()> {
    let sieve = Sieve::default();
    let xs = decade_ladder(6);
    for function in [ArithFunction::Mobius, ArithFunction::Liouville] {
        for t in [1, 2, -1] {
            let series = autocorrelation(&sieve, function, t, &xs)?;
            let norm = normalized_series(&series, 1.0)?;
            println!("{} t={t}", function.name());
            for (cp, n) in series.checkpoints.iter().zip(&norm) {
                println!("  x={:>8}  R={:>6}  |R|/x={:.2e}  scaled={:.3}", cp.x, cp.r, n.ratio, n.scaled);
            }
        }
    }
    Ok(())
}
