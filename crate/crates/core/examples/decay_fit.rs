//! Fit the decay models to |M(x)| and to synthetic data with a known rate.

use mobius_corr::decay::{compare_models, decade_ladder, fit_decay, synthetic, usable_points, ModelId};
use mobius_corr::sieve::{summatory_ladder, Sieve};

fn main() -> mobius_corr::Result<()> {
    let xs = decade_ladder(8);
    let pts = synthetic(ModelId::ExpSqrtLog, 0.7, 2.0, &xs);
    let fit = fit_decay(&pts, ModelId::ExpSqrtLog)?;
    println!("synthetic c=0.7 C=2.0 recovered c={:.9} C={:.9}", fit.c_hat, fit.big_c_hat);

    let ladder: Vec<u64> = (1..=14).map(|k| 1u64 << (2 * k)).collect();
    let raw: Vec<(u64, f64)> = summatory_ladder(&Sieve::default(), &ladder)?
        .iter()
        .map(|p| (p.x, p.mertens.unsigned_abs() as f64))
        .collect();
    let (points, dropped) = usable_points(&raw);
    println!("|M(x)| on {} points ({dropped} dropped)", points.len());
    for f in compare_models(&points, &ModelId::ALL)? {
        println!("  {:<26} c={:+.4} C={:.4e} rss={:.4}", f.model_id.name(), f.c_hat, f.big_c_hat, f.rss);
    }
    Ok(())
}
