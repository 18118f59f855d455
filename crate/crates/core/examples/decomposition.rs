//! Divisor-pair decomposition of R(1, x): direct sum, pair expansion, R₀ and R₁.

use mobius_corr::decomposition::{decomposition_report, DecompositionLimits};

fn main() -> mobius_corr::Result<()> {
    let limits = DecompositionLimits::default();
    for x in [2, 10, 100, 1000, 3000] {
        let r = decomposition_report(x, &limits)?;
        println!(
            "x={x:<5} direct={:<4} pairs={:<4} gap={:<4} r0≈{:+.4} r1≈{:+.4} corrected={} ({:?})",
            r.lhs_direct,
            r.rhs_pair_expansion,
            r.discrepancy_pair_vs_direct,
            r.r0.to_f64(),
            r.r1.to_f64(),
            r.corrected_expansion,
            r.accuracy,
        );
    }
    let r = decomposition_report(10, &limits)?;
    println!("exact at x=10: r0={} r1={} r0+r1={}", r.r0, r.r1, r.r0_plus_r1);
    Ok(())
}
