//! Exhaustive checks of the Ramanujan-sum, coprimality and root-of-unity identities.

use mobius_corr::identities::{coprime_indicator, ramanujan_sum, verify_identities};

fn main() -> mobius_corr::Result<()> {
    for q in 1..=12 {
        let c = ramanujan_sum(q, 1)?;
        print!("c_{q}(1)={} ", c.rounded);
    }
    println!();
    println!("[gcd(12, 35) = 1] = {}", coprime_indicator(12, 35)?);

    let report = verify_identities(2000)?;
    for check in &report.checks {
        println!(
            "{:<40} cases={:<8} max_dev={:.1e} {}",
            check.name,
            check.cases,
            check.max_deviation,
            if check.passed() { "ok" } else { "FAILED" }
        );
    }
    Ok(())
}
