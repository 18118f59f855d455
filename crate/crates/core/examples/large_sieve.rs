//! Large-sieve inequality at Q = x and the error profile of progression counts.

use mobius_corr::progressions::{ap_error_profile, large_sieve_functional, partition_check, Sequence};

fn main() -> mobius_corr::Result<()> {
    for x in [10, 100, 1000, 5000] {
        for seq in [Sequence::Ones, Sequence::Mobius] {
            let r = large_sieve_functional(x, x, &seq)?;
            println!("x=Q={x:<5} {:?}: lhs={:.4e} rhs={:.4e} ratio={:.4}", r.sequence_id, r.lhs, r.rhs, r.ratio);
        }
    }

    for row in ap_error_profile(1_000_000, 12, 1.0)? {
        println!("q={:<3} max|error|={:.4}  scale={:.1}", row.q, row.max_error, row.claimed_scale);
    }

    let check = partition_check(500);
    println!("class counts partition 1..=x for all q ≤ x ≤ 500: {}", check.passed());
    Ok(())
}
