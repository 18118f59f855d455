//! Sieve μ into an on-disk block cache, then read it back through a cached sieve.

use mobius_corr::sieve::{mertens, BlockCache, Sieve};

fn main() -> mobius_corr::Result<()> {
    let dir = std::env::temp_dir().join("mobius-example-cache");
    std::fs::create_dir_all(&dir)?;
    let cache = BlockCache::new(&dir);

    let sieve = Sieve::new(1 << 16)?;
    for block in sieve.sieve_aligned(1, 1 << 18)? {
        let stored = cache.store(&block)?;
        println!("{} {:?} sha256={}", stored.file, stored.status, &stored.sha256[..16]);
    }

    let cached = sieve.with_cache(cache);
    let p = mertens(&cached, 1 << 18)?;
    println!("M(2^18) = {} (read from {})", p.mertens, dir.display());
    Ok(())
}
