//! Möbius and Liouville autocorrelation sums with exact verification of the
//! arithmetic identities behind the divisor-pair decomposition of
//! `Σ_{n≤x} μ(n)μ(n+1)`.
//!
//! The crate is organised as one module per computation:
//!
//! * [`sieve`]: segmented μ/λ sieving, the block cache, Mertens sums.
//! * [`identities`]: Ramanujan sums, the coprimality divisor sum, root-of-unity sums.
//! * [`correlation`]: streaming `R(t, x) = Σ_{n≤x} f(n) f(n+t)` over checkpoint ladders.
//! * [`decomposition`]: the divisor-pair expansion of `R(1, x)` and its `R₀ + R₁` split.
//! * [`progressions`]: arithmetic-progression counts and the large-sieve functional.
//! * [`decay`]: log-linear least-squares fits of decay laws.
//! * [`cli`]: the `mobius` command-line front end.

pub mod cli;
pub mod correlation;
pub mod decay;
pub mod decomposition;
pub mod error;
pub mod identities;
pub mod numeric;
pub mod progressions;
pub mod serde_exact;
pub mod sieve;

pub use error::{Error, Result};

/// Runs `f` on a dedicated rayon pool with `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if workers == 0 {
        return Err(Error::argument("workers must be ≥ 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Capability(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
