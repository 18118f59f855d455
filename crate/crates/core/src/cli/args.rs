use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use crate::decay::ModelId;
use crate::error::{Error, Result};
use crate::sieve::DEFAULT_BLOCK_LEN;

#[derive(Debug, Parser)]
#[command(
    name = "mobius",
    version,
    about = "Möbius/Liouville autocorrelations, Mertens sums, and exact checks of the divisor-pair decomposition"
)]
pub struct Cli {
    /// Directory of cached μ blocks (written by `sieve`, read by other commands).
    #[arg(long, global = true, env = "MOBIUS_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,

    /// Values per sieve block; a power of two in [2^10, 2^26].
    #[arg(long, global = true, default_value_t = DEFAULT_BLOCK_LEN)]
    pub block_len: u64,

    /// Worker threads. Output does not depend on this value.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,

    /// Largest x accepted by exact decomposition and by `verify --limit`.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub exact_ceiling: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionArg {
    Mobius,
    Liouville,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SequenceArg {
    Ones,
    Mobius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitSource {
    /// |M(x)| over the ladder.
    Mertens,
    /// |R(t, x)| over the ladder.
    Correlation,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sieve μ into the block cache.
    Sieve {
        /// Inclusive range `a..b`; covered by whole aligned blocks.
        #[arg(long)]
        range: RangeArg,
    },
    /// M(x) and Σ μ(n)/n at each ladder point.
    Mertens {
        #[arg(long)]
        ladder: Ladder,
    },
    /// R(t, x) = Σ_{n≤x} f(n) f(n+t) at each ladder point.
    ///
    /// A negative shift counts only terms with n + t ≥ 1, so R(−s, x) = R(s, x − s).
    /// t = 0 is rejected: that sum is the squarefree count, not a correlation.
    Correlate {
        #[arg(long, allow_negative_numbers = true)]
        t: i64,
        #[arg(long)]
        ladder: Ladder,
        #[arg(long, value_enum, default_value_t = FunctionArg::Mobius)]
        function: FunctionArg,
        /// Also report |R|/x and |R|·e^{c√log x}/x.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Divisor-pair decomposition report for R(1, x).
    Decompose {
        #[arg(long, value_parser = parse_count)]
        x: u64,
        /// Largest x whose R₀/R₁ are computed as exact rationals.
        #[arg(long, default_value_t = crate::decomposition::DEFAULT_RATIONAL_CEILING)]
        rational_ceiling: u64,
    },
    /// Both sides of the large-sieve inequality.
    LargeSieve {
        #[arg(long, value_parser = parse_count)]
        x: u64,
        /// Largest modulus Q (defaults to x).
        #[arg(long, value_parser = parse_count)]
        q: Option<u64>,
        #[arg(long, value_enum, default_value_t = SequenceArg::Ones)]
        sequence: SequenceArg,
    },
    /// Arithmetic-progression count errors for q ≤ qmax.
    ApErrors {
        #[arg(long, value_parser = parse_count)]
        x: u64,
        #[arg(long, value_parser = parse_count)]
        qmax: u64,
        /// Constant c of the reference scale (x/q)·e^{−c√log x}.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Emit one row per residue class instead of one per modulus.
        #[arg(long)]
        classes: bool,
    },
    /// Fit decay models to measured data.
    Fit {
        #[arg(long, value_enum, conflicts_with = "input")]
        source: Option<FitSource>,
        #[arg(long)]
        ladder: Option<Ladder>,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
        t: i64,
        /// CSV file of `x,y` rows (a header line is allowed).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "EXP_SQRT_LOG,EXP_SQRT_LOG_UNNORMALIZED,INV_SQRT_LOGLOG")]
        model: Vec<ModelArg>,
    },
    /// Exhaustive identity, decomposition, and large-sieve checks up to a limit.
    Verify {
        #[arg(long, value_parser = parse_count)]
        limit: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelArg(pub ModelId);

impl FromStr for ModelArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse().map(ModelArg)
    }
}

/// Inclusive range `a..b` (also `a..=b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeArg {
    pub first: u64,
    pub last: u64,
}

impl FromStr for RangeArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| Error::argument(format!("expected a..b, got {s:?}")))?;
        let b = b.strip_prefix('=').unwrap_or(b);
        let first = parse_count(a)?;
        let last = parse_count(b)?;
        if first == 0 || last < first {
            return Err(Error::argument(format!("range {s:?} must satisfy 1 ≤ a ≤ b")));
        }
        Ok(RangeArg { first, last })
    }
}

/// Checkpoint ladder: a comma list (`10,100,1000`) or a decade span
/// `10^a..10^b`. Items may be written `10^k` or `2^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ladder(pub Vec<u64>);

impl FromStr for Ladder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some((a, b)) = s.split_once("..") {
            let exp = |t: &str| -> Result<u32> {
                t.trim()
                    .strip_prefix("10^")
                    .and_then(|e| e.parse().ok())
                    .ok_or_else(|| Error::argument(format!("expected 10^k in ladder span, got {t:?}")))
            };
            let (lo, hi) = (exp(a)?, exp(b)?);
            if lo > hi || hi > 19 {
                return Err(Error::argument(format!("bad decade span {s:?}")));
            }
            return Ok(Ladder((lo..=hi).map(|e| 10u64.pow(e)).collect()));
        }
        let values = s
            .split(',')
            .map(parse_count)
            .collect::<Result<Vec<u64>>>()?;
        Ok(Ladder(values))
    }
}

/// Parses `123`, `10^6`, or `2^20`.
pub fn parse_count(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        let base: u64 = base
            .parse()
            .map_err(|_| Error::argument(format!("bad number {s:?}")))?;
        let exp: u32 = exp
            .parse()
            .map_err(|_| Error::argument(format!("bad exponent in {s:?}")))?;
        return base
            .checked_pow(exp)
            .ok_or_else(|| Error::Range(format!("{s} overflows 64 bits")));
    }
    s.replace('_', "")
        .parse()
        .map_err(|_| Error::argument(format!("bad number {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladders() {
        assert_eq!("10,100".parse::<Ladder>().unwrap().0, vec![10, 100]);
        assert_eq!("10^1..10^3".parse::<Ladder>().unwrap().0, vec![10, 100, 1000]);
        assert_eq!("10^2,2^10".parse::<Ladder>().unwrap().0, vec![100, 1024]);
        assert!("10^3..10^1".parse::<Ladder>().is_err());
        assert!("ten".parse::<Ladder>().is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!("1..10^6".parse::<RangeArg>().unwrap(), RangeArg { first: 1, last: 1_000_000 });
        assert_eq!("5..=7".parse::<RangeArg>().unwrap(), RangeArg { first: 5, last: 7 });
        assert!("0..5".parse::<RangeArg>().is_err());
        assert!("9..5".parse::<RangeArg>().is_err());
    }
}
