use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

pub const BUDGET_ENV: &str = "POWERFREE_BUDGET";
pub const THREADS_ENV: &str = "POWERFREE_THREADS";

/// Extremal power-free product sets: bounds, exact values, constructions.
///
/// Exit codes: 0 ok, 1 verification found a d-th power, 2 usage,
/// 3 capacity, 4 budget exhausted, 5 below construction threshold,
/// 6 not applicable.
#[derive(Debug, Parser)]
#[command(name = "powerfree", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Search node budget for `rho` and `davenport --exact`.
    #[arg(long, global = true, env = BUDGET_ENV, value_name = "NODES")]
    pub budget: Option<u64>,

    /// Worker threads.
    #[arg(long, global = true, env = THREADS_ENV, value_name = "N",
          value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub threads: Option<u64>,

    /// Prime table limit. Defaults to max(N, 2^d·p_d).
    #[arg(long, global = true, value_name = "N")]
    pub sieve_limit: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Main term and every closed-form upper bound.
    Bounds(BoundsArgs),
    /// Exact ρ_d(N) by branch and bound.
    Rho(RhoArgs),
    /// Build the explicit extremal set for N ≥ 2^d·p_d.
    Construct(ConstructArgs),
    /// Check a set of integers, or a certificate, for d-th power products.
    Verify(VerifyArgs),
    /// Davenport constant of a finite abelian group.
    Davenport(DavenportArgs),
    /// List primes and π(N).
    Primes(PrimesArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(short = 'd', value_parser = parse_d)]
    pub d: u32,
    /// A single N or an inclusive range lo..hi.
    #[arg(short = 'N', required_unless_present = "identity")]
    pub n: Option<NRange>,
    /// Check Σ_{k<d} π((2d−2)/k) against Σ ω(k) and against 2d−2 instead.
    #[arg(long, conflicts_with = "n")]
    pub identity: bool,
}

#[derive(Debug, Args)]
pub struct RhoArgs {
    #[arg(short = 'd', value_parser = parse_d)]
    pub d: u32,
    #[arg(short = 'N')]
    pub n: NRange,
    /// Solve past the desk-scale guard.
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(short = 'd', value_parser = parse_d)]
    pub d: u32,
    #[arg(short = 'N')]
    pub n: u64,
    /// Run the certificate checks and fill in `verified`.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(short = 'd', value_parser = parse_d)]
    pub d: u32,
    /// Integers one per line (`#` starts a comment), or a certificate JSON.
    pub file: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("quantity").args(["exact", "olson", "bound"])))]
pub struct DavenportArgs {
    /// Cyclic orders, e.g. `3^2`, `2,4`, `2,4^3`.
    pub group: String,
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub olson: bool,
    #[arg(long)]
    pub bound: bool,
}

#[derive(Debug, Args)]
pub struct PrimesArgs {
    /// Upper limit, or a range lo..hi of values to list.
    #[arg(short = 'N')]
    pub n: NRange,
}

fn parse_d(s: &str) -> Result<u32, String> {
    let d: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if d < 2 {
        return Err(format!("d must be at least 2, got {d}"));
    }
    Ok(d)
}

/// Inclusive range of N; a single value is `n..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub lo: u64,
    pub hi: u64,
}

impl NRange {
    pub fn is_single(&self) -> bool {
        self.lo == self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.lo..=self.hi
    }
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad N `{t}`: {e}"))
        };
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let n = num(s)?;
                (n, n)
            }
        };
        if lo == 0 {
            return Err("N must be at least 1".into());
        }
        if lo > hi {
            return Err(format!("empty range {lo}..{hi}"));
        }
        Ok(Self { lo, hi })
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse() {
        assert_eq!("7".parse::<NRange>().unwrap(), NRange { lo: 7, hi: 7 });
        assert_eq!("2..30".parse::<NRange>().unwrap(), NRange { lo: 2, hi: 30 });
        assert_eq!(
            "2..=30".parse::<NRange>().unwrap(),
            NRange { lo: 2, hi: 30 }
        );
        assert!("0".parse::<NRange>().is_err());
        assert!("9..3".parse::<NRange>().is_err());
        assert!("a..3".parse::<NRange>().is_err());
    }

    #[test]
    fn d_below_two_is_rejected() {
        assert!(Cli::try_parse_from(["powerfree", "bounds", "-d", "1", "-N", "10"]).is_err());
        assert!(Cli::try_parse_from(["powerfree", "bounds", "-d", "2", "-N", "10"]).is_ok());
    }

    #[test]
    fn davenport_quantities_are_exclusive() {
        let r = Cli::try_parse_from(["powerfree", "davenport", "3^2", "--exact", "--olson"]);
        assert!(r.is_err());
    }

    #[test]
    fn format_takes_one_value() {
        let r = Cli::try_parse_from(["powerfree", "primes", "-N", "9", "--format", "yaml"]);
        assert!(r.is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
