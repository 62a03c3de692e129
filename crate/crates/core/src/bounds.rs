//! Closed-form quantities: the main term Σ_{k<d} π(N/k), the Davenport-based
//! upper bounds on ρ_d(N), and the exact value for prime-power d above the
//! construction threshold.
//!
//! π over a rational argument N/k is always π(⌊N/k⌋), and √N is ⌊√N⌋.

use serde::{Deserialize, Serialize};

use crate::davenport::{davenport_power, davenport_upper_bound_real, GroupSpec};
use crate::error::{Error, Result};
use crate::primes::{isqrt, prime_power, PrimeTable};

fn check_d(d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "d = {d} must be at least 2"
        )));
    }
    Ok(())
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    Ok(())
}

/// Σ_{k=1}^{d−1} π(⌊N/k⌋).
pub fn main_term(d: u32, n: u64, table: &PrimeTable) -> Result<u64> {
    check_d(d)?;
    check_n(n)?;
    (1..d as u64).try_fold(0u64, |acc, k| Ok(acc + table.pi(n / k)? as u64))
}

/// Rank of the group the Davenport argument runs in for the N/d-smooth part.
pub fn smooth_rank(d: u32, n: u64, table: &PrimeTable) -> Result<usize> {
    table.pi(n / d as u64)
}

/// Rank of the group for the √N-smooth part.
pub fn sqrt_rank(n: u64, table: &PrimeTable) -> Result<usize> {
    table.pi(isqrt(n))
}

/// main + D(Z_d^r) − (d−1)·r − 1 with r = π(⌊N/d⌋).
///
/// D is exact for prime-power d; otherwise the general bound stands in and
/// the result is still an upper bound on ρ_d(N).
pub fn thm4_upper(d: u32, n: u64, table: &PrimeTable) -> Result<u64> {
    let main = main_term(d, n, table)?;
    let r = smooth_rank(d, n, table)? as u64;
    let (dav, _) = davenport_power(d as u64, r as usize);
    let excess = dav - (d as u64 - 1) * r - 1;
    Ok(main + excess)
}

/// main + d·D(Z_d^r) with r = π(⌊√N⌋).
pub fn thm5_upper(d: u32, n: u64, table: &PrimeTable) -> Result<u64> {
    let main = main_term(d, n, table)?;
    let (dav, _) = davenport_power(d as u64, sqrt_rank(n, table)?);
    Ok(main + d as u64 * dav)
}

/// main + d·(D(Z_d^r) − 1), the sharper form the zero-sum count actually gives.
pub fn thm5_upper_tight(d: u32, n: u64, table: &PrimeTable) -> Result<u64> {
    let main = main_term(d, n, table)?;
    let (dav, _) = davenport_power(d as u64, sqrt_rank(n, table)?);
    Ok(main + d as u64 * (dav - 1))
}

/// main + d·ln(d)·π(⌊√N⌋), returned floored and unfloored.
pub fn corollary_upper(d: u32, n: u64, table: &PrimeTable) -> Result<(u64, f64)> {
    let main = main_term(d, n, table)?;
    let r = sqrt_rank(n, table)?;
    let real = main as f64 + d as f64 * (d as f64).ln() * r as f64;
    Ok((floor(real), real))
}

/// main + d·B(Z_d^r) with B the general Davenport bound and r = π(⌊√N⌋);
/// this is what the d·D(Z_d^r) bound becomes once B replaces D.
pub fn corollary_derived_upper(d: u32, n: u64, table: &PrimeTable) -> Result<(u64, f64)> {
    let main = main_term(d, n, table)?;
    let r = sqrt_rank(n, table)?;
    let bound = if r == 0 {
        1.0
    } else {
        davenport_upper_bound_real(&GroupSpec::power(d as u64, r)?)
    };
    let real = main as f64 + d as f64 * bound;
    Ok((floor(real), real))
}

fn floor(x: f64) -> u64 {
    (x + 1e-9).floor() as u64
}

/// `(Σ_{k=1}^{d−1} π(⌊(2d−2)/k⌋), Σ_{n≤2d−2} ω(n))`; the two sides agree.
pub fn remark_identity_lhs_rhs(d: u32, table: &PrimeTable) -> Result<(u64, u64)> {
    check_d(d)?;
    let m = 2 * d as u64 - 2;
    let lhs = main_term(d, m, table)?;
    let rhs = (1..=m).try_fold(0u64, |acc, k| Ok::<_, Error>(acc + table.omega(k)? as u64))?;
    Ok((lhs, rhs))
}

/// Whether Σ_{k=1}^{d−1} π(⌊(2d−2)/k⌋) ≥ 2d − 2. Only claimed for d ≥ 4.
pub fn remark_inequality(d: u32, table: &PrimeTable) -> Result<bool> {
    if d < 4 {
        return Err(Error::InvalidArgument(format!(
            "inequality is stated for d ≥ 4, got d = {d}"
        )));
    }
    let m = 2 * d as u64 - 2;
    Ok(main_term(d, m, table)? >= m)
}

/// The d-th prime, by trial division.
pub fn nth_prime(d: u32) -> u64 {
    let mut count = 0;
    let mut n = 1u64;
    while count < d {
        n += 1;
        if (2..)
            .take_while(|k| k * k <= n)
            .all(|k| !n.is_multiple_of(k))
        {
            count += 1;
        }
    }
    n
}

/// 2^d·p_d, the smallest N for which the explicit construction fits in [N];
/// `None` if it overflows u64.
pub fn construction_threshold(d: u32) -> Option<u64> {
    if d == 0 {
        return None;
    }
    1u64.checked_shl(d)?.checked_mul(nth_prime(d))
}

/// The exact value main_term(d, N), when d is a prime power and N ≥ 2^d·p_d.
pub fn exact_value_if_applicable(d: u32, n: u64, table: &PrimeTable) -> Result<Option<u64>> {
    check_d(d)?;
    let applies =
        prime_power(d as u64).is_some() && construction_threshold(d).is_some_and(|t| n >= t);
    if applies {
        main_term(d, n, table).map(Some)
    } else {
        Ok(None)
    }
}

/// Every closed-form quantity for one `(d, N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub d: u32,
    pub n: u64,
    pub main_term: u64,
    pub thm4_upper: u64,
    pub thm5_upper: u64,
    pub thm5_upper_tight: u64,
    pub corollary_upper: u64,
    pub corollary_upper_real: f64,
    pub corollary_derived_upper: u64,
    pub corollary_derived_real: f64,
    pub is_prime_power_d: bool,
    /// Set when D(Z_d^r) was replaced by its general upper bound, so the
    /// Davenport-based figures are bounds of bounds.
    pub bound_of_a_bound: bool,
    /// Set when the printed corollary term is smaller than the derived one.
    pub corollary_discrepancy: bool,
    pub exact_claimed: Option<u64>,
    pub threshold: Option<u64>,
}

impl BoundReport {
    pub fn compute(d: u32, n: u64, table: &PrimeTable) -> Result<Self> {
        let main = main_term(d, n, table)?;
        let is_prime_power_d = prime_power(d as u64).is_some();
        let (corollary_upper, corollary_upper_real) = corollary_upper(d, n, table)?;
        let (corollary_derived_upper, corollary_derived_real) =
            corollary_derived_upper(d, n, table)?;
        Ok(Self {
            d,
            n,
            main_term: main,
            thm4_upper: thm4_upper(d, n, table)?,
            thm5_upper: thm5_upper(d, n, table)?,
            thm5_upper_tight: thm5_upper_tight(d, n, table)?,
            corollary_upper,
            corollary_upper_real,
            corollary_derived_upper,
            corollary_derived_real,
            is_prime_power_d,
            bound_of_a_bound: !is_prime_power_d,
            corollary_discrepancy: corollary_upper_real < corollary_derived_real,
            exact_claimed: exact_value_if_applicable(d, n, table)?,
            threshold: construction_threshold(d),
        })
    }
}
