//! Prime sieve, prime counting, and trial-division factorization.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Sieve of Eratosthenes over `1..=limit` with a prefix-count table.
///
/// Immutable after construction, so a single table can be shared across threads.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    is_prime: Vec<bool>,
    primes: Vec<u64>,
    pi_cache: Vec<u32>,
}

/// Canonical factorization: `(prime, exponent)` pairs, primes strictly ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub value: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn product(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }

    pub fn largest_prime(&self) -> Option<u64> {
        self.factors.last().map(|&(p, _)| p)
    }
}

impl PrimeTable {
    pub fn new(limit: u64) -> Result<Self> {
        if limit == 0 {
            return Err(Error::InvalidArgument(
                "sieve limit must be at least 1".into(),
            ));
        }
        let size = usize::try_from(limit)
            .ok()
            .and_then(|l| l.checked_add(1))
            .ok_or_else(|| Error::InvalidArgument(format!("sieve limit {limit} too large")))?;

        let mut is_prime = vec![true; size];
        is_prime[0] = false;
        is_prime[1] = false;
        let mut i = 2usize;
        while i * i < size {
            if is_prime[i] {
                let mut j = i * i;
                while j < size {
                    is_prime[j] = false;
                    j += i;
                }
            }
            i += 1;
        }

        let mut primes = Vec::new();
        let mut pi_cache = Vec::with_capacity(size);
        let mut count = 0u32;
        for (n, &flag) in is_prime.iter().enumerate() {
            if flag {
                count += 1;
                primes.push(n as u64);
            }
            pi_cache.push(count);
        }

        Ok(Self {
            limit,
            is_prime,
            primes,
            pi_cache,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// All primes up to the limit, ascending.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n, "n")?;
        Ok(self.is_prime[n as usize])
    }

    /// π(n), the number of primes ≤ n.
    pub fn pi(&self, n: u64) -> Result<usize> {
        self.check(n, "n")?;
        Ok(self.pi_cache[n as usize] as usize)
    }

    /// The d-th prime, one-based: `nth_prime(1) == 2`.
    pub fn nth_prime(&self, d: usize) -> Result<u64> {
        if d == 0 {
            return Err(Error::InvalidArgument("prime index is one-based".into()));
        }
        self.primes.get(d - 1).copied().ok_or(Error::OutOfRange {
            what: "prime index",
            value: d as u64,
            limit: self.primes.len() as u64,
        })
    }

    /// Zero-based position of `p` in [`primes`](Self::primes), if `p` is a tabulated prime.
    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok()
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 {
            return Err(Error::InvalidArgument("cannot factor 0".into()));
        }
        let mut factors = Vec::new();
        let mut rest = n;
        for &p in &self.primes {
            if p.saturating_mul(p) > rest {
                break;
            }
            if rest.is_multiple_of(p) {
                let mut e = 0;
                while rest.is_multiple_of(p) {
                    rest /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
        }
        if rest > 1 {
            // Every prime up to √rest ≤ limit has been divided out, so `rest` is prime.
            if rest > self.limit {
                return Err(Error::IncompleteTable {
                    value: n,
                    limit: self.limit,
                });
            }
            factors.push((rest, 1));
        }
        Ok(Factorization { value: n, factors })
    }

    /// ω(n), the number of distinct prime divisors.
    pub fn omega(&self, n: u64) -> Result<usize> {
        Ok(self.factorize(n)?.factors.len())
    }

    fn check(&self, n: u64, what: &'static str) -> Result<()> {
        if n > self.limit {
            Err(Error::OutOfRange {
                what,
                value: n,
                limit: self.limit,
            })
        } else {
            Ok(())
        }
    }
}

/// Returns `(p, e)` with `n = p^e` when `n` is a prime power, `e ≥ 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            break;
        }
        p += 1;
    }
    if p * p > n {
        return Some((n, 1));
    }
    let mut rest = n;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// Integer square root ⌊√n⌋.
pub fn isqrt(n: u64) -> u64 {
    num_integer::Roots::sqrt(&n)
}
