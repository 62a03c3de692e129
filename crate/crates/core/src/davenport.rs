//! Davenport constants of finite abelian groups.
//!
//! Three routes are provided: Olson's closed form for p-groups, the general
//! upper bound `D(G) ≤ exp(G)·(1 + ln(|G|/exp(G)))`, and an exhaustive search
//! for small groups that serves as an oracle for the other two.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Closure, DenseGroup};
use crate::primes::prime_power;

/// Largest group order accepted by [`davenport_exact`].
pub const EXACT_MAX_ORDER: u64 = 4096;

/// The group ⊕ Z_{n_i}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    components: Vec<u64>,
}

impl GroupSpec {
    pub fn new(components: Vec<u64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument(
                "group needs at least one component".into(),
            ));
        }
        if let Some(&n) = components.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidArgument(format!(
                "cyclic component Z_{n} must have order at least 2"
            )));
        }
        Ok(Self { components })
    }

    /// Z_d^r.
    pub fn power(d: u64, r: usize) -> Result<Self> {
        Self::new(vec![d; r])
    }

    pub fn components(&self) -> &[u64] {
        &self.components
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    /// |G|, or `None` on overflow.
    pub fn order(&self) -> Option<u64> {
        self.components
            .iter()
            .try_fold(1u64, |acc, &n| acc.checked_mul(n))
    }

    /// exp(G) = lcm of the component orders.
    pub fn exponent(&self) -> u64 {
        self.components
            .iter()
            .fold(1, |acc, &n| num_integer::lcm(acc, n))
    }

    /// ln |G|, finite even when |G| overflows.
    pub fn ln_order(&self) -> f64 {
        self.components.iter().map(|&n| (n as f64).ln()).sum()
    }

    /// The common prime when G is a p-group.
    pub fn p_group_prime(&self) -> Option<u64> {
        let mut prime = None;
        for &n in &self.components {
            let (p, _) = prime_power(n)?;
            match prime {
                None => prime = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        prime
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        while i < self.components.len() {
            let n = self.components[i];
            let run = self.components[i..].iter().take_while(|&&m| m == n).count();
            if !first {
                f.write_str(",")?;
            }
            first = false;
            if run > 1 {
                write!(f, "{n}^{run}")?;
            } else {
                write!(f, "{n}")?;
            }
            i += run;
        }
        Ok(())
    }
}

/// Parses `"3^2"`, `"2,4"`, `"2,4^3"`: comma-separated cyclic orders, with
/// `n^k` meaning k copies of Z_n.
impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse group spec {s:?}"));
        let mut components = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            let (base, reps) = match part.split_once('^') {
                Some((b, r)) => (b.trim(), r.trim().parse::<usize>().map_err(|_| bad())?),
                None => (part, 1),
            };
            let n: u64 = base.parse().map_err(|_| bad())?;
            if reps == 0 {
                return Err(bad());
            }
            components.extend(std::iter::repeat_n(n, reps));
        }
        Self::new(components)
    }
}

/// Olson: D(G) = 1 + Σ (n_i − 1) for a p-group G = ⊕ Z_{n_i}.
pub fn olson_davenport(spec: &GroupSpec) -> Result<u64> {
    if spec.p_group_prime().is_none() {
        return Err(Error::NotApplicable(format!(
            "{spec} is not a p-group; Olson's formula does not apply"
        )));
    }
    Ok(1 + spec.components.iter().map(|&n| n - 1).sum::<u64>())
}

/// exp(G)·(1 + ln(|G|/exp(G))), before flooring.
pub fn davenport_upper_bound_real(spec: &GroupSpec) -> f64 {
    let e = spec.exponent() as f64;
    e * (1.0 + (spec.ln_order() - e.ln()))
}

/// ⌊exp(G)·(1 + ln(|G|/exp(G)))⌋, a valid bound since D(G) is an integer.
pub fn davenport_upper_bound(spec: &GroupSpec) -> u64 {
    // Guard against values like 4.999999 that should be 5.
    (davenport_upper_bound_real(spec) + 1e-9).floor() as u64
}

/// Result of an exhaustive Davenport computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactDavenport {
    pub value: u64,
    /// A longest zero-sum-free sequence, as coordinate tuples.
    pub longest: Vec<Vec<u32>>,
    pub nodes: u64,
}

/// Exhaustive D(G) = 1 + (longest zero-sum-free sequence length).
///
/// Depth-first over non-decreasing sequences of non-zero elements under
/// lexicographic order. A branch dies once −g lies in the closure of the
/// current sequence. Each new element of a zero-sum-free sequence enlarges the
/// closure by at least one, so a sequence with closure Σ extends by at most
/// `|G| − 1 − |Σ|` more elements; that is the pruning bound.
pub fn davenport_exact(spec: &GroupSpec, budget: u64) -> Result<ExactDavenport> {
    run_exact(spec, budget, false)
}

/// [`davenport_exact`] with the first-element branches spread over rayon's pool.
/// The value is the same as the sequential search.
pub fn davenport_exact_parallel(spec: &GroupSpec, budget: u64) -> Result<ExactDavenport> {
    run_exact(spec, budget, true)
}

struct ExactSearch<'a> {
    group: &'a DenseGroup,
    budget: u64,
    nodes: &'a AtomicU64,
    best: &'a AtomicUsize,
}

impl ExactSearch<'_> {
    /// Returns the longest zero-sum-free extension found below this node that
    /// beats the shared best, or `None`.
    fn dfs(
        &self,
        start: usize,
        closure: &Closure,
        seq: &mut Vec<usize>,
    ) -> std::result::Result<Option<Vec<usize>>, ()> {
        let mut found = None;
        let order = self.group.order();
        for g in start..order {
            if closure.contains(self.group.neg(g)) {
                continue;
            }
            if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
                return Err(());
            }
            let next = closure.extended(self.group, g);
            let depth = seq.len() + 1;
            let reachable = depth + (order - 1 - next.len());
            if reachable <= self.best.load(Ordering::Relaxed) {
                continue;
            }
            seq.push(g);
            if depth > self.best.fetch_max(depth, Ordering::Relaxed) {
                found = Some(seq.clone());
            }
            if let Some(longer) = self.dfs(g, &next, seq)? {
                found = Some(longer);
            }
            seq.pop();
        }
        Ok(found)
    }
}

fn run_exact(spec: &GroupSpec, budget: u64, parallel: bool) -> Result<ExactDavenport> {
    let order = spec
        .order()
        .filter(|&o| o <= EXACT_MAX_ORDER)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{spec} is too large for exhaustive search (|G| ≤ {EXACT_MAX_ORDER})"
            ))
        })?;
    let radices: Vec<u32> = spec.components.iter().map(|&n| n as u32).collect();
    let group = DenseGroup::new(&radices);
    let nodes = AtomicU64::new(0);
    let best = AtomicUsize::new(0);
    let search = ExactSearch {
        group: &group,
        budget,
        nodes: &nodes,
        best: &best,
    };
    let empty = Closure::empty(order as usize);

    let outcome: std::result::Result<Option<Vec<usize>>, ()> = if parallel {
        (1..order as usize)
            .into_par_iter()
            .map(|g| {
                nodes.fetch_add(1, Ordering::Relaxed);
                let mut seq = vec![g];
                let closure = empty.extended(&group, g);
                let mut found = (1 > best.fetch_max(1, Ordering::Relaxed)).then(|| seq.clone());
                if let Some(longer) = search.dfs(g, &closure, &mut seq)? {
                    found = Some(longer);
                }
                Ok(found)
            })
            .collect::<std::result::Result<Vec<_>, ()>>()
            .map(|branches| branches.into_iter().flatten().max_by_key(Vec::len))
    } else {
        search.dfs(1, &empty, &mut Vec::new())
    };

    match outcome {
        Ok(found) => {
            let longest = found.unwrap_or_default();
            debug_assert_eq!(longest.len(), best.load(Ordering::Relaxed));
            Ok(ExactDavenport {
                value: longest.len() as u64 + 1,
                longest: longest.iter().map(|&g| group.coords(g).to_vec()).collect(),
                nodes: nodes.load(Ordering::Relaxed),
            })
        }
        Err(()) => Err(Error::BudgetExhausted {
            budget,
            lower: best.load(Ordering::Relaxed) + 1,
            upper: davenport_upper_bound(spec) as usize,
            incumbent: Vec::new(),
        }),
    }
}

/// D(Z_d^r): Olson's value when d is a prime power, otherwise the floored
/// general bound. The flag is `true` when the value is exact.
pub fn davenport_power(d: u64, r: usize) -> (u64, bool) {
    if r == 0 {
        // Trivial group: any single element is already zero.
        return (1, true);
    }
    if prime_power(d).is_some() {
        (1 + r as u64 * (d - 1), true)
    } else {
        let spec = GroupSpec::power(d, r).expect("d ≥ 2, r ≥ 1");
        (davenport_upper_bound(&spec), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GroupSpec {
        s.parse().unwrap()
    }

    #[test]
    fn parse_specs() {
        assert_eq!(g("3^2").components(), &[3, 3]);
        assert_eq!(g("2,4").components(), &[2, 4]);
        assert_eq!(g("2, 4^2").components(), &[2, 4, 4]);
        assert_eq!(g("6").components(), &[6]);
        assert!("".parse::<GroupSpec>().is_err());
        assert!("1".parse::<GroupSpec>().is_err());
        assert!("3^0".parse::<GroupSpec>().is_err());
        assert!("x".parse::<GroupSpec>().is_err());
        assert_eq!(g("2,4^2").to_string(), "2,4^2");
        assert_eq!(g("3^6").to_string(), "3^6");
    }

    #[test]
    fn order_and_exponent() {
        let s = g("2,4,6");
        assert_eq!(s.order(), Some(48));
        assert_eq!(s.exponent(), 12);
        assert_eq!(GroupSpec::power(3, 100).unwrap().order(), None);
    }

    #[test]
    fn olson_examples() {
        assert_eq!(olson_davenport(&g("2")).unwrap(), 2);
        assert_eq!(olson_davenport(&g("3^2")).unwrap(), 5);
        assert_eq!(olson_davenport(&g("3^6")).unwrap(), 13);
        assert_eq!(olson_davenport(&g("2,4,8")).unwrap(), 12);
        assert!(matches!(
            olson_davenport(&g("6")),
            Err(Error::NotApplicable(_))
        ));
        assert!(matches!(
            olson_davenport(&g("2,3")),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(davenport_upper_bound(&g("5")), 5);
        assert_eq!(davenport_upper_bound(&g("6^2")), 16);
        assert_eq!(davenport_upper_bound(&g("3^2")), 6);
        let real = davenport_upper_bound_real(&g("6^2"));
        assert!((real - 6.0 * (1.0 + 6f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn exact_examples() {
        assert_eq!(davenport_exact(&g("2^2"), 1_000_000).unwrap().value, 3);
        assert_eq!(davenport_exact(&g("4"), 1_000_000).unwrap().value, 4);
        assert_eq!(davenport_exact(&g("3^2"), 1_000_000).unwrap().value, 5);
        assert_eq!(davenport_exact(&g("2"), 10).unwrap().value, 2);
    }

    #[test]
    fn exact_witness_is_zero_sum_free() {
        let spec = g("2,4");
        let r = davenport_exact(&spec, 1_000_000).unwrap();
        assert_eq!(r.longest.len() as u64, r.value - 1);
        // Brute-force every non-empty subsequence.
        let n = r.longest.len();
        for mask in 1u32..(1 << n) {
            let mut sum = [0u32; 2];
            for (i, c) in r.longest.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sum[0] = (sum[0] + c[0]) % 2;
                    sum[1] = (sum[1] + c[1]) % 4;
                }
            }
            assert_ne!(sum, [0, 0]);
        }
    }

    #[test]
    fn exact_budget() {
        let err = davenport_exact(&g("3^2"), 3).unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted { budget: 3, .. }));
    }

    #[test]
    fn exact_rejects_large_groups() {
        assert!(davenport_exact(&g("2^13"), u64::MAX).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        for s in ["2^3", "3^2", "9", "2,4", "6"] {
            let a = davenport_exact(&g(s), u64::MAX).unwrap().value;
            let b = davenport_exact_parallel(&g(s), u64::MAX).unwrap().value;
            assert_eq!(a, b, "{s}");
        }
    }

    #[test]
    fn power_helper() {
        assert_eq!(davenport_power(3, 6), (13, true));
        assert_eq!(davenport_power(4, 6), (19, true));
        assert_eq!(davenport_power(5, 0), (1, true));
        let (v, exact) = davenport_power(6, 2);
        assert_eq!((v, exact), (16, false));
    }
}
