//! Exponent vectors mod d and zero-sum detection over Z_d^r.
//!
//! A product of distinct integers is a perfect d-th power exactly when their
//! exponent vectors (prime exponents reduced mod d) sum to zero, so every
//! question about d-th power products becomes a zero-sum question here.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{Factorization, PrimeTable};

/// Default cap on the number of distinct subset sums a closure may hold.
pub const DEFAULT_CLOSURE_CAP: usize = 10_000_000;

/// Sparse element of Z_d^r, keyed by prime.
///
/// Entries are `(prime, residue)` with primes strictly ascending and every
/// residue in `1..d`; zero coordinates are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExponentVector {
    modulus: u32,
    entries: Vec<(u64, u32)>,
}

impl ExponentVector {
    pub fn zero(modulus: u32) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        Self {
            modulus,
            entries: Vec::new(),
        }
    }

    /// Builds a vector from arbitrary `(prime, exponent)` pairs; exponents are
    /// reduced mod `modulus`, repeated primes are summed.
    pub fn from_exponents(
        modulus: u32,
        pairs: impl IntoIterator<Item = (u64, u64)>,
    ) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidArgument(format!(
                "modulus {modulus} must be at least 2"
            )));
        }
        let mut acc: BTreeMap<u64, u64> = BTreeMap::new();
        for (p, e) in pairs {
            let slot = acc.entry(p).or_default();
            *slot = (*slot + e % modulus as u64) % modulus as u64;
        }
        let entries = acc
            .into_iter()
            .filter(|&(_, r)| r != 0)
            .map(|(p, r)| (p, r as u32))
            .collect();
        Ok(Self { modulus, entries })
    }

    pub fn from_factorization(f: &Factorization, modulus: u32) -> Result<Self> {
        Self::from_exponents(modulus, f.factors.iter().map(|&(p, e)| (p, e as u64)))
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn entries(&self) -> &[(u64, u32)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Residue at coordinate `prime` (zero when absent).
    pub fn get(&self, prime: u64) -> u32 {
        self.entries
            .binary_search_by_key(&prime, |&(p, _)| p)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.modulus != other.modulus {
            return Err(Error::InvalidArgument(format!(
                "modulus mismatch: {} vs {}",
                self.modulus, other.modulus
            )));
        }
        Ok(self.add_unchecked(other))
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let d = self.modulus;
        let mut entries = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let a = self.entries.get(i);
            let b = other.entries.get(j);
            match (a, b) {
                (Some(&(p, r)), Some(&(q, s))) if p == q => {
                    let t = (r + s) % d;
                    if t != 0 {
                        entries.push((p, t));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(&(p, r)), Some(&(q, _))) if p < q => {
                    entries.push((p, r));
                    i += 1;
                }
                (Some(&(p, r)), None) => {
                    entries.push((p, r));
                    i += 1;
                }
                (_, Some(&(q, s))) => {
                    entries.push((q, s));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Self {
            modulus: d,
            entries,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            modulus: self.modulus,
            entries: self
                .entries
                .iter()
                .map(|&(p, r)| (p, self.modulus - r))
                .collect(),
        }
    }

    /// Order of the vector in Z_d^r: the least `k ≥ 1` with `k·v = 0`.
    pub fn order(&self) -> u32 {
        let d = self.modulus;
        self.entries
            .iter()
            .map(|&(_, r)| d / num_integer::gcd(d, r))
            .fold(1, num_integer::lcm)
    }
}

/// The exponent vector of `n` mod `d`.
pub fn to_vector(n: u64, d: u32, table: &PrimeTable) -> Result<ExponentVector> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "d = {d} must be at least 2"
        )));
    }
    ExponentVector::from_factorization(&table.factorize(n)?, d)
}

/// Labelled multiset of exponent vectors. Labels are the originating integers
/// and are pairwise distinct; vectors may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorMultiset {
    modulus: u32,
    items: Vec<(u64, ExponentVector)>,
}

impl VectorMultiset {
    pub fn new(modulus: u32) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        Self {
            modulus,
            items: Vec::new(),
        }
    }

    /// Exponent vectors of `labels`, which must be distinct positive integers.
    pub fn from_labels(labels: &[u64], d: u32, table: &PrimeTable) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!(
                "d = {d} must be at least 2"
            )));
        }
        let mut ms = Self::new(d);
        for &n in labels {
            ms.push(n, to_vector(n, d, table)?)?;
        }
        Ok(ms)
    }

    pub fn push(&mut self, label: u64, vector: ExponentVector) -> Result<()> {
        if vector.modulus != self.modulus {
            return Err(Error::InvalidArgument(format!(
                "vector modulus {} does not match multiset modulus {}",
                vector.modulus, self.modulus
            )));
        }
        if self.items.iter().any(|&(l, _)| l == label) {
            return Err(Error::InvalidArgument(format!("duplicate label {label}")));
        }
        self.items.push((label, vector));
        Ok(())
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn items(&self) -> &[(u64, ExponentVector)] {
        &self.items
    }

    pub fn labels(&self) -> Vec<u64> {
        self.items.iter().map(|&(l, _)| l).collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn sorted_by_label(&self) -> Vec<&(u64, ExponentVector)> {
        let mut items: Vec<_> = self.items.iter().collect();
        items.sort_by_key(|&&(l, _)| l);
        items
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroSumReport {
    pub has_zero_sum: bool,
    /// Labels of a non-empty sub-multiset summing to zero, ascending.
    pub witness: Option<Vec<u64>>,
}

/// All sums of non-empty sub-multisets of `ms`.
pub fn subset_sum_closure(ms: &VectorMultiset, cap: usize) -> Result<HashSet<ExponentVector>> {
    let mut closure: HashSet<ExponentVector> = HashSet::new();
    for (_, v) in ms.sorted_by_label() {
        let shifted: Vec<ExponentVector> = closure.iter().map(|s| s.add_unchecked(v)).collect();
        closure.insert(v.clone());
        closure.extend(shifted);
        if closure.len() > cap {
            return Err(Error::ResourceLimit {
                what: "subset-sum closure",
                cap,
            });
        }
    }
    Ok(closure)
}

pub fn find_zero_sum(ms: &VectorMultiset) -> Result<ZeroSumReport> {
    find_zero_sum_with_cap(ms, DEFAULT_CLOSURE_CAP)
}

/// Zero-sum search by incremental closure with predecessor links.
///
/// Items are inserted in ascending label order; the first zero sum reached is
/// reported.
pub fn find_zero_sum_with_cap(ms: &VectorMultiset, cap: usize) -> Result<ZeroSumReport> {
    struct Node {
        sum: ExponentVector,
        label: u64,
        pred: Option<usize>,
    }

    let mut nodes: Vec<Node> = Vec::new();
    let mut index: HashMap<ExponentVector, usize> = HashMap::new();

    let witness_from = |nodes: &[Node], mut at: Option<usize>, last: u64| {
        let mut labels = vec![last];
        while let Some(i) = at {
            labels.push(nodes[i].label);
            at = nodes[i].pred;
        }
        labels.sort_unstable();
        labels
    };

    for &(label, ref v) in ms.sorted_by_label() {
        if v.is_zero() {
            return Ok(ZeroSumReport {
                has_zero_sum: true,
                witness: Some(vec![label]),
            });
        }
        let before = nodes.len();
        for i in 0..before {
            let t = nodes[i].sum.add_unchecked(v);
            if t.is_zero() {
                return Ok(ZeroSumReport {
                    has_zero_sum: true,
                    witness: Some(witness_from(&nodes, Some(i), label)),
                });
            }
            if !index.contains_key(&t) {
                index.insert(t.clone(), nodes.len());
                nodes.push(Node {
                    sum: t,
                    label,
                    pred: Some(i),
                });
            }
        }
        if !index.contains_key(v) {
            index.insert(v.clone(), nodes.len());
            nodes.push(Node {
                sum: v.clone(),
                label,
                pred: None,
            });
        }
        if nodes.len() > cap {
            return Err(Error::ResourceLimit {
                what: "subset-sum closure",
                cap,
            });
        }
    }
    Ok(ZeroSumReport {
        has_zero_sum: false,
        witness: None,
    })
}

/// Whether some non-empty sub-multiset of `residues` sums to 0 mod `d`.
pub(crate) fn residues_admit_zero_sum(residues: impl IntoIterator<Item = u32>, d: u32) -> bool {
    let d = d as usize;
    let mut reach = vec![false; d];
    let mut next = vec![false; d];
    for r in residues {
        let r = r as usize % d;
        if r == 0 {
            return true;
        }
        next.copy_from_slice(&reach);
        next[r] = true;
        for (s, &hit) in reach.iter().enumerate() {
            if hit {
                next[(s + r) % d] = true;
            }
        }
        if next[0] {
            return true;
        }
        std::mem::swap(&mut reach, &mut next);
    }
    false
}

/// Drops elements that cannot take part in any zero sum.
///
/// For each prime coordinate, the non-zero residues held by the surviving
/// elements are collected. If no non-empty sub-multiset of them is 0 mod d,
/// no zero sum can use any of those elements, and they are all removed. This
/// repeats until nothing changes. `ms` has a zero sum iff the residual does.
///
/// Returns the residual multiset and the removed labels in ascending order.
pub fn eliminate(ms: &VectorMultiset) -> (VectorMultiset, Vec<u64>) {
    let d = ms.modulus;
    let mut alive = vec![true; ms.items.len()];
    loop {
        let mut by_prime: BTreeMap<u64, Vec<(usize, u32)>> = BTreeMap::new();
        for (i, (_, v)) in ms.items.iter().enumerate() {
            if alive[i] {
                for &(p, r) in &v.entries {
                    by_prime.entry(p).or_default().push((i, r));
                }
            }
        }
        let mut changed = false;
        for holders in by_prime.values() {
            // An earlier prime in this pass may already have removed some holders.
            let live: Vec<&(usize, u32)> = holders.iter().filter(|&&(i, _)| alive[i]).collect();
            if live.is_empty() {
                continue;
            }
            if !residues_admit_zero_sum(live.iter().map(|&&(_, r)| r), d) {
                for &&(i, _) in &live {
                    alive[i] = false;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut residual = VectorMultiset::new(d);
    let mut removed = Vec::new();
    for (i, item) in ms.items.iter().enumerate() {
        if alive[i] {
            residual.items.push(item.clone());
        } else {
            removed.push(item.0);
        }
    }
    removed.sort_unstable();
    (residual, removed)
}
