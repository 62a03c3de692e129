//! Brute-force references shared by the test suites. Nothing here touches
//! the library, so these can check it.

#![allow(dead_code)]

use num_bigint::BigUint;

fn exact_root(value: &BigUint, d: u32) -> Option<BigUint> {
    let root = value.nth_root(d);
    (root.pow(d) == *value).then_some(root)
}

/// ρ_d(N) by enumerating all 2^N subsets of [N].
///
/// A subset is bad when its own product is a perfect d-th power or one of its
/// one-smaller subsets is bad; the answer is the largest good subset. Products
/// are exact big integers.
pub fn naive_rho(d: u32, n: u32) -> (usize, Vec<u64>) {
    assert!(n <= 20, "naive enumeration is exponential in N");
    let size = 1usize << n;
    let mut product = vec![BigUint::from(1u32); size];
    let mut bad = vec![false; size];
    let mut best = (0usize, 0usize);
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        product[mask] = &product[mask & (mask - 1)] * BigUint::from(low as u64 + 1);
        let mut is_bad = exact_root(&product[mask], d).is_some();
        let mut rest = mask;
        while !is_bad && rest != 0 {
            let bit = rest & rest.wrapping_neg();
            is_bad = bad[mask ^ bit];
            rest ^= bit;
        }
        bad[mask] = is_bad;
        let count = mask.count_ones() as usize;
        if !is_bad && count > best.0 {
            best = (count, mask);
        }
    }
    let witness = (0..n as usize)
        .filter(|i| best.1 >> i & 1 == 1)
        .map(|i| i as u64 + 1)
        .collect();
    (best.0, witness)
}

/// Exponents of `n` over the primes `2..=max_prime`, by trial division.
pub fn dense_exponents(n: u64, primes: &[u64]) -> Vec<u32> {
    let mut rest = n;
    let out = primes
        .iter()
        .map(|&p| {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            e
        })
        .collect();
    assert_eq!(rest, 1, "{n} has a prime factor outside the list");
    out
}

pub fn primes_up_to(limit: u64) -> Vec<u64> {
    (2..=limit)
        .filter(|&n| (2..n).take_while(|k| k * k <= n).all(|k| n % k != 0))
        .collect()
}

/// Some non-empty subset of `labels` whose product is a perfect d-th power,
/// found by walking all 2^k subsets and summing exponents mod d.
pub fn exhaustive_zero_sum(labels: &[u64], d: u32) -> Option<Vec<u64>> {
    assert!(labels.len() <= 24);
    let max = labels.iter().copied().max().unwrap_or(1);
    let primes = primes_up_to(max);
    let vectors: Vec<Vec<u32>> = labels
        .iter()
        .map(|&l| dense_exponents(l, &primes))
        .collect();
    let k = labels.len();
    let mut sums = vec![vec![0u32; primes.len()]; 1 << k];
    for mask in 1usize..1 << k {
        let low = mask.trailing_zeros() as usize;
        let prev = mask & (mask - 1);
        let next: Vec<u32> = sums[prev]
            .iter()
            .zip(&vectors[low])
            .map(|(&a, &b)| (a + b) % d)
            .collect();
        if next.iter().all(|&x| x == 0) {
            return Some(
                (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| labels[i])
                    .collect(),
            );
        }
        sums[mask] = next;
    }
    None
}

/// Rank over F_2 of the exponent vectors of `labels`, by Gaussian elimination.
pub fn gf2_rank(labels: &[u64]) -> usize {
    let max = labels.iter().copied().max().unwrap_or(1);
    let primes = primes_up_to(max);
    assert!(primes.len() <= 128);
    let mut rows: Vec<u128> = labels
        .iter()
        .map(|&l| {
            dense_exponents(l, &primes)
                .iter()
                .enumerate()
                .fold(0u128, |acc, (i, &e)| acc | ((e as u128 & 1) << i))
        })
        .collect();
    let mut rank = 0;
    for bit in 0..128 {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r] >> bit & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}
