//! Direct integer checks, independent of the exponent-vector reduction.

use num_bigint::BigUint;
use num_traits::One;

pub fn product(labels: &[u64]) -> BigUint {
    labels
        .iter()
        .fold(BigUint::one(), |acc, &n| acc * BigUint::from(n))
}

/// Exact integer d-th root of `value`, if `value` is a perfect d-th power.
pub fn exact_root(value: &BigUint, d: u32) -> Option<BigUint> {
    let root = value.nth_root(d);
    (root.pow(d) == *value).then_some(root)
}

/// Whether the product of `labels` is a perfect d-th power.
pub fn is_power_product(labels: &[u64], d: u32) -> bool {
    exact_root(&product(labels), d).is_some()
}
