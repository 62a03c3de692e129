//! Explicit extremal sets reaching Σ_{k<d} π(N/k) for N ≥ 2^d·p_d.
//!
//! The set is a union of prime bands and small-prime gadgets:
//!
//! * band k (1 ≤ k ≤ d−2): `i·p` for primes `N/(k+1) < p ≤ N/k`, `1 ≤ i ≤ k`;
//! * last band: `i·p` for primes `p_d < p ≤ N/(d−1)`, `1 ≤ i ≤ d−1`;
//! * gadget s (2 ≤ s ≤ d): `2^j·p_s` for `j` in a d-element set of exponents
//!   from `[0, d]` whose sum is 1 mod d.
//!
//! Each band prime appears in at most d−1 elements, always to the first power,
//! so no d-th power product can touch a band element. A zero sum over gadgets
//! must use all d elements of each gadget it touches, and then the exponent of
//! 2 is u mod d for the number u of gadgets used, which is never 0.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bounds::{construction_threshold, main_term};
use crate::error::{Error, Result};
use crate::expvec::{eliminate, find_zero_sum, VectorMultiset};
use crate::primes::PrimeTable;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Band {
    pub k: u32,
    pub primes: Vec<u64>,
    pub elements: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gadget {
    /// One-based index of the prime: `prime = p_s`.
    pub s: u32,
    pub prime: u64,
    pub elements: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionCertificate {
    pub d: u32,
    pub n: u64,
    /// Bands k = 1..=d−2.
    pub bands: Vec<Band>,
    /// Band k = d−1, starting above p_d.
    pub last_band: Band,
    pub gadgets: Vec<Gadget>,
    pub j_set: Vec<u32>,
    pub full_set: Vec<u64>,
    pub claimed_size: u64,
    pub verified: bool,
}

/// Outcome of [`verify_certificate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub ok: bool,
    /// Labels whose product is a perfect d-th power, if any.
    pub witness: Option<Vec<u64>>,
    /// Structural invariants that failed.
    pub violations: Vec<String>,
}

/// `{0, …, d} \ {m}` for the least m ≡ d(d+1)/2 − 1 (mod d): d exponents in
/// `[0, d]`, strictly increasing, summing to 1 mod d.
pub fn choose_j_set(d: u32) -> Vec<u32> {
    assert!(d >= 2, "d must be at least 2");
    let d64 = d as u64;
    let m = ((d64 * (d64 + 1) / 2 + d64 - 1) % d64) as u32;
    (0..=d).filter(|&j| j != m).collect()
}

pub fn build(d: u32, n: u64, table: &PrimeTable) -> Result<ConstructionCertificate> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "d = {d} must be at least 2"
        )));
    }
    let threshold = construction_threshold(d).ok_or_else(|| {
        Error::InvalidArgument(format!("threshold 2^d·p_d overflows for d = {d}"))
    })?;
    if n < threshold {
        return Err(Error::ThresholdNotMet {
            n,
            min_n: threshold,
        });
    }
    if n > table.limit() {
        return Err(Error::OutOfRange {
            what: "N",
            value: n,
            limit: table.limit(),
        });
    }
    let p_d = table.nth_prime(d as usize)?;

    let band = |k: u32, primes: Vec<u64>| {
        let elements = primes
            .iter()
            .flat_map(|&p| (1..=k as u64).map(move |i| i * p))
            .collect();
        Band {
            k,
            primes,
            elements,
        }
    };

    let mut bands = Vec::new();
    for k in 1..d.saturating_sub(1) {
        let k64 = k as u64;
        let primes = table
            .primes()
            .iter()
            .copied()
            .filter(|&p| p * (k64 + 1) > n && p * k64 <= n)
            .collect();
        bands.push(band(k, primes));
    }
    let last_k = d - 1;
    let last_primes = table
        .primes()
        .iter()
        .copied()
        .filter(|&p| p > p_d && p * last_k as u64 <= n)
        .collect();
    let last_band = band(last_k, last_primes);

    let j_set = choose_j_set(d);
    let gadgets: Vec<Gadget> = (2..=d)
        .map(|s| {
            let prime = table.primes()[s as usize - 1];
            Gadget {
                s,
                prime,
                elements: j_set.iter().map(|&j| (1u64 << j) * prime).collect(),
            }
        })
        .collect();

    let mut cert = ConstructionCertificate {
        d,
        n,
        bands,
        last_band,
        gadgets,
        j_set,
        full_set: Vec::new(),
        claimed_size: main_term(d, n, table)?,
        verified: false,
    };
    cert.full_set = cert
        .parts()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(cert)
}

impl ConstructionCertificate {
    /// Every part's element list: bands, last band, then gadgets.
    pub fn parts(&self) -> impl Iterator<Item = &[u64]> {
        self.bands
            .iter()
            .map(|b| b.elements.as_slice())
            .chain(std::iter::once(self.last_band.elements.as_slice()))
            .chain(self.gadgets.iter().map(|g| g.elements.as_slice()))
    }

    /// Runs [`verify_certificate`] and records the verdict in `verified`.
    pub fn verify_in_place(&mut self, table: &PrimeTable) -> Result<Verification> {
        let v = verify_certificate(self, table)?;
        self.verified = v.ok;
        Ok(v)
    }
}

/// Checks the structural invariants and that no product of distinct elements
/// of `full_set` is a perfect d-th power.
pub fn verify_certificate(
    cert: &ConstructionCertificate,
    table: &PrimeTable,
) -> Result<Verification> {
    let d = cert.d;
    let n = cert.n;
    let mut violations = Vec::new();
    let mut fail = |msg: String| violations.push(msg);

    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "d = {d} must be at least 2"
        )));
    }
    if n > table.limit() {
        return Err(Error::OutOfRange {
            what: "N",
            value: n,
            limit: table.limit(),
        });
    }
    let p_d = table.nth_prime(d as usize)?;

    // Parts are disjoint and their union is the full set.
    let mut union = BTreeSet::new();
    let mut total = 0usize;
    for part in cert.parts() {
        total += part.len();
        union.extend(part.iter().copied());
    }
    if union.len() != total {
        fail("parts are not pairwise disjoint".into());
    }
    let union: Vec<u64> = union.into_iter().collect();
    if union != cert.full_set {
        fail("full_set is not the sorted union of the parts".into());
    }
    if let Some(&x) = cert.full_set.iter().find(|&&x| x == 0 || x > n) {
        fail(format!("element {x} lies outside [1, {n}]"));
    }
    if cert.full_set.windows(2).any(|w| w[0] >= w[1]) {
        fail("full_set is not strictly increasing".into());
    }

    let main = main_term(d, n, table)?;
    if cert.claimed_size != main {
        fail(format!(
            "claimed size {} differs from the main term {main}",
            cert.claimed_size
        ));
    }
    if cert.full_set.len() as u64 != cert.claimed_size {
        fail(format!(
            "set has {} elements but claims {}",
            cert.full_set.len(),
            cert.claimed_size
        ));
    }

    let j = &cert.j_set;
    if j.len() != d as usize
        || j.windows(2).any(|w| w[0] >= w[1])
        || j.iter().any(|&x| x > d)
        || j.iter().map(|&x| x as u64).sum::<u64>() % d as u64 != 1 % d as u64
    {
        fail(format!(
            "j-set {j:?} is not d increasing exponents in [0, d] summing to 1 mod d"
        ));
    }

    match construction_threshold(d) {
        Some(t) if t <= n => {}
        _ => fail(format!("N = {n} is below 2^d·p_d")),
    }

    if cert.gadgets.len() != d as usize - 1 {
        fail(format!(
            "expected {} gadgets, found {}",
            d - 1,
            cert.gadgets.len()
        ));
    }
    for g in &cert.gadgets {
        if table.primes().get(g.s as usize - 1) != Some(&g.prime) {
            fail(format!("gadget {} does not use p_{}", g.prime, g.s));
        }
        let expected: Vec<u64> = j.iter().map(|&t| (1u64 << t.min(63)) * g.prime).collect();
        if g.elements != expected || g.elements.len() != d as usize {
            fail(format!(
                "gadget for {} is not {{2^j·{}}} over the j-set",
                g.prime, g.prime
            ));
        }
        // Band elements i·p with i < d may also be multiples of p_s; the
        // argument only needs the gadget-side count.
        let multiples = cert
            .gadgets
            .iter()
            .flat_map(|h| &h.elements)
            .filter(|&&x| x % g.prime == 0)
            .count();
        if multiples != d as usize {
            fail(format!(
                "{} has {multiples} multiples among the gadgets, expected {d}",
                g.prime
            ));
        }
        for &x in &g.elements {
            let f = table.factorize(x)?;
            if f.largest_prime().is_some_and(|p| p > p_d) {
                fail(format!("gadget element {x} has a prime factor above {p_d}"));
            }
        }
    }
    for b in cert.bands.iter().chain(std::iter::once(&cert.last_band)) {
        for &x in &b.elements {
            let f = table.factorize(x)?;
            if !f.largest_prime().is_some_and(|p| p > p_d) {
                fail(format!("band element {x} has no prime factor above {p_d}"));
            }
        }
    }

    let ms = VectorMultiset::from_labels(&cert.full_set, d, table)?;
    let (residual, _) = eliminate(&ms);
    let report = find_zero_sum(&residual)?;

    let ok = violations.is_empty() && !report.has_zero_sum;
    Ok(Verification {
        ok,
        witness: report.witness,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intcheck::is_power_product;

    fn t() -> PrimeTable {
        PrimeTable::new(2000).unwrap()
    }

    #[test]
    fn j_sets() {
        assert_eq!(choose_j_set(2), vec![1, 2]);
        assert_eq!(choose_j_set(3), vec![0, 1, 3]);
        assert_eq!(choose_j_set(5), vec![0, 1, 2, 3, 5]);
        for d in 2..40u32 {
            let j = choose_j_set(d);
            assert_eq!(j.len(), d as usize);
            assert!(j.windows(2).all(|w| w[0] < w[1]));
            assert!(*j.last().unwrap() <= d);
            assert_eq!(j.iter().sum::<u32>() % d, 1 % d);
        }
    }

    #[test]
    fn build_d2_n12() {
        let t = t();
        let c = build(2, 12, &t).unwrap();
        assert!(c.bands.is_empty());
        assert_eq!(c.last_band.elements, vec![5, 7, 11]);
        assert_eq!(c.gadgets[0].elements, vec![6, 12]);
        assert_eq!(c.full_set, vec![5, 6, 7, 11, 12]);
        assert_eq!(c.claimed_size, 5);
        assert!(verify_certificate(&c, &t).unwrap().ok);
    }

    #[test]
    fn build_d3_n40() {
        let t = t();
        let mut c = build(3, 40, &t).unwrap();
        assert_eq!(c.bands[0].elements, vec![23, 29, 31, 37]);
        let mut a2 = c.last_band.elements.clone();
        a2.sort_unstable();
        assert_eq!(a2, vec![7, 11, 13, 14, 17, 19, 22, 26, 34, 38]);
        assert_eq!(c.gadgets[0].elements, vec![3, 6, 24]);
        assert_eq!(c.gadgets[1].elements, vec![5, 10, 40]);
        assert_eq!(c.full_set.len(), 20);
        assert_eq!(c.claimed_size, 20);
        assert!(!c.verified);
        assert!(c.verify_in_place(&t).unwrap().ok);
        assert!(c.verified);
    }

    #[test]
    fn below_threshold() {
        let t = t();
        assert_eq!(
            build(3, 39, &t).unwrap_err(),
            Error::ThresholdNotMet { n: 39, min_n: 40 }
        );
    }

    #[test]
    fn table_too_small() {
        let t = PrimeTable::new(30).unwrap();
        assert!(matches!(build(3, 40, &t), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn corrupted_certificate_is_rejected() {
        let t = t();
        let mut c = build(3, 40, &t).unwrap();
        let band = &mut c.bands[0].elements;
        let pos = band.iter().position(|&x| x == 37).unwrap();
        band[pos] = 36;
        c.full_set = c
            .parts()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let v = verify_certificate(&c, &t).unwrap();
        assert!(!v.ok);
        let w = v.witness.expect("36 = 6^2 closes a cube with the gadgets");
        assert!(is_power_product(&w, 3));
    }

    #[test]
    fn tampered_size_is_a_violation() {
        let t = t();
        let mut c = build(2, 12, &t).unwrap();
        c.claimed_size = 6;
        let v = verify_certificate(&c, &t).unwrap();
        assert!(!v.ok);
        assert!(v.witness.is_none());
        assert!(!v.violations.is_empty());
    }
}
