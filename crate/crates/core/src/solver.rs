//! Exact ρ_d(N) by branch and bound.
//!
//! The search runs over the candidates 2..=N whose exponent vector mod d is
//! non-zero (1 and perfect d-th powers can never be chosen). First, the
//! candidates that [`eliminate`] removes are forced into the answer: no
//! zero sum over any subset of candidates can use them. The rest, usually
//! the N/d-smooth numbers, are encoded densely in Z_d^r and grouped into
//! classes of equal vectors. A node keeps the subset-sum closure of its chosen
//! vectors as a bitset; a copy of `g` may be added iff `−g` is not in it.
//!
//! The bound at a node counts, per remaining class, how many copies could
//! still go in, capped by D(Z_d^r) − 1 and by the closed-form upper bound.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{construction_threshold, thm4_upper};
use crate::construction;
use crate::davenport::davenport_power;
use crate::error::{Error, Result};
use crate::expvec::{eliminate, to_vector, VectorMultiset, DEFAULT_CLOSURE_CAP};
use crate::group::{Closure, DenseGroup};
use crate::primes::PrimeTable;

/// Largest N solved without an explicit override: 60 for d ≤ 3, 40 otherwise.
pub fn desk_scale_limit(d: u32) -> u64 {
    if d <= 3 {
        60
    } else {
        40
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Maximum number of search nodes.
    pub budget: u64,
    /// Worker threads; 1 runs the plain sequential search.
    pub threads: usize,
    /// Overrides [`desk_scale_limit`] when set.
    pub max_n: Option<u64>,
    /// Largest dense group the residual search may use.
    pub group_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            budget: 50_000_000,
            threads: 1,
            max_n: None,
            group_cap: DEFAULT_CLOSURE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub d: u32,
    pub n: u64,
    pub value: usize,
    /// An optimal set, ascending.
    pub witness: Vec<u64>,
    pub nodes_explored: u64,
    pub upper_bound_used: usize,
    /// Elements that elimination placed in every optimum.
    pub forced: usize,
    #[serde(with = "duration_secs")]
    pub elapsed: Duration,
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        d.as_secs_f64().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

#[derive(Debug)]
struct Class {
    g: usize,
    /// Labels sharing this vector, ascending; copies are taken smallest first.
    labels: Vec<u64>,
    /// Copies of `g` that can coexist without a zero sum among themselves.
    max_copies: usize,
}

struct Search<'a> {
    group: &'a DenseGroup,
    classes: &'a [Class],
    /// Bound on how many residual elements any solution can hold.
    residual_cap: usize,
    budget: u64,
    nodes: AtomicU64,
    /// Best residual count found so far (shared across workers).
    best: AtomicUsize,
    best_labels: Mutex<Option<Vec<u64>>>,
}

enum Stop {
    Budget,
}

impl Search<'_> {
    fn bound(&self, class: usize, taken_here: usize, closure: &Closure, chosen: usize) -> usize {
        let mut room = 0;
        for (j, c) in self.classes.iter().enumerate().skip(class) {
            if closure.contains(self.group.neg(c.g)) {
                continue;
            }
            let used = if j == class { taken_here } else { 0 };
            room += c.labels.len().min(c.max_copies).saturating_sub(used);
        }
        (chosen + room).min(self.residual_cap)
    }

    fn record(&self, chosen: &[u64]) {
        if chosen.len() > self.best.load(Ordering::Relaxed) {
            let mut slot = self.best_labels.lock().unwrap();
            if chosen.len() > self.best.load(Ordering::Relaxed) {
                self.best.store(chosen.len(), Ordering::Relaxed);
                *slot = Some(chosen.to_vec());
            }
        }
    }

    /// Decides class `class`, of which `taken_here` copies are already in `chosen`.
    fn dfs(
        &self,
        class: usize,
        taken_here: usize,
        closure: &Closure,
        chosen: &mut Vec<u64>,
    ) -> std::result::Result<(), Stop> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(Stop::Budget);
        }
        self.record(chosen);
        if class == self.classes.len() {
            return Ok(());
        }
        if self.bound(class, taken_here, closure, chosen.len()) <= self.best.load(Ordering::Relaxed)
        {
            return Ok(());
        }
        let c = &self.classes[class];
        let can_take =
            taken_here < c.labels.len().min(c.max_copies) && !closure.contains(self.group.neg(c.g));
        if can_take {
            let next = closure.extended(self.group, c.g);
            chosen.push(c.labels[taken_here]);
            self.dfs(class, taken_here + 1, &next, chosen)?;
            chosen.pop();
        }
        self.dfs(class + 1, 0, closure, chosen)
    }

    /// Expands the tree breadth-first to at least `want` open nodes, closing
    /// leaves as it goes.
    fn frontier(&self, want: usize) -> Vec<(usize, usize, Closure, Vec<u64>)> {
        let mut open = vec![(
            0usize,
            0usize,
            Closure::empty(self.group.order()),
            Vec::new(),
        )];
        while open.len() < want {
            let mut next = Vec::with_capacity(open.len() * 2);
            let mut grew = false;
            for (class, taken, closure, chosen) in open {
                self.record(&chosen);
                if class == self.classes.len() {
                    continue;
                }
                grew = true;
                let c = &self.classes[class];
                if taken < c.labels.len().min(c.max_copies)
                    && !closure.contains(self.group.neg(c.g))
                {
                    let ext = closure.extended(self.group, c.g);
                    let mut with = chosen.clone();
                    with.push(c.labels[taken]);
                    next.push((class, taken + 1, ext, with));
                }
                next.push((class + 1, 0, closure, chosen));
            }
            open = next;
            if !grew {
                break;
            }
        }
        open
    }
}

/// Exact ρ_d(N) with a witness.
pub fn solve(d: u32, n: u64, table: &PrimeTable, options: &SolveOptions) -> Result<SolveResult> {
    let started = Instant::now();
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "d = {d} must be at least 2"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let guard = options.max_n.unwrap_or_else(|| desk_scale_limit(d));
    if n > guard {
        return Err(Error::OutOfRange {
            what: "N (desk-scale guard)",
            value: n,
            limit: guard,
        });
    }
    if n > table.limit() {
        return Err(Error::OutOfRange {
            what: "N",
            value: n,
            limit: table.limit(),
        });
    }

    let mut candidates = VectorMultiset::new(d);
    for x in 2..=n {
        let v = to_vector(x, d, table)?;
        if !v.is_zero() {
            candidates.push(x, v)?;
        }
    }
    let (residual, forced) = eliminate(&candidates);

    // Dense coordinates: the primes the residual actually touches.
    let mut coords: Vec<u64> = residual
        .items()
        .iter()
        .flat_map(|(_, v)| v.entries().iter().map(|&(p, _)| p))
        .collect();
    coords.sort_unstable();
    coords.dedup();
    let rank = coords.len();
    let order = (d as usize)
        .checked_pow(rank as u32)
        .filter(|&o| o <= options.group_cap)
        .ok_or(Error::ResourceLimit {
            what: "residual group order",
            cap: options.group_cap,
        })?;
    let group = DenseGroup::new(&vec![d; rank]);

    let mut by_vector: BTreeMap<usize, (u64, Vec<u64>)> = BTreeMap::new();
    for (label, v) in residual.items() {
        let mut dense = vec![0u32; rank];
        for &(p, r) in v.entries() {
            dense[coords
                .binary_search(&p)
                .expect("coordinate collected above")] = r;
        }
        let g = group.encode(&dense);
        let top = v.entries().last().map(|&(p, _)| p).unwrap_or(0);
        let entry = by_vector.entry(g).or_insert((top, Vec::new()));
        entry.1.push(*label);
    }
    let mut classes: Vec<(u64, Class)> = by_vector
        .into_iter()
        .map(|(g, (top, mut labels))| {
            labels.sort_unstable();
            let max_copies = group.element_order(g) - 1;
            (
                top,
                Class {
                    g,
                    labels,
                    max_copies,
                },
            )
        })
        .collect();
    // Largest prime first; within one prime, smallest label first.
    classes.sort_by(|(ta, a), (tb, b)| tb.cmp(ta).then(a.labels[0].cmp(&b.labels[0])));
    let classes: Vec<Class> = classes.into_iter().map(|(_, c)| c).collect();

    let (dav, _) = davenport_power(d as u64, rank);
    let thm4 = thm4_upper(d, n, table)? as usize;
    let residual_cap = (dav as usize - 1)
        .min(residual.len())
        .min(thm4.saturating_sub(forced.len()));
    let upper_bound_used = forced.len() + residual_cap;

    let search = Search {
        group: &group,
        classes: &classes,
        residual_cap,
        budget: options.budget,
        nodes: AtomicU64::new(0),
        best: AtomicUsize::new(0),
        best_labels: Mutex::new(None),
    };

    // Seed the incumbent with the explicit construction when it applies.
    let mut seeded: Option<Vec<u64>> = None;
    if construction_threshold(d).is_some_and(|t| n >= t) {
        let cert = construction::build(d, n, table)?;
        // Any valid set S keeps at least |S| − |forced| residual elements.
        let in_residual = cert.full_set.len().saturating_sub(forced.len());
        if in_residual > 0 {
            search.best.store(in_residual, Ordering::Relaxed);
            seeded = Some(cert.full_set);
        }
    }

    let outcome = if options.threads <= 1 {
        search.dfs(0, 0, &Closure::empty(order), &mut Vec::new())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        let open = search.frontier(options.threads * 8);
        pool.install(|| {
            open.into_par_iter()
                .try_for_each(|(class, taken, closure, mut chosen)| {
                    search.dfs(class, taken, &closure, &mut chosen)
                })
        })
    };

    let nodes = search.nodes.load(Ordering::Relaxed);
    let best = search.best.load(Ordering::Relaxed);
    let found = search.best_labels.lock().unwrap().take();
    let witness = match found {
        Some(labels) => {
            let mut w = forced.clone();
            w.extend(labels);
            w.sort_unstable();
            w
        }
        None => seeded.unwrap_or_else(|| forced.clone()),
    };

    match outcome {
        Ok(()) => Ok(SolveResult {
            d,
            n,
            value: forced.len() + best,
            witness,
            nodes_explored: nodes,
            upper_bound_used,
            forced: forced.len(),
            elapsed: started.elapsed(),
        }),
        Err(Stop::Budget) => Err(Error::BudgetExhausted {
            budget: options.budget,
            lower: witness.len(),
            upper: upper_bound_used,
            incumbent: witness,
        }),
    }
}

/// One independent [`solve`] per N in `lo..=hi`; failures are kept in place.
pub fn solve_range(
    d: u32,
    lo: u64,
    hi: u64,
    table: &PrimeTable,
    options: &SolveOptions,
) -> Result<Vec<Result<SolveResult>>> {
    if lo > hi {
        return Err(Error::InvalidArgument(format!("empty range {lo}..{hi}")));
    }
    Ok((lo..=hi).map(|n| solve(d, n, table, options)).collect())
}
