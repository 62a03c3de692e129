//! Python bindings: `import powerfree`.

use powerfree_core::bounds::{self, construction_threshold};
use powerfree_core::construction;
use powerfree_core::davenport::{self, GroupSpec as CoreGroupSpec};
use powerfree_core::expvec::{eliminate, find_zero_sum as core_find_zero_sum};
use powerfree_core::solver::{self, SolveOptions};
use powerfree_core::{intcheck, BoundReport, Error, PrimeTable as CoreTable, VectorMultiset};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(powerfree, PowerfreeError, PyException);
create_exception!(powerfree, CapacityError, PowerfreeError);
create_exception!(powerfree, BudgetExhausted, PowerfreeError);
create_exception!(powerfree, ThresholdNotMet, PowerfreeError);
create_exception!(powerfree, NotApplicable, PowerfreeError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::InvalidArgument(_) => PyValueError::new_err(msg),
        Error::OutOfRange { .. } | Error::IncompleteTable { .. } | Error::ResourceLimit { .. } => {
            CapacityError::new_err(msg)
        }
        Error::BudgetExhausted {
            lower,
            upper,
            incumbent,
            ..
        } => BudgetExhausted::new_err((msg, lower, upper, incumbent)),
        Error::ThresholdNotMet { .. } => ThresholdNotMet::new_err(msg),
        Error::NotApplicable(_) => NotApplicable::new_err(msg),
    }
}

fn table_for(need: u64) -> PyResult<CoreTable> {
    CoreTable::new(need.max(2)).map_err(to_py)
}

/// Sieve of Eratosthenes with π, primality and factorization.
#[pyclass(frozen)]
struct PrimeTable(CoreTable);

#[pymethods]
impl PrimeTable {
    #[new]
    fn new(limit: u64) -> PyResult<Self> {
        CoreTable::new(limit).map(Self).map_err(to_py)
    }

    #[getter]
    fn limit(&self) -> u64 {
        self.0.limit()
    }

    fn primes(&self) -> Vec<u64> {
        self.0.primes().to_vec()
    }

    fn pi(&self, n: u64) -> PyResult<usize> {
        self.0.pi(n).map_err(to_py)
    }

    fn is_prime(&self, n: u64) -> PyResult<bool> {
        self.0.is_prime(n).map_err(to_py)
    }

    /// `[(p, e), ...]` in increasing p.
    fn factorize(&self, n: u64) -> PyResult<Vec<(u64, u32)>> {
        self.0.factorize(n).map(|f| f.factors).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("PrimeTable({})", self.0.limit())
    }
}

/// A finite abelian group ⊕ Z_{n_i}, parsed from "3^2", "2,4" and the like.
#[pyclass(frozen)]
struct GroupSpec(CoreGroupSpec);

#[pymethods]
impl GroupSpec {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        spec.parse().map(Self).map_err(to_py)
    }

    #[getter]
    fn components(&self) -> Vec<u64> {
        self.0.components().to_vec()
    }

    #[getter]
    fn order(&self) -> Option<u64> {
        self.0.order()
    }

    #[getter]
    fn exponent(&self) -> u64 {
        self.0.exponent()
    }

    /// Olson's value; raises NotApplicable unless the group is a p-group.
    fn olson(&self) -> PyResult<u64> {
        davenport::olson_davenport(&self.0).map_err(to_py)
    }

    /// ⌊exp(G)(1 + ln(|G|/exp(G)))⌋.
    fn upper_bound(&self) -> u64 {
        davenport::davenport_upper_bound(&self.0)
    }

    /// Exhaustive D(G). Returns `(value, nodes)`.
    #[pyo3(signature = (budget = 50_000_000))]
    fn exact(&self, py: Python<'_>, budget: u64) -> PyResult<(u64, u64)> {
        let r = py
            .detach(|| davenport::davenport_exact(&self.0, budget))
            .map_err(to_py)?;
        Ok((r.value, r.nodes))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("GroupSpec('{}')", self.0)
    }
}

#[pyclass(frozen, get_all)]
struct SolveResult {
    d: u32,
    n: u64,
    value: usize,
    witness: Vec<u64>,
    nodes_explored: u64,
    upper_bound_used: usize,
    forced: usize,
    /// Wall-clock seconds.
    elapsed: f64,
}

#[pymethods]
impl SolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(d={}, n={}, value={}, nodes_explored={})",
            self.d, self.n, self.value, self.nodes_explored
        )
    }
}

#[pyclass(frozen)]
struct ConstructionCertificate(construction::ConstructionCertificate);

#[pymethods]
impl ConstructionCertificate {
    #[getter]
    fn d(&self) -> u32 {
        self.0.d
    }

    #[getter]
    fn n(&self) -> u64 {
        self.0.n
    }

    #[getter]
    fn full_set(&self) -> Vec<u64> {
        self.0.full_set.clone()
    }

    #[getter]
    fn claimed_size(&self) -> u64 {
        self.0.claimed_size
    }

    #[getter]
    fn verified(&self) -> bool {
        self.0.verified
    }

    /// Element lists of the bands followed by the gadgets.
    fn parts(&self) -> Vec<Vec<u64>> {
        self.0.parts().map(<[u64]>::to_vec).collect()
    }

    /// Runs every certificate check. Returns `(ok, violations)`.
    fn verify(&self, py: Python<'_>) -> PyResult<(bool, Vec<String>)> {
        let cert = &self.0;
        let v = py.detach(|| {
            construction::verify_certificate(cert, &table_for(cert.n)?).map_err(to_py)
        })?;
        Ok((v.ok, v.violations))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("certificate serializes")
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "ConstructionCertificate(d={}, n={}, size={}, verified={})",
            self.0.d,
            self.0.n,
            self.0.full_set.len(),
            self.0.verified
        )
    }
}

/// Σ_{k=1}^{d−1} π(⌊N/k⌋).
#[pyfunction]
fn main_term(d: u32, n: u64) -> PyResult<u64> {
    bounds::main_term(d, n, &table_for(n)?).map_err(to_py)
}

/// Main term and every upper bound for `(d, N)` as a dict.
#[pyfunction]
fn bound_report<'py>(py: Python<'py>, d: u32, n: u64) -> PyResult<Bound<'py, PyDict>> {
    let r = BoundReport::compute(d, n, &table_for(n)?).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("d", r.d)?;
    out.set_item("n", r.n)?;
    out.set_item("main_term", r.main_term)?;
    out.set_item("thm4_upper", r.thm4_upper)?;
    out.set_item("thm5_upper", r.thm5_upper)?;
    out.set_item("thm5_upper_tight", r.thm5_upper_tight)?;
    out.set_item("corollary_upper", r.corollary_upper)?;
    out.set_item("corollary_upper_real", r.corollary_upper_real)?;
    out.set_item("corollary_derived_upper", r.corollary_derived_upper)?;
    out.set_item("corollary_derived_real", r.corollary_derived_real)?;
    out.set_item("is_prime_power_d", r.is_prime_power_d)?;
    out.set_item("bound_of_a_bound", r.bound_of_a_bound)?;
    out.set_item("corollary_discrepancy", r.corollary_discrepancy)?;
    out.set_item("exact", r.exact_claimed)?;
    out.set_item("threshold", r.threshold)?;
    Ok(out)
}

/// Exact ρ_d(N). The GIL is released while searching.
#[pyfunction]
#[pyo3(signature = (d, n, budget = 50_000_000, threads = 1, allow_large = false))]
fn solve(
    py: Python<'_>,
    d: u32,
    n: u64,
    budget: u64,
    threads: usize,
    allow_large: bool,
) -> PyResult<SolveResult> {
    let options = SolveOptions {
        budget,
        threads,
        max_n: allow_large.then_some(u64::MAX),
        ..SolveOptions::default()
    };
    let r = py.detach(|| {
        let table = table_for(n)?;
        solver::solve(d, n, &table, &options).map_err(to_py)
    })?;
    Ok(SolveResult {
        d: r.d,
        n: r.n,
        value: r.value,
        witness: r.witness,
        nodes_explored: r.nodes_explored,
        upper_bound_used: r.upper_bound_used,
        forced: r.forced,
        elapsed: r.elapsed.as_secs_f64(),
    })
}

/// The explicit extremal set; needs N ≥ 2^d·p_d.
#[pyfunction]
#[pyo3(signature = (d, n, verify = false))]
fn construct(d: u32, n: u64, verify: bool) -> PyResult<ConstructionCertificate> {
    let table = table_for(n)?;
    let mut cert = construction::build(d, n, &table).map_err(to_py)?;
    if verify {
        cert.verify_in_place(&table).map_err(to_py)?;
    }
    Ok(ConstructionCertificate(cert))
}

/// 2^d·p_d, or None if it does not fit in 64 bits.
#[pyfunction]
fn threshold(d: u32) -> Option<u64> {
    construction_threshold(d)
}

/// Distinct labels whose product is a d-th power, or None.
#[pyfunction]
fn find_zero_sum(labels: Vec<u64>, d: u32) -> PyResult<Option<Vec<u64>>> {
    let need = labels.iter().copied().max().unwrap_or(2);
    let ms = VectorMultiset::from_labels(&labels, d, &table_for(need)?).map_err(to_py)?;
    let (residual, _) = eliminate(&ms);
    Ok(core_find_zero_sum(&residual).map_err(to_py)?.witness)
}

/// Whether the product of `labels` is a perfect d-th power, in exact arithmetic.
#[pyfunction]
fn is_power_product(labels: Vec<u64>, d: u32) -> bool {
    intcheck::is_power_product(&labels, d)
}

#[pymodule]
fn powerfree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("PowerfreeError", py.get_type::<PowerfreeError>())?;
    m.add("CapacityError", py.get_type::<CapacityError>())?;
    m.add("BudgetExhausted", py.get_type::<BudgetExhausted>())?;
    m.add("ThresholdNotMet", py.get_type::<ThresholdNotMet>())?;
    m.add("NotApplicable", py.get_type::<NotApplicable>())?;
    m.add_class::<PrimeTable>()?;
    m.add_class::<GroupSpec>()?;
    m.add_class::<SolveResult>()?;
    m.add_class::<ConstructionCertificate>()?;
    m.add_function(wrap_pyfunction!(main_term, m)?)?;
    m.add_function(wrap_pyfunction!(bound_report, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(find_zero_sum, m)?)?;
    m.add_function(wrap_pyfunction!(is_power_product, m)?)?;
    Ok(())
}
