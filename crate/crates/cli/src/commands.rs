use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;

use num_bigint::BigUint;
use powerfree_core::bounds::{
    construction_threshold, main_term, remark_identity_lhs_rhs, remark_inequality,
};
use powerfree_core::construction::{build, verify_certificate, Verification};
use powerfree_core::davenport::{
    davenport_exact, davenport_exact_parallel, davenport_upper_bound, davenport_upper_bound_real,
    olson_davenport,
};
use powerfree_core::expvec::{eliminate, find_zero_sum};
use powerfree_core::intcheck::{exact_root, product};
use powerfree_core::solver::{solve, SolveOptions, SolveResult};
use powerfree_core::{
    BoundReport, ConstructionCertificate, Error, GroupSpec, PrimeTable, VectorMultiset,
};
use serde::Serialize;
use serde_json::json;

use crate::cli::{
    BoundsArgs, Cli, Command, ConstructArgs, DavenportArgs, Format, PrimesArgs, RhoArgs, VerifyArgs,
};

/// Largest prime table the CLI will build.
pub const MAX_SIEVE: u64 = 100_000_000;

pub const EXIT_FOUND: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_THRESHOLD: i32 = 5;
pub const EXIT_NOT_APPLICABLE: i32 = 6;

const DEFAULT_BUDGET: u64 = 50_000_000;

/// Rendered output plus the exit code to finish with.
pub struct Report {
    pub out: String,
    pub code: i32,
}

impl Report {
    fn ok(out: String) -> Self {
        Self { out, code: 0 }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::OutOfRange { .. } | Error::IncompleteTable { .. } | Error::ResourceLimit { .. } => {
            EXIT_CAPACITY
        }
        Error::BudgetExhausted { .. } => EXIT_BUDGET,
        Error::ThresholdNotMet { .. } => EXIT_THRESHOLD,
        Error::NotApplicable(_) => EXIT_NOT_APPLICABLE,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report, Failure> {
    let ctx = Context {
        format: cli.format,
        budget: cli.budget.unwrap_or(DEFAULT_BUDGET),
        threads: cli.threads.unwrap_or(1) as usize,
        sieve_limit: cli.sieve_limit,
    };
    match &cli.command {
        Command::Bounds(a) => ctx.bounds(a),
        Command::Rho(a) => ctx.rho(a),
        Command::Construct(a) => ctx.construct(a),
        Command::Verify(a) => ctx.verify(a),
        Command::Davenport(a) => ctx.davenport(a),
        Command::Primes(a) => ctx.primes(a),
    }
}

struct Context {
    format: Format,
    budget: u64,
    threads: usize,
    sieve_limit: Option<u64>,
}

/// Named scalar fields shared by the text and CSV renderings.
type Fields = Vec<(&'static str, String)>;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn csv_table(rows: &[Fields]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        w.write_record(first.iter().map(|(k, _)| *k))
            .expect("write to Vec");
    }
    for row in rows {
        w.write_record(row.iter().map(|(_, v)| v.as_str()))
            .expect("write to Vec");
    }
    String::from_utf8(w.into_inner().expect("flush Vec")).expect("csv output is UTF-8")
}

fn text_block(fields: &Fields) -> String {
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    fields
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn text_table(rows: &[Fields]) -> String {
    let Some(first) = rows.first() else {
        return String::new();
    };
    let widths: Vec<usize> = (0..first.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].1.len())
                .chain([first[i].0.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        let s: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        s.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(first.iter().map(|(k, _)| *k).collect());
    for r in rows {
        out += &line(r.iter().map(|(_, v)| v.as_str()).collect());
    }
    out
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("values serialize") + "\n"
}

impl Context {
    /// Prime table up to the override, or `max(need, 2^d·p_d)` when that fits.
    fn table(&self, need: u64, d: Option<u32>) -> Result<PrimeTable, Failure> {
        let limit = self.sieve_limit.unwrap_or_else(|| {
            let t = d
                .and_then(construction_threshold)
                .filter(|&t| t <= MAX_SIEVE)
                .unwrap_or(0);
            need.max(t)
        });
        if limit > MAX_SIEVE {
            return Err(Error::ResourceLimit {
                what: "sieve limit",
                cap: MAX_SIEVE as usize,
            }
            .into());
        }
        Ok(PrimeTable::new(limit.max(2))?)
    }

    fn render(&self, rows: &[Fields], json: String, single: bool) -> String {
        match self.format {
            Format::Json => json,
            Format::Csv => csv_table(rows),
            Format::Text if single => text_block(&rows[0]),
            Format::Text => text_table(rows),
        }
    }

    fn bounds(&self, a: &BoundsArgs) -> Result<Report, Failure> {
        let Some(range) = a.n else {
            return self.identity(a.d);
        };
        let table = self.table(range.hi, Some(a.d))?;
        let reports = range
            .iter()
            .map(|n| BoundReport::compute(a.d, n, &table).map(BoundsRow::from))
            .collect::<Result<Vec<_>, _>>()?;
        let rows: Vec<Fields> = reports.iter().map(BoundsRow::fields).collect();
        let json = if range.is_single() {
            to_json(&reports[0])
        } else {
            to_json(&reports)
        };
        Ok(Report::ok(self.render(&rows, json, range.is_single())))
    }

    fn identity(&self, d: u32) -> Result<Report, Failure> {
        let table = self.table(2 * d as u64, None)?;
        let (lhs, rhs) = remark_identity_lhs_rhs(d, &table)?;
        let inequality = if d >= 4 {
            Some(remark_inequality(d, &table)?)
        } else {
            None
        };
        let m = 2 * d as u64 - 2;
        let fields: Fields = vec![
            ("d", d.to_string()),
            ("m", m.to_string()),
            ("main_term", lhs.to_string()),
            ("omega_sum", rhs.to_string()),
            ("identity_holds", (lhs == rhs).to_string()),
            ("main_term_ge_m", opt(inequality)),
        ];
        let json = to_json(&json!({
            "d": d,
            "m": m,
            "main_term": lhs,
            "omega_sum": rhs,
            "identity_holds": lhs == rhs,
            "main_term_ge_m": inequality,
        }));
        Ok(Report::ok(self.render(&[fields], json, true)))
    }

    fn rho(&self, a: &RhoArgs) -> Result<Report, Failure> {
        let table = self.table(a.n.hi, Some(a.d))?;
        let options = SolveOptions {
            budget: self.budget,
            threads: self.threads,
            max_n: a.allow_large.then_some(u64::MAX),
            ..SolveOptions::default()
        };
        let mut outcomes = Vec::new();
        let mut code = 0;
        for n in a.n.iter() {
            match solve(a.d, n, &table, &options) {
                Ok(r) => outcomes.push(RhoOutcome::Exact(r)),
                Err(Error::BudgetExhausted {
                    lower,
                    upper,
                    incumbent,
                    ..
                }) => {
                    code = EXIT_BUDGET;
                    outcomes.push(RhoOutcome::Bracket {
                        d: a.d,
                        n,
                        lower,
                        upper,
                        incumbent,
                    });
                }
                Err(e) if matches!(e, Error::OutOfRange { what, .. } if what.contains("guard")) => {
                    let mut f = Failure::from(e);
                    f.message += "; pass --allow-large to solve anyway";
                    return Err(f);
                }
                Err(e) => return Err(e.into()),
            }
        }
        let rows: Vec<Fields> = outcomes.iter().map(|o| o.fields(a.n.is_single())).collect();
        let json = if a.n.is_single() {
            to_json(&outcomes[0])
        } else {
            to_json(&outcomes)
        };
        let mut out = self.render(&rows, json, a.n.is_single());
        if code == EXIT_BUDGET && self.format == Format::Text {
            out += &format!(
                "node budget {} exhausted; the optimum lies in [lower, upper]\n",
                self.budget
            );
        }
        Ok(Report { out, code })
    }

    fn construct(&self, a: &ConstructArgs) -> Result<Report, Failure> {
        let table = self.table(a.n, Some(a.d))?;
        let mut cert = build(a.d, a.n, &table)?;
        let check = if a.verify {
            Some(cert.verify_in_place(&table)?)
        } else {
            None
        };
        let out = match self.format {
            Format::Json => to_json(&cert),
            Format::Csv => {
                let mut rows = Vec::new();
                for b in cert.bands.iter().chain([&cert.last_band]) {
                    for &e in &b.elements {
                        rows.push(vec![
                            ("part", format!("band{}", b.k)),
                            ("element", e.to_string()),
                        ]);
                    }
                }
                for g in &cert.gadgets {
                    for &e in &g.elements {
                        rows.push(vec![
                            ("part", format!("gadget{}", g.s)),
                            ("element", e.to_string()),
                        ]);
                    }
                }
                csv_table(&rows)
            }
            Format::Text => construct_text(&cert, a.verify),
        };
        match check {
            Some(v) if !v.ok => Ok(Report {
                out: out + &verification_text(&v),
                code: EXIT_FOUND,
            }),
            _ => Ok(Report::ok(out)),
        }
    }

    fn verify(&self, a: &VerifyArgs) -> Result<Report, Failure> {
        let raw = fs::read_to_string(&a.file)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", a.file.display())))?;
        if raw.trim_start().starts_with('{') {
            return self.verify_certificate(a.d, &raw);
        }
        let labels = parse_integer_list(&raw)?;
        let need = labels.iter().copied().max().unwrap_or(2);
        let table = self.table(need, None)?;
        let ms = VectorMultiset::from_labels(&labels, a.d, &table)?;
        // Elimination keeps the verdict and any residual witness is a witness for the whole set.
        let (residual, _) = eliminate(&ms);
        let report = find_zero_sum(&residual)?;
        let row = VerifyRow::new(a.d, labels.len(), report.witness);
        let code = if row.free { 0 } else { EXIT_FOUND };
        let out = match self.format {
            Format::Json => to_json(&row),
            Format::Csv => csv_table(&[row.fields()]),
            Format::Text => match &row.witness {
                None => format!(
                    "FREE: no product of distinct elements is a {}-th power\n",
                    a.d
                ),
                Some(w) => format!(
                    "WITNESS {}\nproduct {} = {}^{}\n",
                    join(w),
                    row.product.as_deref().unwrap_or(""),
                    row.root.as_deref().unwrap_or(""),
                    a.d
                ),
            },
        };
        Ok(Report { out, code })
    }

    fn verify_certificate(&self, d: u32, raw: &str) -> Result<Report, Failure> {
        let cert: ConstructionCertificate = serde_json::from_str(raw)
            .map_err(|e| Failure::usage(format!("bad certificate JSON: {e}")))?;
        if cert.d != d {
            return Err(Failure::usage(format!(
                "certificate is for d = {}, not d = {d}",
                cert.d
            )));
        }
        let table = self.table(cert.n, Some(d))?;
        let v = verify_certificate(&cert, &table)?;
        let code = if v.ok { 0 } else { EXIT_FOUND };
        let out = match self.format {
            Format::Json => to_json(&v),
            Format::Csv => csv_table(&[vec![
                ("ok", v.ok.to_string()),
                (
                    "witness",
                    v.witness.as_deref().map(join).unwrap_or_default(),
                ),
                ("violations", v.violations.join("; ")),
            ]]),
            Format::Text if v.ok => format!(
                "FREE: certificate for d = {d}, N = {} holds ({} elements)\n",
                cert.n,
                cert.full_set.len()
            ),
            Format::Text => verification_text(&v),
        };
        Ok(Report { out, code })
    }

    fn davenport(&self, a: &DavenportArgs) -> Result<Report, Failure> {
        let spec: GroupSpec = a.group.parse()?;
        let all = !(a.exact || a.olson || a.bound);
        let olson = if a.olson {
            Some(olson_davenport(&spec)?)
        } else if all {
            olson_davenport(&spec).ok()
        } else {
            None
        };
        let bound = (a.bound || all).then(|| davenport_upper_bound(&spec));
        let exact = if a.exact {
            Some(if self.threads > 1 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(self.threads)
                    .build()
                    .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
                pool.install(|| davenport_exact_parallel(&spec, self.budget))?
            } else {
                davenport_exact(&spec, self.budget)?
            })
        } else {
            None
        };
        let row = DavenportRow {
            group: spec.to_string(),
            order: spec.order(),
            exponent: spec.exponent(),
            olson,
            bound,
            bound_real: bound.map(|_| davenport_upper_bound_real(&spec)),
            exact: exact.as_ref().map(|e| e.value),
            nodes: exact.as_ref().map(|e| e.nodes),
            longest: exact.map(|e| e.longest),
        };
        let fields = row.fields();
        let out = self.render(&[fields], to_json(&row), true);
        Ok(Report::ok(out))
    }

    fn primes(&self, a: &PrimesArgs) -> Result<Report, Failure> {
        let table = self.table(a.n.hi, None)?;
        let (lo, hi) = if a.n.is_single() {
            (1, a.n.hi)
        } else {
            (a.n.lo, a.n.hi)
        };
        let primes: Vec<u64> = table
            .primes()
            .iter()
            .copied()
            .filter(|p| (lo..=hi).contains(p))
            .collect();
        let pi_hi = table.pi(hi)?;
        let out = match self.format {
            Format::Json => to_json(&json!({
                "lo": lo, "hi": hi, "pi_hi": pi_hi, "count": primes.len(), "primes": primes,
            })),
            Format::Csv => {
                let rows: Vec<Fields> = primes
                    .iter()
                    .map(|p| vec![("prime", p.to_string())])
                    .collect();
                csv_table(&rows)
            }
            Format::Text => format!(
                "pi({hi}) = {pi_hi}\n{} primes in [{lo}, {hi}]: {}\n",
                primes.len(),
                join(&primes)
            ),
        };
        Ok(Report::ok(out))
    }
}

/// Integers one per line; blank lines and `#` comments are skipped.
pub fn parse_integer_list(raw: &str) -> Result<Vec<u64>, Failure> {
    let mut seen = BTreeSet::new();
    let mut labels = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let n: u64 = body.parse().map_err(|_| {
            Failure::usage(format!(
                "line {}: `{body}` is not a positive integer",
                i + 1
            ))
        })?;
        if n == 0 {
            return Err(Failure::usage(format!("line {}: 0 is not allowed", i + 1)));
        }
        if !seen.insert(n) {
            return Err(Failure::usage(format!(
                "line {}: duplicate entry {n}",
                i + 1
            )));
        }
        labels.push(n);
    }
    Ok(labels)
}

#[derive(Serialize)]
struct BoundsRow {
    #[serde(flatten)]
    report: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<u64>,
}

impl From<BoundReport> for BoundsRow {
    fn from(report: BoundReport) -> Self {
        Self {
            exact: report.exact_claimed,
            report,
        }
    }
}

impl BoundsRow {
    fn fields(&self) -> Fields {
        let r = &self.report;
        vec![
            ("d", r.d.to_string()),
            ("n", r.n.to_string()),
            ("main_term", r.main_term.to_string()),
            ("thm4_upper", r.thm4_upper.to_string()),
            ("thm5_upper", r.thm5_upper.to_string()),
            ("thm5_upper_tight", r.thm5_upper_tight.to_string()),
            ("corollary_upper", r.corollary_upper.to_string()),
            (
                "corollary_derived_upper",
                r.corollary_derived_upper.to_string(),
            ),
            ("bound_of_a_bound", r.bound_of_a_bound.to_string()),
            ("corollary_discrepancy", r.corollary_discrepancy.to_string()),
            ("exact", opt(self.exact)),
        ]
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum RhoOutcome {
    Exact(SolveResult),
    Bracket {
        d: u32,
        n: u64,
        lower: usize,
        upper: usize,
        incumbent: Vec<u64>,
    },
}

impl RhoOutcome {
    fn fields(&self, with_witness: bool) -> Fields {
        let mut f = match self {
            RhoOutcome::Exact(r) => vec![
                ("d", r.d.to_string()),
                ("n", r.n.to_string()),
                ("value", r.value.to_string()),
                ("lower", r.value.to_string()),
                ("upper", r.value.to_string()),
                ("nodes", r.nodes_explored.to_string()),
                ("seconds", format!("{:.3}", r.elapsed.as_secs_f64())),
            ],
            RhoOutcome::Bracket {
                d, n, lower, upper, ..
            } => vec![
                ("d", d.to_string()),
                ("n", n.to_string()),
                ("value", String::new()),
                ("lower", lower.to_string()),
                ("upper", upper.to_string()),
                ("nodes", String::new()),
                ("seconds", String::new()),
            ],
        };
        if with_witness {
            let w = match self {
                RhoOutcome::Exact(r) => &r.witness,
                RhoOutcome::Bracket { incumbent, .. } => incumbent,
            };
            f.push(("witness", join(w)));
        }
        f
    }
}

#[derive(Serialize)]
struct VerifyRow {
    d: u32,
    size: usize,
    free: bool,
    witness: Option<Vec<u64>>,
    product: Option<String>,
    root: Option<String>,
}

impl VerifyRow {
    fn new(d: u32, size: usize, witness: Option<Vec<u64>>) -> Self {
        let (product, root) = match &witness {
            Some(w) => {
                let p: BigUint = product(w);
                let r = exact_root(&p, d).map(|r| r.to_string());
                (Some(p.to_string()), r)
            }
            None => (None, None),
        };
        Self {
            d,
            size,
            free: witness.is_none(),
            witness,
            product,
            root,
        }
    }

    fn fields(&self) -> Fields {
        vec![
            ("d", self.d.to_string()),
            ("size", self.size.to_string()),
            ("free", self.free.to_string()),
            (
                "witness",
                self.witness.as_deref().map(join).unwrap_or_default(),
            ),
            ("product", opt(self.product.as_ref())),
            ("root", opt(self.root.as_ref())),
        ]
    }
}

#[derive(Serialize)]
struct DavenportRow {
    group: String,
    order: Option<u64>,
    exponent: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    olson: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_real: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    longest: Option<Vec<Vec<u32>>>,
}

impl DavenportRow {
    fn fields(&self) -> Fields {
        let longest = self.longest.as_ref().map(|seq| {
            seq.iter()
                .map(|g| {
                    format!(
                        "({})",
                        g.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
                    )
                })
                .collect::<Vec<_>>()
                .join(" ")
        });
        vec![
            ("group", self.group.clone()),
            ("order", opt(self.order)),
            ("exponent", self.exponent.to_string()),
            ("olson", opt(self.olson)),
            ("bound", opt(self.bound)),
            (
                "bound_real",
                opt(self.bound_real.map(|x| format!("{x:.6}"))),
            ),
            ("exact", opt(self.exact)),
            ("nodes", opt(self.nodes)),
            ("longest", opt(longest)),
        ]
    }
}

fn construct_text(cert: &ConstructionCertificate, verify_requested: bool) -> String {
    let mut s = String::new();
    let main = opt(main_term_of(cert));
    let _ = writeln!(
        s,
        "d = {}, N = {}: {} elements (main term {main})",
        cert.d,
        cert.n,
        cert.full_set.len()
    );
    let _ = writeln!(s, "set      {}", join(&cert.full_set));
    for b in cert.bands.iter().chain([&cert.last_band]) {
        let _ = writeln!(s, "band {:<3} {}", b.k, join(&b.elements));
    }
    for g in &cert.gadgets {
        let _ = writeln!(s, "gadget {:<2}{}", g.s, join(&g.elements));
    }
    let _ = writeln!(
        s,
        "j-set    {}",
        cert.j_set
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    );
    if verify_requested {
        let _ = writeln!(s, "verified {}", cert.verified);
    }
    s
}

fn main_term_of(cert: &ConstructionCertificate) -> Option<u64> {
    let table = PrimeTable::new(cert.n.max(2)).ok()?;
    main_term(cert.d, cert.n, &table).ok()
}

fn verification_text(v: &Verification) -> String {
    let mut s = String::from("verification FAILED\n");
    for msg in &v.violations {
        let _ = writeln!(s, "  {msg}");
    }
    if let Some(w) = &v.witness {
        let _ = writeln!(s, "  d-th power product: {}", join(w));
    }
    s
}
