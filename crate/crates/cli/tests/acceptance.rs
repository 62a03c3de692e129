//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::collections::HashMap;
use std::process::Command;
use std::time::Instant;

use powerfree_core::bounds::{
    corollary_derived_upper, main_term, remark_identity_lhs_rhs, remark_inequality, thm4_upper,
    thm5_upper,
};
use powerfree_core::construction::{build, verify_certificate};
use powerfree_core::davenport::{davenport_exact, olson_davenport};
use powerfree_core::expvec::{eliminate, find_zero_sum};
use powerfree_core::intcheck::is_power_product;
use powerfree_core::solver::{solve, SolveOptions};
use powerfree_core::{ConstructionCertificate, GroupSpec, PrimeTable, VectorMultiset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli_json(args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_powerfree"))
        .args(args)
        .args(["--format", "json"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "`powerfree {}` exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn rho_values(d: u32, range: &str) -> Result<Vec<(u64, u64)>, String> {
    let v = cli_json(&["rho", "-d", &d.to_string(), "-N", range])?;
    let rows = match v {
        Value::Array(rows) => rows,
        single => vec![single],
    };
    rows.iter()
        .map(|r| match (r["n"].as_u64(), r["value"].as_u64()) {
            (Some(n), Some(value)) => Ok((n, value)),
            _ => Err(format!("row without an exact value: {r}")),
        })
        .collect()
}

fn table() -> PrimeTable {
    PrimeTable::new(5000).unwrap()
}

fn rho2_is_pi() -> Check {
    let t = table();
    let rows = rho_values(2, "2..30")?;
    ensure(rows.len() == 29, || format!("{} rows", rows.len()))?;
    for (n, value) in rows {
        let pi = t.pi(n).unwrap() as u64;
        ensure(value == pi, || format!("rho_2({n}) = {value}, pi = {pi}"))?;
    }
    Ok("29 values".into())
}

fn rho3_small_values() -> Check {
    let t = table();
    let at14 = rho_values(3, "14")?;
    ensure(at14 == vec![(14, 9)], || format!("rho_3(14) row {at14:?}"))?;
    for (n, value) in rho_values(3, "15..21")? {
        let expected = (t.pi(n).unwrap() + t.pi(n / 2).unwrap()) as u64;
        ensure(value == expected, || {
            format!("rho_3({n}) = {value}, expected {expected}")
        })?;
    }
    Ok("rho_3(14) = 9; N = 15..21 match".into())
}

fn gap_at_14() -> Check {
    let t = table();
    let r = solve(3, 14, &t, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let main = main_term(3, 14, &t).unwrap() as usize;
    ensure(r.value < main && main - r.value == 1, || {
        format!("main {main}, rho {}", r.value)
    })?;
    Ok(format!("{main} - {} = 1", r.value))
}

fn closure_cases() -> Check {
    let t = table();
    for (d, n) in [(2u32, 12u64), (2, 40), (3, 40), (3, 60)] {
        let v = cli_json(&[
            "construct",
            "-d",
            &d.to_string(),
            "-N",
            &n.to_string(),
            "--verify",
        ])?;
        let cert: ConstructionCertificate = serde_json::from_value(v).map_err(|e| e.to_string())?;
        ensure(cert.verified, || format!("({d},{n}) not verified"))?;
        let recheck = verify_certificate(&cert, &t).map_err(|e| e.to_string())?;
        ensure(recheck.ok, || {
            format!("({d},{n}) re-verification: {:?}", recheck.violations)
        })?;
        let main = main_term(d, n, &t).unwrap();
        ensure(cert.claimed_size == main, || {
            format!("({d},{n}) claimed {}", cert.claimed_size)
        })?;
        let r = solve(d, n, &t, &SolveOptions::default()).map_err(|e| e.to_string())?;
        ensure(r.value as u64 == main, || {
            format!("({d},{n}) solver {} vs {main}", r.value)
        })?;
    }
    Ok("4 cases".into())
}

fn d6_construction() -> Check {
    let t = PrimeTable::new(832).unwrap();
    let cert = build(6, 832, &t).map_err(|e| e.to_string())?;
    let v = verify_certificate(&cert, &t).map_err(|e| e.to_string())?;
    ensure(v.ok, || format!("violations {:?}", v.violations))?;
    let expected: u64 = (1..=5).map(|k| t.pi(832 / k).unwrap() as u64).sum();
    ensure(cert.claimed_size == expected, || {
        format!("claimed {}", cert.claimed_size)
    })?;
    Ok(format!("{expected} elements"))
}

fn davenport_agreement() -> Check {
    let groups = [
        "2", "4", "8", "2^2", "2^3", "2,4", "3", "3^2", "9", "5", "7",
    ];
    for g in groups {
        let spec: GroupSpec = g.parse().unwrap();
        let exact = davenport_exact(&spec, 10_000_000).map_err(|e| e.to_string())?;
        let olson = olson_davenport(&spec).unwrap();
        ensure(exact.value == olson, || {
            format!("{g}: exact {} vs olson {olson}", exact.value)
        })?;
    }
    Ok(format!("{} groups", groups.len()))
}

fn bound_sandwich() -> Check {
    let t = table();
    let mut count = 0;
    for d in 2..=5u32 {
        for n in 1..=40u64 {
            let r = solve(d, n, &t, &SolveOptions::default()).map_err(|e| e.to_string())?;
            let v = r.value as u64;
            let t4 = thm4_upper(d, n, &t).unwrap();
            let t5 = thm5_upper(d, n, &t).unwrap();
            let (cd, _) = corollary_derived_upper(d, n, &t).unwrap();
            ensure(v <= t4 && v <= t5 && v <= cd && v < n, || {
                format!("d={d} N={n}: rho {v}, thm4 {t4}, thm5 {t5}, derived {cd}")
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} pairs"))
}

fn remark_checks() -> Check {
    let t = table();
    for d in 2..=500u32 {
        let (lhs, rhs) = remark_identity_lhs_rhs(d, &t).unwrap();
        ensure(lhs == rhs, || {
            format!("identity fails at d={d}: {lhs} vs {rhs}")
        })?;
        if d >= 4 {
            ensure(remark_inequality(d, &t).unwrap(), || {
                format!("inequality fails at d={d}")
            })?;
        }
    }
    Ok("d = 2..500".into())
}

fn oracle_equivalence() -> Check {
    let t = table();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let mut naive: HashMap<(u32, u32), usize> = HashMap::new();
    for _ in 0..200 {
        let d = rng.gen_range(2..=3u32);
        let n = rng.gen_range(1..=14u32);
        let expected = *naive
            .entry((d, n))
            .or_insert_with(|| oracle::naive_rho(d, n).0);
        let r = solve(d, n as u64, &t, &SolveOptions::default()).map_err(|e| e.to_string())?;
        ensure(r.value == expected, || {
            format!("d={d} N={n}: solver {} vs naive {expected}", r.value)
        })?;
        ensure(oracle::exhaustive_zero_sum(&r.witness, d).is_none(), || {
            format!("d={d} N={n}: witness has a d-th power product")
        })?;
    }
    Ok(format!("200 draws, {} distinct pairs", naive.len()))
}

fn zero_sum_equivalence() -> Check {
    let t = table();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    for case in 0..500 {
        let d = rng.gen_range(2..=6u32);
        let size = rng.gen_range(0..=16usize);
        let mut labels: Vec<u64> = Vec::new();
        while labels.len() < size {
            let x = rng.gen_range(1..=120u64);
            if !labels.contains(&x) {
                labels.push(x);
            }
        }
        let ms = VectorMultiset::from_labels(&labels, d, &t).unwrap();
        let expected = oracle::exhaustive_zero_sum(&labels, d).is_some();
        let got = find_zero_sum(&ms).map_err(|e| e.to_string())?;
        ensure(got.has_zero_sum == expected, || {
            format!("case {case}: d={d} {labels:?}")
        })?;
        if let Some(w) = &got.witness {
            ensure(is_power_product(w, d), || {
                format!("case {case}: bad witness {w:?}")
            })?;
        }
        let (residual, _) = eliminate(&ms);
        let after = find_zero_sum(&residual).map_err(|e| e.to_string())?;
        ensure(after.has_zero_sum == expected, || {
            format!("case {case}: elimination changed the verdict for d={d} {labels:?}")
        })?;
    }
    Ok("500 multisets".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("rho_2(N) = pi(N) for N in 2..30", rho2_is_pi),
        (
            "rho_3(14) = 9 and rho_3(N) = pi(N) + pi(N/2) for N in 15..21",
            rho3_small_values,
        ),
        ("gap of exactly 1 at d = 3, N = 14", gap_at_14),
        (
            "construction, verification and solver agree at the threshold cases",
            closure_cases,
        ),
        (
            "d = 6, N = 832 construction verifies with the main-term size",
            d6_construction,
        ),
        (
            "exact Davenport constants equal Olson's formula",
            davenport_agreement,
        ),
        (
            "solver values sit under every upper bound and below N",
            bound_sandwich,
        ),
        (
            "prime-count identity and inequality for d up to 500",
            remark_checks,
        ),
        (
            "solver matches naive enumeration on random (d, N)",
            oracle_equivalence,
        ),
        (
            "zero-sum search matches exhaustive enumeration",
            zero_sum_equivalence,
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2}  {name} ({detail}; {secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2}  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
