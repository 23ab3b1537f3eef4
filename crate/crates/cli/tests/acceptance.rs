//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs the `uniteq` binary against a private cache directory and checks
//! the library directly where the criterion is a property. Time limits are
//! pinned per criterion; a check that exceeds its limit fails.

use std::collections::BTreeSet;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use uniteq_core::cyclofield::{same_field, CyclicField};
use uniteq_core::lattice::{
    default_delta, is_lll_reduced, lll_reduce, shortest_vector_lower_bound_sq, IntLattice,
};
use uniteq_core::polyring::{factor_mod_p_shape, resultant};
use uniteq_core::sieve::{compute_rl, residue_test};
use uniteq_core::solver::{enumerate_solutions, SolutionReport};
use uniteq_core::units::{product, saturated_units, AssertedMode, UnitSystem};
use uniteq_core::{Error, IntPoly};

/// Table polynomials, lowest coefficient first.
const TABLE: [(&str, u64, [i64; 6]); 6] = [
    ("F_11", 11, [-1, 3, 3, -4, -1, 1]),
    ("F_31", 31, [-5, 1, 21, -12, -1, 1]),
    ("F_341,1", 341, [3136, 2016, -300, -136, 1, 1]),
    ("F_341,2", 341, [1431, 3039, 41, -136, 1, 1]),
    ("F_341,3", 341, [67, -1053, 723, -136, 1, 1]),
    ("F_341,4", 341, [67, -371, -641, -136, 1, 1]),
];

/// Criteria whose literal statement cannot hold, with the labels expected
/// to fail. Anything else failing, or these passing, is a regression.
const KNOWN_UNATTAINABLE: [(&str, &[&str]); 1] =
    [("4b", &["F_31", "F_341,1", "F_341,2", "F_341,3", "F_341,4"])];

struct Env {
    bin: &'static str,
    cache: tempfile::TempDir,
}

impl Env {
    fn run(&self, args: &[&str]) -> Output {
        Command::new(self.bin)
            .args(args)
            .arg("--cache-dir")
            .arg(self.cache.path())
            .output()
            .expect("binary runs")
    }

    fn json(&self, args: &[&str]) -> (Value, i32) {
        let mut a = args.to_vec();
        a.push("--json");
        let out = self.run(&a);
        let code = out.status.code().unwrap_or(-1);
        let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
        (v, code)
    }
}

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

fn check(
    id: &'static str,
    title: &'static str,
    limit_secs: u64,
    f: impl FnOnce() -> Result<String, String>,
) -> Outcome {
    let t = Instant::now();
    let r = f();
    let elapsed = t.elapsed();
    let limit = Duration::from_secs(limit_secs);
    let (mut pass, mut detail) = match r {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if pass && elapsed > limit {
        pass = false;
        detail = format!("{detail}; exceeded {limit_secs}s");
    }
    let o = Outcome {
        id,
        title,
        pass,
        detail,
        elapsed,
        limit,
    };
    println!(
        "{} [{}] {} ({:.2}s / {}s): {}",
        if o.pass { "PASS" } else { "FAIL" },
        o.id,
        o.title,
        o.elapsed.as_secs_f64(),
        o.limit.as_secs(),
        o.detail
    );
    o
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn load_fields(env: &Env) -> Result<Vec<(CyclicField, String)>, String> {
    let (v, code) = env.json(&["fields", "--ell", "5"]);
    ensure(code == 0, format!("fields exit code {code}"))?;
    let rows = v.as_array().ok_or("fields output is not an array")?;
    rows.iter()
        .map(|r| {
            let path = r["file"].as_str().ok_or("row without file")?.to_string();
            let s = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            let f = CyclicField::from_json(&s).map_err(|e| e.to_string())?;
            Ok((f, path))
        })
        .collect()
}

/// Table label for a constructed field, by same_field against every row.
fn table_label(f: &CyclicField) -> Option<&'static str> {
    let hits: Vec<&str> = TABLE
        .iter()
        .filter(|(_, n, _)| *n == f.conductor())
        .filter(|(_, _, c)| same_field(f.minpoly(), &IntPoly::from_ints(c)).is_true())
        .map(|(l, _, _)| *l)
        .collect();
    (hits.len() == 1).then(|| hits[0])
}

fn solve(env: &Env, path: &str) -> Result<(SolutionReport, i32), String> {
    let (v, code) = env.json(&["solve", "--field", path]);
    let rep: SolutionReport =
        serde_json::from_value(v).map_err(|e| format!("solve {path}: {e}"))?;
    Ok((rep, code))
}

fn det_q(m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .into_iter()
        .map(|r| r.into_iter().map(BigRational::from_integer).collect())
        .collect();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigInt::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let piv = a[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            let f = &a[r][c] / &piv;
            for k in c..n {
                let v = &f * &a[c][k];
                a[r][k] -= v;
            }
        }
    }
    det.to_integer()
}

fn sylvester(f: &[i64], g: &[i64]) -> Vec<Vec<BigInt>> {
    let (m, n) = (f.len() - 1, g.len() - 1);
    let mut s = vec![vec![BigInt::zero(); m + n]; m + n];
    for i in 0..n {
        for (j, &c) in f.iter().rev().enumerate() {
            s[i][i + j] = BigInt::from(c);
        }
    }
    for i in 0..m {
        for (j, &c) in g.iter().rev().enumerate() {
            s[n + i][i + j] = BigInt::from(c);
        }
    }
    s
}

fn random_poly(rng: &mut ChaCha8Rng) -> Vec<i64> {
    let d = rng.gen_range(1..=6);
    let mut v: Vec<i64> = (0..d).map(|_| rng.gen_range(-20..=20)).collect();
    let mut lead = 0;
    while lead == 0 {
        lead = rng.gen_range(-9..=9);
    }
    v.push(lead);
    v
}

fn main() {
    let env = Env {
        bin: env!("CARGO_BIN_EXE_uniteq"),
        cache: tempfile::tempdir().expect("temp dir"),
    };
    let mut outcomes = Vec::new();

    outcomes.push(check(
        "1",
        "rl --ell 5 gives R_5 and its factorization",
        1,
        || {
            let out = env.run(&["rl", "--ell", "5"]);
            let s = String::from_utf8_lossy(&out.stdout);
            ensure(out.status.success(), "nonzero exit")?;
            ensure(
                s.contains("-210736858987743 = -3 * 11^9 * 31^3"),
                format!("got {s:?}"),
            )?;
            Ok(s.trim().to_string())
        },
    ));

    outcomes.push(check(
        "2",
        "S_5 = {11, 31}; candidates 11, 31, 341 with N^4",
        1,
        || {
            let out = env.run(&["sl", "--ell", "5"]);
            let s = String::from_utf8_lossy(&out.stdout);
            ensure(s.trim() == "S_5 = {11, 31}", format!("sl printed {s:?}"))?;
            let (v, code) = env.json(&["candidates", "--ell", "5"]);
            ensure(code == 0, "candidates failed")?;
            let cands = v["candidates"].as_array().ok_or("no candidates")?;
            let got: Vec<(u64, String)> = cands
                .iter()
                .map(|c| {
                    (
                        c["conductor"].as_u64().unwrap_or(0),
                        c["discriminant"].as_str().unwrap_or("").to_string(),
                    )
                })
                .collect();
            let want: Vec<(u64, String)> = [11u64, 31, 341]
                .iter()
                .map(|&n| (n, BigInt::from(n).pow(4).to_string()))
                .collect();
            ensure(got == want, format!("candidates {got:?}"))?;
            Ok("conductors 11, 31, 341".into())
        },
    ));

    outcomes.push(check(
        "3",
        "ell = 3 refused; ell does not divide R_ell",
        60,
        || {
            let out = env.run(&["rl", "--ell", "3"]);
            let err = String::from_utf8_lossy(&out.stderr);
            ensure(out.status.code() == Some(1), "rl --ell 3 did not exit 1")?;
            ensure(
                err.contains("R_3") && err.contains("= 0"),
                format!("message {err:?}"),
            )?;
            for ell in [5u64, 7, 11, 13, 17, 19, 23, 29, 31] {
                let r = compute_rl(ell).map_err(|e| e.to_string())?;
                ensure(!r.is_zero(), format!("R_{ell} = 0"))?;
                ensure(
                    !(&r % BigInt::from(ell)).is_zero(),
                    format!("{ell} divides R_{ell}"),
                )?;
            }
            Ok("9 primes checked".into())
        },
    ));

    let mut fields = Vec::new();
    outcomes.push(check(
        "4a",
        "six fields match the table; disc(F) = N^4; totally ramified",
        120,
        || {
            fields = load_fields(&env)?;
            let by_n: Vec<u64> = fields.iter().map(|(f, _)| f.conductor()).collect();
            ensure(
                by_n == [11, 31, 341, 341, 341, 341],
                format!("conductors {by_n:?}"),
            )?;
            let mut labels = BTreeSet::new();
            for (f, _) in &fields {
                let label =
                    table_label(f).ok_or(format!("{} matches no unique table row", f.label()))?;
                labels.insert(label);
                let n4 = BigInt::from(f.conductor()).pow(4);
                ensure(
                    f.discriminant() == &n4,
                    format!("{label}: field discriminant {}", f.discriminant()),
                )?;
                let pd = uniteq_core::polyring::discriminant(f.minpoly());
                ensure(
                    pd == &n4 * f.index() * f.index(),
                    format!("{label}: disc(minpoly) != index^2 N^4"),
                )?;
                for p in f.ramified_primes() {
                    let shape = factor_mod_p_shape(f.minpoly(), p);
                    ensure(shape == vec![(1, 5)], format!("{label} mod {p}: {shape:?}"))?;
                }
            }
            ensure(labels.len() == 6, "table rows not matched one-to-one")?;
            Ok("6 fields, bijection with the table".into())
        },
    ));

    outcomes.push(check(
        "4b",
        "literal: disc(minpoly) = N^4 for every field",
        120,
        || {
            let mut bad = Vec::new();
            for (f, _) in &fields {
                let n4 = BigInt::from(f.conductor()).pow(4);
                if uniteq_core::polyring::discriminant(f.minpoly()) != n4 {
                    bad.push(format!(
                        "{} (index {})",
                        table_label(f).unwrap_or("?"),
                        f.index()
                    ));
                }
            }
            // the table polynomials themselves are no better
            let table_bad: Vec<&str> = TABLE
                .iter()
                .filter(|(_, n, c)| {
                    uniteq_core::polyring::discriminant(&IntPoly::from_ints(c))
                        != BigInt::from(*n).pow(4)
                })
                .map(|(l, _, _)| *l)
                .collect();
            ensure(
                bad.is_empty(),
                format!(
                "non-monogenic, no generator has disc N^4: {}; table polynomials failing too: {}",
                bad.join(", "),
                table_bad.join(", ")
            ),
            )?;
            Ok("all monogenic".into())
        },
    ));

    let mut f11_report = None;
    outcomes.push(check(
        "5",
        "F_11: 570 solutions, 95 free orbits, 2+eta, Evertse cap",
        1800,
        || {
            let (f, path) = fields
                .iter()
                .find(|(f, _)| f.conductor() == 11)
                .ok_or("no F_11")?;
            let (rep, code) = solve(&env, path)?;
            ensure(code == 2, format!("exit code {code}"))?;
            ensure(
                rep.count == 570 && rep.solutions.len() == 570,
                format!("count {}", rep.count),
            )?;
            ensure(
                rep.orbits.len() == 95,
                format!("{} orbits", rep.orbits.len()),
            )?;
            ensure(
                rep.orbits.iter().all(|o| o.len() == 6),
                "orbit of size != 6",
            )?;
            let two_eta = f.add(&f.from_int(2), &f.eta()).map_err(|e| e.to_string())?;
            let (y, _) = f.period_coords(&two_eta).map_err(|e| e.to_string())?;
            ensure(
                rep.solutions.iter().any(|s| s.period_coords == y),
                "2 + eta missing",
            )?;
            let cap = BigInt::from(3) * BigInt::from(7).pow(15);
            ensure(BigInt::from(rep.count) <= cap, "Evertse cap exceeded")?;
            let b: u64 = rep.bounds.final_bound.parse().map_err(|_| "bad bound")?;
            ensure(b <= 100, format!("B_final = {b}"))?;
            let detail = format!(
                "bounds {} -> {:?}, B_final {b}",
                rep.bounds.initial.clone().unwrap_or_default(),
                rep.bounds.reduced_sequence
            );
            f11_report = Some(rep);
            Ok(detail)
        },
    ));

    outcomes.push(check(
        "5x",
        "F_11 exhaustive at B_final + 5; budget overrun fails loudly",
        1800,
        || {
            let rep = f11_report.as_ref().ok_or("no F_11 report")?;
            let (f, path) = fields
                .iter()
                .find(|(f, _)| f.conductor() == 11)
                .ok_or("no F_11")?;
            let gens: Vec<_> = rep
                .units
                .generators
                .iter()
                .map(|g| {
                    let y: Vec<BigInt> = g.iter().map(|s| s.parse().expect("int")).collect();
                    f.from_period_coords(&y).expect("element")
                })
                .collect();
            let u = UnitSystem::from_generators(f, gens, AssertedMode::Cyclotomic)
                .map_err(|e| e.to_string())?;
            let b: u64 = rep.bounds.final_bound.parse().map_err(|_| "bad bound")?;
            let wider =
                enumerate_solutions(f, &u, b + 5, 1_000_000_000).map_err(|e| e.to_string())?;
            let mut a: Vec<Vec<BigInt>> = wider
                .solutions
                .iter()
                .map(|(_, l)| f.period_coords(l).expect("coords").0)
                .collect();
            a.sort();
            a.dedup();
            let mut want: Vec<Vec<BigInt>> = rep
                .solutions
                .iter()
                .map(|s| s.period_coords.clone())
                .collect();
            want.sort();
            ensure(a == want, format!("{} solutions at B_final + 5", a.len()))?;
            match enumerate_solutions(f, &u, 8, 10) {
                Err(Error::BudgetExceeded(10)) => {}
                other => {
                    return Err(format!(
                        "budget 10 gave {:?}",
                        other.map(|e| e.solutions.len())
                    ))
                }
            }
            let out = env.run(&["solve", "--field", path, "--budget", "10", "--no-cache"]);
            ensure(
                out.status.code() == Some(1),
                "CLI budget overrun did not exit 1",
            )?;
            Ok(format!("same 570 at bound {}", b + 5))
        },
    ));

    outcomes.push(check(
        "6",
        "F_31 and F_341,i: no solutions, exit 2 with caveat",
        1800,
        || {
            let mut seen = Vec::new();
            for (f, path) in fields.iter().filter(|(f, _)| f.conductor() != 11) {
                let (rep, code) = solve(&env, path)?;
                let label = table_label(f).unwrap_or("?");
                ensure(code == 2, format!("{label}: exit {code}"))?;
                ensure(rep.count == 0, format!("{label}: {} solutions", rep.count))?;
                ensure(
                    rep.caveat
                        .as_deref()
                        .is_some_and(|c| c.contains("unit subgroup")),
                    format!("{label}: caveat missing"),
                )?;
                seen.push(format!("{label} B_final {}", rep.bounds.final_bound));
            }
            ensure(seen.len() == 5, "expected five fields")?;
            Ok(seen.join(", "))
        },
    ));

    outcomes.push(check(
        "7",
        "residue post-check; check-sg 5..50; Nagell -1..50",
        60,
        || {
            let rep = f11_report.as_ref().ok_or("no F_11 report")?;
            let (f, _) = fields
                .iter()
                .find(|(f, _)| f.conductor() == 11)
                .ok_or("no F_11")?;
            for s in &rep.solutions {
                let l = f
                    .from_period_coords(&s.period_coords)
                    .map_err(|e| e.to_string())?;
                let b = f.residue_mod_ramified(&l, 11).map_err(|e| e.to_string())?;
                ensure(residue_test(b as i64, 11, 5), format!("residue {b} fails"))?;
            }
            ensure(rep.checks.residue_check, "report residue flag false")?;
            let (v, code) = env.json(&["check-sg", "--p", "5", "--to", "50"]);
            ensure(code == 0, "check-sg failed")?;
            let rows = v.as_array().ok_or("check-sg output")?;
            let ps: Vec<u64> = rows.iter().map(|r| r["p"].as_u64().unwrap_or(0)).collect();
            ensure(
                ps == [5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47],
                format!("primes {ps:?}"),
            )?;
            ensure(
                rows.iter().all(|r| r["exceptional"] == Value::Bool(true)),
                "check-sg false",
            )?;
            let out = env.run(&["check-sg", "--p", "4"]);
            ensure(out.status.code() == Some(1), "check-sg --p 4 accepted")?;
            let (v, _) = env.json(&["nagell", "--k-from", "-1", "--k-to", "50"]);
            let rows = v.as_array().ok_or("nagell output")?;
            ensure(rows.len() == 52, format!("{} rows", rows.len()))?;
            for r in rows {
                let k = BigInt::from(r["k"].as_i64().ok_or("k")?);
                let base: BigInt = &k * &k + 3 * &k + 9;
                let disc: BigInt = r["disc"]
                    .as_str()
                    .ok_or("disc")?
                    .parse()
                    .map_err(|_| "disc")?;
                ensure(
                    r["exceptional"] == Value::Bool(true),
                    format!("k = {k} not exceptional"),
                )?;
                ensure(disc == &base * &base, format!("k = {k}: disc {disc}"))?;
            }
            Ok("570 residues, 13 primes, 52 cubics".into())
        },
    ));

    outcomes.push(check(
        "8",
        "resultant, LLL, regulator and period properties",
        300,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            for _ in 0..500 {
                let (f, g) = (random_poly(&mut rng), random_poly(&mut rng));
                let r = resultant(&IntPoly::from_ints(&f), &IntPoly::from_ints(&g));
                ensure(
                    r == det_q(sylvester(&f, &g)),
                    format!("resultant {f:?} {g:?}"),
                )?;
            }
            let delta = default_delta();
            let mut lll_cases = 0;
            while lll_cases < 100 {
                let n = rng.gen_range(2..=5);
                let rows: Vec<Vec<i64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.gen_range(-10_000..=10_000)).collect())
                    .collect();
                let m: Vec<Vec<BigInt>> = rows
                    .iter()
                    .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                    .collect();
                let d = det_q(m.clone());
                if d.is_zero() {
                    continue;
                }
                lll_cases += 1;
                let out = lll_reduce(&IntLattice::new(m).expect("basis"), &delta)
                    .map_err(|e| e.to_string())?;
                ensure(is_lll_reduced(&out.lattice, &delta), "not reduced")?;
                ensure(
                    det_q(out.lattice.basis.clone()).abs() == d.abs(),
                    "determinant changed",
                )?;
                ensure(
                    det_q(out.transform.clone()).abs().is_one(),
                    "transform not unimodular",
                )?;
                // any lattice vector is at least the certified bound
                let lower = shortest_vector_lower_bound_sq(&out.lattice);
                for _ in 0..20 {
                    let c: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
                    if c.iter().all(|&x| x == 0) {
                        continue;
                    }
                    let v: BigInt = (0..n)
                        .map(|k| {
                            (0..n)
                                .map(|i| BigInt::from(c[i]) * &out.lattice.basis[i][k])
                                .sum::<BigInt>()
                        })
                        .map(|x| &x * &x)
                        .sum();
                    ensure(
                        lower <= BigRational::from_integer(v),
                        "vector below certified bound",
                    )?;
                }
            }
            let (f, _) = fields
                .iter()
                .find(|(f, _)| f.conductor() == 11)
                .ok_or("no F_11")?;
            let u = saturated_units(f, &[2]).map_err(|e| e.to_string())?;
            for t in 0..10 {
                let mut a = vec![vec![0i64; 4]; 4];
                for (i, row) in a.iter_mut().enumerate() {
                    row[i] = 1;
                }
                for _ in 0..4 {
                    let (i, j) = (rng.gen_range(0..4), rng.gen_range(0..4));
                    if i != j {
                        let s = if rng.gen_bool(0.5) { 1 } else { -1 };
                        for k in 0..4 {
                            a[i][k] += s * a[j][k];
                        }
                    }
                }
                let gens = a
                    .iter()
                    .map(|row| {
                        let e: Vec<BigInt> = row.iter().map(|&x| BigInt::from(x)).collect();
                        product(f, u.generators(), &e)
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())?;
                let v = UnitSystem::from_generators(f, gens, AssertedMode::Cyclotomic)
                    .map_err(|e| e.to_string())?;
                let rel = (v.regulator_f64() - u.regulator_f64()).abs() / u.regulator_f64();
                ensure(
                    rel < 1e-9,
                    format!("transform {t}: relative regulator change {rel}"),
                )?;
            }
            for (f, _) in &fields {
                let e = f.period_cross_check(320);
                ensure(e < -200.0, format!("{}: log2 error {e}", f.label()))?;
            }
            Ok("500 resultants, 100 lattices, 10 transforms, 6 period checks".into())
        },
    ));

    let mut unexpected = 0;
    for o in &outcomes {
        let known = KNOWN_UNATTAINABLE.iter().find(|(id, _)| *id == o.id);
        match (o.pass, known) {
            (true, None) => {}
            (false, Some((_, labels))) => {
                let all_named = labels.iter().all(|l| o.detail.contains(l));
                let only_named = !o.detail.contains("F_11 ");
                if !(all_named && only_named) {
                    unexpected += 1;
                }
            }
            _ => unexpected += 1,
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!(
        "acceptance: {passed}/{} passed; {} failing as documented unattainable; {unexpected} unexpected",
        outcomes.len(),
        outcomes.len() - passed - unexpected.min(outcomes.len() - passed)
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
