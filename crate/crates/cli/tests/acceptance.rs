//! Acceptance suite: one pass/fail line per criterion.

use std::collections::{HashMap, HashSet};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use ppcount_core::endo::{phi_forward, phi_surjective_lift, HermEnd, IsogenyConfig};
use ppcount_core::forms::{class_number_tilde, enumerate_reduced, BinaryForm};
use ppcount_core::lattice::mass_unimodular;

type Check = Result<String, String>;
type FormIndex = HashMap<(i64, i64, i64), usize>;

fn ppcount(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ppcount"));
    cmd.args(["--format", "json"]).args(args).env_remove("PPCOUNT_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("failed to run ppcount")
}

fn run_json(args: &[&str]) -> Result<(Value, i32), String> {
    let out = ppcount(args, &[]);
    let code = out.status.code().unwrap_or(-1);
    let v = serde_json::from_slice(&out.stdout).map_err(|e| {
        format!(
            "`{}` gave no JSON ({e}); exit {code}; stderr: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        )
    })?;
    Ok((v, code))
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(t)
    } else {
        Err(format!("{what} took {t:.1?}, limit {limit:?}"))
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    for n in 1..=7 {
        let (v, code) = run_json(&["count", "--self-rank", &n.to_string()])?;
        if code != 0 || v["result"]["count"] != 1 {
            return Err(format!("rank {n}: exit {code}, count {}", v["result"]["count"]));
        }
    }
    let t = within(start, Duration::from_secs(10), "ranks 1..7")?;
    Ok(format!("count = 1 for n = 1..7 in {t:.2?}"))
}

/// Runs `classify --mass-check` for ranks 1..=16 once, shared by criteria 2 and 3.
fn classify_runs() -> Result<Vec<(usize, Value, Duration)>, String> {
    let mut runs = Vec::new();
    for n in 1..=16usize {
        let start = Instant::now();
        let (v, code) = run_json(&["classify", "--rank", &n.to_string(), "--mass-check", "--budget", "3600"])?;
        let t = start.elapsed();
        if code != 0 {
            return Err(format!("rank {n}: exit {code}"));
        }
        runs.push((n, v, t));
    }
    Ok(runs)
}

fn criterion_2(runs: &[(usize, Value, Duration)]) -> Check {
    let expected = [2, 2, 2, 2, 3, 3, 4, 5, 8];
    let mut times = Vec::new();
    for (n, h) in (8..=16).zip(expected) {
        let (_, v, t) = runs.iter().find(|r| r.0 == n).ok_or(format!("rank {n} missing"))?;
        let got = v["result"]["classes"].as_array().map_or(0, Vec::len);
        if v["complete"] != true || got != h {
            return Err(format!("h({n}) = {got}, expected {h} (complete = {})", v["complete"]));
        }
        if *t > Duration::from_secs(3600) {
            return Err(format!("rank {n} took {t:.1?}"));
        }
        times.push(format!("{n}:{:.1}s", t.as_secs_f64()));
    }
    Ok(format!("h(8..16) = 2,2,2,2,3,3,4,5,8 [{}]", times.join(" ")))
}

fn criterion_3(runs: &[(usize, Value, Duration)]) -> Check {
    for (n, v, _) in runs {
        let r = &v["result"];
        if r["mass_observed"] != r["mass_predicted"] {
            return Err(format!("rank {n}: {} vs {}", r["mass_observed"], r["mass_predicted"]));
        }
    }
    let (_, v8, _) = runs.iter().find(|r| r.0 == 8).ok_or("rank 8 missing")?;
    let auts: Vec<&Value> = v8["result"]["classes"]
        .as_array()
        .ok_or("rank 8 classes missing")?
        .iter()
        .map(|c| &c["aut_order"])
        .collect();
    if auts != [&Value::from(696_729_600u64), &Value::from(10_321_920u64)] {
        return Err(format!("rank 8 automorphism orders {auts:?}"));
    }
    Ok("exact mass equality for n = 1..16; |Aut(E8)| = 696729600, |Aut(I8)| = 10321920".into())
}

fn criterion_4() -> Check {
    let twice = mass_unimodular(32) * BigInt::from(2);
    let bound = BigRational::from_integer(BigInt::from(80_000_000));
    if twice >= bound {
        Ok(format!("2·mass(32) ≈ {:.4e} ≥ 8e7", twice.to_f64().unwrap_or(f64::NAN)))
    } else {
        Err(format!("2·mass(32) = {twice}"))
    }
}

/// Classes of primitive forms of determinant `d` among all forms with entries
/// in `[-m, m]`, joined by every transform with entries in `[-5, 5]`.
fn orbit_oracle(d: i64, m: i64, transforms: &[[i64; 4]]) -> (usize, Vec<usize>, FormIndex) {
    let mut index = HashMap::new();
    let mut forms = Vec::new();
    for a in 1..=m {
        for b in -m..=m {
            if (d + b * b) % a == 0 {
                let c = (d + b * b) / a;
                if c <= m {
                    index.insert((a, b, c), forms.len());
                    forms.push((a, b, c));
                }
            }
        }
    }
    let mut parent: Vec<usize> = (0..forms.len()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, &(a, b, c)) in forms.iter().enumerate() {
        for &[p, q, r, s] in transforms {
            // Tᵗ F T for T = ((p, q), (r, s))
            let a2 = a * p * p + 2 * b * p * r + c * r * r;
            let b2 = a * p * q + b * (p * s + q * r) + c * r * s;
            let c2 = a * q * q + 2 * b * q * s + c * s * s;
            if let Some(&j) = index.get(&(a2, b2, c2)) {
                let (x, y) = (root(&mut parent, i), root(&mut parent, j));
                parent[x] = y;
            }
        }
    }
    let gcd = |x: i64, y: i64| gcd_i64(x.abs(), y.abs());
    let mut classes = HashSet::new();
    for (i, &(a, b, c)) in forms.iter().enumerate() {
        if gcd(gcd(a, b), c) == 1 {
            classes.insert(root(&mut parent, i));
        }
    }
    let roots = (0..forms.len()).map(|i| root(&mut parent, i)).collect();
    (classes.len(), roots, index)
}

fn gcd_i64(mut x: i64, mut y: i64) -> i64 {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let mut transforms = Vec::new();
    for p in -5..=5i64 {
        for q in -5..=5 {
            for r in -5..=5 {
                for s in -5..=5 {
                    if (p * s - q * r).abs() == 1 {
                        transforms.push([p, q, r, s]);
                    }
                }
            }
        }
    }
    let mut lifts = 0;
    for d in 1..=50i64 {
        let dd = BigInt::from(d);
        let h = class_number_tilde(&dd);
        let (oracle, roots, index) = orbit_oracle(d, d + 8, &transforms);
        if h != oracle {
            return Err(format!("d = {d}: class_number_tilde {h}, orbit oracle {oracle}"));
        }
        let reps = enumerate_reduced(&dd, true);
        let mut seen = HashSet::new();
        for b in &reps {
            let key = (b.a.to_i64().unwrap(), b.b.to_i64().unwrap(), b.c.to_i64().unwrap());
            let i = *index.get(&key).ok_or(format!("d = {d}: {b:?} outside the oracle box"))?;
            if !seen.insert(roots[i]) {
                return Err(format!("d = {d}: two representatives share an orbit"));
            }
            let (a, t) = phi_surjective_lift(b, d as u64).map_err(|e| format!("d = {d}: {e}"))?;
            let back: BinaryForm = phi_forward(&a).map_err(|e| e.to_string())?;
            if b.transform(&t) != back || !a.is_polarization_rep() {
                return Err(format!("d = {d}: lift of {b:?} does not round-trip"));
            }
            lifts += 1;
        }
    }
    let t = within(start, Duration::from_secs(60), "d ≤ 50")?;
    Ok(format!("oracle agrees for d = 1..50, {lifts} lifts round-trip, {t:.2?}"))
}

fn float_positive(h: &HermEnd) -> bool {
    let eig = h.rescaled_matrix().symmetric_eigen().eigenvalues;
    let scale = eig.iter().fold(1f64, |m, x| m.max(x.abs()));
    eig.iter().all(|&x| x > 1e-9 * scale)
}

fn coherence_config(config: &IsogenyConfig, samples: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = format!("{:?}", config.degrees());
    let err = |e: ppcount_core::endo::EndoError| format!("{tag}: {e}");
    for i in 0..samples {
        let a = HermEnd::random(config, 5, &mut rng);
        let b = HermEnd::random(config, 5, &mut rng);
        let c = HermEnd::random(config, 5, &mut rng);

        let exact = a.det_int().to_f64().unwrap();
        let approx = a.rescaled_matrix().determinant();
        if (exact - approx).abs() > 1e-6 * exact.abs().max(1.0) {
            return Err(format!("{tag} sample {i}: det {exact} vs float {approx}"));
        }

        let hermitian = match i % 3 {
            0 => HermEnd::random_hermitian(config, 5, &mut rng),
            1 => a.conj_transpose().multiply(&a).map_err(err)?,
            _ => a.conj_transpose().multiply(&a).map_err(err)?.add(&HermEnd::identity(config)).map_err(err)?,
        };
        if hermitian.is_positive_definite().map_err(err)? != float_positive(&hermitian) {
            return Err(format!("{tag} sample {i}: positivity disagrees for {hermitian}"));
        }

        let m = |x: &HermEnd, y: &HermEnd| x.multiply(y).map_err(err);
        let s = |x: &HermEnd, y: &HermEnd| x.add(y).map_err(err);
        let laws = [
            m(&m(&a, &b)?, &c)? == m(&a, &m(&b, &c)?)?,
            m(&a, &s(&b, &c)?)? == s(&m(&a, &b)?, &m(&a, &c)?)?,
            m(&s(&a, &b)?, &c)? == s(&m(&a, &c)?, &m(&b, &c)?)?,
            s(&a, &b)? == s(&b, &a)?,
            m(&a, &HermEnd::identity(config))? == a,
            m(&HermEnd::identity(config), &a)? == a,
            m(&a, &b)?.conj_transpose() == m(&b.conj_transpose(), &a.conj_transpose())?,
        ];
        if let Some(k) = laws.iter().position(|ok| !ok) {
            return Err(format!("{tag} sample {i}: algebraic law {k} fails"));
        }
    }
    Ok(())
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let mut configs: Vec<Vec<u64>> = (1..=10).map(|d| vec![1, d]).collect();
    configs.push(vec![1, 2, 4]);
    configs.push(vec![1, 2, 3]);
    for (k, degrees) in configs.iter().enumerate() {
        let config = IsogenyConfig::new(degrees).map_err(|e| e.to_string())?;
        coherence_config(&config, 1000, 1000 + k as u64)?;
    }
    let t = within(start, Duration::from_secs(60), "coherence")?;
    Ok(format!("1000 samples × {} configs coherent in {t:.2?}", configs.len()))
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let limits = [
        ("endomorphism_residual", 1e-10),
        ("rosati_involution", 1e-9),
        ("hermitian_criterion", f64::INFINITY),
        ("degree_determinant", f64::INFINITY),
    ];
    for degrees in ["1", "1,2", "1,3", "1,2,4"] {
        let (v, code) = run_json(&["verify", "--degrees", degrees, "--trials", "100", "--seed", "7"])?;
        if code != 0 || v["result"]["pass"] != true {
            return Err(format!("({degrees}): exit {code}"));
        }
        let checks = v["result"]["checks"].as_array().ok_or("no checks")?;
        for (name, limit) in limits {
            let c = checks
                .iter()
                .find(|c| c["name"] == name)
                .ok_or(format!("({degrees}): check {name} missing"))?;
            let residual = c["residual"].as_f64().unwrap_or(f64::NAN);
            if c["pass"] != true || residual.is_nan() || residual > limit {
                return Err(format!("({degrees}): {name} residual {residual}"));
            }
        }
    }
    let t = within(start, Duration::from_secs(60), "period suite")?;
    Ok(format!("all checks pass for (1), (1,2), (1,3), (1,2,4) in {t:.2?}"))
}

fn criterion_8() -> Check {
    let commands: [&[&str]; 6] = [
        &["count", "--self-rank", "12", "--seed", "7"],
        &["count", "--surface-degree", "30"],
        &["classify", "--rank", "11", "--mass-check", "--seed", "3"],
        &["classify", "--rank", "9", "--seed", "5"],
        &["form", "classnum", "--det", "47"],
        &["verify", "--degrees", "1,2,4", "--trials", "25", "--seed", "9"],
    ];
    for args in commands {
        let runs = [
            ppcount(args, &[]),
            ppcount(args, &[]),
            ppcount(&[args, &["--threads", "1"]].concat(), &[]),
            ppcount(&[args, &["--threads", "3"]].concat(), &[]),
            ppcount(args, &[("PPCOUNT_THREADS", "2")]),
        ];
        let first = &runs[0].stdout;
        if first.is_empty() || runs.iter().any(|r| !r.status.success() || &r.stdout != first) {
            return Err(format!("`{}` output varies between runs", args.join(" ")));
        }
    }
    Ok(format!("{} commands byte-identical across 5 runs and thread counts", commands.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, result: Check| match result {
        Ok(msg) => println!("criterion {n}: PASS  {msg}"),
        Err(msg) => {
            failed += 1;
            println!("criterion {n}: FAIL  {msg}");
        }
    };
    report(1, criterion_1());
    let runs = classify_runs();
    report(2, runs.as_ref().map_err(Clone::clone).and_then(|r| criterion_2(r)));
    report(3, runs.as_ref().map_err(Clone::clone).and_then(|r| criterion_3(r)));
    report(4, criterion_4());
    report(5, criterion_5());
    report(6, criterion_6());
    report(7, criterion_7());
    report(8, criterion_8());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria pass");
}
