//! Acceptance criteria, one test per criterion.
//!
//! Each test prints a single `criterion NN PASS|FAIL ...` line (visible with
//! `--nocapture`) and then asserts. Run with
//! `cargo test -p ellcover-cli --test acceptance -- --nocapture --test-threads 1`.

use std::process::Command;

use serde_json::Value;

use ellcover::characterize::{derive_constants, inner_property_check, quasi_convexity_certify, InnerOptions};
use ellcover::cover::{theta0_case_audit, theta0_semi_axes, Theta0Case, Theta0Cover, Theta0Regime};
use ellcover::distance::{
    ahlfors_certify, ball_volume_mc, rho_one_sided, theta0_case, triangle_constant, AhlforsOptions, NswMetric,
    Theta0Metric,
};
use ellcover::ellipsoid::{check_reverse_inclusion_tol, random_ellipsoid, random_nested_pair};
use ellcover::numeric::{nelder_mead, norm, power_sum_bounds, solve_power_sum};
use ellcover::sampling::Region;
use ellcover::{Cover, Ellipsoid, Sampler, SeededRng};

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id:02} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id:02} ({name}) failed: {detail}");
}

#[test]
fn criterion_01_reverse_inclusion() {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for n in 2..=5 {
        for same_center in [false, true] {
            let count = if same_center { 2_500 } else { 10_000 };
            let s = Sampler::new(100 + n as u64).substream(same_center as u64);
            let out = s.map(count, |_, rng| -> ellcover::Result<(bool, f64)> {
                let (eta, xi) = random_nested_pair(rng, n, (-3.0, 3.0), same_center)?;
                let r = check_reverse_inclusion_tol(&eta, &xi, 1e-9)?;
                Ok((r.pass, r.get("factor").unwrap() / r.get("bound").unwrap()))
            });
            for (i, o) in out.into_iter().enumerate() {
                let (pass, used) = o.expect("nested pair");
                worst = worst.max(used);
                if !pass {
                    failures.push((n, same_center, i));
                }
            }
        }
    }
    verdict(
        1,
        "reverse inclusion",
        failures.is_empty(),
        format!(
            "50000 nested pairs over n = 2..5, worst factor/bound {worst:.6}, failures {:?}",
            &failures[..failures.len().min(5)]
        ),
    );
}

/// Largest outer gauge over the boundary of `inner`: the best of `samples`
/// boundary points, then polished by Nelder–Mead over the direction.
fn sampled_factor(inner: &Ellipsoid, outer: &Ellipsoid, rng: &mut SeededRng, samples: usize) -> f64 {
    let n = inner.dim();
    let g = |v: &[f64]| {
        let l = norm(v);
        if l == 0.0 {
            return 0.0;
        }
        let u: Vec<f64> = v.iter().map(|c| c / l).collect();
        outer.gauge(&inner.boundary_point(&u)).unwrap()
    };
    let mut best = (0.0, vec![0.0; n]);
    for i in 0..samples {
        let u = if n == 2 {
            let a = std::f64::consts::TAU * i as f64 / samples as f64;
            vec![a.cos(), a.sin()]
        } else {
            rng.unit_vector(n)
        };
        let v = g(&u);
        if v > best.0 {
            best = (v, u);
        }
    }
    let (_, neg) = nelder_mead(|v| -g(v), &best.1, 0.02, 1e-16, 4000);
    best.0.max(-neg)
}

#[test]
fn criterion_02_containment_oracle() {
    let per_dim = 250;
    let mut disagreements = Vec::new();
    let mut contained = 0;
    let mut near = 0;
    for n in 2..=5 {
        let s = Sampler::new(200 + n as u64);
        let out = s.map(per_dim, |_, rng| {
            let outer = random_ellipsoid(rng, n, (-1.0, 1.0), 0.3).unwrap();
            let inner = random_ellipsoid(rng, n, (-2.5, 0.0), 0.3).unwrap();
            let predicate = inner.is_subset_of(&outer).unwrap();
            let oracle = sampled_factor(&inner, &outer, rng, 10_000);
            (predicate, oracle)
        });
        for (i, (predicate, oracle)) in out.into_iter().enumerate() {
            contained += predicate as usize;
            if (oracle - 1.0).abs() <= 1e-8 {
                near += 1;
                continue;
            }
            if predicate != (oracle <= 1.0) {
                disagreements.push((n, i, oracle));
            }
        }
    }
    verdict(
        2,
        "containment vs sampling oracle",
        disagreements.is_empty(),
        format!(
            "{} pairs (n = 2..5), {contained} contained, {near} within 1e-8 of the boundary, disagreements {:?}",
            4 * per_dim,
            &disagreements[..disagreements.len().min(5)]
        ),
    );
}

#[test]
fn criterion_03_theta0_structure() {
    let cover = Theta0Cover;
    let s = Sampler::new(300);
    let samples = 10_000;
    // Heights and scales spread over all four regimes.
    let draws = s.map(samples, |_, rng| {
        let t = rng.uniform(-8.0, 30.0);
        let h = rng.uniform(-14.0, 3.0).exp2() * if rng.coin(0.5) { 1.0 } else { -1.0 };
        let ds = rng.uniform(0.0, 12.0);
        (h, t, ds)
    });
    let mut area_err = 0.0f64;
    let mut regimes = [0usize; 4];
    let mut nest_fail = 0;
    for &(h, t, ds) in &draws {
        let (s1, s2, g) = theta0_semi_axes(h, t);
        regimes[match g {
            Theta0Regime::Coarse => 0,
            Theta0Regime::Round => 1,
            Theta0Regime::Middle => 2,
            Theta0Regime::Flat => 3,
        }] += 1;
        area_err = area_err.max((s1 * s2 / (-t).exp2() - 1.0).abs());
        let x = [0.7, h];
        let big = cover.eval(&x, t).unwrap();
        let small = cover.eval(&x, t + ds).unwrap();
        if !small.is_subset_of(&big).unwrap() {
            nest_fail += 1;
        }
    }
    // Semi-axes just either side of each regime boundary.
    let mut jump = 0.0f64;
    let eps = 1e-14;
    for i in 0..200 {
        let t = 0.05 + 0.15 * i as f64;
        for hb in [(-t / 3.0).exp2(), (-t / 2.0).exp2()] {
            let (a1, a2, _) = theta0_semi_axes(hb * (1.0 - eps), t);
            let (b1, b2, _) = theta0_semi_axes(hb * (1.0 + eps), t);
            jump = jump.max((a1 / b1 - 1.0).abs()).max((a2 / b2 - 1.0).abs());
        }
        for h in [0.3, 1.7] {
            let (a1, a2, _) = theta0_semi_axes(h, -1e-15);
            let (b1, b2, _) = theta0_semi_axes(h, 1e-15);
            jump = jump.max((a1 / b1 - 1.0).abs()).max((a2 / b2 - 1.0).abs());
        }
    }
    let pass = area_err <= 1e-12 && jump <= 1e-12 && nest_fail == 0 && regimes.iter().all(|c| *c > 0);
    verdict(
        3,
        "theta0 table",
        pass,
        format!(
            "area error {area_err:.2e}, boundary jump {jump:.2e}, nesting failures {nest_fail}/{samples}, regime counts {regimes:?}"
        ),
    );
}

#[test]
fn criterion_04_theta0_case_bounds() {
    let region = Region::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for (tag, case) in [(1, Theta0Case::Case1), (2, Theta0Case::Case2)] {
        let r = theta0_case_audit(case, &Sampler::new(400 + tag), &region, 10_000).unwrap();
        let pairs = r.get("pairs").unwrap();
        pass &= r.pass && pairs >= 9_000.0;
        detail.push(format!(
            "case {tag}: {pairs} pairs, worst fwd/bound {:.4}, worst rev/bound {:.4}",
            r.get("worst_fwd_ratio").unwrap(),
            r.get("worst_rev_ratio").unwrap()
        ));
    }
    verdict(4, "theta0 case bounds", pass, detail.join("; "));
}

#[test]
fn criterion_05_closed_form_vs_induced() {
    let s = Sampler::new(500);
    let out = s.map(10_000, |_, rng| {
        let x = vec![rng.uniform(-4.0, 4.0), rng.uniform(-12.0, 2.0).exp2() * if rng.coin(0.5) { 1.0 } else { -1.0 }];
        let ell = rng.uniform(-12.0, 1.0).exp2();
        let u = rng.unit_vector(2);
        let y = vec![x[0] + ell * u[0], x[1] + ell * u[1]];
        let closed = theta0_case(&x, &y).unwrap();
        let induced = rho_one_sided(&Theta0Cover, &x, &y).unwrap();
        (closed, induced)
    });
    let mut counts = [0usize; 4];
    let mut worst_rel = 0.0f64;
    let mut case3_ratio = (f64::INFINITY, 0.0f64);
    let mut pass = true;
    for (closed, induced) in out {
        counts[closed.case as usize] += 1;
        let rel = (closed.value / induced - 1.0).abs();
        worst_rel = worst_rel.max(rel);
        if closed.case == 3 {
            let q = closed.max_form.unwrap() / induced;
            case3_ratio = (case3_ratio.0.min(q), case3_ratio.1.max(q));
            pass &= (1.0 / 8.0..=8.0).contains(&q);
        } else {
            pass &= rel <= 1e-6;
        }
    }
    pass &= counts[1] > 0 && counts[2] > 0 && counts[3] > 0;
    verdict(
        5,
        "closed form vs induced",
        pass,
        format!(
            "case counts {:?}, worst relative gap {worst_rel:.2e} (all cases), case-3 max-form ratio in [{:.4}, {:.4}]",
            &counts[1..],
            case3_ratio.0,
            case3_ratio.1
        ),
    );
}

#[test]
fn criterion_06_power_sum() {
    let s = Sampler::new(600);
    let out = s.map(10_000, |i, rng| {
        let d = 2 + i % 3;
        let a: Vec<f64> = (0..d).map(|_| rng.uniform(-8.0, 8.0).exp2()).collect();
        let beta: Vec<f64> = (0..d).map(|_| rng.uniform(-3.0, 3.0).exp2()).collect();
        let x = solve_power_sum(&a, &beta).unwrap();
        let residual = (a.iter().zip(&beta).map(|(ai, bi)| ai * x.powf(*bi)).sum::<f64>() - 1.0).abs();
        let (lo, hi) = power_sum_bounds(&a, &beta);
        (residual, lo < x && x < hi)
    });
    let worst = out.iter().map(|o| o.0).fold(0.0, f64::max);
    let outside = out.iter().filter(|o| !o.1).count();
    let golden = solve_power_sum(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
    let golden_err = (golden - (5f64.sqrt() - 1.0) / 2.0).abs();
    verdict(
        6,
        "power-sum solver",
        worst <= 1e-12 && outside == 0 && golden_err <= 1e-12,
        format!("10000 instances, worst residual {worst:.2e}, {outside} outside the strict bounds, golden-ratio error {golden_err:.2e}"),
    );
}

#[test]
fn criterion_07_nsw() {
    let region = Region::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for k in [1u32, 2] {
        let m = NswMetric::new(k);
        let qc = quasi_convexity_certify(&m, &Sampler::new(700 + k as u64), &region, 200, None).unwrap();
        let q_ok = qc.report.pass && (qc.q_hat - 2f64.sqrt()).abs() <= 1e-6;

        let inner = inner_property_check(&m, InnerOptions::default(), &Sampler::new(710 + k as u64), &region, 10_000)
            .unwrap();

        let ah = ahlfors_certify(&m, &Sampler::new(720 + k as u64), &region, AhlforsOptions::default()).unwrap();
        let origin = ah
            .report
            .witnesses
            .iter()
            .find(|w| w.vectors.get("x").is_some_and(|x| x.iter().all(|c| *c == 0.0)));
        let per_decade = origin.and_then(|w| w.scalars.get("per_decade_factor").copied()).unwrap_or(0.0);
        let ahl_ok = ah.diverging && !ah.report.pass && per_decade >= 10.0;

        let mut worst_sigma = 0.0f64;
        let mut idx = 0;
        for x1 in [0.0, 0.3, -1.2, 2.0] {
            for delta in [0.5, 0.1, 0.02] {
                let x = [x1, 0.4];
                let e = ball_volume_mc(&m, &x, delta, &Sampler::new(730 + idx), 100_000).unwrap();
                idx += 1;
                worst_sigma = worst_sigma.max((e.estimate - m.ball_volume(&x, delta)).abs() / e.half_width);
            }
        }
        let vol_ok = worst_sigma <= 3.0;

        pass &= q_ok && inner.pass && ahl_ok && vol_ok;
        detail.push(format!(
            "k={k}: Q {:.9} ({}), inner a=b=1 {} on {} samples, Ahlfors diverging {} at origin with {per_decade:.0}x per decade, MC volume worst {worst_sigma:.2} half-widths",
            qc.q_hat,
            if q_ok { "ok" } else { "bad" },
            if inner.pass { "ok" } else { "bad" },
            inner.samples,
            ah.diverging,
        ));
    }
    verdict(7, "nsw metric", pass, detail.join("; "));
}

#[test]
fn criterion_08_theta0_derived_inner() {
    let region = Region::default();
    let m = Theta0Metric;
    let s = Sampler::new(800);
    let tri = triangle_constant(&m, &s.substream(11), &region, 10_000).unwrap();
    let qc = quasi_convexity_certify(&m, &s.substream(12), &region, 200, None).unwrap();
    let ah = ahlfors_certify(&m, &s.substream(13), &region, AhlforsOptions::default()).unwrap();
    let kappa = tri.get("kappa").unwrap().max(1.0);
    let ledger = derive_constants(ah.c1_hat, qc.q_hat, kappa, 2, 1.0).unwrap();
    let opts = InnerOptions {
        a: ledger.a,
        b: ledger.b,
        lambda_max: 1024.0,
    };
    let r = inner_property_check(&m, opts, &s.substream(14), &region, 10_000).unwrap();
    verdict(
        8,
        "theta0 derived inner property",
        r.pass && qc.report.pass && !ah.diverging,
        format!(
            "kappa {kappa:.3}, Q {:.4}, c1 {:.4} -> a {:.6}, b {:.3e}; {} samples, lambda <= 2^10, worst radius ratio {:.4}",
            qc.q_hat,
            ah.c1_hat,
            ledger.a,
            ledger.b,
            r.samples,
            r.get("worst_radius_ratio").unwrap_or(f64::NAN)
        ),
    );
}

fn ellcover(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_ellcover")).args(args).output().expect("binary runs");
    let doc: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: bad JSON ({e}); stderr {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap_or(-1), doc)
}

fn report_pass(doc: &Value, check: &str) -> bool {
    doc["reports"]
        .as_array()
        .into_iter()
        .flatten()
        .any(|r| r["check"] == check && r["pass"] == true)
}

#[test]
fn criterion_09_roundtrip() {
    let cases: [(&str, &[&str]); 2] = [
        ("theta0", &["--metric", "theta0", "--half-width", "0.05", "--pairs", "80000"]),
        ("induced-isotropic", &["--metric", "induced-isotropic"]),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, extra) in cases {
        let mut intervals = Vec::new();
        for seed in ["1", "2", "3"] {
            let mut args = vec!["roundtrip", "--seed", seed];
            args.extend_from_slice(extra);
            let (code, doc) = ellcover(&args);
            let lo = doc["ratio"]["interval"][0].as_f64().unwrap_or(f64::NAN);
            let hi = doc["ratio"]["interval"][1].as_f64().unwrap_or(f64::NAN);
            let min = doc["ratio"]["min"].as_f64().unwrap_or(f64::NAN);
            let lower = doc["bounds"]["lower"].as_f64().unwrap_or(f64::NAN);
            let shapes = report_pass(&doc, "shape_norm") && report_pass(&doc, "shape_geometric");
            pass &= code == 0 && doc["pass"] == true && shapes && min >= lower;
            intervals.push((lo, hi));
        }
        let spread = |f: fn(&(f64, f64)) -> f64| {
            let v: Vec<f64> = intervals.iter().map(f).collect();
            let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            (max - min) / max
        };
        let (s_lo, s_hi) = (spread(|p| p.0), spread(|p| p.1));
        pass &= s_lo <= 0.05 && s_hi <= 0.05;
        detail.push(format!(
            "{name}: intervals {:?}, endpoint spread {:.2}% / {:.2}%",
            intervals
                .iter()
                .map(|(a, b)| format!("[{a:.4}, {b:.4}]"))
                .collect::<Vec<_>>(),
            100.0 * s_lo,
            100.0 * s_hi
        ));
    }
    verdict(9, "roundtrip", pass, detail.join("; "));
}

fn without_timing(mut doc: Value) -> Value {
    if let Value::Object(m) = &mut doc {
        m.remove("timing");
    }
    doc
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ball.csv");
    let runs: Vec<Vec<&str>> = vec![
        vec!["validate", "--cover", "theta0", "--seed", "5", "--samples", "500"],
        vec!["validate", "--cover", "corrupted", "--seed", "5", "--samples", "300"],
        vec!["check", "--property", "quasi-convex", "--metric", "nsw", "--k", "1", "--seed", "5", "--samples", "50"],
        vec!["check", "--property", "ahlfors", "--metric", "theta0", "--seed", "5", "--mc-points", "2000"],
        vec!["check", "--property", "inner", "--metric", "theta0", "--derived", "--seed", "5", "--samples", "500"],
        vec!["check", "--property", "triangle", "--metric", "nsw", "--k", "2", "--seed", "5", "--samples", "1000"],
        vec!["check", "--property", "symmetry", "--metric", "theta0", "--seed", "5", "--samples", "1000"],
        vec!["roundtrip", "--metric", "theta0", "--seed", "5", "--pairs", "300", "--mc-points", "2000"],
    ];
    let mut mismatches = Vec::new();
    for args in &runs {
        let go = |w: &str| {
            let mut a = vec!["--workers", w];
            a.extend_from_slice(args);
            let (code, doc) = ellcover(&a);
            (code, without_timing(doc))
        };
        let one = go("1");
        let eight = go("8");
        let again = go("1");
        if one != eight || one != again {
            mismatches.push(args.join(" "));
        }
    }
    let ball = |w: &str| {
        let (code, doc) = ellcover(&[
            "--workers",
            w,
            "ball",
            "--metric",
            "theta0",
            "--x",
            "0.2",
            "0.01",
            "--r",
            "0.001",
            "--csv",
            csv.to_str().unwrap(),
        ]);
        (code, without_timing(doc), std::fs::read(&csv).unwrap())
    };
    if ball("1") != ball("8") {
        mismatches.push("ball".into());
    }
    verdict(
        10,
        "determinism",
        mismatches.is_empty(),
        format!(
            "{} commands at --workers 1/8 and a rerun; mismatches {mismatches:?}",
            runs.len() + 1
        ),
    );
}
