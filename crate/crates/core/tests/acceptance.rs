//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ttdesign::analysis::{match_to_family_detailed, per_vector_angle_incidence};
use ttdesign::constructions::{
    equally_spaced_lines, equiisoclinic_planes_r4, kempner_24pt, kempner_24pt_weighted, new_11pt_d5, reznick_11pt,
    stroud_coefficients, stroud_design, three_mubs_r4, twelve_point_design, z3_group, z3_orbit, MercedesAngles,
    StroudSign,
};
use ttdesign::design::{default_probes, design_constant, potential, potential_gradient, DEFAULT_ZERO_TOLERANCE};
use ttdesign::manifold::{multi_start, multi_start_orbit, random_configuration, SolverOptions};
use ttdesign::scan::{first_zero, scan_n_range, ScanOptions};
use ttdesign::verify::{is_design, run_oracles, z3_max_residual, Oracle, OracleThresholds, ORACLE_TOLERANCE};
use ttdesign::{Configuration, DesignProblem, NormMode};

type Outcome = (bool, String);

fn main() {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("closed-form design certification", closed_form),
        ("constants of the explicit designs", constants),
        ("first zeros of small scans", table_scans),
        ("structure of solver-found 12-point designs", structure),
        ("oracle equivalence", oracle_equivalence),
        ("numerical hygiene", hygiene),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (ok, detail) = match std::panic::catch_unwind(check) {
            Ok(r) => r,
            Err(_) => (false, "panicked".to_string()),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {name} ({:.1}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 6 criteria passed", 6 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn thresholds() -> OracleThresholds {
    OracleThresholds {
        potential: DEFAULT_ZERO_TOLERANCE,
        cubature: ORACLE_TOLERANCE,
        bessel: ORACLE_TOLERANCE,
        probe_seed: 17,
    }
}

/// All applicable oracles pass.
fn certified(c: &Configuration, t: usize) -> Result<(), String> {
    let outcomes = run_oracles(c, t, &Oracle::ALL, &thresholds()).map_err(|e| e.to_string())?;
    if c.mode() == NormMode::EqualNorm && outcomes.len() != 3 {
        return Err("cubature oracle did not run".into());
    }
    match outcomes.iter().find(|o| !o.passed) {
        Some(o) => Err(format!("{} = {:e} > {:e}", o.oracle.as_str(), o.value, o.threshold)),
        None => Ok(()),
    }
}

fn closed_form() -> Outcome {
    let mut cases: Vec<(String, Configuration, usize)> = vec![
        ("reznick_11pt".into(), reznick_11pt(), 3),
        ("new_11pt_d5".into(), new_11pt_d5(), 3),
        ("kempner_24pt".into(), kempner_24pt(), 3),
        ("three_mubs".into(), three_mubs_r4(), 2),
    ];
    for d in 4..=6 {
        cases.push((format!("stroud d={d}"), stroud_design(d, StroudSign::Plus).unwrap(), 2));
    }
    for t in 1..=10 {
        cases.push((format!("equally_spaced_lines t={t}"), equally_spaced_lines(t).unwrap(), t));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..100 {
        let th: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..2.0 * PI));
        cases.push((format!("twelve_point #{i}"), twelve_point_design(&MercedesAngles::new(th)), 2));
    }
    let total = cases.len();
    let failures: Vec<String> = cases
        .iter()
        .filter_map(|(name, c, t)| certified(c, *t).err().map(|e| format!("{name}: {e}")))
        .collect();
    (
        failures.is_empty(),
        if failures.is_empty() {
            format!("{total} designs pass every applicable oracle")
        } else {
            failures.join("; ")
        },
    )
}

/// `c_t * Σ|v|^{2t}`, the constant of the identity `Σ<x,v>^{2t} = C|x|^{2t}`.
fn identity_constant(c: &Configuration, t: usize) -> f64 {
    design_constant(t, c.d()).unwrap().to_f64() * c.norms().iter().map(|n| n.powi(2 * t as i32)).sum::<f64>()
}

/// Largest relative deviation of `Σ<x,v>^{2t} / |x|^{2t}` from `want` over random probes.
fn probe_deviation(c: &Configuration, t: usize, want: f64) -> f64 {
    default_probes(c.d(), 100, 5)
        .iter()
        .map(|x| {
            let s: f64 = c.entries().column_iter().map(|v| v.dot(x).powi(2 * t as i32)).sum();
            (s / x.norm_squared().powi(t as i32) / want - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

fn constants() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |label: &str, err: f64, tol: f64| {
        let pass = err <= tol;
        ok &= pass;
        notes.push(format!("{label} err {err:.1e}{}", if pass { "" } else { " FAIL" }));
    };

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let th: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..2.0 * PI));
        worst = worst.max((potential(&twelve_point_design(&MercedesAngles::new(th)), 2).unwrap().lhs - 18.0).abs());
    }
    check("12-point power sum 18", worst, 1e-10);

    let r = reznick_11pt();
    check(
        "Reznick 540",
        ((identity_constant(&r, 3) / 540.0) - 1.0).abs().max(probe_deviation(&r, 3, 540.0)),
        1e-9,
    );
    let n = new_11pt_d5();
    check(
        "new design 40500",
        ((identity_constant(&n, 3) / 40500.0) - 1.0).abs().max(probe_deviation(&n, 3, 40500.0)),
        1e-8,
    );
    let k = kempner_24pt_weighted();
    check(
        "Kempner 120",
        ((identity_constant(&k, 3) / 120.0) - 1.0).abs().max(probe_deviation(&k, 3, 120.0)),
        1e-10,
    );
    let mut stroud: f64 = 0.0;
    for d in 4..=6 {
        let coef = stroud_coefficients(d, StroudSign::Plus).unwrap();
        let want = 3.0 * coef.a5.powi(4);
        let c = stroud_design(d, StroudSign::Plus).unwrap();
        stroud = stroud.max((identity_constant(&c, 2) / want - 1.0).abs()).max(probe_deviation(&c, 2, want));
    }
    check("Stroud C = 3a5^4", stroud, 1e-10);

    let planes = equiisoclinic_planes_r4();
    let mut sigma: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                // P_i P_j P_i = σ² P_i, so tr(P_i P_j) = 2σ²
                let tr = (planes[i].projection() * planes[j].projection()).trace() / 2.0;
                let pij = planes[i].projection() * planes[j].projection() * planes[i].projection();
                let dev = (pij - planes[i].projection() / 3.0).amax();
                sigma = sigma.max((tr - 1.0 / 3.0).abs()).max(dev);
            }
        }
    }
    check("isoclinic sigma^2 1/3", sigma, 1e-12);
    (ok, notes.join(", "))
}

fn table_scans() -> Outcome {
    let rows: [(usize, usize, NormMode, usize, usize, usize); 8] = [
        (2, 2, NormMode::EqualNorm, 2, 5, 3),
        (2, 3, NormMode::EqualNorm, 4, 7, 6),
        (3, 2, NormMode::EqualNorm, 2, 5, 4),
        (4, 2, NormMode::EqualNorm, 3, 6, 5),
        (2, 4, NormMode::EqualNorm, 10, 12, 12),
        (2, 4, NormMode::Weighted, 9, 11, 11),
        (3, 3, NormMode::Weighted, 9, 11, 11),
        (2, 5, NormMode::Weighted, 14, 16, 16),
    ];
    let opts = ScanOptions::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for (t, d, mode, from, to, want) in rows {
        let tag = if mode == NormMode::Weighted { "n_w" } else { "n_e" };
        let got = scan_n_range(t, d, mode, from, to, &opts).map(|table| first_zero(&table, opts.zero_tolerance));
        match got {
            Ok(Some(n)) if n == want => notes.push(format!("(t={t},d={d}) {tag}={n}")),
            other => {
                ok = false;
                notes.push(format!("(t={t},d={d}) {tag} expected {want}, got {other:?}"));
            }
        }
    }
    (ok, notes.join(", "))
}

fn structure() -> Outcome {
    let problem = DesignProblem::new(2, 4, 12, NormMode::EqualNorm).unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for seed in [1_000u64, 2_000, 3_000] {
        let (best, _) = multi_start(&problem, 20, &SolverOptions::default().with_seed(seed)).unwrap();
        let (zero, f) = is_design(&best.config, 2, DEFAULT_ZERO_TOLERANCE).unwrap();
        let incidence = per_vector_angle_incidence(&best.config, 0.25, 1e-6).unwrap();
        let matched = match_to_family_detailed(&best.config);
        let good = zero && incidence.iter().all(|&k| k == 2) && matches!(matched, Ok(Some(_)));
        ok &= good;
        notes.push(match (&matched, good) {
            (Ok(Some(m)), true) => format!("seed {seed}: f={f:.1e}, incidence 2, matched (residual {:.1e})", m.max_residual),
            _ => format!("seed {seed}: f={f:.1e}, incidence {incidence:?}, match {matched:?}"),
        });
    }
    (ok, notes.join("; "))
}

fn verdicts(c: &Configuration, t: usize) -> Vec<bool> {
    run_oracles(c, t, &Oracle::ALL, &thresholds())
        .unwrap()
        .iter()
        .map(|o| o.passed)
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let mut disagreements = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..50 {
        let t = rng.random_range(1..=4);
        let d = rng.random_range(2..=4);
        let n = rng.random_range(2..=12);
        let mode = if i % 2 == 0 { NormMode::EqualNorm } else { NormMode::Weighted };
        let c = random_configuration(d, n, mode, 500 + i).unwrap();
        let v = verdicts(&c, t);
        if v.iter().any(|&x| x != v[0]) {
            disagreements.push(format!("random #{i} (t={t},d={d},n={n}) {v:?}"));
        }
    }
    let mut constructed: Vec<(&str, Configuration, usize)> = vec![
        ("reznick_11pt", reznick_11pt(), 3),
        ("new_11pt_d5", new_11pt_d5(), 3),
        ("kempner_24pt", kempner_24pt(), 3),
        ("kempner_24pt_weighted", kempner_24pt_weighted(), 3),
        ("three_mubs", three_mubs_r4(), 2),
        ("twelve_point", twelve_point_design(&MercedesAngles::new([0.3, 1.1, 2.0, 0.7])), 2),
    ];
    for d in 4..=6 {
        constructed.push(("stroud", stroud_design(d, StroudSign::Plus).unwrap(), 2));
        constructed.push(("stroud minus", stroud_design(d, StroudSign::Minus).unwrap(), 2));
    }
    for t in 1..=10 {
        constructed.push(("equally_spaced_lines", equally_spaced_lines(t).unwrap(), t));
    }
    for (name, c, t) in &constructed {
        // each design also fails every oracle one strength up
        for (s, want) in [(*t, true), (*t + 1, false)] {
            let v = verdicts(c, s);
            if v.iter().any(|&x| x != want) {
                disagreements.push(format!("{name} t={s} {v:?}"));
            }
        }
    }

    let n2 = 576.0;
    let mut z3_random = 0;
    for i in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + i);
        let seeds: Vec<[f64; 3]> = (0..8)
            .map(|_| {
                let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.map(|x| x / n)
            })
            .collect();
        let f_zero = potential(&z3_orbit(&seeds).unwrap(), 4).unwrap().f <= DEFAULT_ZERO_TOLERANCE * n2;
        let r_zero = z3_max_residual(&seeds).unwrap() <= ORACLE_TOLERANCE;
        if f_zero != r_zero {
            disagreements.push(format!("z3 random #{i}"));
        }
        z3_random += 1;
    }
    let mut z3_optimized = Vec::new();
    for seed in [0u64, 100, 200] {
        let (best, _) = multi_start_orbit(4, &z3_group(), 8, 4, &SolverOptions::default().with_seed(seed)).unwrap();
        let seeds: Vec<[f64; 3]> = best.seeds.entries().column_iter().map(|c| [c[0], c[1], c[2]]).collect();
        let f = potential(&best.orbit, 4).unwrap().f;
        let r = z3_max_residual(&seeds).unwrap();
        if !(f <= DEFAULT_ZERO_TOLERANCE * n2 && r <= ORACLE_TOLERANCE) {
            disagreements.push(format!("z3 optimized seed {seed}: f={f:.1e}, residual {r:.1e}"));
        }
        z3_optimized.push(format!("{r:.0e}"));
    }
    let ok = disagreements.is_empty();
    (
        ok,
        if ok {
            format!(
                "50 random and {} constructed designs agree across oracles; z3 system agrees on {z3_random} random and 3 optimized seed sets (residuals {})",
                constructed.len(),
                z3_optimized.join(", ")
            )
        } else {
            disagreements.join("; ")
        },
    )
}

fn hygiene() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(31);

    let mut worst_grad: f64 = 0.0;
    let mut worst_case = (0, 0, 0);
    for i in 0..100u64 {
        // d = 1 is skipped: there the potential vanishes identically
        let t = rng.random_range(1..=4);
        let d = rng.random_range(2..=5);
        let n = rng.random_range(1..=8);
        let c = random_configuration(d, n, NormMode::Weighted, 900 + i).unwrap();
        let g = potential_gradient(&c, t).unwrap();
        let h = 1e-5;
        let mut fd = DMatrix::zeros(d, n);
        for idx in 0..d * n {
            let shifted = |s: f64| {
                let mut m = c.entries().clone();
                m[idx] += s;
                potential(&Configuration::new(m, NormMode::Weighted).unwrap(), t).unwrap().f
            };
            fd[idx] = (shifted(h) - shifted(-h)) / (2.0 * h);
        }
        let scale = g.norm().max(1e-300);
        let rel = (&g - fd).norm() / scale;
        if rel > worst_grad {
            worst_grad = rel;
            worst_case = (t, d, n);
        }
    }
    ok &= worst_grad < 1e-6;
    notes.push(format!(
        "gradient vs central differences worst {worst_grad:.1e} over 100 (at t,d,n = {worst_case:?})"
    ));

    let mut worst_welch = f64::INFINITY;
    for i in 0..10_000u64 {
        let t = rng.random_range(1..=5);
        let d = rng.random_range(1..=6);
        let n = rng.random_range(1..=12);
        let mode = if i % 2 == 0 { NormMode::EqualNorm } else { NormMode::Weighted };
        let p = potential(&random_configuration(d, n, mode, 20_000 + i).unwrap(), t).unwrap();
        worst_welch = worst_welch.min(p.f / p.rhs);
    }
    ok &= worst_welch >= -1e-9;
    notes.push(format!("Welch f/rhs min {worst_welch:.1e} over 10000"));

    let mut worst_scale: f64 = 0.0;
    let mut worst_unitary: f64 = 0.0;
    for i in 0..100u64 {
        let t = rng.random_range(1..=4);
        let d = rng.random_range(2..=5);
        let n = rng.random_range(d..=10);
        let c = random_configuration(d, n, NormMode::Weighted, 40_000 + i).unwrap();
        let f = potential(&c, t).unwrap().f;
        let lambda: f64 = rng.random_range(0.5..2.0);
        let scaled = Configuration::new(c.entries() * lambda, NormMode::Weighted).unwrap();
        let fs = potential(&scaled, t).unwrap().f;
        worst_scale = worst_scale.max((fs / lambda.powi(4 * t as i32) / f - 1.0).abs());
        let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let u = a.qr().q();
        let signs: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let fu = potential(&c.transformed(&u, &signs).unwrap(), t).unwrap().f;
        worst_unitary = worst_unitary.max((fu / f - 1.0).abs());
    }
    ok &= worst_scale < 1e-12 && worst_unitary < 1e-12;
    notes.push(format!(
        "scale covariance worst {worst_scale:.1e}, orthogonal and sign invariance worst {worst_unitary:.1e}"
    ));
    (ok, notes.join(", "))
}
