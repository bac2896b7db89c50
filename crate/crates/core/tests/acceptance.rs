//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the report is always
//! printed.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};
use std::process::Command;
use std::time::{Duration, Instant};

use qmdisc::convexity::{self, Branch, BOUNDARY_MARGIN};
use qmdisc::geometry::MeasurementPair;
use qmdisc::oracle::{optimize_povm, random_tester, symmetrize, tester_probabilities, OptimizeOptions};
use qmdisc::simulator::{
    estimate, run_trials, unambiguous_transmittances, Basis, Detector, ExperimentConfig, ImperfectionModel,
};
use qmdisc::strategies::{advantage, boundary_pib, entangled_success, hull_verify, single_qubit_max_inconclusive};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn thetas() -> Vec<f64> {
    (1..=7).map(|j| j as f64 * PI / 30.0).collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn oracle_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut uncertified = 0;
    let mut cases = 0;
    for theta in thetas() {
        let pair = MeasurementPair::new(theta).unwrap();
        let c = (2.0 * theta).cos();
        for k in 0..6 {
            let target = c * k as f64 / 5.0;
            let r = optimize_povm(&pair, target, &OptimizeOptions::default()).unwrap();
            let want = entangled_success(theta, target).unwrap().p_success;
            worst = worst.max((r.point.p_success - want).abs());
            uncertified += usize::from(!r.certified);
            cases += 1;
        }
    }
    outcome(
        worst <= 1e-4,
        format!("max |P_S − closed form| = {worst:.2e} over {cases} cases (tol 1e-4), {uncertified} not certified"),
    )
}

fn hull_reproduction() -> Outcome {
    let mut dev: f64 = 0.0;
    let mut tangent: f64 = 0.0;
    let mut degenerate = 0;
    for c in [0.3, 0.5, 0.7, 0.9] {
        let r = hull_verify(c, 10_000, 7).unwrap();
        dev = dev.max(r.max_deviation);
        match r.tangent_error {
            Some(e) => tangent = tangent.max(e),
            None => degenerate += 1,
        }
    }
    outcome(
        dev <= 1e-6 && tangent <= 1e-6 && degenerate == 0,
        format!("max hull deviation {dev:.2e}, max |P_I(T) − P_IT| {tangent:.2e} (tol 1e-6), {degenerate} degenerate"),
    )
}

fn single_probe_convexity() -> Outcome {
    let (mut min_d2, mut max_rel, mut max_concave) = (f64::INFINITY, 0.0f64, f64::NEG_INFINITY);
    let mut points = 0;
    for k in 1..=19 {
        let c = 0.05 * k as f64;
        let pib = boundary_pib(c).unwrap();
        for p in linspace(BOUNDARY_MARGIN, pib - BOUNDARY_MARGIN, 30) {
            let chk = convexity::finite_difference_check(c, p, convexity::DEFAULT_H2).unwrap();
            min_d2 = min_d2.min(chk.analytic);
            max_rel = max_rel.max(chk.rel_err);
            points += 1;
        }
        let u = single_qubit_max_inconclusive(c);
        if u - BOUNDARY_MARGIN > pib + BOUNDARY_MARGIN {
            for p in linspace(pib + BOUNDARY_MARGIN, u - BOUNDARY_MARGIN, 10) {
                let chk = convexity::finite_difference_on_branch(c, p, convexity::DEFAULT_H2, Branch::Concave);
                let d2 = convexity::concave_second_derivative(c, p).unwrap();
                max_concave = max_concave.max(d2);
                if let Ok(chk) = chk {
                    max_rel = max_rel.max(chk.rel_err);
                }
            }
        }
    }
    outcome(
        min_d2 >= -1e-9 && max_rel <= 1e-3 && max_concave < 0.0,
        format!(
            "min convex d²P_S/dP_I² {min_d2:.3e} over {points} points, max rel err {max_rel:.2e}, max concave {max_concave:.3e}"
        ),
    )
}

fn idp_endpoint() -> Outcome {
    let mut worst: f64 = 0.0;
    for theta in linspace(0.0, FRAC_PI_4, 100) {
        let c = (2.0 * theta).cos();
        let p = entangled_success(theta, c).unwrap();
        worst = worst
            .max((p.p_success - 2.0 * theta.sin().powi(2)).abs())
            .max(p.p_error.abs())
            .max((p.p_inconclusive - c).abs());
    }
    outcome(worst <= 1e-12, format!("max deviation from (2sin²θ, 0, cos 2θ) {worst:.2e} over 100 angles"))
}

fn entanglement_advantage() -> Outcome {
    let (mut min_adv, mut at_zero) = (f64::INFINITY, 0.0f64);
    let mut points = 0;
    for theta in thetas() {
        let c = (2.0 * theta).cos();
        at_zero = at_zero.max(advantage(theta, 0.0).unwrap().abs());
        let mut p = 0.01;
        while p <= c + 1e-12 {
            min_adv = min_adv.min(advantage(theta, p.min(c)).unwrap());
            points += 1;
            p += 0.01;
        }
    }
    outcome(
        min_adv > 0.0 && at_zero <= 1e-12,
        format!("min advantage {min_adv:.3e} over {points} points with P_I ≥ 0.01, |advantage(θ, 0)| ≤ {at_zero:.1e}"),
    )
}

fn monte_carlo_convergence() -> Outcome {
    let want = entangled_success(FRAC_PI_6, 0.3).unwrap().p_success;
    let (mut ok_s, mut ok_i) = (0, 0);
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let cfg = ExperimentConfig {
            theta: FRAC_PI_6,
            transmittance: 0.6,
            trials: 1_000_000,
            seed,
            imperfections: ImperfectionModel::ideal(),
            feed_forward: true,
        };
        let e = estimate(&run_trials(&cfg).unwrap(), &cfg.imperfections).unwrap();
        let zs = (e.point.p_success - want).abs() / e.sigma_success;
        let zi = (e.point.p_inconclusive - 0.3).abs() / e.sigma_inconclusive;
        worst = worst.max(zs);
        ok_s += usize::from(zs <= 4.0);
        ok_i += usize::from(zi <= 4.0);
    }
    outcome(
        ok_s >= 9 && ok_i >= 9,
        format!("P_S within 4σ for {ok_s}/10 seeds (worst {worst:.2}σ), P_I within 4σ for {ok_i}/10"),
    )
}

fn unambiguous_scan() -> Outcome {
    let mut errors = 0u64;
    let mut off = 0;
    for (r, t) in unambiguous_transmittances().into_iter().enumerate() {
        let theta = t.sqrt().atan();
        let cfg = ExperimentConfig {
            theta,
            transmittance: t,
            trials: 1_000_000,
            seed: 42 + r as u64,
            imperfections: ImperfectionModel::ideal(),
            feed_forward: true,
        };
        let counts = run_trials(&cfg).unwrap();
        for (x, i, k) in [
            (Basis::M, 0, Detector::B),
            (Basis::M, 1, Detector::A),
            (Basis::N, 0, Detector::A),
            (Basis::N, 1, Detector::B),
        ] {
            errors += counts.get(x, i, k);
        }
        let e = estimate(&counts, &cfg.imperfections).unwrap();
        let (ps, pi) = (2.0 * theta.sin().powi(2), (2.0 * theta).cos());
        let within = |got: f64, want: f64, sigma: f64| (got - want).abs() <= (4.0 * sigma).max(1e-12);
        off += usize::from(
            !within(e.point.p_success, ps, e.sigma_success)
                || !within(e.point.p_inconclusive, pi, e.sigma_inconclusive),
        );
    }
    let noisy = ImperfectionModel::paperlike();
    let table = qmdisc::simulator::scan_unambiguous(&unambiguous_transmittances(), 1_000_000, 42, &noisy).unwrap();
    let max_pe = table.rows.iter().map(|r| r.estimate.point.p_error).fold(0.0, f64::max);
    outcome(
        errors == 0 && off == 0 && max_pe <= 0.032,
        format!("ideal: {errors} error coincidences, {off}/11 rows outside 4σ; noisy preset max P_E {max_pe:.4} (limit 0.032)"),
    )
}

fn symmetrization_invariance() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let t = random_tester(2024, k);
        let pair = MeasurementPair::new(FRAC_PI_4 * (k as f64 + 0.5) / 100.0).unwrap();
        let a = tester_probabilities(&t.to_process_povm(), &pair).unwrap();
        let b = tester_probabilities(&symmetrize(&t).to_process_povm(), &pair).unwrap();
        worst = worst
            .max((a.p_success - b.p_success).abs())
            .max((a.p_error - b.p_error).abs())
            .max((a.p_inconclusive - b.p_inconclusive).abs());
    }
    outcome(worst <= 1e-12, format!("max probability change {worst:.2e} over 100 testers"))
}

fn qmdisc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qmdisc")).args(args).output().expect("binary runs")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, &[&str]); 6] = [
        ("curves", &["curves", "--theta", "0.6283", "--pi-grid", "0:0.5:0.01"]),
        ("hull", &["hull", "--c", "0.9", "--samples", "10000", "--seed", "7"]),
        ("convexity", &["convexity"]),
        ("oracle", &["oracle", "--theta", "0.5236", "--pi", "0.3", "--method", "ascent", "--tol", "1e-4"]),
        ("simulate", &["simulate", "--trials", "100000", "--seed", "3", "--noise", "preset_paperlike"]),
        (
            "unambiguous",
            &["simulate", "--mode", "unambiguous", "--t-grid", "0:1:0.1", "--trials", "100000", "--seed", "42"],
        ),
    ];
    let mut failures = Vec::new();
    for (name, args) in runs {
        let out = dir.path().join(format!("{name}.out"));
        let out_s = out.to_str().unwrap();
        let mut first = args.to_vec();
        first.extend(["--out", out_s]);
        if !qmdisc(&first).status.success() {
            failures.push(format!("{name}: run failed"));
            continue;
        }
        let bytes = std::fs::read(&out).unwrap();
        let manifest = format!("{out_s}.manifest.json");
        let again = dir.path().join(format!("{name}.replay"));
        let replay = qmdisc(&["replay", &manifest, "--out", again.to_str().unwrap()]);
        if !replay.status.success() || std::fs::read(&again).ok().as_deref() != Some(&bytes[..]) {
            failures.push(format!("{name}: replay differs"));
        }
        let stdout = qmdisc(args).stdout;
        if stdout != bytes {
            failures.push(format!("{name}: stdout run differs"));
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "6 runs replayed byte-identically from their manifests".into()
        } else {
            failures.join("; ")
        },
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("closed-form/oracle agreement", Duration::from_secs(300), oracle_agreement),
        ("hull reproduction", Duration::from_secs(30), hull_reproduction),
        ("convexity of the single-probe curve", Duration::from_secs(10), single_probe_convexity),
        ("IDP endpoint identity", Duration::MAX, idp_endpoint),
        ("entanglement advantage", Duration::MAX, entanglement_advantage),
        ("Monte Carlo convergence", Duration::from_secs(60), monte_carlo_convergence),
        ("unambiguous scan", Duration::MAX, unambiguous_scan),
        ("symmetrization invariance", Duration::MAX, symmetrization_invariance),
        ("determinism", Duration::MAX, determinism),
    ];
    let mut failed = 0;
    for (n, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut o = std::panic::catch_unwind(run).unwrap_or_else(|_| outcome(false, "panicked".into()));
        let took = start.elapsed();
        if took > budget {
            o.pass = false;
            o.detail.push_str(&format!("; over time budget {budget:?}"));
        }
        failed += usize::from(!o.pass);
        println!(
            "{} [{}] {name}: {} ({:.2} s)",
            if o.pass { "PASS" } else { "FAIL" },
            n + 1,
            o.detail,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
