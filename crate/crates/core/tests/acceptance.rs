//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weakmix::cumulants::{exact_cumulant_shift, predict_cumulant_shift};
use weakmix::engine::{
    exact_shift, monte_carlo, noisy_pipeline, predict_shift, predicted_snr, WeakSetup,
};
use weakmix::experiment::{
    analytic_im_weak_value, extract_weak_value, linspace, sweep, MzConfig, SweepRecord,
};
use weakmix::verify::{loglog_slope, pooled_slope, SCALING_THETAS, SLOPE_TOLERANCE};
use weakmix::{random, DensityOperator, Observable, QuantumChannel};

struct Outcome {
    pass: bool,
    detail: String,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check(id: u32, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "criterion {id} {} {title}: {}; runtime {:.2} s (limit {} s{})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", exceeded" },
    );
    pass
}

/// Maximum of the visibility-corrected curve by golden-section search.
fn maximize_analytic(v: f64) -> (f64, f64) {
    let f = |d: f64| analytic_im_weak_value(d, v);
    let (mut a, mut b) = (0.0, PI - 1e-9);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn sweep_agreement() -> Outcome {
    let v = 0.977;
    let deltas = linspace(0.0, 2.8, 281);
    let records = sweep(&deltas, &MzConfig::new(0.0, v)).unwrap();
    let mut worst = (0.0f64, 0.0f64);
    let mut first_bad = None;
    for r in &records {
        let err = (r.extracted_im_weak_value - r.analytic_im_weak_value).abs();
        if err > worst.0 {
            worst = (err, r.delta);
        }
        if err > 1e-2 && first_bad.is_none() {
            first_bad = Some(r.delta);
        }
    }
    let (d_star, peak) = maximize_analytic(v);
    let closed_form = v / (2.0 * (1.0 - v * v).sqrt());
    let peak_ok = (peak - closed_form).abs() < 1e-9 && (peak - 2.26).abs() / 2.26 <= 0.03;
    Outcome {
        pass: first_bad.is_none() && peak_ok,
        detail: format!(
            "max |extracted - analytic| {:.4e} at delta {:.3} (bound 1e-2, first exceeded at {}); \
             analytic maximum {peak:.4} at delta {d_star:.4}, {:.2}% from 2.26 (bound 3%)",
            worst.0,
            worst.1,
            first_bad.map_or("none".into(), |d| format!("{d:.3}")),
            100.0 * (peak - 2.26).abs() / 2.26
        ),
    }
}

fn quarter_turn() -> Outcome {
    let e = extract_weak_value(&MzConfig::new(FRAC_PI_2, 1.0)).unwrap();
    let err = (e.im_weak_value - 0.5).abs();
    Outcome {
        pass: err <= 1e-3,
        detail: format!(
            "extracted {:.6} (|error| {err:.2e}, bound 1e-3)",
            e.im_weak_value
        ),
    }
}

fn phase_noise_invariance() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let theta = -1.0 + 2.0 * (i as f64 + 0.5) / 200.0;
        let setup = random::setup(&mut r, 2, 2, theta, 0.05).unwrap();
        let before = random::phase_noise(&mut r, setup.k(), 1 + i % 3);
        let after = random::phase_noise(&mut r, setup.k(), 1 + (i + 1) % 3);
        let id = QuantumChannel::identity(2);
        let noisy = noisy_pipeline(&setup, &before, &after).unwrap();
        let clean = noisy_pipeline(&setup, &id, &id).unwrap();
        for (x, y) in noisy.iter().zip(&clean) {
            worst = worst.max((x - y).abs());
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("200 setups, max |p'_f(k) - p_f(k)| {worst:.2e} (bound 1e-12)"),
    }
}

fn slope_summary(name: &str, per_setup: &[Vec<f64>]) -> (bool, String) {
    let pooled = pooled_slope(per_setup).unwrap();
    let slopes: Vec<f64> = per_setup
        .iter()
        .map(|r| loglog_slope(&SCALING_THETAS, r).unwrap())
        .collect();
    let outside = slopes
        .iter()
        .filter(|s| (*s - 2.0).abs() > SLOPE_TOLERANCE)
        .count();
    let (lo, hi) = slopes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| {
            (a.min(s), b.max(s))
        });
    (
        (pooled - 2.0).abs() <= SLOPE_TOLERANCE,
        format!(
            "{name}: pooled slope {pooled:.4} over {} fits (bound 2 +/- 0.15); \
             per-fit range [{lo:.3}, {hi:.3}], {outside} outside the band",
            per_setup.len()
        ),
    )
}

fn first_order_scaling() -> Outcome {
    let mut r = rng(4);
    let mut all = Vec::new();
    for _ in 0..50 {
        let setup = random::setup(&mut r, 2, 2, 0.0, 0.2).unwrap();
        let m = random::observable(&mut r, 2);
        all.push(
            SCALING_THETAS
                .iter()
                .map(|&t| {
                    let s = setup.with_theta(t);
                    (exact_shift(&s, &m).unwrap() - predict_shift(&s, &m).unwrap()).abs()
                })
                .collect(),
        );
    }
    let (pass, detail) = slope_summary("50 setups", &all);
    Outcome { pass, detail }
}

fn cumulant_law() -> Outcome {
    let mut r = rng(5);
    let mut all = Vec::new();
    for dim in [2, 3] {
        for _ in 0..25 {
            let setup = random::setup(&mut r, 2, dim, 0.0, 0.2).unwrap();
            for n in 1..=3 {
                all.push(
                    SCALING_THETAS
                        .iter()
                        .map(|&t| {
                            let s = setup.with_theta(t);
                            (exact_cumulant_shift(&s, n).unwrap()
                                - predict_cumulant_shift(&s, n).unwrap())
                            .abs()
                        })
                        .collect(),
                );
            }
        }
    }
    let (slope_ok, slope_detail) = slope_summary("n = 1, 2, 3 on qubit and qutrit", &all);

    // Completely mixed probe with K = Z: no first-order change of the variance.
    let mut worst_first = 0.0f64;
    let mut exact = Vec::new();
    for _ in 0..25 {
        let base = random::setup(&mut r, 2, 2, 0.0, 0.2).unwrap();
        let setup = WeakSetup::new(
            base.pre().clone(),
            base.post().clone(),
            base.a().clone(),
            Observable::pauli_z(),
            0.0,
            DensityOperator::maximally_mixed(2),
        )
        .unwrap();
        worst_first = worst_first.max(
            predict_cumulant_shift(&setup.with_theta(0.01), 2)
                .unwrap()
                .abs(),
        );
        exact.push(
            SCALING_THETAS
                .iter()
                .map(|&t| exact_cumulant_shift(&setup.with_theta(t), 2).unwrap().abs())
                .collect::<Vec<f64>>(),
        );
    }
    let variance_slope = pooled_slope(&exact).unwrap();
    let zero_ok = worst_first <= 1e-12 && (variance_slope - 2.0).abs() <= SLOPE_TOLERANCE;
    Outcome {
        pass: slope_ok && zero_ok,
        detail: format!(
            "{slope_detail}; I/2 with K = Z: max first-order variance shift {worst_first:.2e} (bound 1e-12), \
             exact change pooled slope {variance_slope:.4}"
        ),
    }
}

fn interferometer(delta: f64, theta: f64) -> WeakSetup {
    let cfg = MzConfig::new(delta, 1.0);
    weakmix::experiment::mz_setup(&cfg, 0.0)
        .unwrap()
        .with_theta(theta)
}

fn snr_consistency() -> Outcome {
    let n = 1_000_000;
    let setup = interferometer(FRAC_PI_2, 0.01);
    let predicted = predicted_snr(&setup, n).unwrap();
    let oracle = 2.0 * 0.01 * 0.5 * (n as f64 * 0.5 * 1.0).sqrt();
    let mut worst = 0.0f64;
    let mut values = Vec::new();
    for seed in 0..5 {
        let mc = monte_carlo(&setup, setup.k(), n, seed).unwrap();
        // Large-sample standard error of mean·√n/sd.
        let se = (1.0 + predicted * predicted / (2.0 * mc.accepted as f64)).sqrt();
        worst = worst.max((mc.empirical_snr - predicted).abs() / se);
        values.push(format!("{:.3}", mc.empirical_snr));
    }
    Outcome {
        pass: (predicted - oracle).abs() < 1e-9 && worst <= 3.0,
        detail: format!(
            "predicted {predicted:.4} (oracle {oracle:.4}); empirical [{}]; worst deviation {worst:.2} SE (bound 3)",
            values.join(", ")
        ),
    }
}

fn completely_mixed_optimality() -> Outcome {
    let n = 1_000_000;
    let mut r = rng(7);
    let base = interferometer(FRAC_PI_2, 0.01);
    let reference = predicted_snr(
        &base
            .with_probe(DensityOperator::maximally_mixed(2))
            .unwrap(),
        n,
    )
    .unwrap()
    .abs();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let probe = random::density(&mut r, 2);
        let snr = predicted_snr(&base.with_probe(probe).unwrap(), n)
            .unwrap()
            .abs();
        worst = worst.max(snr - reference);
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("1000 probes, max excess over I/2 SNR {worst:.2e} (bound 1e-12)"),
    }
}

fn record_diff(a: &SweepRecord, b: &SweepRecord) -> f64 {
    let mut d = (a.extracted_im_weak_value - b.extracted_im_weak_value)
        .abs()
        .max((a.analytic_im_weak_value - b.analytic_im_weak_value).abs())
        .max((a.fit_stderr - b.fit_stderr).abs());
    for (x, y) in a.power_curve.iter().zip(&b.power_curve) {
        d = d.max((x.1 - y.1).abs());
    }
    for (x, y) in a.polarization_curve.iter().zip(&b.polarization_curve) {
        d = d.max((x.1 - y.1).abs());
    }
    d
}

fn unital_immunity() -> Outcome {
    let mut r = rng(8);
    let template = MzConfig::new(0.0, 0.977);
    let deltas = linspace(0.0, 2.8, 29);
    let reference = sweep(&deltas, &template).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let chan = random::unital_channel(&mut r, 2, 3);
        let mut cfg = template.clone();
        cfg.probe = chan.apply(&template.probe).unwrap();
        for (a, b) in sweep(&deltas, &cfg).unwrap().iter().zip(&reference) {
            worst = worst.max(record_diff(a, b));
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("100 channels, max change of any sweep output {worst:.2e} (bound 1e-12)"),
    }
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_weakmix");
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for args in [
        &["verify", "--seed", "11"][..],
        &["sweep", "--seed", "11"][..],
    ] {
        let (a, b) = (run(args), run(args));
        let same =
            a.stdout == b.stdout && !a.stdout.is_empty() && a.status.code() == b.status.code();
        pass &= same;
        notes.push(format!(
            "{} {} bytes {}",
            args[0],
            a.stdout.len(),
            if same { "identical" } else { "differ" }
        ));
    }
    Outcome {
        pass,
        detail: notes.join(", "),
    }
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results = [
        check(
            1,
            "interferometer sweep matches visibility-corrected curve",
            s(5),
            sweep_agreement,
        ),
        check(2, "quarter-turn extraction", s(1), quarter_turn),
        check(3, "phase-noise invariance", s(10), phase_noise_invariance),
        check(4, "first-order shift scaling", s(10), first_order_scaling),
        check(5, "cumulant law", s(10), cumulant_law),
        check(6, "SNR consistency", s(30), snr_consistency),
        check(
            7,
            "completely mixed optimality",
            s(5),
            completely_mixed_optimality,
        ),
        check(
            8,
            "unital immunity of the unpolarized probe",
            s(5),
            unital_immunity,
        ),
        check(9, "determinism of verify and sweep", s(60), determinism),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
