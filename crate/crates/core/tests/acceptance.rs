//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances are fixed here, not tuned per run.

mod common;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinmon::haar_model::{closed_form_traces, haar_mean_qfi_curve, CurveOptions, HaarModelInput, TraceForm};
use spinmon::scaling::beta_curve;
use spinmon::trajectory::{mean_and_sem, run_sweep, sigma_for};
use spinmon::{
    build_propagator, haar_random_state, make_ops, mean_qfi, reference_values, spin_coherent, GaussianMeasurement,
    KickedTopParams, RunConfig, SpinQuantum, SweepRow,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn q(n: u32) -> SpinQuantum {
    SpinQuantum::new(n).unwrap()
}

fn haar_value(j: f64) -> f64 {
    4.0 / 3.0 * (j * j + j / 2.0)
}

fn within_budget(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

fn reference_table() -> Outcome {
    let start = Instant::now();
    let refs = reference_values(q(300), Some(0.5));
    let j = 150.0;
    let checks = [
        ("coherent", refs.coherent, 200.0),
        ("haar", refs.haar, 30100.0),
        ("dicke_avg", refs.dicke_average, 20133.0 + 1.0 / 3.0),
        ("squeezed", refs.squeezed, 4.0 / 3.0 * j * 0.5f64.cosh()),
    ];
    let worst = checks.iter().map(|(_, got, want)| (got - want).abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    Outcome {
        pass: worst <= 1e-9 && within_budget(elapsed, Duration::from_secs(1)),
        detail: format!("max |Δ| = {worst:.1e}, {elapsed:.2?}"),
    }
}

fn haar_monte_carlo() -> Outcome {
    let start = Instant::now();
    let n = 20;
    let ops = make_ops(q(n)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_401);
    let samples: Vec<f64> = (0..100_000).map(|_| mean_qfi(&haar_random_state(q(n), &mut rng), &ops).mean_qfi).collect();
    let (mean, sem) = mean_and_sem(&samples);
    let want = haar_value(10.0);
    let z = (mean - want) / sem;
    let elapsed = start.elapsed();
    Outcome {
        pass: z.abs() <= 3.0 && within_budget(elapsed, Duration::from_secs(60)),
        detail: format!("mean {mean:.3} ± {sem:.3} vs {want:.3} ({z:+.2} sem), {elapsed:.2?}"),
    }
}

fn strong_plateau() -> Outcome {
    let grid: Vec<RunConfig> = [60, 100, 150, 200].iter().map(|&n| RunConfig::pure(q(n), 3.0, 0.5, 303)).collect();
    let rows = run_sweep(&grid).unwrap().rows;
    let values: Vec<f64> = rows.iter().map(SweepRow::mean_over_j2).collect();
    let target = 8.0 / 9.0;
    let in_band = values.iter().all(|v| (v - target).abs() <= 0.08);
    let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
    Outcome {
        pass: in_band && spread <= 0.05,
        detail: format!(
            "F/J² = {} (band {:.3}±0.08: {}), spread {spread:.3} (≤ 0.05: {})",
            fmt_list(&values),
            target,
            in_band,
            spread <= 0.05
        ),
    }
}

fn weak_plateau() -> Outcome {
    let quantum = q(150);
    let sigma = sigma_for(quantum, 30.0);
    let grid = vec![RunConfig::pure(quantum, 3.0, sigma, 404), RunConfig::pure(quantum, 1.0, sigma, 404)];
    let rows = run_sweep(&grid).unwrap().rows;
    let haar = haar_value(75.0);
    let chaotic = rows[0].mean / haar;
    let regular = rows[1].mean / haar;
    Outcome {
        pass: (chaotic - 1.0).abs() <= 0.10 && regular < 0.90,
        detail: format!("k=3: {chaotic:.3} of Haar (±10%), k=1: {regular:.3} of Haar (< 0.90)"),
    }
}

fn intermediate_dip() -> Outcome {
    let quantum = q(150);
    let grid: Vec<RunConfig> =
        [0.03, 1.0, 30.0].iter().map(|&r| RunConfig::pure(quantum, 3.0, sigma_for(quantum, r), 505)).collect();
    let rows = run_sweep(&grid).unwrap().rows;
    let gap = |a: &SweepRow, b: &SweepRow| (b.mean - a.mean) / (a.sem.powi(2) + b.sem.powi(2)).sqrt();
    let (left, right) = (gap(&rows[1], &rows[0]), gap(&rows[1], &rows[2]));
    Outcome {
        pass: left >= 3.0 && right >= 3.0,
        detail: format!(
            "F/J² at σ/√J = 0.03, 1, 30: {}; dip depth {left:.1} and {right:.1} combined sems",
            fmt_list(&rows.iter().map(SweepRow::mean_over_j2).collect::<Vec<_>>())
        ),
    }
}

fn scaling_exponents() -> Outcome {
    let ratios = [0.03, 1.0, 30.0];
    let mut grid = Vec::new();
    for k in [1.0, 3.0, 10.0] {
        for n in [60, 100, 140, 200, 260] {
            for &r in &ratios {
                grid.push(RunConfig::pure(q(n), k, sigma_for(q(n), r), 606));
            }
        }
    }
    let sweep = run_sweep(&grid).unwrap();
    let curve = beta_curve(&sweep, &ratios);
    let beta = |k: f64, r: f64| {
        curve
            .iter()
            .find(|b| b.k == k && (b.sigma_over_sqrt_j - r).abs() < 1e-12)
            .and_then(|b| b.fit.as_ref())
            .map_or(f64::NAN, |f| f.beta)
    };
    let checks = [
        ("β(0.03,k=1)", beta(1.0, 0.03), (1.9, 2.1)),
        ("β(0.03,k=3)", beta(3.0, 0.03), (1.9, 2.1)),
        ("β(0.03,k=10)", beta(10.0, 0.03), (1.9, 2.1)),
        ("β(1,k=3)", beta(3.0, 1.0), (1.0, 1.85)),
        ("β(30,k=3)", beta(3.0, 30.0), (1.85, 2.15)),
        ("β(1,k=10)", beta(10.0, 1.0), (1.85, f64::INFINITY)),
    ];
    let pass = checks.iter().all(|(_, b, (lo, hi))| *b >= *lo && *b <= *hi);
    let detail = checks.iter().map(|(name, b, _)| format!("{name}={b:.3}")).collect::<Vec<_>>().join(", ");
    Outcome { pass, detail }
}

fn haar_model_checks() -> Outcome {
    let start = Instant::now();
    // (a) closed forms vs the discrete-sum oracle.
    let mut worst = 0.0f64;
    for j in [50.0f64, 150.0, 500.0] {
        for sigma in [1.0, j.sqrt(), j] {
            for m0 in [0.0, j / 2.0] {
                let t = closed_form_traces(&HaarModelInput::new(j, sigma, m0).unwrap(), TraceForm::Lattice);
                let got = [t.tr_k2, t.tr_k4, t.tr_k2jz, t.tr_k2jz_k2jz, t.tr_k2jx_k2jx];
                let want = common::discrete_traces(j, sigma, m0);
                for i in 0..5 {
                    let scale = if i == 2 { j * want[0] } else { want[i].abs() };
                    worst = worst.max((got[i] - want[i]).abs() / scale);
                }
            }
        }
    }
    let oracle_ok = worst <= 1e-6;

    // (b) node: every pair of curves crosses inside σ/√J ∈ [0.7, 1.4].
    let js = [150.0f64, 500.0, 1500.0, 5000.0];
    let grid: Vec<f64> = (0..=48).map(|i| 10f64.powf(-0.5 + i as f64 / 48.0)).collect();
    let opts = CurveOptions::default();
    let curves: Vec<Vec<f64>> = js
        .iter()
        .map(|&j| {
            let sigmas: Vec<f64> = grid.iter().map(|r| r * j.sqrt()).collect();
            haar_mean_qfi_curve(j, &sigmas, &opts).unwrap().iter().map(|p| p.mean_qfi_over_j2).collect()
        })
        .collect();
    let mut crossings = Vec::new();
    let mut node_ok = true;
    for a in 0..js.len() {
        for b in a + 1..js.len() {
            let diff: Vec<f64> = curves[a].iter().zip(&curves[b]).map(|(x, y)| x - y).collect();
            let found: Vec<f64> = (0..grid.len() - 1)
                .filter(|&i| diff[i].signum() != diff[i + 1].signum())
                .map(|i| grid[i] + (grid[i + 1] - grid[i]) * diff[i] / (diff[i] - diff[i + 1]))
                .collect();
            let inside = found.iter().any(|x| (0.7..=1.4).contains(x));
            node_ok &= inside;
            crossings.push(format!("{}/{}@{}", js[a], js[b], fmt_list(&found)));
        }
    }

    // (c) limits: 8/9 at σ = 1, 4/3 at σ = 2J, each within 2/J.
    let mut limit_ok = true;
    let mut limits = Vec::new();
    for &j in &js {
        let pts = haar_mean_qfi_curve(j, &[1.0, 2.0 * j], &opts).unwrap();
        let strong = pts[0].mean_qfi_over_j2;
        let weak = pts[1].mean_qfi_over_j2;
        limit_ok &= (strong - 8.0 / 9.0).abs() <= 2.0 / j && (weak - 4.0 / 3.0).abs() <= 2.0 / j;
        limits.push(format!("J={j}: {strong:.4}/{weak:.4}"));
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: oracle_ok && node_ok && limit_ok && within_budget(elapsed, Duration::from_secs(60)),
        detail: format!(
            "oracle max rel {worst:.1e} ({oracle_ok}); crossings {} ({node_ok}); F/J² at σ=1 / σ=2J {} ({limit_ok}); {elapsed:.1?}",
            crossings.join(" "),
            limits.join(", ")
        ),
    }
}

fn model_vs_simulation() -> Outcome {
    let quantum = q(300);
    let j = 150.0;
    let sigmas = [0.1, 0.25, 0.5, 1.0, 3.0, 10.0, 30.0, 150.0, 300.0, 1500.0];
    let grid: Vec<RunConfig> = sigmas.iter().map(|&s| RunConfig::pure(quantum, 10.0, s, 808)).collect();
    let sim: Vec<f64> = run_sweep(&grid).unwrap().rows.iter().map(SweepRow::mean_over_j2).collect();
    let model: Vec<f64> =
        haar_mean_qfi_curve(j, &sigmas, &CurveOptions::default()).unwrap().iter().map(|p| p.mean_qfi_over_j2).collect();
    let limits_ok = sigmas
        .iter()
        .zip(sim.iter().zip(&model))
        .filter(|(s, _)| **s <= 1.0 || **s >= j)
        .all(|(_, (a, b))| ((a - b) / b).abs() <= 0.15);
    // Qualitative agreement in between: both curves dip (interior minimum)
    // and both lie below the log-σ chord joining σ = 1 and σ = J.
    let shape = |v: &[f64]| {
        let argmin = (0..v.len()).min_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap()).unwrap();
        let dip = argmin > 0 && argmin + 1 < v.len();
        let (i0, i1) = (3, 7);
        let chord = |i: usize| {
            let t = (sigmas[i].ln() - sigmas[i0].ln()) / (sigmas[i1].ln() - sigmas[i0].ln());
            v[i0] + t * (v[i1] - v[i0])
        };
        dip && (i0 + 1..i1).all(|i| v[i] < chord(i))
    };
    let shape_ok = shape(&sim) && shape(&model);
    Outcome {
        pass: limits_ok && shape_ok,
        detail: format!(
            "sim {} / model {} (limits ±15%: {limits_ok}, dip+convexity: {shape_ok})",
            fmt_list(&sim),
            fmt_list(&model)
        ),
    }
}

fn purification() -> Outcome {
    let ks = [1.0, 3.0, 10.0];
    let ns = [20u32, 40, 60];
    let shared = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0];
    let mut grid = Vec::new();
    for &k in &ks {
        for &n in &ns {
            grid.push(RunConfig::mixed(q(n), k, 0.5, 909));
            grid.push(RunConfig::mixed(q(n), k, sigma_for(q(n), 30.0), 909));
            for &s in &shared {
                grid.push(RunConfig::mixed(q(n), k, s, 909));
            }
        }
    }
    let rows = run_sweep(&grid).unwrap().rows;
    let per = 2 + shared.len();
    let mut strong_ok = true;
    let mut weak_ok = true;
    let mut collapse_gap = 0.0f64;
    let mut monotone_ok = true;
    for (ki, _) in ks.iter().enumerate() {
        let block = |ni: usize| &rows[(ki * ns.len() + ni) * per..(ki * ns.len() + ni + 1) * per];
        for (ni, &n) in ns.iter().enumerate() {
            let b = block(ni);
            strong_ok &= b[0].mean >= 0.9;
            weak_ok &= b[1].mean <= 2.0 / (n as f64 + 1.0) + 0.05;
            let curve = &b[2..];
            for w in curve.windows(2) {
                let noise = 2.0 * (w[0].sem.powi(2) + w[1].sem.powi(2)).sqrt();
                monotone_ok &= w[1].mean <= w[0].mean + noise;
            }
        }
        for si in 0..shared.len() {
            let values: Vec<f64> = (0..ns.len()).map(|ni| block(ni)[2 + si].mean).collect();
            let gap = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
            collapse_gap = collapse_gap.max(gap);
        }
    }
    let collapse_ok = collapse_gap < 0.1;
    Outcome {
        pass: strong_ok && weak_ok && collapse_ok && monotone_ok,
        detail: format!(
            "purity ≥ 0.9 at σ=0.5: {strong_ok}; ≤ 2/d+0.05 at σ=30√J: {weak_ok}; max gap across N on σ∈{} = {collapse_gap:.3} (< 0.1: {collapse_ok}); monotone: {monotone_ok}",
            fmt_list(&shared)
        ),
    }
}

fn property_suites() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let povm = [0.05, 0.5, 3.0, 400.0]
        .iter()
        .map(|&s| GaussianMeasurement::new(q(60), s).unwrap().povm_completeness_check())
        .fold(0.0, f64::max);
    pass &= povm <= 1e-8;
    notes.push(format!("POVM {povm:.1e}"));

    let u = build_propagator(q(120), KickedTopParams::from_k(3.0)).unwrap();
    let defect = spinmon::linalg::unitarity_defect(u.matrix());
    let mut psi = spin_coherent(q(120), 0.4, 0.9);
    let meas = GaussianMeasurement::new(q(120), 0.7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        psi = u.apply(&psi).unwrap();
        let m = meas.sample_outcome(&psi, &mut rng).unwrap().m;
        psi = meas.posterior_update(&psi, m).unwrap();
    }
    let norm = (psi.norm() - 1.0).abs();
    let rho = u.apply_density(&spinmon::DensityState::maximally_mixed(q(120))).unwrap();
    let trace = (rho.trace() - 1.0).abs();
    pass &= defect <= 1e-10 && norm <= 1e-12 && trace <= 1e-12;
    notes.push(format!("unitarity {defect:.1e}, norm {norm:.1e}, trace {trace:.1e}"));

    let n = 16;
    let ops = make_ops(q(n)).unwrap();
    let [jx, jy, jz] = common::spin_matrices(n);
    let gen = jx.mapv(|z| z * 0.7) + jy.mapv(|z| z * -0.2) + jz.mapv(|z| z * 1.4);
    let rot = common::expm_i(&gen, 1.0);
    let state = haar_random_state(q(n), &mut rng);
    let rotated = spinmon::SpinState::from_amplitudes(q(n), common::matvec(&rot, state.as_slice())).unwrap();
    let rot_err = (mean_qfi(&state, &ops).mean_qfi - mean_qfi(&rotated, &ops).mean_qfi).abs();
    pass &= rot_err <= 1e-8;
    notes.push(format!("rotation {rot_err:.1e}"));

    let sampler = GaussianMeasurement::new(q(30), 1.5).unwrap();
    let target = haar_random_state(q(30), &mut rng);
    let mut draws: Vec<f64> = (0..20_000).map(|_| sampler.sample_outcome(&target, &mut rng).unwrap().m).collect();
    let pops = target.populations().to_vec();
    let mz = q(30).m_values().to_vec();
    let ks = common::ks_statistic(&mut draws, |x| {
        pops.iter().zip(&mz).map(|(p, z)| p * common::normal_cdf((x - z) / 1.5)).sum()
    });
    let ks_ok = ks < common::ks_critical(draws.len());
    pass &= ks_ok;
    notes.push(format!("KS D={ks:.4} ({ks_ok})"));

    let grid: Vec<RunConfig> = (0..4)
        .map(|i| RunConfig::pure(q(12 + 2 * i), 3.0, 0.5 + i as f64, 77).with_steps(10).with_trajectories(5))
        .collect();
    let a = spinmon::trajectory::run_sweep_with(&grid, spinmon::Execution::Sequential).unwrap();
    let b = spinmon::trajectory::run_sweep_with(&grid, spinmon::Execution::Parallel).unwrap();
    let same = a
        .rows
        .iter()
        .zip(&b.rows)
        .all(|(x, y)| x.mean.to_bits() == y.mean.to_bits() && x.sem.to_bits() == y.sem.to_bits());
    pass &= same;
    notes.push(format!("determinism {same}"));

    let pts: Vec<spinmon::scaling::ScalingPoint> = [50.0f64, 100.0, 200.0, 400.0]
        .iter()
        .map(|&n| spinmon::scaling::ScalingPoint { n, mean: 3.0 * n * n, sem: 0.03 * n * n })
        .collect();
    let fit = spinmon::scaling::fit_power_law(&pts).unwrap();
    let fit_err = (fit.beta - 2.0).abs().max((fit.c - 3.0).abs());
    pass &= fit_err <= 1e-10;
    notes.push(format!("fit {fit_err:.1e}"));

    Outcome { pass, detail: notes.join(", ") }
}

fn fmt_list(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("reference values", reference_table),
        ("Haar Monte Carlo", haar_monte_carlo),
        ("strong-measurement plateau", strong_plateau),
        ("weak-measurement Haar plateau", weak_plateau),
        ("intermediate dip", intermediate_dip),
        ("scaling exponents", scaling_exponents),
        ("Haar analytical model", haar_model_checks),
        ("Haar model vs simulation", model_vs_simulation),
        ("purification", purification),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({:.1?}) {}",
            i + 1,
            name,
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed(),
            outcome.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
