mod common;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinmon::haar_model::{
    closed_form_traces, haar_expectation_sq, haar_mean_qfi_curve, CurveOptions, HaarModelInput, TraceForm,
};
use spinmon::{make_ops, Axis, SpinQuantum};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn traces_array(t: &spinmon::haar_model::HaarTraces) -> [f64; 5] {
    [t.tr_k2, t.tr_k4, t.tr_k2jz, t.tr_k2jz_k2jz, t.tr_k2jx_k2jx]
}

#[test]
fn lattice_traces_match_discrete_sums() {
    for j in [50.0f64, 100.0, 150.0, 62.5] {
        for sigma in [0.5, 1.0, 3.3, j.sqrt(), j / 3.0, j] {
            for m0 in [0.0, 0.37, j / 2.0, -j / 3.0, j, j + 2.0 * sigma] {
                let got =
                    traces_array(&closed_form_traces(&HaarModelInput::new(j, sigma, m0).unwrap(), TraceForm::Lattice));
                let want = common::discrete_traces(j, sigma, m0);
                for (i, (g, w)) in got.iter().zip(want).enumerate() {
                    // tr K²J_z vanishes at m0 = 0; compare on the scale of J·tr K².
                    let err = if i == 2 { (g - w).abs() / (j * want[0]) } else { rel(*g, w) };
                    assert!(err < 1e-6, "J={j} σ={sigma} m0={m0} trace {i}: {g} vs {w}");
                }
            }
        }
    }
}

#[test]
fn printed_traces_approach_discrete_sums_at_large_j() {
    // The continuum forms drop O(1/J) and O(1/σ²) lattice corrections.
    let j = 500.0f64;
    for sigma in [5.0, j.sqrt(), j / 4.0] {
        let got = traces_array(&closed_form_traces(&HaarModelInput::new(j, sigma, 30.0).unwrap(), TraceForm::Printed));
        let want = common::discrete_traces(j, sigma, 30.0);
        for (i, (g, w)) in got.iter().zip(want).enumerate() {
            assert!(rel(*g, w) < 2e-2, "σ={sigma} trace {i}: {g} vs {w}");
        }
    }
}

#[test]
fn trace_invariants() {
    for form in [TraceForm::Printed, TraceForm::Lattice] {
        for &(j, sigma, m0) in &[(50.0, 1.0, 12.0), (150.0, 20.0, -40.0), (75.5, 5.0, 80.0)] {
            let t = closed_form_traces(&HaarModelInput::new(j, sigma, m0).unwrap(), form);
            assert!(t.tr_k2 > 0.0 && t.tr_k4 > 0.0);
            assert!(t.tr_k2jz_k2jz >= 0.0 && t.tr_k2jx_k2jx >= 0.0);
            let x = haar_expectation_sq(&HaarModelInput::new(j, sigma, m0).unwrap(), Axis::X, form);
            let y = haar_expectation_sq(&HaarModelInput::new(j, sigma, m0).unwrap(), Axis::Y, form);
            assert_eq!(x, y);
        }
    }
}

/// Monte Carlo check of the Haar estimate: sample states, apply K, and
/// average `<J_a>²` of the normalized post-measurement state.
#[test]
fn haar_estimate_agrees_with_monte_carlo() {
    let n = 100;
    let j = 50.0f64;
    let quantum = SpinQuantum::new(n).unwrap();
    let ops = make_ops(quantum).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for sigma in [1.0, j.sqrt(), j] {
        for m0 in [0.0, j / 2.0] {
            let k: Vec<f64> =
                quantum.m_values().iter().map(|m| (-(m - m0) * (m - m0) / (4.0 * sigma * sigma)).exp()).collect();
            let samples = 10_000;
            let mut acc: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(samples));
            for _ in 0..samples {
                let psi = common::haar_vector(n as usize + 1, &mut rng);
                let mut post: Vec<C64> = psi.iter().zip(&k).map(|(c, w)| c * w).collect();
                let norm = post.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                post.iter_mut().for_each(|c| *c /= norm);
                let mean = ops.first_moments(&post);
                for a in 0..3 {
                    acc[a].push(mean[a] * mean[a]);
                }
            }
            let input = HaarModelInput::new(j, sigma, m0).unwrap();
            let t = closed_form_traces(&input, TraceForm::Lattice);
            // Number of Dicke levels the measurement leaves in play.
            let resolved = t.tr_k2 * t.tr_k2 / t.tr_k4;
            for (a, axis) in Axis::ALL.iter().enumerate() {
                let (mc, sem) = spinmon::trajectory::mean_and_sem(&acc[a]);
                let model = haar_expectation_sq(&input, *axis, TraceForm::Lattice);
                // Replacing E[x/y] by E[x]/E[y] leaves a bias of relative size
                // ~1/(resolved levels) on top of the sampling noise.
                let bound = 3.0 * sem + 2.0 * model.abs() / resolved;
                assert!((mc - model).abs() < bound, "σ={sigma} m0={m0} {axis:?}: MC {mc} ± {sem} vs {model}");
            }
        }
    }
}

#[test]
fn curve_is_bounded_and_converged() {
    let j = 40.0;
    let sigmas = [0.05, 0.3, 1.0, 4.0, 20.0, 200.0, 5000.0];
    let curve = haar_mean_qfi_curve(j, &sigmas, &CurveOptions::default()).unwrap();
    for p in &curve {
        assert!(p.converged, "σ={} moved by {}", p.sigma, p.relative_change);
        assert!(p.mean_qfi >= 0.0 && p.mean_qfi <= 4.0 / 3.0 * j * (j + 1.0));
        assert!((p.sigma_over_sqrt_j - p.sigma / j.sqrt()).abs() < 1e-15);
    }
    // Projective limit: average of Dicke values; no-measurement limit: Haar value.
    assert!(rel(curve[0].mean_qfi, 8.0 / 9.0 * (j * j + j)) < 1e-6);
    assert!(rel(curve[6].mean_qfi, 4.0 / 3.0 * (j * j + j / 2.0)) < 1e-3);
}

#[test]
fn curve_rejects_bad_input() {
    let opts = CurveOptions::default();
    assert!(haar_mean_qfi_curve(10.0, &[], &opts).is_err());
    assert!(haar_mean_qfi_curve(10.0, &[-1.0], &opts).is_err());
    assert!(haar_mean_qfi_curve(0.5, &[1.0], &opts).is_err());
}
