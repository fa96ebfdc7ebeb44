//! The deterministic limit against closed forms and against simulation means.

use hawkes_core::limit::{solve_limit, VolterraOptions};
use hawkes_core::model::{kernel_l1_norm, IntensityFn, Kernel};
use hawkes_core::simulate::{simulate_replicas, SimConfig};
use hawkes_core::stats::Summary;

/// For `φ(x) = ν + x` and `h(t) = e^{−βt}` (β ≠ 1) the excitation `y = ∫h dZ⁰` solves
/// `y' = ν − (β − 1)y`, so `λ⁰ = ν + ν(1 − e^{−(β−1)t})/(β − 1)`.
fn lambda_closed(nu: f64, beta: f64, t: f64) -> f64 {
    nu + nu * (1.0 - (-(beta - 1.0) * t).exp()) / (beta - 1.0)
}

fn z_closed(nu: f64, beta: f64, t: f64) -> f64 {
    let k = beta - 1.0;
    nu * t + nu / k * (t - (1.0 - (-k * t).exp()) / k)
}

#[test]
fn terminal_value_matches_closed_form() {
    let k = Kernel::exponential(1.0, 2.0).unwrap();
    let f = IntensityFn::linear(1.0, 1.0).unwrap();
    let (z0, report) = solve_limit(&k, &f, 1.0, 4096, &VolterraOptions::default()).unwrap();
    let want = 1.0 + (-1.0f64).exp();
    assert!((z0.last() - want).abs() < 1e-6, "{} vs {want}", z0.last());
    assert!(report.residual <= 1e-10);
    let lam = z0.derivative.as_ref().unwrap();
    for i in (0..=4096).step_by(64) {
        let t = z0.grid.time(i);
        assert!((lam[i] - (2.0 - (-t).exp())).abs() < 1e-7);
    }
}

#[test]
fn second_order_convergence() {
    let k = Kernel::exponential(1.0, 2.0).unwrap();
    let f = IntensityFn::linear(1.0, 1.0).unwrap();
    let want = 1.0 + (-1.0f64).exp();
    let errs: Vec<f64> = [256usize, 512, 1024]
        .iter()
        .map(|&n| (solve_limit(&k, &f, 1.0, n, &VolterraOptions::default()).unwrap().0.last() - want).abs())
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order} from {errs:?}");
    }
}

#[test]
fn other_decay_rates() {
    for (nu, beta) in [(0.5, 3.0), (2.0, 1.5), (1.0, 0.5)] {
        let k = Kernel::exponential(1.0, beta).unwrap();
        let f = IntensityFn::linear(nu, 1.0).unwrap();
        let (z0, _) = solve_limit(&k, &f, 2.0, 2048, &VolterraOptions::default()).unwrap();
        for i in (0..=2048).step_by(256) {
            let t = z0.grid.time(i);
            assert!((z0.values[i] - z_closed(nu, beta, t)).abs() < 1e-5, "nu={nu} beta={beta} t={t}");
            assert!((z0.derivative.as_ref().unwrap()[i] - lambda_closed(nu, beta, t)).abs() < 1e-5);
        }
    }
}

#[test]
fn general_kernel_path_agrees_with_recursion() {
    // The same exponential kernel, tabulated densely, goes through the direct convolution.
    let times: Vec<f64> = (0..=4000).map(|i| i as f64 / 4000.0).collect();
    let values: Vec<f64> = times.iter().map(|t| (-2.0 * t).exp()).collect();
    let table = Kernel::table(times, values).unwrap();
    let f = IntensityFn::linear(1.0, 1.0).unwrap();
    let (z0, _) = solve_limit(&table, &f, 1.0, 512, &VolterraOptions::default()).unwrap();
    assert!((z0.last() - (1.0 + (-1.0f64).exp())).abs() < 1e-5);
}

#[test]
fn l1_norms_closed_form() {
    let k = Kernel::exponential(0.7, 1.3).unwrap();
    let want = 0.7 * (1.0 - (-1.3f64 * 2.0).exp()) / 1.3;
    assert!((kernel_l1_norm(&k, 2.0).unwrap() - want).abs() < 1e-12);
    // ∫₀^L s(1 − t/L)^p dt = sL/(p+1)
    let k = Kernel::<f64>::polynomial_cutoff(2.0, 0.5, 3.0).unwrap();
    assert!((kernel_l1_norm(&k, 1.0).unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn simulated_mean_matches_limit_for_linear_phi() {
    // With φ linear, E[λ^ε] solves the same linear Volterra equation as λ⁰ for every ε.
    let k = Kernel::exponential(1.0, 2.0).unwrap();
    let f = IntensityFn::linear(1.0, 1.0).unwrap();
    let want = 1.0 + (-1.0f64).exp();
    for eps in [1.0, 0.1] {
        let cfg = SimConfig::scaled(eps, 1.0).with_replicas(20_000).with_seed(11);
        let paths = simulate_replicas(&k, &f, &cfg).unwrap();
        let z: Vec<f64> = paths.iter().map(|p| p.terminal()).collect();
        let s = Summary::of(&z);
        assert!((s.mean - want).abs() < 4.0 * s.std_error, "eps={eps}: {} ± {}", s.mean, s.std_error);
    }
}

#[test]
fn f32_limit_is_close_to_f64() {
    let k = Kernel::<f32>::exponential(1.0, 2.0).unwrap();
    let f = IntensityFn::<f32>::linear(1.0, 1.0).unwrap();
    let opts = VolterraOptions { tol: 1e-5, ..VolterraOptions::default() };
    let (z0, _) = solve_limit(&k, &f, 1.0, 256, &opts).unwrap();
    assert!((z0.last() as f64 - (1.0 + (-1.0f64).exp())).abs() < 1e-4);
}
