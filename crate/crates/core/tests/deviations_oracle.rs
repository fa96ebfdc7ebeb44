//! Rate functionals, their minimization and the tail estimators against analytic values.

use hawkes_core::deviations::optimize::{minimize_rate, ConstraintSpec, OptimParams};
use hawkes_core::deviations::rate::{rate_i, rate_j, RateFunctional, RateKind};
use hawkes_core::deviations::tail::{tail_probability, TailMethod, TailRequest};
use hawkes_core::deviations::ell;
use hawkes_core::grid::{GridPath, UniformGrid};
use hawkes_core::limit::{solve_limit, VolterraOptions};
use hawkes_core::model::{IntensityFn, Kernel};

fn linear_exp() -> (Kernel<f64>, IntensityFn<f64>) {
    (Kernel::exponential(1.0, 2.0).unwrap(), IntensityFn::linear(1.0, 1.0).unwrap())
}

fn velocity_path(n: usize, v: impl Fn(f64) -> f64) -> GridPath<f64> {
    let g = UniformGrid::new(1.0, n).unwrap();
    GridPath::from_velocity(g, g.times().into_iter().map(v).collect()).unwrap()
}

/// Composite Simpson rule on `[0, 1]`.
fn simpson(f: impl Fn(f64) -> f64, m: usize) -> f64 {
    let h = 1.0 / m as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..m {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn i_of_doubled_limit_path() {
    // η = 2Z⁰: η' = 4 − 2e^{−t}, ∫h dη = 2(1 − e^{−t}), so the reference intensity is 3 − 2e^{−t}.
    let (k, f) = linear_exp();
    let oracle = simpson(|t| ell(4.0 - 2.0 * (-t).exp(), 3.0 - 2.0 * (-t).exp()).unwrap(), 20_000);
    assert!((oracle - 0.253_779_673_239_667_8).abs() < 1e-12);
    for n in [1 << 10, 1 << 16] {
        let eta = velocity_path(n, |t| 4.0 - 2.0 * (-t).exp());
        let i = rate_i(&eta, &k, &f).unwrap();
        assert!(i > 0.0 && i.is_finite());
        assert!((i / oracle - 1.0).abs() < 1e-4, "n={n}: {i} vs {oracle}");
    }
}

#[test]
fn j_of_limit_path_as_perturbation() {
    // η = Z⁰: the residual η' − φ'·∫h dη is identically 1, so J = ½∫dt/(2 − e^{−t}) = ¼ ln(2e − 1).
    let (k, f) = linear_exp();
    let want = 0.25 * (2.0 * std::f64::consts::E - 1.0).ln();
    let mut last = None;
    for n in [512usize, 1024, 2048] {
        let (z0, _) = solve_limit(&k, &f, 1.0, n, &VolterraOptions::default()).unwrap();
        let j = rate_j(&z0, &k, &f, &z0).unwrap();
        assert!((j - want).abs() < 1e-5, "n={n}: {j} vs {want}");
        if let Some(prev) = last {
            let change: f64 = (j - prev) / prev;
            assert!(change.abs() < 1e-4);
        }
        last = Some(j);
    }
}

#[test]
fn refinement_changes_are_small() {
    let f = IntensityFn::soft_saturating(1.5, 1.0, 0.7).unwrap();
    let k = Kernel::polynomial_cutoff(0.8, 0.7, 2.0).unwrap();
    let v = |t: f64| 1.0 + 0.5 * (3.0 * t).sin();
    let i1 = rate_i(&velocity_path(1024, v), &k, &f).unwrap();
    let i2 = rate_i(&velocity_path(2048, v), &k, &f).unwrap();
    assert!(((i2 - i1) / i1).abs() <= 1e-3);
    let (z1, _) = solve_limit(&k, &f, 1.0, 1024, &VolterraOptions::default()).unwrap();
    let (z2, _) = solve_limit(&k, &f, 1.0, 2048, &VolterraOptions::default()).unwrap();
    let j1 = rate_j(&velocity_path(1024, v), &k, &f, &z1).unwrap();
    let j2 = rate_j(&velocity_path(2048, v), &k, &f, &z2).unwrap();
    assert!(((j2 - j1) / j1).abs() <= 1e-3);
}

#[test]
fn poisson_and_quadratic_minimizers() {
    let f = IntensityFn::<f64>::constant(1.0).unwrap();
    let k = Kernel::zero();
    let (z0, _) = solve_limit(&k, &f, 1.0, 128, &VolterraOptions::default()).unwrap();
    let p = OptimParams::default();
    let (path, value, report) =
        minimize_rate(RateKind::Ldp, &ConstraintSpec::endpoint_equal(2.0, RateKind::Ldp), &k, &f, &z0, 128, &p).unwrap();
    assert!((value - 0.386_294_4).abs() < 1e-4);
    assert!(report.gradient_check_error <= 1e-5);
    for i in 0..path.grid.len() {
        assert!((path.values[i] - 2.0 * path.grid.time(i)).abs() < 1e-6);
    }
    for x in [0.5, 1.0, 2.0] {
        let (path, value, _) =
            minimize_rate(RateKind::Mdp, &ConstraintSpec::endpoint_equal(x, RateKind::Mdp), &k, &f, &z0, 128, &p)
                .unwrap();
        assert!((value - x * x / 2.0).abs() < 1e-9);
        assert!(path.derivative.unwrap().iter().all(|v| (v - x).abs() < 1e-6));
    }
}

#[test]
fn random_perturbations_do_not_beat_the_minimizer() {
    use rand::{Rng, SeedableRng};
    let f = IntensityFn::<f64>::constant(1.0).unwrap();
    let k = Kernel::zero();
    let g = UniformGrid::new(1.0, 64).unwrap();
    let func = RateFunctional::ldp(&k, &f, g);
    let w = g.trapezoid_weights();
    let best = func.value(&vec![2.0; 65]).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let mut v: Vec<f64> = (0..65).map(|_| 2.0 * (0.3 * (rng.random::<f64>() - 0.5)).exp()).collect();
        let total: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        v.iter_mut().for_each(|x| *x *= 2.0 / total);
        assert!(func.value(&v).unwrap() >= best - 1e-14);
    }
}

#[test]
fn inactive_constraint_gives_the_limit() {
    let (k, f) = linear_exp();
    let (z0, _) = solve_limit(&k, &f, 1.0, 256, &VolterraOptions::default()).unwrap();
    let c = ConstraintSpec::endpoint_at_least(0.8 * z0.last(), RateKind::Ldp);
    let (path, value, _) = minimize_rate(RateKind::Ldp, &c, &k, &f, &z0, 256, &OptimParams::default()).unwrap();
    assert!(value.abs() < 1e-9);
    assert!(path.sup_distance(&z0).unwrap() < 1e-6);
}

#[test]
fn excited_minimizer_hits_the_endpoint() {
    let (k, f) = linear_exp();
    let (z0, _) = solve_limit(&k, &f, 1.0, 256, &VolterraOptions::default()).unwrap();
    let x = 1.5 * z0.last();
    let c = ConstraintSpec::endpoint_at_least(x, RateKind::Ldp);
    let (path, value, report) = minimize_rate(RateKind::Ldp, &c, &k, &f, &z0, 256, &OptimParams::default()).unwrap();
    assert!(report.converged, "{report:?}");
    assert!((path.last() - x).abs() < 1e-9);
    assert!(value > 0.0);
    // A constant-rate path to the same endpoint costs more.
    let line = GridPath::linear(z0.grid, x);
    assert!(rate_i(&line, &k, &f).unwrap() > value);
}

#[test]
fn exact_poisson_large_deviation_values() {
    let k = Kernel::zero();
    let f = IntensityFn::<f64>::constant(1.0).unwrap();
    let frozen = [(0.01, -0.415_144_733_045_925_6), (0.005, -0.402_427_596_768_418_1), (0.002, -0.393_657_838_121_724_3)];
    for (eps, want) in frozen {
        let est = tail_probability(&k, &f, &TailRequest::ldp(2.0, eps, 1.0, TailMethod::ExactPoisson)).unwrap();
        assert!((est.log_scale - want).abs() < 1e-9, "eps={eps}: {}", est.log_scale);
    }
}

#[test]
fn exact_poisson_moderate_deviation_values() {
    let k = Kernel::zero();
    let f = IntensityFn::<f64>::constant(1.0).unwrap();
    for (eps, want) in [(1e-2, -0.667_053_827_737_172_1), (1e-3, -0.555_674_250_878_227_6)] {
        let est = tail_probability(&k, &f, &TailRequest::mdp(1.0, eps, 0.25, 1.0, TailMethod::ExactPoisson)).unwrap();
        assert!((est.log_scale - want).abs() < 1e-9, "eps={eps}: {}", est.log_scale);
    }
}

#[test]
fn near_sure_event() {
    let (k, f) = linear_exp();
    let (z0, _) = solve_limit(&k, &f, 1.0, 256, &VolterraOptions::default()).unwrap();
    let mut last = 0.0;
    for eps in [0.2, 0.05, 0.01] {
        let req = TailRequest::ldp(0.5 * z0.last(), eps, 1.0, TailMethod::PlainMc).with_replicas(4000, 5);
        let p = tail_probability(&k, &f, &req).unwrap().estimate;
        assert!(p >= last - 0.01);
        last = p;
    }
    assert!(last > 0.99);
}

#[test]
fn importance_sampling_unbiased_on_poisson() {
    let k = Kernel::zero();
    let f = IntensityFn::<f64>::constant(2.0).unwrap();
    let exact = tail_probability(&k, &f, &TailRequest::ldp(3.0, 0.05, 1.0, TailMethod::ExactPoisson)).unwrap();
    let req = TailRequest::ldp(3.0, 0.05, 1.0, TailMethod::ImportanceSampling).with_replicas(20_000, 9);
    let is = tail_probability(&k, &f, &req).unwrap();
    assert!((is.estimate - exact.estimate).abs() <= 3.0 * is.std_error, "{} vs {}", is.estimate, exact.estimate);
    assert!(is.warnings.is_empty());
    let req = TailRequest::mdp(1.0, 0.01, 0.25, 1.0, TailMethod::ImportanceSampling).with_replicas(20_000, 9);
    let is = tail_probability(&k, &IntensityFn::constant(1.0).unwrap(), &req).unwrap();
    let exact = tail_probability(&k, &IntensityFn::constant(1.0).unwrap(), &TailRequest::mdp(1.0, 0.01, 0.25, 1.0, TailMethod::ExactPoisson)).unwrap();
    assert!((is.estimate - exact.estimate).abs() <= 3.0 * is.std_error, "{} vs {}", is.estimate, exact.estimate);
}

/// `ε log E e^{θ N_T}` for the linear model `φ = 1 + x`, `h = e^{-2t}`, which is exact for every
/// `ε` through the cluster representation: immigrants at rate `1/ε`, each founding a cluster
/// whose size generating function solves `F(u) = e^θ exp(∫₀ᵘ h(r)(F(u−r) − 1) dr)`.
fn linear_cluster_cgf(theta: f64, n: usize) -> f64 {
    let du = 1.0 / n as f64;
    let h: Vec<f64> = (0..=n).map(|i| (-2.0 * i as f64 * du).exp()).collect();
    let mut f = vec![theta.exp(); n + 1];
    for i in 1..=n {
        let tail: f64 = (1..i).map(|j| h[j] * (f[i - j] - 1.0)).sum::<f64>() + 0.5 * h[i] * (f[0] - 1.0);
        let mut x = f[i - 1];
        for _ in 0..100 {
            let next = (theta + du * (tail + 0.5 * h[0] * (x - 1.0))).exp();
            if (next - x).abs() < 1e-15 {
                break;
            }
            x = next;
        }
        f[i] = x;
    }
    du * (f.iter().map(|v| v - 1.0).sum::<f64>() - 0.5 * (f[0] - 1.0 + f[n] - 1.0))
}

/// Legendre transform `sup_θ (θx − Λ(θ))` by golden-section search on `[0, 1]`; `Λ` is
/// infinite (the recursion overflows) for large `θ`.
fn legendre(x: f64, n: usize) -> f64 {
    let g = |t: f64| {
        let v = t * x - linear_cluster_cgf(t, n);
        if v.is_finite() { v } else { f64::NEG_INFINITY }
    };
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    while b - a > 1e-9 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    g(0.5 * (a + b))
}

#[test]
fn excited_rate_infimum_matches_cluster_legendre_transform() {
    let (k, f) = linear_exp();
    let z0 = solve_limit(&k, &f, 1.0, 256, &VolterraOptions::default()).unwrap().0;
    let x = 1.5 * z0.last();
    let oracle = legendre(x, 2000);
    // Frozen from an independent run of the same construction with 4000 steps.
    assert!((oracle - 0.07488770384562227).abs() < 1e-6, "oracle {oracle}");
    let c = ConstraintSpec::endpoint_at_least(x, RateKind::Ldp);
    let (_, value, _) = minimize_rate(RateKind::Ldp, &c, &k, &f, &z0, 256, &OptimParams::default()).unwrap();
    assert!((value - oracle).abs() < 1e-5, "minimized {value} vs Legendre {oracle}");
}
