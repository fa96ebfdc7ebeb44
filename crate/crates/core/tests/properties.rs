//! Property-based invariants.

use hawkes_core::convolution::Convolver;
use hawkes_core::deviations::ell;
use hawkes_core::deviations::rate::{rate_i, RateFunctional};
use hawkes_core::grid::{cumulative_trapezoid, GridPath, UniformGrid};
use hawkes_core::limit::{solve_limit, VolterraOptions};
use hawkes_core::model::{audit_assumptions, kernel_l1_norm, lipschitz_probe, IntensityFn, Kernel};
use hawkes_core::simulate::{simulate_mean_field, simulate_scaled_hawkes, SimConfig};
use hawkes_core::stats::{ks_one_sample, poisson_log_tail};
use proptest::prelude::*;

fn kernel_strategy() -> impl Strategy<Value = Kernel<f64>> {
    prop_oneof![
        (0.0..2.0f64, 0.1..5.0f64).prop_map(|(s, b)| Kernel::exponential(s, b).unwrap()),
        (0.0..2.0f64).prop_map(|v| Kernel::constant(v).unwrap()),
        (0.0..2.0f64, 0.1..3.0f64, 1.0..4.0f64).prop_map(|(s, l, p)| Kernel::polynomial_cutoff(s, l, p).unwrap()),
    ]
}

fn phi_strategy() -> impl Strategy<Value = IntensityFn<f64>> {
    prop_oneof![
        (0.2..3.0f64, 0.0..1.5f64).prop_map(|(nu, s)| IntensityFn::linear(nu, s).unwrap()),
        (0.2..3.0f64).prop_map(|c| IntensityFn::constant(c).unwrap()),
        (1.0..3.0f64, -1.0..1.0f64, 0.1..2.0f64).prop_map(|(b, a, r)| IntensityFn::soft_saturating(b, a, r).unwrap()),
    ]
}

/// Closed-form `∫₀ᵀ |h|`.
fn l1_closed(k: &Kernel<f64>, t: f64) -> f64 {
    use hawkes_core::model::KernelKind::*;
    match k.kind() {
        Exponential { scale, beta } => scale.abs() * (1.0 - (-beta * t).exp()) / beta,
        Constant { value } => value.abs() * t,
        PolynomialCutoff { scale, cutoff, power } => {
            let u = (t / cutoff).min(1.0);
            scale.abs() * cutoff * (1.0 - (1.0 - u).powf(power + 1.0)) / (power + 1.0)
        }
        Table { .. } => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn l1_norm_matches_antiderivative(k in kernel_strategy(), t in 0.1..4.0f64) {
        let want = l1_closed(&k, t);
        let got = kernel_l1_norm(&k, t).unwrap();
        prop_assert!((got - want).abs() <= 1e-8 * want.max(1e-300), "{} vs {}", got, want);
    }

    #[test]
    fn audit_is_deterministic(k in kernel_strategy(), f in phi_strategy(), t in 0.2..3.0f64) {
        let a = audit_assumptions(&k, &f, t).unwrap();
        let b = audit_assumptions(&k, &f, t).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn linear_lipschitz_probe_is_one(nu in 0.0..5.0f64, xs in prop::collection::vec(-100.0..100.0f64, 2..50)) {
        let f = IntensityFn::linear(nu, 1.0).unwrap();
        prop_assume!(xs.iter().any(|x| *x != xs[0]));
        let q = lipschitz_probe(&f, &xs).unwrap();
        prop_assert!((q - 1.0).abs() <= 1e-12, "{}", q);
    }

    #[test]
    fn ell_nonnegative_unique_zero(x in 0.0..50.0f64, y in 1e-3..50.0f64) {
        let v = ell(x, y).unwrap();
        prop_assert!(v >= 0.0);
        if (x - y).abs() > 1e-3 * y {
            prop_assert!(v > 1e-12, "ell({}, {}) = {}", x, y, v);
        }
        prop_assert_eq!(ell(y, y).unwrap(), 0.0);
    }

    #[test]
    fn ell_midpoint_convex(a in 0.0..20.0f64, b in 0.0..20.0f64, y in 0.01..20.0f64) {
        let mid = ell(0.5 * (a + b), y).unwrap();
        let avg = 0.5 * (ell(a, y).unwrap() + ell(b, y).unwrap());
        prop_assert!(mid <= avg + 1e-12 * (1.0 + avg));
    }

    #[test]
    fn rate_i_vanishes_on_limit(k in kernel_strategy(), f in phi_strategy()) {
        let audit = audit_assumptions(&k, &f, 1.0).unwrap();
        prop_assume!(audit.a3.holds && f.inf_value() > 0.0);
        let (z0, _) = solve_limit(&k, &f, 1.0, 128, &VolterraOptions::default()).unwrap();
        let i = rate_i(&z0, &k, &f).unwrap();
        prop_assert!(i.abs() < 1e-12, "{}", i);
    }

    #[test]
    fn gradient_check_at_random_feasible_paths(
        k in kernel_strategy(), f in phi_strategy(), seed in 0u64..1000,
    ) {
        use rand::{Rng, SeedableRng};
        prop_assume!(f.inf_value() > 0.0);
        let (z0, _) = solve_limit(&k, &f, 1.0, 48, &VolterraOptions::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..49).map(|_| 0.2 + 3.0 * rng.random::<f64>()).collect();
        let ldp = RateFunctional::ldp(&k, &f, z0.grid);
        prop_assert!(ldp.gradient_check(&v, 64).unwrap() <= 1e-5);
        let mdp = RateFunctional::mdp(&k, &f, &z0).unwrap();
        prop_assert!(mdp.gradient_check(&v, 64).unwrap() <= 1e-5);
    }

    #[test]
    fn convolution_adjoint(k in kernel_strategy(), v in prop::collection::vec(-3.0..3.0f64, 33), g in prop::collection::vec(-3.0..3.0f64, 33)) {
        let grid = UniformGrid::new(1.5, 32).unwrap();
        let c = Convolver::new(&k, &grid);
        let lhs: f64 = c.apply(&v).iter().zip(&g).map(|(a, b)| a * b).sum();
        let rhs: f64 = v.iter().zip(c.apply_transpose(&g)).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        let d = Convolver::direct(&k, &grid).apply(&v);
        for (a, b) in c.apply(&v).iter().zip(&d) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn cumulative_trapezoid_endpoint(v in prop::collection::vec(0.0..5.0f64, 2..60)) {
        let n = v.len() - 1;
        let g = UniformGrid::new(2.0, n.max(2)).unwrap();
        prop_assume!(n >= 2);
        let path = GridPath::from_velocity(g, v.clone()).unwrap();
        let w: f64 = g.trapezoid_weights().iter().zip(&v).map(|(a, b)| a * b).sum();
        prop_assert!((path.last() - w).abs() < 1e-12 * (1.0 + w));
        prop_assert!(path.is_ac0_plus());
        prop_assert_eq!(cumulative_trapezoid(&v, g.dt()), path.values);
    }

    #[test]
    fn simulation_is_reproducible(k in kernel_strategy(), f in phi_strategy(), seed in any::<u64>(), r in 0u64..1000) {
        let audit = audit_assumptions(&k, &f, 1.0).unwrap();
        prop_assume!(audit.a3.holds);
        let cfg = SimConfig::scaled(0.2, 1.0).with_seed(seed);
        let a = simulate_scaled_hawkes(&k, &f, &cfg, r).unwrap();
        let b = simulate_scaled_hawkes(&k, &f, &cfg, r).unwrap();
        prop_assert_eq!(&a.jump_times, &b.jump_times);
        prop_assert!(a.jump_times.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(a.jump_times.iter().all(|t| *t > 0.0 && *t <= 1.0));
        let m = simulate_mean_field(&k, &f, &SimConfig::mean_field(5, 1.0).with_seed(seed), r).unwrap();
        prop_assert_eq!(m, simulate_mean_field(&k, &f, &SimConfig::mean_field(5, 1.0).with_seed(seed), r).unwrap());
    }

    #[test]
    fn poisson_tail_monotone(mean in 0.1..500.0f64, k in 0u64..1000) {
        let a = poisson_log_tail(mean, k);
        let b = poisson_log_tail(mean, k + 1);
        prop_assert!(a <= 0.0 && b <= a);
    }

    #[test]
    fn ks_statistic_in_unit_interval(xs in prop::collection::vec(-5.0..5.0f64, 1..200)) {
        let d = ks_one_sample(&xs, hawkes_core::stats::normal_cdf);
        prop_assert!((0.0..=1.0).contains(&d));
    }
}
