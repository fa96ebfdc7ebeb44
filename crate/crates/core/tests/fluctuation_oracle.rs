//! Covariance of the Gaussian limit against independent computations.

use hawkes_core::fluctuation::{
    build_gaussian_model, clt_check, covariance_at, covariance_by_resolvent, sample_gaussian_limit_at,
    CltOptions, FluctuationSource,
};
use hawkes_core::limit::{solve_limit, VolterraOptions};
use hawkes_core::model::{IntensityFn, Kernel};
use hawkes_core::stats::Summary;
use nalgebra::{DMatrix, DVector};

fn linear_exp() -> (Kernel<f64>, IntensityFn<f64>) {
    (Kernel::exponential(1.0, 2.0).unwrap(), IntensityFn::linear(1.0, 1.0).unwrap())
}

/// For φ(x) = 1 + x and h(t) = e^{−2t}, `Y = ∫h dX` closes the system
/// `dX = Y dt + σ dW`, `dY = −Y dt + σ dW`, `σ² = 2 − e^{−t}`; the covariance `P` of `(X, Y)`
/// solves `P' = MP + PMᵀ + σ² 𝟙𝟙ᵀ`. Integrated here by RK4.
fn lyapunov_oracle(t_end: f64, steps: usize) -> [[f64; 2]; 2] {
    let rhs = |t: f64, p: [[f64; 2]; 2]| -> [[f64; 2]; 2] {
        let s2 = 2.0 - (-t).exp();
        // M = [[0, 1], [0, −1]]
        let mp = [[p[1][0], p[1][1]], [-p[1][0], -p[1][1]]];
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = mp[i][j] + mp[j][i] + s2;
            }
        }
        out
    };
    let add = |p: [[f64; 2]; 2], k: [[f64; 2]; 2], c: f64| {
        let mut o = p;
        for i in 0..2 {
            for j in 0..2 {
                o[i][j] += c * k[i][j];
            }
        }
        o
    };
    let h = t_end / steps as f64;
    let mut p = [[0.0; 2]; 2];
    for s in 0..steps {
        let t = s as f64 * h;
        let k1 = rhs(t, p);
        let k2 = rhs(t + h / 2.0, add(p, k1, h / 2.0));
        let k3 = rhs(t + h / 2.0, add(p, k2, h / 2.0));
        let k4 = rhs(t + h, add(p, k3, h));
        for i in 0..2 {
            for j in 0..2 {
                p[i][j] += h / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
    }
    p
}

#[test]
fn oracle_sanity() {
    assert!((lyapunov_oracle(1.0, 4000)[0][0] - 2.518_191_617_571_526).abs() < 1e-9);
}

#[test]
fn constant_phi_is_scaled_brownian_motion() {
    let k = Kernel::exponential(1.0, 2.0).unwrap();
    let f = IntensityFn::<f64>::constant(1.7).unwrap();
    let (z0, _) = solve_limit(&k, &f, 1.0, 64, &VolterraOptions::default()).unwrap();
    let gm = build_gaussian_model(&k, &f, &z0).unwrap();
    let c = covariance_by_resolvent(&gm).unwrap();
    for i in 0..c.dim() {
        for j in 0..c.dim() {
            let want = 1.7 * c.times[i].min(c.times[j]);
            assert!((c.get(i, j) - want).abs() < 1e-12);
        }
    }
}

#[test]
fn linear_exponential_covariance_matches_continuous_limit() {
    let (k, f) = linear_exp();
    let mut errs = Vec::new();
    for n in [512usize, 1024, 2048] {
        let (z0, _) = solve_limit(&k, &f, 1.0, n, &VolterraOptions::default()).unwrap();
        let gm = build_gaussian_model(&k, &f, &z0).unwrap();
        let c = covariance_at(&gm, &[n / 2, n]).unwrap();
        let p_half = lyapunov_oracle(0.5, 4000);
        let p_one = lyapunov_oracle(1.0, 4000);
        // E[X_1 X_½] = P_xx(½) + (1 − e^{−½}) P_xy(½)
        let cross = p_half[0][0] + (1.0 - (-0.5f64).exp()) * p_half[0][1];
        let err = ((c.get(1, 1) - p_one[0][0]) / p_one[0][0]).abs();
        assert!(((c.get(0, 0) - p_half[0][0]) / p_half[0][0]).abs() < 4.0 / n as f64);
        assert!(((c.get(0, 1) - cross) / cross).abs() < 4.0 / n as f64);
        errs.push(err);
    }
    assert!(errs[2] < 2e-3, "{errs:?}");
    // First-order Euler bias halves with the step.
    for w in errs.windows(2) {
        assert!((w[0] / w[1] - 2.0).abs() < 0.2, "{errs:?}");
    }
}

#[test]
fn covariance_matches_explicit_inverse() {
    let k = Kernel::polynomial_cutoff(0.9, 0.6, 2.0).unwrap();
    let f = IntensityFn::soft_saturating(1.2, 0.8, 1.5).unwrap();
    let n = 30;
    let (z0, _) = solve_limit(&k, &f, 1.0, n, &VolterraOptions::default()).unwrap();
    let gm = build_gaussian_model(&k, &f, &z0).unwrap();
    let dt = 1.0 / n as f64;
    // (X_1..X_n) = B⁻¹ S ξ with B lower-bidiagonal-plus-memory from the Euler recursion.
    let mut b = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        // row for X_{i+1}: X_{i+1} − (1 + a_i h0 Δ) X_i − Σ_{j<i} a_i Δ² h'((i−j)Δ) X_j = σ_i √Δ ξ_i
        if i >= 1 {
            b[(i, i - 1)] -= 1.0 + gm.drift[i] * gm.h0 * dt;
        }
        for j in 1..i {
            b[(i, j - 1)] -= gm.drift[i] * dt * dt * gm.hprime[i - j];
        }
    }
    let s = DMatrix::from_diagonal(&DVector::from_iterator(n, (0..n).map(|i| gm.diffusion[i] * dt.sqrt())));
    let l = b.try_inverse().unwrap() * s;
    let cov = &l * l.transpose();
    let c = covariance_by_resolvent(&gm).unwrap();
    for r in 1..=n {
        for q in 1..=n {
            assert!((c.get(r, q) - cov[(r - 1, q - 1)]).abs() < 1e-12, "({r},{q})");
        }
    }
}

#[test]
fn euler_sample_variance_matches_covariance() {
    let (k, f) = linear_exp();
    let (z0, _) = solve_limit(&k, &f, 1.0, 128, &VolterraOptions::default()).unwrap();
    let gm = build_gaussian_model(&k, &f, &z0).unwrap();
    let c = covariance_at(&gm, &[64, 128]).unwrap();
    let samples = sample_gaussian_limit_at(&gm, 20_000, 4, &[64, 128]);
    for (slot, _) in [64usize, 128].iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s[slot]).collect();
        let s = Summary::of(&xs);
        assert!((s.variance - c.get(slot, slot)).abs() < 4.0 * s.variance_std_error());
        assert!(s.mean.abs() < 4.0 * s.std_error);
    }
}

#[test]
fn clt_check_on_poisson_passes() {
    let k = Kernel::zero();
    let f = IntensityFn::constant(1.0).unwrap();
    let (z0, _) = solve_limit(&k, &f, 1.0, 64, &VolterraOptions::default()).unwrap();
    let sources = [FluctuationSource::Scaled(0.01), FluctuationSource::MeanField(1000)];
    let report = clt_check(&k, &f, &z0, &sources, 2000, 21, &CltOptions::default()).unwrap();
    let ks: Vec<_> = report.checks.iter().filter(|c| c.name.starts_with("ks_")).collect();
    assert_eq!(ks.len(), 3);
    assert!(ks.iter().all(|c| c.pass), "{:?}", report.checks);
    assert_eq!(report.results.len(), 2);
}
