//! Adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.

use crate::error::{HawkesError, Result};
use crate::real::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-14, max_depth: 40 }
    }
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Result<(T, T)> {
    let half = T::lit(0.5);
    let center = (a + b) * half;
    let radius = (b - a) * half;
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    let mut finite = fc.is_finite();
    for j in 0..7 {
        let dx = radius * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        finite &= f1.is_finite() && f2.is_finite();
        kronrod += (f1 + f2) * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss += (f1 + f2) * T::lit(WG[j / 2]);
        }
    }
    if !finite {
        return Err(HawkesError::InvalidKernel(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    Ok((kronrod * radius, ((kronrod - gauss) * radius).abs()))
}

fn adapt<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    whole: T,
    err: T,
    tol: T,
    depth: usize,
    opts: &QuadOptions,
) -> Result<T> {
    if err <= tol || depth >= opts.max_depth || (b - a).abs() <= T::epsilon() * a.abs().max(T::one()) {
        return Ok(whole);
    }
    let mid = (a + b) * T::lit(0.5);
    let (left, el) = gk15(f, a, mid)?;
    let (right, er) = gk15(f, mid, b)?;
    let half_tol = tol * T::lit(0.5);
    Ok(adapt(f, a, mid, left, el, half_tol, depth + 1, opts)?
        + adapt(f, mid, b, right, er, half_tol, depth + 1, opts)?)
}

/// Integrates `f` over `[a, b]`, splitting first at the supplied interior breakpoints
/// (kinks or discontinuities of the integrand).
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    opts: &QuadOptions,
) -> Result<T> {
    let mut knots = vec![a];
    let mut interior: Vec<T> = breakpoints.iter().copied().filter(|&p| p > a && p < b).collect();
    interior.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    interior.dedup();
    knots.extend(interior);
    knots.push(b);

    let pieces: Vec<(T, T, T, T)> = knots
        .windows(2)
        .map(|w| gk15(&f, w[0], w[1]).map(|(v, e)| (w[0], w[1], v, e)))
        .collect::<Result<_>>()?;
    let rough: T = pieces.iter().map(|p| p.2.abs()).sum();
    let tol = (T::lit(opts.rel_tol) * rough).max(T::lit(opts.abs_tol));
    let share = tol / T::from_usize_lossy(pieces.len());
    let mut total = T::zero();
    for (lo, hi, v, e) in pieces {
        total += adapt(&f, lo, hi, v, e, share, 0, opts)?;
    }
    Ok(total)
}
