//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration.

use crate::error::{contract, LabError, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    contract!((1..=512).contains(&n), "Gauss-Legendre order {n} outside [1, 512]");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    let (x, w) = gauss_legendre(n)?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(x.iter().zip(&w).map(|(x, w)| (mid + half * x, half * w)).collect())
}

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
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Result of an adaptive integration with its achieved error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Adaptive Gauss–Kronrod (7–15) integration aiming at absolute tolerance
/// `tol`; returns the best estimate and its error bound even when the
/// subdivision budget runs out.
pub fn integrate_adaptive_report(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    contract!(a.is_finite() && b.is_finite(), "non-finite integration limits [{a}, {b}]");
    contract!(tol > 0.0, "tolerance must be positive, got {tol}");
    let mut intervals = vec![(a, b, kronrod15(&mut f, a, b))];
    let mut iterations = 0;
    loop {
        let (total, err): (f64, f64) = intervals
            .iter()
            .fold((0.0, 0.0), |(s, e), (_, _, (v, ev))| (s + v, e + ev));
        if !total.is_finite() {
            return Err(LabError::Numerical("non-finite integrand".into()));
        }
        if err <= tol || iterations == 2000 {
            return Ok(Quadrature {
                value: total,
                error: err,
                converged: err <= tol,
            });
        }
        iterations += 1;
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        intervals.push((lo, mid, kronrod15(&mut f, lo, mid)));
        intervals.push((mid, hi, kronrod15(&mut f, mid, hi)));
    }
}

/// Adaptive Gauss–Kronrod integration; fails when `tol` is not reached.
pub fn integrate_adaptive(f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let q = integrate_adaptive_report(f, a, b, tol)?;
    if !q.converged {
        return Err(LabError::Numerical(format!(
            "adaptive quadrature on [{a}, {b}] reached {:.3e}, above tolerance {tol}",
            q.error
        )));
    }
    Ok(q.value)
}
