//! Free massless boson side of the bosonization dictionary and the comparison
//! of decay exponents with point-split fermion bilinears.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{power_law_fit, CorrelatorSeries, WindowPolicy};
use crate::error::{contract, LabError, Result};
use crate::rng::Xoshiro256StarStar;
use crate::spinor::{mul, trace, GAMMA};
use crate::thirring::{
    homogeneity_degree, AnomalyData, Chirality, Insertion, Normalization, Point, ThirringCorrelator,
    ThirringParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BosonParams {
    pub beta: f64,
    pub ell: f64,
}

impl Default for BosonParams {
    fn default() -> Self {
        BosonParams { beta: 4.0 * PI, ell: 1.0 }
    }
}

impl BosonParams {
    pub fn new(beta: f64, ell: f64) -> Result<Self> {
        let bp = BosonParams { beta, ell };
        bp.validate()?;
        Ok(bp)
    }

    pub fn validate(&self) -> Result<()> {
        contract!(
            self.beta > 0.0 && self.beta < 16.0 * PI,
            "beta = {} outside (0, 16 pi)",
            self.beta
        );
        contract!(self.ell > 0.0 && self.ell.is_finite(), "ell must be positive, got {}", self.ell);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexCharge {
    Plus,
    Minus,
}

impl VertexCharge {
    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            1 => Ok(VertexCharge::Plus),
            -1 => Ok(VertexCharge::Minus),
            _ => Err(LabError::Contract(format!("vertex charge must be +1 or -1, got {s}"))),
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            VertexCharge::Plus => 1,
            VertexCharge::Minus => -1,
        }
    }

    /// Chirality `s` of the fermion components in `psi-bar (1 + sigma gamma5) psi`.
    pub fn bilinear_chirality(self) -> Chirality {
        match self {
            VertexCharge::Plus => Chirality::Minus,
            VertexCharge::Minus => Chirality::Plus,
        }
    }
}

fn nonzero(x: Point) -> Result<()> {
    contract!(x.is_finite(), "non-finite point {x:?}");
    if x == Point::ORIGIN {
        return Err(LabError::Singularity("boson correlator at coincident points".into()));
    }
    Ok(())
}

/// `D(x) = -(beta / 4 pi) ln(|x|^2 / ell^2)`.
pub fn boson_propagator(x: Point, bp: &BosonParams) -> Result<f64> {
    bp.validate()?;
    nonzero(x)?;
    let r2 = x.x0 * x.x0 + x.x1 * x.x1;
    Ok(-(bp.beta / (4.0 * PI)) * (r2 / (bp.ell * bp.ell)).ln())
}

/// Correlator of normal-ordered exponentials `:e^{i sigma phi}:`.
pub fn vertex_correlator(ys: &[(Point, VertexCharge)], bp: &BosonParams) -> Result<f64> {
    bp.validate()?;
    for i in 0..ys.len() {
        contract!(ys[i].0.is_finite(), "non-finite point {:?}", ys[i].0);
        for j in i + 1..ys.len() {
            if ys[i].0 == ys[j].0 {
                return Err(LabError::Singularity(format!("coincident vertex insertions at {:?}", ys[i].0)));
            }
        }
    }
    if ys.iter().map(|(_, q)| q.sign()).sum::<i32>() != 0 {
        return Ok(0.0);
    }
    let power = bp.beta / (2.0 * PI);
    let mut v = 1.0;
    for i in 0..ys.len() {
        for j in i + 1..ys.len() {
            let r = ys[i].0.dist(ys[j].0) / bp.ell;
            v *= r.powf(power * (ys[i].1.sign() * ys[j].1.sign()) as f64);
        }
    }
    Ok(v)
}

/// Decay exponent of the neutral vertex pair, `<V_+ V_-> ~ r^{-beta / 2 pi}`.
pub fn vertex_exponent(beta: f64) -> f64 {
    beta / (2.0 * PI)
}

/// `d_a d_b D(x)` in closed form.
pub fn boson_hessian(x: Point, bp: &BosonParams) -> Result<[[f64; 2]; 2]> {
    bp.validate()?;
    nonzero(x)?;
    let r2 = x.x0 * x.x0 + x.x1 * x.x1;
    let c = -bp.beta / (2.0 * PI);
    let v = [x.x0, x.x1];
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let delta = if a == b { 1.0 } else { 0.0 };
            h[a][b] = c * (delta / r2 - 2.0 * v[a] * v[b] / (r2 * r2));
        }
    }
    Ok(h)
}

const EPS2: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

/// `<J^mu_x J^nu_0>` for the boson current `-(1/sqrt pi) eps^{mu nu} d_nu phi`.
///
/// Equal to `-(1/pi) eps^{mu a} eps^{nu c} d_a d_c D(x)`: the two derivatives
/// act on different arguments of `D(x - y)`, which contributes the sign.
pub fn current_correlator_boson(x: Point, mu: usize, nu: usize, bp: &BosonParams) -> Result<f64> {
    contract!(mu < 2 && nu < 2, "direction indices must be 0 or 1, got ({mu}, {nu})");
    let h = boson_hessian(x, bp)?;
    let mut s = 0.0;
    for a in 0..2 {
        for c in 0..2 {
            s += EPS2[mu][a] * EPS2[nu][c] * h[a][c];
        }
    }
    Ok(-s / PI)
}

/// Connected `<J^mu_x J^nu_0>` of the free fermion current `psi-bar gamma^mu psi`,
/// `-Tr[gamma^mu S(x) gamma^nu S(-x)]`.
pub fn current_correlator_free_fermion(x: Point, mu: usize, nu: usize, norm: &Normalization) -> Result<f64> {
    contract!(mu < 2 && nu < 2, "direction indices must be 0 or 1, got ({mu}, {nu})");
    let corr = ThirringCorrelator::new(ThirringParams::free(), *norm)?;
    let s_fwd = corr.two_point(x)?;
    let s_back = corr.two_point(-x)?;
    let m = mul(&mul(&GAMMA[mu], &s_fwd), &mul(&GAMMA[nu], &s_back));
    let t = -trace(&m);
    if t.im.abs() > 1e-12 * t.re.abs().max(1e-300) {
        return Err(LabError::Numerical(format!("free current correlator not real: {t}")));
    }
    Ok(t.re)
}

/// Geometric grid of `n` separations from `r_min` to `r_max`.
pub fn geometric_grid(r_min: f64, r_max: f64, n: usize) -> Result<Vec<f64>> {
    contract!(r_min > 0.0 && r_max > r_min, "invalid grid range [{r_min}, {r_max}]");
    contract!(n >= 4, "a grid needs at least 4 points, got {n}");
    let q = (r_max / r_min).powf(1.0 / (n as f64 - 1.0));
    Ok((0..n).map(|k| r_min * q.powi(k as i32)).collect())
}

/// Relative split `eps / r` of the bilinears.
pub const DEFAULT_SPLIT: f64 = 1e-3;
/// Largest log-residual accepted from the exponent fit.
pub const FIT_RESIDUAL_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BilinearExponent {
    /// Decay exponent `2 kappa_F` averaged over split directions.
    pub exponent: f64,
    /// Exponents with the split along `e_0` and `e_1` separately.
    pub per_direction: [f64; 2],
    pub analytic: f64,
    pub series: CorrelatorSeries,
    pub max_residual: f64,
}

/// Short unpaired couples inside each bilinear carry `|x - y|^{-eta_{s s}}`.
fn short_couple_degree(an: &AnomalyData, s: Chirality) -> f64 {
    -(an.pair_exponent(s.sign() * s.sign()) + an.pair_exponent(s.flip().sign() * s.flip().sign()))
}

/// Exponent of `<O^sigma_x O^-sigma_0>` predicted by the scaling degree of the
/// four-point function after the split factor is removed.
pub fn bilinear_exponent_analytic(an: &AnomalyData, sigma: VertexCharge) -> f64 {
    let s = sigma.bilinear_chirality();
    let chir = [s, s.flip()];
    -(homogeneity_degree(&chir, &chir, an) - short_couple_degree(an, s))
}

fn split_bilinear_pair(
    corr: &ThirringCorrelator,
    s: Chirality,
    x: Point,
    e: Point,
    eps: f64,
) -> Result<f64> {
    let h = 0.5 * eps * e;
    let xs = [Insertion::new(x + h, s), Insertion::new(h, s.flip())];
    let ys = [Insertion::new(x - h, s), Insertion::new(-h, s.flip())];
    let v = corr.n_point(&xs, &ys)?;
    let an = &corr.anomalies;
    let short = (xs[0].point.dist(ys[0].point)).powf(-an.pair_exponent(1))
        * (xs[1].point.dist(ys[1].point)).powf(-an.pair_exponent(1));
    Ok((v / Complex64::new(short, 0.0)).norm())
}

/// Decay exponent of the point-split bilinear correlator along the `e_0` axis.
pub fn fermion_bilinear_exponent(
    params: &ThirringParams,
    sigma: VertexCharge,
    r_grid: &[f64],
) -> Result<BilinearExponent> {
    fermion_bilinear_exponent_with(params, &Normalization::default(), sigma, r_grid, DEFAULT_SPLIT)
}

pub fn fermion_bilinear_exponent_with(
    params: &ThirringParams,
    norm: &Normalization,
    sigma: VertexCharge,
    r_grid: &[f64],
    split: f64,
) -> Result<BilinearExponent> {
    contract!(split > 0.0 && split < 0.1, "relative split {split} outside (0, 0.1)");
    let corr = ThirringCorrelator::new(*params, *norm)?;
    let s = sigma.bilinear_chirality();
    let dirs = [Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
    let mut per_dir = Vec::with_capacity(2);
    for e in dirs {
        let vals = r_grid
            .iter()
            .map(|&r| split_bilinear_pair(&corr, s, Point::new(r, 0.0), e, split * r))
            .collect::<Result<Vec<f64>>>()?;
        per_dir.push(vals);
    }
    let averaged: Vec<f64> = (0..r_grid.len()).map(|k| 0.5 * (per_dir[0][k] + per_dir[1][k])).collect();
    let window = WindowPolicy::Fixed {
        r_min: r_grid.first().copied().unwrap_or(0.0),
        r_max: r_grid.last().copied().unwrap_or(0.0),
    };
    let label = format!("O^{} O^{}", sigma.sign(), -sigma.sign());
    let series = CorrelatorSeries::exact(label, r_grid.to_vec(), averaged);
    let fit = power_law_fit(&series, &window)?;
    let max_residual = r_grid
        .iter()
        .zip(&series.values)
        .map(|(r, v)| (v.ln() - fit.amplitude.abs().ln() - fit.exponent * r.ln()).abs())
        .fold(0.0, f64::max);
    if max_residual > FIT_RESIDUAL_LIMIT {
        return Err(LabError::Fit(format!(
            "bilinear correlator is not a power law: log residual {max_residual:.3e}"
        )));
    }
    let mut per_direction = [0.0; 2];
    for (k, vals) in per_dir.into_iter().enumerate() {
        let s = CorrelatorSeries::exact("split", r_grid.to_vec(), vals);
        per_direction[k] = -power_law_fit(&s, &window)?.exponent;
    }
    Ok(BilinearExponent {
        exponent: -fit.exponent,
        per_direction,
        analytic: bilinear_exponent_analytic(&corr.anomalies, sigma),
        series,
        max_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaMatch {
    pub beta: f64,
    pub bilinear_exponent: f64,
}

/// The `beta` whose vertex exponent `beta / 2 pi` equals the bilinear exponent.
pub fn match_beta(params: &ThirringParams) -> Result<BetaMatch> {
    let an = crate::thirring::compute_anomalies(params)?;
    let target = bilinear_exponent_analytic(&an, VertexCharge::Plus);
    // vertex_exponent is linear and increasing in beta: the root is unique.
    let beta = 2.0 * PI * target;
    if !(beta > 0.0 && beta < 16.0 * PI) {
        return Err(LabError::Range(format!(
            "bilinear exponent {target} has no matching beta in (0, 16 pi)"
        )));
    }
    Ok(BetaMatch {
        beta,
        bilinear_exponent: target,
    })
}

/// Symmetric-difference slope `d beta / d lambda` at the origin.
pub fn match_beta_slope(params: &ThirringParams, h: f64) -> Result<f64> {
    contract!(h > 0.0, "step must be positive, got {h}");
    let mut p = *params;
    p.lambda = h;
    let up = match_beta(&p)?.beta;
    p.lambda = -h;
    let down = match_beta(&p)?.beta;
    Ok((up - down) / (2.0 * h))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BosonizationCheck {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl BosonizationCheck {
    fn new(name: &str, max_deviation: f64, tolerance: f64) -> Self {
        BosonizationCheck {
            name: name.into(),
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BosonizationReport {
    pub params: ThirringParams,
    pub boson: BosonParams,
    pub checks: Vec<BosonizationCheck>,
    pub bilinear: BilinearExponent,
    pub beta: BetaMatch,
    pub beta_slope: f64,
    /// `<JJ>_fermion / <JJ>_boson` at `lambda = 0`, the same for every component.
    pub current_ratio: f64,
}

impl BosonizationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn random_neutral(rng: &mut Xoshiro256StarStar, pairs: usize) -> Vec<(Point, VertexCharge)> {
    let pts = crate::axioms::random_points(rng, 2 * pairs, 0.05);
    pts.into_iter()
        .enumerate()
        .map(|(k, p)| (p, if k % 2 == 0 { VertexCharge::Plus } else { VertexCharge::Minus }))
        .collect()
}

/// Dictionary checks: neutrality, Gaussian consistency, current conservation,
/// the free-fermion current shape and the bilinear exponent match.
pub fn run_bosonization_suite(
    params: &ThirringParams,
    bp: &BosonParams,
    r_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<BosonizationReport> {
    params.validate()?;
    bp.validate()?;
    let mut checks = Vec::new();

    let gaussian: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let mut rng = Xoshiro256StarStar::from_stream(seed, t as u64);
            let cfg = random_neutral(&mut rng, 1 + t % 3);
            let v = vertex_correlator(&cfg, bp)?;
            let mut exponent = 0.0;
            for i in 0..cfg.len() {
                for j in i + 1..cfg.len() {
                    let q = (cfg[i].1.sign() * cfg[j].1.sign()) as f64;
                    exponent -= q * boson_propagator(cfg[i].0 - cfg[j].0, bp)?;
                }
            }
            // exp(-sum_{i<j} q_i q_j D) with D = -(beta/2pi) ln r
            let oracle = exponent.exp();
            let mut charged = cfg.clone();
            charged[0].1 = if charged[0].1 == VertexCharge::Plus { VertexCharge::Minus } else { VertexCharge::Plus };
            let neutrality = vertex_correlator(&charged, bp)?.abs();
            Ok(((v - oracle).abs() / oracle.abs(), neutrality))
        })
        .collect::<Result<Vec<_>>>()?;
    checks.push(BosonizationCheck::new(
        "gaussian_identity",
        gaussian.iter().map(|g| g.0).fold(0.0, f64::max),
        1e-12,
    ));
    checks.push(BosonizationCheck::new(
        "neutrality",
        gaussian.iter().map(|g| g.1).fold(0.0, f64::max),
        0.0,
    ));

    let mut conservation: f64 = 0.0;
    let mut symmetry: f64 = 0.0;
    let mut ratio_spread: f64 = 0.0;
    let mut ratio = f64::NAN;
    let h = 1e-3;
    let mut rng = Xoshiro256StarStar::from_stream(seed, u64::MAX);
    for _ in 0..trials.max(1) {
        let theta = 2.0 * PI * rng.uniform();
        let r = 1.0 + 3.0 * rng.uniform();
        let x = Point::new(r * theta.cos(), r * theta.sin());
        for nu in 0..2 {
            let mut div = 0.0;
            for mu in 0..2 {
                let e = if mu == 0 { Point::new(h, 0.0) } else { Point::new(0.0, h) };
                let j = |p: Point| current_correlator_boson(p, mu, nu, bp);
                // fourth-order central difference
                div += (8.0 * (j(x + e)? - j(x - e)?) - (j(x + 2.0 * e)? - j(x - 2.0 * e)?)) / (12.0 * h);
            }
            conservation = conservation.max(div.abs());
        }
        symmetry = symmetry.max(
            (current_correlator_boson(x, 0, 1, bp)? - current_correlator_boson(x, 1, 0, bp)?).abs(),
        );
        for mu in 0..2 {
            for nu in 0..2 {
                let b = current_correlator_boson(x, mu, nu, bp)?;
                let f = current_correlator_free_fermion(x, mu, nu, &Normalization::default())?;
                if b.abs() > 1e-3 / (r * r) {
                    let q = f / b;
                    if ratio.is_nan() {
                        ratio = q;
                    }
                    ratio_spread = ratio_spread.max((q / ratio - 1.0).abs());
                }
            }
        }
    }
    checks.push(BosonizationCheck::new("current_conservation", conservation, 1e-6));
    checks.push(BosonizationCheck::new("current_symmetry", symmetry, 0.0));
    checks.push(BosonizationCheck::new("free_fermion_current_shape", ratio_spread, 1e-12));

    let bilinear = fermion_bilinear_exponent(params, VertexCharge::Plus, r_grid)?;
    checks.push(BosonizationCheck::new(
        "bilinear_exponent_vs_analytic",
        (bilinear.exponent - bilinear.analytic).abs(),
        1e-3,
    ));
    checks.push(BosonizationCheck::new(
        "bilinear_split_isotropy",
        (bilinear.per_direction[0] - bilinear.per_direction[1]).abs(),
        1e-4,
    ));
    let beta = match_beta(params)?;
    checks.push(BosonizationCheck::new(
        "vertex_vs_bilinear_exponent",
        (vertex_exponent(beta.beta) - bilinear.exponent).abs(),
        1e-3,
    ));
    let beta_slope = match_beta_slope(params, 0.1)?;

    Ok(BosonizationReport {
        params: *params,
        boson: *bp,
        checks,
        bilinear,
        beta,
        beta_slope,
        current_ratio: ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn propagator_values() {
        let bp = BosonParams::default();
        assert_eq!(boson_propagator(Point::new(1.0, 0.0), &bp).unwrap(), 0.0);
        // momentum-space integral oracle with infrared reference scale ell = 1
        let cases = [
            (E, -2.0),
            (3.0, -2.197_224_577_336_219_4),
            (0.25, 2.772_588_722_239_781_2),
        ];
        for (r, d) in cases {
            let v = boson_propagator(Point::new(0.0, r), &bp).unwrap();
            assert!((v - d).abs() < 1e-14, "{r}: {v} vs {d}");
        }
        assert!(matches!(
            boson_propagator(Point::ORIGIN, &bp),
            Err(LabError::Singularity(_))
        ));
    }

    #[test]
    fn propagator_log_additivity() {
        let bp = BosonParams::new(3.0, 0.7).unwrap();
        let x = Point::new(0.3, -1.2);
        for s in [0.5, 2.0, 10.0] {
            let d = boson_propagator(s * x, &bp).unwrap() - boson_propagator(x, &bp).unwrap();
            assert!((d + bp.beta / (2.0 * PI) * f64::ln(s)).abs() < 1e-13);
        }
    }

    #[test]
    fn vertex_values() {
        let bp = BosonParams::default();
        let p = |x, y, q| (Point::new(x, y), q);
        use VertexCharge::{Minus, Plus};
        assert_eq!(vertex_correlator(&[p(0.0, 0.0, Plus), p(1.0, 0.0, Plus)], &bp).unwrap(), 0.0);
        let v = vertex_correlator(&[p(0.0, 0.0, Plus), p(0.0, 2.5, Minus)], &bp).unwrap();
        assert!((v - 2.5f64.powi(-2)).abs() < 1e-15);
        // unit square, alternating charges: sides (1)^-2, diagonals (sqrt 2)^{+2}
        let sq = [p(0.0, 0.0, Plus), p(1.0, 0.0, Minus), p(1.0, 1.0, Plus), p(0.0, 1.0, Minus)];
        assert!((vertex_correlator(&sq, &bp).unwrap() - 4.0).abs() < 1e-12);
        assert!(VertexCharge::from_sign(0).is_err());
        assert!(BosonParams::new(16.0 * PI, 1.0).is_err());
    }

    #[test]
    fn current_matches_finite_differences() {
        let bp = BosonParams::default();
        let x = Point::new(0.6, 0.8);
        let h = 1e-4;
        let d = |p: Point| boson_propagator(p, &bp).unwrap();
        let e = [Point::new(h, 0.0), Point::new(0.0, h)];
        let mut fd = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                fd[a][b] = (d(x + e[a] + e[b]) - d(x + e[a] - e[b]) - d(x - e[a] + e[b]) + d(x - e[a] - e[b]))
                    / (4.0 * h * h);
            }
        }
        for mu in 0..2 {
            for nu in 0..2 {
                let mut expect = 0.0;
                for a in 0..2 {
                    for c in 0..2 {
                        expect -= EPS2[mu][a] * EPS2[nu][c] * fd[a][c] / PI;
                    }
                }
                let v = current_correlator_boson(x, mu, nu, &bp).unwrap();
                assert!((v - expect).abs() < 1e-6, "{mu}{nu}: {v} vs {expect}");
            }
        }
        let tr: f64 = (0..2).map(|m| current_correlator_boson(x, m, m, &bp).unwrap()).sum();
        assert!(tr.abs() < 1e-14);
    }

    #[test]
    fn current_scaling() {
        let bp = BosonParams::default();
        let x = Point::new(-0.4, 1.3);
        for (mu, nu) in [(0, 0), (0, 1), (1, 1)] {
            let a = current_correlator_boson(x, mu, nu, &bp).unwrap();
            let b = current_correlator_boson(2.0 * x, mu, nu, &bp).unwrap();
            assert!((b - a / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn free_fermion_current_is_boson_current() {
        let bp = BosonParams::default();
        let norm = Normalization::default();
        for x in [Point::new(1.0, 0.0), Point::new(0.3, 0.7), Point::new(-2.0, 1.1)] {
            for mu in 0..2 {
                for nu in 0..2 {
                    let f = current_correlator_free_fermion(x, mu, nu, &norm).unwrap();
                    let b = current_correlator_boson(x, mu, nu, &bp).unwrap();
                    // ratio 4 pi^2 / beta = pi at beta = 4 pi
                    assert!((f - PI * b).abs() < 1e-13 * (1.0 + f.abs()), "{f} vs {b}");
                }
            }
        }
    }

    #[test]
    fn free_bilinear_exponent() {
        let grid = geometric_grid(1.0, 100.0, 21).unwrap();
        for sigma in [VertexCharge::Plus, VertexCharge::Minus] {
            let b = fermion_bilinear_exponent(&ThirringParams::free(), sigma, &grid).unwrap();
            assert!((b.exponent - 2.0).abs() < 1e-3);
            assert_eq!(b.analytic, 2.0);
            assert!((b.per_direction[0] - b.per_direction[1]).abs() < 1e-4);
        }
    }

    #[test]
    fn interacting_bilinear_exponent() {
        let grid = geometric_grid(1.0, 100.0, 21).unwrap();
        for eta_plus in [0.0, 0.013] {
            let p = ThirringParams::new(0.2, 0.5).unwrap().with_eta_plus(eta_plus).unwrap();
            let an = crate::thirring::compute_anomalies(&p).unwrap();
            let b = fermion_bilinear_exponent(&p, VertexCharge::Plus, &grid).unwrap();
            assert!((b.analytic - (2.0 + 2.0 * an.eta - 2.0 * eta_plus)).abs() < 1e-15);
            assert!((b.exponent - b.analytic).abs() < 1e-3, "{} vs {}", b.exponent, b.analytic);
            assert!((b.per_direction[0] - b.per_direction[1]).abs() < 1e-4);
        }
    }

    #[test]
    fn beta_matching() {
        assert_eq!(match_beta(&ThirringParams::free()).unwrap().beta, 4.0 * PI);
        let p = ThirringParams::new(0.0, 0.5).unwrap();
        let c = match_beta_slope(&p, 0.1).unwrap();
        assert!(c.is_finite());
        let p = ThirringParams::new(0.1, 0.5).unwrap().with_eta_plus(0.004).unwrap();
        let m = match_beta(&p).unwrap();
        assert!((vertex_exponent(m.beta) - m.bilinear_exponent).abs() < 1e-14);
        let mut strong = ThirringParams::free();
        strong.lambda = 0.3;
        strong.eta_plus = 5.0;
        assert!(matches!(match_beta(&strong), Err(LabError::Range(_))));
    }

    #[test]
    fn suite_passes_free_and_interacting() {
        let grid = geometric_grid(1.0, 100.0, 11).unwrap();
        for p in [ThirringParams::free(), ThirringParams::new(0.1, 0.5).unwrap()] {
            let rep = run_bosonization_suite(&p, &BosonParams::default(), &grid, 50, 3).unwrap();
            assert!(rep.passed(), "{:#?}", rep.checks);
        }
    }
}
