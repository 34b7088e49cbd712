//! Closed-form Schwinger functions of the massless Thirring model.
//!
//! The two-point function is off-diagonal in the chiral index,
//!
//! ```text
//! S(x) = C |x|^(-eta) [[0, 1/(x0 + i x1)], [1/(x0 - i x1), 0]]
//! ```
//!
//! with rows labelled by the chirality of `psi` and columns by the chirality of
//! `psi-bar` (index 0 is `+`, index 1 is `-`). The 2n-point functions are
//! antisymmetrized sums over pairings of products of two-point factors dressed
//! by the pair exponents `eta_-` (= `eta`) and `eta_+`.
//!
//! The anomaly coefficients follow the one-parameter regularization family
//! `nu = (lambda/2pi)(1 - xi)`, `nu_bar = -(lambda/2pi) xi`,
//! `a = 1/(1 - nu)`, `a_bar = 1/(1 - nu_bar)`, `eta = (lambda/4pi)(a - a_bar)`.
//! The coefficient `eta_+` has no closed form here; it is carried as an input.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{contract, LabError, Result};

/// Largest `n` accepted by the permutation sum in [`ThirringCorrelator::n_point`].
pub const N_MAX: usize = 8;

/// Default bound on `|lambda|`.
pub const DEFAULT_LAMBDA_MAX: f64 = 0.5;

/// A 2x2 complex matrix in chiral indices.
pub type Spinor2 = [[Complex64; 2]; 2];

pub const ZERO2: Spinor2 = [[Complex64::new(0.0, 0.0); 2]; 2];

/// Euclidean point `(x0, x1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x0: f64,
    pub x1: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x0: 0.0, x1: 0.0 };

    pub const fn new(x0: f64, x1: f64) -> Self {
        Point { x0, x1 }
    }

    pub fn norm(self) -> f64 {
        self.x0.hypot(self.x1)
    }

    pub fn is_finite(self) -> bool {
        self.x0.is_finite() && self.x1.is_finite()
    }

    /// Rotation by `theta` about the origin (counter-clockwise in the `(x0, x1)` plane).
    pub fn rotate(self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x0 - s * self.x1, s * self.x0 + c * self.x1)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x0 + o.x0, self.x1 + o.x1)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x0 - o.x0, self.x1 - o.x1)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x0, -self.x1)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, p: Point) -> Point {
        Point::new(self * p.x0, self * p.x1)
    }
}

/// Chiral component label `omega = +1 / -1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chirality {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Chirality {
    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Chirality::Plus),
            -1 => Ok(Chirality::Minus),
            _ => Err(LabError::Contract(format!("chirality must be +1 or -1, got {s}"))),
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Chirality::Plus => 1,
            Chirality::Minus => -1,
        }
    }

    /// Matrix index: `+` is 0, `-` is 1.
    pub fn index(self) -> usize {
        match self {
            Chirality::Plus => 0,
            Chirality::Minus => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Chirality::Plus => Chirality::Minus,
            Chirality::Minus => Chirality::Plus,
        }
    }

    pub const BOTH: [Chirality; 2] = [Chirality::Plus, Chirality::Minus];
}

/// A field insertion: a point together with the chiral component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Insertion {
    pub point: Point,
    pub chirality: Chirality,
}

impl Insertion {
    pub const fn new(point: Point, chirality: Chirality) -> Self {
        Insertion { point, chirality }
    }
}

/// Coupling and regularization data of the massless model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThirringParams {
    pub lambda: f64,
    /// Regularization family parameter.
    pub xi: f64,
    /// Must be zero: only the massless correlators are available in closed form.
    pub mass: f64,
    /// Same-chirality pair exponent `eta_+`.
    pub eta_plus: f64,
    pub lambda_max: f64,
}

impl Default for ThirringParams {
    fn default() -> Self {
        ThirringParams {
            lambda: 0.0,
            xi: 0.5,
            mass: 0.0,
            eta_plus: 0.0,
            lambda_max: DEFAULT_LAMBDA_MAX,
        }
    }
}

impl ThirringParams {
    pub fn new(lambda: f64, xi: f64) -> Result<Self> {
        let p = ThirringParams {
            lambda,
            xi,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn free() -> Self {
        ThirringParams::default()
    }

    pub fn with_eta_plus(mut self, eta_plus: f64) -> Result<Self> {
        self.eta_plus = eta_plus;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda_max(mut self, lambda_max: f64) -> Result<Self> {
        self.lambda_max = lambda_max;
        self.validate()?;
        Ok(self)
    }

    pub fn nu(&self) -> f64 {
        self.lambda / (2.0 * PI) * (1.0 - self.xi)
    }

    pub fn nu_bar(&self) -> f64 {
        -self.lambda / (2.0 * PI) * self.xi
    }

    pub fn validate(&self) -> Result<()> {
        contract!(
            self.lambda.is_finite() && self.xi.is_finite() && self.eta_plus.is_finite(),
            "non-finite parameters {self:?}"
        );
        contract!(
            self.lambda_max > 0.0,
            "lambda_max must be positive, got {}",
            self.lambda_max
        );
        contract!(
            self.lambda.abs() <= self.lambda_max,
            "|lambda| = {} exceeds lambda_max = {}",
            self.lambda.abs(),
            self.lambda_max
        );
        contract!(
            self.mass == 0.0,
            "massive correlators are not available (mass = {})",
            self.mass
        );
        contract!(
            self.lambda != 0.0 || self.eta_plus == 0.0,
            "eta_plus must vanish in the free theory, got {}",
            self.eta_plus
        );
        if 1.0 - self.nu() == 0.0 || 1.0 - self.nu_bar() == 0.0 {
            return Err(LabError::Pole(format!(
                "1 - nu = {} or 1 - nu_bar = {} vanishes at lambda = {}, xi = {}",
                1.0 - self.nu(),
                1.0 - self.nu_bar(),
                self.lambda,
                self.xi
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyData {
    pub nu: f64,
    pub nu_bar: f64,
    pub a: f64,
    pub a_bar: f64,
    /// Opposite-chirality pair exponent (`eta_-`), also the two-point anomalous exponent.
    pub eta: f64,
    pub eta_plus: f64,
}

impl AnomalyData {
    /// `eta_s` for `s = +1` or `-1`.
    #[inline]
    pub fn pair_exponent(&self, s: i32) -> f64 {
        if s > 0 {
            self.eta_plus
        } else {
            self.eta
        }
    }
}

/// Finite conventions for the amplitude `C` and the renormalization factors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub c: f64,
    pub zeta_j: f64,
    pub zeta_o: f64,
    pub z: f64,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization {
            c: 1.0,
            zeta_j: 1.0,
            zeta_o: 1.0,
            z: 1.0,
        }
    }
}

impl Normalization {
    pub fn validate(&self) -> Result<()> {
        contract!(self.c > 0.0, "two-point amplitude must be positive, got {}", self.c);
        contract!(
            self.zeta_j.is_finite() && self.zeta_o.is_finite() && self.z.is_finite(),
            "non-finite normalization {self:?}"
        );
        Ok(())
    }
}

pub fn compute_anomalies(params: &ThirringParams) -> Result<AnomalyData> {
    params.validate()?;
    let nu = params.nu();
    let nu_bar = params.nu_bar();
    let a = 1.0 / (1.0 - nu);
    let a_bar = 1.0 / (1.0 - nu_bar);
    let eta = params.lambda / (4.0 * PI) * (a - a_bar);
    Ok(AnomalyData {
        nu,
        nu_bar,
        a,
        a_bar,
        eta,
        eta_plus: params.eta_plus,
    })
}

/// Evaluator for the exact correlators at fixed parameters.
#[derive(Clone, Debug)]
pub struct ThirringCorrelator {
    pub params: ThirringParams,
    pub norm: Normalization,
    pub anomalies: AnomalyData,
}

fn check_points_distinct(points: &[Point]) -> Result<()> {
    for p in points {
        contract!(p.is_finite(), "non-finite point {p:?}");
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(LabError::Singularity(format!(
                    "coincident insertion points {:?}",
                    points[i]
                )));
            }
        }
    }
    Ok(())
}

impl ThirringCorrelator {
    pub fn new(params: ThirringParams, norm: Normalization) -> Result<Self> {
        norm.validate()?;
        let anomalies = compute_anomalies(&params)?;
        Ok(ThirringCorrelator {
            params,
            norm,
            anomalies,
        })
    }

    pub fn free() -> Self {
        Self::new(ThirringParams::free(), Normalization::default()).expect("free parameters are valid")
    }

    /// `<psi_x psi-bar_0>` as a 2x2 matrix; unchecked variant used in hot loops.
    #[inline]
    pub(crate) fn two_point_unchecked(&self, x: Point) -> Spinor2 {
        let r = x.norm();
        let amp = if self.anomalies.eta == 0.0 {
            self.norm.c
        } else {
            self.norm.c * r.powf(-self.anomalies.eta)
        };
        let up = Complex64::new(amp, 0.0) / Complex64::new(x.x0, x.x1);
        let down = Complex64::new(amp, 0.0) / Complex64::new(x.x0, -x.x1);
        let zero = Complex64::new(0.0, 0.0);
        [[zero, up], [down, zero]]
    }

    pub fn two_point(&self, x: Point) -> Result<Spinor2> {
        contract!(x.is_finite(), "non-finite point {x:?}");
        if x == Point::ORIGIN {
            return Err(LabError::Singularity("two-point function at coincident points".into()));
        }
        Ok(self.two_point_unchecked(x))
    }

    #[inline]
    fn pair_factor(&self, x: &Insertion, y: &Insertion) -> Complex64 {
        if x.chirality == y.chirality {
            return Complex64::new(0.0, 0.0);
        }
        self.two_point_unchecked(x.point - y.point)[x.chirality.index()][y.chirality.index()]
    }

    fn check_shape(&self, xs: &[Insertion], ys: &[Insertion]) -> Result<()> {
        contract!(
            xs.len() == ys.len(),
            "mismatched numbers of psi ({}) and psi-bar ({}) insertions",
            xs.len(),
            ys.len()
        );
        contract!(!xs.is_empty(), "at least one pair of insertions is required");
        let pts: Vec<Point> = xs.iter().chain(ys).map(|f| f.point).collect();
        check_points_distinct(&pts)
    }

    /// One pairing term: the product of pair factors `(x_j, y_j)` dressed by
    /// the inter-pair exponents. Zero when some `omega_j == sigma_j`.
    pub fn g_function(&self, xs: &[Insertion], ys: &[Insertion]) -> Result<Complex64> {
        self.check_shape(xs, ys)?;
        let n = xs.len();
        let an = &self.anomalies;
        let mut value = Complex64::new(1.0, 0.0);
        for j in 0..n {
            let f = self.pair_factor(&xs[j], &ys[j]);
            if f == Complex64::new(0.0, 0.0) {
                return Ok(f);
            }
            value *= f;
        }
        let mut log_mod = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let sx = -xs[i].chirality.sign() * xs[j].chirality.sign();
                let sy = -ys[i].chirality.sign() * ys[j].chirality.sign();
                log_mod += an.pair_exponent(sx) * xs[i].point.dist(xs[j].point).ln();
                log_mod += an.pair_exponent(sy) * ys[i].point.dist(ys[j].point).ln();
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let s = xs[i].chirality.sign() * ys[j].chirality.sign();
                    log_mod -= an.pair_exponent(s) * xs[i].point.dist(ys[j].point).ln();
                }
            }
        }
        Ok(value * log_mod.exp())
    }

    /// `<psi_{x_1} ... psi_{x_n} psi-bar_{y_1} ... psi-bar_{y_n}>`: signed sum of
    /// [`g_function`](Self::g_function) over all reorderings of the `ys`.
    pub fn n_point(&self, xs: &[Insertion], ys: &[Insertion]) -> Result<Complex64> {
        self.check_shape(xs, ys)?;
        let n = xs.len();
        if n > N_MAX {
            return Err(LabError::Range(format!(
                "n = {n} exceeds the permutation-sum limit {N_MAX}"
            )));
        }
        let an = &self.anomalies;

        // Pair tables: two-point factor and log-distance weight for every (x_i, y_k).
        let mut pair = vec![Complex64::new(0.0, 0.0); n * n];
        let mut log_xy = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                pair[i * n + k] = self.pair_factor(&xs[i], &ys[k]);
                let s = xs[i].chirality.sign() * ys[k].chirality.sign();
                log_xy[i * n + k] = an.pair_exponent(s) * xs[i].point.dist(ys[k].point).ln();
            }
        }
        // The x-x and y-y products are invariant under reordering of the ys.
        let mut log_same = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let sx = -xs[i].chirality.sign() * xs[j].chirality.sign();
                let sy = -ys[i].chirality.sign() * ys[j].chirality.sign();
                log_same += an.pair_exponent(sx) * xs[i].point.dist(xs[j].point).ln();
                log_same += an.pair_exponent(sy) * ys[i].point.dist(ys[j].point).ln();
            }
        }

        let mut total = Complex64::new(0.0, 0.0);
        for_each_permutation(n, |perm, sign| {
            let mut prod = Complex64::new(1.0, 0.0);
            for (j, &k) in perm.iter().enumerate() {
                let f = pair[j * n + k];
                if f == Complex64::new(0.0, 0.0) {
                    return;
                }
                prod *= f;
            }
            let mut log_den = 0.0;
            for i in 0..n {
                for (j, &k) in perm.iter().enumerate() {
                    if i != j {
                        log_den += log_xy[i * n + k];
                    }
                }
            }
            let term = prod * (log_same - log_den).exp();
            if sign > 0 {
                total += term;
            } else {
                total -= term;
            }
        });
        Ok(total)
    }

    /// Determinant of the matrix of free two-point entries; only defined at `lambda = 0`.
    pub fn wick_determinant(&self, xs: &[Insertion], ys: &[Insertion]) -> Result<Complex64> {
        contract!(
            self.params.lambda == 0.0,
            "Wick determinant requires the free theory, lambda = {}",
            self.params.lambda
        );
        self.check_shape(xs, ys)?;
        let n = xs.len();
        let m = DMatrix::from_fn(n, n, |i, j| self.pair_factor(&xs[i], &ys[j]));
        Ok(m.determinant())
    }

    pub fn homogeneity_degree(&self, omegas: &[Chirality], sigmas: &[Chirality]) -> f64 {
        homogeneity_degree(omegas, sigmas, &self.anomalies)
    }
}

/// Scaling degree `d` such that `n_point(s xs, s ys) = s^d n_point(xs, ys)`.
///
/// Every non-vanishing pairing contributes `-n(1 + eta)` from the two-point
/// factors, the x-x and y-y exponents, and minus the x-y exponents of all
/// unpaired (x, y) couples. Paired couples always have opposite chirality, so
/// the unpaired sum equals the full x-y sum minus `n * eta`, independently of
/// the pairing. When the given order already pairs opposite chiralities this
/// is the same as subtracting `sum_{i != j} eta_{omega_i sigma_j}`.
pub fn homogeneity_degree(omegas: &[Chirality], sigmas: &[Chirality], an: &AnomalyData) -> f64 {
    let n = omegas.len().min(sigmas.len());
    let mut d = -(n as f64) * (1.0 + an.eta);
    for i in 0..n {
        for j in i + 1..n {
            d += an.pair_exponent(-omegas[i].sign() * omegas[j].sign());
            d += an.pair_exponent(-sigmas[i].sign() * sigmas[j].sign());
        }
    }
    let mut cross = 0.0;
    for w in &omegas[..n] {
        for s in &sigmas[..n] {
            cross += an.pair_exponent(w.sign() * s.sign());
        }
    }
    d - cross + n as f64 * an.eta
}

/// Whether some reordering pairs every `omega_j` with an opposite `sigma`.
pub fn chirality_balanced(omegas: &[Chirality], sigmas: &[Chirality]) -> bool {
    let plus_x = omegas.iter().filter(|c| **c == Chirality::Plus).count();
    let minus_y = sigmas.iter().filter(|c| **c == Chirality::Minus).count();
    omegas.len() == sigmas.len() && plus_x == minus_y
}

/// Heap's algorithm; `f` receives each permutation with its signature.
pub(crate) fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize], i32)) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1;
    f(&perm, sign);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            f(&perm, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

pub fn two_point(x: Point, params: &ThirringParams, norm: &Normalization) -> Result<Spinor2> {
    ThirringCorrelator::new(*params, *norm)?.two_point(x)
}

pub fn g_function(
    xs: &[Insertion],
    ys: &[Insertion],
    params: &ThirringParams,
    norm: &Normalization,
) -> Result<Complex64> {
    ThirringCorrelator::new(*params, *norm)?.g_function(xs, ys)
}

pub fn n_point(
    xs: &[Insertion],
    ys: &[Insertion],
    params: &ThirringParams,
    norm: &Normalization,
) -> Result<Complex64> {
    ThirringCorrelator::new(*params, *norm)?.n_point(xs, ys)
}

pub fn wick_determinant(
    xs: &[Insertion],
    ys: &[Insertion],
    params: &ThirringParams,
    norm: &Normalization,
) -> Result<Complex64> {
    ThirringCorrelator::new(*params, *norm)?.wick_determinant(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ins(x0: f64, x1: f64, s: i32) -> Insertion {
        Insertion::new(Point::new(x0, x1), Chirality::from_sign(s).unwrap())
    }

    #[test]
    fn free_anomalies() {
        for xi in [-1.0, 0.0, 0.5, 1.0, 3.0] {
            let an = compute_anomalies(&ThirringParams::new(0.0, xi).unwrap()).unwrap();
            assert_eq!(
                (an.nu, an.nu_bar, an.a, an.a_bar, an.eta, an.eta_plus),
                (0.0, 0.0, 1.0, 1.0, 0.0, 0.0)
            );
        }
    }

    #[test]
    fn anomalies_at_lambda_0_2() {
        let an = compute_anomalies(&ThirringParams::new(0.2, 0.5).unwrap()).unwrap();
        // mpmath reference (tests/oracles/schwinger_mpmath.py)
        assert_relative_eq!(an.nu, 0.015915494309189533577, max_relative = 1e-14);
        assert_relative_eq!(an.nu_bar, -0.015915494309189533577, max_relative = 1e-14);
        assert_relative_eq!(an.a, 1.0161728939101801315, max_relative = 1e-14);
        assert_relative_eq!(an.a_bar, 0.98433384036532302264, max_relative = 1e-14);
        assert_relative_eq!(an.eta, 0.00050673427550315416238, max_relative = 1e-12);
    }

    #[test]
    fn xi_one_makes_only_axial_anomalous() {
        let an = compute_anomalies(&ThirringParams::new(0.3, 1.0).unwrap()).unwrap();
        assert_eq!(an.nu, 0.0);
        assert_relative_eq!(an.nu_bar, -0.3 / (2.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn pole_is_reported() {
        // nu = 1 at lambda = 2 pi / (1 - xi)
        let p = ThirringParams {
            lambda: 0.4,
            xi: 1.0 - 2.0 * PI / 0.4,
            ..Default::default()
        };
        assert!(matches!(compute_anomalies(&p), Err(LabError::Pole(_))));
    }

    #[test]
    fn parameter_contracts() {
        assert!(ThirringParams::new(0.6, 0.5).is_err());
        assert!(ThirringParams::new(0.6, 0.5).is_err());
        assert!(ThirringParams::free().with_eta_plus(0.1).is_err());
        let massive = ThirringParams {
            mass: 1.0,
            ..Default::default()
        };
        assert!(massive.validate().is_err());
    }

    #[test]
    fn free_two_point_on_axes() {
        let c = ThirringCorrelator::free();
        let s = c.two_point(Point::new(1.0, 0.0)).unwrap();
        assert_eq!(s[0][1], Complex64::new(1.0, 0.0));
        assert_eq!(s[1][0], Complex64::new(1.0, 0.0));
        assert_eq!(s[0][0], Complex64::new(0.0, 0.0));
        let s = c.two_point(Point::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(s[0][1].im, -1.0);
        assert_relative_eq!(s[1][0].im, 1.0);
        assert!(matches!(c.two_point(Point::ORIGIN), Err(LabError::Singularity(_))));
    }

    #[test]
    fn interacting_two_point_value() {
        let c = ThirringCorrelator::new(ThirringParams::new(0.2, 0.5).unwrap(), Normalization::default())
            .unwrap();
        let s = c.two_point(Point::new(2.0, 0.0)).unwrap();
        assert_relative_eq!(s[0][1].re, 0.49982441012184650001, max_relative = 1e-13);
    }

    #[test]
    fn g_function_matches_arbitrary_precision() {
        let xs = [ins(0.3, -0.2, 1), ins(1.1, 0.7, -1)];
        let ys = [ins(-0.5, 0.4, -1), ins(0.9, -0.8, 1)];
        let p = ThirringParams::new(0.2, 0.5).unwrap();
        let c = ThirringCorrelator::new(p, Normalization::default()).unwrap();
        let g = c.g_function(&xs, &ys).unwrap();
        assert_relative_eq!(g.re, -0.32307627499161342296, max_relative = 1e-12);
        assert_relative_eq!(g.im, 0.57629822025531043015, max_relative = 1e-12);

        let c2 = ThirringCorrelator::new(p.with_eta_plus(0.013).unwrap(), Normalization::default()).unwrap();
        let g = c2.g_function(&xs, &ys).unwrap();
        assert_relative_eq!(g.re, -0.32507592909489326895, max_relative = 1e-12);
        assert_relative_eq!(g.im, 0.57986517081791772299, max_relative = 1e-12);
    }

    #[test]
    fn n_point_matches_arbitrary_precision() {
        let p = ThirringParams::new(0.2, 0.5).unwrap().with_eta_plus(0.013).unwrap();
        let c = ThirringCorrelator::new(p, Normalization::default()).unwrap();
        let xs = [ins(0.3, -0.2, 1), ins(1.1, 0.7, 1)];
        let ys = [ins(-0.5, 0.4, -1), ins(0.9, -0.8, -1)];
        let v = c.n_point(&xs, &ys).unwrap();
        assert_relative_eq!(v.re, 1.0603988092871063775, max_relative = 1e-12);
        assert_relative_eq!(v.im, -0.062812610449367046161, max_relative = 1e-11);
    }

    #[test]
    fn one_pair_reduces_to_two_point() {
        let p = ThirringParams::new(0.3, 0.2).unwrap();
        let c = ThirringCorrelator::new(p, Normalization::default()).unwrap();
        let x = ins(0.7, -1.3, -1);
        let y = ins(-0.2, 0.4, 1);
        let s = c.two_point(x.point - y.point).unwrap()[1][0];
        assert_eq!(c.g_function(&[x], &[y]).unwrap(), s);
        assert_eq!(c.n_point(&[x], &[y]).unwrap(), s);
    }

    #[test]
    fn same_chirality_pair_vanishes() {
        let c = ThirringCorrelator::free();
        let v = c.n_point(&[ins(1.0, 0.0, 1)], &[ins(0.0, 0.0, 1)]).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn contracts_on_shapes() {
        let c = ThirringCorrelator::free();
        assert!(matches!(
            c.n_point(&[ins(1.0, 0.0, 1)], &[]),
            Err(LabError::Contract(_))
        ));
        assert!(matches!(
            c.n_point(&[ins(1.0, 0.0, 1)], &[ins(1.0, 0.0, -1)]),
            Err(LabError::Singularity(_))
        ));
        let xs: Vec<_> = (0..9).map(|i| ins(i as f64, 1.0, 1)).collect();
        let ys: Vec<_> = (0..9).map(|i| ins(i as f64, -1.0, -1)).collect();
        assert!(matches!(c.n_point(&xs, &ys), Err(LabError::Range(_))));
        let ci = ThirringCorrelator::new(ThirringParams::new(0.1, 0.5).unwrap(), Normalization::default())
            .unwrap();
        assert!(matches!(
            ci.wick_determinant(&[ins(1.0, 0.0, 1)], &[ins(0.0, 0.0, -1)]),
            Err(LabError::Contract(_))
        ));
    }

    #[test]
    fn two_by_two_wick() {
        let c = ThirringCorrelator::free();
        let xs = [ins(0.3, -0.2, 1), ins(1.1, 0.7, -1)];
        let ys = [ins(-0.5, 0.4, -1), ins(0.9, -0.8, 1)];
        let m = |i: usize, j: usize| c.pair_factor(&xs[i], &ys[j]);
        let expected = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        let got = c.wick_determinant(&xs, &ys).unwrap();
        assert_relative_eq!((got - expected).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn homogeneity_simple_cases() {
        let an = compute_anomalies(&ThirringParams::new(0.2, 0.5).unwrap()).unwrap();
        assert_eq!(
            homogeneity_degree(&[Chirality::Plus], &[Chirality::Minus], &an),
            -(1.0 + an.eta)
        );
        let free = compute_anomalies(&ThirringParams::free()).unwrap();
        let w = [Chirality::Plus, Chirality::Minus, Chirality::Plus];
        let s = [Chirality::Minus, Chirality::Plus, Chirality::Minus];
        assert_eq!(homogeneity_degree(&w, &s, &free), -3.0);
    }

    #[test]
    fn heap_permutations_signs() {
        let mut seen = Vec::new();
        for_each_permutation(4, |p, s| {
            let mut inv = 0;
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            assert_eq!(s, if inv % 2 == 0 { 1 } else { -1 });
            seen.push(p.to_vec());
        });
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 24);
    }
}
