//! Ward–Takahashi identities of the vector and axial currents, tested with
//! point-split currents and smeared divergences.
//!
//! The current `J^mu_z = psi-bar Gamma psi` (`Gamma = gamma^mu` or
//! `gamma5 gamma^mu`) is split symmetrically, `psi-bar` at `z - eps e / 2` and
//! `psi` at `z + eps e / 2`, averaged over `e` in `{±e0, ±e1}`, and multiplied by
//! `eps^eta`: the ratio of the free to the interacting split two-point
//! amplitude, which removes the divergent scalar factor.
//!
//! In the free theory the connected function is `T^mu = S(x - z) Gamma S(z - y)`
//! and its divergence is
//!
//! ```text
//! d_mu T^mu           = 2 pi C [delta(z - y) - delta(z - x)] S(x - y)
//! d_mu T^mu (axial)   = 2 pi C [delta(z - x) - delta(z - y)] gamma5 S(x - y)
//! ```
//!
//! The contact coefficients are reported in units of these free values.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{contract, LabError, Result};
use crate::quadrature::gauss_legendre_on;
use crate::spinor::{add, axial_gamma, max_abs, max_abs_diff, mul, scale, GAMMA, GAMMA5};
use crate::thirring::{
    Chirality, Insertion, Normalization, Point, Spinor2, ThirringCorrelator, ThirringParams, ZERO2,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Vector,
    Axial,
}

impl Channel {
    pub fn gamma(self, mu: usize) -> Spinor2 {
        match self {
            Channel::Vector => GAMMA[mu],
            Channel::Axial => axial_gamma(mu),
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vector" => Ok(Channel::Vector),
            "axial" => Ok(Channel::Axial),
            _ => Err(LabError::Contract(format!("unknown channel {s:?}"))),
        }
    }
}

/// Polynomial bump `N (1 - |z - c|^2 / R^2)^p`, normalized to unit integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: Point,
    pub radius: f64,
    pub degree: u32,
}

impl TestFunction {
    pub fn new(center: Point, radius: f64, degree: u32) -> Result<Self> {
        contract!(radius > 0.0 && radius.is_finite(), "bump radius must be positive, got {radius}");
        contract!(degree >= 2, "bump degree must be at least 2, got {degree}");
        contract!(center.is_finite(), "non-finite bump center {center:?}");
        Ok(TestFunction { center, radius, degree })
    }

    fn amplitude(&self) -> f64 {
        (self.degree as f64 + 1.0) / (PI * self.radius * self.radius)
    }

    pub fn value(&self, z: Point) -> f64 {
        let u = 1.0 - (z - self.center).norm().powi(2) / (self.radius * self.radius);
        if u <= 0.0 {
            0.0
        } else {
            self.amplitude() * u.powi(self.degree as i32)
        }
    }

    pub fn gradient(&self, z: Point) -> [f64; 2] {
        let d = z - self.center;
        let r2 = self.radius * self.radius;
        let u = 1.0 - d.norm().powi(2) / r2;
        if u <= 0.0 {
            return [0.0, 0.0];
        }
        let g = -2.0 * self.degree as f64 * self.amplitude() * u.powi(self.degree as i32 - 1) / r2;
        [g * d.x0, g * d.x1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre order in both polar coordinates.
    pub order: usize,
    /// Bump radius as a fraction of `|x - y|`.
    pub radius_fraction: f64,
    /// Split `eps` relative to the distance to the nearest insertion.
    pub eps_rel: f64,
    pub degree: u32,
    /// Largest relative change tolerated when the order is raised by 8.
    pub convergence_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 16,
            radius_fraction: 0.25,
            eps_rel: 1e-3,
            degree: 4,
            convergence_tol: 1e-4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        contract!(self.order >= 4, "quadrature order must be at least 4, got {}", self.order);
        contract!(
            self.radius_fraction > 0.0 && self.radius_fraction < 0.5,
            "radius fraction {} outside (0, 0.5)",
            self.radius_fraction
        );
        contract!(
            self.eps_rel > 0.0 && self.eps_rel <= 0.1,
            "relative split {} outside (0, 0.1]",
            self.eps_rel
        );
        contract!(self.degree >= 2, "bump degree must be at least 2");
        contract!(self.convergence_tol > 0.0, "convergence tolerance must be positive");
        Ok(())
    }
}

/// Largest `eps / min-distance` accepted by [`split_current_3pt`].
pub const MAX_SPLIT_RATIO: f64 = 0.1;

fn split_directions() -> [Point; 4] {
    [
        Point::new(1.0, 0.0),
        Point::new(-1.0, 0.0),
        Point::new(0.0, 1.0),
        Point::new(0.0, -1.0),
    ]
}

fn min_distance(z: Point, x: Point, y: Point) -> f64 {
    z.dist(x).min(z.dist(y)).min(x.dist(y))
}

/// Point-split `<J^mu_z psi_x psi-bar_y>` as a matrix in the chiral indices of
/// `psi_x` (rows) and `psi-bar_y` (columns).
pub fn split_current_3pt_with(
    corr: &ThirringCorrelator,
    z: Point,
    x: Point,
    y: Point,
    eps: f64,
    channel: Channel,
    mu: usize,
) -> Result<Spinor2> {
    contract!(mu < 2, "direction index must be 0 or 1, got {mu}");
    let d = min_distance(z, x, y);
    contract!(d > 0.0, "insertion points must be pairwise distinct");
    contract!(
        eps > 0.0 && eps <= MAX_SPLIT_RATIO * d,
        "split {eps} too large for minimum separation {d}"
    );
    let gamma = channel.gamma(mu);
    let mut out = ZERO2;
    let dirs = split_directions();
    for e in dirs {
        let zp = z + 0.5 * eps * e;
        let zm = z - 0.5 * eps * e;
        for (ai, a) in Chirality::BOTH.into_iter().enumerate() {
            for (bi, b) in Chirality::BOTH.into_iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (al, alpha) in Chirality::BOTH.into_iter().enumerate() {
                    for (be, beta) in Chirality::BOTH.into_iter().enumerate() {
                        let g = gamma[al][be];
                        if g == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        // psi-bar_alpha psi_beta psi_a psi-bar_b = -(psi_beta psi-bar_alpha)(psi_a psi-bar_b)
                        let v = corr.n_point(
                            &[Insertion::new(zp, beta), Insertion::new(x, a)],
                            &[Insertion::new(zm, alpha), Insertion::new(y, b)],
                        )?;
                        acc -= g * v;
                    }
                }
                out[ai][bi] += acc;
            }
        }
    }
    let factor = eps.powf(corr.anomalies.eta) / dirs.len() as f64;
    Ok(scale(&out, factor.into()))
}

pub fn split_current_3pt(
    z: Point,
    x: Point,
    y: Point,
    eps: f64,
    channel: Channel,
    mu: usize,
    params: &ThirringParams,
    norm: &Normalization,
) -> Result<Spinor2> {
    let corr = ThirringCorrelator::new(*params, *norm)?;
    split_current_3pt_with(&corr, z, x, y, eps, channel, mu)
}

/// Free connected contraction `S(x - z) Gamma S(z - y)`.
pub fn free_three_point(z: Point, x: Point, y: Point, channel: Channel, mu: usize, norm: &Normalization) -> Result<Spinor2> {
    contract!(mu < 2, "direction index must be 0 or 1, got {mu}");
    let corr = ThirringCorrelator::new(ThirringParams::free(), *norm)?;
    let left = corr.two_point(x - z)?;
    let right = corr.two_point(z - y)?;
    Ok(mul(&mul(&left, &channel.gamma(mu)), &right))
}

/// `int f(z) d_mu T^mu(z) dz`, computed as `-int d_mu f T^mu` on a polar
/// Gauss–Legendre grid centred on the bump.
pub fn smeared_divergence(
    corr: &ThirringCorrelator,
    f: &TestFunction,
    x: Point,
    y: Point,
    channel: Channel,
    spec: &QuadratureSpec,
    order: usize,
) -> Result<Spinor2> {
    spec.validate()?;
    let radial = gauss_legendre_on(order, 0.0, f.radius)?;
    let angular = gauss_legendre_on(order, 0.0, 2.0 * PI)?;
    let mut total = ZERO2;
    for &(rho, wr) in &radial {
        for &(theta, wt) in &angular {
            let z = f.center + Point::new(rho * theta.cos(), rho * theta.sin());
            let grad = f.gradient(z);
            let eps = spec.eps_rel * min_distance(z, x, y);
            for mu in 0..2 {
                if grad[mu] == 0.0 {
                    continue;
                }
                let t = split_current_3pt_with(corr, z, x, y, eps, channel, mu)?;
                total = add(&total, &scale(&t, (-grad[mu] * rho * wr * wt).into()));
            }
        }
    }
    Ok(total)
}

/// Projection coefficient `c` minimizing `|w - c m|`.
fn project(w: &Spinor2, m: &Spinor2) -> f64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            num += m[i][j].conj() * w[i][j];
            den += m[i][j].norm_sqr();
        }
    }
    (num / den).re
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactEstimate {
    pub channel: Channel,
    /// Mean of the two contact estimates.
    pub coefficient: f64,
    pub at_x: f64,
    pub at_y: f64,
    /// Change of the estimate when the quadrature order is raised by 8.
    pub quadrature_change: f64,
    /// Relative size of the part of the smeared divergence not proportional
    /// to the expected matrix structure.
    pub structure_residual: f64,
}

fn contact_at(
    corr: &ThirringCorrelator,
    center: Point,
    x: Point,
    y: Point,
    channel: Channel,
    spec: &QuadratureSpec,
    order: usize,
) -> Result<(f64, f64)> {
    let r = spec.radius_fraction * x.dist(y);
    let f = TestFunction::new(center, r, spec.degree)?;
    let w = smeared_divergence(corr, &f, x, y, channel, spec, order)?;
    let s = corr.two_point(x - y)?;
    let unit = match channel {
        Channel::Vector => scale(&s, (2.0 * PI * corr.norm.c * f.value(center)).into()),
        Channel::Axial => scale(&mul(&GAMMA5, &s), (2.0 * PI * corr.norm.c * f.value(center)).into()),
    };
    let c = project(&w, &unit);
    let residual = max_abs_diff(&w, &scale(&unit, c.into())) / max_abs(&w).max(f64::MIN_POSITIVE);
    Ok((c, residual))
}

/// Contact coefficients `a` (vector) or `a_bar` (axial) in units of the free values.
pub fn extract_contact_coefficients(
    x: Point,
    y: Point,
    channel: Channel,
    params: &ThirringParams,
    norm: &Normalization,
    spec: &QuadratureSpec,
) -> Result<ContactEstimate> {
    spec.validate()?;
    contract!(x.dist(y) >= 1.0, "contacts must be well separated, |x - y| = {}", x.dist(y));
    let corr = ThirringCorrelator::new(*params, *norm)?;
    let sign_x = match channel {
        Channel::Vector => -1.0,
        Channel::Axial => 1.0,
    };
    let estimate = |order: usize| -> Result<(f64, f64, f64)> {
        let (cx, rx) = contact_at(&corr, x, x, y, channel, spec, order)?;
        let (cy, ry) = contact_at(&corr, y, x, y, channel, spec, order)?;
        Ok((sign_x * cx, -sign_x * cy, rx.max(ry)))
    };
    let (at_x, at_y, structure_residual) = estimate(spec.order)?;
    let (hx, hy, _) = estimate(spec.order + 8)?;
    let coefficient = 0.5 * (at_x + at_y);
    let quadrature_change = (0.5 * (hx + hy) - coefficient).abs();
    if quadrature_change > spec.convergence_tol * coefficient.abs().max(1.0) {
        return Err(LabError::Numerical(format!(
            "contact quadrature not converged: change {quadrature_change:.3e} at order {}",
            spec.order + 8
        )));
    }
    Ok(ContactEstimate {
        channel,
        coefficient,
        at_x,
        at_y,
        quadrature_change,
        structure_residual,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WtiCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WtiReport {
    pub params: ThirringParams,
    pub x: Point,
    pub y: Point,
    pub split_normalization: String,
    pub vector: ContactEstimate,
    pub axial: ContactEstimate,
    pub a_reference: f64,
    pub a_bar_reference: f64,
    pub tolerance: f64,
    pub checks: Vec<WtiCheck>,
}

impl WtiReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Tolerance on the contact coefficients: tight in the free theory, loose
/// otherwise because split regularization only approximates the reference scheme.
pub fn contact_tolerance(params: &ThirringParams) -> f64 {
    if params.lambda == 0.0 {
        1e-2
    } else {
        5e-2
    }
}

/// Contact coefficients for both channels, plus conservation away from the
/// contacts and the antisymmetry of the two contacts.
pub fn run_wti_suite(
    x: Point,
    y: Point,
    params: &ThirringParams,
    norm: &Normalization,
    spec: &QuadratureSpec,
) -> Result<WtiReport> {
    let an = crate::thirring::compute_anomalies(params)?;
    let corr = ThirringCorrelator::new(*params, *norm)?;
    let vector = extract_contact_coefficients(x, y, Channel::Vector, params, norm, spec)?;
    let axial = extract_contact_coefficients(x, y, Channel::Axial, params, norm, spec)?;
    let tol = contact_tolerance(params);
    let mut checks = vec![
        WtiCheck {
            name: "vector_contact".into(),
            value: (vector.coefficient - an.a).abs(),
            tolerance: tol,
            passed: (vector.coefficient - an.a).abs() <= tol,
        },
        WtiCheck {
            name: "axial_contact".into(),
            value: (axial.coefficient - an.a_bar).abs(),
            tolerance: tol,
            passed: (axial.coefficient - an.a_bar).abs() <= tol,
        },
    ];
    if params.lambda == 0.0 {
        // bump centred off the x-y axis, clear of both contacts
        let d = y - x;
        let mid = x + 0.5 * d + Point::new(-d.x1, d.x0);
        let f = TestFunction::new(mid, spec.radius_fraction * d.norm(), spec.degree)?;
        let mut away: f64 = 0.0;
        for ch in [Channel::Vector, Channel::Axial] {
            let w = smeared_divergence(&corr, &f, x, y, ch, spec, spec.order)?;
            away = away.max(max_abs(&w));
        }
        checks.push(WtiCheck {
            name: "conservation_away_from_contacts".into(),
            value: away,
            tolerance: 1e-4,
            passed: away <= 1e-4,
        });
        let asym = (vector.at_x - vector.at_y).abs().max((axial.at_x - axial.at_y).abs());
        checks.push(WtiCheck {
            name: "contact_antisymmetry".into(),
            value: asym,
            tolerance: 1e-6,
            passed: asym <= 1e-6,
        });
    }
    Ok(WtiReport {
        params: *params,
        x,
        y,
        split_normalization: "eps^eta (free over interacting split amplitude)".into(),
        a_reference: an.a,
        a_bar_reference: an.a_bar,
        tolerance: tol,
        vector,
        axial,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> (Point, Point, Point) {
        (Point::new(0.4, 0.9), Point::new(0.0, 0.0), Point::new(1.5, -0.3))
    }

    #[test]
    fn bump_is_normalized() {
        let f = TestFunction::new(Point::new(0.3, -0.2), 0.7, 4).unwrap();
        let mut total = 0.0;
        for (rho, wr) in gauss_legendre_on(20, 0.0, 0.7).unwrap() {
            for (th, wt) in gauss_legendre_on(20, 0.0, 2.0 * PI).unwrap() {
                total += wr * wt * rho * f.value(f.center + Point::new(rho * th.cos(), rho * th.sin()));
            }
        }
        assert!((total - 1.0).abs() < 1e-13);
        assert_eq!(f.value(Point::new(5.0, 5.0)), 0.0);
    }

    #[test]
    fn free_split_current_matches_wick() {
        let (z, x, y) = pts();
        let norm = Normalization::default();
        let corr = ThirringCorrelator::free();
        let d = min_distance(z, x, y);
        for ch in [Channel::Vector, Channel::Axial] {
            for mu in 0..2 {
                let t = split_current_3pt_with(&corr, z, x, y, 1e-4 * d, ch, mu).unwrap();
                let w = free_three_point(z, x, y, ch, mu, &norm).unwrap();
                assert!(max_abs_diff(&t, &w) < 1e-6 * max_abs(&w), "{ch:?} {mu}");
            }
        }
    }

    #[test]
    fn axial_is_gamma5_times_vector_in_free_theory() {
        let (z, x, y) = pts();
        let corr = ThirringCorrelator::free();
        for mu in 0..2 {
            let v = split_current_3pt_with(&corr, z, x, y, 1e-4, Channel::Vector, mu).unwrap();
            let a = split_current_3pt_with(&corr, z, x, y, 1e-4, Channel::Axial, mu).unwrap();
            let expect = scale(&mul(&GAMMA5, &v), (-1.0).into());
            // the split tadpole cancels between ±e only up to rounding of its 1/eps size
            assert!(max_abs_diff(&a, &expect) < 1e-9 * max_abs(&a));
        }
    }

    #[test]
    fn split_is_stable() {
        let (z, x, y) = pts();
        let p = ThirringParams::new(0.2, 0.5).unwrap();
        let corr = ThirringCorrelator::new(p, Normalization::default()).unwrap();
        for ch in [Channel::Vector, Channel::Axial] {
            let a = split_current_3pt_with(&corr, z, x, y, 1e-3, ch, 0).unwrap();
            let b = split_current_3pt_with(&corr, z, x, y, 5e-4, ch, 0).unwrap();
            assert!(max_abs_diff(&a, &b) <= 1e-4 * max_abs(&a));
        }
    }

    #[test]
    fn split_contract() {
        let (z, x, y) = pts();
        let p = ThirringParams::free();
        let n = Normalization::default();
        assert!(matches!(
            split_current_3pt(z, x, y, 0.5, Channel::Vector, 0, &p, &n),
            Err(LabError::Contract(_))
        ));
    }

    #[test]
    fn free_contacts_are_one() {
        let x = Point::new(0.0, 0.0);
        let y = Point::new(1.3, 0.4);
        let rep = run_wti_suite(x, y, &ThirringParams::free(), &Normalization::default(), &QuadratureSpec::default()).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        assert!((rep.vector.coefficient - 1.0).abs() < 1e-6);
        assert!((rep.axial.coefficient - 1.0).abs() < 1e-6);
    }

    #[test]
    fn contact_requires_separation() {
        let r = extract_contact_coefficients(
            Point::ORIGIN,
            Point::new(0.5, 0.0),
            Channel::Vector,
            &ThirringParams::free(),
            &Normalization::default(),
            &QuadratureSpec::default(),
        );
        assert!(matches!(r, Err(LabError::Contract(_))));
    }
}
