//! Infinite-volume free energy of the nearest-neighbour Ising model and the
//! numerical location of its critical coupling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::quadrature::integrate_adaptive_report;

/// Absolute tolerance of the free-energy quadrature.
pub const ONSAGER_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnsagerFreeEnergy {
    pub beta_j: f64,
    /// `lim ln Z / N`.
    pub log_z_density: f64,
    /// Free energy per site in units of `J`, `-(ln Z / N) / betaJ`.
    pub free_energy: f64,
    pub error_bound: f64,
    pub warnings: Vec<String>,
}

/// `ln Z / N = ln 2 + (1/2pi) int_0^pi ln[(A + sqrt(A^2 - b^2)) / 2] dtheta`
/// with `A = cosh^2 2K - sinh 2K cos theta`, `b = sinh 2K`.
pub fn onsager_free_energy_density(beta_j: f64) -> Result<OnsagerFreeEnergy> {
    contract!(beta_j > 0.0 && beta_j.is_finite(), "betaJ must be positive and finite, got {beta_j}");
    let k2 = 2.0 * beta_j;
    let (s, c) = (k2.sinh(), k2.cosh());
    let integrand = |theta: f64| {
        let a = c * c - s * theta.cos();
        // A^2 - b^2 = (A - b)(A + b), written to avoid cancellation near theta = 0
        let a_minus_b = (c * c - 2.0 * s) + s * (1.0 - theta.cos());
        let root = (a_minus_b * (a + s)).max(0.0).sqrt();
        (0.5 * (a + root)).ln()
    };
    let q = integrate_adaptive_report(integrand, 0.0, PI, ONSAGER_TOL)?;
    let log_z_density = std::f64::consts::LN_2 + q.value / (2.0 * PI);
    let mut warnings = Vec::new();
    if !q.converged {
        warnings.push(format!("reduced accuracy: quadrature error bound {:.3e}", q.error));
    }
    Ok(OnsagerFreeEnergy {
        beta_j,
        log_z_density,
        free_energy: -log_z_density / beta_j,
        error_bound: q.error / (2.0 * PI),
        warnings,
    })
}

/// `K^2 d^2(ln Z / N)/dK^2` by a central second difference of step `h`.
pub fn specific_heat(beta_j: f64, h: f64) -> Result<f64> {
    contract!(h > 0.0 && h < beta_j, "finite-difference step {h} must lie in (0, betaJ)");
    let f = |k: f64| onsager_free_energy_density(k).map(|r| r.log_z_density);
    let d2 = (f(beta_j + h)? - 2.0 * f(beta_j)? + f(beta_j - h)?) / (h * h);
    Ok(beta_j * beta_j * d2)
}

/// `(1/2) ln(1 + sqrt 2)`, the self-dual coupling, used only as a cross-check.
pub fn self_dual_coupling() -> f64 {
    0.5 * (1.0 + 2f64.sqrt()).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalCoupling {
    pub beta_j: f64,
    /// Finite-difference steps and the specific-heat peak height found at each.
    pub peaks: Vec<(f64, f64)>,
    pub self_dual: f64,
}

fn golden_max(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Locates the specific-heat peak by golden-section search, refining the
/// finite-difference step and the bracket together.
pub fn locate_critical_coupling() -> Result<CriticalCoupling> {
    let (mut lo, mut hi) = (0.3, 0.6);
    let mut peaks = Vec::new();
    let mut k = 0.5 * (lo + hi);
    for h in [1e-2, 1e-3, 1e-4, 1e-5] {
        let f = move |x: f64| specific_heat(x, h);
        let (x, c) = golden_max(&f, lo, hi, h / 20.0)?;
        peaks.push((h, c));
        k = x;
        lo = x - 5.0 * h;
        hi = x + 5.0 * h;
    }
    Ok(CriticalCoupling {
        beta_j: k,
        peaks,
        self_dual: self_dual_coupling(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn high_temperature_limit() {
        let r = onsager_free_energy_density(1e-4).unwrap();
        // ln 2 + 2 ln cosh K + O(K^4) on the square lattice
        assert!((r.log_z_density - std::f64::consts::LN_2 - 2.0 * (1e-4f64).cosh().ln()).abs() < 1e-12);
    }

    #[test]
    fn low_temperature_limit() {
        let r = onsager_free_energy_density(5.0).unwrap();
        assert!((r.free_energy + 2.0).abs() < 1e-6, "{}", r.free_energy);
    }

    #[test]
    fn known_value_at_self_dual_point() {
        // ln Z/N at K_c = ln(sqrt 2) + 2G/pi, G = Catalan's constant
        let catalan = 0.915_965_594_177_219_015_054_6;
        let r = onsager_free_energy_density(self_dual_coupling()).unwrap();
        let exact = 0.5 * std::f64::consts::LN_2 + 2.0 * catalan / PI;
        assert!((r.log_z_density - exact).abs() < 1e-12, "{} vs {exact}", r.log_z_density);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn critical_point_from_specific_heat() {
        let c = locate_critical_coupling().unwrap();
        assert!((c.beta_j - self_dual_coupling()).abs() < 1e-4, "{}", c.beta_j);
        // log divergence: the peak keeps growing as the step shrinks
        for w in c.peaks.windows(2) {
            assert!(w[1].1 > w[0].1 + 0.5, "{:?}", c.peaks);
        }
    }
}
