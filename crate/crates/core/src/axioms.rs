//! Desk-scale spot checks of the Osterwalder-Schrader style properties of the
//! exact correlators: antisymmetry, Euclidean covariance, the free-field limit
//! and reflection positivity in the one-particle sector.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, LabError, Result};
use crate::rng::Xoshiro256StarStar;
use crate::thirring::{
    chirality_balanced, Chirality, Insertion, Normalization, Point, ThirringCorrelator,
    ThirringParams,
};

/// Description of the sesquilinear form used by [`os_gram_two_point`].
pub const GRAM_CONTRACTION: &str =
    "G_ij = -(gamma0 S(theta x_i - x_j))_{omega_i omega_j}, theta(x0, x1) = (-x0, x1), gamma0 = [[0,1],[1,0]]";

pub const FREE_GRAM_TOLERANCE: f64 = 1e-10;
pub const INTERACTING_GRAM_TOLERANCE: f64 = 1e-8;

/// Insertions of `psi-bar` in the positive-time half plane with complex weights.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HalfPlaneConfig {
    pub points: Vec<Insertion>,
    pub coefficients: Vec<Complex64>,
}

impl HalfPlaneConfig {
    pub fn new(points: Vec<Insertion>, coefficients: Vec<Complex64>) -> Result<Self> {
        let c = HalfPlaneConfig {
            points,
            coefficients,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        contract!(!self.points.is_empty(), "empty half-plane configuration");
        contract!(
            self.points.len() == self.coefficients.len(),
            "{} points but {} coefficients",
            self.points.len(),
            self.coefficients.len()
        );
        for p in &self.points {
            contract!(
                p.point.x0 > 0.0 && p.point.is_finite(),
                "point {:?} is not in the open positive-time half plane",
                p.point
            );
        }
        Ok(())
    }
}

/// Time reflection `(x0, x1) -> (-x0, x1)`.
pub fn reflect(x: Point) -> Point {
    Point::new(-x.x0, x.x1)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramMatrix {
    pub matrix: Vec<Vec<Complex64>>,
    /// Largest `|G_ij - conj(G_ji)|` before symmetrization.
    pub asymmetry: f64,
    pub min_eigenvalue: f64,
    /// `sum_ij conj(c_i) G_ij c_j` for the configuration's coefficients.
    pub quadratic_form: f64,
    pub contraction: String,
}

/// Reflection-positivity Gram matrix of the two-point sector.
pub fn os_gram_two_point(
    config: &HalfPlaneConfig,
    params: &ThirringParams,
    norm: &Normalization,
) -> Result<GramMatrix> {
    config.validate()?;
    let corr = ThirringCorrelator::new(*params, *norm)?;
    let n = config.points.len();
    let mut raw = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (pi, pj) = (&config.points[i], &config.points[j]);
            let d = reflect(pi.point) - pj.point;
            if d == Point::ORIGIN {
                return Err(LabError::Singularity(format!(
                    "reflected point {:?} coincides with {:?}",
                    reflect(pi.point),
                    pj.point
                )));
            }
            let s = corr.two_point_unchecked(d);
            // (gamma0 S)_{ab} = S_{flip(a), b}
            raw[(i, j)] = -s[pi.chirality.flip().index()][pj.chirality.index()];
        }
    }
    let mut asymmetry: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            asymmetry = asymmetry.max((raw[(i, j)] - raw[(j, i)].conj()).norm());
        }
    }
    let herm = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.clone().symmetric_eigenvalues();
    let min_eigenvalue = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let c = nalgebra::DVector::from_vec(config.coefficients.clone());
    let quadratic_form = (c.adjoint() * &herm * &c)[(0, 0)].re;
    Ok(GramMatrix {
        matrix: (0..n).map(|i| (0..n).map(|j| herm[(i, j)]).collect()).collect(),
        asymmetry,
        min_eigenvalue,
        quadratic_form,
        contraction: GRAM_CONTRACTION.to_string(),
    })
}

/// Random points in `[-2, 2]^2` with pairwise separation at least `min_sep`.
pub fn random_points(rng: &mut Xoshiro256StarStar, n: usize, min_sep: f64) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = Point::new(4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0);
        if pts.iter().all(|q| q.dist(p) >= min_sep) {
            pts.push(p);
        }
    }
    pts
}

/// A random configuration with `n` psi and `n` psi-bar insertions in which some
/// pairing matches opposite chiralities, so the correlator does not vanish
/// identically. The psi-bar list is shuffled.
pub fn random_balanced_config(
    rng: &mut Xoshiro256StarStar,
    n: usize,
) -> (Vec<Insertion>, Vec<Insertion>) {
    let pts = random_points(rng, 2 * n, 0.15);
    let omegas: Vec<Chirality> = (0..n)
        .map(|_| if rng.uniform() < 0.5 { Chirality::Plus } else { Chirality::Minus })
        .collect();
    let mut sigmas: Vec<Chirality> = omegas.iter().map(|c| c.flip()).collect();
    for i in (1..n).rev() {
        let j = rng.below(i + 1);
        sigmas.swap(i, j);
    }
    let xs = (0..n).map(|i| Insertion::new(pts[i], omegas[i])).collect();
    let ys = (0..n).map(|i| Insertion::new(pts[n + i], sigmas[i])).collect();
    (xs, ys)
}

pub fn random_half_plane_config(rng: &mut Xoshiro256StarStar, n: usize) -> HalfPlaneConfig {
    let points = (0..n)
        .map(|_| {
            let p = Point::new(0.05 + 2.0 * rng.uniform(), 4.0 * rng.uniform() - 2.0);
            let c = if rng.uniform() < 0.5 { Chirality::Plus } else { Chirality::Minus };
            Insertion::new(p, c)
        })
        .collect();
    let coefficients = (0..n)
        .map(|_| Complex64::new(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0))
        .collect();
    HalfPlaneConfig {
        points,
        coefficients,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub property: String,
    /// Worst observed violation (relative error, or the most negative eigenvalue for the Gram test).
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomReport {
    pub lambda: f64,
    pub xi: f64,
    pub eta_plus: f64,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<PropertyCheck>,
    pub all_passed: bool,
    pub gram_contraction: String,
    pub note: Option<String>,
}

#[derive(Default, Clone, Copy)]
struct TrialOutcome {
    antisymmetry: f64,
    scaling: f64,
    free_limit: f64,
    gram_min_eig: f64,
    translation: f64,
    rotation: f64,
    selection: f64,
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let scale = b.norm();
    if scale == 0.0 {
        a.norm()
    } else {
        (a - b).norm() / scale
    }
}

fn run_trial(corr: &ThirringCorrelator, free: &ThirringCorrelator, seed: u64, t: u64) -> Result<TrialOutcome> {
    let mut rng = Xoshiro256StarStar::from_stream(seed, t);
    let mut out = TrialOutcome::default();

    let n = 2 + rng.below(3);
    let (xs, ys) = random_balanced_config(&mut rng, n);
    let v = corr.n_point(&xs, &ys)?;

    let mut swapped = xs.clone();
    swapped.swap(0, 1);
    out.antisymmetry = rel(-corr.n_point(&swapped, &ys)?, v);

    let omegas: Vec<_> = xs.iter().map(|f| f.chirality).collect();
    let sigmas: Vec<_> = ys.iter().map(|f| f.chirality).collect();
    let degree = corr.homogeneity_degree(&omegas, &sigmas);
    for s in [0.5, 2.0, 10.0] {
        let scale = |fs: &[Insertion]| -> Vec<Insertion> {
            fs.iter().map(|f| Insertion::new(s * f.point, f.chirality)).collect()
        };
        let vs = corr.n_point(&scale(&xs), &scale(&ys))?;
        out.scaling = out.scaling.max(rel(vs, v * s.powf(degree)));
    }

    let shift = Point::new(4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0);
    let moved = |fs: &[Insertion]| -> Vec<Insertion> {
        fs.iter().map(|f| Insertion::new(f.point + shift, f.chirality)).collect()
    };
    out.translation = rel(corr.n_point(&moved(&xs), &moved(&ys))?, v);

    let theta = 2.0 * std::f64::consts::PI * rng.uniform();
    let x = random_points(&mut rng, 1, 0.0)[0];
    if x != Point::ORIGIN {
        let s = corr.two_point(x)?;
        let sr = corr.two_point(x.rotate(theta))?;
        let phase = Complex64::from_polar(1.0, -theta);
        out.rotation = rel(sr[0][1], phase * s[0][1]).max(rel(sr[1][0], phase.conj() * s[1][0]));
    }

    let nf = 1 + rng.below(5);
    let (fx, fy) = random_balanced_config(&mut rng, nf);
    out.free_limit = rel(free.n_point(&fx, &fy)?, free.wick_determinant(&fx, &fy)?);

    // unbalanced: all psi-bar share the chirality of the first psi
    let (ux, mut uy) = random_balanced_config(&mut rng, 2);
    for f in uy.iter_mut() {
        f.chirality = ux[0].chirality;
    }
    let omegas_u: Vec<_> = ux.iter().map(|f| f.chirality).collect();
    let sigmas_u: Vec<_> = uy.iter().map(|f| f.chirality).collect();
    if !chirality_balanced(&omegas_u, &sigmas_u) {
        out.selection = corr.n_point(&ux, &uy)?.norm();
    }

    let ng = 1 + rng.below(6);
    let cfg = random_half_plane_config(&mut rng, ng);
    out.gram_min_eig = os_gram_two_point(&cfg, &corr.params, &corr.norm)?.min_eigenvalue;
    Ok(out)
}

/// Runs every property check over `trials` randomized configurations.
///
/// Trials use independent streams derived from `seed`, so the report does
/// not depend on the number of worker threads.
pub fn run_axiom_suite(
    params: &ThirringParams,
    norm: &Normalization,
    trials: usize,
    seed: u64,
) -> Result<AxiomReport> {
    contract!(trials >= 1, "at least one trial is required");
    let corr = ThirringCorrelator::new(*params, *norm)?;
    let free = ThirringCorrelator::new(ThirringParams::free(), *norm)?;
    let outcomes: Vec<TrialOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(&corr, &free, seed, t))
        .collect::<Result<_>>()?;

    let gram_tol = if params.lambda == 0.0 {
        FREE_GRAM_TOLERANCE
    } else {
        INTERACTING_GRAM_TOLERANCE
    };
    let worst = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f).fold(0.0, f64::max);
    let min_eig = outcomes
        .iter()
        .map(|o| o.gram_min_eig)
        .fold(f64::INFINITY, f64::min);
    let mk = |name: &str, worst: f64, tol: f64| PropertyCheck {
        property: name.to_string(),
        worst,
        tolerance: tol,
        passed: worst <= tol,
        samples: trials,
    };
    let checks = vec![
        mk("antisymmetry", worst(|o| o.antisymmetry), 1e-12),
        mk("scaling_covariance", worst(|o| o.scaling), 1e-9),
        mk("free_field_wick", worst(|o| o.free_limit), 1e-10),
        mk("translation_invariance", worst(|o| o.translation), 1e-10),
        mk("rotation_covariance", worst(|o| o.rotation), 1e-10),
        mk("chirality_selection", worst(|o| o.selection), 0.0),
        PropertyCheck {
            property: "reflection_positivity_two_point".into(),
            worst: min_eig,
            tolerance: -gram_tol,
            passed: min_eig >= -gram_tol,
            samples: trials,
        },
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    let gram_failed = !checks.last().unwrap().passed;
    Ok(AxiomReport {
        lambda: params.lambda,
        xi: params.xi,
        eta_plus: params.eta_plus,
        trials,
        seed,
        checks,
        all_passed,
        gram_contraction: GRAM_CONTRACTION.to_string(),
        note: (gram_failed && params.lambda != 0.0).then(|| {
            "negative Gram eigenvalue in the interacting case: the fermionic pairing convention is the first suspect"
                .to_string()
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::SeedableRng;

    #[test]
    fn reflection_is_an_involution() {
        assert_eq!(reflect(Point::new(1.0, 2.0)), Point::new(-1.0, 2.0));
        assert_eq!(reflect(Point::new(0.0, 5.0)), Point::new(0.0, 5.0));
        let p = Point::new(-0.3, 7.25);
        assert_eq!(reflect(reflect(p)), p);
    }

    #[test]
    fn single_point_gram_is_positive() {
        for c in Chirality::BOTH {
            let cfg = HalfPlaneConfig::new(
                vec![Insertion::new(Point::new(0.7, -0.4), c)],
                vec![Complex64::new(1.0, 0.0)],
            )
            .unwrap();
            let g = os_gram_two_point(&cfg, &ThirringParams::free(), &Normalization::default()).unwrap();
            assert!((g.matrix[0][0].re - 1.0 / 1.4).abs() < 1e-15);
            assert!(g.min_eigenvalue > 0.0);
        }
    }

    #[test]
    fn half_plane_contract() {
        let bad = HalfPlaneConfig::new(
            vec![Insertion::new(Point::new(0.0, 1.0), Chirality::Plus)],
            vec![Complex64::new(1.0, 0.0)],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn random_free_gram_is_psd() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(11);
        for _ in 0..20 {
            let cfg = random_half_plane_config(&mut rng, 4);
            let g = os_gram_two_point(&cfg, &ThirringParams::free(), &Normalization::default()).unwrap();
            assert!(g.min_eigenvalue >= -FREE_GRAM_TOLERANCE, "{}", g.min_eigenvalue);
            assert!(g.asymmetry <= 1e-12);
            assert!(g.quadratic_form >= -1e-10);
        }
    }

    #[test]
    fn random_interacting_gram_is_psd() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(12);
        let p = ThirringParams::new(0.1, 0.5).unwrap();
        for _ in 0..20 {
            let cfg = random_half_plane_config(&mut rng, 4);
            let g = os_gram_two_point(&cfg, &p, &Normalization::default()).unwrap();
            assert!(g.min_eigenvalue >= -INTERACTING_GRAM_TOLERANCE, "{}", g.min_eigenvalue);
        }
    }

    #[test]
    fn suite_rejects_zero_trials() {
        assert!(matches!(
            run_axiom_suite(&ThirringParams::free(), &Normalization::default(), 0, 1),
            Err(LabError::Contract(_))
        ));
    }
}
