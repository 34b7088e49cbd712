//! Power-law exponent extraction and error propagation.
//!
//! Fits are linear least squares of `ln|C(r)|` against `ln r`. The fitted
//! slope is reported as [`FitResult::exponent`] (negative for a decaying
//! correlator), so `C(r) ~ A r^exponent` and `kappa = -exponent / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{contract, LabError, Result};

/// Tabulated correlator against separation, optionally with errors and
/// leave-one-out (jackknife) replicas of the values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelatorSeries {
    pub label: String,
    pub separations: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Option<Vec<f64>>,
    pub jackknife: Option<Vec<Vec<f64>>>,
}

impl CorrelatorSeries {
    pub fn exact(label: impl Into<String>, separations: Vec<f64>, values: Vec<f64>) -> Self {
        CorrelatorSeries {
            label: label.into(),
            separations,
            values,
            errors: None,
            jackknife: None,
        }
    }

    pub fn with_errors(mut self, errors: Vec<f64>) -> Self {
        self.errors = Some(errors);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.separations.len();
        contract!(self.values.len() == n, "{} separations but {} values", n, self.values.len());
        if let Some(e) = &self.errors {
            contract!(e.len() == n, "{} separations but {} errors", n, e.len());
        }
        if let Some(jk) = &self.jackknife {
            for rep in jk {
                contract!(rep.len() == n, "jackknife replica of length {} for {} separations", rep.len(), n);
            }
        }
        for w in self.separations.windows(2) {
            contract!(w[0] < w[1], "separations must be strictly increasing");
        }
        contract!(
            self.separations.iter().all(|r| *r > 0.0),
            "separations must be positive"
        );
        Ok(())
    }

    /// Multiplies every value (and error) by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.values.iter_mut().for_each(|v| *v *= factor);
        if let Some(e) = s.errors.as_mut() {
            e.iter_mut().for_each(|v| *v *= factor.abs());
        }
        if let Some(jk) = s.jackknife.as_mut() {
            jk.iter_mut().flatten().for_each(|v| *v *= factor);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum WindowPolicy {
    /// All points with `r_min <= r <= r_max`.
    Fixed { r_min: f64, r_max: f64 },
    /// Longest run of consecutive points whose local slopes agree with their
    /// mean within twice the propagated noise (never below `slope_floor`).
    Plateau { min_points: usize, slope_floor: f64 },
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy::Plateau {
            min_points: 4,
            slope_floor: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Fitted log-log slope, `-2 kappa`.
    pub exponent: f64,
    pub amplitude: f64,
    pub stderr: f64,
    /// Least-squares standard error, reported alongside the jackknife one.
    pub naive_stderr: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub chi2_per_dof: f64,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn kappa(&self) -> f64 {
        -self.exponent / 2.0
    }

    pub fn kappa_stderr(&self) -> f64 {
        self.stderr / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSlope {
    pub r_lo: f64,
    pub r_hi: f64,
    pub slope: f64,
    pub error: f64,
}

struct Line {
    slope: f64,
    intercept: f64,
    slope_var: f64,
    chi2: f64,
}

/// Weighted least squares `y = intercept + slope x`. `sigma = None` gives unit
/// weights with the variance estimated from the residuals.
fn fit_line(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Line {
    let n = x.len();
    let w: Vec<f64> = match sigma {
        Some(s) => s.iter().map(|s| 1.0 / (s * s)).collect(),
        None => vec![1.0; n],
    };
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = y.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: f64 = (0..n)
        .map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2))
        .sum();
    let dof = (n as f64 - 2.0).max(1.0);
    let slope_var = match sigma {
        Some(_) => 1.0 / sxx,
        None => chi2 / dof / sxx,
    };
    Line {
        slope,
        intercept,
        slope_var,
        chi2,
    }
}

fn log_sigma(series: &CorrelatorSeries, i: usize) -> Option<f64> {
    series
        .errors
        .as_ref()
        .map(|e| (e[i] / series.values[i].abs()).max(f64::MIN_POSITIVE))
}

fn uses_weights(series: &CorrelatorSeries, idx: &[usize]) -> bool {
    match &series.errors {
        Some(e) => idx.iter().all(|&i| e[i] > 0.0),
        None => false,
    }
}

/// Slopes of `ln|C|` between consecutive points, with errors propagated from
/// the jackknife replicas when present, otherwise from independent errors.
pub fn local_slopes(series: &CorrelatorSeries) -> Vec<LocalSlope> {
    let n = series.separations.len();
    let ln_r: Vec<f64> = series.separations.iter().map(|r| r.ln()).collect();
    let slope_of = |v: &[f64], i: usize| (v[i + 1].abs() / v[i].abs()).ln() / (ln_r[i + 1] - ln_r[i]);
    (0..n.saturating_sub(1))
        .map(|i| {
            let slope = slope_of(&series.values, i);
            let error = if let Some(jk) = &series.jackknife {
                let reps: Vec<f64> = jk.iter().map(|v| slope_of(v, i)).collect();
                jackknife_error(&reps)
            } else if series.errors.is_some() {
                let a = log_sigma(series, i).unwrap();
                let b = log_sigma(series, i + 1).unwrap();
                (a * a + b * b).sqrt() / (ln_r[i + 1] - ln_r[i])
            } else {
                0.0
            };
            LocalSlope {
                r_lo: series.separations[i],
                r_hi: series.separations[i + 1],
                slope,
                error,
            }
        })
        .collect()
}

/// Standard jackknife error from leave-one-out estimates.
pub fn jackknife_error(replicas: &[f64]) -> f64 {
    let n = replicas.len() as f64;
    if replicas.len() < 2 {
        return 0.0;
    }
    let mean = replicas.iter().sum::<f64>() / n;
    ((n - 1.0) / n * replicas.iter().map(|r| (r - mean).powi(2)).sum::<f64>()).sqrt()
}

/// Leave-one-out means of `blocks` (each block a vector of the same length).
pub fn jackknife_means(blocks: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let nb = blocks.len();
    let len = blocks.first().map_or(0, |b| b.len());
    let total: Vec<f64> = (0..len).map(|k| blocks.iter().map(|b| b[k]).sum()).collect();
    blocks
        .iter()
        .map(|b| (0..len).map(|k| (total[k] - b[k]) / (nb as f64 - 1.0)).collect())
        .collect()
}

/// Index ranges `[start, end)` over which the values keep a constant, nonzero sign.
fn sign_definite_runs(values: &[f64]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 0..=values.len() {
        let breaks = i == values.len()
            || values[i] == 0.0
            || !values[i].is_finite()
            || (i > start && values[i].signum() != values[start].signum());
        if breaks {
            if i > start {
                runs.push((start, i));
            }
            start = if i < values.len() && values[i] != 0.0 && values[i].is_finite() {
                i
            } else {
                i + 1
            };
        }
    }
    runs
}

fn select_window(series: &CorrelatorSeries, policy: &WindowPolicy) -> Result<Vec<usize>> {
    let runs = sign_definite_runs(&series.values);
    match *policy {
        WindowPolicy::Fixed { r_min, r_max } => {
            contract!(r_min < r_max, "window r_min = {r_min} must be below r_max = {r_max}");
            let idx: Vec<usize> = (0..series.separations.len())
                .filter(|&i| series.separations[i] >= r_min && series.separations[i] <= r_max)
                .collect();
            let inside_one_run = runs
                .iter()
                .any(|&(a, b)| idx.first().is_some_and(|&f| f >= a) && idx.last().is_some_and(|&l| l < b));
            if !inside_one_run {
                return Err(LabError::Fit(format!(
                    "no sign-definite data in window [{r_min}, {r_max}]"
                )));
            }
            Ok(idx)
        }
        WindowPolicy::Plateau {
            min_points,
            slope_floor,
        } => {
            let min_points = min_points.max(3);
            let slopes = local_slopes(series);
            let mut best: Option<(usize, usize)> = None;
            for &(a, b) in &runs {
                for i in a..b {
                    for j in (i + min_points)..=b {
                        // points i..j, slopes i..j-1
                        let ks = i..j - 1;
                        let tol: Vec<f64> = ks.clone().map(|k| slopes[k].error.max(slope_floor)).collect();
                        let wsum: f64 = tol.iter().map(|t| 1.0 / (t * t)).sum();
                        let mean = ks
                            .clone()
                            .zip(&tol)
                            .map(|(k, t)| slopes[k].slope / (t * t))
                            .sum::<f64>()
                            / wsum;
                        let flat = ks.zip(&tol).all(|(k, t)| (slopes[k].slope - mean).abs() < 2.0 * t);
                        if flat {
                            let better = match best {
                                None => true,
                                Some((bi, bj)) => (j - i) > (bj - bi) || ((j - i) == (bj - bi) && i > bi),
                            };
                            if better {
                                best = Some((i, j));
                            }
                        }
                    }
                }
            }
            match best {
                Some((i, j)) => Ok((i..j).collect()),
                None => Err(LabError::Fit(format!(
                    "no sign-definite plateau of at least {min_points} points"
                ))),
            }
        }
    }
}

pub fn power_law_fit(series: &CorrelatorSeries, policy: &WindowPolicy) -> Result<FitResult> {
    series.validate()?;
    let idx = select_window(series, policy)?;
    if idx.len() < 4 {
        return Err(LabError::Fit(format!(
            "{} points in the fit window, at least 4 are required",
            idx.len()
        )));
    }
    let x: Vec<f64> = idx.iter().map(|&i| series.separations[i].ln()).collect();
    // Logs of ratios to the first point: rescaling by a power of two leaves them bit-identical.
    let fit_values = |vals: &[f64]| -> Vec<f64> {
        let reference = vals[idx[0]].abs();
        idx.iter().map(|&i| (vals[i].abs() / reference).ln()).collect()
    };
    let weighted = uses_weights(series, &idx);
    let sigma: Option<Vec<f64>> = weighted.then(|| idx.iter().map(|&i| log_sigma(series, i).unwrap()).collect());

    let line = fit_line(&x, &fit_values(&series.values), sigma.as_deref());
    let dof = idx.len() as f64 - 2.0;
    let chi2_per_dof = line.chi2 / dof;
    let naive_stderr = line.slope_var.sqrt();

    let stderr = match &series.jackknife {
        Some(reps) if reps.len() >= 2 => {
            let slopes: Vec<f64> = reps
                .iter()
                .map(|v| fit_line(&x, &fit_values(v), sigma.as_deref()).slope)
                .collect();
            jackknife_error(&slopes)
        }
        _ => naive_stderr,
    };

    let mut warnings = Vec::new();
    if weighted && chi2_per_dof > 5.0 {
        warnings.push(format!("poor fit: chi2/dof = {chi2_per_dof:.3}"));
    }
    let sign = series.values[idx[0]].signum();
    Ok(FitResult {
        exponent: line.slope,
        amplitude: sign * series.values[idx[0]].abs() * line.intercept.exp(),
        stderr,
        naive_stderr,
        window: (series.separations[idx[0]], series.separations[*idx.last().unwrap()]),
        points: idx.len(),
        chi2_per_dof,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KadanoffProduct {
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub value: f64,
    pub stderr: f64,
}

/// `kappa_+ * kappa_-` with the two errors combined in quadrature.
pub fn kadanoff_product(fit_plus: &FitResult, fit_minus: &FitResult) -> KadanoffProduct {
    let (kp, km) = (fit_plus.kappa(), fit_minus.kappa());
    let (sp, sm) = (fit_plus.kappa_stderr(), fit_minus.kappa_stderr());
    KadanoffProduct {
        kappa_plus: kp,
        kappa_minus: km,
        value: kp * km,
        stderr: ((km * sp).powi(2) + (kp * sm).powi(2)).sqrt(),
    }
}
