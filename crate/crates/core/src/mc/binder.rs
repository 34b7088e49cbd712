//! Critical temperature from the crossing of Binder cumulants on periodic lattices.
//!
//! Each size is simulated at a few grid temperatures; between grid points the
//! cumulant is obtained by single-histogram reweighting from the nearest grid
//! run. Errors come from a block bootstrap over all runs.

use rand_core::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{sample_moments, MCRun, MomentSeries};
use super::model::{Boundary, LatticeModel};
use crate::error::{contract, LabError, Result};
use crate::rng::{stream_seed, Xoshiro256StarStar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TcScan {
    pub sizes: Vec<usize>,
    /// Window of `beta_T` searched for the crossing.
    pub beta_lo: f64,
    pub beta_hi: f64,
    /// Simulated temperatures per size, evenly spaced over the window.
    pub grid_points: usize,
    pub bootstrap: usize,
}

impl TcScan {
    pub fn new(beta_lo: f64, beta_hi: f64) -> Self {
        TcScan {
            sizes: vec![16, 32, 64],
            beta_lo,
            beta_hi,
            grid_points: 3,
            bootstrap: 100,
        }
    }

    fn validate(&self) -> Result<()> {
        contract!(self.sizes.len() >= 2, "at least two sizes are needed for a crossing");
        for w in self.sizes.windows(2) {
            contract!(w[0] < w[1], "sizes must be strictly increasing");
        }
        contract!(self.sizes[0] >= 4, "sizes below 4 are not admissible");
        contract!(
            0.0 < self.beta_lo && self.beta_lo < self.beta_hi && self.beta_hi.is_finite(),
            "invalid window [{}, {}]",
            self.beta_lo,
            self.beta_hi
        );
        contract!(self.grid_points >= 1, "at least one grid point is needed");
        contract!(self.bootstrap >= 2, "at least two bootstrap replicas are needed");
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        if self.grid_points == 1 {
            return vec![0.5 * (self.beta_lo + self.beta_hi)];
        }
        (0..self.grid_points)
            .map(|i| self.beta_lo + (self.beta_hi - self.beta_lo) * i as f64 / (self.grid_points - 1) as f64)
            .collect()
    }
}

/// Measurements of one (size, grid temperature) run, cut into bootstrap blocks.
struct GridRun {
    beta: f64,
    energies: Vec<f64>,
    m2: Vec<f64>,
    m4: Vec<f64>,
    blocks: Vec<(usize, usize)>,
}

impl GridRun {
    fn new(beta: f64, chains: Vec<MomentSeries>) -> Self {
        let tau = chains.iter().map(|c| c.tau_energy).fold(0.5, f64::max);
        let blen = (10.0 * tau).ceil() as usize;
        let mut run = GridRun {
            beta,
            energies: Vec::new(),
            m2: Vec::new(),
            m4: Vec::new(),
            blocks: Vec::new(),
        };
        for c in chains {
            let start = run.energies.len();
            let n = c.energies.len();
            let nblocks = (n / blen).max(1);
            for b in 0..nblocks {
                let lo = start + b * n / nblocks;
                let hi = start + (b + 1) * n / nblocks;
                run.blocks.push((lo, hi));
            }
            run.energies.extend(c.energies);
            run.m2.extend(c.m2);
            run.m4.extend(c.m4);
        }
        run
    }

    /// Binder cumulant reweighted to `beta`, with blocks taken `multiplicity` times.
    fn binder(&self, beta: f64, multiplicity: &[u32]) -> f64 {
        let db = beta - self.beta;
        // reference energy keeps the exponent near zero
        let e0 = self.energies.iter().sum::<f64>() / self.energies.len() as f64;
        let mut max_log = f64::NEG_INFINITY;
        for (&(lo, hi), &m) in self.blocks.iter().zip(multiplicity) {
            if m > 0 {
                for e in &self.energies[lo..hi] {
                    max_log = max_log.max(-db * (e - e0));
                }
            }
        }
        let (mut w, mut s2, mut s4) = (0.0, 0.0, 0.0);
        for (&(lo, hi), &m) in self.blocks.iter().zip(multiplicity) {
            if m == 0 {
                continue;
            }
            let (mut bw, mut b2, mut b4) = (0.0, 0.0, 0.0);
            for i in lo..hi {
                let x = (-db * (self.energies[i] - e0) - max_log).exp();
                bw += x;
                b2 += x * self.m2[i];
                b4 += x * self.m4[i];
            }
            let m = m as f64;
            w += m * bw;
            s2 += m * b2;
            s4 += m * b4;
        }
        let (m2, m4) = (s2 / w, s4 / w);
        1.0 - m4 / (3.0 * m2 * m2)
    }
}

struct SizeRuns {
    runs: Vec<GridRun>,
}

impl SizeRuns {
    fn binder(&self, beta: f64, resample: Option<&[Vec<u32>]>) -> f64 {
        let (k, run) = self
            .runs
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.beta - beta).abs().total_cmp(&(b.1.beta - beta).abs()))
            .unwrap();
        let ones;
        let mult = match resample {
            Some(r) => &r[k][..],
            None => {
                ones = vec![1u32; run.blocks.len()];
                &ones[..]
            }
        };
        run.binder(beta, mult)
    }
}

/// Binder cumulant curve of one size on the scan grid (for reporting).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BinderPoint {
    #[serde(rename = "L")]
    pub l: usize,
    pub beta_t: f64,
    pub cumulant: f64,
    pub acceptance: f64,
    pub tau_energy: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalEstimate {
    /// Crossing of the two largest sizes.
    pub beta_t: f64,
    pub beta_j: f64,
    pub stderr: f64,
    /// Crossings of every consecutive size pair, smallest first.
    pub pair_crossings: Vec<((usize, usize), f64)>,
    pub binder: Vec<BinderPoint>,
    pub failed_replicas: usize,
    pub warnings: Vec<String>,
}

/// First upward zero of `f` on `[lo, hi]`, scanning `n` cells then bisecting.
fn upward_crossing(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Option<f64> {
    let h = (hi - lo) / n as f64;
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=n {
        let b = lo + i as f64 * h;
        let fb = f(b);
        if fa < 0.0 && fb >= 0.0 {
            let (mut x0, mut x1) = (a, b);
            for _ in 0..40 {
                let m = 0.5 * (x0 + x1);
                if f(m) < 0.0 {
                    x0 = m;
                } else {
                    x1 = m;
                }
            }
            return Some(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    None
}

/// Locates the critical `beta_T` of `model`'s family (its `J`, `K`, kernel
/// and variant; size, temperature and boundary are set by the scan) from the
/// crossing of Binder cumulants of consecutive sizes.
pub fn locate_tc(model: &LatticeModel, scan: &TcScan, run: &MCRun) -> Result<CriticalEstimate> {
    scan.validate()?;
    run.validate()?;
    let grid = scan.grid();
    let mut sizes = Vec::new();
    let mut binder = Vec::new();
    for (si, &l) in scan.sizes.iter().enumerate() {
        let mut runs = Vec::new();
        for (gi, &beta) in grid.iter().enumerate() {
            let m = LatticeModel {
                l,
                beta_t: beta,
                boundary: Boundary::Periodic,
                ..*model
            };
            let r = MCRun {
                seed: stream_seed(run.seed, (si * grid.len() + gi) as u64),
                ..*run
            };
            let chains = sample_moments(&m, &r)?;
            let acceptance = chains.iter().map(|c| c.acceptance).sum::<f64>() / chains.len() as f64;
            let tau = chains.iter().map(|c| c.tau_energy).fold(0.0, f64::max);
            let g = GridRun::new(beta, chains);
            binder.push(BinderPoint {
                l,
                beta_t: beta,
                cumulant: g.binder(beta, &vec![1; g.blocks.len()]),
                acceptance,
                tau_energy: tau * run.measurement_stride as f64,
            });
            runs.push(g);
        }
        sizes.push(SizeRuns { runs });
    }

    const CELLS: usize = 64;
    let crossing = |a: &SizeRuns, b: &SizeRuns, ra: Option<&[Vec<u32>]>, rb: Option<&[Vec<u32>]>| {
        upward_crossing(|beta| b.binder(beta, rb) - a.binder(beta, ra), scan.beta_lo, scan.beta_hi, CELLS)
    };
    let mut pair_crossings = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..sizes.len() - 1 {
        let pair = (scan.sizes[i], scan.sizes[i + 1]);
        match crossing(&sizes[i], &sizes[i + 1], None, None) {
            Some(c) => pair_crossings.push((pair, c)),
            None => warnings.push(format!("sizes {pair:?} do not cross in the window")),
        }
    }
    let last = sizes.len() - 1;
    let Some(estimate) = crossing(&sizes[last - 1], &sizes[last], None, None) else {
        return Err(LabError::Range(format!(
            "Binder cumulants of L = {} and {} do not cross in beta_T window [{}, {}]",
            scan.sizes[last - 1],
            scan.sizes[last],
            scan.beta_lo,
            scan.beta_hi
        )));
    };

    let draws: Vec<Option<f64>> = (0..scan.bootstrap)
        .into_par_iter()
        .map(|rep| {
            let mut rng = Xoshiro256StarStar::seed_from_u64(stream_seed(run.seed ^ 0xB007, rep as u64));
            let mut resample = |s: &SizeRuns| -> Vec<Vec<u32>> {
                s.runs
                    .iter()
                    .map(|g| {
                        let mut m = vec![0u32; g.blocks.len()];
                        for _ in 0..g.blocks.len() {
                            m[rng.below(g.blocks.len())] += 1;
                        }
                        m
                    })
                    .collect()
            };
            let ra = resample(&sizes[last - 1]);
            let rb = resample(&sizes[last]);
            crossing(&sizes[last - 1], &sizes[last], Some(&ra), Some(&rb))
        })
        .collect();
    let ok: Vec<f64> = draws.iter().flatten().copied().collect();
    let failed = draws.len() - ok.len();
    if failed > 0 {
        warnings.push(format!("{failed} bootstrap replicas had no crossing"));
    }
    let mean = ok.iter().sum::<f64>() / ok.len().max(1) as f64;
    let stderr = if ok.len() >= 2 {
        (ok.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (ok.len() - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(CriticalEstimate {
        beta_t: estimate,
        beta_j: estimate * model.j,
        stderr,
        pair_crossings,
        binder,
        failed_replicas: failed,
        warnings,
    })
}

/// Self-dual coupling of the onsite double Ising model,
/// `sinh(2 beta J) = exp(2 lambda beta J)`; at `lambda = 0` the Ising value.
pub fn dim_self_dual_beta_j(lambda: f64) -> Result<f64> {
    contract!(lambda.abs() <= 0.2, "lambda = {lambda} outside [-0.2, 0.2]");
    let f = |b: f64| (2.0 * b).sinh() - (2.0 * lambda * b).exp();
    let (mut lo, mut hi) = (0.1, 2.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if f(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}
