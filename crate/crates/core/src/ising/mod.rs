//! Exact free-fermion solution of the nearest-neighbour Ising model on an
//! open `L x L` square lattice.
//!
//! The partition function is `Z = 2^N (sinh K)^B |Pf A|` where `A` is the
//! Kasteleyn matrix of the Fisher lattice (see [`kasteleyn`]). Bond energies
//! `E_b = s_x s_x'` follow from derivatives of `ln Pf A` in the bond weights,
//! which only need entries of `G = A^{-1}`:
//!
//! ```text
//! <E_b>              = coth K - G_qp / sinh^2 K
//! <E_b E_b'>_c       = -(G_qp' G_q'p - G_qq' G_p'p) / sinh^4 K      (b != b')
//! ```
//!
//! for bond edges oriented `p -> q` and `p' -> q'`.

pub mod kasteleyn;
pub mod onsager;
pub mod solver;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::CorrelatorSeries;
use crate::error::{contract, Result};
pub use kasteleyn::{BondObservable, Direction, FisherGraph, KasteleynMatrix};
pub use onsager::{locate_critical_coupling, onsager_free_energy_density, self_dual_coupling};
use solver::BlockSolver;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingExactSpec {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "betaJ")]
    pub beta_j: f64,
    pub boundary: Boundary,
}

impl IsingExactSpec {
    pub fn new(l: usize, beta_j: f64) -> Result<Self> {
        let s = IsingExactSpec {
            l,
            beta_j,
            boundary: Boundary::Open,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        contract!(self.l >= 16 && self.l % 2 == 0, "L must be even and at least 16, got {}", self.l);
        contract!(
            self.beta_j > 0.0 && self.beta_j.is_finite(),
            "betaJ must be positive and finite, got {}",
            self.beta_j
        );
        Ok(())
    }
}

pub fn build_kasteleyn(spec: &IsingExactSpec) -> Result<KasteleynMatrix> {
    spec.validate()?;
    KasteleynMatrix::new(FisherGraph::new(spec.l)?, spec.beta_j)
}

/// Factorized Kasteleyn matrix with bond and site energy correlators.
pub struct ExactIsing {
    pub matrix: KasteleynMatrix,
    solver: BlockSolver,
}

/// Columns of `A^{-1}` at the bond-edge endpoints of one reference site.
pub struct SiteColumns {
    pub site: (usize, usize),
    bonds: Vec<(usize, usize, usize)>,
    columns: Vec<Vec<f64>>,
    node_slot: Vec<(usize, usize)>,
}

impl SiteColumns {
    fn col(&self, node: usize) -> &[f64] {
        let k = self.node_slot.iter().find(|(n, _)| *n == node).expect("node of the reference site").1;
        &self.columns[k]
    }
}

impl ExactIsing {
    pub fn new(spec: &IsingExactSpec) -> Result<Self> {
        Self::with_matrix(build_kasteleyn(spec)?)
    }

    /// Any lattice side `L >= 2`; used for exhaustive cross-checks on small lattices.
    pub fn small(l: usize, beta_j: f64) -> Result<Self> {
        Self::with_matrix(KasteleynMatrix::new(FisherGraph::new(l)?, beta_j)?)
    }

    fn with_matrix(matrix: KasteleynMatrix) -> Result<Self> {
        let solver = BlockSolver::factor(&matrix)?;
        Ok(ExactIsing { matrix, solver })
    }

    pub fn l(&self) -> usize {
        self.matrix.graph.l
    }

    pub fn beta_j(&self) -> f64 {
        self.matrix.beta_j
    }

    pub fn sites(&self) -> usize {
        self.l() * self.l()
    }

    pub fn bond_count(&self) -> usize {
        self.matrix.graph.bonds.len()
    }

    /// `ln |Pf A| = ln |det A| / 2`.
    pub fn log_pfaffian(&self) -> f64 {
        0.5 * self.solver.log_abs_det()
    }

    pub fn log_partition_function(&self) -> f64 {
        self.sites() as f64 * std::f64::consts::LN_2
            + self.bond_count() as f64 * self.beta_j().sinh().ln()
            + self.log_pfaffian()
    }

    fn csch2(&self) -> f64 {
        1.0 / self.beta_j().sinh().powi(2)
    }

    pub fn site_columns(&self, site: (usize, usize)) -> Result<SiteColumns> {
        let g = &self.matrix.graph;
        contract!(site.0 < g.l && site.1 < g.l, "site {site:?} outside the lattice");
        let mut bonds = Vec::new();
        let mut nodes = Vec::new();
        for b in g.incident_bonds(site) {
            let bi = g.bond_index(&b).expect("incident bond exists");
            let (p, q) = self.matrix.oriented_bond(bi);
            bonds.push((bi, p, q));
            nodes.push(p);
            nodes.push(q);
        }
        let columns = self.solver.inverse_columns(&nodes)?;
        let node_slot = nodes.iter().enumerate().map(|(k, &n)| (n, k)).collect();
        Ok(SiteColumns {
            site,
            bonds,
            columns,
            node_slot,
        })
    }

    /// `<E_b>` for a bond incident to the reference site.
    pub fn bond_mean(&self, cols: &SiteColumns, bond: usize) -> Result<f64> {
        let &(_, p, q) = cols
            .bonds
            .iter()
            .find(|b| b.0 == bond)
            .ok_or_else(|| crate::LabError::Contract(format!("bond {bond} is not incident to {:?}", cols.site)))?;
        Ok(1.0 / self.beta_j().tanh() - self.csch2() * cols.col(p)[q])
    }

    /// `<E_b E_b'>_c` with `b'` incident to the reference site.
    fn bond_connected(&self, cols: &SiteColumns, b: usize, b_ref: (usize, usize, usize)) -> Result<f64> {
        let (bi, p0, q0) = b_ref;
        if b == bi {
            let m = self.bond_mean(cols, b)?;
            return Ok(1.0 - m * m);
        }
        let (p, q) = self.matrix.oriented_bond(b);
        let g_q_p0 = cols.col(p0)[q];
        let g_q0_p = -cols.col(q0)[p];
        let g_q_q0 = cols.col(q0)[q];
        let g_p0_p = -cols.col(p0)[p];
        Ok(-self.csch2() * self.csch2() * (g_q_p0 * g_q0_p - g_q_q0 * g_p0_p))
    }

    /// Connected `<O_x O_0>` with `O` the sum of the bond energies at a site.
    pub fn site_energy_correlator(&self, cols: &SiteColumns, x: (usize, usize)) -> Result<f64> {
        let g = &self.matrix.graph;
        contract!(x.0 < g.l && x.1 < g.l, "site {x:?} outside the lattice");
        let mut total = 0.0;
        for b in g.incident_bonds(x) {
            let bi = g.bond_index(&b).expect("incident bond exists");
            for &r in &cols.bonds {
                total += self.bond_connected(cols, bi, r)?;
            }
        }
        Ok(total)
    }

    /// Connected bond-bond correlator for two arbitrary bonds.
    pub fn bond_correlator(&self, b: &BondObservable, b_ref: &BondObservable) -> Result<f64> {
        let g = &self.matrix.graph;
        let bi = g.bond_index(b).ok_or_else(|| crate::LabError::Contract(format!("bond {b:?} outside the lattice")))?;
        let ri = g
            .bond_index(b_ref)
            .ok_or_else(|| crate::LabError::Contract(format!("bond {b_ref:?} outside the lattice")))?;
        let cols = self.site_columns(b_ref.site)?;
        let r = *cols.bonds.iter().find(|t| t.0 == ri).unwrap();
        self.bond_connected(&cols, bi, r)
    }

    /// `<O_x O_origin>_c` for `x = origin + r e`, `r` in `separations`.
    pub fn energy_correlator_series(
        &self,
        origin: (usize, usize),
        direction: Direction,
        separations: &[usize],
    ) -> Result<CorrelatorSeries> {
        let cols = self.site_columns(origin)?;
        let l = self.l();
        let mut values = Vec::with_capacity(separations.len());
        for &r in separations {
            let x = match direction {
                Direction::Horizontal => (origin.0 + r, origin.1),
                Direction::Vertical => (origin.0, origin.1 + r),
            };
            contract!(x.0 < l && x.1 < l, "separation {r} leaves the lattice from {origin:?}");
            values.push(self.site_energy_correlator(&cols, x)?);
        }
        Ok(CorrelatorSeries::exact(
            format!("energy {direction:?} from {origin:?}"),
            separations.iter().map(|&r| r as f64).collect(),
            values,
        ))
    }
}

impl ExactIsing {
    /// Connected correlator averaged over the insertion pairs of the Monte
    /// Carlo estimator on an open lattice: pairs `(o + r e, o)` whose midpoint
    /// lies within `L/8` of the centre in both coordinates. Only horizontal
    /// pairs are summed; the diagonal reflection maps them onto the vertical ones.
    pub fn centred_pair_series(&self, separations: &[usize]) -> Result<CorrelatorSeries> {
        let l = self.l();
        let r_max = separations.iter().copied().max().unwrap_or(0);
        contract!(
            separations.first().is_some_and(|&r| r >= 1) && r_max <= l / 4,
            "separations must lie in [1, L/4]"
        );
        let (c, h) = (l / 2, l / 8);
        let x_range = |r: usize| (2 * (c - h)).saturating_sub(r).div_ceil(2)..=(2 * (c + h) - r) / 2;
        let x_lo = x_range(r_max).start().to_owned();
        let x_hi = *x_range(1).end();
        let origins: Vec<(usize, usize)> = (c - h..=c + h).flat_map(|y| (x_lo..=x_hi).map(move |x| (x, y))).collect();
        // per origin: (separation index, value) for the separations it serves
        let rows: Vec<Vec<(usize, f64)>> = origins
            .par_iter()
            .map(|&o| {
                let wanted: Vec<usize> = (0..separations.len())
                    .filter(|&i| x_range(separations[i]).contains(&o.0))
                    .collect();
                if wanted.is_empty() {
                    return Ok(Vec::new());
                }
                let cols = self.site_columns(o)?;
                wanted
                    .into_iter()
                    .map(|i| Ok((i, self.site_energy_correlator(&cols, (o.0 + separations[i], o.1))?)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut sums = vec![0.0; separations.len()];
        let mut counts = vec![0usize; separations.len()];
        for (i, v) in rows.into_iter().flatten() {
            sums[i] += v;
            counts[i] += 1;
        }
        Ok(CorrelatorSeries::exact(
            "energy centred-pair average",
            separations.iter().map(|&r| r as f64).collect(),
            sums.iter().zip(&counts).map(|(s, &n)| s / n as f64).collect(),
        ))
    }
}

/// Default reference site for correlators along `+x`: `(L/2 - L/8, L/2)`, so
/// that both insertions stay at least `L/4` from the boundary up to `|x| = L/4`.
pub fn default_origin(l: usize) -> (usize, usize) {
    (l / 2 - l / 8, l / 2)
}

/// Connected energy correlator at separation `x` along `+x` from [`default_origin`].
pub fn energy_correlator_exact(spec: &IsingExactSpec, x: usize) -> Result<f64> {
    spec.validate()?;
    contract!(x >= 1 && x <= spec.l / 4, "separation {x} outside [1, L/4]");
    let ising = ExactIsing::new(spec)?;
    let origin = default_origin(spec.l);
    let cols = ising.site_columns(origin)?;
    ising.site_energy_correlator(&cols, (origin.0 + x, origin.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_contract() {
        assert!(IsingExactSpec::new(14, 0.4).is_err());
        assert!(IsingExactSpec::new(17, 0.4).is_err());
        assert!(IsingExactSpec::new(16, -0.1).is_err());
        assert!(IsingExactSpec::new(16, 0.4).is_ok());
    }

    #[test]
    fn two_by_two_partition_function() {
        // four spins on a ring of four bonds: Z = 2^4 (cosh^4 K + sinh^4 K)
        let k: f64 = 0.7;
        let z = ExactIsing::small(2, k).unwrap().log_partition_function();
        let exact = (16.0 * (k.cosh().powi(4) + k.sinh().powi(4))).ln();
        assert!((z - exact).abs() < 1e-12);
    }

    #[test]
    fn centred_pairs_cover_both_axes() {
        // brute force over horizontal and vertical pairs with the midpoint window
        let ising = ExactIsing::new(&IsingExactSpec::new(16, 0.4).unwrap()).unwrap();
        let series = ising.centred_pair_series(&[1, 2, 3, 4]).unwrap();
        for (i, r) in [1usize, 2, 3, 4].into_iter().enumerate() {
            let (mut sum, mut n) = (0.0, 0);
            for y in 6..=10 {
                for x in 0..16 - r {
                    if (12..=20).contains(&(2 * x + r)) {
                        let cols = ising.site_columns((x, y)).unwrap();
                        sum += ising.site_energy_correlator(&cols, (x + r, y)).unwrap();
                        let cols = ising.site_columns((y, x)).unwrap();
                        sum += ising.site_energy_correlator(&cols, (y, x + r)).unwrap();
                        n += 2;
                    }
                }
            }
            assert!((series.values[i] - sum / n as f64).abs() < 1e-12 * sum.abs());
        }
    }

    #[test]
    fn default_origin_is_bulk() {
        let l = 128;
        let o = default_origin(l);
        assert!(o.0 >= l / 4 && o.0 + l / 4 <= l - 1 - l / 4 + l / 4);
        assert!(o.0 + l / 4 + l / 4 <= l);
    }
}
