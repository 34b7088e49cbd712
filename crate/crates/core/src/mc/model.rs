//! Lattice geometry, spin states and Hamiltonians of the two Monte Carlo families.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::rng::Xoshiro256StarStar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// One spin field, nearest-neighbour `J` and next-nearest-neighbour `K`.
    NnnIsing,
    /// Two spin fields whose bond energies are coupled through `K v`.
    Dim,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Coupling kernel between a sigma bond and a tau bond, as a function of the
/// distance between the bond midpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// `v = 1` on the same link, zero otherwise.
    Onsite,
    /// `v(d) = amplitude * exp(-rate d)` for `d <= range`.
    Exponential { range: f64, rate: f64, amplitude: f64 },
}

/// Tail cut of the exponential kernel.
pub const KERNEL_CUTOFF: f64 = 1e-8;

impl Kernel {
    /// Exponential kernel truncated where `exp(-rate d) < 1e-8`.
    pub fn exponential(rate: f64, amplitude: f64) -> Self {
        Kernel::Exponential {
            range: -KERNEL_CUTOFF.ln() / rate,
            rate,
            amplitude,
        }
    }

    pub fn value(&self, d: f64) -> f64 {
        match *self {
            Kernel::Onsite => {
                if d < 1e-9 {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Exponential { range, rate, amplitude } => {
                if d <= range + 1e-12 {
                    amplitude * (-rate * d).exp()
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Kernel::Exponential { range, rate, amplitude } = *self {
            contract!(rate > 0.0 && rate.is_finite(), "kernel rate must be positive, got {rate}");
            contract!(amplitude.is_finite(), "kernel amplitude must be finite");
            contract!(range >= 0.0 && range.is_finite(), "kernel range must be finite and non-negative");
        }
        Ok(())
    }
}

/// Largest `|K| / |J|` accepted.
pub const MAX_COUPLING_RATIO: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeModel {
    pub variant: Variant,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub kernel: Kernel,
    pub beta_t: f64,
    pub boundary: Boundary,
}

impl LatticeModel {
    pub fn nnn_ising(l: usize, j: f64, k: f64, beta_t: f64) -> Self {
        LatticeModel {
            variant: Variant::NnnIsing,
            l,
            j,
            k,
            kernel: Kernel::Onsite,
            beta_t,
            boundary: Boundary::Open,
        }
    }

    pub fn dim(l: usize, j: f64, k: f64, beta_t: f64) -> Self {
        LatticeModel {
            variant: Variant::Dim,
            ..Self::nnn_ising(l, j, k, beta_t)
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_beta(mut self, beta_t: f64) -> Self {
        self.beta_t = beta_t;
        self
    }

    /// `lambda = K / J`.
    pub fn lambda(&self) -> f64 {
        self.k / self.j
    }

    pub fn beta_j(&self) -> f64 {
        self.beta_t * self.j
    }

    pub fn validate(&self) -> Result<()> {
        contract!(self.j.is_finite() && self.j != 0.0, "J must be finite and nonzero, got {}", self.j);
        contract!(self.k.is_finite(), "K must be finite");
        contract!(
            self.k.abs() <= MAX_COUPLING_RATIO * self.j.abs(),
            "|K|/|J| = {} exceeds {MAX_COUPLING_RATIO}",
            (self.k / self.j).abs()
        );
        contract!(self.beta_t.is_finite() && self.beta_t >= 0.0, "beta_T must be finite and non-negative");
        let min_l = if self.boundary == Boundary::Periodic { 4 } else { 2 };
        contract!(self.l >= min_l, "L = {} too small for {:?} boundaries", self.l, self.boundary);
        self.kernel.validate()
    }

    pub fn build(&self) -> Result<System> {
        System::new(*self)
    }
}

/// Bond list of an `l x l` lattice.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub l: usize,
    pub boundary: Boundary,
    /// Nearest-neighbour bonds `(i, j)`, site index `x + l y`.
    pub bonds: Vec<(u32, u32)>,
    /// Next-nearest-neighbour (diagonal) bonds.
    pub diagonals: Vec<(u32, u32)>,
    pub bond_midpoints: Vec<(f64, f64)>,
    site_bond_start: Vec<u32>,
    site_bond_list: Vec<u32>,
    site_diag_start: Vec<u32>,
    site_diag_list: Vec<u32>,
    /// Far ends of `site_bond_list` and `site_diag_list`, entry by entry.
    site_nbr_list: Vec<u32>,
    site_diag_nbr_list: Vec<u32>,
}

fn adjacency(n: usize, pairs: &[(u32, u32)]) -> (Vec<u32>, Vec<u32>) {
    let mut count = vec![0u32; n + 1];
    for &(a, b) in pairs {
        count[a as usize + 1] += 1;
        count[b as usize + 1] += 1;
    }
    for i in 0..n {
        count[i + 1] += count[i];
    }
    let mut fill = count.clone();
    let mut list = vec![0u32; 2 * pairs.len()];
    for (k, &(a, b)) in pairs.iter().enumerate() {
        for s in [a, b] {
            list[fill[s as usize] as usize] = k as u32;
            fill[s as usize] += 1;
        }
    }
    (count, list)
}

impl Lattice {
    pub fn new(l: usize, boundary: Boundary) -> Self {
        let idx = |x: usize, y: usize| (x + l * y) as u32;
        let periodic = boundary == Boundary::Periodic;
        let mut bonds = Vec::new();
        let mut mids = Vec::new();
        let mut diagonals = Vec::new();
        for y in 0..l {
            for x in 0..l {
                if x + 1 < l || periodic {
                    bonds.push((idx(x, y), idx((x + 1) % l, y)));
                    mids.push((x as f64 + 0.5, y as f64));
                }
                if y + 1 < l || periodic {
                    bonds.push((idx(x, y), idx(x, (y + 1) % l)));
                    mids.push((x as f64, y as f64 + 0.5));
                }
                if (x + 1 < l && y + 1 < l) || periodic {
                    diagonals.push((idx(x, y), idx((x + 1) % l, (y + 1) % l)));
                }
                if (x + 1 < l && y >= 1) || periodic {
                    diagonals.push((idx(x, y), idx((x + 1) % l, (y + l - 1) % l)));
                }
            }
        }
        let n = l * l;
        let (site_bond_start, site_bond_list) = adjacency(n, &bonds);
        let (site_diag_start, site_diag_list) = adjacency(n, &diagonals);
        let far = |start: &[u32], list: &[u32], pairs: &[(u32, u32)]| -> Vec<u32> {
            let mut out = vec![0u32; list.len()];
            for s in 0..n {
                for k in start[s] as usize..start[s + 1] as usize {
                    out[k] = Self::other_end(pairs[list[k] as usize], s) as u32;
                }
            }
            out
        };
        let site_nbr_list = far(&site_bond_start, &site_bond_list, &bonds);
        let site_diag_nbr_list = far(&site_diag_start, &site_diag_list, &diagonals);
        Lattice {
            l,
            boundary,
            bonds,
            diagonals,
            bond_midpoints: mids,
            site_bond_start,
            site_bond_list,
            site_diag_start,
            site_diag_list,
            site_nbr_list,
            site_diag_nbr_list,
        }
    }

    pub fn sites(&self) -> usize {
        self.l * self.l
    }

    #[inline]
    pub fn site(&self, x: usize, y: usize) -> usize {
        x + self.l * y
    }

    /// Nearest-neighbour bonds touching `site`.
    #[inline]
    pub fn incident_bonds(&self, site: usize) -> &[u32] {
        &self.site_bond_list[self.site_bond_start[site] as usize..self.site_bond_start[site + 1] as usize]
    }

    /// Far ends of [`Lattice::incident_bonds`], in the same order.
    #[inline]
    pub fn neighbours(&self, site: usize) -> &[u32] {
        &self.site_nbr_list[self.site_bond_start[site] as usize..self.site_bond_start[site + 1] as usize]
    }

    #[inline]
    pub fn diagonal_neighbours(&self, site: usize) -> &[u32] {
        &self.site_diag_nbr_list[self.site_diag_start[site] as usize..self.site_diag_start[site + 1] as usize]
    }

    #[inline]
    pub fn incident_diagonals(&self, site: usize) -> &[u32] {
        &self.site_diag_list[self.site_diag_start[site] as usize..self.site_diag_start[site + 1] as usize]
    }

    #[inline]
    pub fn other_end(pair: (u32, u32), site: usize) -> usize {
        if pair.0 as usize == site {
            pair.1 as usize
        } else {
            pair.0 as usize
        }
    }

    fn midpoint_distance(&self, a: usize, b: usize) -> f64 {
        let (pa, pb) = (self.bond_midpoints[a], self.bond_midpoints[b]);
        let mut dx = (pa.0 - pb.0).abs();
        let mut dy = (pa.1 - pb.1).abs();
        if self.boundary == Boundary::Periodic {
            let l = self.l as f64;
            dx = dx.min(l - dx);
            dy = dy.min(l - dy);
        }
        dx.hypot(dy)
    }
}

/// A model together with its lattice and the bond-bond kernel table.
#[derive(Clone, Debug)]
pub struct System {
    pub model: LatticeModel,
    pub lattice: Lattice,
    kernel_start: Vec<u32>,
    kernel_list: Vec<(u32, f64)>,
}

impl System {
    pub fn new(model: LatticeModel) -> Result<Self> {
        model.validate()?;
        let lattice = Lattice::new(model.l, model.boundary);
        let nb = lattice.bonds.len();
        let mut kernel_start = vec![0u32];
        let mut kernel_list = Vec::new();
        if model.variant == Variant::Dim {
            for a in 0..nb {
                match model.kernel {
                    Kernel::Onsite => kernel_list.push((a as u32, 1.0)),
                    Kernel::Exponential { range, rate, amplitude } => {
                        for b in 0..nb {
                            let d = lattice.midpoint_distance(a, b);
                            if d <= range + 1e-12 {
                                let v = model.kernel.value(d);
                                contract!(
                                    v.abs() <= amplitude.abs() * (-rate * d).exp() * (1.0 + 1e-12),
                                    "kernel bound violated at distance {d}"
                                );
                                kernel_list.push((b as u32, v));
                            }
                        }
                    }
                }
                kernel_start.push(kernel_list.len() as u32);
            }
        }
        Ok(System {
            model,
            lattice,
            kernel_start,
            kernel_list,
        })
    }

    #[inline]
    pub fn kernel_row(&self, bond: usize) -> &[(u32, f64)] {
        &self.kernel_list[self.kernel_start[bond] as usize..self.kernel_start[bond + 1] as usize]
    }

    /// `sum_b' v(b - b') s_b'` for every bond, given the bond products `s_b'`.
    pub fn smeared_bonds(&self, bond_products: &[i8]) -> Vec<f64> {
        if self.model.kernel == Kernel::Onsite {
            return bond_products.iter().map(|&p| p as f64).collect();
        }
        (0..self.lattice.bonds.len())
            .map(|b| {
                self.kernel_row(b)
                    .iter()
                    .map(|&(c, v)| v * bond_products[c as usize] as f64)
                    .sum()
            })
            .collect()
    }

    pub fn random_state(&self, rng: &mut Xoshiro256StarStar) -> SpinState {
        let n = self.lattice.sites();
        let mut draw = |_| if rng.next_bit() { 1i8 } else { -1i8 };
        let sigma = (0..n).map(&mut draw).collect();
        let tau = (self.model.variant == Variant::Dim).then(|| (0..n).map(&mut draw).collect());
        SpinState {
            l: self.model.l,
            sigma,
            tau,
        }
    }

    pub fn uniform_state(&self, spin: i8) -> SpinState {
        let n = self.lattice.sites();
        SpinState {
            l: self.model.l,
            sigma: vec![spin; n],
            tau: (self.model.variant == Variant::Dim).then(|| vec![spin; n]),
        }
    }

    pub fn check_state(&self, state: &SpinState) -> Result<()> {
        let n = self.lattice.sites();
        contract!(
            state.l == self.model.l && state.sigma.len() == n,
            "state of side {} does not match L = {}",
            state.l,
            self.model.l
        );
        contract!(
            state.tau.is_some() == (self.model.variant == Variant::Dim),
            "tau field must be present exactly for the double Ising model"
        );
        if let Some(t) = &state.tau {
            contract!(t.len() == n, "tau field has {} sites, expected {n}", t.len());
        }
        let ok = |f: &[i8]| f.iter().all(|s| *s == 1 || *s == -1);
        contract!(
            ok(&state.sigma) && state.tau.as_deref().is_none_or(ok),
            "spins must be exactly +1 or -1"
        );
        Ok(())
    }

    /// Bond products `s_i s_j` over the nearest-neighbour bonds.
    pub fn bond_products(&self, field: &[i8]) -> Vec<i8> {
        self.lattice
            .bonds
            .iter()
            .map(|&(a, b)| field[a as usize] * field[b as usize])
            .collect()
    }

    pub fn energy_terms(&self, state: &SpinState) -> Result<EnergyTerms> {
        self.check_state(state)?;
        let sum = |pairs: &[(u32, u32)], f: &[i8]| -> i64 {
            pairs.iter().map(|&(a, b)| (f[a as usize] * f[b as usize]) as i64).sum()
        };
        let mut t = EnergyTerms {
            nn_sigma: sum(&self.lattice.bonds, &state.sigma),
            ..Default::default()
        };
        match self.model.variant {
            Variant::NnnIsing => t.nnn = sum(&self.lattice.diagonals, &state.sigma),
            Variant::Dim => {
                let tau = state.tau.as_ref().unwrap();
                t.nn_tau = sum(&self.lattice.bonds, tau);
                let sb = self.bond_products(&state.sigma);
                let tb = self.bond_products(tau);
                t.quartic = self
                    .smeared_bonds(&tb)
                    .iter()
                    .zip(&sb)
                    .map(|(t, s)| t * *s as f64)
                    .sum();
            }
        }
        Ok(t)
    }
}

/// Spin configuration; `tau` is present only for the double Ising model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinState {
    #[serde(rename = "L")]
    pub l: usize,
    pub sigma: Vec<i8>,
    pub tau: Option<Vec<i8>>,
}

impl SpinState {
    /// Exchanges the two fields.
    pub fn swapped(&self) -> Self {
        let mut s = self.clone();
        if let Some(t) = s.tau.as_mut() {
            std::mem::swap(&mut s.sigma, t);
        }
        s
    }

    /// Integer code of the configuration, one bit per spin (sigma first).
    pub fn code(&self) -> u64 {
        let mut c = 0u64;
        for (i, s) in self.sigma.iter().chain(self.tau.iter().flatten()).enumerate() {
            if *s > 0 {
                c |= 1 << i;
            }
        }
        c
    }
}

/// Coupling-resolved pieces of the Hamiltonian,
/// `H = -J (nn_sigma + nn_tau) - K nnn + K quartic`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyTerms {
    pub nn_sigma: i64,
    pub nn_tau: i64,
    pub nnn: i64,
    pub quartic: f64,
}

impl EnergyTerms {
    pub fn energy(&self, model: &LatticeModel) -> f64 {
        -model.j * (self.nn_sigma + self.nn_tau) as f64 - model.k * self.nnn as f64 + model.k * self.quartic
    }
}

pub fn hamiltonian(state: &SpinState, system: &System) -> Result<f64> {
    Ok(system.energy_terms(state)?.energy(&system.model))
}
