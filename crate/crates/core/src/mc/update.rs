//! Markov-chain updates: checkerboard single-spin Metropolis and
//! Swendsen–Wang cluster moves.
//!
//! For the double Ising model the cluster move acts on one field at a time
//! with the other frozen. Conditioned on `tau`, the `sigma` Hamiltonian is a
//! pair Hamiltonian with bond couplings `J - K sum_b' v(b - b') tau_b'`, so
//! the ordinary Swendsen–Wang construction applies; couplings of either sign
//! are handled by freezing satisfied bonds.

use serde::{Deserialize, Serialize};

use rand_core::RngCore;

use super::model::{Kernel, SpinState, System, Variant};
use crate::error::Result;
use crate::rng::Xoshiro256StarStar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Checkerboard Metropolis only.
    Metropolis,
    /// One Metropolis sweep followed by one cluster sweep per field.
    #[default]
    Hybrid,
}

/// Checkerboard order: even sublattice first.
fn checkerboard(l: usize) -> impl Iterator<Item = usize> {
    (0..2).flat_map(move |parity| {
        (0..l).flat_map(move |y| ((y + parity) % 2..l).step_by(2).map(move |x| x + l * y))
    })
}

#[inline]
fn accept(delta: f64, beta: f64, rng: &mut Xoshiro256StarStar) -> bool {
    delta <= 0.0 || rng.uniform() < (-beta * delta).exp()
}

/// Metropolis acceptance probabilities of `dE = 2 (J a + K c)` for integer
/// local sums `a, c` in `[-4, 4]`.
struct AcceptanceTable {
    p: [[f64; 9]; 9],
}

impl AcceptanceTable {
    fn new(j: f64, k: f64, beta: f64) -> Self {
        let mut p = [[1.0; 9]; 9];
        for (a, row) in p.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                let delta = 2.0 * (j * (a as f64 - 4.0) + k * (c as f64 - 4.0));
                *v = if delta <= 0.0 { 1.0 } else { (-beta * delta).exp() };
            }
        }
        AcceptanceTable { p }
    }

    #[inline]
    fn accept(&self, a: i32, c: i32, rng: &mut Xoshiro256StarStar) -> bool {
        let p = self.p[(a + 4) as usize][(c + 4) as usize];
        p >= 1.0 || rng.uniform() < p
    }
}

/// Energy change of flipping `sigma` (or `tau` when `tau_field`) at `site`.
pub fn flip_energy(state: &SpinState, system: &System, site: usize, tau_field: bool) -> f64 {
    let lat = &system.lattice;
    let m = &system.model;
    match m.variant {
        Variant::NnnIsing => {
            let f = &state.sigma;
            let nn: i32 = lat.neighbours(site).iter().map(|&o| f[o as usize] as i32).sum();
            let nnn: i32 = lat.diagonal_neighbours(site).iter().map(|&o| f[o as usize] as i32).sum();
            2.0 * f[site] as f64 * (m.j * nn as f64 + m.k * nnn as f64)
        }
        Variant::Dim => {
            let tau = state.tau.as_ref().expect("double Ising state carries tau");
            let (f, g) = if tau_field { (tau, &state.sigma) } else { (&state.sigma, tau) };
            let couplings = effective_couplings(system, g);
            let field: f64 = lat
                .neighbours(site)
                .iter()
                .zip(lat.incident_bonds(site))
                .map(|(&o, &b)| f[o as usize] as f64 * couplings[b as usize])
                .sum();
            2.0 * f[site] as f64 * field
        }
    }
}

/// One checkerboard Metropolis sweep over every field at inverse temperature
/// `beta_t`; returns the acceptance rate.
pub fn metropolis_sweep(
    state: &mut SpinState,
    system: &System,
    beta_t: f64,
    rng: &mut Xoshiro256StarStar,
) -> Result<f64> {
    system.check_state(state)?;
    let lat = &system.lattice;
    let m = &system.model;
    let l = m.l;
    let mut accepted = 0usize;
    let mut tried = 0usize;
    match m.variant {
        Variant::NnnIsing => {
            let table = AcceptanceTable::new(m.j, m.k, beta_t);
            let f = &mut state.sigma;
            for site in checkerboard(l) {
                let s = f[site] as i32;
                let nn: i32 = lat.neighbours(site).iter().map(|&o| f[o as usize] as i32).sum();
                let nnn: i32 = lat.diagonal_neighbours(site).iter().map(|&o| f[o as usize] as i32).sum();
                tried += 1;
                if table.accept(s * nn, s * nnn, rng) {
                    f[site] = -f[site];
                    accepted += 1;
                }
            }
        }
        Variant::Dim => {
            let mut tau = state.tau.take().expect("double Ising state carries tau");
            let onsite = m.kernel == Kernel::Onsite;
            let table = AcceptanceTable::new(m.j, -m.k, beta_t);
            for pass in 0..2 {
                let (f, g) = if pass == 0 {
                    (&mut state.sigma, &tau)
                } else {
                    (&mut tau, &state.sigma)
                };
                // the other field is frozen during this pass
                if onsite {
                    let gb = system.bond_products(g);
                    for site in checkerboard(l) {
                        let s = f[site] as i32;
                        let (mut a, mut c) = (0i32, 0i32);
                        for (&o, &b) in lat.neighbours(site).iter().zip(lat.incident_bonds(site)) {
                            let so = f[o as usize] as i32;
                            a += so;
                            c += so * gb[b as usize] as i32;
                        }
                        tried += 1;
                        if table.accept(s * a, s * c, rng) {
                            f[site] = -f[site];
                            accepted += 1;
                        }
                    }
                } else {
                    let couplings = effective_couplings(system, g);
                    for site in checkerboard(l) {
                        let field: f64 = lat
                            .neighbours(site)
                            .iter()
                            .zip(lat.incident_bonds(site))
                            .map(|(&o, &b)| f[o as usize] as f64 * couplings[b as usize])
                            .sum();
                        let delta = 2.0 * f[site] as f64 * field;
                        tried += 1;
                        if accept(delta, beta_t, rng) {
                            f[site] = -f[site];
                            accepted += 1;
                        }
                    }
                }
            }
            state.tau = Some(tau);
        }
    }
    Ok(accepted as f64 / tried as f64)
}

/// Bond couplings of one double-Ising field with the other field `other` frozen.
fn effective_couplings(system: &System, other: &[i8]) -> Vec<f64> {
    let m = &system.model;
    let ob = system.bond_products(other);
    system.smeared_bonds(&ob).into_iter().map(|s| m.j - m.k * s).collect()
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] as usize != a {
            let g = self.parent[self.parent[a] as usize];
            self.parent[a] = g;
            a = g as usize;
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
            self.parent[small] = big as u32;
            self.size[big] += self.size[small];
        }
    }
}

/// Swendsen–Wang move of `field` under pair couplings `(bond, J_b)`.
fn swendsen_wang_field<'a>(
    field: &mut [i8],
    pairs: impl Iterator<Item = ((u32, u32), f64)> + 'a,
    beta: f64,
    rng: &mut Xoshiro256StarStar,
) {
    let n = field.len();
    let mut uf = UnionFind::new(n);
    // activation probability 1 - exp(-2 beta |J|) as a 64-bit threshold;
    // the few distinct couplings of the common models are memoised
    let mut memo: [(f64, u64); 4] = [(f64::NAN, 0); 4];
    let mut next = 0;
    for ((a, b), j) in pairs {
        let (a, b) = (a as usize, b as usize);
        if j * (field[a] * field[b]) as f64 <= 0.0 {
            continue;
        }
        let thr = match memo.iter().find(|m| m.0 == j) {
            Some(m) => m.1,
            None => {
                let p = -(-2.0 * beta * j.abs()).exp_m1();
                let t = (p * 18_446_744_073_709_551_616.0) as u64;
                memo[next] = (j, t);
                next = (next + 1) % memo.len();
                t
            }
        };
        if rng.next_u64() < thr {
            uf.union(a, b);
        }
    }
    let mut flip = vec![0i8; n];
    for s in 0..n {
        let r = uf.find(s);
        if flip[r] == 0 {
            flip[r] = if rng.next_bit() { -1 } else { 1 };
        }
        field[s] *= flip[r];
    }
}

/// One Swendsen–Wang sweep of every field.
pub fn cluster_sweep(state: &mut SpinState, system: &System, beta_t: f64, rng: &mut Xoshiro256StarStar) -> Result<()> {
    system.check_state(state)?;
    let lat = &system.lattice;
    let m = &system.model;
    match m.variant {
        Variant::NnnIsing => {
            let pairs = lat
                .bonds
                .iter()
                .map(|b| (*b, m.j))
                .chain(lat.diagonals.iter().map(|b| (*b, m.k)));
            swendsen_wang_field(&mut state.sigma, pairs, beta_t, rng);
        }
        Variant::Dim => {
            let mut tau = state.tau.take().expect("double Ising state carries tau");
            let c = effective_couplings(system, &tau);
            swendsen_wang_field(&mut state.sigma, lat.bonds.iter().copied().zip(c), beta_t, rng);
            let c = effective_couplings(system, &state.sigma);
            swendsen_wang_field(&mut tau, lat.bonds.iter().copied().zip(c), beta_t, rng);
            state.tau = Some(tau);
        }
    }
    Ok(())
}

/// One unit of simulation time under `algorithm`; returns the Metropolis acceptance rate.
pub fn sweep(
    state: &mut SpinState,
    system: &System,
    algorithm: Algorithm,
    rng: &mut Xoshiro256StarStar,
) -> Result<f64> {
    let beta = system.model.beta_t;
    let acc = metropolis_sweep(state, system, beta, rng)?;
    if algorithm == Algorithm::Hybrid {
        cluster_sweep(state, system, beta, rng)?;
    }
    Ok(acc)
}
