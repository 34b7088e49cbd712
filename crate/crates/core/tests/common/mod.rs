//! Exhaustive-enumeration oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use thirring_lab::mc::{hamiltonian, visit_states, LatticeModel, MCRun, SpinState, Variant};

/// Bonds of the open `l x l` lattice as pairs of site indices `x + l y`,
/// horizontal then vertical per site.
pub fn open_bonds(l: usize) -> Vec<(usize, usize)> {
    let mut b = Vec::new();
    for y in 0..l {
        for x in 0..l {
            if x + 1 < l {
                b.push((x + l * y, x + 1 + l * y));
            }
            if y + 1 < l {
                b.push((x + l * y, x + l * (y + 1)));
            }
        }
    }
    b
}

pub fn spin(state: u64, site: usize) -> f64 {
    if state >> site & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Exact Boltzmann averages of the nearest-neighbour model by enumeration.
pub struct IsingEnumeration {
    pub l: usize,
    pub log_z: f64,
    pub bonds: Vec<(usize, usize)>,
    pub bond_mean: Vec<f64>,
    /// `<E_a E_b>` (not connected).
    pub bond_second: Vec<Vec<f64>>,
}

impl IsingEnumeration {
    pub fn new(l: usize, k: f64) -> Self {
        let n = l * l;
        let bonds = open_bonds(l);
        let nb = bonds.len();
        let mut z = 0.0;
        let mut mean = vec![0.0; nb];
        let mut second = vec![vec![0.0; nb]; nb];
        let mut e = vec![0.0; nb];
        // shift the exponent by the ground-state energy to avoid overflow
        let shift = k * nb as f64;
        for state in 0..(1u64 << n) {
            let mut h = 0.0;
            for (i, &(a, b)) in bonds.iter().enumerate() {
                e[i] = spin(state, a) * spin(state, b);
                h += e[i];
            }
            let w = (k * h - shift).exp();
            z += w;
            for i in 0..nb {
                mean[i] += w * e[i];
                for j in 0..nb {
                    second[i][j] += w * e[i] * e[j];
                }
            }
        }
        mean.iter_mut().for_each(|m| *m /= z);
        second.iter_mut().flatten().for_each(|m| *m /= z);
        IsingEnumeration {
            l,
            log_z: z.ln() + shift,
            bonds,
            bond_mean: mean,
            bond_second: second,
        }
    }

    pub fn bond_connected(&self, a: usize, b: usize) -> f64 {
        self.bond_second[a][b] - self.bond_mean[a] * self.bond_mean[b]
    }

    pub fn incident(&self, site: usize) -> Vec<usize> {
        (0..self.bonds.len())
            .filter(|&i| self.bonds[i].0 == site || self.bonds[i].1 == site)
            .collect()
    }

    /// Connected correlator of the site energies `O_x = sum of incident bonds`.
    pub fn site_connected(&self, x: usize, y: usize) -> f64 {
        let mut s = 0.0;
        for a in self.incident(x) {
            for b in self.incident(y) {
                s += self.bond_connected(a, b);
            }
        }
        s
    }
}

pub fn state_from_code(model: &LatticeModel, code: u64) -> SpinState {
    let n = model.l * model.l;
    let bit = |i: usize| if code >> i & 1 == 1 { 1i8 } else { -1i8 };
    SpinState {
        l: model.l,
        sigma: (0..n).map(bit).collect(),
        tau: (model.variant == Variant::Dim).then(|| (n..2 * n).map(bit).collect()),
    }
}

/// Total-variation distance between the visited-state histogram and Boltzmann.
pub fn tv_distance(model: &LatticeModel, run: &MCRun) -> f64 {
    let system = model.build().unwrap();
    let spins = model.l * model.l * if model.variant == Variant::Dim { 2 } else { 1 };
    let weights: Vec<f64> = (0..1u64 << spins)
        .map(|c| (-model.beta_t * hamiltonian(&state_from_code(model, c), &system).unwrap()).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let mut hist: HashMap<u64, f64> = HashMap::new();
    let mut n = 0.0;
    visit_states(model, run, 0, |s| {
        *hist.entry(s.code()).or_default() += 1.0;
        n += 1.0;
    })
    .unwrap();
    0.5 * weights
        .iter()
        .enumerate()
        .map(|(c, w)| (w / z - hist.get(&(c as u64)).copied().unwrap_or(0.0) / n).abs())
        .sum::<f64>()
}
