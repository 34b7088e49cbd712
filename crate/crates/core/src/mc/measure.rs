//! Chain driver, energy-observable correlators and their jackknife errors.

use rand_core::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{Boundary, LatticeModel, SpinState, System, Variant};
use super::update::{sweep, Algorithm};
use crate::analysis::{jackknife_error, CorrelatorSeries};
use crate::error::{contract, Result};
use crate::rng::{stream_seed, Xoshiro256StarStar};

/// Schedule of a multi-chain run. `sweeps` counts the thermalization sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCRun {
    pub sweeps: usize,
    pub thermalization: usize,
    pub seed: u64,
    pub chains: usize,
    pub measurement_stride: usize,
    #[serde(default)]
    pub algorithm: Algorithm,
}

impl MCRun {
    pub fn new(sweeps: usize, thermalization: usize, seed: u64, chains: usize) -> Self {
        MCRun {
            sweeps,
            thermalization,
            seed,
            chains,
            measurement_stride: 1,
            algorithm: Algorithm::Hybrid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        contract!(
            self.sweeps > self.thermalization,
            "sweeps ({}) must exceed thermalization ({})",
            self.sweeps,
            self.thermalization
        );
        contract!(self.chains >= 2, "at least two chains are needed for error bars, got {}", self.chains);
        contract!(self.measurement_stride >= 1, "measurement stride must be positive");
        Ok(())
    }

    pub fn measurements_per_chain(&self) -> usize {
        (self.sweeps - self.thermalization).div_ceil(self.measurement_stride)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    /// `<O_x O_0>` of the single-field model.
    #[serde(rename = "energy_O")]
    EnergyO,
    #[serde(rename = "plus_Oplus")]
    PlusOplus,
    #[serde(rename = "minus_Ominus")]
    MinusOminus,
    /// `<O^+_x O^-_0>`, which vanishes by symmetry when the fields decouple.
    #[serde(rename = "cross_plus_minus")]
    CrossPlusMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    O,
    Plus,
    Minus,
}

impl Observable {
    pub const ALL: [Observable; 4] = [
        Observable::EnergyO,
        Observable::PlusOplus,
        Observable::MinusOminus,
        Observable::CrossPlusMinus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::EnergyO => "energy_O",
            Observable::PlusOplus => "plus_Oplus",
            Observable::MinusOminus => "minus_Ominus",
            Observable::CrossPlusMinus => "cross_plus_minus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| crate::LabError::Config(format!("unknown observable {s:?}")))
    }

    /// Fields at `x` and at `0`.
    fn fields(&self) -> (Field, Field) {
        match self {
            Observable::EnergyO => (Field::O, Field::O),
            Observable::PlusOplus => (Field::Plus, Field::Plus),
            Observable::MinusOminus => (Field::Minus, Field::Minus),
            Observable::CrossPlusMinus => (Field::Plus, Field::Minus),
        }
    }

    fn allowed(&self, variant: Variant) -> bool {
        (variant == Variant::NnnIsing) == (*self == Observable::EnergyO)
    }

    /// Default observables of a model family.
    pub fn defaults(variant: Variant) -> Vec<Observable> {
        match variant {
            Variant::NnnIsing => vec![Observable::EnergyO],
            Variant::Dim => vec![Observable::PlusOplus, Observable::MinusOminus, Observable::CrossPlusMinus],
        }
    }
}

/// Local energies at every site: `O` for the single-field model, `(O^+, O^-)`
/// for the double model.
pub fn local_energies(state: &SpinState, system: &System) -> Vec<Vec<f64>> {
    let lat = &system.lattice;
    let site_sum = |f: &[i8]| -> Vec<f64> {
        (0..lat.sites())
            .map(|s| {
                let nn: i32 = lat.neighbours(s).iter().map(|&o| f[o as usize] as i32).sum();
                (f[s] as i32 * nn) as f64
            })
            .collect()
    };
    let os = site_sum(&state.sigma);
    match &state.tau {
        None => vec![os],
        Some(t) => {
            let ot = site_sum(t);
            let plus = os.iter().zip(&ot).map(|(a, b)| a + b).collect();
            let minus = os.iter().zip(&ot).map(|(a, b)| a - b).collect();
            vec![plus, minus]
        }
    }
}

/// Insertion geometry on open lattices: pairs `(o + r e, o)` along both axes
/// whose midpoint lies within `L/8` of the lattice centre in each coordinate,
/// so for `r <= L/4` both points stay in the bulk box `[L/4, 3L/4]^2`.
/// Centred pairs feel the boundary less than pairs spread over the whole box.
/// On a torus every site is an origin.
#[derive(Clone, Debug)]
struct Layout {
    l: usize,
    separations: Vec<usize>,
    /// `(field at x, field at 0)` indices into the local-energy fields.
    pairs: Vec<(usize, usize)>,
    fields_used: Vec<usize>,
    box_sites: Vec<usize>,
    box_index: Vec<u32>,
    /// Per separation: origin sites and the unit step (1 or l) of the direction.
    origins: Vec<Vec<(usize, usize)>>,
    periodic: bool,
}

const NOT_IN_BOX: u32 = u32::MAX;

impl Layout {
    fn new(model: &LatticeModel, observables: &[Observable], separations: &[usize]) -> Result<Self> {
        let l = model.l;
        contract!(!separations.is_empty(), "no separations requested");
        contract!(separations[0] >= 1, "separations start at 1");
        for w in separations.windows(2) {
            contract!(w[0] < w[1], "separations must be strictly increasing");
        }
        let r_max = *separations.last().unwrap();
        contract!(r_max <= l / 4, "separation {r_max} exceeds L/4 = {}", l / 4);
        contract!(!observables.is_empty(), "no observables requested");
        for o in observables {
            contract!(o.allowed(model.variant), "{} is not defined for {:?}", o.name(), model.variant);
        }
        let field_index = |f: Field| match f {
            Field::O | Field::Plus => 0,
            Field::Minus => 1,
        };
        let pairs: Vec<(usize, usize)> = observables
            .iter()
            .map(|o| {
                let (a, b) = o.fields();
                (field_index(a), field_index(b))
            })
            .collect();
        let mut fields_used: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        fields_used.sort_unstable();
        fields_used.dedup();
        let periodic = model.boundary == Boundary::Periodic;
        let (lo, hi) = if periodic { (0, l - 1) } else { (l / 4, 3 * l / 4) };
        let mut box_index = vec![NOT_IN_BOX; l * l];
        let mut box_sites = Vec::new();
        for y in lo..=hi {
            for x in lo..=hi {
                box_index[x + l * y] = box_sites.len() as u32;
                box_sites.push(x + l * y);
            }
        }
        let origins = separations
            .iter()
            .map(|&r| {
                let mut o = Vec::new();
                if periodic {
                    for y in 0..l {
                        for x in 0..l {
                            o.push((x + l * y, 1));
                            o.push((y + l * x, l));
                        }
                    }
                } else {
                    let (c, h) = (l / 2, l / 8);
                    for y in c - h..=c + h {
                        // twice the midpoint, 2x + r, within [2(c - h), 2(c + h)]
                        for x in (2 * (c - h)).saturating_sub(r).div_ceil(2)..=(2 * (c + h) - r) / 2 {
                            o.push((x + l * y, 1));
                            o.push((y + l * x, l));
                        }
                    }
                }
                o
            })
            .collect();
        Ok(Layout {
            l,
            separations: separations.to_vec(),
            pairs,
            fields_used,
            box_sites,
            box_index,
            origins,
            periodic,
        })
    }

    #[inline]
    fn shifted(&self, origin: usize, step: usize, r: usize) -> usize {
        if !self.periodic {
            return origin + r * step;
        }
        let (x, y) = (origin % self.l, origin / self.l);
        if step == 1 {
            (x + r) % self.l + self.l * y
        } else {
            x + self.l * ((y + r) % self.l)
        }
    }

    fn n_fields(&self) -> usize {
        self.fields_used.len()
    }

    /// Length of a sample vector: box sums per used field, then pair sums.
    fn width(&self) -> usize {
        self.n_fields() * self.box_sites.len() + self.pairs.len() * self.separations.len()
    }

    fn accumulate(&self, fields: &[Vec<f64>], into: &mut [f64]) {
        let nb = self.box_sites.len();
        for (k, &f) in self.fields_used.iter().enumerate() {
            for (i, &s) in self.box_sites.iter().enumerate() {
                into[k * nb + i] += fields[f][s];
            }
        }
        let base = self.n_fields() * nb;
        let nr = self.separations.len();
        let sums = &mut into[base..];
        for (p, &(a, b)) in self.pairs.iter().enumerate() {
            let (fa, fb) = (&fields[a], &fields[b]);
            let acc = &mut sums[p * nr..(p + 1) * nr];
            for (ri, &r) in self.separations.iter().enumerate() {
                let mut total = 0.0;
                if self.periodic {
                    for &(o, step) in &self.origins[ri] {
                        total += fa[self.shifted(o, step, r)] * fb[o];
                    }
                } else {
                    for &(o, step) in &self.origins[ri] {
                        total += fa[o + r * step] * fb[o];
                    }
                }
                acc[ri] += total;
            }
        }
    }

    /// Connected correlators from summed samples over `count` measurements.
    fn estimate(&self, sums: &[f64], count: f64) -> Vec<Vec<f64>> {
        let nb = self.box_sites.len();
        let base = self.n_fields() * nb;
        let nr = self.separations.len();
        let slot = |f: usize| self.fields_used.iter().position(|&u| u == f).unwrap() * nb;
        let mean = |offset: usize, site: usize| sums[offset + self.box_index[site] as usize] / count;
        self.pairs
            .iter()
            .enumerate()
            .map(|(p, &(a, b))| {
                let (a, b) = (slot(a), slot(b));
                self.separations
                    .iter()
                    .enumerate()
                    .map(|(ri, &r)| {
                        let origins = &self.origins[ri];
                        let disconnected: f64 = origins
                            .iter()
                            .map(|&(o, step)| mean(a, self.shifted(o, step, r)) * mean(b, o))
                            .sum();
                        (sums[base + p * nr + ri] / count - disconnected) / origins.len() as f64
                    })
                    .collect()
            })
            .collect()
    }
}

/// Measurements per stored minibatch.
const MINIBATCH: usize = 8;

/// Everything one chain records.
#[derive(Clone, Debug)]
struct ChainOutput {
    seed: u64,
    acceptance: f64,
    energies: Vec<f64>,
    m2: Vec<f64>,
    m4: Vec<f64>,
    /// Summed correlator samples per minibatch, with their measurement counts.
    minibatches: Vec<(Vec<f64>, usize)>,
}

/// Magnetization moments `(m^2, m^4)`, averaged over the fields.
fn magnetization_moments(state: &SpinState) -> (f64, f64) {
    let n = state.sigma.len() as f64;
    let fields: Vec<&Vec<i8>> = std::iter::once(&state.sigma).chain(state.tau.iter()).collect();
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for f in &fields {
        let m = f.iter().map(|s| *s as i64).sum::<i64>() as f64 / n;
        m2 += m * m;
        m4 += m.powi(4);
    }
    let k = fields.len() as f64;
    (m2 / k, m4 / k)
}

fn run_chain(system: &System, run: &MCRun, chain: usize, layout: Option<&Layout>) -> Result<ChainOutput> {
    let seed = stream_seed(run.seed, chain as u64);
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut state = system.random_state(&mut rng);
    let mut acc_sum = 0.0;
    let mut out = ChainOutput {
        seed,
        acceptance: 0.0,
        energies: Vec::with_capacity(run.measurements_per_chain()),
        m2: Vec::new(),
        m4: Vec::new(),
        minibatches: Vec::new(),
    };
    let mut current: Option<(Vec<f64>, usize)> = None;
    for t in 0..run.sweeps {
        acc_sum += sweep(&mut state, system, run.algorithm, &mut rng)?;
        if t < run.thermalization || (t - run.thermalization) % run.measurement_stride != 0 {
            continue;
        }
        out.energies.push(system.energy_terms(&state)?.energy(&system.model));
        let (m2, m4) = magnetization_moments(&state);
        out.m2.push(m2);
        out.m4.push(m4);
        if let Some(layout) = layout {
            let fields = local_energies(&state, system);
            let mb = current.get_or_insert_with(|| (vec![0.0; layout.width()], 0));
            layout.accumulate(&fields, &mut mb.0);
            mb.1 += 1;
            if mb.1 == MINIBATCH {
                out.minibatches.push(current.take().unwrap());
            }
        }
    }
    if let Some(mb) = current {
        out.minibatches.push(mb);
    }
    out.acceptance = acc_sum / run.sweeps as f64;
    Ok(out)
}

fn run_chains(system: &System, run: &MCRun, layout: Option<&Layout>) -> Result<Vec<ChainOutput>> {
    run.validate()?;
    (0..run.chains)
        .into_par_iter()
        .map(|c| run_chain(system, run, c, layout))
        .collect()
}

/// Integrated autocorrelation time (in measurements) with Sokal's automatic
/// window `W >= 6 tau(W)`.
pub fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 0.5;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = d.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    for w in 1..n / 2 {
        let c = d[..n - w].iter().zip(&d[w..]).map(|(a, b)| a * b).sum::<f64>() / (n - w) as f64;
        tau += c / c0;
        if w as f64 >= 6.0 * tau {
            break;
        }
    }
    tau.max(0.5)
}

/// Block length (in measurements) at least ten autocorrelation times,
/// rounded up to whole minibatches.
fn block_length(tau: f64) -> usize {
    let raw = (10.0 * tau).ceil().max(1.0) as usize;
    raw.div_ceil(MINIBATCH) * MINIBATCH
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainSummary {
    pub chain: usize,
    pub seed: u64,
    pub acceptance: f64,
    pub measurements: usize,
    pub mean_energy: f64,
    /// Integrated autocorrelation time of the energy, in sweeps.
    pub tau_energy: f64,
}

/// Connected correlator of one observable, pooled over chains.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub observable: Observable,
    pub separations: Vec<usize>,
    pub mean: Vec<f64>,
    pub jackknife_error: Vec<f64>,
    pub per_chain: Vec<Vec<f64>>,
    /// Leave-one-block-out estimates.
    pub jackknife: Vec<Vec<f64>>,
    pub chain_count: usize,
    pub warnings: Vec<String>,
}

impl ObservableSeries {
    pub fn to_correlator_series(&self) -> CorrelatorSeries {
        CorrelatorSeries {
            label: self.observable.name().to_string(),
            separations: self.separations.iter().map(|r| *r as f64).collect(),
            values: self.mean.clone(),
            errors: Some(self.jackknife_error.clone()),
            jackknife: Some(self.jackknife.clone()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelatorRun {
    pub model: LatticeModel,
    pub run: MCRun,
    pub series: Vec<ObservableSeries>,
    pub chains: Vec<ChainSummary>,
    /// Jackknife block length in measurements.
    pub block_length: usize,
    pub blocks: usize,
    pub warnings: Vec<String>,
}

impl CorrelatorRun {
    pub fn series(&self, observable: Observable) -> Option<&ObservableSeries> {
        self.series.iter().find(|s| s.observable == observable)
    }
}

/// Relative error above which the largest separation is flagged.
pub const INSUFFICIENT_STATISTICS: f64 = 0.5;

/// Runs `run.chains` chains of `model` and tabulates the connected correlators
/// of `observables` at `separations`.
pub fn measure_correlators(
    model: &LatticeModel,
    run: &MCRun,
    observables: &[Observable],
    separations: &[usize],
) -> Result<CorrelatorRun> {
    let system = model.build()?;
    let layout = Layout::new(model, observables, separations)?;
    let outputs = run_chains(&system, run, Some(&layout))?;

    let taus: Vec<f64> = outputs.iter().map(|o| integrated_autocorrelation(&o.energies)).collect();
    let tau_max = taus.iter().cloned().fold(0.5, f64::max);
    let blen = block_length(tau_max);
    let per_block = blen / MINIBATCH;
    let mut warnings = Vec::new();

    let width = layout.width();
    let mut blocks: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut chain_totals: Vec<(Vec<f64>, f64)> = Vec::new();
    for o in &outputs {
        let mut total = (vec![0.0; width], 0.0);
        for group in o.minibatches.chunks(per_block) {
            let mut b = (vec![0.0; width], 0.0);
            for (v, c) in group {
                b.0.iter_mut().zip(v).for_each(|(a, x)| *a += x);
                b.1 += *c as f64;
            }
            total.0.iter_mut().zip(&b.0).for_each(|(a, x)| *a += x);
            total.1 += b.1;
            // a trailing partial block joins the statistics but not the jackknife
            if group.len() == per_block {
                blocks.push(b);
            } else if let Some(last) = blocks.last_mut() {
                last.0.iter_mut().zip(&b.0).for_each(|(a, x)| *a += x);
                last.1 += b.1;
            } else {
                blocks.push(b);
            }
        }
        chain_totals.push(total);
    }
    if blocks.len() < 10 {
        warnings.push(format!(
            "only {} jackknife blocks of {} measurements (tau_int = {:.1} measurements)",
            blocks.len(),
            blen,
            tau_max
        ));
    }
    let mut grand = vec![0.0; width];
    let mut grand_count = 0.0;
    for (v, c) in &chain_totals {
        grand.iter_mut().zip(v).for_each(|(a, x)| *a += x);
        grand_count += c;
    }
    let mean = layout.estimate(&grand, grand_count);
    let replicas: Vec<Vec<Vec<f64>>> = blocks
        .par_iter()
        .map(|(v, c)| {
            let rest: Vec<f64> = grand.iter().zip(v).map(|(g, x)| g - x).collect();
            layout.estimate(&rest, grand_count - c)
        })
        .collect();
    let per_chain: Vec<Vec<Vec<f64>>> = chain_totals.iter().map(|(v, c)| layout.estimate(v, *c)).collect();

    let nr = separations.len();
    let series = observables
        .iter()
        .enumerate()
        .map(|(p, &obs)| {
            let jackknife: Vec<Vec<f64>> = replicas.iter().map(|r| r[p].clone()).collect();
            let err: Vec<f64> = (0..nr)
                .map(|i| jackknife_error(&jackknife.iter().map(|r| r[i]).collect::<Vec<_>>()))
                .collect();
            let mut w = Vec::new();
            let last = nr - 1;
            if (err[last] / mean[p][last]).abs() > INSUFFICIENT_STATISTICS {
                w.push(format!(
                    "insufficient statistics: relative error {:.2} at separation {}",
                    (err[last] / mean[p][last]).abs(),
                    separations[last]
                ));
            }
            ObservableSeries {
                observable: obs,
                separations: separations.to_vec(),
                mean: mean[p].clone(),
                jackknife_error: err,
                per_chain: per_chain.iter().map(|c| c[p].clone()).collect(),
                jackknife,
                chain_count: run.chains,
                warnings: w,
            }
        })
        .collect();

    let chains = outputs
        .iter()
        .zip(&taus)
        .enumerate()
        .map(|(c, (o, tau))| ChainSummary {
            chain: c,
            seed: o.seed,
            acceptance: o.acceptance,
            measurements: o.energies.len(),
            mean_energy: o.energies.iter().sum::<f64>() / o.energies.len() as f64,
            tau_energy: tau * run.measurement_stride as f64,
        })
        .collect();
    Ok(CorrelatorRun {
        model: *model,
        run: *run,
        series,
        chains,
        block_length: blen,
        blocks: blocks.len(),
        warnings,
    })
}

/// Time series of one chain for Binder-cumulant analysis.
#[derive(Clone, Debug)]
pub struct MomentSeries {
    pub energies: Vec<f64>,
    pub m2: Vec<f64>,
    pub m4: Vec<f64>,
    pub acceptance: f64,
    pub tau_energy: f64,
}

/// Runs the chains recording only the energy and magnetization moments.
pub fn sample_moments(model: &LatticeModel, run: &MCRun) -> Result<Vec<MomentSeries>> {
    let system = model.build()?;
    Ok(run_chains(&system, run, None)?
        .into_iter()
        .map(|o| MomentSeries {
            tau_energy: integrated_autocorrelation(&o.energies),
            energies: o.energies,
            m2: o.m2,
            m4: o.m4,
            acceptance: o.acceptance,
        })
        .collect())
}

/// Calls `visit` on every measured state of one chain; returns the mean
/// acceptance rate.
pub fn visit_states(
    model: &LatticeModel,
    run: &MCRun,
    chain: usize,
    mut visit: impl FnMut(&SpinState),
) -> Result<f64> {
    run.validate()?;
    let system = model.build()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(stream_seed(run.seed, chain as u64));
    let mut state = system.random_state(&mut rng);
    let mut acc = 0.0;
    for t in 0..run.sweeps {
        acc += sweep(&mut state, &system, run.algorithm, &mut rng)?;
        if t >= run.thermalization && (t - run.thermalization) % run.measurement_stride == 0 {
            visit(&state);
        }
    }
    Ok(acc / run.sweeps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocorrelation_of_ar1() {
        // AR(1) with coefficient a has tau_int = (1 + a) / (2 (1 - a))
        let mut rng = Xoshiro256StarStar::seed_from_u64(1);
        let a: f64 = 0.8;
        let mut x = 0.0;
        let series: Vec<f64> = (0..200_000)
            .map(|_| {
                x = a * x + (rng.uniform() - 0.5);
                x
            })
            .collect();
        let tau = integrated_autocorrelation(&series);
        let exact = (1.0 + a) / (2.0 * (1.0 - a));
        assert!((tau - exact).abs() < 0.1 * exact, "{tau} vs {exact}");
    }

    #[test]
    fn layout_contracts() {
        let m = LatticeModel::nnn_ising(16, 1.0, 0.0, 0.44);
        assert!(Layout::new(&m, &[Observable::EnergyO], &[1, 2, 5]).is_err());
        assert!(Layout::new(&m, &[Observable::EnergyO], &[2, 1]).is_err());
        assert!(Layout::new(&m, &[Observable::PlusOplus], &[1, 2]).is_err());
        let lay = Layout::new(&m, &[Observable::EnergyO], &[1, 2, 3, 4]).unwrap();
        for (ri, r) in (1..=4).enumerate() {
            // midpoints within L/8 = 2 of the centre: 5 rows, 5 - (r % 2) columns, two axes
            assert_eq!(lay.origins[ri].len(), 2 * 5 * (5 - r % 2));
            // both points stay in the bulk box
            for &(o, step) in &lay.origins[ri] {
                let far = lay.shifted(o, step, r);
                assert_ne!(lay.box_index[o], NOT_IN_BOX);
                assert_ne!(lay.box_index[far], NOT_IN_BOX);
                let (along, across) = if step == 1 { (o % 16, o / 16) } else { (o / 16, o % 16) };
                assert!((12..=20).contains(&(2 * along + r)));
                assert!((6..=10).contains(&across));
            }
        }
    }

    #[test]
    fn run_contracts() {
        assert!(MCRun::new(10, 10, 1, 2).validate().is_err());
        assert!(MCRun::new(10, 2, 1, 1).validate().is_err());
        assert_eq!(MCRun::new(10, 2, 1, 2).measurements_per_chain(), 8);
    }
}
