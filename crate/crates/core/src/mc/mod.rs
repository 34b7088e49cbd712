//! Monte Carlo for the next-nearest-neighbour Ising model and the double
//! Ising model, with energy-observable correlators at criticality.

pub mod binder;
pub mod measure;
pub mod model;
pub mod update;

pub use binder::{dim_self_dual_beta_j, locate_tc, CriticalEstimate, TcScan};
pub use measure::{
    integrated_autocorrelation, local_energies, measure_correlators, sample_moments, visit_states, CorrelatorRun,
    MCRun, Observable, ObservableSeries,
};
pub use model::{hamiltonian, Boundary, Kernel, LatticeModel, SpinState, System, Variant};
pub use update::{cluster_sweep, flip_energy, metropolis_sweep, Algorithm};
