//! Numerical laboratory for the exact massless Thirring correlators and the
//! critical exponents of the lattice models whose scaling limit they describe.
//!
//! * [`thirring`]: closed-form Schwinger functions and anomaly coefficients.
//! * [`axioms`], [`bosonization`], [`wti`]: numeric checks of their structural properties.
//! * [`ising`]: exact free-fermion (Pfaffian) solver for the nearest-neighbour Ising model.
//! * [`mc`]: Monte Carlo for the next-nearest-neighbour Ising and double Ising models.
//! * [`analysis`]: power-law fits, jackknife errors and the exponent product.
//! * [`cli`]: the batch front end used by the `thirring-lab` binary.

pub mod error;
pub mod ising;
pub mod linalg;
pub mod mc;
pub mod rng;
pub mod spinor;
pub mod analysis;
pub mod axioms;
pub mod bosonization;
pub mod cli;
pub mod quadrature;
pub mod thirring;
pub mod wti;

pub use error::{LabError, Result};
