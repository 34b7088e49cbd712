//! Euclidean gamma matrices and 2x2 complex matrix helpers.
//!
//! Chiral basis: `gamma0 = sigma_x`, `gamma1 = sigma_y`, `gamma5 = diag(-1, 1)`
//! (row/column 0 is the `+` chirality).

use num_complex::Complex64;

use crate::thirring::{Spinor2, ZERO2};

const O: Complex64 = Complex64::new(0.0, 0.0);
const R: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
const MI: Complex64 = Complex64::new(0.0, -1.0);
const MR: Complex64 = Complex64::new(-1.0, 0.0);

pub const GAMMA: [Spinor2; 2] = [[[O, R], [R, O]], [[O, MI], [I, O]]];
pub const GAMMA5: Spinor2 = [[MR, O], [O, R]];
pub const IDENTITY: Spinor2 = [[R, O], [O, R]];

pub fn mul(a: &Spinor2, b: &Spinor2) -> Spinor2 {
    let mut c = ZERO2;
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn add(a: &Spinor2, b: &Spinor2) -> Spinor2 {
    let mut c = *a;
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] += b[i][j];
        }
    }
    c
}

pub fn scale(a: &Spinor2, s: Complex64) -> Spinor2 {
    let mut c = *a;
    c.iter_mut().flatten().for_each(|v| *v *= s);
    c
}

pub fn trace(a: &Spinor2) -> Complex64 {
    a[0][0] + a[1][1]
}

/// Largest entry modulus.
pub fn max_abs(a: &Spinor2) -> f64 {
    a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &Spinor2, b: &Spinor2) -> f64 {
    max_abs(&add(a, &scale(b, -R)))
}

/// `gamma5 gamma^mu`, the matrix of the axial current.
pub fn axial_gamma(mu: usize) -> Spinor2 {
    mul(&GAMMA5, &GAMMA[mu])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_algebra() {
        for mu in 0..2 {
            for nu in 0..2 {
                let anti = add(&mul(&GAMMA[mu], &GAMMA[nu]), &mul(&GAMMA[nu], &GAMMA[mu]));
                let expected = if mu == nu { scale(&IDENTITY, 2.0.into()) } else { ZERO2 };
                assert_eq!(anti, expected);
            }
            let anti5 = add(&mul(&GAMMA5, &GAMMA[mu]), &mul(&GAMMA[mu], &GAMMA5));
            assert_eq!(anti5, ZERO2);
        }
        assert_eq!(mul(&GAMMA5, &GAMMA5), IDENTITY);
    }

    #[test]
    fn gamma5_is_product() {
        // gamma5 = i gamma0 gamma1 in this basis
        assert_eq!(scale(&mul(&GAMMA[0], &GAMMA[1]), I), GAMMA5);
    }
}
