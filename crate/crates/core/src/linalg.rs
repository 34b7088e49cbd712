//! Dense LU factorization and skew-symmetric Pfaffians on row-major storage.

use crate::error::{contract, LabError, Result};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn max_asymmetry_skew(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                m = m.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        m
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    log_abs_det: f64,
    det_sign: f64,
}

impl DenseLu {
    pub fn factor(a: Dense) -> Result<Self> {
        let n = a.n;
        let mut lu = a.data;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut log_abs_det = 0.0;
        let mut det_sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(LabError::Numerical(format!(
                    "singular pivot at column {k} of {n}"
                )));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                det_sign = -det_sign;
            }
            let pivot = lu[k * n + k];
            log_abs_det += pivot.abs().ln();
            if pivot < 0.0 {
                det_sign = -det_sign;
            }
            let (top, bottom) = lu.split_at_mut((k + 1) * n);
            let row_k = &top[k * n + k + 1..k * n + n];
            for i in 0..n - k - 1 {
                let row = &mut bottom[i * n..(i + 1) * n];
                let l = row[k] / pivot;
                row[k] = l;
                if l != 0.0 {
                    for (r, u) in row[k + 1..].iter_mut().zip(row_k) {
                        *r -= l * u;
                    }
                }
            }
        }
        Ok(DenseLu {
            n,
            lu,
            perm,
            log_abs_det,
            det_sign,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    pub fn det_sign(&self) -> f64 {
        self.det_sign
    }

    /// Solves `A X = B` in place; `b` is row-major `n x nrhs`.
    pub fn solve_in_place(&self, b: &mut [f64], nrhs: usize) -> Result<()> {
        let n = self.n;
        contract!(b.len() == n * nrhs, "right-hand side has {} entries, expected {}", b.len(), n * nrhs);
        let mut x = vec![0.0; n * nrhs];
        for i in 0..n {
            x[i * nrhs..(i + 1) * nrhs].copy_from_slice(&b[self.perm[i] * nrhs..(self.perm[i] + 1) * nrhs]);
        }
        // forward substitution with unit lower triangle
        for i in 0..n {
            let (done, rest) = x.split_at_mut(i * nrhs);
            let xi = &mut rest[..nrhs];
            for j in 0..i {
                let l = self.lu[i * n + j];
                if l != 0.0 {
                    for (a, b) in xi.iter_mut().zip(&done[j * nrhs..(j + 1) * nrhs]) {
                        *a -= l * b;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = x.split_at_mut((i + 1) * nrhs);
            let xi = &mut head[i * nrhs..];
            for j in i + 1..n {
                let u = self.lu[i * n + j];
                if u != 0.0 {
                    let xj = &tail[(j - i - 1) * nrhs..(j - i) * nrhs];
                    for (a, b) in xi.iter_mut().zip(xj) {
                        *a -= u * b;
                    }
                }
            }
            let d = self.lu[i * n + i];
            xi.iter_mut().for_each(|v| *v /= d);
        }
        b.copy_from_slice(&x);
        Ok(())
    }
}

/// Pfaffian of a skew-symmetric matrix by Parlett–Reid elimination with pivoting.
pub fn pfaffian(a: &Dense) -> Result<f64> {
    let n = a.n;
    contract!(
        a.max_asymmetry_skew() <= 1e-12 * a.data.iter().fold(1.0f64, |m, v| m.max(v.abs())),
        "matrix is not skew-symmetric"
    );
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let mut m = a.data.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // pivot: largest entry in column k below the diagonal
        let mut p = k + 1;
        let mut best = m[(k + 1) * n + k].abs();
        for i in k + 2..n {
            let v = m[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Ok(0.0);
        }
        if p != k + 1 {
            // symmetric swap of rows and columns k+1 and p
            for j in 0..n {
                m.swap((k + 1) * n + j, p * n + j);
            }
            for i in 0..n {
                m.swap(i * n + k + 1, i * n + p);
            }
            pf = -pf;
        }
        let akk1 = m[k * n + k + 1];
        pf *= akk1;
        // Schur complement of the 2x2 block [[0, a], [-a, 0]]
        let akk = m[(k + 1) * n + k];
        let c: Vec<f64> = (k + 2..n).map(|j| m[j * n + k] / akk).collect();
        let d: Vec<f64> = (k + 2..n).map(|j| m[j * n + k + 1]).collect();
        for (ii, i) in (k + 2..n).enumerate() {
            let (ci, di) = (c[ii], d[ii]);
            let row = &mut m[i * n + k + 2..(i + 1) * n];
            for ((r, cj), dj) in row.iter_mut().zip(&c).zip(&d) {
                *r += ci * dj - di * cj;
            }
        }
        k += 2;
    }
    Ok(pf)
}
