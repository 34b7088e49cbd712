//! Block-tridiagonal LU of the Kasteleyn matrix, one block per lattice row.
//!
//! Only vertical bond edges couple consecutive rows, so the off-diagonal
//! blocks are sparse with at most `L` entries. Schur complements
//! `S_k = D_k - A_{k,k-1} S_{k-1}^{-1} A_{k-1,k}` are factorized densely.

use rayon::prelude::*;

use crate::error::{contract, LabError, Result};
use crate::ising::kasteleyn::KasteleynMatrix;
use crate::linalg::{Dense, DenseLu};

struct BlockFactor {
    start: usize,
    size: usize,
    lu: DenseLu,
    /// Entries of `A_{k,k-1}` as (local row in k, local col in k-1, value).
    lower: Vec<(usize, usize, f64)>,
    /// `S_k^{-1} A_{k,k+1}` restricted to its nonzero columns (row-major, size x cols.len()).
    x: Vec<f64>,
    x_cols: Vec<usize>,
}

pub struct BlockSolver {
    n: usize,
    blocks: Vec<BlockFactor>,
    log_abs_det: f64,
}

impl BlockSolver {
    /// Row blocks have even size only for even `L`; odd `L` gives singular
    /// leading blocks and is rejected.
    pub fn factor(k: &KasteleynMatrix) -> Result<Self> {
        contract!(k.graph.l % 2 == 0, "row-block factorization needs even L, got {}", k.graph.l);
        let starts = &k.graph.row_start;
        let n = k.dim();
        let nb = starts.len() - 1;
        let block_of = |i: usize| starts.partition_point(|&s| s <= i) - 1;

        let mut diag: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nb];
        let mut upper: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nb];
        let mut lower: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nb];
        for (i, j, v) in k.entries() {
            let (bi, bj) = (block_of(i), block_of(j));
            let (li, lj) = (i - starts[bi], j - starts[bj]);
            if bi == bj {
                diag[bi].push((li, lj, v));
            } else if bj == bi + 1 {
                upper[bi].push((li, lj, v));
            } else if bi == bj + 1 {
                lower[bi].push((li, lj, v));
            } else {
                return Err(LabError::Construction(format!(
                    "entry ({i}, {j}) couples non-adjacent rows {bi} and {bj}"
                )));
            }
        }

        let mut blocks: Vec<BlockFactor> = Vec::with_capacity(nb);
        let mut log_abs_det = 0.0;
        for b in 0..nb {
            let size = starts[b + 1] - starts[b];
            let mut s = Dense::zeros(size);
            for &(i, j, v) in &diag[b] {
                s.add(i, j, v);
            }
            if b > 0 {
                let prev = &blocks[b - 1];
                let nc = prev.x_cols.len();
                for &(r, c, v) in &lower[b] {
                    for (t, &col) in prev.x_cols.iter().enumerate() {
                        s.add(r, col, -v * prev.x[c * nc + t]);
                    }
                }
            }
            let lu = DenseLu::factor(s).map_err(|e| match e {
                LabError::Numerical(m) => LabError::Numerical(format!("row block {b}: {m}")),
                other => other,
            })?;
            log_abs_det += lu.log_abs_det();

            let mut x_cols: Vec<usize> = upper[b].iter().map(|e| e.1).collect();
            x_cols.sort_unstable();
            x_cols.dedup();
            let nc = x_cols.len();
            let mut x = vec![0.0; size * nc];
            for &(r, c, v) in &upper[b] {
                let t = x_cols.binary_search(&c).unwrap();
                x[r * nc + t] += v;
            }
            if nc > 0 {
                lu.solve_in_place(&mut x, nc)?;
            }
            blocks.push(BlockFactor {
                start: starts[b],
                size,
                lu,
                lower: std::mem::take(&mut lower[b]),
                x,
                x_cols,
            });
        }
        if !log_abs_det.is_finite() {
            return Err(LabError::Numerical("non-finite log-determinant".into()));
        }
        Ok(BlockSolver { n, blocks, log_abs_det })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `ln |det A|`.
    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    /// Solves `A X = B` for row-major `B` of shape `n x nrhs`.
    pub fn solve(&self, b: &[f64], nrhs: usize) -> Result<Vec<f64>> {
        contract!(b.len() == self.n * nrhs, "right-hand side has {} entries, expected {}", b.len(), self.n * nrhs);
        let mut y = b.to_vec();
        for (k, blk) in self.blocks.iter().enumerate() {
            if k > 0 {
                let prev = &self.blocks[k - 1];
                let (head, tail) = y.split_at_mut(blk.start * nrhs);
                for &(r, c, v) in &blk.lower {
                    for t in 0..nrhs {
                        tail[r * nrhs + t] -= v * head[(prev.start + c) * nrhs + t];
                    }
                }
            }
            let seg = &mut y[blk.start * nrhs..(blk.start + blk.size) * nrhs];
            blk.lu.solve_in_place(seg, nrhs)?;
        }
        for k in (0..self.blocks.len().saturating_sub(1)).rev() {
            let blk = &self.blocks[k];
            let next_start = self.blocks[k + 1].start;
            let nc = blk.x_cols.len();
            let (head, tail) = y.split_at_mut(next_start * nrhs);
            for r in 0..blk.size {
                for (t, &col) in blk.x_cols.iter().enumerate() {
                    let xv = blk.x[r * nc + t];
                    if xv != 0.0 {
                        for q in 0..nrhs {
                            head[(blk.start + r) * nrhs + q] -= xv * tail[col * nrhs + q];
                        }
                    }
                }
            }
        }
        Ok(y)
    }

    /// Columns `A^{-1} e_c` for each requested node `c`, solved in parallel batches.
    pub fn inverse_columns(&self, nodes: &[usize]) -> Result<Vec<Vec<f64>>> {
        for &c in nodes {
            contract!(c < self.n, "node {c} out of range {}", self.n);
        }
        const BATCH: usize = 8;
        let chunks: Vec<Vec<Vec<f64>>> = nodes
            .par_chunks(BATCH)
            .map(|chunk| -> Result<Vec<Vec<f64>>> {
                let m = chunk.len();
                let mut rhs = vec![0.0; self.n * m];
                for (t, &c) in chunk.iter().enumerate() {
                    rhs[c * m + t] = 1.0;
                }
                let sol = self.solve(&rhs, m)?;
                Ok((0..m).map(|t| (0..self.n).map(|i| sol[i * m + t]).collect()).collect())
            })
            .collect::<Result<_>>()?;
        Ok(chunks.into_iter().flatten().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::kasteleyn::FisherGraph;

    #[test]
    fn matches_dense_factorization() {
        let k = KasteleynMatrix::new(FisherGraph::new(6).unwrap(), 0.37).unwrap();
        let solver = BlockSolver::factor(&k).unwrap();
        let dense = k.dense();
        let lu = DenseLu::factor(dense.clone()).unwrap();
        assert!((solver.log_abs_det() - lu.log_abs_det()).abs() < 1e-10 * lu.log_abs_det().abs());
        let cols = solver.inverse_columns(&[0, 7, 50]).unwrap();
        let n = k.dim();
        for (col, &c) in cols.iter().zip(&[0usize, 7, 50]) {
            for i in 0..n {
                let ax: f64 = (0..n).map(|j| dense.get(i, j) * col[j]).sum();
                let e = if i == c { 1.0 } else { 0.0 };
                assert!((ax - e).abs() < 1e-10, "row {i}: {ax}");
            }
        }
    }
}
