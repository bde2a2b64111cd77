//! Compressed sparse row matrices and the two linear solvers: a sparse
//! Cholesky factorization (through `faer`) and Jacobi-preconditioned CG.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Square sparse matrix in CSR format with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries. Within a row, duplicates are added in input order,
    /// so the result is independent of thread scheduling upstream.
    pub fn from_triplets(n: usize, triplets: &[(u32, u32, f64)]) -> Self {
        let mut count = vec![0usize; n + 1];
        for &(r, _, _) in triplets {
            count[r as usize + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut buf = vec![(0u32, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            buf[next[r as usize]] = (c, v);
            next[r as usize] += 1;
        }
        let rows: Vec<Vec<(u32, f64)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = buf[count[i]..count[i + 1]].to_vec();
                row.sort_by_key(|e| e.0);
                let mut out: Vec<(u32, f64)> = Vec::with_capacity(row.len());
                for (c, v) in row {
                    match out.last_mut() {
                        Some(last) if last.0 == c => last.1 += v,
                        _ => out.push((c, v)),
                    }
                }
                out
            })
            .collect();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for row in rows {
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut t = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    t.push((i as u32, j as u32, v));
                }
            }
        }
        Self::from_triplets(n, &t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().zip(&self.values[r]).map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&(j as u32)) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        });
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Coordinate text format, one `row col value` entry per line, 0-based.
    pub fn write_coo(&self, out: &mut impl Write) -> std::io::Result<()> {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                writeln!(out, "{i} {j} {v:.16e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolverKind {
    /// Direct below [`DIRECT_LIMIT`] unknowns, CG above.
    #[default]
    Auto,
    Direct,
    Cg,
}

/// Largest system solved directly by [`SolverKind::Auto`].
pub const DIRECT_LIMIT: usize = 2_000_000;

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub kind: SolverKind,
    /// Relative residual `||b - Ax|| / ||b||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { kind: SolverKind::Auto, tol: 1e-10, max_iter: 100_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub direct: bool,
    pub iterations: usize,
    pub residual: f64,
}

pub fn solve(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
    let direct = match opts.kind {
        SolverKind::Direct => true,
        SolverKind::Cg => false,
        SolverKind::Auto => a.n() < DIRECT_LIMIT,
    };
    if direct {
        let x = cholesky_solve(a, b)?;
        let residual = relative_residual(a, &x, b);
        Ok((x, SolveStats { direct: true, iterations: 0, residual }))
    } else {
        cg(a, b, opts.tol, opts.max_iter)
    }
}

pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let mut r = vec![0.0; a.n()];
    a.matvec(x, &mut r);
    let num: f64 = r.iter().zip(b).map(|(ax, bi)| (bi - ax).powi(2)).sum::<f64>().sqrt();
    let den = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn cholesky_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut t = Vec::with_capacity(a.nnz() / 2 + n);
    for i in 0..n {
        for (j, v) in a.row(i) {
            if j >= i {
                // column-major lower triangle of a symmetric matrix
                t.push(Triplet::new(j, i, v));
            }
        }
    }
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let llt = m.sp_cholesky(faer::Side::Lower).map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    let x = llt.solve(&rhs);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Factorization("non-finite solution".into()));
    }
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // fixed chunking keeps the reduction order independent of the thread count
    a.par_chunks(4096).zip(b.par_chunks(4096)).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>()).collect::<Vec<_>>().iter().sum()
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn cg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n();
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok((x, SolveStats { direct: false, iterations: 0, residual: 0.0 }));
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        let res = dot(&r, &r).sqrt() / bnorm;
        history.push(res);
        if res <= tol {
            return Ok((x, SolveStats { direct: false, iterations: it, residual: res }));
        }
        z.par_iter_mut().zip(&r).zip(&inv_diag).for_each(|((zi, ri), d)| *zi = ri * d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    let residual = *history.last().unwrap_or(&1.0);
    Err(Error::Stagnation { iterations: max_iter, residual, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_by_one() {
        let a = CsrMatrix::dense(&[vec![2.0]]);
        for kind in [SolverKind::Direct, SolverKind::Cg] {
            let (x, _) = solve(&a, &[4.0], &SolverOptions { kind, ..Default::default() }).unwrap();
            assert!((x[0] - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, 5.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 3);
    }

    fn random_spd(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| b[i][k] * b[j][k]).sum::<f64>() + if i == j { n as f64 } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn manufactured_spd_system() {
        let dense = random_spd(50, 11);
        let a = CsrMatrix::dense(&dense);
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; 50];
        a.matvec(&xs, &mut b);
        for kind in [SolverKind::Direct, SolverKind::Cg] {
            let (x, st) = solve(&a, &b, &SolverOptions { kind, ..Default::default() }).unwrap();
            assert!(st.residual <= 1e-10);
            for (p, q) in x.iter().zip(&xs) {
                assert!((p - q).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn stagnation_reports_history() {
        let a = CsrMatrix::dense(&random_spd(30, 2));
        let b = vec![1.0; 30];
        match cg(&a, &b, 1e-30, 3) {
            Err(Error::Stagnation { iterations, history, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(history.len(), 3);
            }
            other => panic!("expected stagnation, got {other:?}"),
        }
    }
}
