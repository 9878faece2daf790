//! Compressed sparse rows and Jacobi-preconditioned Krylov solvers.
//!
//! All reductions run in index order, so results are bit-reproducible.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, LinearSolveFailure, Result};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().expect("pushed with last") += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| math::abs(self.get(j, i) - v) <= tol * (1.0 + math::abs(v))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x);
    b.iter().zip(ax).map(|(b, ax)| b - ax).collect()
}

fn jacobi(a: &CsrMatrix) -> Vec<f64> {
    a.diagonal().into_iter().map(|d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect()
}

/// Preconditioned conjugate gradients for symmetric positive definite `a`.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; a.dim()], SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let minv = jacobi(a);
    let mut x = x0.to_vec();
    let mut r = residual(a, b, &x);
    let mut rel = norm(&r) / bnorm;
    if rel <= tol {
        return Ok((x, SolveStats { iterations: 0, relative_residual: rel }));
    }
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; a.dim()];
    let mut best = (rel, x.clone());
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm(&r) / bnorm;
        if rel <= tol {
            // confirm against the true residual; recurrences drift
            let true_rel = norm(&residual(a, b, &x)) / bnorm;
            if true_rel <= tol {
                return Ok((x, SolveStats { iterations: it, relative_residual: true_rel }));
            }
            r = residual(a, b, &x);
        }
        if rel < best.0 {
            best = (rel, x.clone());
        }
        for i in 0..z.len() {
            z[i] = r[i] * minv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolve(LinearSolveFailure {
        iterations: max_iter,
        relative_residual: best.0,
        best: best.1,
    }))
}

/// Right-preconditioned BiCGSTAB for general nonsingular `a`.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; a.dim()], SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let n = a.dim();
    let minv = jacobi(a);
    let mut x = x0.to_vec();
    let mut r = residual(a, b, &x);
    let mut rel = norm(&r) / bnorm;
    if rel <= tol {
        return Ok((x, SolveStats { iterations: 0, relative_residual: rel }));
    }
    let mut r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut zs = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut best = (rel, x.clone());
    let mut restarts = 0;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            // breakdown: restart from the current iterate
            restarts += 1;
            if restarts > 20 {
                break;
            }
            r = residual(a, b, &x);
            r_hat = r.clone();
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = p[i] * minv[i];
        }
        a.matvec_into(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            omega = 0.0;
            continue;
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            let true_rel = norm(&residual(a, b, &x)) / bnorm;
            if true_rel <= tol {
                return Ok((x, SolveStats { iterations: it, relative_residual: true_rel }));
            }
            r = residual(a, b, &x);
            continue;
        }
        for i in 0..n {
            zs[i] = s[i] * minv[i];
        }
        a.matvec_into(&zs, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * zs[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = norm(&r) / bnorm;
        if rel <= tol {
            let true_rel = norm(&residual(a, b, &x)) / bnorm;
            if true_rel <= tol {
                return Ok((x, SolveStats { iterations: it, relative_residual: true_rel }));
            }
            r = residual(a, b, &x);
        }
        if rel < best.0 {
            best = (rel, x.clone());
        }
    }
    Err(Error::LinearSolve(LinearSolveFailure {
        iterations: it,
        relative_residual: best.0,
        best: best.1,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 2.0)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.0));
                }
                r
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = tridiag(10);
        let (x, stats) = pcg(&a, &[0.0; 10], &[1.0; 10], 1e-12, 100).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn both_solvers_reach_tolerance() {
        let a = tridiag(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        for solver in [pcg, bicgstab] {
            let (x, stats) = solver(&a, &b, &[0.0; 50], 1e-12, 500).unwrap();
            let r = residual(&a, &b, &x);
            assert!(norm(&r) / norm(&b) <= 1e-12, "{stats:?}");
        }
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let a = CsrMatrix::from_rows(vec![vec![(0, 1.0), (0, 2.0), (1, 1.0)], vec![(1, 4.0)]]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.nnz(), 3);
        assert!(!a.is_symmetric(1e-12));
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let a = tridiag(200);
        let b = vec![1.0; 200];
        match pcg(&a, &b, &vec![0.0; 200], 1e-14, 3) {
            Err(Error::LinearSolve(f)) => {
                assert_eq!(f.best.len(), 200);
                assert!(f.relative_residual <= 1.0);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
