//! Truncated SVD of a sparse matrix by block subspace iteration with a
//! Rayleigh–Ritz step through a small one-sided Jacobi SVD.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg::{combine, jacobi_svd, norm, thin_qr, Columns};
use super::matrix::{DenseMatrix, SparseMatrix};
use crate::error::{Error, Result};

/// Extra basis vectors carried beyond the requested rank.
const OVERSAMPLE: usize = 10;
const MAX_ITER: usize = 1000;
/// Components below this fraction of the largest singular value are dropped.
pub const DROP_RELATIVE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    /// `n_rows × r`, orthonormal columns.
    pub u: DenseMatrix,
    /// `r` positive, non-increasing singular values.
    pub s: Vec<f64>,
    /// `n_cols × r`, orthonormal columns.
    pub v: DenseMatrix,
    /// Set when fewer than the requested number of components were kept.
    pub rank_deficient: bool,
    pub iterations: usize,
}

/// Top-`d` singular triplets of `a`. Deterministic given `seed`. Each
/// component's sign is fixed so that the largest-magnitude entry of its left
/// singular vector is positive.
pub fn truncated_svd(a: &SparseMatrix, d: usize, seed: u64) -> Result<SvdFactors> {
    if d == 0 {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: "rank must be at least 1".into(),
        });
    }
    let (m, n) = (a.n_rows, a.n_cols);
    if m == 0 || n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if d > m.min(n) {
        log::warn!("requested rank {d} exceeds matrix dimensions {m}x{n}; truncating");
    }
    let transposed = m > n;
    let work = if transposed { a.transpose() } else { a.clone() };
    let (mut u_cols, s, mut v_cols, iterations) = subspace_iteration(&work, d.min(m.min(n)), seed);
    if transposed {
        std::mem::swap(&mut u_cols, &mut v_cols);
    }

    let smax = s.first().copied().unwrap_or(0.0);
    let keep = s
        .iter()
        .take(d)
        .take_while(|&&x| smax > 0.0 && x > DROP_RELATIVE * smax)
        .count();
    if keep < d {
        log::warn!("matrix has numerical rank {keep} < requested {d}");
    }
    u_cols.truncate(keep);
    v_cols.truncate(keep);
    for (uc, vc) in u_cols.iter_mut().zip(v_cols.iter_mut()) {
        let mut best = 0;
        for (i, x) in uc.iter().enumerate() {
            if x.abs() > uc[best].abs() {
                best = i;
            }
        }
        if uc[best] < 0.0 {
            uc.iter_mut().for_each(|x| *x = -*x);
            vc.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(SvdFactors {
        u: DenseMatrix::from_columns(&u_cols, m),
        s: s[..keep].to_vec(),
        v: DenseMatrix::from_columns(&v_cols, n),
        rank_deficient: keep < d,
        iterations,
    })
}

/// Requires `n_rows <= n_cols` and `d <= n_rows`.
fn subspace_iteration(a: &SparseMatrix, d: usize, seed: u64) -> (Columns, Vec<f64>, Columns, usize) {
    let (m, n) = (a.n_rows, a.n_cols);
    let l = (d + OVERSAMPLE).min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega: Columns = (0..l)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let (mut q, _) = thin_qr(&a.mul_columns(&omega));

    let mut best_residual = f64::INFINITY;
    let mut stalled = 0;
    let mut result = None;
    for it in 1..=MAX_ITER {
        let z = a.tmul_columns(&q);
        let (q2, r) = thin_qr(&z);
        let r_cols: Columns = (0..l).map(|j| r.iter().map(|row| row[j]).collect()).collect();
        let (ur, sigma, vr) = jacobi_svd(&r_cols);
        let u: Columns = vr.iter().map(|c| combine(&q, c)).collect();
        let v: Columns = ur.iter().map(|c| combine(&q2, c)).collect();

        let y = a.mul_columns(&q2);
        let smax = sigma[0];
        let residual = (0..d)
            .map(|i| {
                let av = combine(&y, &ur[i]);
                let diff: Vec<f64> = av.iter().zip(&u[i]).map(|(x, ui)| x - sigma[i] * ui).collect();
                norm(&diff)
            })
            .fold(0.0, f64::max);

        let converged = smax == 0.0 || residual <= 1e-13 * smax;
        if residual < 0.5 * best_residual {
            best_residual = residual;
            stalled = 0;
        } else {
            stalled += 1;
        }
        let give_up = it == MAX_ITER || (stalled >= 10 && residual <= 1e-9 * smax);
        if converged || give_up {
            if !converged {
                log::warn!("subspace iteration stopped at residual {residual:e} after {it} iterations");
            }
            result = Some((u, sigma, v, it));
            break;
        }
        q = thin_qr(&y).0;
    }
    let (mut u, mut s, mut v, it) = result.expect("loop always produces a result");
    u.truncate(d);
    s.truncate(d);
    v.truncate(d);
    (u, s, v, it)
}

impl SparseMatrix {
    pub fn transpose(&self) -> SparseMatrix {
        let triplets = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        SparseMatrix::from_triplets(self.col_labels.clone(), self.row_labels.clone(), triplets)
            .expect("transpose of a valid matrix is valid")
    }
}
