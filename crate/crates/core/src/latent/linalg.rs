//! Small dense kernels for the truncated SVD. Tall matrices are stored as a
//! list of columns.

pub(crate) type Columns = Vec<Vec<f64>>;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Householder thin QR of an `m × l` matrix with `m >= l`. Returns the `l`
/// orthonormal columns of Q and the upper-triangular `l × l` factor R as rows.
/// Rank-deficient inputs still yield an orthonormal Q.
pub(crate) fn thin_qr(cols: &[Vec<f64>]) -> (Columns, Vec<Vec<f64>>) {
    let l = cols.len();
    let m = cols.first().map_or(0, Vec::len);
    assert!(m >= l, "thin QR needs at least as many rows as columns");
    let mut a = cols.to_vec();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(l);

    for k in 0..l {
        let x = &a[k][k..];
        let xnorm = norm(x);
        if xnorm == 0.0 {
            reflectors.push((Vec::new(), 0.0));
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vv = dot(&v, &v);
        let beta = if vv == 0.0 { 0.0 } else { 2.0 / vv };
        for col in a.iter_mut().skip(k) {
            let w = beta * dot(&v, &col[k..]);
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c -= w * vi;
            }
        }
        reflectors.push((v, beta));
    }

    let r = (0..l)
        .map(|i| (0..l).map(|j| if i <= j { a[j][i] } else { 0.0 }).collect())
        .collect();

    let mut q: Columns = (0..l)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();
    for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
        if *beta == 0.0 {
            continue;
        }
        for col in q.iter_mut() {
            let w = beta * dot(v, &col[k..]);
            for (c, vi) in col[k..].iter_mut().zip(v) {
                *c -= w * vi;
            }
        }
    }
    (q, r)
}

/// One-sided Jacobi SVD of an `m × n` matrix (`m >= n`) given by columns.
/// Returns `(U, s, V)` with `s` non-increasing, U `m × n` and V `n × n`, both
/// by columns. Columns of U belonging to zero singular values are zero.
pub(crate) fn jacobi_svd(cols: &[Vec<f64>]) -> (Columns, Vec<f64>, Columns) {
    let n = cols.len();
    let m = cols.first().map_or(0, Vec::len);
    assert!(m >= n, "one-sided Jacobi needs at least as many rows as columns");
    let mut w = cols.to_vec();
    let mut v: Columns = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    const EPS: f64 = 1e-15;
    for _sweep in 0..100 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = dot(&w[i], &w[i]);
                let beta = dot(&w[j], &w[j]);
                let gamma = dot(&w[i], &w[j]);
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let u = order
        .iter()
        .map(|&k| {
            let s = sigma[k];
            if s > 0.0 {
                w[k].iter().map(|x| x / s).collect()
            } else {
                vec![0.0; m]
            }
        })
        .collect();
    let s = order.iter().map(|&k| sigma[k]).collect();
    let v = order.iter().map(|&k| v[k].clone()).collect();
    (u, s, v)
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    let (ci, cj) = (&mut left[i], &mut right[0]);
    for (a, b) in ci.iter_mut().zip(cj.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// `Σ_k coef[k] · cols[k]`.
pub(crate) fn combine(cols: &[Vec<f64>], coef: &[f64]) -> Vec<f64> {
    let m = cols.first().map_or(0, Vec::len);
    let mut out = vec![0.0; m];
    for (c, &a) in cols.iter().zip(coef) {
        if a != 0.0 {
            for (o, x) in out.iter_mut().zip(c) {
                *o += a * x;
            }
        }
    }
    out
}
