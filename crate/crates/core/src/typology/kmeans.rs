//! Lloyd's k-means with k-means++ seeding and best-of-restarts selection.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::latent::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the relative drop in inertia falls to this or below.
    pub tol: f64,
    pub seed: u64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            k: 8,
            restarts: 10,
            max_iter: 300,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: DenseMatrix,
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each Lloyd iteration of the winning run.
    pub history: Vec<f64>,
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid by Euclidean distance; ties go to the lowest index.
pub fn nearest(centroids: &DenseMatrix, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.rows {
        let d = squared_distance(centroids.row(c), x);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Clusters the rows of `points`. Requires `1 <= k <= points.rows`.
pub fn kmeans(points: &DenseMatrix, params: &KMeansParams) -> KMeansFit {
    assert!(params.k >= 1 && params.k <= points.rows, "k must be in 1..=n");
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let seeds: Vec<u64> = (0..params.restarts.max(1)).map(|_| master.next_u64()).collect();
    let runs: Vec<KMeansFit> = seeds
        .par_iter()
        .map(|&s| single_run(points, params, &mut ChaCha8Rng::seed_from_u64(s)))
        .collect();
    // Strictly smaller inertia wins, so ties keep the earliest restart.
    runs.into_iter()
        .reduce(|best, run| if run.inertia < best.inertia { run } else { best })
        .expect("at least one restart")
}

fn plus_plus_seeding(points: &DenseMatrix, k: usize, rng: &mut impl Rng) -> DenseMatrix {
    let n = points.rows;
    let mut centroids = DenseMatrix::zeros(k, points.cols);
    let first = rng.random_range(0..n);
    centroids.data[..points.cols].copy_from_slice(points.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| squared_distance(points.row(i), points.row(first))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.data[c * points.cols..(c + 1) * points.cols].copy_from_slice(points.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(points.row(i), points.row(pick)));
        }
    }
    centroids
}

fn single_run(points: &DenseMatrix, params: &KMeansParams, rng: &mut impl Rng) -> KMeansFit {
    let (n, dim, k) = (points.rows, points.cols, params.k);
    let mut centroids = plus_plus_seeding(points, k, rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();

    for _ in 0..params.max_iter.max(1) {
        for i in 0..n {
            let (c, d) = nearest(&centroids, points.row(i));
            labels[i] = c;
            dists[i] = d;
        }
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        // Empty clusters take over the point farthest from its centroid.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[labels[i]] > 1)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .expect("k <= n leaves a donor cluster");
                counts[labels[far]] -= 1;
                labels[far] = c;
                dists[far] = 0.0;
                counts[c] = 1;
                centroids.data[c * dim..(c + 1) * dim].copy_from_slice(points.row(far));
            }
        }
        let mut sums = DenseMatrix::zeros(k, dim);
        for i in 0..n {
            let row = points.row(i);
            let l = labels[i];
            for j in 0..dim {
                sums.data[l * dim + j] += row[j];
            }
        }
        for c in 0..k {
            for j in 0..dim {
                sums.data[c * dim + j] /= counts[c] as f64;
            }
        }
        centroids = sums;
        let inertia: f64 = (0..n).map(|i| squared_distance(points.row(i), centroids.row(labels[i]))).sum();
        let prev = history.last().copied();
        history.push(inertia);
        if let Some(prev) = prev {
            if prev - inertia <= params.tol * prev.max(f64::MIN_POSITIVE) {
                break;
            }
        }
    }
    // Final assignment against the converged centroids.
    for i in 0..n {
        labels[i] = nearest(&centroids, points.row(i)).0;
    }
    let inertia = (0..n).map(|i| squared_distance(points.row(i), centroids.row(labels[i]))).sum();
    KMeansFit {
        centroids,
        labels,
        inertia,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let pts = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let fit = kmeans(
            &pts,
            &KMeansParams {
                k: 3,
                restarts: 3,
                ..Default::default()
            },
        );
        assert!(fit.inertia.abs() < 1e-15);
        let mut labels = fit.labels.clone();
        labels.sort();
        assert_eq!(labels, vec![0, 1, 2]);
    }

    #[test]
    fn nearest_breaks_ties_low() {
        let c = DenseMatrix::from_rows(&[vec![1.0], vec![-1.0]]);
        assert_eq!(nearest(&c, &[0.0]).0, 0);
    }

    #[test]
    fn deterministic_given_seed() {
        let pts = DenseMatrix::from_rows(&(0..30).map(|i| vec![(i as f64).sin(), (i as f64 * 0.7).cos()]).collect::<Vec<_>>());
        let p = KMeansParams {
            k: 4,
            restarts: 5,
            seed: 11,
            ..Default::default()
        };
        assert_eq!(kmeans(&pts, &p), kmeans(&pts, &p));
    }

    #[test]
    fn duplicate_points_do_not_break_reseeding() {
        let pts = DenseMatrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0], vec![2.0]]);
        let fit = kmeans(
            &pts,
            &KMeansParams {
                k: 3,
                restarts: 2,
                ..Default::default()
            },
        );
        assert!(fit.inertia.abs() < 1e-15);
        assert!(fit.centroids.data.iter().all(|x| x.is_finite()));
    }
}
