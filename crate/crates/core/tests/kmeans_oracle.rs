mod common;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qtypology::latent::DenseMatrix;
use qtypology::typology::{kmeans, nearest, KMeansParams};

fn params(k: usize, seed: u64) -> KMeansParams {
    KMeansParams {
        k,
        restarts: 10,
        max_iter: 300,
        tol: 0.0,
        seed,
    }
}

#[test]
fn planted_blobs_reach_the_global_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..30 {
        let k = rng.random_range(2..=3);
        let n = rng.random_range(k + 1..=10);
        let centres: Vec<[f64; 2]> = (0..k).map(|c| [c as f64 * 10.0, rng.random_range(-10.0..10.0)]).collect();
        let points: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let c = centres[i % k];
                vec![c[0] + rng.random_range(-1.0..1.0), c[1] + rng.random_range(-1.0..1.0)]
            })
            .collect();
        let fit = kmeans(&DenseMatrix::from_rows(&points), &params(k, case));
        let best = common::optimal_inertia(&points, k);
        assert!((fit.inertia - best).abs() <= 1e-9 * best.max(1.0), "case {case}: {} vs {best}", fit.inertia);
    }
}

#[test]
fn random_points_never_beat_the_optimum_and_end_at_a_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut optimal = 0;
    for case in 0..40 {
        let k = rng.random_range(2..=3);
        let n = rng.random_range(k..=10);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        let x = DenseMatrix::from_rows(&points);
        let fit = kmeans(&x, &params(k, case));
        let best = common::optimal_inertia(&points, k);
        assert!(fit.inertia >= best - 1e-12, "case {case}: {} below optimum {best}", fit.inertia);
        if (fit.inertia - best).abs() <= 1e-9 {
            optimal += 1;
        }
        for (i, p) in points.iter().enumerate() {
            assert_eq!(nearest(&fit.centroids, p).0, fit.labels[i], "case {case}: point {i} not at its nearest centroid");
        }
    }
    assert!(optimal >= 36, "only {optimal} of 40 fits optimal");
}

#[test]
fn same_seed_same_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let points: Vec<Vec<f64>> = (0..200).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
    let x = DenseMatrix::from_rows(&points);
    let a = kmeans(&x, &params(6, 9));
    let b = kmeans(&x, &params(6, 9));
    assert_eq!(a, b);
}
