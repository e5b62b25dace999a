mod common;

#[test]
fn truncated_svd_and_projection_match_dense_reference() {
    let worst = common::svd_fixture_sweep(100, 21).unwrap();
    assert!(worst <= 1e-8, "worst deviation {worst:e}");
}

#[test]
fn rank_deficient_input_keeps_only_nonzero_components() {
    // Rank 2: the third row is the sum of the first two.
    let a = qtypology::latent::DenseMatrix::from_rows(&[
        vec![1.0, 0.0, 2.0, 0.0],
        vec![0.0, 3.0, 0.0, 1.0],
        vec![1.0, 3.0, 2.0, 1.0],
    ]);
    let q = qtypology::latent::DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0, 0.0]]);
    let worst = common::svd_deviation(&a, &q, 3, 0).unwrap();
    assert!(worst <= 1e-8, "worst deviation {worst:e}");
}
