//! Statistical consistency of the plug-in estimator: the absolute error of
//! `Î^(k)` shrinks as the sample size grows through 10^3, 10^4, 10^5.

use pidtrunc::{derive_seed, generate_spec, i_k, i_k_estimate, split_target, MaskPolicy};

#[test]
fn median_absolute_error_decreases_with_sample_size() {
    let spec = generate_spec(8, 1.0, 0.5, 0.1, 2024, MaskPolicy::None).unwrap();
    let dist = spec.build_distribution().unwrap();
    let split = split_target(&dist, &spec).unwrap();
    let k = 2;
    let exact = i_k(&split.dist, &split.target, &split.features, k).unwrap();
    assert!(exact > 0.0);

    let mut medians = Vec::new();
    for (gi, &n_s) in [1_000usize, 10_000, 100_000].iter().enumerate() {
        let mut errors: Vec<f64> = (0..20u64)
            .map(|seed| {
                let samples = split
                    .dist
                    .sample(n_s, derive_seed(7000 + gi as u64, seed))
                    .unwrap();
                let est =
                    i_k_estimate(&samples, &split.target, &split.features, k, true).unwrap();
                (est - exact).abs()
            })
            .collect();
        errors.sort_by(|a, b| a.total_cmp(b));
        medians.push((errors[9] + errors[10]) / 2.0);
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "medians not decreasing: {medians:?}"
    );
}
